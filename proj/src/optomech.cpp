#include "nhsta/optomech.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nhsta/errors.hpp"

namespace nhsta {

void OptomechParams::validate() const {
    if (!(kappa > 0.0)) throw ConfigError("optomech.kappa must be > 0");
    if (!(P_L >= 0.0)) throw ConfigError("optomech.P_L must be >= 0");
    if (!(Omega_L > 0.0)) throw ConfigError("optomech.Omega_L must be > 0");
    for (double v : {omega_mech[0], omega_mech[1], gamma_mech[0], gamma_mech[1], g[0], g[1], kappa_in, delta0})
        if (!std::isfinite(v)) throw ConfigError("optomech: non-finite parameter");
}

namespace {

// eta per unit power
cplx unit_susceptibility(const OptomechParams& p, double delta) {
    const double k2 = 0.5 * p.kappa;
    const double w0 = p.omega0();
    const double pref = p.kappa_in / (p.Omega_L * (k2 * k2 + delta * delta));
    const cplx bracket = 1.0 / cplx(k2, -(w0 + delta)) - 1.0 / cplx(k2, -2.0 * w0 + delta);
    return pref * bracket;
}

cplx unit_susceptibility_derivative(const OptomechParams& p, double delta) {
    const double k2 = 0.5 * p.kappa;
    const double w0 = p.omega0();
    const double q = k2 * k2 + delta * delta;
    const cplx a = cplx(k2, -(w0 + delta));
    const cplx b = cplx(k2, -2.0 * w0 + delta);
    const cplx bracket = 1.0 / a - 1.0 / b;
    const cplx dbracket = kI / (a * a) + kI / (b * b);
    return p.kappa_in / p.Omega_L * (dbracket / q - bracket * (2.0 * delta) / (q * q));
}

}  // namespace

cplx susceptibility(const OptomechParams& p) { return p.P_L * unit_susceptibility(p, p.delta0); }

cplx susceptibility_detuning_derivative(const OptomechParams& p) {
    return p.P_L * unit_susceptibility_derivative(p, p.delta0);
}

ComplexMatrix2 effective_hamiltonian(const OptomechParams& p) {
    const cplx eta = susceptibility(p);
    ComplexMatrix2 h;
    for (int j = 0; j < 2; ++j)
        h(j, j) = cplx(p.omega_mech[j], -0.5 * p.gamma_mech[j]) - kI * p.g[j] * p.g[j] * eta;
    h(0, 1) = h(1, 0) = -kI * eta * p.g[0] * p.g[1];
    return h;
}

bool ControlSchedule::all_feasible() const {
    return std::all_of(feasible.begin(), feasible.end(), [](bool b) { return b; });
}

namespace {

struct Solve {
    double P = 0.0;
    double delta = 0.0;
    double residual = INFINITY;
};

// Relative residual of P c(delta) = eta_t.
double eq_residual(const OptomechParams& f, double P, double delta, cplx eta_t) {
    return std::abs(P * unit_susceptibility(f, delta) - eta_t) / std::abs(eta_t);
}

Solve newton(const OptomechParams& f, double P, double delta, cplx eta_t, double node, DetuningBranch br,
             const InversionOptions& opt) {
    auto clamp_branch = [&](double d) {
        const double gap = 1e-9 * std::max(1.0, std::abs(node));
        return br == DetuningBranch::Lower ? std::min(d, node - gap) : std::max(d, node + gap);
    };
    delta = clamp_branch(delta);
    double res = eq_residual(f, P, delta, eta_t);
    for (int it = 0; it < opt.max_iter && res > 1e-15; ++it) {
        const cplx c = unit_susceptibility(f, delta);
        const cplx dc = unit_susceptibility_derivative(f, delta);
        const cplx R = P * c - eta_t;
        // [Re c, P Re dc; Im c, P Im dc] [dP; dd] = -[Re R; Im R]
        const double a11 = c.real(), a12 = P * dc.real(), a21 = c.imag(), a22 = P * dc.imag();
        const double det = a11 * a22 - a12 * a21;
        if (det == 0.0 || !std::isfinite(det)) break;
        double dP = (-R.real() * a22 + a12 * R.imag()) / det;
        double dd = (-a11 * R.imag() + a21 * R.real()) / det;
        double step = 1.0;
        double nres = INFINITY, nP = P, nd = delta;
        for (int h = 0; h < 40; ++h) {
            nP = P + step * dP;
            nd = clamp_branch(delta + step * dd);
            nres = eq_residual(f, nP, nd, eta_t);
            if (nres < res) break;
            step *= opt.damping;
        }
        if (!(nres < res)) break;
        P = nP;
        delta = nd;
        res = nres;
    }
    return {P, delta, res};
}

Solve scan_seed(const OptomechParams& f, cplx eta_t, double node, const InversionOptions& opt) {
    const double span = opt.scan_span.value_or(20.0 * (f.kappa + std::abs(f.omega0())));
    const int n = std::max(opt.scan_points, 3);
    Solve best;
    double best_phase = INFINITY;
    for (int k = 1; k < n; ++k) {
        const double u = static_cast<double>(k) / n;
        const double d = opt.branch == DetuningBranch::Lower ? node - span * u : node + span * u;
        const cplx c = unit_susceptibility(f, d);
        if (std::abs(c) == 0.0) continue;
        const double ph = std::abs(std::arg(eta_t / c));
        if (ph < best_phase) {
            best_phase = ph;
            best = {std::abs(eta_t) / std::abs(c), d, INFINITY};
        }
    }
    return best;
}

}  // namespace

ControlSchedule invert_controls(const Protocol& target, const OptomechParams& fixed, const InversionOptions& opt) {
    OptomechParams f = fixed;
    f.P_L = 0.0;
    f.validate();
    const double g12 = f.g[0] * f.g[1];
    const double node = 0.5 * f.omega0();
    // diagonal difference without the drive: (w1 - w2)/2 - i (g1 - g2)/4
    const cplx z_bare = cplx(0.5 * (f.omega_mech[0] - f.omega_mech[1]), -0.25 * (f.gamma_mech[0] - f.gamma_mech[1]));
    const cplx z_per_eta = -0.5 * kI * (f.g[0] * f.g[0] - f.g[1] * f.g[1]);

    ControlSchedule out;
    out.times = target.times;
    const std::size_t n = target.times.size();
    out.P_L.resize(n);
    out.delta0.resize(n);
    out.residual.resize(n);
    out.feasible.resize(n);

    bool have_prev = false;
    Solve prev;
    for (std::size_t k = 0; k < n; ++k) {
        const PauliFields tf = target.fields[k];
        const double t = target.times[k];
        const double fscale = std::max(1.0, std::sqrt(tf.norm_sq()));
        double res_x = 0.0;
        Solve s;
        if (std::abs(tf.y) > opt.tol * fscale) {
            res_x = std::abs(tf.y) / fscale;  // sy coupling is out of reach
        }
        if (std::abs(tf.x) <= 1e-300 || g12 == 0.0) {
            // no coupling: the drive must be off
            s = {0.0, have_prev ? prev.delta : node + (opt.branch == DetuningBranch::Lower ? -1.0 : 1.0), 0.0};
            if (std::abs(tf.x) > opt.tol * fscale) res_x = std::max(res_x, std::abs(tf.x) / fscale);
        } else {
            const cplx eta_t = kI * tf.x / g12;
            if (have_prev) s = newton(f, prev.P, prev.delta, eta_t, node, opt.branch, opt);
            // a warm start can stall short of full precision; reseed from the scan then too
            if (!have_prev || !(s.residual <= 1e-12) || s.P < 0.0) {
                const Solve seed = scan_seed(f, eta_t, node, opt);
                const Solve s2 = newton(f, seed.P, seed.delta, eta_t, node, opt.branch, opt);
                if (!have_prev || s2.residual < s.residual || s.P < 0.0) s = s2;
            }
            res_x = std::max(res_x, s.residual);
            if (s.P < 0.0) res_x = std::max(res_x, 1.0);
        }
        const cplx eta = s.P * unit_susceptibility(f, s.delta);
        const double res_z = std::abs(z_bare + z_per_eta * eta - tf.z) / fscale;
        const double res = std::max(res_x, res_z);
        out.P_L[k] = s.P;
        out.delta0[k] = s.delta;
        out.residual[k] = res;
        out.feasible[k] = res <= opt.tol && s.P >= 0.0;
        if (!out.feasible[k] && opt.strict) {
            std::ostringstream os;
            os << "target outside the reachable set at t=" << t << " (residual " << res
               << (s.P < 0.0 ? ", requires P_L < 0" : "") << ")";
            throw InfeasibleError(os.str(), t, res);
        }
        if (s.P >= 0.0 && s.residual <= opt.tol) {
            prev = s;
            have_prev = true;
        }
    }
    return out;
}

Protocol optomech_protocol(const std::vector<double>& times, const std::vector<double>& P_L,
                           const std::vector<double>& delta0, const OptomechParams& fixed) {
    if (times.size() != P_L.size() || times.size() != delta0.size())
        throw ConfigError("optomech_protocol: schedule arrays differ in length");
    Protocol pr;
    pr.kind = ProtocolKind::Custom;
    pr.times = times;
    for (std::size_t k = 0; k < times.size(); ++k) {
        OptomechParams p = fixed;
        p.P_L = P_L[k];
        p.delta0 = delta0[k];
        const ComplexMatrix2 h = effective_hamiltonian(p);
        pr.fields.push_back(PauliFields::from_matrix(h));
        pr.id_part.push_back(0.5 * h.trace());
    }
    return pr;
}

}  // namespace nhsta
