#include "nhsta/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nhsta/errors.hpp"

namespace nhsta {

ComplexMatrix2 Flow::true_flow(std::size_t k) const {
    if (log_scale[k] > 700.0) throw NumericError("flow magnitude exceeds double range; use the rescaled form");
    return phi[k] * std::exp(log_scale[k]);
}

namespace {

// Dormand-Prince 5(4) tableau
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

struct Rhs {
    const Generator& H;
    ComplexMatrix2 operator()(double t, const ComplexMatrix2& y) const {
        const ComplexMatrix2 h = H(t);
        if (!h.all_finite()) {
            std::ostringstream os;
            os << "generator returned non-finite entries at t=" << t;
            throw GeneratorError(os.str());
        }
        return cplx{0.0, -1.0} * (h * y);
    }
};

struct StepResult {
    ComplexMatrix2 y;
    ComplexMatrix2 k7;
    double err = 0.0;
};

StepResult dp_step(const Rhs& f, double t, const ComplexMatrix2& y, const ComplexMatrix2& k1, double h,
                   const IntegratorOptions* opt) {
    const ComplexMatrix2 k2 = f(t + c2 * h, y + (h * a21) * k1);
    const ComplexMatrix2 k3 = f(t + c3 * h, y + h * (a31 * k1 + a32 * k2));
    const ComplexMatrix2 k4 = f(t + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
    const ComplexMatrix2 k5 = f(t + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const ComplexMatrix2 k6 = f(t + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    StepResult r;
    r.y = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    r.k7 = f(t + h, r.y);
    if (opt) {
        const ComplexMatrix2 e = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * r.k7);
        double acc = 0.0;
        for (int q = 0; q < 4; ++q) {
            const double sc = opt->atol + opt->rtol * std::max(std::abs(y.data()[q]), std::abs(r.y.data()[q]));
            const double v = std::abs(e.data()[q]) / sc;
            acc += v * v;
        }
        r.err = std::sqrt(acc / 4.0);
    }
    return r;
}

// Keeps the stored matrix O(1); returns the log of the removed factor.
double rescale(ComplexMatrix2& y, ComplexMatrix2& k) {
    const double m = y.max_abs();
    if (m > 1e2 || (m < 1e-2 && m > 0.0)) {
        y *= 1.0 / m;
        k *= 1.0 / m;
        return std::log(m);
    }
    return 0.0;
}

void check_grid(std::span<const double> grid) {
    if (grid.size() < 2) throw ConfigError("integrate_flow: grid needs at least two times");
    for (std::size_t k = 1; k < grid.size(); ++k)
        if (!(grid[k] > grid[k - 1])) throw ConfigError("integrate_flow: grid not strictly increasing");
}

}  // namespace

Flow integrate_flow(const Generator& H, std::span<const double> grid, const IntegratorOptions& opt) {
    check_grid(grid);
    if (!(opt.rtol > 0.0 && opt.atol > 0.0)) throw ConfigError("integrate_flow: tolerances must be > 0");
    const Rhs f{H};
    Flow out;
    out.times.assign(grid.begin(), grid.end());
    out.phi.reserve(grid.size());
    out.log_scale.reserve(grid.size());

    double t = grid[0];
    ComplexMatrix2 y = ComplexMatrix2::identity();
    double ls = 0.0;
    out.phi.push_back(y);
    out.log_scale.push_back(0.0);
    ComplexMatrix2 k1 = f(t, y);

    const double span = grid.back() - grid.front();
    const double hnorm = std::max(H(t).spectral_norm(), 1e-12);
    double h = std::min(span, std::min(0.01 / hnorm, span / 100.0));
    std::size_t steps = 0;

    for (std::size_t j = 1; j < grid.size(); ++j) {
        const double target = grid[j];
        while (t < target) {
            if (++steps > opt.max_steps) throw StiffnessError("integrate_flow: step budget exhausted");
            bool last = false;
            double hs = h;
            if (t + hs >= target || target - (t + hs) < 1e-12 * std::max(1.0, std::abs(target))) {
                hs = target - t;
                last = true;
            }
            if (hs < 1e-14 * std::max(1.0, std::abs(t))) {
                std::ostringstream os;
                os << "integrate_flow: step size underflow at t=" << t;
                throw StiffnessError(os.str());
            }
            const StepResult r = dp_step(f, t, y, k1, hs, &opt);
            if (!r.y.all_finite() || !std::isfinite(r.err)) {
                std::ostringstream os;
                os << "integrate_flow: non-finite state near t=" << t;
                throw GeneratorError(os.str());
            }
            const double fac = r.err > 0.0 ? 0.9 * std::pow(r.err, -0.2) : 5.0;
            if (r.err <= 1.0) {
                t = last ? target : t + hs;
                y = r.y;
                k1 = r.k7;
                ls += rescale(y, k1);
                ++out.accepted_steps;
                // a forced short step to hit the grid says nothing about the natural size
                if (!last || hs >= h) h = hs * std::clamp(fac, 0.2, 5.0);
            } else {
                ++out.rejected_steps;
                h = hs * std::clamp(fac, 0.1, 0.9);
            }
        }
        out.phi.push_back(y);
        out.log_scale.push_back(ls);
    }
    return out;
}

Flow integrate_flow(const Generator& H, double t0, double rtol, std::size_t n) {
    IntegratorOptions opt;
    opt.rtol = rtol;
    const auto g = uniform_grid(t0, std::max<std::size_t>(n, 2));
    return integrate_flow(H, g, opt);
}

Flow integrate_flow_fixed(const Generator& H, std::span<const double> grid, int substeps) {
    check_grid(grid);
    if (substeps < 1) throw ConfigError("integrate_flow_fixed: substeps must be >= 1");
    const Rhs f{H};
    Flow out;
    out.times.assign(grid.begin(), grid.end());
    ComplexMatrix2 y = ComplexMatrix2::identity();
    double ls = 0.0;
    out.phi.push_back(y);
    out.log_scale.push_back(0.0);
    for (std::size_t j = 1; j < grid.size(); ++j) {
        const double h = (grid[j] - grid[j - 1]) / substeps;
        for (int s = 0; s < substeps; ++s) {
            const double t = grid[j - 1] + s * h;
            ComplexMatrix2 k1 = f(t, y);
            y = dp_step(f, t, y, k1, h, nullptr).y;
            ComplexMatrix2 dummy;
            ls += rescale(y, dummy);
            ++out.accepted_steps;
        }
        out.phi.push_back(y);
        out.log_scale.push_back(ls);
    }
    return out;
}

const char* mode_name(Mode m) { return m == Mode::Minus ? "-" : "+"; }

std::vector<ComplexMatrix2> frames_on(const AdiabaticPath& path, std::span<const double> times) {
    std::vector<ComplexMatrix2> out;
    out.reserve(times.size());
    for (double t : times) out.push_back(path.frame(t));
    return out;
}

namespace {

std::array<std::array<double, 2>, 2> probs(const ComplexMatrix2& phi, const ComplexMatrix2& S, const ComplexMatrix2& S0,
                                           double t) {
    const ComplexMatrix2 M = S.inverse() * phi * S0;
    std::array<std::array<double, 2>, 2> p{};
    for (int i = 0; i < 2; ++i) {
        const double a0 = std::norm(M(0, i));
        const double a1 = std::norm(M(1, i));
        const double den = a0 + a1;
        if (!(den > 0.0) || !std::isfinite(den)) {
            std::ostringstream os;
            os << "transition probability: vanishing projection at t=" << t;
            throw DegenerateProjectionError(os.str());
        }
        p[i][0] = a0 / den;
        p[i][1] = a1 / den;
    }
    return p;
}

}  // namespace

double transition_prob(const Flow& flow, std::span<const ComplexMatrix2> frames, std::size_t k, Mode i, Mode j) {
    if (frames.size() != flow.times.size()) throw ConfigError("transition_prob: frame and flow grids differ");
    return probs(flow.phi[k], frames[k], frames[0], flow.times[k])[static_cast<int>(i)][static_cast<int>(j)];
}

double ProbabilityTrace::max_deviation(Mode i) const {
    double m = 0.0;
    const int ii = static_cast<int>(i);
    for (const auto& q : p) m = std::max(m, std::abs(1.0 - q[ii][ii]));
    return m;
}

ProbabilityTrace transition_probabilities(const Flow& flow, std::span<const ComplexMatrix2> frames) {
    if (frames.size() != flow.times.size()) throw ConfigError("transition_probabilities: frame and flow grids differ");
    ProbabilityTrace tr;
    tr.times = flow.times;
    tr.p.reserve(flow.times.size());
    for (std::size_t k = 0; k < flow.times.size(); ++k)
        tr.p.push_back(probs(flow.phi[k], frames[k], frames[0], flow.times[k]));
    return tr;
}

double fidelity_error(const Flow& flow, std::span<const ComplexMatrix2> frames, Mode i) {
    return 1.0 - transition_prob(flow, frames, flow.times.size() - 1, i, i);
}

double unitarity_defect(const ComplexMatrix2& phi) {
    if (!phi.all_finite()) throw NumericError("unitarity_defect: non-finite flow");
    const double n = phi.spectral_norm();
    const ComplexMatrix2 inv = phi.inverse(1e-14 * n * n);
    return (phi.adjoint() - inv).spectral_norm();
}

ComplexMatrix2 adiabatic_hamiltonian(const CircularLoop& loop, const Schedule& s, double t) {
    // a short grid is enough: only the sheet bookkeeping is needed
    const AdiabaticPath path(loop, s, kDefaultGridSize);
    return path.adiabatic_hamiltonian(t);
}

namespace {

cplx sqrt_disc(const Protocol& p, double t, double tol) {
    const PauliFields f = p.fields_at(t);
    const cplx D = f.discriminant();
    if (std::abs(D) <= tol * std::max(1.0, f.norm_sq())) {
        std::ostringstream os;
        os << "degenerate instantaneous spectrum (EP hit) at t=" << t;
        throw DegenerateSpectrumError(os.str());
    }
    return principal_sqrt(D);
}

// Nearest continuation from `prev`; returns false when the choice is unclear.
bool pair_with(cplx prev, cplx root, cplx& out) {
    const double same = std::abs(root - prev);
    const double flip = std::abs(-root - prev);
    out = same <= flip ? root : -root;
    const double lo = std::min(same, flip), hi = std::max(same, flip);
    return lo < 0.5 * hi;
}

void trace_interval(const Protocol& p, double ta, double tb, cplx prev, cplx root_b, double tol, int depth,
                    BraidTrace& tr) {
    cplx chosen;
    if (pair_with(prev, root_b, chosen) || depth >= 30) {
        tr.times.push_back(tb);
        tr.lambda_plus.push_back(chosen);
        tr.lambda_minus.push_back(-chosen);
        return;
    }
    const double tm = 0.5 * (ta + tb);
    trace_interval(p, ta, tm, prev, sqrt_disc(p, tm, tol), tol, depth + 1, tr);
    trace_interval(p, tm, tb, tr.lambda_plus.back(), root_b, tol, depth + 1, tr);
}

}  // namespace

BraidTrace braid_trace(const Protocol& p, std::span<const double> grid, double tol) {
    if (grid.size() < 2) throw ConfigError("braid_trace: grid needs at least two times");
    BraidTrace tr;
    const cplx first = sqrt_disc(p, grid[0], tol);
    tr.times.push_back(grid[0]);
    tr.lambda_plus.push_back(first);
    tr.lambda_minus.push_back(-first);
    for (std::size_t k = 1; k < grid.size(); ++k)
        trace_interval(p, grid[k - 1], grid[k], tr.lambda_plus.back(), sqrt_disc(p, grid[k], tol), tol, 0, tr);
    return tr;
}

BraidTrace braid_trace(const Protocol& p) { return braid_trace(p, p.times); }

namespace {

std::size_t nearest_index(const std::vector<double>& times, double t) {
    const auto it = std::lower_bound(times.begin(), times.end(), t);
    std::size_t k = static_cast<std::size_t>(it - times.begin());
    if (k >= times.size()) return times.size() - 1;
    if (k > 0 && t - times[k - 1] < times[k] - t) --k;
    return k;
}

cplx trapezoid(const BraidTrace& tr, std::size_t k_end) {
    cplx acc{};
    for (std::size_t k = 0; k < k_end; ++k)
        acc += 0.5 * (tr.times[k + 1] - tr.times[k]) * (tr.lambda_plus[k] + tr.lambda_plus[k + 1]);
    return acc;
}

}  // namespace

BraidCriteria braid_criteria(const BraidTrace& tr, double t0, double tol) {
    if (tr.times.empty()) throw ConfigError("braid_criteria: empty trace");
    const double t_start = tr.times.front();
    if (tr.times.back() < t_start + 2.0 * t0 * (1.0 - 1e-9))
        throw ConfigError("braid_criteria: trace must span a doubled loop [0, 2 t0]");
    const std::size_t k1 = nearest_index(tr.times, t_start + t0);
    const std::size_t k2 = nearest_index(tr.times, t_start + 2.0 * t0);
    const cplx lp0 = tr.lambda_plus[0], lm0 = tr.lambda_minus[0];
    BraidCriteria c;
    c.swap_error = std::max({std::abs(lp0 - tr.lambda_minus[k1]), std::abs(lm0 - tr.lambda_plus[k1]),
                             std::abs(lp0 - tr.lambda_plus[k2]), std::abs(lm0 - tr.lambda_minus[k2])});
    c.closure_error = std::max(std::abs(lp0 - tr.lambda_plus[k1]), std::abs(lm0 - tr.lambda_minus[k1]));
    c.cond_i = c.swap_error <= tol;
    c.identity_closure = c.closure_error <= tol;
    double lam_max = 0.0;
    for (std::size_t k = 0; k <= k2; ++k) lam_max = std::max(lam_max, std::abs(tr.lambda_plus[k]));
    c.integral_single = std::abs(trapezoid(tr, k1));
    c.integral_double = std::abs(trapezoid(tr, k2));
    c.cond_ii = c.integral_single > tol && c.integral_double < tol * t0 * lam_max;
    return c;
}

namespace {

double arg_step(cplx a, cplx b) { return std::arg(b / a); }

double winding_interval(const Protocol& p, double ta, double tb, cplx Da, cplx Db, int depth) {
    const double d = arg_step(Da, Db);
    if (std::abs(d) < 0.5 * kPi || depth >= 40) return d;
    const double tm = 0.5 * (ta + tb);
    const cplx Dm = p.fields_at(tm).discriminant();
    if (Dm == cplx{}) {
        std::ostringstream os;
        os << "discriminant vanishes at t=" << tm;
        throw DegenerateSpectrumError(os.str());
    }
    return winding_interval(p, ta, tm, Da, Dm, depth + 1) + winding_interval(p, tm, tb, Dm, Db, depth + 1);
}

double total_turns(const Protocol& p, std::span<const double> grid) {
    std::vector<cplx> D(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
        D[k] = p.fields_at(grid[k]).discriminant();
        if (D[k] == cplx{} || std::abs(D[k]) < 1e-14 * std::max(1.0, p.fields_at(grid[k]).norm_sq())) {
            std::ostringstream os;
            os << "EP on path: discriminant vanishes at t=" << grid[k];
            throw DegenerateSpectrumError(os.str());
        }
    }
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < grid.size(); ++k) acc += winding_interval(p, grid[k], grid[k + 1], D[k], D[k + 1], 0);
    return acc / (2.0 * kPi);
}

}  // namespace

Winding discriminant_winding(const Protocol& p, std::span<const double> grid) {
    if (grid.size() < 2) throw ConfigError("ep_encircle_check: grid needs at least two times");
    std::vector<double> g(grid.begin(), grid.end());
    Winding w;
    for (int level = 0; level < 6; ++level) {
        w.total_turns = total_turns(p, g);
        const double nearest = std::round(w.total_turns);
        if (std::abs(w.total_turns - nearest) <= 1e-3) {
            w.winding = static_cast<int>(nearest);
            w.encircles = (std::abs(w.winding) % 2) == 1;
            return w;
        }
        std::vector<double> finer;
        finer.reserve(2 * g.size());
        for (std::size_t k = 0; k + 1 < g.size(); ++k) {
            finer.push_back(g[k]);
            finer.push_back(0.5 * (g[k] + g[k + 1]));
        }
        finer.push_back(g.back());
        g.swap(finer);
    }
    std::ostringstream os;
    os << "discriminant winding not resolved (" << w.total_turns << " turns); is the protocol closed?";
    throw RefinementError(os.str());
}

bool ep_encircle_check(const Protocol& p, std::span<const double> grid) { return discriminant_winding(p, grid).encircles; }

bool ep_encircle_check(const Protocol& p) { return ep_encircle_check(p, p.times); }

PermutationOp extract_permutation(const ComplexMatrix2& flow_at_t0, const ComplexMatrix2& basis0, double min_ratio) {
    PermutationOp op;
    op.in_eigenbasis = basis0.inverse() * flow_at_t0 * basis0;
    const ComplexMatrix2& M = op.in_eigenbasis;
    op.dominance = INFINITY;
    for (int i = 0; i < 2; ++i) {
        const double a0 = std::abs(M(0, i)), a1 = std::abs(M(1, i));
        const int row = a0 >= a1 ? 0 : 1;
        const double hi = std::max(a0, a1), lo = std::min(a0, a1);
        const double ratio = lo > 0.0 ? hi / lo : INFINITY;
        op.dominance = std::min(op.dominance, ratio);
        if (!(ratio >= min_ratio)) {
            std::ostringstream os;
            os << "no clear permutation: column " << i << " dominance ratio " << ratio;
            throw NoClearPermutationError(os.str());
        }
        op.sigma[i] = row;
    }
    if (op.sigma[0] == op.sigma[1]) {
        std::ostringstream os;
        os << "no clear permutation: both eigenmodes map onto mode " << op.sigma[0];
        throw NoClearPermutationError(os.str());
    }
    const cplx scale = M(op.sigma[0], 0);
    for (int i = 0; i < 2; ++i) op.phases[i] = M(op.sigma[i], i) / scale;
    return op;
}

ComplexMatrix2 permutation_matrix(const PermutationOp& op, const ComplexMatrix2& basis0) {
    ComplexMatrix2 P = ComplexMatrix2::zero();
    for (int i = 0; i < 2; ++i) P(op.sigma[i], i) = 1.0;
    return basis0 * P * basis0.inverse();
}

}  // namespace nhsta
