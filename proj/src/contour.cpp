#include "nhsta/contour.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nhsta/errors.hpp"

namespace nhsta {

void CircularLoop::validate() const {
    if (!(std::isfinite(delta0) && std::isfinite(omega0) && std::isfinite(gamma0) && std::isfinite(phi)))
        throw ConfigError("loop: non-finite parameter");
    if (!(gamma0 > 0.0)) throw ConfigError("loop.gamma0 must be > 0");
    if (!(delta0 > 0.0)) throw ConfigError("loop.delta0 must be > 0");
    if (d != 1 && d != -1) throw ConfigError("loop.d must be +1 or -1");
}

void Schedule::validate() const {
    if (!(std::isfinite(t0) && t0 > 0.0)) throw ConfigError("schedule.t0 must be finite and > 0");
    if (d != 1 && d != -1) throw ConfigError("schedule.d must be +1 or -1");
}

ParamPoint loop_point(const CircularLoop& loop, double eps) {
    const double frac = eps - std::floor(eps);
    const double a = 2.0 * kPi * frac + loop.phi;
    return {loop.delta0 * std::sin(a), loop.omega0 + loop.delta0 * std::cos(a), loop.gamma0};
}

namespace {

void check_time(const Schedule& s, double t) {
    if (!(t >= 0.0 && t <= s.t0)) {
        std::ostringstream os;
        os << "schedule: t=" << t << " outside [0, " << s.t0 << "]";
        throw DomainError(os.str());
    }
}

}  // namespace

double schedule_eps(const Schedule& s, double t) {
    check_time(s, t);
    const double u = t / s.t0;
    return s.d * u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
}

double schedule_eps_dot(const Schedule& s, double t) {
    check_time(s, t);
    const double u = t / s.t0;
    return s.d * 30.0 * u * u * (1.0 - u) * (1.0 - u) / s.t0;
}

double schedule_eps_ddot(const Schedule& s, double t) {
    check_time(s, t);
    const double u = t / s.t0;
    return s.d * 60.0 * u * (1.0 - u) * (1.0 - 2.0 * u) / (s.t0 * s.t0);
}

double chi_circ(const CircularLoop& loop, double eps) {
    const double arg = 0.5 * (1 - loop.d) + (eps - 0.5 + loop.phi / (2.0 * kPi));
    return arg >= 0.0 ? kPi : 0.0;
}

LoopKinematics loop_kinematics(const CircularLoop& loop, const Schedule& s, double t) {
    double k = std::floor(t / s.t0);
    double tl = t - k * s.t0;
    if (k > 0.0 && tl == 0.0 && t > 0.0) {
        // stay on the traversal that ends at t
        k -= 1.0;
        tl = s.t0;
    }
    if (t < 0.0) check_time(s, t);
    const double eps = schedule_eps(s, tl) + k * s.d;
    const double ed = schedule_eps_dot(s, tl);
    const double edd = schedule_eps_ddot(s, tl);
    const double frac = eps - std::floor(eps);
    const double a = 2.0 * kPi * frac + loop.phi;
    const double sa = std::sin(a);
    const double ca = std::cos(a);
    const double w = 2.0 * kPi * loop.delta0;
    LoopKinematics kin;
    kin.p = {loop.delta0 * sa, loop.omega0 + loop.delta0 * ca, loop.gamma0};
    kin.delta_dot = w * ed * ca;
    kin.omega_dot = -w * ed * sa;
    kin.delta_ddot = w * (edd * ca - 2.0 * kPi * ed * ed * sa);
    kin.omega_ddot = -w * (edd * sa + 2.0 * kPi * ed * ed * ca);
    return kin;
}

int BranchState::count_up_to(double t) const {
    return static_cast<int>(std::upper_bound(crossings.begin(), crossings.end(), t) - crossings.begin());
}

double BranchState::chi_at(double t) const { return chi0 + kPi * count_up_to(t); }

namespace {

double unsign_zero(double v) { return v == 0.0 ? 0.0 : v; }

int side_of(cplx w, BranchCut cut) {
    if (cut == BranchCut::Sqrt) return unsign_zero(w.imag()) >= 0.0 ? 1 : -1;
    return unsign_zero(w.real()) >= 0.0 ? 1 : -1;
}

// Is the point where the side flips actually on the cut?
bool on_cut(cplx w, BranchCut cut) {
    if (cut == BranchCut::Sqrt) return w.real() < 0.0;
    return std::abs(w.imag()) > 1.0;
}

// Linear estimate of the side flip inside [0, 1].
double flip_fraction(cplx w0, cplx w1, BranchCut cut) {
    const double a = cut == BranchCut::Sqrt ? w0.imag() : w0.real();
    const double b = cut == BranchCut::Sqrt ? w1.imag() : w1.real();
    if (a == b) return 1.0;
    return std::clamp(a / (a - b), 0.0, 1.0);
}

struct Flip {
    double t;
    cplx w;
};

// Bisect [ta, tb] with side(ta) = sa != side(tb). Returns the first time on the new side.
Flip bisect(const ComplexPath& path, BranchCut cut, double ta, double tb, int sa) {
    const double scale = std::max({std::abs(ta), std::abs(tb), tb - ta});
    for (int it = 0; it < 200 && tb - ta > 1e-12 * scale; ++it) {
        const double tm = 0.5 * (ta + tb);
        if (tm <= ta || tm >= tb) break;
        if (side_of(path(tm), cut) == sa)
            ta = tm;
        else
            tb = tm;
    }
    return {tb, path(tb)};
}

}  // namespace

BranchState detect_branch_crossings(std::span<const cplx> f, BranchCut cut, std::span<const double> grid,
                                    const ComplexPath& path) {
    if (f.size() != grid.size()) throw ConfigError("detect_branch_crossings: trajectory and grid differ in length");
    BranchState st;
    if (f.size() < 2) return st;
    constexpr int kProbes = 3;
    for (std::size_t k = 0; k + 1 < f.size(); ++k) {
        const double t0 = grid[k];
        const double t1 = grid[k + 1];
        if (!(t1 > t0)) throw ConfigError("detect_branch_crossings: grid not strictly increasing");
        if (!path) {
            const int s0 = side_of(f[k], cut);
            if (side_of(f[k + 1], cut) == s0) continue;
            const double tau = flip_fraction(f[k], f[k + 1], cut);
            const cplx w = f[k] + tau * (f[k + 1] - f[k]);
            if (on_cut(w, cut)) st.crossings.push_back(t0 + tau * (t1 - t0));
            continue;
        }
        // probe interior points so a double flip inside one interval is noticed
        double ts[kProbes + 2];
        cplx ws[kProbes + 2];
        ts[0] = t0;
        ws[0] = f[k];
        for (int q = 1; q <= kProbes; ++q) {
            ts[q] = t0 + (t1 - t0) * q / (kProbes + 1);
            ws[q] = path(ts[q]);
        }
        ts[kProbes + 1] = t1;
        ws[kProbes + 1] = f[k + 1];
        int found = 0;
        for (int q = 0; q <= kProbes; ++q) {
            const int sa = side_of(ws[q], cut);
            if (side_of(ws[q + 1], cut) == sa) continue;
            const Flip fl = bisect(path, cut, ts[q], ts[q + 1], sa);
            if (!on_cut(fl.w, cut)) continue;
            ++found;
            st.crossings.push_back(fl.t);
        }
        if (found > 1) {
            std::ostringstream os;
            os << "detect_branch_crossings: " << found << " crossings inside one sample interval [" << t0 << ", "
               << t1 << "]; refine the grid";
            throw RefinementError(os.str());
        }
    }
    return st;
}

std::vector<double> uniform_grid(double t_end, std::size_t n) {
    if (n < 2) throw ConfigError("uniform_grid: need at least 2 points");
    std::vector<double> g(n);
    for (std::size_t k = 0; k < n; ++k) g[k] = t_end * static_cast<double>(k) / static_cast<double>(n - 1);
    g.back() = t_end;
    return g;
}

SampledLoop sample_loop(const CircularLoop& loop, const Schedule& s, std::size_t n) {
    SampledLoop out;
    out.times = uniform_grid(s.t0, n);
    out.points.reserve(n);
    for (double t : out.times) out.points.push_back(loop_point(loop, schedule_eps(s, t)));
    return out;
}

SampledLoop concatenate(const SampledLoop& a, const SampledLoop& b, double tol) {
    if (a.times.empty()) return b;
    if (b.times.empty()) return a;
    const ParamPoint& pa = a.points.back();
    const ParamPoint& pb = b.points.front();
    const double gap = std::max({std::abs(pa.delta - pb.delta), std::abs(pa.omega - pb.omega),
                                 std::abs(pa.gamma - pb.gamma)});
    if (gap > tol) {
        std::ostringstream os;
        os << "concatenate: endpoint mismatch " << gap;
        throw ConfigError(os.str());
    }
    SampledLoop out = a;
    const double shift = a.times.back() - b.times.front();
    for (std::size_t k = 1; k < b.times.size(); ++k) {
        out.times.push_back(b.times[k] + shift);
        out.points.push_back(b.points[k]);
    }
    return out;
}

}  // namespace nhsta
