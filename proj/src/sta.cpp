#include "nhsta/sta.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "nhsta/errors.hpp"
#include "nhsta/parallel.hpp"

namespace nhsta {

void Mask::validate() const {
    if (!(std::isfinite(A) && A >= 0.0)) throw ConfigError("mask.A must be >= 0");
    if (!(std::isfinite(nu) && nu > 0.0)) throw ConfigError("mask.nu must be > 0");
    if (n < 1) throw ConfigError("mask.n must be >= 1");
}

double Mask::value(double t, double t0) const {
    if (A == 0.0) return 0.0;
    const double u = (t - 0.5 * t0) / nu;
    return A * std::exp(-std::pow(u * u, n));
}

double Mask::derivative(double t, double t0) const {
    if (A == 0.0) return 0.0;
    const double u = (t - 0.5 * t0) / nu;
    return value(t, t0) * (-2.0 * n * std::pow(u, 2 * n - 1) / nu);
}

DressingModel::DressingModel(std::shared_ptr<const AdiabaticPath> path, Mask mask)
    : path_(std::move(path)), mask_(mask), guard_(1e-3 * path_->duration()) {
    mask_.validate();
    const auto& grid = path_->grid();
    std::vector<cplx> z(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) z[k] = point(grid[k]).z;
    branch_ = detect_branch_crossings(z, BranchCut::Arctan, grid, [this](double t) { return point(t).z; });
}

DressingModel::Point DressingModel::point(double t) const {
    Point q;
    q.a = path_->at(t);
    const double t0 = path_->duration();
    q.F = mask_.value(t, t0);
    q.F_dot = mask_.derivative(t, t0);
    const cplx lam = q.a.lambda;
    if (std::abs(lam) == 0.0) {
        std::ostringstream os;
        os << "dressing angle: lambda vanishes at t=" << t;
        throw DegenerateSpectrumError(os.str());
    }
    const double g = 1.0 + q.F;
    q.z = q.a.theta_dot / (2.0 * lam * g);
    q.z_dot = (q.a.theta_ddot * lam * g - q.a.theta_dot * (q.a.lambda_dot * g + lam * q.F_dot)) /
              (2.0 * lam * lam * g * g);
    q.mu_nat = -principal_atan(q.z);
    q.mu = q.mu_nat;
    q.mu_dot = -q.z_dot / (1.0 + q.z * q.z);
    return q;
}

DressingModel::Point DressingModel::at(double t) const {
    Point q = point(t);
    q.mu += kPi * branch_.count_up_to(t);
    return q;
}

PauliFields DressingModel::correction(double t) const {
    const Point q = at(t);
    const double t0 = path_->duration();
    const cplx lam = q.a.lambda;
    // K = (theta_dot / 2) cot(mu); 0/0 at the endpoints, replaced by its limit
    cplx K;
    if (t < guard_ || t0 - t < guard_) {
        K = -lam * (1.0 + q.F);
    } else {
        const cplx sm = std::sin(q.mu);
        if (std::abs(sm) == 0.0) {
            std::ostringstream os;
            os << "dressing fields: unresolved 0/0 at t=" << t;
            throw NumericError(os.str());
        }
        K = 0.5 * q.a.theta_dot * std::cos(q.mu) / sm;
    }
    const ParamPoint& p = q.a.kin.p;
    PauliFields w;
    w.x = -p.omega + K * q.a.sin_theta + 0.5 * q.mu_dot * q.a.cos_theta;
    w.z = q.a.x + K * q.a.cos_theta - 0.5 * q.mu_dot * q.a.sin_theta;
    return w;
}

PauliFields DressingModel::full(double t) const {
    const ParamPoint p = loop_kinematics(path_->loop(), path_->schedule(), t).p;
    PauliFields f = correction(t);
    f.x += p.omega;
    f.z -= p.x();
    return f;
}

PauliFields DressingModel::correction_by_conjugation(double t) const {
    const Point q = at(t);
    const ComplexMatrix2 S = frame_rotation(q.a.theta);
    const ComplexMatrix2 inner = -q.a.lambda * q.F * ComplexMatrix2::sigma_z() + 0.5 * q.mu_dot * ComplexMatrix2::sigma_x();
    return PauliFields::from_matrix(S * inner * S.inverse());
}

double DressingAngle::mu_end_over_pi() const {
    if (mu.empty()) return 0.0;
    double v = std::fmod(mu.back().real() / kPi, 2.0);
    if (v < 0.0) v += 2.0;
    if (2.0 - v < 1e-9) v = 0.0;
    return v;
}

namespace {

PauliFields sym_fields(const ParamPoint& p) { return {p.omega, 0.0, -p.x()}; }

}  // namespace

Protocol uncorrected_protocol(std::shared_ptr<const AdiabaticPath> path) {
    Protocol pr;
    pr.kind = ProtocolKind::Uncorrected;
    pr.times = path->grid();
    const CircularLoop loop = path->loop();
    const Schedule s = path->schedule();
    pr.dense = [loop, s](double t) { return sym_fields(loop_kinematics(loop, s, t).p); };
    pr.dense_correction = [](double) { return PauliFields{}; };
    for (double t : pr.times) pr.fields.push_back(pr.dense(t));
    pr.correction.assign(pr.times.size(), PauliFields{});
    return pr;
}

Protocol uncorrected_protocol(const CircularLoop& loop, const Schedule& s, std::size_t grid_size) {
    return uncorrected_protocol(std::make_shared<const AdiabaticPath>(loop, s, grid_size));
}

Protocol td_correction(std::shared_ptr<const AdiabaticPath> path) {
    Protocol pr;
    pr.kind = ProtocolKind::TD;
    pr.times = path->grid();
    pr.dense_correction = [path](double t) { return PauliFields{0.0, 0.5 * path->at(t).theta_dot, 0.0}; };
    pr.dense = [path](double t) {
        const AdiabaticSample a = path->at(t);
        PauliFields f = sym_fields(a.kin.p);
        f.y = 0.5 * a.theta_dot;
        return f;
    };
    for (double t : pr.times) {
        pr.fields.push_back(pr.dense(t));
        pr.correction.push_back(pr.dense_correction(t));
    }
    return pr;
}

Protocol td_correction(const CircularLoop& loop, const Schedule& s, std::size_t grid_size) {
    return td_correction(std::make_shared<const AdiabaticPath>(loop, s, grid_size));
}

DressingAngle dressing_angle(std::shared_ptr<const AdiabaticPath> path, const Mask& mask) {
    auto model = std::make_shared<const DressingModel>(path, mask);
    DressingAngle d;
    d.times = path->grid();
    d.mask = mask;
    d.branch = model->branch();
    d.n_crossings = d.branch.count();
    d.valid = d.n_crossings % 2 == 0;
    d.model = model;
    d.mu.reserve(d.times.size());
    for (double t : d.times) {
        const auto q = model->at(t);
        d.mu.push_back(q.mu);
        d.mu_nat.push_back(q.mu_nat);
        d.z.push_back(q.z);
    }
    return d;
}

DressingAngle satd_dressing_angle(const CircularLoop& loop, const Schedule& s, std::size_t grid_size) {
    return dressing_angle(std::make_shared<const AdiabaticPath>(loop, s, grid_size), Mask{});
}

DressingAngle radd_dressing_angle(const CircularLoop& loop, const Schedule& s, const Mask& mask,
                                  std::size_t grid_size) {
    return dressing_angle(std::make_shared<const AdiabaticPath>(loop, s, grid_size), mask);
}

Protocol satd_fields(const DressingAngle& mu) {
    if (!mu.model) throw ConfigError("satd_fields: dressing angle carries no model");
    if (!mu.valid) {
        std::ostringstream os;
        os << "dressing is not a valid STA: mu(t0)/pi mod 2 = " << mu.mu_end_over_pi() << " after "
           << mu.n_crossings << " arctan-cut crossings";
        throw InvalidStaError(os.str(), mu.mu_end_over_pi(), mu.n_crossings);
    }
    auto model = mu.model;
    Protocol pr;
    pr.kind = mu.mask.A == 0.0 ? ProtocolKind::SATD : ProtocolKind::RADD;
    pr.times = mu.times;
    pr.dense = [model](double t) { return model->full(t); };
    pr.dense_correction = [model](double t) { return model->correction(t); };
    pr.fields.reserve(pr.times.size());
    pr.correction.reserve(pr.times.size());
    for (double t : pr.times) {
        pr.fields.push_back(model->full(t));
        pr.correction.push_back(model->correction(t));
    }
    return pr;
}

void RaddRanges::validate() const {
    if (!(a_min >= 0.0 && a_max >= a_min)) throw ConfigError("radd_ranges: need 0 <= A_min <= A_max");
    if (!(nu_min_frac > 0.0 && nu_max_frac >= nu_min_frac)) throw ConfigError("radd_ranges: need 0 < nu_min <= nu_max");
    if (a_steps < 1 || nu_steps < 1) throw ConfigError("radd_ranges: step counts must be >= 1");
    if (n_min < 1 || n_max < n_min) throw ConfigError("radd_ranges: need 1 <= n_min <= n_max");
    if (refine_rounds < 0) throw ConfigError("radd_ranges: refine_rounds must be >= 0");
    if (a_min == 0.0 && a_steps > 1) throw ConfigError("radd_ranges: log spacing needs A_min > 0");
}

namespace {

std::vector<double> log_space(double lo, double hi, int n) {
    std::vector<double> v(static_cast<std::size_t>(n));
    if (n == 1) {
        v[0] = lo;
        return v;
    }
    for (int k = 0; k < n; ++k) v[k] = lo * std::pow(hi / lo, static_cast<double>(k) / (n - 1));
    v.back() = hi;
    return v;
}

constexpr double kInf = std::numeric_limits<double>::infinity();

double mask_objective(const std::shared_ptr<const AdiabaticPath>& path, const Mask& m) {
    try {
        const DressingAngle d = dressing_angle(path, m);
        if (!d.valid) return kInf;
        const double v = correction_rms(satd_fields(d));
        return std::isfinite(v) ? v : kInf;
    } catch (const NumericError&) {
        return kInf;
    }
}

// Golden-section search of f on [lo, hi] (log coordinates by the caller).
template <class F>
std::pair<double, double> golden(F&& f, double lo, double hi, int iters) {
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo, b = hi;
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = f(c), fd = f(d);
    for (int i = 0; i < iters; ++i) {
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    return fc <= fd ? std::make_pair(c, fc) : std::make_pair(d, fd);
}

}  // namespace

RaddResult radd_optimize(const CircularLoop& loop, const Schedule& s, const RaddRanges& ranges,
                         std::size_t grid_size, int jobs) {
    ranges.validate();
    const std::size_t search_n = std::min(grid_size, std::max<std::size_t>(ranges.search_grid_size, 256));
    auto search_path = std::make_shared<const AdiabaticPath>(loop, s, search_n);
    auto full_path = search_n == grid_size ? search_path : std::make_shared<const AdiabaticPath>(loop, s, grid_size);

    const auto As = log_space(ranges.a_min, ranges.a_max, ranges.a_steps);
    const auto nus = log_space(ranges.nu_min_frac * s.t0, ranges.nu_max_frac * s.t0, ranges.nu_steps);
    std::vector<Mask> cands;
    for (int n = ranges.n_min; n <= ranges.n_max; ++n)
        for (double A : As)
            for (double nu : nus) cands.push_back({A, nu, n});

    std::vector<double> score(cands.size(), kInf);
    parallel_for(cands.size(), jobs, [&](std::size_t i) { score[i] = mask_objective(search_path, cands[i]); });

    std::vector<std::size_t> order(cands.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return score[a] < score[b]; });
    const std::size_t n_valid =
        static_cast<std::size_t>(std::count_if(score.begin(), score.end(), [](double v) { return std::isfinite(v); }));
    if (n_valid == 0) {
        std::ostringstream os;
        os << "radd_optimize: no valid dressing among " << cands.size() << " candidates (A in [" << ranges.a_min
           << ", " << ranges.a_max << "] x" << ranges.a_steps << ", nu in [" << nus.front() << ", " << nus.back()
           << "] x" << ranges.nu_steps << ", n in [" << ranges.n_min << ", " << ranges.n_max << "])";
        throw NoValidDressingError(os.str());
    }

    // local refinement around the best grid point, coordinate-wise in log space
    Mask best = cands[order.front()];
    double best_val = score[order.front()];
    const double la_lo = std::log(std::max(ranges.a_min, 1e-300)), la_hi = std::log(std::max(ranges.a_max, 1e-300));
    const double ln_lo = std::log(nus.front()), ln_hi = std::log(nus.back());
    const double da = ranges.a_steps > 1 ? (la_hi - la_lo) / (ranges.a_steps - 1) : 0.0;
    const double dn = ranges.nu_steps > 1 ? (ln_hi - ln_lo) / (ranges.nu_steps - 1) : 0.0;
    for (int round = 0; round < ranges.refine_rounds; ++round) {
        const double shrink = std::pow(0.5, round);
        if (da > 0.0 && best.A > 0.0) {
            const double c = std::log(best.A);
            const double lo = std::max(la_lo, c - da * shrink), hi = std::min(la_hi, c + da * shrink);
            auto f = [&](double la) { return mask_objective(search_path, {std::exp(la), best.nu, best.n}); };
            const auto [x, v] = golden(f, lo, hi, 12);
            if (v < best_val) {
                best.A = std::exp(x);
                best_val = v;
            }
        }
        if (dn > 0.0) {
            const double c = std::log(best.nu);
            const double lo = std::max(ln_lo, c - dn * shrink), hi = std::min(ln_hi, c + dn * shrink);
            auto f = [&](double ln) { return mask_objective(search_path, {best.A, std::exp(ln), best.n}); };
            const auto [x, v] = golden(f, lo, hi, 12);
            if (v < best_val) {
                best.nu = std::exp(x);
                best_val = v;
            }
        }
    }

    // confirm on the full grid; fall back through the ranked grid candidates
    std::vector<Mask> tries{best};
    for (std::size_t i = 0; i < order.size() && std::isfinite(score[order[i]]); ++i) tries.push_back(cands[order[i]]);
    for (const Mask& m : tries) {
        DressingAngle d;
        try {
            d = dressing_angle(full_path, m);
        } catch (const NumericError&) {
            continue;
        }
        if (!d.valid) continue;
        RaddResult res;
        res.mask = m;
        res.protocol = satd_fields(d);
        res.rms = correction_rms(res.protocol);
        res.dressing = std::move(d);
        res.candidates = cands.size();
        res.valid_candidates = n_valid;
        return res;
    }
    throw NoValidDressingError("radd_optimize: no candidate stays valid on the full grid");
}

}  // namespace nhsta
