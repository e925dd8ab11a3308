#include "nhsta/adiabatic.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nhsta/errors.hpp"

namespace nhsta {

AdiabaticPath::AdiabaticPath(const CircularLoop& loop, const Schedule& schedule, std::size_t grid_size,
                             SheetMode mode)
    : loop_(loop), schedule_(schedule), mode_(mode) {
    loop_.validate();
    schedule_.validate();
    if (loop_.d != schedule_.d) throw ConfigError("loop and schedule orientation differ");
    grid_ = uniform_grid(schedule_.t0, grid_size);

    std::vector<cplx> r(grid_.size());
    double scale = 0.0;
    for (std::size_t k = 0; k < grid_.size(); ++k) {
        r[k] = radicand(loop_kinematics(loop_, schedule_, grid_[k]).p);
        scale = std::max(scale, std::abs(r[k]));
    }
    for (std::size_t k = 0; k < grid_.size(); ++k) {
        if (std::abs(r[k]) <= 1e-12 * std::max(1.0, scale)) {
            std::ostringstream os;
            os << "loop passes through an exceptional point at t=" << grid_[k];
            throw DegenerateSpectrumError(os.str());
        }
    }
    auto path = [this](double t) { return radicand(loop_kinematics(loop_, schedule_, t).p); };
    sheet_ = detect_branch_crossings(r, BranchCut::Sqrt, grid_, path);

    theta_re_.resize(grid_.size());
    double prev = 0.0;
    for (std::size_t k = 0; k < grid_.size(); ++k) {
        const AdiabaticSample s = evaluate(grid_[k], prev, k > 0);
        theta_re_[k] = s.theta.real();
        prev = theta_re_[k];
    }
    // sheet consistency: lambda must not jump onto its negative between samples
    cplx last = evaluate(grid_[0], 0.0, false).lambda;
    for (std::size_t k = 1; k < grid_.size(); ++k) {
        const cplx cur = evaluate(grid_[k], theta_re_[k], true).lambda;
        if (std::abs(cur + last) < std::abs(cur - last)) {
            std::ostringstream os;
            os << "non-holomorphic eigenvalue continuation near t=" << grid_[k];
            throw NonHolomorphicFrameError(os.str());
        }
        last = cur;
    }
}

AdiabaticSample AdiabaticPath::evaluate(double t, double theta_ref, bool use_ref) const {
    AdiabaticSample s;
    s.t = t;
    s.kin = loop_kinematics(loop_, schedule_, t);
    const ParamPoint& p = s.kin.p;
    s.chi = sheet_.chi_at(t);
    s.x = p.x();
    s.r = radicand(p);
    if (s.r == cplx{0.0, 0.0}) {
        std::ostringstream os;
        os << "exceptional point at t=" << t;
        throw DegenerateSpectrumError(os.str());
    }
    s.lambda = std::cos(s.chi) * principal_sqrt(s.r);
    const double dd = s.kin.delta_dot;
    const double od = s.kin.omega_dot;
    s.r_dot = 2.0 * s.x * dd + 2.0 * p.omega * od;
    s.lambda_dot = s.r_dot / (2.0 * s.lambda);
    s.theta_dot = (p.omega * dd - s.x * od) / s.r;
    s.theta_ddot = (p.omega * s.kin.delta_ddot - s.x * s.kin.omega_ddot) / s.r - s.theta_dot * s.r_dot / s.r;

    s.cos_theta = s.x / s.lambda;
    s.sin_theta = -p.omega / s.lambda;
    cplx th = -kI * principal_log(s.cos_theta + kI * s.sin_theta);
    if (use_ref) {
        const double m = std::round((theta_ref - th.real()) / (2.0 * kPi));
        th += 2.0 * kPi * m;
    }
    s.theta = th;
    if (mode_ == SheetMode::Principal) {
        // the closed form without its chi term: shifted by pi after each crossing
        const double c = std::cos(s.chi);
        s.theta -= s.chi;
        s.cos_theta *= c;
        s.sin_theta *= c;
    }
    return s;
}

AdiabaticSample AdiabaticPath::at(double t) const {
    const auto it = std::lower_bound(grid_.begin(), grid_.end(), t);
    std::size_t k = static_cast<std::size_t>(it - grid_.begin());
    if (k >= grid_.size()) k = grid_.size() - 1;
    if (k > 0 && (k == grid_.size() || t - grid_[k - 1] < grid_[k] - t)) --k;
    return evaluate(t, theta_re_[k], true);
}

ComplexMatrix2 AdiabaticPath::hamiltonian(double t) const {
    return hamiltonian_sym(loop_kinematics(loop_, schedule_, t).p);
}

ComplexMatrix2 AdiabaticPath::frame(double t) const { return frame_rotation(at(t).theta); }

ComplexMatrix2 AdiabaticPath::adiabatic_hamiltonian(double t) const {
    const AdiabaticSample s = at(t);
    return -s.lambda * ComplexMatrix2::sigma_z() - 0.5 * s.theta_dot * ComplexMatrix2::sigma_y();
}

}  // namespace nhsta
