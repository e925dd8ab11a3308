#include "nhsta/spectrum.hpp"

#include <cmath>

#include "nhsta/errors.hpp"

namespace nhsta {

namespace {

// -0.0 parts would select the lower side of a cut; fold them onto +0.0.
double unsign_zero(double v) { return v == 0.0 ? 0.0 : v; }

void require_not_ep(const ParamPoint& p, const char* what) {
    if (radicand(p) == cplx{0.0, 0.0} || is_ep(p))
        throw DegenerateSpectrumError(std::string(what) + ": parameter point is an exceptional point");
}

}  // namespace

bool ParamPoint::finite() const {
    return std::isfinite(delta) && std::isfinite(omega) && std::isfinite(gamma);
}

ComplexMatrix2 hamiltonian_sym(const ParamPoint& p) {
    const cplx x = p.x();
    return {-x, p.omega, p.omega, x};
}

cplx radicand(const ParamPoint& p) {
    const cplx x = p.x();
    return x * x + p.omega * p.omega;
}

bool is_ep(const ParamPoint& p, double tol) {
    const double re = -0.25 * p.gamma * p.gamma + p.omega * p.omega + p.delta * p.delta;
    return std::abs(re) <= tol && std::abs(p.delta * p.gamma) <= tol;
}

bool on_branch_cut_region(const ParamPoint& p, double tol) {
    const double re = -0.25 * p.gamma * p.gamma + p.omega * p.omega + p.delta * p.delta;
    return re <= tol && std::abs(p.delta * p.gamma) <= tol;
}

cplx principal_sqrt(cplx z) { return std::sqrt(cplx{z.real(), unsign_zero(z.imag())}); }

cplx principal_atan(cplx z) { return std::atan(cplx{unsign_zero(z.real()), z.imag()}); }

cplx principal_log(cplx z) { return std::log(cplx{z.real(), unsign_zero(z.imag())}); }

HoloSpectrum holomorphic_eigenvalues(const ParamPoint& p, double chi) {
    require_not_ep(p, "holomorphic_eigenvalues");
    HoloSpectrum s;
    s.chi = chi;
    s.lambda_plus = std::cos(chi) * principal_sqrt(radicand(p));
    s.lambda_minus = -s.lambda_plus;
    const cplx e = (p.x() - kI * p.omega) / s.lambda_plus;
    s.theta = -kI * principal_log(e);
    return s;
}

cplx theta(const ParamPoint& p, double chi) {
    require_not_ep(p, "theta");
    const cplx sq = principal_sqrt(radicand(p));
    const cplx den = p.x() + sq;
    if (std::abs(den) <= 1e-14 * (std::abs(p.x()) + std::abs(sq))) throw SingularFrameError("theta: vanishing denominator x + sqrt(r)");
    return -2.0 * principal_atan(p.omega / den) + chi;
}

ComplexMatrix2 frame_rotation(cplx th) {
    const cplx c = std::cos(0.5 * th);
    const cplx s = std::sin(0.5 * th);
    return {c, -s, s, c};
}

ComplexMatrix2 frame_adiabatic(const ParamPoint& p, double chi) { return frame_rotation(theta(p, chi)); }

std::pair<ComplexVector2, ComplexVector2> right_eigenvectors(const ParamPoint& p, double chi) {
    require_not_ep(p, "right_eigenvectors");
    const cplx lp = std::cos(chi) * principal_sqrt(radicand(p));
    const cplx x = p.x();
    return {ComplexVector2{-x + lp, p.omega}, ComplexVector2{-x - lp, p.omega}};
}

}  // namespace nhsta
