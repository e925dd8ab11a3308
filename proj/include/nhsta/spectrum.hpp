#pragma once

#include <utility>

#include "nhsta/matrix2.hpp"

namespace nhsta {

inline constexpr double kDefaultEpTol = 1e-12;

// Point p = (delta, omega, gamma) in control space, rates in units of gamma0.
struct ParamPoint {
    double delta = 0.0;
    double omega = 0.0;
    double gamma = 0.0;

    bool finite() const;
    // x = delta + i gamma / 2
    cplx x() const { return {delta, 0.5 * gamma}; }
};

struct HoloSpectrum {
    cplx lambda_plus;
    cplx lambda_minus;
    double chi = 0.0;
    // Principal representative of the pseudo-rotation angle (Re in (-pi, pi]),
    // fixed by e^{i theta} = (x - i omega) / lambda_plus. Defined wherever lambda != 0.
    cplx theta;
};

// -(delta + i gamma/2) sz + omega sx
ComplexMatrix2 hamiltonian_sym(const ParamPoint& p);
cplx radicand(const ParamPoint& p);
bool is_ep(const ParamPoint& p, double tol = kDefaultEpTol);
bool on_branch_cut_region(const ParamPoint& p, double tol = kDefaultEpTol);

// Principal branches. On the cut the value is the limit from the side of
// positive imaginary part (sqrt) or positive real part (atan).
cplx principal_sqrt(cplx z);
cplx principal_atan(cplx z);
cplx principal_log(cplx z);

HoloSpectrum holomorphic_eigenvalues(const ParamPoint& p, double chi);

// theta = -2 atan(omega / (x + sqrt(r))) + chi, evaluated literally.
// Throws SingularFrameError when the denominator vanishes.
cplx theta(const ParamPoint& p, double chi);

// exp(-i theta sy / 2) = cos(theta/2) 1 - i sin(theta/2) sy
ComplexMatrix2 frame_rotation(cplx theta);
ComplexMatrix2 frame_adiabatic(const ParamPoint& p, double chi);

// (v_plus, v_minus), v_j = [-x + lambda_j, omega], unnormalized.
std::pair<ComplexVector2, ComplexVector2> right_eigenvectors(const ParamPoint& p, double chi);

}  // namespace nhsta
