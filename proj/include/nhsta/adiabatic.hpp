#pragma once

#include <cstddef>
#include <vector>

#include "nhsta/contour.hpp"
#include "nhsta/matrix2.hpp"
#include "nhsta/spectrum.hpp"

namespace nhsta {

// Instantaneous spectral data along a scheduled loop.
struct AdiabaticSample {
    double t = 0.0;
    LoopKinematics kin;
    cplx x;
    cplx r;
    cplx r_dot;
    cplx lambda;  // holomorphic lambda_plus
    cplx lambda_dot;
    cplx theta;  // continuous along the grid
    cplx cos_theta;
    cplx sin_theta;
    cplx theta_dot;
    cplx theta_ddot;
    double chi = 0.0;
};

// How theta is continued along the loop. lambda is always holomorphic.
enum class SheetMode {
    Holomorphic,  // e^{i theta} = (x - i omega) / lambda, unwrapped
    Principal,    // closed form with chi = 0 (deliberately non-holomorphic)
};

// A loop with its schedule, sampled on a uniform grid over one traversal and
// glued across the sqrt cut. Evaluation at arbitrary t in [0, t0] is exact
// (closed form plus sheet lookup), so it serves as a dense generator.
class AdiabaticPath {
public:
    AdiabaticPath(const CircularLoop& loop, const Schedule& schedule, std::size_t grid_size = kDefaultGridSize,
                  SheetMode mode = SheetMode::Holomorphic);

    AdiabaticSample at(double t) const;
    ComplexMatrix2 hamiltonian(double t) const;
    // S(t) = exp(-i theta sy / 2); columns are right eigenvectors for (lambda_minus, lambda_plus)
    ComplexMatrix2 frame(double t) const;
    // S^-1 H S - i S^-1 dS/dt = -lambda sz - (theta_dot / 2) sy
    ComplexMatrix2 adiabatic_hamiltonian(double t) const;

    const CircularLoop& loop() const { return loop_; }
    const Schedule& schedule() const { return schedule_; }
    const std::vector<double>& grid() const { return grid_; }
    const BranchState& sheet() const { return sheet_; }
    double duration() const { return schedule_.t0; }
    SheetMode mode() const { return mode_; }

private:
    AdiabaticSample evaluate(double t, double theta_ref, bool use_ref) const;

    CircularLoop loop_;
    Schedule schedule_;
    SheetMode mode_;
    std::vector<double> grid_;
    BranchState sheet_;
    std::vector<double> theta_re_;  // unwrapped Re theta on the grid
};

}  // namespace nhsta
