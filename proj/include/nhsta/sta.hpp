#pragma once

#include <cstddef>
#include <memory>
#include <vector>

#include "nhsta/adiabatic.hpp"
#include "nhsta/contour.hpp"
#include "nhsta/protocol.hpp"

namespace nhsta {

// F(t) = A exp(-((t - t0/2) / nu)^(2n))
struct Mask {
    double A = 0.0;
    double nu = 1.0;
    int n = 1;

    void validate() const;
    double value(double t, double t0) const;
    double derivative(double t, double t0) const;
};

// Dressing angle mu = -atan(theta_dot / (2 lambda (1 + F))) + chi_mu along the loop.
class DressingModel {
public:
    DressingModel(std::shared_ptr<const AdiabaticPath> path, Mask mask);

    struct Point {
        AdiabaticSample a;
        double F = 0.0;
        double F_dot = 0.0;
        cplx z;
        cplx z_dot;
        cplx mu_nat;
        cplx mu;
        cplx mu_dot;
    };

    Point at(double t) const;
    // Correction W and full traceless fields from the literal field formulas.
    PauliFields correction(double t) const;
    PauliFields full(double t) const;
    // Independent route: S (-lambda F sz + mu_dot/2 sx) S^-1.
    PauliFields correction_by_conjugation(double t) const;

    const AdiabaticPath& path() const { return *path_; }
    std::shared_ptr<const AdiabaticPath> path_ptr() const { return path_; }
    const Mask& mask() const { return mask_; }
    const BranchState& branch() const { return branch_; }
    double guard() const { return guard_; }

private:
    Point point(double t) const;

    std::shared_ptr<const AdiabaticPath> path_;
    Mask mask_;
    BranchState branch_;
    double guard_;
};

struct DressingAngle {
    std::vector<double> times;
    std::vector<cplx> mu;
    std::vector<cplx> mu_nat;
    std::vector<cplx> z;
    BranchState branch;
    bool valid = false;
    int n_crossings = 0;
    Mask mask;
    std::shared_ptr<const DressingModel> model;

    // mu(t0) / pi reduced to [0, 2)
    double mu_end_over_pi() const;
};

Protocol uncorrected_protocol(const CircularLoop& loop, const Schedule& s, std::size_t grid_size = kDefaultGridSize);
Protocol uncorrected_protocol(std::shared_ptr<const AdiabaticPath> path);

Protocol td_correction(const CircularLoop& loop, const Schedule& s, std::size_t grid_size = kDefaultGridSize);
Protocol td_correction(std::shared_ptr<const AdiabaticPath> path);

DressingAngle satd_dressing_angle(const CircularLoop& loop, const Schedule& s,
                                  std::size_t grid_size = kDefaultGridSize);
DressingAngle radd_dressing_angle(const CircularLoop& loop, const Schedule& s, const Mask& mask,
                                  std::size_t grid_size = kDefaultGridSize);
DressingAngle dressing_angle(std::shared_ptr<const AdiabaticPath> path, const Mask& mask);

// Throws InvalidStaError for an odd number of arctan crossings.
Protocol satd_fields(const DressingAngle& mu);

struct RaddRanges {
    double a_min = 1e-2;
    double a_max = 10.0;
    int a_steps = 24;
    double nu_min_frac = 1.0 / 25.0;  // of t0
    double nu_max_frac = 1.0 / 3.0;
    int nu_steps = 16;
    int n_min = 1;
    int n_max = 7;
    int refine_rounds = 4;
    // coarse grid used while scanning; the winner is re-checked on the full grid
    std::size_t search_grid_size = 1024;

    void validate() const;
};

struct RaddResult {
    Mask mask;
    double rms = 0.0;  // correction-field RMS on the full grid
    Protocol protocol;
    DressingAngle dressing;
    std::size_t candidates = 0;
    std::size_t valid_candidates = 0;
};

RaddResult radd_optimize(const CircularLoop& loop, const Schedule& s, const RaddRanges& ranges = {},
                         std::size_t grid_size = kDefaultGridSize, int jobs = 1);

}  // namespace nhsta
