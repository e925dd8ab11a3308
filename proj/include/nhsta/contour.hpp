#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "nhsta/matrix2.hpp"
#include "nhsta/spectrum.hpp"

namespace nhsta {

inline constexpr std::size_t kDefaultGridSize = 4096;

// Circle of radius delta0 centred at (0, omega0, gamma0), basepoint phi,
// orientation d. Angle convention: 2 pi eps + phi.
struct CircularLoop {
    double delta0 = 0.5;
    double omega0 = 0.5;
    double gamma0 = 1.0;
    double phi = 0.0;
    int d = 1;

    void validate() const;
};

// eps(t) = d (6u^5 - 15u^4 + 10u^3), u = t / t0
struct Schedule {
    double t0 = 1.0;
    int d = 1;

    void validate() const;
};

ParamPoint loop_point(const CircularLoop& loop, double eps);
double schedule_eps(const Schedule& s, double t);
double schedule_eps_dot(const Schedule& s, double t);
double schedule_eps_ddot(const Schedule& s, double t);

// Closed-form sheet function for the centred circle, Theta(0) = 1.
double chi_circ(const CircularLoop& loop, double eps);

// Control point plus its first two time derivatives.
struct LoopKinematics {
    ParamPoint p;
    double delta_dot = 0.0;
    double omega_dot = 0.0;
    double delta_ddot = 0.0;
    double omega_ddot = 0.0;
};

// t may run past t0 for repeated traversals: eps(t + k t0) = eps(t) + k d.
LoopKinematics loop_kinematics(const CircularLoop& loop, const Schedule& s, double t);

enum class BranchCut {
    Sqrt,    // (-inf, 0]
    Arctan,  // (-i inf, -i] u [i, i inf)
};

struct BranchState {
    std::vector<double> crossings;
    double chi0 = 0.0;

    int count() const { return static_cast<int>(crossings.size()); }
    // Crossings at or before t (Theta(0) = 1).
    int count_up_to(double t) const;
    double chi_at(double t) const;
};

using ComplexPath = std::function<cplx(double)>;

// Scans adjacent samples for a change of side of the cut. With `path` the
// crossing time is bisected to 1e-12 relative accuracy and each interval is
// probed for hidden double crossings; without it the time is interpolated.
BranchState detect_branch_crossings(std::span<const cplx> f, BranchCut cut, std::span<const double> grid,
                                    const ComplexPath& path = {});

struct SampledLoop {
    std::vector<double> times;
    std::vector<ParamPoint> points;

    double duration() const { return times.empty() ? 0.0 : times.back() - times.front(); }
};

std::vector<double> uniform_grid(double t_end, std::size_t n);
SampledLoop sample_loop(const CircularLoop& loop, const Schedule& s, std::size_t n = kDefaultGridSize);
// b is shifted to start where a ends; the shared junction sample appears once.
SampledLoop concatenate(const SampledLoop& a, const SampledLoop& b, double tol = 1e-12);

}  // namespace nhsta
