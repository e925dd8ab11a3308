#pragma once

#include <array>
#include <optional>
#include <vector>

#include "nhsta/matrix2.hpp"
#include "nhsta/protocol.hpp"

namespace nhsta {

// Two mechanical modes coupled through one driven cavity; hbar = 1, so the
// laser photon energy is Omega_L. SI input divides energies by hbar first.
struct OptomechParams {
    std::array<double, 2> omega_mech{1.0, 1.0};
    std::array<double, 2> gamma_mech{0.0, 0.0};
    std::array<double, 2> g{1.0, 1.0};
    double kappa = 1.0;
    double kappa_in = 1.0;
    double P_L = 0.0;
    double Omega_L = 1.0;
    double delta0 = 0.0;

    double omega0() const { return 0.5 * (omega_mech[0] + omega_mech[1]); }
    void validate() const;
};

inline constexpr double kHbarSI = 1.054571817e-34;

cplx susceptibility(const OptomechParams& p);
// d eta / d delta0 at fixed power
cplx susceptibility_detuning_derivative(const OptomechParams& p);
ComplexMatrix2 effective_hamiltonian(const OptomechParams& p);

// The susceptibility vanishes at delta0 = omega0 / 2; on each side its phase is
// monotone in delta0, so the inversion is unique once a side is chosen.
enum class DetuningBranch { Lower, Upper };

struct InversionOptions {
    DetuningBranch branch = DetuningBranch::Lower;
    double tol = 1e-8;  // relative residual for feasibility
    int max_iter = 50;
    double damping = 0.5;
    int scan_points = 4001;
    std::optional<double> scan_span;  // default 20 (kappa + omega0)
    bool strict = true;               // throw on the first infeasible sample
};

struct ControlSchedule {
    std::vector<double> times;
    std::vector<double> P_L;
    std::vector<double> delta0;
    std::vector<double> residual;
    std::vector<bool> feasible;

    bool all_feasible() const;
};

// Matches the traceless part of the target: the coupling fixes eta, the
// diagonal difference must then agree. The trace is left as a global factor.
ControlSchedule invert_controls(const Protocol& target, const OptomechParams& fixed, const InversionOptions& opt = {});

// Traceless fields produced by a schedule (for round trips and CSV export).
Protocol optomech_protocol(const std::vector<double>& times, const std::vector<double>& P_L,
                           const std::vector<double>& delta0, const OptomechParams& fixed);

}  // namespace nhsta
