#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "nhsta/adiabatic.hpp"
#include "nhsta/matrix2.hpp"
#include "nhsta/protocol.hpp"

namespace nhsta {

// True flow at times[k] is exp(log_scale[k]) * phi[k].
struct Flow {
    std::vector<double> times;
    std::vector<ComplexMatrix2> phi;
    std::vector<double> log_scale;
    std::size_t accepted_steps = 0;
    std::size_t rejected_steps = 0;

    ComplexMatrix2 true_flow(std::size_t k) const;
    const ComplexMatrix2& back() const { return phi.back(); }
};

struct IntegratorOptions {
    double rtol = 1e-10;
    double atol = 1e-12;
    std::size_t max_steps = 50'000'000;
};

// i dPhi/dt = H(t) Phi, Phi(0) = 1, adaptive Dormand-Prince 5(4). The stepper
// lands exactly on every grid time; grid[0] is the start time.
Flow integrate_flow(const Generator& H, std::span<const double> grid, const IntegratorOptions& opt = {});
// Uniform output grid of n points on [0, t0].
Flow integrate_flow(const Generator& H, double t0, double rtol, std::size_t n = 2);
// Fixed-step Dormand-Prince 5, `substeps` per grid interval. For convergence studies.
Flow integrate_flow_fixed(const Generator& H, std::span<const double> grid, int substeps);

enum class Mode : int { Minus = 0, Plus = 1 };
const char* mode_name(Mode m);

// S(t) for each flow time (columns: right eigenvectors of minus, plus).
std::vector<ComplexMatrix2> frames_on(const AdiabaticPath& path, std::span<const double> times);

// P_ij(t_k) = |<psi_j(t_k)| Phi(t_k) |psi_i(0)>|^2, ratio-normalized over j.
double transition_prob(const Flow& flow, std::span<const ComplexMatrix2> frames, std::size_t k, Mode i, Mode j);

struct ProbabilityTrace {
    std::vector<double> times;
    // p[k][i][j]
    std::vector<std::array<std::array<double, 2>, 2>> p;

    double at_end(Mode i, Mode j) const { return p.back()[static_cast<int>(i)][static_cast<int>(j)]; }
    // max_k |1 - P_ii(t_k)|
    double max_deviation(Mode i) const;
};

ProbabilityTrace transition_probabilities(const Flow& flow, std::span<const ComplexMatrix2> frames);
double fidelity_error(const Flow& flow, std::span<const ComplexMatrix2> frames, Mode i);

// Largest singular value of Phi^dagger - Phi^-1.
double unitarity_defect(const ComplexMatrix2& phi);

ComplexMatrix2 adiabatic_hamiltonian(const CircularLoop& loop, const Schedule& s, double t);

struct BraidTrace {
    std::vector<double> times;
    std::vector<cplx> lambda_plus;
    std::vector<cplx> lambda_minus;
};

// Eigenvalues of the traceless part, paired with the previous sample by
// nearest continuation. Intervals where the pairing is not clear are bisected.
BraidTrace braid_trace(const Protocol& p, std::span<const double> grid, double tol = 1e-12);
BraidTrace braid_trace(const Protocol& p);

struct BraidCriteria {
    bool cond_i = false;   // lambda_pm(0) = lambda_mp(t0) = lambda_pm(2 t0)
    bool cond_ii = false;  // single loop integral nonzero, double loop integral vanishes
    bool identity_closure = false;  // lambda_pm(t0) = lambda_pm(0)
    double swap_error = 0.0;
    double closure_error = 0.0;
    double integral_single = 0.0;
    double integral_double = 0.0;

    bool swap() const { return cond_i && cond_ii; }
};

BraidCriteria braid_criteria(const BraidTrace& trace, double t0, double tol = 1e-6);

struct Winding {
    double total_turns = 0.0;
    int winding = 0;
    bool encircles = false;
};

// Winding number of D = fx^2 + fy^2 + fz^2 around 0; odd means an EP is encircled.
Winding discriminant_winding(const Protocol& p, std::span<const double> grid);
bool ep_encircle_check(const Protocol& p, std::span<const double> grid);
bool ep_encircle_check(const Protocol& p);

struct PermutationOp {
    std::array<int, 2> sigma{0, 1};
    std::array<cplx, 2> phases{};
    double dominance = 0.0;  // smallest column dominance ratio
    ComplexMatrix2 in_eigenbasis;

    bool is_swap() const { return sigma[0] == 1 && sigma[1] == 0; }
    bool is_identity() const { return sigma[0] == 0 && sigma[1] == 1; }
};

// basis0 = S(0) (columns: right eigenvectors). Throws NoClearPermutationError
// when a column has no dominant row (ratio < 10) or sigma is not a bijection.
PermutationOp extract_permutation(const ComplexMatrix2& flow_at_t0, const ComplexMatrix2& basis0,
                                  double min_ratio = 10.0);
// The bare permutation expressed in the computational basis.
ComplexMatrix2 permutation_matrix(const PermutationOp& op, const ComplexMatrix2& basis0);

}  // namespace nhsta
