#pragma once

#include <cstdint>
#include <vector>

#include "nhsta/adiabatic.hpp"
#include "nhsta/dynamics.hpp"
#include "nhsta/protocol.hpp"

namespace nhsta {

// Static Gaussian offset of the loop amplitude, standard deviation beta.
struct NoiseModel {
    double beta = 0.05;
    int quadrature_order = 15;

    void validate() const;
};

// Nodes and weights for E[f(X)], X ~ N(0, 1).
struct HermiteRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

HermiteRule gauss_hermite(int order);

// H(t) + delta sz
Protocol perturbed_generator(const Protocol& p, double delta_shift);

// delta S^-1 sz S for S = exp(-i theta sy / 2)
ComplexMatrix2 adiabatic_frame_perturbation(cplx theta, double delta);

struct NoiseAverage {
    double error = 0.0;  // 1 - <P_ij(t0)>
    std::vector<double> node_delta;
    std::vector<double> node_probability;
};

// Each quadrature node is one flow integration; nodes run on `jobs` threads
// and are summed in fixed order.
NoiseAverage noise_average(const Protocol& p, const AdiabaticPath& frame, Mode i, Mode j, const NoiseModel& noise,
                           const IntegratorOptions& opt = {}, int jobs = 1);
double noise_averaged_error(const Protocol& p, const AdiabaticPath& frame, Mode i, Mode j, const NoiseModel& noise,
                            const IntegratorOptions& opt = {}, int jobs = 1);

// P_ij(t0) for one static offset.
double perturbed_probability(const Protocol& p, const AdiabaticPath& frame, Mode i, Mode j, double delta,
                             const IntegratorOptions& opt = {});

struct AdaptiveEstimate {
    double error = 0.0;
    double error_bound = 0.0;  // Gauss-Kronrod error estimate
    std::size_t evaluations = 0;
};

// Adaptive Gauss-Kronrod over delta / beta in [-8, 0] and [0, 8]. Unlike a
// fixed Hermite rule it resolves a narrow dip of the error at delta = 0,
// which long loops develop.
AdaptiveEstimate noise_averaged_error_adaptive(const Protocol& p, const AdiabaticPath& frame, Mode i, Mode j,
                                               double beta, double rel_tol = 1e-6, const IntegratorOptions& opt = {},
                                               int jobs = 1);

struct MonteCarloEstimate {
    double mean_error = 0.0;
    double std_error = 0.0;
    std::size_t samples = 0;
};

MonteCarloEstimate noise_averaged_error_mc(const Protocol& p, const AdiabaticPath& frame, Mode i, Mode j, double beta,
                                           std::size_t samples, std::uint64_t seed,
                                           const IntegratorOptions& opt = {}, int jobs = 1);

}  // namespace nhsta
