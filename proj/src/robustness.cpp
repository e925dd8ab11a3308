#include "nhsta/robustness.hpp"

#include <array>
#include <cmath>
#include <random>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "nhsta/errors.hpp"
#include "nhsta/parallel.hpp"

namespace nhsta {

void NoiseModel::validate() const {
    if (!(std::isfinite(beta) && beta >= 0.0)) throw ConfigError("noise.beta must be >= 0");
    if (quadrature_order < 3) throw ConfigError("noise.quadrature_order must be >= 3");
}

HermiteRule gauss_hermite(int order) {
    if (order < 1 || order > 200) throw ConfigError("gauss_hermite: order must lie in [1, 200]");
    // physicists' rule by Newton iteration on orthonormal Hermite polynomials
    const int n = order;
    const double pim4 = 0.7511255444649425;  // pi^(-1/4)
    std::vector<double> x(n), w(n);
    double z = 0.0;
    for (int i = 0; i < (n + 1) / 2; ++i) {
        if (i == 0)
            z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -1.0 / 6.0);
        else if (i == 1)
            z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
        else if (i == 2)
            z = 1.86 * z - 0.86 * x[0];
        else if (i == 3)
            z = 1.91 * z - 0.91 * x[1];
        else
            z = 2.0 * z - x[i - 2];
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p1 = pim4, p2 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = z * std::sqrt(2.0 / (j + 1)) * p2 - std::sqrt(static_cast<double>(j) / (j + 1)) * p3;
            }
            pp = std::sqrt(2.0 * n) * p2;
            const double z1 = z;
            z = z1 - p1 / pp;
            if (std::abs(z - z1) <= 1e-15 * std::max(1.0, std::abs(z))) break;
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = w[n - 1 - i] = 2.0 / (pp * pp);
    }
    if (n % 2 == 1) x[n / 2] = 0.0;
    HermiteRule r;
    r.nodes.resize(n);
    r.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        // ascending order, standard-normal measure
        r.nodes[i] = std::sqrt(2.0) * x[n - 1 - i];
        r.weights[i] = w[n - 1 - i] / std::sqrt(kPi);
    }
    return r;
}

Protocol perturbed_generator(const Protocol& p, double delta_shift) {
    Protocol out = p;
    if (delta_shift == 0.0) return out;
    for (auto& f : out.fields) f.z += delta_shift;
    if (p.dense) {
        FieldFunction base = p.dense;
        out.dense = [base, delta_shift](double t) {
            PauliFields f = base(t);
            f.z += delta_shift;
            return f;
        };
    }
    return out;
}

ComplexMatrix2 adiabatic_frame_perturbation(cplx theta, double delta) {
    return delta * (std::cos(theta) * ComplexMatrix2::sigma_z() - std::sin(theta) * ComplexMatrix2::sigma_x());
}

double perturbed_probability(const Protocol& p, const AdiabaticPath& frame, Mode i, Mode j, double delta,
                             const IntegratorOptions& opt) {
    const Protocol q = perturbed_generator(p, delta);
    const double ta = p.times.front(), tb = p.times.back();
    const double grid[2] = {ta, tb};
    const Flow flow = integrate_flow(q.generator(), grid, opt);
    const ComplexMatrix2 frames[2] = {frame.frame(ta), frame.frame(tb)};
    return transition_prob(flow, frames, 1, i, j);
}

NoiseAverage noise_average(const Protocol& p, const AdiabaticPath& frame, Mode i, Mode j, const NoiseModel& noise,
                           const IntegratorOptions& opt, int jobs) {
    noise.validate();
    NoiseAverage out;
    if (noise.beta == 0.0) {
        out.node_delta = {0.0};
        out.node_probability = {perturbed_probability(p, frame, i, j, 0.0, opt)};
        out.error = 1.0 - out.node_probability[0];
        return out;
    }
    const HermiteRule rule = gauss_hermite(noise.quadrature_order);
    const std::size_t n = rule.nodes.size();
    out.node_delta.resize(n);
    out.node_probability.resize(n);
    parallel_for(n, jobs, [&](std::size_t k) {
        const double delta = noise.beta * rule.nodes[k];
        out.node_delta[k] = delta;
        try {
            out.node_probability[k] = perturbed_probability(p, frame, i, j, delta, opt);
        } catch (const NumericError& e) {
            std::ostringstream os;
            os << "quadrature node " << k << " (delta=" << delta << "): " << e.what();
            throw NumericError(os.str());
        }
    });
    double avg = 0.0;
    for (std::size_t k = 0; k < n; ++k) avg += rule.weights[k] * out.node_probability[k];
    out.error = 1.0 - avg;
    return out;
}

double noise_averaged_error(const Protocol& p, const AdiabaticPath& frame, Mode i, Mode j, const NoiseModel& noise,
                            const IntegratorOptions& opt, int jobs) {
    return noise_average(p, frame, i, j, noise, opt, jobs).error;
}

AdaptiveEstimate noise_averaged_error_adaptive(const Protocol& p, const AdiabaticPath& frame, Mode i, Mode j,
                                               double beta, double rel_tol, const IntegratorOptions& opt, int jobs) {
    NoiseModel{beta, 3}.validate();
    if (!(rel_tol > 0.0)) throw ConfigError("adaptive quadrature: rel_tol must be positive");
    if (beta == 0.0) return {1.0 - perturbed_probability(p, frame, i, j, 0.0, opt), 0.0, 1};
    constexpr double kCut = 8.0;
    constexpr unsigned kMaxDepth = 24;
    struct Half {
        double value = 0.0, bound = 0.0;
        std::size_t evals = 0;
    };
    std::array<Half, 2> half;
    parallel_for(2, jobs, [&](std::size_t h) {
        Half& out = half[h];
        auto f = [&](double u) {
            ++out.evals;
            const double w = std::exp(-0.5 * u * u) / std::sqrt(2.0 * kPi);
            return w * (1.0 - perturbed_probability(p, frame, i, j, beta * u, opt));
        };
        const double a = h == 0 ? -kCut : 0.0, b = h == 0 ? 0.0 : kCut;
        out.value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, kMaxDepth, rel_tol,
                                                                                  &out.bound);
    });
    return {half[0].value + half[1].value, half[0].bound + half[1].bound, half[0].evals + half[1].evals};
}

MonteCarloEstimate noise_averaged_error_mc(const Protocol& p, const AdiabaticPath& frame, Mode i, Mode j, double beta,
                                           std::size_t samples, std::uint64_t seed, const IntegratorOptions& opt,
                                           int jobs) {
    if (samples < 2) throw ConfigError("monte carlo: need at least two samples");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, beta);
    std::vector<double> deltas(samples);
    for (auto& d : deltas) d = normal(rng);
    std::vector<double> err(samples);
    parallel_for(samples, jobs,
                 [&](std::size_t k) { err[k] = 1.0 - perturbed_probability(p, frame, i, j, deltas[k], opt); });
    double mean = 0.0;
    for (double e : err) mean += e;
    mean /= static_cast<double>(samples);
    double var = 0.0;
    for (double e : err) var += (e - mean) * (e - mean);
    var /= static_cast<double>(samples - 1);
    return {mean, std::sqrt(var / static_cast<double>(samples)), samples};
}

}  // namespace nhsta
