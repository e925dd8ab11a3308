#include <cmath>
#include <memory>
#include <random>
#include <vector>

#include "doctest.h"
#include "nhsta/dynamics.hpp"
#include "nhsta/errors.hpp"
#include "nhsta/sta.hpp"
#include "oracles.hpp"

using namespace nhsta;

namespace {

const CircularLoop kCirc1{0.5, 0.5, 1.0, 0.0, 1};
const CircularLoop kCirc2{0.5, 1.0 / 6.0, 1.0, -kPi / 8, 1};

Protocol constant_protocol(PauliFields f, double t0, std::size_t n = 65) {
    Protocol p;
    for (std::size_t k = 0; k < n; ++k) {
        p.times.push_back(t0 * k / (n - 1));
        p.fields.push_back(f);
    }
    p.dense = [f](double) { return f; };
    return p;
}

double rel_err(const ComplexMatrix2& a, const ComplexMatrix2& b) { return (a - b).max_abs() / b.max_abs(); }

}  // namespace

TEST_CASE("flow of trivial generators") {
    const std::vector<double> grid{0.0, 0.7, 2.0};
    const Flow f0 = integrate_flow([](double) { return ComplexMatrix2::zero(); }, grid);
    for (std::size_t k = 0; k < grid.size(); ++k) CHECK((f0.true_flow(k) - ComplexMatrix2::identity()).max_abs() < 1e-14);
    CHECK(f0.log_scale.front() == 0.0);

    const cplx lam(0.8, -0.3);
    const Flow f1 = integrate_flow([&](double) { return lam * ComplexMatrix2::sigma_z(); }, grid);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double t = grid[k];
        const ComplexMatrix2 want = ComplexMatrix2::diag(std::exp(-kI * lam * t), std::exp(kI * lam * t));
        CHECK(rel_err(f1.true_flow(k), want) < 1e-9);
    }
    // constant non-diagonal generator against the matrix exponential oracle
    const ComplexMatrix2 h = PauliFields{cplx(0.3, 0.1), cplx(0, 0.2), cplx(-0.4, 0.5)}.matrix();
    const Flow f2 = integrate_flow([&](double) { return h; }, grid);
    CHECK(rel_err(f2.true_flow(2), oracle::expm(-kI * 2.0 * h)) < 1e-9);

    CHECK_THROWS_AS(integrate_flow([](double) { return ComplexMatrix2::identity() * cplx(NAN, 0); }, grid),
                    GeneratorError);
}

TEST_CASE("fixed-step convergence order") {
    const Generator H = uncorrected_protocol(kCirc2, Schedule{5.0, 1}).generator();
    const std::vector<double> grid{0.0, 5.0};
    IntegratorOptions tight;
    tight.rtol = 1e-14;
    tight.atol = 1e-16;
    const ComplexMatrix2 ref = integrate_flow(H, grid, tight).true_flow(1);
    double prev = 0.0;
    for (int sub : {40, 80, 160}) {
        const double e = rel_err(integrate_flow_fixed(H, grid, sub).true_flow(1), ref);
        if (prev > 0.0) {
            const double order = std::log2(prev / e);
            MESSAGE("substeps " << sub << " error " << e << " observed order " << order);
            CHECK(order > 4.5);
            CHECK(order < 5.7);
        }
        prev = e;
    }
}

TEST_CASE("adaptive tolerance sweep converges") {
    const Generator H = td_correction(kCirc2, Schedule{5.0, 1}).generator();
    const std::vector<double> grid{0.0, 5.0};
    IntegratorOptions o;
    o.rtol = 1e-13;
    o.atol = 1e-15;
    const ComplexMatrix2 ref = integrate_flow(H, grid, o).true_flow(1);
    double prev = 1.0;
    for (double tol : {1e-6, 1e-8, 1e-10}) {
        o.rtol = tol;
        o.atol = 1e-2 * tol;
        const double e = rel_err(integrate_flow(H, grid, o).true_flow(1), ref);
        CHECK(e < 100 * tol);
        CHECK(e < prev);
        prev = e;
    }
}

TEST_CASE("flow composition and log scale") {
    const Generator H = uncorrected_protocol(kCirc1, Schedule{10.0, 1}).generator();
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.5, 9.5);
    for (int rep = 0; rep < 4; ++rep) {
        const double t1 = u(rng);
        const Flow whole = integrate_flow(H, std::vector<double>{0.0, t1, 10.0});
        const Flow tail = integrate_flow(H, std::vector<double>{t1, 10.0});
        CHECK(rel_err(tail.true_flow(1) * whole.true_flow(1), whole.true_flow(2)) < 1e-8);
    }
    // long loop: amplification ~ e^{t0/4}, rescaling keeps phi bounded
    const Generator H50 = uncorrected_protocol(kCirc1, Schedule{50.0, 1}).generator();
    const Flow f = integrate_flow(H50, 50.0, 1e-10, 101);
    for (std::size_t k = 0; k < f.phi.size(); ++k) CHECK(f.phi[k].max_abs() <= 1e2);
    CHECK(f.log_scale.back() > 5.0);
    IntegratorOptions o;
    o.rtol = 1e-13;
    o.atol = 1e-15;
    const Flow r = integrate_flow(H, std::vector<double>{0.0, 10.0}, o);
    const Flow a = integrate_flow(H, std::vector<double>{0.0, 10.0});
    CHECK(rel_err(a.true_flow(1), r.true_flow(1)) < 1e-8);
}

TEST_CASE("transition probabilities") {
    const std::vector<double> grid{0.0, 1.0};
    const Flow id = integrate_flow([](double) { return ComplexMatrix2::zero(); }, grid);
    const AdiabaticPath path(kCirc1, Schedule{1.0, 1});
    const std::vector<ComplexMatrix2> same{path.frame(0.0), path.frame(0.0)};
    CHECK(transition_prob(id, same, 1, Mode::Plus, Mode::Plus) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(transition_prob(id, same, 1, Mode::Plus, Mode::Minus) < 1e-28);
    CHECK(fidelity_error(id, same, Mode::Minus) < 1e-14);

    // slow uncorrected loop: both initial modes end in the plus mode
    auto slow = std::make_shared<const AdiabaticPath>(kCirc1, Schedule{50.0, 1});
    const Flow f = integrate_flow(uncorrected_protocol(slow).generator(), slow->grid());
    const auto frames = frames_on(*slow, f.times);
    const ProbabilityTrace tr = transition_probabilities(f, frames);
    MESSAGE("P++ " << tr.at_end(Mode::Plus, Mode::Plus) << " P-+ " << tr.at_end(Mode::Minus, Mode::Plus));
    CHECK(tr.at_end(Mode::Plus, Mode::Plus) > 0.999);
    CHECK(tr.at_end(Mode::Minus, Mode::Plus) > 0.999);
    for (std::size_t k = 0; k < tr.p.size(); k += 257)
        for (int i = 0; i < 2; ++i) CHECK(tr.p[k][i][0] + tr.p[k][i][1] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("td and satd fidelity") {
    auto path = std::make_shared<const AdiabaticPath>(kCirc2, Schedule{5.0, 1});
    const auto frames_for = [&](const Flow& f) { return frames_on(*path, f.times); };
    const Flow ftd = integrate_flow(td_correction(path).generator(), path->grid());
    const ProbabilityTrace td = transition_probabilities(ftd, frames_for(ftd));
    CHECK(td.max_deviation(Mode::Plus) < 1e-6);
    CHECK(td.max_deviation(Mode::Minus) < 1e-6);

    const Flow fs = integrate_flow(satd_fields(dressing_angle(path, Mask{})).generator(), path->grid());
    const auto fr = frames_for(fs);
    const ProbabilityTrace sa = transition_probabilities(fs, fr);
    CHECK(fidelity_error(fs, fr, Mode::Plus) < 1e-6);
    CHECK(fidelity_error(fs, fr, Mode::Minus) < 1e-6);
    CHECK(sa.max_deviation(Mode::Minus) > 0.01);
}

TEST_CASE("unitarity defect") {
    CHECK(unitarity_defect(ComplexMatrix2::diag(2.0, 0.5)) == doctest::Approx(1.5).epsilon(1e-14));
    const ComplexMatrix2 h = PauliFields{0.3, -0.7, 0.2}.matrix();
    CHECK(unitarity_defect(oracle::expm(-kI * h)) < 1e-13);
    const ComplexMatrix2 m{cplx(1, 2), cplx(0.3, 0), cplx(-1, 0.5), cplx(0, 4)};
    CHECK(unitarity_defect(m) == doctest::Approx(oracle::spectral_norm(m.adjoint() - m.inverse())).epsilon(1e-10));
    CHECK_THROWS_AS(unitarity_defect(ComplexMatrix2::diag(1.0, 0.0)), SingularMatrixError);
}

TEST_CASE("adiabatic hamiltonian") {
    const Schedule s{5.0, 1};
    const ComplexMatrix2 h0 = adiabatic_hamiltonian(kCirc2, s, 0.0);
    CHECK(std::abs(h0(0, 1)) == 0.0);
    CHECK(std::abs(h0(1, 0)) == 0.0);
    const AdiabaticPath path(kCirc2, s);
    const double t = 2.5;
    const cplx th_dot = oracle::fd5([&](double x) { return path.at(x).theta; }, t, 1e-3);
    const ComplexMatrix2 h = adiabatic_hamiltonian(kCirc2, s, t);
    CHECK(oracle::rel(h(0, 1), -0.5 * th_dot * (-kI)) < 1e-8);
    CHECK(oracle::rel(h(1, 0), -0.5 * th_dot * kI) < 1e-8);
}

TEST_CASE("braid trace") {
    const Protocol c = constant_protocol({0.3, 0.0, cplx(0.1, 0.2)}, 2.0);
    const BraidTrace ct = braid_trace(c);
    for (std::size_t k = 0; k < ct.times.size(); ++k) CHECK(ct.lambda_plus[k] == ct.lambda_plus[0]);

    for (double phi : {0.0, kPi / 4, kPi / 2, kPi}) {
        CircularLoop loop = kCirc1;
        loop.phi = phi;
        auto path = std::make_shared<const AdiabaticPath>(loop, Schedule{5.0, 1});
        const BraidTrace tr = braid_trace(uncorrected_protocol(path));
        double worst = 0.0;
        for (std::size_t k = 0; k < tr.times.size(); ++k) {
            worst = std::max(worst, std::abs(tr.lambda_plus[k] - path->at(tr.times[k]).lambda));
            CHECK(std::abs(tr.lambda_plus[k] + tr.lambda_minus[k]) == 0.0);
        }
        CHECK(worst < 1e-9);
        CHECK(std::abs(tr.lambda_plus.back() + tr.lambda_plus.front()) < 1e-9);
    }

    Protocol ep = constant_protocol({0.0, 0.0, 0.0}, 1.0, 5);
    for (std::size_t k = 0; k < ep.size(); ++k) ep.fields[k].x = ep.times[k] - 0.5;
    ep.dense = {};
    CHECK_THROWS_AS(braid_trace(ep), DegenerateSpectrumError);
}

TEST_CASE("braid criteria") {
    const Schedule s{5.0, 1};
    const Protocol uc = uncorrected_protocol(kCirc1, s);
    const Protocol twice = concatenate(uc, uc);
    const BraidTrace tr = braid_trace(twice, twice.times);
    const BraidCriteria c = braid_criteria(tr, 5.0);
    CHECK(c.cond_i);
    CHECK(c.cond_ii);
    CHECK(c.swap());
    // shifting by one loop flips the sign
    const std::size_t n = uc.size() - 1;
    double shift = 0.0;
    for (std::size_t k = 0; k <= n; ++k)
        shift = std::max(shift, std::abs(tr.lambda_plus[k + n] + tr.lambda_plus[k]));
    CHECK(shift < 1e-8);

    const CircularLoop away{0.2, 1.5, 1.0, 0.0, 1};
    const Protocol p = uncorrected_protocol(away, s);
    const BraidCriteria d = braid_criteria(braid_trace(concatenate(p, p)), 5.0);
    CHECK(d.identity_closure);
    CHECK_FALSE(d.swap());

    CHECK_THROWS_AS(braid_criteria(braid_trace(uc), 5.0), ConfigError);
}

TEST_CASE("encircle check") {
    CHECK(ep_encircle_check(uncorrected_protocol(kCirc1, Schedule{5.0, 1})));
    CHECK_FALSE(ep_encircle_check(uncorrected_protocol(CircularLoop{0.2, 1.5, 1.0, 0.0, 1}, Schedule{5.0, 1})));
    // D = 1 + 0.09 e^{2 pi i t} stays in the right half-plane
    Protocol half = constant_protocol({1.0, 0.0, 0.0}, 1.0, 129);
    half.dense = [](double t) { return PauliFields{1.0, 0.0, 0.3 * std::exp(kI * kPi * t)}; };
    for (std::size_t k = 0; k < half.size(); ++k) half.fields[k] = half.dense(half.times[k]);
    const Winding w = discriminant_winding(half, half.times);
    CHECK(w.winding == 0);
    CHECK_FALSE(w.encircles);
    CHECK_THROWS_AS(discriminant_winding(half, std::vector<double>{}), ConfigError);
}

TEST_CASE("modified spectrum braids exactly when the discriminant winds oddly") {
    // spot points on the (loop time, radius) map for phi = 0, Omega0 = Gamma0 / 2
    int enc_td = 0, enc_satd = 0, n_td = 0, n_satd = 0;
    for (double r : {0.1, 0.3, 0.5, 0.8})
        for (double t0 : {1.0, 5.0, 20.0}) {
            const CircularLoop loop{r, 0.5, 1.0, 0.0, 1};
            auto path = std::make_shared<const AdiabaticPath>(loop, Schedule{t0, 1}, 2048);
            const Protocol td = td_correction(path);
            const bool e = ep_encircle_check(td);
            CHECK(braid_criteria(braid_trace(concatenate(td, td)), t0).swap() == e);
            enc_td += e;
            ++n_td;
            // the dynamics follows the adiabatic modes whether or not the modified loop winds
            const Flow f = integrate_flow(td.generator(), std::vector<double>{0.0, t0});
            CHECK(extract_permutation(f.true_flow(1), path->frame(0.0)).is_swap());
            const DressingAngle mu = dressing_angle(path, Mask{});
            if (!mu.valid) continue;
            const Protocol sa = satd_fields(mu);
            const bool es = ep_encircle_check(sa);
            CHECK(braid_criteria(braid_trace(concatenate(sa, sa)), t0).swap() == es);
            enc_satd += es;
            ++n_satd;
        }
    MESSAGE("td encircles " << enc_td << "/" << n_td << ", satd encircles " << enc_satd << "/" << n_satd);
    CHECK(enc_td > 0);
    CHECK(enc_td < n_td);
    CHECK(enc_satd < n_satd);
}

TEST_CASE("permutation operator") {
    const ComplexMatrix2 basis = AdiabaticPath(kCirc1, Schedule{5.0, 1}).frame(0.0);
    const PermutationOp id = extract_permutation(ComplexMatrix2::identity(), basis);
    CHECK(id.is_identity());

    ComplexMatrix2 p0, ppi;
    for (double phi : {0.0, kPi}) {
        CircularLoop loop = kCirc1;
        loop.phi = phi;
        auto path = std::make_shared<const AdiabaticPath>(loop, Schedule{5.0, 1});
        const Flow f = integrate_flow(td_correction(path).generator(), std::vector<double>{0.0, 5.0});
        const PermutationOp op = extract_permutation(f.true_flow(1), path->frame(0.0));
        CHECK(op.is_swap());
        (phi == 0.0 ? p0 : ppi) = permutation_matrix(op, path->frame(0.0));
    }
    MESSAGE("basepoint 0: " << p0 << "  basepoint pi: " << ppi);
    CHECK((p0 - ppi).max_abs() > 0.1);

    // slow uncorrected loop: both modes collapse onto the gain mode, no permutation
    auto slow = std::make_shared<const AdiabaticPath>(kCirc1, Schedule{50.0, 1});
    const Flow f = integrate_flow(uncorrected_protocol(slow).generator(), std::vector<double>{0.0, 50.0});
    CHECK_THROWS_AS(extract_permutation(f.true_flow(1), slow->frame(0.0)), NoClearPermutationError);
}
