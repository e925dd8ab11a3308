#include <cmath>
#include <random>

#include "doctest.h"
#include "nhsta/errors.hpp"
#include "nhsta/spectrum.hpp"
#include "oracles.hpp"

using namespace nhsta;

namespace {

bool close(const ComplexMatrix2& a, const ComplexMatrix2& b, double tol) { return (a - b).max_abs() <= tol; }

ParamPoint random_point(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-2.0, 2.0), g(0.0, 3.0);
    return {u(rng), u(rng), g(rng)};
}

}  // namespace

TEST_CASE("matrix basics") {
    const ComplexMatrix2 a{cplx(1, 2), cplx(0, -1), 3.0, cplx(-2, 0.5)};
    const ComplexMatrix2 b{cplx(0.5, 0), cplx(1, 1), cplx(0, 2), 4.0};
    const ComplexMatrix2 c{2.0, cplx(0, 1), cplx(1, -1), 0.25};
    CHECK(close((a * b) * c, a * (b * c), 1e-13));
    CHECK(close(a * a.inverse(), ComplexMatrix2::identity(), 1e-14));
    CHECK_THROWS_AS(ComplexMatrix2(1.0, 2.0, 2.0, 4.0).inverse(1e-12), SingularMatrixError);
    CHECK(ComplexMatrix2::diag(2.0, 0.5).spectral_norm() == doctest::Approx(2.0));
    CHECK(a.spectral_norm() == doctest::Approx(oracle::spectral_norm(a)).epsilon(1e-10));
    const PauliFields f{cplx(1, 2), cplx(-0.5, 0.3), cplx(0.1, -1)};
    const auto g = PauliFields::from_matrix(f.matrix());
    CHECK(std::abs(g.x - f.x) < 1e-15);
    CHECK(std::abs(g.y - f.y) < 1e-15);
    CHECK(std::abs(g.z - f.z) < 1e-15);
}

TEST_CASE("hamiltonian_sym") {
    CHECK(close(hamiltonian_sym({0, 1, 0}), ComplexMatrix2::sigma_x(), 0));
    CHECK(close(hamiltonian_sym({1, 0, 0}), ComplexMatrix2::diag(-1.0, 1.0), 0));
    const double g0 = 1.3;
    const ComplexMatrix2 h = hamiltonian_sym({0, g0 / 2, g0});
    CHECK(close(h, ComplexMatrix2(cplx(0, -g0 / 2), g0 / 2, g0 / 2, cplx(0, g0 / 2)), 1e-15));
    CHECK(std::abs(h.trace()) == 0.0);
    CHECK(h(0, 1) == h(1, 0));
}

TEST_CASE("radicand and EP locus") {
    CHECK(std::abs(radicand({0, 0.7, 0}) - cplx(0.49, 0)) < 1e-16);
    CHECK(std::abs(radicand({0, 0.5, 1.0})) == 0.0);
    CHECK(radicand({0.3, 0, 0}) == cplx(0.09, 0));
    CHECK(is_ep({0, 0.5, 1.0}, 1e-12));
    CHECK_FALSE(is_ep({0, 0.8, 0}, 1e-12));
    // delta = gamma/2 with omega = 0 solves the real part only; delta*gamma != 0
    CHECK_FALSE(is_ep({0.5, 0, 1.0}, 1e-12));
    CHECK(on_branch_cut_region({0, 0, 1.0}, 1e-12));
    CHECK_FALSE(on_branch_cut_region({0, 1.0, 1.0}, 1e-12));
    CHECK(on_branch_cut_region({0, 0.5, 1.0}, 1e-12));
}

TEST_CASE("holomorphic eigenvalues") {
    auto s = holomorphic_eigenvalues({0, 1, 0}, 0.0);
    CHECK(s.lambda_plus == cplx(1, 0));
    CHECK(s.lambda_minus == cplx(-1, 0));
    s = holomorphic_eigenvalues({0, 1, 0}, kPi);
    CHECK(s.lambda_plus == cplx(-1, 0));
    // on the cut: limit from Im r > 0
    s = holomorphic_eigenvalues({0, 0, 1.0}, 0.0);
    CHECK(std::abs(s.lambda_plus - cplx(0, 0.5)) < 1e-15);
    const auto above = holomorphic_eigenvalues({1e-9, 0, 1.0}, 0.0).lambda_plus;
    CHECK(std::abs(above - s.lambda_plus) < 1e-8);
    // negative zero does not select the lower side
    s = holomorphic_eigenvalues({-0.0, 0, 1.0}, 0.0);
    CHECK(std::abs(s.lambda_plus - cplx(0, 0.5)) < 1e-15);
    CHECK_THROWS_AS(holomorphic_eigenvalues({0, 0.5, 1.0}, 0.0), DegenerateSpectrumError);
}

TEST_CASE("theta closed form") {
    CHECK(std::abs(theta({1, 0, 0}, 0.0)) == 0.0);
    CHECK(std::abs(theta({0, 1, 0}, 0.0) - cplx(-kPi / 2, 0)) < 1e-15);
    CHECK(std::abs(theta({0, 1, 0}, kPi) - cplx(kPi / 2, 0)) < 1e-15);
    // omega = 0 with delta < 0 makes x + sqrt(r) vanish
    CHECK_THROWS_AS(theta({-0.7, 0, 0}, 0.0), SingularFrameError);
    // the principal representative agrees modulo 2 pi
    std::mt19937_64 rng(7);
    for (int k = 0; k < 200; ++k) {
        const ParamPoint p = random_point(rng);
        const double chi = (k % 2) * kPi;
        const cplx a = theta(p, chi);
        const cplx b = holomorphic_eigenvalues(p, chi).theta;
        CHECK(oracle::rel(std::exp(kI * a), std::exp(kI * b)) < 1e-10);
        CHECK(std::abs(theta(p, chi + kPi) - a - kPi) < 1e-12);
    }
}

TEST_CASE("frame_adiabatic diagonalizes the Hamiltonian") {
    CHECK(close(frame_rotation(0.0), ComplexMatrix2::identity(), 0));
    // p = (0, 1, 0): column 0 carries lambda_minus = -1
    const ComplexMatrix2 S = frame_adiabatic({0, 1, 0}, 0.0);
    CHECK(close(S.inverse() * hamiltonian_sym({0, 1, 0}) * S, ComplexMatrix2::diag(-1.0, 1.0), 1e-14));

    std::mt19937_64 rng(2024);
    int tested = 0;
    double worst_diag = 0.0, worst_res = 0.0, worst_bi = 0.0;
    while (tested < 10000) {
        const ParamPoint p = random_point(rng);
        if (std::abs(radicand(p)) < 1e-6) continue;
        const double chi = (tested % 2) * kPi;
        const ComplexMatrix2 h = hamiltonian_sym(p);
        const double hn = h.spectral_norm();
        const auto spec = holomorphic_eigenvalues(p, chi);
        ComplexMatrix2 Sp;
        try {
            Sp = frame_adiabatic(p, chi);
        } catch (const SingularFrameError&) {
            continue;
        }
        const ComplexMatrix2 d = Sp.inverse() * h * Sp;
        worst_diag = std::max(worst_diag, std::max(std::abs(d(0, 1)), std::abs(d(1, 0))) / hn);
        CHECK(std::abs(spec.lambda_plus + spec.lambda_minus) == 0.0);
        CHECK(std::abs(holomorphic_eigenvalues(p, chi + kPi).lambda_plus + spec.lambda_plus) < 1e-14 * hn);
        // eigenvalues against the characteristic polynomial
        const auto [e1, e2] = oracle::eigenvalues(h);
        const double m1 = std::min(std::abs(e1 - spec.lambda_plus), std::abs(e2 - spec.lambda_plus));
        CHECK(m1 < 1e-10 * hn);
        const auto [vp, vm] = right_eigenvectors(p, chi);
        const auto rp = h * vp;
        const auto rm = h * vm;
        const ComplexVector2 ep{rp[0] - spec.lambda_plus * vp[0], rp[1] - spec.lambda_plus * vp[1]};
        const ComplexVector2 em{rm[0] - spec.lambda_minus * vm[0], rm[1] - spec.lambda_minus * vm[1]};
        worst_res = std::max({worst_res, norm(ep) / (hn * norm(vp)), norm(em) / (hn * norm(vm))});
        // rows of S^-1 against columns of S
        const ComplexMatrix2 bi = Sp.inverse() * Sp;
        worst_bi = std::max(worst_bi, (bi - ComplexMatrix2::identity()).max_abs());
        ++tested;
    }
    CHECK(worst_diag < 1e-10);
    CHECK(worst_res < 1e-10);
    CHECK(worst_bi < 1e-10);
}

TEST_CASE("right eigenvectors") {
    auto [vp, vm] = right_eigenvectors({0, 1, 0}, 0.0);
    CHECK(vp[0] == cplx(1, 0));
    CHECK(vp[1] == cplx(1, 0));
    CHECK(vm[0] == cplx(-1, 0));
    CHECK(vm[1] == cplx(1, 0));
    CHECK_THROWS_AS(right_eigenvectors({0, 0.5, 1.0}, 0.0), DegenerateSpectrumError);
}
