#include <cmath>

#include "doctest.h"
#include "nhsta/adiabatic.hpp"
#include "nhsta/contour.hpp"
#include "nhsta/errors.hpp"
#include "oracles.hpp"

using namespace nhsta;

namespace {

const CircularLoop kCirc1{0.5, 0.5, 1.0, 0.0, 1};

std::vector<cplx> radicand_samples(const CircularLoop& loop, const Schedule& s, const std::vector<double>& g) {
    std::vector<cplx> r;
    for (double t : g) r.push_back(radicand(loop_kinematics(loop, s, t).p));
    return r;
}

}  // namespace

TEST_CASE("loop_point") {
    const CircularLoop loop{1.0, 1.0, 2.0, 0.0, 1};
    auto p = loop_point(loop, 0.0);
    CHECK(p.delta == 0.0);
    CHECK(p.omega == 2.0);
    CHECK(p.gamma == 2.0);
    p = loop_point(loop, 0.5);
    CHECK(std::abs(p.delta) < 1e-15);
    CHECK(std::abs(p.omega) < 1e-15);
    const auto a = loop_point(loop, 1.0), b = loop_point(loop, 0.0);
    CHECK(a.delta == b.delta);
    CHECK(a.omega == b.omega);
    CircularLoop shifted = loop;
    shifted.phi = kPi;
    p = loop_point(shifted, 0.0);
    CHECK(std::abs(p.delta) < 1e-15);
    CHECK(std::abs(p.omega) < 1e-15);
    CHECK_THROWS_AS((CircularLoop{0.0, 0.5, 1.0, 0.0, 1}.validate()), ConfigError);
    CHECK_THROWS_AS((CircularLoop{0.5, 0.5, 1.0, 0.0, 2}.validate()), ConfigError);
}

TEST_CASE("schedule") {
    const Schedule s{3.0, 1};
    CHECK(schedule_eps(s, 0.0) == 0.0);
    CHECK(schedule_eps(s, 3.0) == 1.0);
    CHECK(schedule_eps(s, 1.5) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(schedule_eps(Schedule{3.0, -1}, 3.0) == -1.0);
    CHECK_THROWS_AS(schedule_eps(s, -0.1), DomainError);
    CHECK_THROWS_AS(schedule_eps(s, 3.1), DomainError);
    // endpoint derivatives by one-sided differences
    const double h = 1e-6;
    CHECK(std::abs((schedule_eps(s, h) - schedule_eps(s, 0)) / h) < 1e-9);
    CHECK(std::abs((schedule_eps(s, 3.0) - schedule_eps(s, 3.0 - h)) / h) < 1e-9);
    CHECK(schedule_eps_ddot(s, 0.0) == 0.0);
    CHECK(schedule_eps_ddot(s, 3.0) == 0.0);
    for (double t : {0.3, 1.1, 2.2, 2.9}) {
        const double fd = oracle::fd5([&](double x) { return schedule_eps(s, x); }, t, 1e-3);
        CHECK(schedule_eps_dot(s, t) == doctest::Approx(fd).epsilon(1e-9));
        const double fd2 = oracle::fd5([&](double x) { return schedule_eps_dot(s, x); }, t, 1e-3);
        CHECK(schedule_eps_ddot(s, t) == doctest::Approx(fd2).epsilon(1e-9));
    }
    const auto g = uniform_grid(3.0, 2001);
    for (int d : {1, -1}) {
        const Schedule sd{3.0, d};
        bool mono = true;
        for (std::size_t k = 1; k < g.size(); ++k)
            mono = mono && d * (schedule_eps(sd, g[k]) - schedule_eps(sd, g[k - 1])) > 0.0;
        CHECK(mono);
    }
}

TEST_CASE("loop kinematics against finite differences") {
    const CircularLoop loop{0.5, 1.0 / 6, 1.0, -kPi / 8, 1};
    const Schedule s{5.0, 1};
    for (double t : {0.4, 1.7, 2.5, 4.2}) {
        const auto k = loop_kinematics(loop, s, t);
        auto D = [&](double x) { return loop_kinematics(loop, s, x).p.delta; };
        auto O = [&](double x) { return loop_kinematics(loop, s, x).p.omega; };
        auto Dd = [&](double x) { return loop_kinematics(loop, s, x).delta_dot; };
        auto Od = [&](double x) { return loop_kinematics(loop, s, x).omega_dot; };
        CHECK(k.delta_dot == doctest::Approx(oracle::fd5(D, t, 1e-3)).epsilon(1e-8));
        CHECK(k.omega_dot == doctest::Approx(oracle::fd5(O, t, 1e-3)).epsilon(1e-8));
        CHECK(k.delta_ddot == doctest::Approx(oracle::fd5(Dd, t, 1e-3)).epsilon(1e-8));
        CHECK(k.omega_ddot == doctest::Approx(oracle::fd5(Od, t, 1e-3)).epsilon(1e-8));
    }
    // second traversal repeats the first
    const auto a = loop_kinematics(loop, s, 1.3), b = loop_kinematics(loop, s, 6.3);
    CHECK(std::abs(a.p.delta - b.p.delta) < 1e-12);
    CHECK(std::abs(a.delta_dot - b.delta_dot) < 1e-12);
}

TEST_CASE("chi_circ") {
    CHECK(chi_circ(kCirc1, 0.0) == 0.0);
    CHECK(chi_circ(kCirc1, 0.5) == kPi);
    CircularLoop l = kCirc1;
    l.phi = kPi;
    CHECK(chi_circ(l, 0.0) == kPi);
}

TEST_CASE("detect_branch_crossings") {
    const std::vector<double> g{0.0, 1.0, 2.0, 3.0};
    const std::vector<cplx> constant(4, cplx(2.0, 0.5));
    auto st = detect_branch_crossings(constant, BranchCut::Sqrt, g);
    CHECK(st.count() == 0);
    CHECK(st.chi_at(3.0) == 0.0);
    CHECK_THROWS_AS(detect_branch_crossings(constant, BranchCut::Sqrt, std::vector<double>{0.0, 1.0}), ConfigError);

    // circle around the EP: one crossing at eps = 1/2, where chi_circ steps
    for (std::size_t n : {2048u, 4096u}) {
        for (double phi : {0.0, kPi / 4, kPi / 2, 3 * kPi / 4}) {
            CircularLoop loop = kCirc1;
            loop.phi = phi;
            const Schedule s{10.0, 1};
            const auto grid = uniform_grid(s.t0, n);
            const auto r = radicand_samples(loop, s, grid);
            st = detect_branch_crossings(r, BranchCut::Sqrt, grid, [&](double t) {
                return radicand(loop_kinematics(loop, s, t).p);
            });
            REQUIRE(st.count() == 1);
            // first grid time where chi_circ has stepped
            double t_closed = -1.0;
            for (double t : grid)
                if (chi_circ(loop, schedule_eps(s, t)) == kPi && t_closed < 0) t_closed = t;
            CHECK(std::abs(st.crossings[0] - t_closed) <= grid[1] - grid[0]);
            // interpolated (no callable) estimate lands in the same interval
            const auto st2 = detect_branch_crossings(r, BranchCut::Sqrt, grid);
            REQUIRE(st2.count() == 1);
            CHECK(std::abs(st2.crossings[0] - st.crossings[0]) <= grid[1] - grid[0]);
        }
    }

    // two side flips inside one interval are reported
    const std::vector<double> g2{0.0, 1.0};
    const std::vector<cplx> ends{cplx(-1.0, 1.0), cplx(-1.0, 1.0)};
    CHECK_THROWS_AS(detect_branch_crossings(ends, BranchCut::Sqrt, g2,
                                            [](double t) { return cplx(-1.0, std::cos(2 * kPi * t)); }),
                    RefinementError);
    // sample exactly on the cut counts as the upper side
    const std::vector<cplx> touch{cplx(-1, -1), cplx(-1, 0.0), cplx(-1, 1)};
    const std::vector<double> g3{0.0, 1.0, 2.0};
    st = detect_branch_crossings(touch, BranchCut::Sqrt, g3);
    REQUIRE(st.count() == 1);
    CHECK(st.crossings[0] == 1.0);
    CHECK(st.chi_at(1.0) == kPi);
    // arctan cut: real part flips while |Im| > 1
    const std::vector<cplx> zs{cplx(-0.5, 2.0), cplx(0.5, 2.0), cplx(1.0, 0.5), cplx(-1.0, 0.5)};
    st = detect_branch_crossings(zs, BranchCut::Arctan, g);
    CHECK(st.count() == 1);
}

TEST_CASE("concatenate and double traversal") {
    const Schedule s{4.0, 1};
    const SampledLoop a = sample_loop(kCirc1, s, 2048);
    const SampledLoop twice = concatenate(a, a);
    CHECK(twice.times.size() == 2 * a.times.size() - 1);
    CHECK(twice.duration() == doctest::Approx(8.0));
    std::vector<cplx> r;
    for (const auto& p : twice.points) r.push_back(radicand(p));
    const auto st = detect_branch_crossings(r, BranchCut::Sqrt, twice.times);
    CHECK(st.count() == 2);
    CHECK(st.chi_at(twice.times.back()) == doctest::Approx(2 * kPi));

    // a constant loop appended at the basepoint keeps the crossing count
    SampledLoop still;
    still.times = uniform_grid(1.0, 16);
    still.points.assign(16, a.points.back());
    const SampledLoop padded = concatenate(a, still);
    r.clear();
    for (const auto& p : padded.points) r.push_back(radicand(p));
    CHECK(detect_branch_crossings(r, BranchCut::Sqrt, padded.times).count() == 1);

    SampledLoop off = still;
    for (auto& p : off.points) p.omega += 0.1;
    CHECK_THROWS_AS(concatenate(a, off), ConfigError);
}

TEST_CASE("composed lambda is continuous") {
    // first differences shrink like h, second differences like h^2
    double prev_jump = 0.0, prev_curv = 0.0;
    for (std::size_t n : {1024u, 2048u, 4096u}) {
        const AdiabaticPath path(kCirc1, Schedule{10.0, 1}, n);
        double jump = 0.0, curv = 0.0;
        const auto& g = path.grid();
        std::vector<cplx> lam;
        for (double t : g) lam.push_back(path.at(t).lambda);
        for (std::size_t k = 1; k < lam.size(); ++k) jump = std::max(jump, std::abs(lam[k] - lam[k - 1]));
        for (std::size_t k = 1; k + 1 < lam.size(); ++k)
            curv = std::max(curv, std::abs(lam[k + 1] - 2.0 * lam[k] + lam[k - 1]));
        if (prev_jump > 0.0) {
            CHECK(prev_jump / jump == doctest::Approx(2.0).epsilon(0.05));
            CHECK(prev_curv / curv == doctest::Approx(4.0).epsilon(0.1));
        }
        prev_jump = jump;
        prev_curv = curv;
    }
    // without the sheet function the principal root jumps by 2|lambda|
    const AdiabaticPath path(kCirc1, Schedule{10.0, 1}, 4096);
    double raw = 0.0;
    cplx last = principal_sqrt(path.at(0.0).r);
    for (double t : path.grid()) {
        const cplx cur = principal_sqrt(path.at(t).r);
        raw = std::max(raw, std::abs(cur - last));
        last = cur;
    }
    CHECK(raw > 0.5);
}

TEST_CASE("reverse orientation") {
    // d = -1 runs eps from 0 to -1; the detector still finds a single crossing
    const CircularLoop loop{0.5, 0.5, 1.0, 0.0, -1};
    const AdiabaticPath path(loop, Schedule{10.0, -1});
    CHECK(path.sheet().count() == 1);
    CHECK(std::abs(path.at(10.0).lambda + path.at(0.0).lambda) < 1e-9);
}
