#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "boltz/datum.hpp"
#include "boltz/gfunction.hpp"
#include "doctest.h"

using namespace boltz;

TEST_CASE("unit point mass: every construction step by hand") {
    GFunction G = build_G({{1.0, 1.0}}, 24);
    const auto& tr = G.trace();

    // tail(r) = 1 for r <= 1, 0 afterwards; minimality plus forced strict
    // increase gives r_n = n + 1 and B_n = n - 1
    REQUIRE(tr.r.size() >= 6);
    for (std::size_t j = 0; j < 6; ++j) CHECK(tr.r[j] == (long long)(j + 2));
    for (std::size_t n = 1; n <= 6; ++n) CHECK(tr.B[n] == (long long)(n - 1));
    // B*_1 = B_1; afterwards the smallest strictly larger value
    CHECK(tr.Bstar[1] == 0);
    for (std::size_t n = 2; n <= 6; ++n) CHECK(tr.Bstar[n] == (long long)n);
    CHECK(tr.bstar_strictly_increasing);
    // h(0) = 0, h(n) = B*_n + 1
    CHECK(tr.h[0] == doctest::Approx(0.0));
    CHECK(tr.h[1] == doctest::Approx(1.0));
    CHECK(tr.h[2] == doctest::Approx(3.0));
    CHECK(tr.h[3] == doctest::Approx(4.0));

    // slopes A_n = h^{-1}(B_n + 1) + 1, with A_0 = A_1
    const auto& A = G.A();
    CHECK(A[0] == doctest::Approx(2.0));
    CHECK(A[1] == doctest::Approx(2.0));
    CHECK(A[2] == doctest::Approx(2.5));
    CHECK(A[3] == doctest::Approx(3.0));
    CHECK(A[4] == doctest::Approx(4.0));
    CHECK(A[5] == doctest::Approx(5.0));
    CHECK(tr.sup_ratio == doctest::Approx(4.0 / 3.0));

    CHECK(G.lambda2() == doctest::Approx(2.0));
    CHECK(G.lambda1() == doctest::Approx(4.0));
    CHECK(G.lambda3() == doctest::Approx(4.0));
    CHECK(G.int_G_dgamma() == doctest::Approx(1.0));

    // primitive values on the dyadic grid
    CHECK(G.G(1.0) == doctest::Approx(1.0));
    CHECK(G.G(2.0) == doctest::Approx(3.0));
    CHECK(G.G(4.0) == doctest::Approx(7.0));
    CHECK(G.G(8.0) == doctest::Approx(17.0));
    CHECK(G.G(0.5) == doctest::Approx(0.5));
    CHECK(G.g(0.5) == doctest::Approx(1.0));
    CHECK(G.g(1.5) == doctest::Approx(2.0));
    CHECK(G.g(5.0) == doctest::Approx(2.5));

    GConstants c = constants(G, 1.0);
    CHECK(c.m == 3);
    double C1 = 4096.0 + 2.0 * std::exp(8.0) * (1.0 + 4.0 * std::pow(8.0, 8) / 3.0);
    CHECK(c.C1 == doctest::Approx(C1).epsilon(1e-12));
    CHECK(c.C == doctest::Approx(3.0 * 16.0 * C1).epsilon(1e-12));
}

TEST_CASE("gauge properties hold pointwise") {
    GFunction G = build_G({{1.0, 1.0}}, 40);
    // q starts at 1/3, stays there on (0, 1], never decreases, diverges
    CHECK(G.q(0.0) == doctest::Approx(1.0 / 3.0));
    CHECK(G.q(0.7) == doctest::Approx(1.0 / 3.0).epsilon(1e-13));
    CHECK(G.q(1.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-13));
    double prev = 0.0;
    for (double x = 0.0; x < 40.0; x += 0.03) {
        double v = G.q(x);
        CHECK(v >= prev - 1e-13);
        prev = v;
    }
    CHECK(G.q(1e5) > 10.0);

    // G convex increasing, superlinear; G* = G(x^2)
    double prevG = -1.0, prevSlope = 0.0;
    for (double x = 0.05; x < 300.0; x *= 1.4) {
        CHECK(G.G(x) > prevG);
        double slope = G.g(x);
        CHECK(slope >= prevSlope - 1e-13);
        prevSlope = slope;
        prevG = G.G(x);
    }
    CHECK(G.G(1e6) / 1e6 > 10.0);
    CHECK(G.G_star(3.0) == doctest::Approx(G.G(9.0)));
    // x <= G(x) <= lambda2 * x on [0, ~1]: globally G(x) >= x
    for (double x : {0.2, 1.0, 7.0, 100.0}) CHECK(G.G(x) >= x - 1e-13);

    CHECK_THROWS(build_G(std::vector<std::pair<double, double>>{}, 24));
    CHECK_THROWS(build_G({{-1.0, 1.0}}, 24));
    CHECK_THROWS(build_G({{1.0, -1.0}}, 24));
    CHECK_THROWS(build_G({{1.0, 1.0}}, 1));
}

TEST_CASE("gaussian energies: construction is reported, not corrected") {
    InitialDatum d = InitialDatum::gaussian_iso(1.0);
    Ensemble e = d.draw_ensemble(20'000, 99);
    GFunction G = build_G(e);
    // invariants survive data where B stalls
    const auto& A = G.A();
    REQUIRE(A.size() >= 3);
    double last = 1.0;
    for (double a : A) {
        CHECK(a >= last - 1e-13);
        last = a;
    }
    CHECK(G.lambda2() >= A[0]);
    CHECK(G.lambda1() == doctest::Approx(2.0 * G.lambda2()));
    CHECK(std::isfinite(G.int_G_dgamma()));
    // heavier tails than the point mass stall B somewhere
    CHECK_FALSE(G.trace().bstar_strictly_increasing);
    GConstants c = constants(G, e.moments().m2);
    CHECK((1 << c.m) > G.lambda1() + 1.0);
    CHECK(std::isfinite(c.C));
    CHECK(c.C > 0.0);
}

TEST_CASE("uniform integrability and tail certificates") {
    InitialDatum d = InitialDatum::gaussian_iso(1.0);
    std::vector<std::pair<double, Ensemble>> traj;
    for (int k = 0; k < 3; ++k)
        traj.emplace_back(double(k), d.draw_ensemble(30'000, 7, k));
    GFunction G = build_G(traj[0].second);
    GConstants c = constants(G, traj[0].second.moments().m2);

    auto ui = check_uniform_integrability(traj, G, c.C);
    REQUIRE(ui.size() == 3);
    for (const auto& row : ui) {
        CHECK(row.bound == doctest::Approx(c.C));
        CHECK(row.value < row.bound);
        CHECK(row.pass);
    }

    auto tails = check_tail_bound(traj, G, c.C, {1.0, 2.0, 4.0});
    REQUIRE(tails.size() == 3);
    for (const auto& row : tails) {
        CHECK(row.bound == doctest::Approx(c.C / G.q(row.R)));
        CHECK(row.pass);
    }
    // tail energies decrease in R while the bound only tightens
    CHECK(tails[0].sup_tail >= tails[2].sup_tail);
}
