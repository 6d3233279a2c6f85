#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "boltz/accum.hpp"
#include "boltz/collision.hpp"
#include "boltz/datum.hpp"
#include "boltz/spectral.hpp"
#include "doctest.h"

using namespace boltz;

TEST_CASE("monotone cubic interpolation") {
    Pchip p = Pchip::fit({0, 1, 2, 3, 4}, {0, 0.1, 0.5, 0.9, 1.0});
    for (int i = 0; i <= 4; ++i)
        CHECK(p(double(i)) == doctest::Approx(p.y[i]).epsilon(1e-15));
    // monotone data give a monotone interpolant
    double prev = -1.0;
    for (double t = 0.0; t <= 4.0; t += 1e-3) {
        double v = p(t);
        CHECK(v >= prev - 1e-13);
        prev = v;
    }
    // clamping outside the grid
    CHECK(p(-3.0) == doctest::Approx(0.0));
    CHECK(p(9.0) == doctest::Approx(1.0));
    // exact on straight lines
    Pchip lin = Pchip::fit({0, 0.5, 2, 3}, {1, 2, 5, 7});
    CHECK(lin(1.7) == doctest::Approx(1 + 2 * 1.7).epsilon(1e-13));
    CHECK_THROWS(Pchip::fit({0, 1}, {0, 1, 2}));
    CHECK_THROWS(Pchip::fit({1, 0}, {0, 1}));
}

TEST_CASE("radial grid construction") {
    auto gauss = [](double r) { return std::exp(-0.5 * r * r); };
    RadialCharFn f = init_radial(gauss, 8.0, 256);
    REQUIRE(f.r.size() == 257);
    CHECK(f.r.front() == 0.0);
    CHECK(f.rmax() == doctest::Approx(8.0));
    CHECK(f.phi.front() == doctest::Approx(1.0));
    CHECK(f(1.3) == doctest::Approx(gauss(1.3)).epsilon(1e-6));
    // characteristic functions start at 1
    CHECK_THROWS(init_radial([](double r) { return 0.9 - r; }, 8.0, 16));
    CHECK_THROWS(init_radial(gauss, 8.0, 1));
}

TEST_CASE("fourier-side collision operator: fixed points") {
    AngleSampler angles(Kernel::constant(1.0));
    // phi = 1 (a point mass at the origin) is stationary
    RadialCharFn one = init_radial([](double) { return 1.0; }, 4.0, 64);
    for (double v : bobylev_rhs(one, angles, 64))
        CHECK(std::abs(v) < 1e-14);
    // Maxwellians are stationary: phi(r) = e^{-r^2/2} has
    // phi(r s)·phi(r x) = phi(r) exactly on each angular node
    RadialCharFn maxw = init_radial(
        [](double r) { return std::exp(-0.5 * r * r); }, 4.0, 2048);
    auto rhs = bobylev_rhs(maxw, angles, 256);
    for (std::size_t i = 0; i < rhs.size(); ++i) CHECK(std::abs(rhs[i]) < 1e-8);
    // rhs vanishes at r = 0 for any state
    RadialCharFn g =
        init_radial([](double r) { return std::exp(-r * r / 3.0); }, 4.0, 128);
    CHECK(std::abs(bobylev_rhs(g, angles, 64).front()) < 1e-14);
}

TEST_CASE("evolution: Maxwellian invariance and moment conservation") {
    AngleSampler angles(Kernel::constant(1.0));
    RadialCharFn maxw = init_radial(
        [](double r) { return std::exp(-0.5 * r * r); }, 8.0, 1024);
    auto snaps = evolve(maxw, angles, {0.0, 1.0, 5.0});
    REQUIRE(snaps.size() == 3);
    CHECK(snaps[0].t == doctest::Approx(0.0));
    double drift = 0.0;
    for (std::size_t i = 0; i < maxw.r.size(); ++i)
        drift = std::max(drift,
                         std::abs(snaps[2].phi.phi[i] - maxw.phi[i]));
    CHECK(drift < 1e-6);
}

TEST_CASE("evolution matches the particle law for isotropic data") {
    // sphere datum: phi0(r) = sin(r)/r relaxes toward the Maxwellian with
    // m2 = 1; compare against wild-sum samples at t = 1
    AngleSampler angles(Kernel::constant(1.0));
    InitialDatum d = InitialDatum::sphere_uniform(1.0);
    RadialCharFn f0 =
        init_radial([&](double r) { return d.radial_char_fn(r); }, 8.0, 512);
    auto snaps = evolve(f0, angles, {1.0});
    auto draw = [&](Rng& r) { return d.sample(r); };
    Rng rng(31);
    const int n = 200'000;
    std::vector<double> radii = {0.5, 1.0, 2.0, 3.5};
    std::vector<MeanSe> acc(radii.size());
    for (int i = 0; i < n; ++i) {
        Vec3 v = sample_wild(draw, angles, 1.0, rng);
        for (std::size_t k = 0; k < radii.size(); ++k)
            acc[k].add(std::cos(radii[k] * v.z));  // E cos(r v_z) = phi(r)
    }
    for (std::size_t k = 0; k < radii.size(); ++k) {
        double mc = acc[k].mean(), se = acc[k].se();
        CHECK(std::abs(snaps[0].phi(radii[k]) - mc) < 4 * se + 5e-4);
    }
}

TEST_CASE("evolution guards reject corrupted states") {
    AngleSampler angles(Kernel::constant(1.0));
    RadialCharFn bad =
        init_radial([](double r) { return std::exp(-0.5 * r * r); }, 4.0, 64);
    for (double& v : bad.phi) v *= 1.5;  // breaks phi(0) = 1
    bad.rebuild();
    CHECK_THROWS(evolve(bad, angles, {1.0}));
    CHECK_THROWS(evolve(init_radial([](double r) { return std::exp(-r * r); },
                                    4.0, 64),
                        angles, {-1.0}));
}
