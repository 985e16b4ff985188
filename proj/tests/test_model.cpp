#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <complex>
#include <random>

#include "doctest.h"
#include "levym/model.hpp"

using namespace levym;

namespace {
JumpSpec two_point(double z1, double p1, double z2, double p2, double lam) {
    JumpSpec j;
    j.law = JumpLaw::two_point;
    j.z1 = z1;
    j.p1 = p1;
    j.z2 = z2;
    j.p2 = p2;
    j.intensity = lam;
    return j;
}
}  // namespace

TEST_CASE("gamma_map pins the exponential bijection") {
    CHECK(gamma_map(0.0) == 0.0);
    CHECK(gamma_map(1.0) == doctest::Approx(0.6321205588285577).epsilon(1e-15));
    CHECK(gamma_map(-1.0) == doctest::Approx(-0.6321205588285577).epsilon(1e-15));
    // e^z - 1 below zero, 1 - e^{-z} above: both sides contract into (-1, 1).
    for (double z : {-8.0, -2.0, -0.3, 0.3, 2.0, 8.0}) {
        const double g = gamma_map(z);
        CHECK(std::abs(g) < 1.0);
        CHECK(g * z > 0.0);
        if (z < 0.0) CHECK(g == doctest::Approx(std::expm1(z)).epsilon(1e-15));
        if (z > 0.0) CHECK(g == doctest::Approx(-std::expm1(-z)).epsilon(1e-15));
    }
    // strictly increasing
    double prev = gamma_map(-5.0);
    for (double z = -4.5; z <= 5.0; z += 0.5) {
        const double g = gamma_map(z);
        CHECK(g > prev);
        prev = g;
    }
}

TEST_CASE("validate_model rejects bad parameters") {
    const JumpSpec none;
    CHECK_THROWS_AS(validate_model(0.0, 0.0, 1.0, none), SigmaNotPositive);
    CHECK_THROWS_AS(validate_model(0.0, -1.0, 1.0, none), SigmaNotPositive);
    CHECK_THROWS_AS(validate_model(0.0, 1.0, 0.0, none), BadLawParams);

    JumpSpec neg = two_point(1.0, 0.5, -1.0, 0.5, -2.0);
    CHECK_THROWS_AS(validate_model(0.0, 1.0, 1.0, neg), NegativeIntensity);

    JumpSpec zero_mass = two_point(0.0, 0.5, -1.0, 0.5, 1.0);
    CHECK_THROWS_AS(validate_model(0.0, 1.0, 1.0, zero_mass), MassAtZero);

    JumpSpec bad_p = two_point(1.0, 0.7, -1.0, 0.7, 1.0);
    CHECK_THROWS_AS(validate_model(0.0, 1.0, 1.0, bad_p), BadLawParams);

    JumpSpec lawless;
    lawless.intensity = 1.0;
    CHECK_THROWS_AS(validate_model(0.0, 1.0, 1.0, lawless), BadLawParams);

    JumpSpec bad_unif;
    bad_unif.law = JumpLaw::uniform;
    bad_unif.lo = 0.5;
    bad_unif.hi = 0.5;
    bad_unif.intensity = 1.0;
    CHECK_THROWS_AS(validate_model(0.0, 1.0, 1.0, bad_unif), BadLawParams);

    JumpSpec bad_gauss;
    bad_gauss.law = JumpLaw::gaussian;
    bad_gauss.sd = 0.0;
    bad_gauss.intensity = 1.0;
    CHECK_THROWS_AS(validate_model(0.0, 1.0, 1.0, bad_gauss), BadLawParams);
}

TEST_CASE("moments of the jump laws") {
    const LevyModel tp = validate_model(0.0, 1.5, 1.0, two_point(1.0, 0.5, -1.0, 0.5, 2.0));
    CHECK(tp.mean_jump() == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(tp.mean_jump_sq() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(tp.variance_rate() == doctest::Approx(4.25).epsilon(1e-15));

    JumpSpec g;
    g.law = JumpLaw::gaussian;
    g.mean = 0.3;
    g.sd = 0.7;
    g.intensity = 1.0;
    const LevyModel mg = validate_model(0.0, 1.0, 1.0, g);
    CHECK(mg.mean_jump() == doctest::Approx(0.3).epsilon(1e-14));
    CHECK(mg.mean_jump_sq() == doctest::Approx(0.3 * 0.3 + 0.49).epsilon(1e-14));

    JumpSpec u;
    u.law = JumpLaw::uniform;
    u.lo = -0.4;
    u.hi = 0.9;
    u.intensity = 1.0;
    const LevyModel mu = validate_model(0.0, 1.0, 1.0, u);
    CHECK(mu.mean_jump() == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(mu.mean_jump_sq() == doctest::Approx(0.20333333333333337).epsilon(1e-12));
}

TEST_CASE("nu integrals and mark nodes integrate the law exactly enough") {
    JumpSpec g;
    g.law = JumpLaw::gaussian;
    g.mean = 0.1;
    g.sd = 0.5;
    g.intensity = 3.0;
    const LevyModel m = validate_model(0.0, 1.0, 1.0, g);

    // polynomial moments are exact under Gauss quadrature
    CHECK(m.nu_integral([](double) { return 1.0; }) == doctest::Approx(3.0).epsilon(1e-13));
    CHECK(m.nu_integral([](double z) { return z; }) ==
          doctest::Approx(3.0 * m.mean_jump()).epsilon(1e-12));
    CHECK(m.nu_integral([](double z) { return z * z; }) ==
          doctest::Approx(3.0 * m.mean_jump_sq()).epsilon(1e-12));

    double wsum = 0.0;
    for (const MarkNode& q : m.mark_nodes()) wsum += q.w;
    CHECK(wsum == doctest::Approx(3.0).epsilon(1e-13));

    const LevyModel tp = validate_model(0.0, 1.0, 1.0, two_point(0.3, 0.25, -0.5, 0.75, 2.0));
    REQUIRE(tp.mark_nodes().size() == 2);
    double w2 = 0.0;
    for (const MarkNode& q : tp.mark_nodes()) w2 += q.w;
    CHECK(w2 == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(tp.nu_integral([](double z) { return z; }) ==
          doctest::Approx(2.0 * (0.3 * 0.25 - 0.5 * 0.75)).epsilon(1e-14));
}

TEST_CASE("jump quantiles and sampling agree with the law") {
    const LevyModel tp = validate_model(0.0, 1.0, 1.0, two_point(0.4, 0.25, -0.8, 0.75, 1.0));
    // quantiles walk the sorted support
    CHECK(tp.jump_quantile(0.10) == doctest::Approx(-0.8));
    CHECK(tp.jump_quantile(0.74) == doctest::Approx(-0.8));
    CHECK(tp.jump_quantile(0.76) == doctest::Approx(0.4));

    JumpSpec u;
    u.law = JumpLaw::uniform;
    u.lo = -1.0;
    u.hi = 3.0;
    u.intensity = 1.0;
    const LevyModel mu = validate_model(0.0, 1.0, 1.0, u);
    CHECK(mu.jump_quantile(0.5) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(mu.jump_quantile(0.25) == doctest::Approx(0.0).epsilon(1e-12));

    std::mt19937_64 rng(7);
    double s = 0.0, s2 = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double z = mu.sample_jump(rng);
        CHECK(z >= -1.0);
        CHECK(z <= 3.0);
        s += z;
        s2 += z * z;
    }
    CHECK(s / n == doctest::Approx(1.0).epsilon(0.02));
    CHECK(s2 / n == doctest::Approx(7.0 / 3.0).epsilon(0.02));
}

TEST_CASE("characteristic exponent splits into diffusion and jump parts") {
    const JumpSpec none;
    const LevyModel bm = validate_model(0.25, 1.3, 1.0, none);
    for (double y : {-2.0, -0.5, 0.7, 1.9}) {
        const std::complex<double> psi = bm.characteristic_exponent(y);
        CHECK(psi.real() == doctest::Approx(-0.5 * 1.3 * 1.3 * y * y).epsilon(1e-13));
        CHECK(psi.imag() == doctest::Approx(0.25 * y).epsilon(1e-13));
    }
    // symmetric two-point jumps add lambda(cos(yz) - 1), compensation kills
    // the imaginary jump part
    const LevyModel j = validate_model(0.0, 1.0, 1.0, two_point(1.0, 0.5, -1.0, 0.5, 1.0));
    const std::complex<double> psi1 = j.characteristic_exponent(1.0);
    CHECK(psi1.real() == doctest::Approx(-0.5 + (-0.45969769413186023)).epsilon(1e-12));
    CHECK(psi1.imag() == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("alpha removes the compensation of large jumps") {
    const LevyModel small = validate_model(0.5, 1.0, 1.0, two_point(0.5, 0.5, -0.5, 0.5, 2.0));
    CHECK(small.alpha() == doctest::Approx(0.5).epsilon(1e-13));  // no |z| >= 1 mass
    const LevyModel big = validate_model(0.5, 1.0, 1.0, two_point(1.5, 0.5, -0.5, 0.5, 2.0));
    CHECK(big.alpha() == doctest::Approx(0.5 - 2.0 * 0.75).epsilon(1e-13));
}
