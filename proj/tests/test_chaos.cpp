#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <complex>
#include <vector>

#include "doctest.h"
#include "levym/chaos.hpp"
#include "levym/simulate.hpp"

using namespace levym;

namespace {
LevyModel brownian() { return validate_model(0.0, 1.0, 1.0, JumpSpec{}); }

LevyModel sym_jumps(double z, double lam) {
    JumpSpec j;
    j.law = JumpLaw::two_point;
    j.z1 = z;
    j.p1 = 0.5;
    j.z2 = -z;
    j.p2 = 0.5;
    j.intensity = lam;
    return validate_model(0.0, 1.0, 1.0, j);
}

const auto one = [](double) { return 1.0; };
}  // namespace

TEST_CASE("multi-index enumeration") {
    CHECK(MultiIndex::all_of_order(1).size() == 2);
    CHECK(MultiIndex::all_of_order(2).size() == 4);
    CHECK(MultiIndex::all_of_order(3).size() == 8);
    const MultiIndex idx({1, 2, 1});
    CHECK(idx.order() == 3);
    CHECK(idx.brownian_slots() == 2);
    CHECK(idx.str() == "(1,2,1)");
}

TEST_CASE("single-slot iterated integrals telescope pathwise") {
    const LevyModel m = sym_jumps(1.0, 2.0);
    const TimeGrid g = TimeGrid::uniform(1.0, 32);
    for (std::uint64_t i = 0; i < 20; ++i) {
        const SamplePath p = simulate_path(m, g, 17, i);
        const double j1 = iterated_integral(p, unit_simplex_function(MultiIndex({1})), m);
        CHECK(j1 == doctest::Approx(p.w.back()).epsilon(1e-12));
        const double j2 = iterated_integral(p, unit_simplex_function(MultiIndex({2})), m);
        const double want = static_cast<double>(p.jumps.size()) - m.intensity() * 1.0;
        CHECK(j2 == doctest::Approx(want).epsilon(1e-11));
    }
}

TEST_CASE("double Brownian slot equals the discrete simplex sum") {
    const LevyModel m = brownian();
    const TimeGrid g = TimeGrid::uniform(1.0, 64);
    for (std::uint64_t i = 0; i < 10; ++i) {
        const SamplePath p = simulate_path(m, g, 29, i);
        const double j11 = iterated_integral(p, unit_simplex_function(MultiIndex({1, 1})), m);
        double dw2 = 0.0;
        for (std::size_t k = 1; k < p.w.size(); ++k) {
            const double dw = p.w[k] - p.w[k - 1];
            dw2 += dw * dw;
        }
        const double wT = p.w.back();
        CHECK(j11 == doctest::Approx(0.5 * (wT * wT - dw2)).epsilon(1e-11));
    }
}

TEST_CASE("simplex inner products have product closed forms") {
    const LevyModel m = sym_jumps(1.0, 2.0);
    const double lam = 2.0;
    auto unit = [](const MultiIndex& idx) { return unit_simplex_function(idx); };
    CHECK(simplex_inner_product(unit(MultiIndex({1})), unit(MultiIndex({1})), m) ==
          doctest::Approx(1.0).epsilon(1e-12));
    CHECK(simplex_inner_product(unit(MultiIndex({1, 1})), unit(MultiIndex({1, 1})), m) ==
          doctest::Approx(0.5).epsilon(1e-12));
    CHECK(simplex_inner_product(unit(MultiIndex({1, 1, 1})), unit(MultiIndex({1, 1, 1})), m) ==
          doctest::Approx(1.0 / 6.0).epsilon(1e-12));
    CHECK(simplex_inner_product(unit(MultiIndex({2})), unit(MultiIndex({2})), m) ==
          doctest::Approx(lam).epsilon(1e-12));
    CHECK(simplex_inner_product(unit(MultiIndex({1, 2})), unit(MultiIndex({1, 2})), m) ==
          doctest::Approx(lam / 2.0).epsilon(1e-12));
    CHECK(simplex_inner_product(unit(MultiIndex({2, 2})), unit(MultiIndex({2, 2})), m) ==
          doctest::Approx(lam * lam / 2.0).epsilon(1e-12));
    // different indices are orthogonal by fiat
    CHECK(simplex_inner_product(unit(MultiIndex({1})), unit(MultiIndex({2})), m) == 0.0);
    CHECK(simplex_inner_product(unit(MultiIndex({1, 2})), unit(MultiIndex({2, 1})), m) == 0.0);

    // non-unit time factor: (t, t) diagonal of a single Brownian slot
    const SimplexFunction ft = tensor_product([](double t) { return t; }, nullptr, MultiIndex({1}));
    CHECK(simplex_inner_product(ft, ft, m) == doctest::Approx(1.0 / 3.0).epsilon(1e-10));
}

TEST_CASE("Monte Carlo inner products agree with quadrature") {
    const LevyModel m = sym_jumps(1.0, 1.0);
    const TimeGrid g = TimeGrid::uniform(1.0, 128);
    const SimplexFunction f1 = unit_simplex_function(MultiIndex({1}));
    const SimplexFunction f2 = unit_simplex_function(MultiIndex({2}));
    const Estimate d = estimate_inner_product(m, g, f1, f1, 20000, 2024);
    CHECK(d.within(1.0, 3.5));
    const Estimate off = estimate_inner_product(m, g, f1, f2, 20000, 2025);
    CHECK(off.within(0.0, 3.5));
}

TEST_CASE("inner product matrix covers every pair up to order three") {
    const LevyModel m = sym_jumps(1.0, 1.0);
    const TimeGrid g = TimeGrid::uniform(1.0, 128);
    const InnerProductMatrix mat = inner_product_matrix(m, g, 3, 20000, 31337);
    REQUIRE(mat.n == 14);
    REQUIRE(mat.indices.size() == 14);
    double worst = 0.0;
    for (int a = 0; a < mat.n; ++a) {
        for (int b = 0; b < mat.n; ++b) {
            const Estimate& e = mat.at(a, b);
            CHECK(e.value == mat.at(b, a).value);
            CHECK(mat.oracle_at(a, b) == mat.oracle_at(b, a));
            if (a != b) CHECK(mat.oracle_at(a, b) == 0.0);
            if (a == b) CHECK(mat.oracle_at(a, b) > 0.0);
            worst = std::max(worst, e.deviation_in_se(mat.oracle_at(a, b)));
        }
    }
    CHECK(worst < 5.0);

    CHECK_THROWS_AS(inner_product_matrix(m, g, 4, 10, 1), Error);
}

TEST_CASE("per-order sums match the index expansion path by path") {
    // with one path the reported energy is the square of that path's B_n,
    // which must equal the sum over all order-n indices of the iterated
    // integrals of h (x) (e^g - 1)
    const LevyModel m = sym_jumps(0.8, 3.0);
    const TimeGrid g = TimeGrid::uniform(1.0, 8);
    const ExponentParams params = make_exponent_separable(one, one, m, true);
    auto u = [](double, double z) { return std::expm1(gamma_map(z)); };
    for (std::uint64_t pi = 0; pi < 25; ++pi) {
        const TruncationReport rep =
            chaos_truncation_cv(m, g, params, 3, 3, 1, 9000 + pi, /*hermite=*/false);
        const SamplePath p = simulate_path(m, g, 9000 + pi, 0);
        for (int n = 1; n <= 3; ++n) {
            double bn = 0.0;
            for (const MultiIndex& idx : MultiIndex::all_of_order(n))
                bn += iterated_integral(p, tensor_product(one, u, idx), m);
            const double energy = rep.orders[static_cast<std::size_t>(n) - 1].energy.value;
            CHECK(energy == doctest::Approx(bn * bn).epsilon(1e-9));
        }
    }
}

TEST_CASE("second-order cell factors are exact on a one-cell grid") {
    const LevyModel m = brownian();
    const TimeGrid g = TimeGrid::uniform(1.0, 1);
    const ExponentParams params = make_exponent(one, nullptr, m);
    for (std::uint64_t pi = 0; pi < 10; ++pi) {
        const TruncationReport rep = chaos_truncation_cv(m, g, params, 2, 4, 1, 777 + pi, true);
        const SamplePath p = simulate_path(m, g, 777 + pi, 0);
        const double wT = p.w.back();
        CHECK(rep.orders[0].energy.value == doctest::Approx(wT * wT).epsilon(1e-12));
        const double he2 = 0.5 * (wT * wT - 1.0);
        CHECK(rep.orders[1].energy.value == doctest::Approx(he2 * he2).epsilon(1e-12));
        // a single cell carries no factors beyond order two
        CHECK(rep.orders[2].energy.value == 0.0);
    }
}

TEST_CASE("corrected per-order energies and truncation match the closed forms") {
    const LevyModel m = sym_jumps(0.3, 4.0);
    const TimeGrid g = TimeGrid::uniform(1.0, 256);
    const ExponentParams params = make_exponent_separable(one, one, m, true);
    const TruncationReport rep = chaos_truncation_cv(m, g, params, 4, 10, 20000, 4242);
    CHECK(rep.s_total == doctest::Approx(params.s_total()).epsilon(1e-13));
    for (int n = 1; n <= 3; ++n) {
        const ChaosOrderRow& row = rep.orders[static_cast<std::size_t>(n) - 1];
        const double tol = std::max(3.5 * row.energy.se, 0.01 * row.analytic);
        CHECK(std::abs(row.energy.value - row.analytic) < tol);
    }
    CHECK(rep.mean_z.within(1.0, 4.0));
    const double dev = std::abs(rep.trunc_l2sq.value - rep.analytic_tail);
    CHECK(dev < std::max(3.5 * rep.trunc_l2sq.se, 0.02 * rep.analytic_tail));
    CHECK_THROWS_AS(chaos_truncation_cv(m, g, params, 5, 4, 10, 1), Error);
    CHECK_THROWS_AS(chaos_truncation_cv(m, g, params, 1, 13, 10, 1), Error);
}

TEST_CASE("chaos expansion report is internally consistent") {
    const LevyModel m = sym_jumps(1.0, 1.0);
    const TimeGrid g = TimeGrid::uniform(1.0, 64);
    const ExponentParams params = make_exponent_separable(one, one, m, true);
    const ChaosReport rep = chaos_expand_Z(m, g, params, 3, 5000, 606);
    REQUIRE(rep.orders.size() == 3);
    CHECK(rep.mean_z.within(1.0, 4.0));
    // order energies are the sums of their index energies
    for (int n = 1; n <= 3; ++n) {
        double s = 0.0;
        for (const ChaosIndexRow& r : rep.per_index)
            if (r.idx.order() == n) s += r.energy.value;
        CHECK(rep.orders[static_cast<std::size_t>(n) - 1].energy.value ==
              doctest::Approx(s).epsilon(1e-10));
    }
    CHECK(rep.trunc_l2sq.value > 0.0);
    CHECK_THROWS_AS(chaos_expand_Z(m, g, params, kMaxChaosOrder + 1, 10, 1), OrderTooLarge);
}

TEST_CASE("first-order Fourier coefficients for a Gaussian bump") {
    const double c = 0.2, w = 0.5;
    TerminalFunctional F;
    F.f = [=](double x) { return std::exp(-(x - c) * (x - c) / (2.0 * w * w)); };
    F.fprime = [=](double x) { return -(x - c) / (w * w) * F.f(x); };
    F.fhat = [=](double y) {
        return w * std::exp(-0.5 * w * w * y * y) *
               std::exp(std::complex<double>(0.0, -c * y));
    };

    const LevyModel bm = brownian();
    const FirstOrderCoeffs fc = first_order_coefficients(bm, F);
    CHECK(fc.n0 == doctest::Approx(0.4401151172316619).epsilon(1e-8));
    CHECK(fc.f1 == doctest::Approx(0.07041841875706592).epsilon(1e-7));
    CHECK(fc.y_max > 0.0);

    const LevyModel mj = sym_jumps(0.5, 1.0);
    const FirstOrderCoeffs fj = first_order_coefficients(mj, F);
    REQUIRE(static_cast<bool>(fj.f2));
    CHECK(fj.f2(0.0) == doctest::Approx(0.0).epsilon(1e-10));
    // order-zero term matches brute-force Monte Carlo
    const TimeGrid g = TimeGrid::uniform(1.0, 64);
    const int n = 40000;
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double v = F.f(simulate_path(mj, g, 11111, static_cast<std::uint64_t>(i)).x.back());
        s += v;
        s2 += v * v;
    }
    const double mean = s / n, se = std::sqrt((s2 / n - mean * mean) / n);
    CHECK(std::abs(mean - fj.n0) < 3.5 * se);
}
