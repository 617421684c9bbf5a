#include <doctest.h>

#include <cmath>
#include <numbers>

#include "cbci/boolean.hpp"
#include "cbci/error.hpp"

using namespace cbci;

namespace {
const double pi = std::numbers::pi;
}

TEST_CASE("K transform of a point mass is constant") {
    const auto e = PositiveMeasure::atomic({{1, 2.5}});
    for (const Complex& z : boolean_test_points()) CHECK(std::abs(boolean_cumulant(e, z) - 2.5) < 1e-13);
    CHECK(boolean_test_points().size() == 20);
}

TEST_CASE("Boolean convolution") {
    const PositiveMeasure s = boolean_convolve(PositiveMeasure::atomic({{1, 1}}), PositiveMeasure::atomic({{1, 2}}));
    REQUIRE(s.atoms().size() == 1);
    CHECK(std::abs(s.atoms()[0].location - 3.0) < 1e-12);
    CHECK(std::abs(s.atoms()[0].weight - 1.0) < 1e-12);

    const auto m = PositiveMeasure::atomic({{0.5, 1}, {0.5, 3}});
    const PositiveMeasure mm = boolean_convolve(m, m);
    CHECK(k_additivity_residual(m, m, mm) < 1e-10);
    CHECK(is_thorin(mm) == Decision::yes);
    CHECK(moment(mm, 0) == doctest::Approx(1.0).epsilon(1e-12));

    // Independent check at z = 2i: K = z - 1/G summed by hand.
    const Complex z(0, 2);
    const Complex Gm = 0.5 / (z - 1.0) + 0.5 / (z - 3.0);
    const Complex K = z - 1.0 / Gm;
    CHECK(std::abs(boolean_cumulant(mm, z) - 2.0 * K) < 1e-12);
}

TEST_CASE("Boolean powers") {
    const PositiveMeasure e = boolean_power(PositiveMeasure::atomic({{1, 2}}), 1.5);
    REQUIRE(e.atoms().size() == 1);
    CHECK(e.atoms()[0].location == doctest::Approx(3.0).epsilon(1e-13));

    const auto m = PositiveMeasure::atomic({{0.3, 0.5}, {0.7, 2.0}});
    const PositiveMeasure p = boolean_power(m, 2.5);
    CHECK(k_homogeneity_residual(m, 2.5, p) < 1e-10);

    const PositiveMeasure two = boolean_power(m, 2.0);
    const PositiveMeasure mm = boolean_convolve(m, m);
    REQUIRE(two.atoms().size() == mm.atoms().size());
    for (std::size_t i = 0; i < mm.atoms().size(); ++i) {
        CHECK(two.atoms()[i].location == doctest::Approx(mm.atoms()[i].location).epsilon(1e-12));
        CHECK(two.atoms()[i].weight == doctest::Approx(mm.atoms()[i].weight).epsilon(1e-12));
    }
}

TEST_CASE("normalization is enforced") {
    CHECK_THROWS_AS(boolean_convolve(PositiveMeasure::atomic({{2, 1}}), PositiveMeasure::atomic({{1, 2}})), DomainError);
    CHECK_THROWS_AS(boolean_power(PositiveMeasure::window(0, 1), 2.0), DomainError);
}

TEST_CASE("free Poisson density") {
    CHECK(free_poisson_density({1, 1}, 2.0) == doctest::Approx(1.0 / (2.0 * pi)).epsilon(1e-15));
    for (double beta : {1.0, 1.5, 3.0}) {
        const auto fp = PositiveMeasure::free_poisson(1, 1, beta);
        CHECK(moment(fp, 0) == doctest::Approx(1.0).epsilon(1e-8));
    }
}

TEST_CASE("fixed points of the correspondence") {
    const FixedPoint mp = fixed_point_measure(0, 1, 0);
    CHECK(mp.branch == 1);
    CHECK(mp.params.alpha == doctest::Approx(1.0));
    CHECK(mp.params.beta == doctest::Approx(1.0));
    for (double u : {0.5, 1.0, 3.0}) {
        CHECK(mp.pair.m.density(u) == doctest::Approx(std::sqrt(u * (4.0 - u)) / (2.0 * pi * u)).epsilon(1e-12));
    }
    CHECK(fixed_point_residual(mp, 1, 0) < 1e-8);

    const FixedPoint inf2 = fixed_point_measure(0, 0, 2);
    CHECK(inf2.branch == 2);
    for (double u : {1.5, 4.0, 20.0}) {
        CHECK(inf2.pair.m.density(u) == doctest::Approx(std::sqrt(u - 1.0) / (pi * u)).epsilon(1e-12));
    }
    CHECK(fixed_point_residual(inf2, 0, 2) < 1e-8);

    // b = 0 in the second case is the alpha = 1/2, kappa = 0 stable tail.
    const FixedPoint zero = fixed_point_measure(0, 0, 0);
    const auto st = PositiveMeasure::stable_tail(0.5, 0.0);
    for (double u : {0.3, 2.0}) CHECK(zero.pair.m.density(u) == doctest::Approx(st.density(u)).epsilon(1e-12));

    for (auto [q, a, b] : {std::array<double, 3>{0.4, 0, 1}, {0, 2, 0.5}, {0, 0.5, 3}}) {
        const FixedPoint fp = fixed_point_measure(q, a, b);
        CHECK(fixed_point_residual(fp, a, b) < 1e-8);
    }
    CHECK_THROWS_AS(fixed_point_measure(0.3, 0.5, 1), DomainError);
}

TEST_CASE("the two fixed-point cases join continuously") {
    const double b = 2.0;
    const FixedPoint lim = fixed_point_measure(0, 0, b);
    for (double u : {1.5, 3.0, 6.0}) {
        const double target = lim.pair.m.density(u);
        const double via_a = fixed_point_measure(0, 1e-7, b).pair.m.density(u);
        const double via_q = fixed_point_measure(1e-7, 0, b).pair.m.density(u);
        CHECK(via_a == doctest::Approx(target).epsilon(1e-5));
        CHECK(via_q == doctest::Approx(target).epsilon(1e-5));
    }
}
