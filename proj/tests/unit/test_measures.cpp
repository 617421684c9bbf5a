#include <doctest.h>

#include <cmath>
#include <numbers>

#include "cbci/error.hpp"
#include "cbci/measures.hpp"

using namespace cbci;

namespace {
const double pi = std::numbers::pi;
}

TEST_CASE("moments of atomic and stable-tail measures") {
    const auto two = PositiveMeasure::atomic({{1, 1}, {1, 2}});
    CHECK(moment(two, 0) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(moment(two, -1) == doctest::Approx(1.5).epsilon(1e-15));
    CHECK(moment(two, -2) == doctest::Approx(1.25).epsilon(1e-15));
    CHECK(moment(two, -3) == doctest::Approx(1.125).epsilon(1e-15));

    const auto st = PositiveMeasure::stable_tail(0.5, 1.0);
    CHECK(std::isinf(moment(st, 0)));
    // kappa^{-alpha} with kappa = 1.
    CHECK(moment(st, -1) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("Thorin condition") {
    CHECK(is_thorin(PositiveMeasure::window(0, 1)) == Decision::yes);
    CHECK(is_thorin(PositiveMeasure::atomic({{1, 1}})) == Decision::yes);

    // du / |log u| on (0, 1): the log-weighted integral diverges at 0.
    std::vector<double> u, d;
    const int n = 2000;
    for (int i = 0; i <= n; ++i) {
        const double x = static_cast<double>(i) / n;
        u.push_back(x);
        d.push_back(x == 0.0 ? 0.0 : 1.0 / std::abs(std::log(x)));
    }
    CHECK(is_thorin(PositiveMeasure::grid(u, d)) != Decision::yes);
}

TEST_CASE("Stieltjes transforms against closed forms") {
    const auto st = PositiveMeasure::stable_tail(0.5, 1.0);
    const Complex g = stieltjes(st, Complex(2.0, 1e-300));
    // -(1 - z)^{-1/2} at z = 2 on the principal branch from above.
    CHECK(std::abs(g) == doctest::Approx(1.0).epsilon(1e-8));

    const Complex w = stieltjes(PositiveMeasure::window(1, 2), 3.0);
    CHECK(w.real() == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(std::abs(w.imag()) < 1e-14);

    const auto two = PositiveMeasure::atomic({{1, 1}, {1, 2}});
    const Complex z(0.5, 1.5);
    const Complex expect = 1.0 / (z - 1.0) + 1.0 / (z - 2.0);
    CHECK(std::abs(stieltjes(two, z) - expect) < 1e-15);
}

TEST_CASE("Levy density") {
    const double gam = 2.5, lam = 1.5, y = 0.7;
    const ThorinPair p = make_thorin_pair(0, PositiveMeasure::atomic({{gam, lam}}));
    CHECK(levy_density(p, y) == doctest::Approx(gam * std::exp(-lam * y) / y).epsilon(1e-14));

    const ThorinPair s = make_thorin_pair(0, PositiveMeasure::stable_tail(0.5, 0.0));
    // phi(y) = y^{-1/2} / Gamma(1/2) for the kappa = 0 tail.
    CHECK(levy_density(s, y) == doctest::Approx(std::pow(y, -1.5) / std::sqrt(pi)).epsilon(1e-8));
}

TEST_CASE("Laplace exponent") {
    const double delta = 1.3, a = 0.7, b = 2.0, lam = 1.9;
    const ThorinPair g = make_thorin_pair(0, PositiveMeasure::atomic({{delta / a, b / a}}));
    CHECK(laplace_exponent(g, lam) == doctest::Approx(delta / a * std::log1p(a * lam / b)).epsilon(1e-10));

    const ThorinPair st = make_thorin_pair(0, PositiveMeasure::stable_tail(0.5, 1.0));
    // ((lam + kappa)^{1 - alpha} - kappa^{1 - alpha}) / (1 - alpha) at lam = 3.
    CHECK(laplace_exponent(st, 3.0) == doctest::Approx(2.0).epsilon(1e-8));

    const ThorinPair w = make_thorin_pair(0.25, PositiveMeasure::window(0, 1));
    CHECK(laplace_exponent_fast(w, 2.0) == doctest::Approx(laplace_exponent_levy(w, 2.0)).epsilon(1e-8));
}

TEST_CASE("free Poisson family") {
    const auto fp = PositiveMeasure::free_poisson(1, 1, 1);
    CHECK(moment(fp, 0) == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(fp.density(2.0) == doctest::Approx(1.0 / (2.0 * pi)).epsilon(1e-13));
    CHECK(moment(fp, 1) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("grid measures interpolate in log-log and keep atoms") {
    std::vector<double> u, d;
    for (int i = 0; i <= 10; ++i) {
        u.push_back(1.0 + i);
        d.push_back(std::pow(1.0 + i, -2.0));
    }
    const auto g = PositiveMeasure::grid(u, d, {{0.5, 20.0}});
    // A power law is reproduced exactly between nodes.
    CHECK(g.density(2.5) == doctest::Approx(std::pow(2.5, -2.0)).epsilon(1e-13));
    CHECK(g.support_sup() == doctest::Approx(20.0));
    CHECK(moment(g, 0) == doctest::Approx(1.0 - 1.0 / 11.0 + 0.5).epsilon(1e-8));
}

TEST_CASE("invalid input is rejected") {
    CHECK_THROWS_AS(PositiveMeasure::atomic({{-1, 1}}), DomainError);
    CHECK_THROWS_AS(PositiveMeasure::window(2, 1), DomainError);
    CHECK_THROWS_AS(make_thorin_pair(-0.1, PositiveMeasure::atomic({{1, 1}})), DomainError);
}
