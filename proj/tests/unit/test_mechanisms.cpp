#include <doctest.h>

#include <cmath>

#include "cbci/error.hpp"
#include "cbci/mechanisms.hpp"

using namespace cbci;

TEST_CASE("branching mechanism") {
    const Quadruplet cir = make_quadruplet(1, 1, PositiveMeasure::zero());
    CHECK(branching_R(cir, 2.0) == doctest::Approx(-6.0).epsilon(1e-15));
    CHECK(branching_R(cir, 0.0) == 0.0);

    // R(lambda) = -lambda (lambda + kappa)^alpha for the stable-tail pair.
    const Quadruplet st = make_quadruplet(0, 1, PositiveMeasure::stable_tail_dual(0.5, 1.0));
    for (double lam : {0.1, 1.0, 3.0, 20.0}) {
        CHECK(branching_R(st, lam) == doctest::Approx(-lam * std::sqrt(lam + 1.0)).epsilon(1e-9));
    }
}

TEST_CASE("jump density of an atomic spectral measure") {
    const double c = 1.0 / 12.0, kap = 1.5;
    const Quadruplet q = make_quadruplet(0.5, 2.0 / 3.0, PositiveMeasure::atomic({{c, kap}}));
    CHECK(jump_density(q, 1e-14).n == doctest::Approx(3.0 / 16.0).epsilon(1e-12));
    for (double y : {0.2, 1.0, 4.0}) {
        const JumpDensity d = jump_density(q, y);
        CHECK(d.n == doctest::Approx(c * kap * kap * std::exp(-kap * y)).epsilon(1e-14));
        CHECK(d.n_tail == doctest::Approx(c * kap * std::exp(-kap * y)).epsilon(1e-14));
    }
    const JumpDensity none = jump_density(make_quadruplet(1, 1, PositiveMeasure::zero()), 0.3);
    CHECK(none.n == 0.0);
    CHECK(none.n_tail == 0.0);
}

TEST_CASE("stationary Laplace exponent") {
    const Quadruplet cir = make_quadruplet(1, 1, PositiveMeasure::zero());
    CHECK(phi(cir, 2.5) == doctest::Approx(std::log1p(2.5)).epsilon(1e-14));

    // Slope at infinity is 1 / (b + c) when a = 0.
    const Quadruplet q = make_quadruplet(0, 1, PositiveMeasure::atomic({{1, 2}}));
    const double big = 1e6;
    const double slope = (phi(q, 2 * big) - phi(q, big)) / big;
    CHECK(slope == doctest::Approx(0.5).epsilon(1e-5));

    // Numerical route agrees with the closed form of the stable-tail pair.
    const Quadruplet st = make_quadruplet(0, 1, PositiveMeasure::stable_tail_dual(0.5, 1.0));
    CHECK(phi(st, 3.0) == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("psi against explicit solutions") {
    const Quadruplet lin = make_quadruplet(0, 0.8, PositiveMeasure::zero());
    CHECK(psi(lin, 1.5, 2.0).psi == doctest::Approx(2.0 * std::exp(-0.8 * 1.5)).epsilon(1e-9));

    const Quadruplet cir = make_quadruplet(1, 1, PositiveMeasure::zero());
    const double e = std::exp(-1.0);
    CHECK(psi(cir, 1.0, 1.0).psi == doctest::Approx(e / (2.0 - e)).epsilon(1e-9));

    const Quadruplet q = make_quadruplet(0.3, 0.5, PositiveMeasure::atomic({{0.4, 1.0}, {0.2, 3.0}}));
    for (double lam : {0.5, 2.0, 8.0}) {
        double prev = lam;
        for (double t : {0.1, 0.5, 1.0, 2.0, 5.0}) {
            const PsiSolution s = psi(q, t, lam);
            CHECK(s.psi <= lam);
            CHECK(s.psi < prev);
            CHECK(s.residual < 1e-8);
            prev = s.psi;
        }
    }
}

TEST_CASE("transient Laplace transform") {
    const Quadruplet lin = make_quadruplet(0, 1, PositiveMeasure::zero());
    const double x = 1.7, lam = 0.9, t = 0.6;
    const double expect = std::exp(-x * lam * std::exp(-t) - lam * (1.0 - std::exp(-t)));
    CHECK(transient_laplace(lin, t, lam, x) == doctest::Approx(expect).epsilon(1e-9));

    const Quadruplet q = make_quadruplet(0.5, 2.0 / 3.0, PositiveMeasure::atomic({{1.0 / 12.0, 1.5}}));
    CHECK(transient_laplace(q, 0.0, lam, x) == doctest::Approx(std::exp(-lam * x)).epsilon(1e-15));
    CHECK(transient_laplace(q, 60.0, lam, 0.0) == doctest::Approx(stationary_laplace(q, lam)).epsilon(1e-8));
}

TEST_CASE("support infimum") {
    const Quadruplet diff = make_quadruplet(0.5, 1, PositiveMeasure::atomic({{1, 1}}));
    CHECK(support_infimum(diff, 1.0, 3.0).value == 0.0);

    const Quadruplet q = make_quadruplet(0, 0.5, PositiveMeasure::atomic({{0.5, 1.0}}));
    CHECK(support_infimum(q, kInf, 0.0).value == doctest::Approx(1.0));
    CHECK(support_infimum(q, 1e-12, 5.0).value == doctest::Approx(5.0).epsilon(1e-10));
    const double t = 0.7, x = 2.0;
    CHECK(support_infimum(q, t, x).value ==
          doctest::Approx(x * std::exp(-t) + (1.0 - std::exp(-t))).epsilon(1e-14));
}

TEST_CASE("ergodicity") {
    CHECK(is_ergodic(make_quadruplet(0, 0.1, PositiveMeasure::atomic({{1, 1}}))) == Decision::yes);
    CHECK(is_ergodic(make_quadruplet(1, 0, PositiveMeasure::atomic({{1, 1}}))) == Decision::no);
    CHECK(is_ergodic(make_quadruplet(0, 0, PositiveMeasure::stable_tail_dual(0.5, 0.0))) == Decision::yes);
}

TEST_CASE("Neumann series for the stationary Levy density") {
    // b = 1, M = eps_2 has stationary pair (1/2, 0.5 eps_1): Levy density 0.5 e^{-y} / y.
    const Quadruplet q = make_quadruplet(0, 1, PositiveMeasure::atomic({{1, 2}}));
    for (double y : {0.1, 1.0, 3.0}) {
        CHECK(levy_series_a0(q, y, 200) == doctest::Approx(0.5 * std::exp(-y) / y).epsilon(1e-10));
        // First summand: n_tail(y) / ((b + c)^2 y).
        CHECK(levy_series_a0(q, y, 1) == doctest::Approx(2.0 * std::exp(-2.0 * y) / (4.0 * y)).epsilon(1e-14));
    }
    double prev = 0.0;
    for (int N = 1; N <= 10; ++N) {
        const double v = levy_series_a0(q, 0.5, N);
        CHECK(v >= prev);
        prev = v;
    }
}

TEST_CASE("quadruplet validation") {
    CHECK_THROWS_AS(make_quadruplet(0, 0, PositiveMeasure::zero()), DomainError);
    CHECK_THROWS_AS(make_quadruplet(-1, 1, PositiveMeasure::zero()), DomainError);
    CHECK_THROWS_AS(make_quadruplet(1, 1, PositiveMeasure::zero(), 0.0), DomainError);
}
