#include <doctest.h>

#include <cmath>

#include "cbci/correspondence.hpp"
#include "cbci/error.hpp"
#include "cbci/mechanisms.hpp"
#include "cbci/numeric.hpp"
#include "cbci/sector.hpp"

using namespace cbci;

namespace {

Quadruplet two_atom_quad() {
    return make_quadruplet(0.5, 2.0 / 3.0, PositiveMeasure::atomic({{1.0 / 12.0, 1.5}}));
}

// E(f_l, f_m) for the quadruplet paired with m = eps_1 + eps_2, written out by hand.
double two_atom_form(double l, double mu) {
    const double s = l + mu;
    const double Phi = std::log1p(s) + std::log1p(s / 2.0);
    const double dPhi = 1.0 / (1.0 + s) + 1.0 / (2.0 + s);
    const auto R0 = [](double u) { return 0.5 * u + 2.0 / 3.0 + u * (1.0 / 12.0) / (u + 1.5); };
    return dPhi * std::exp(-Phi) * l * (R0(s) - R0(l));
}

}  // namespace

TEST_CASE("bilinear form of the CIR process is symmetric") {
    const Quadruplet cir = make_quadruplet(1.3, 0.7, PositiveMeasure::zero(), 2.0);
    for (double l : {0.3, 1.0, 4.0}) {
        for (double mu : {0.2, 2.0}) CHECK(std::abs(bilinear_exp(cir, l, mu).antisymmetric) < 1e-15);
    }
    CHECK(reversibility_residual(cir, default_reversibility_grid()) <= 1e-12);
}

TEST_CASE("bilinear form against hand-written closed forms") {
    const Quadruplet q = two_atom_quad();
    for (double l : {0.5, 1.0, 3.0}) {
        for (double mu : {0.25, 2.0}) {
            CHECK(bilinear_exp(q, l, mu).full == doctest::Approx(two_atom_form(l, mu)).epsilon(1e-12));
        }
    }
    const BilinearValue v = bilinear_exp(q, 1.0, 2.0);
    CHECK(v.antisymmetric > 0.0);
    CHECK(v.antisymmetric == doctest::Approx(0.5 * (two_atom_form(1, 2) - two_atom_form(2, 1))).epsilon(1e-12));

    // Stable-tail pair: lambda (1 - ((lambda + k) / (lambda + mu + k))^alpha) e^{-Phi(lambda + mu)}.
    const Quadruplet st = make_quadruplet(0, 1, PositiveMeasure::stable_tail_dual(0.5, 1.0));
    for (double l : {0.5, 2.0}) {
        for (double mu : {0.3, 1.5}) {
            const double Phi = 2.0 * (std::sqrt(l + mu + 1.0) - 1.0);
            const double expect = l * (1.0 - std::sqrt((l + 1.0) / (l + mu + 1.0))) * std::exp(-Phi);
            CHECK(bilinear_exp(st, l, mu).full == doctest::Approx(expect).epsilon(1e-8));
        }
    }
    CHECK(bilinear_exp(st, 1.0, 2.0).antisymmetric > 0.0);
}

TEST_CASE("integration by parts formula") {
    // Jump part through the integrated Levy tail n(dy) = dy int u^2 e^{-uy} M(du), by quadrature in y.
    const Quadruplet q = two_atom_quad();
    const double u = 1.5, w = 1.0 / 12.0;
    for (double l : {0.5, 2.0}) {
        for (double mu : {0.25, 3.0}) {
            const double tail = numeric::integrate_or_throw(
                [&](double y) { return w * u * std::exp(-u * y) * (std::exp(-l * y) - std::exp(-(l + mu) * y)); },
                0.0, kInf, false);
            const double s = l + mu;
            const double expect = phi_prime(q, s) * std::exp(-phi(q, s)) * (q.a * l * mu + l * tail);
            CHECK(bilinear_exp(q, l, mu).full == doctest::Approx(expect).epsilon(1e-11));
        }
    }
}

TEST_CASE("empirical sector estimate") {
    const Quadruplet q = two_atom_quad();
    const double s = empirical_sector(q, default_sector_grid());
    CHECK(s > 1.0);
    CHECK(s <= 1.0 + std::sqrt(2.0 / 3.0));
    // Enlarging the span can only increase the estimate.
    CHECK(empirical_sector(q, {0.25, 0.5, 1, 2, 4, 8}) >= s - 1e-12);

    const Quadruplet cir = make_quadruplet(1, 1, PositiveMeasure::zero());
    CHECK(empirical_sector(cir, default_sector_grid()) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("upper bounds") {
    const auto m = PositiveMeasure::atomic({{1, 1}, {1, 2}});
    const ThorinUpper u = upper_bound_thorin(make_thorin_pair(0, m), PositiveMeasure::atomic({{1.0 / 12.0, 1.5}}));
    CHECK(u.first == doctest::Approx(1.0 + std::sqrt(2.0 / 3.0)).epsilon(1e-14));
    CHECK(u.second == doctest::Approx(2.0).epsilon(1e-14));

    const QuadUpper qu = upper_bound_quad(0.5, 2.0 / 3.0, PositiveMeasure::atomic({{1.0 / 12.0, 1.5}}), m);
    CHECK(qu.closed == doctest::Approx(1.0 + std::sqrt(2.0 / 3.0)).epsilon(1e-13));

    // Window(1, 2): Sect - 1 <= sqrt((l2 - l1) / l1) = 1.
    const auto w = PositiveMeasure::window(1, 2);
    const ForwardResult f = forward(make_thorin_pair(0, w));
    CHECK(upper_bound_thorin(make_thorin_pair(0, w), f.M).first <= 2.0 + 1e-9);

    const QuadUpper cir = upper_bound_quad(1, 1, PositiveMeasure::zero());
    CHECK(cir.closed == doctest::Approx(1.0));
}

TEST_CASE("lower bound from moments") {
    const auto m = PositiveMeasure::atomic({{1, 1}, {1, 2}});
    const double m1 = 1.5, m2 = 1.25, m3 = 1.125, m4 = 17.0 / 16.0;
    const double den = 2 * m1 * m2 * m2 * m3 + 4 * m1 * m1 * m2 * m2 * m2 + 12 * m1 * m1 * m2 * m4 -
                       9 * m1 * m1 * m3 * m3 - m2 * m2 * m2 * m2;
    const double expect = std::sqrt(1.0 + (1.0 / 64.0) / den);
    CHECK(lower_bound_moments(m) == doctest::Approx(expect).epsilon(1e-14));

    // Second route: the two-function bound on f = x, g = x^2.
    const PolyForms pf = polynomial_forms(0.5, PositiveMeasure::atomic({{1.0 / 12.0, 1.5}}), m);
    CHECK(lower_bound_general(pf.e_ff, pf.e_gg, pf.e_fg, pf.e_gf) == doctest::Approx(expect).epsilon(1e-12));

    CHECK(lower_bound_moments(PositiveMeasure::atomic({{3, 2}})) == 1.0);

    // Scale-free in locations; scaling the weights changes the process and the bound.
    const auto scaled = PositiveMeasure::atomic({{2.5, 1}, {2.5, 2}});
    const ForwardResult fs = forward(make_thorin_pair(0, scaled));
    const PolyForms ps = polynomial_forms(fs.a, fs.M, scaled);
    CHECK(lower_bound_moments(scaled) ==
          doctest::Approx(lower_bound_general(ps.e_ff, ps.e_gg, ps.e_fg, ps.e_gf)).epsilon(1e-12));
    CHECK(lower_bound_moments(scaled) != doctest::Approx(expect).epsilon(1e-6));
    const auto moved = PositiveMeasure::atomic({{1, 3}, {1, 6}});
    CHECK(lower_bound_moments(moved) == doctest::Approx(expect).epsilon(1e-13));
}

TEST_CASE("two-function lower bound cases") {
    CHECK(lower_bound_general(1, 1, 0.5, 0.5) == 1.0);
    // Delta = 0 with E(f,f)E(g,g) != E(f,g) E~(f,g).
    CHECK(std::isinf(lower_bound_general(1, 1, 2, 0)));
    // Generic case: sqrt(1 + anti^2 / Delta).
    const double v = lower_bound_general(2, 3, 1.5, 0.5);
    CHECK(v == doctest::Approx(std::sqrt(1.0 + 0.25 / (6.0 - 1.0))).epsilon(1e-14));
}

TEST_CASE("GGC moments") {
    const GGCMoments g = ggc_moments(PositiveMeasure::atomic({{2, 1}}));
    CHECK(g.x1 == doctest::Approx(2.0));
    CHECK(g.x2 == doctest::Approx(6.0));
    CHECK(g.x3 == doctest::Approx(24.0));
    CHECK(ggc_moments(PositiveMeasure::atomic({{1, 1}, {1, 2}})).x1 == doctest::Approx(1.5));
}

TEST_CASE("sector report") {
    const auto m = PositiveMeasure::atomic({{1, 1}, {1, 2}});
    const SectorReport r = sector_report(two_atom_quad(), make_thorin_pair(0, m));
    CHECK(r.sandwich_ok());
    CHECK(r.max_lower() <= r.empirical);
    CHECK(r.empirical <= r.min_upper());
    CHECK(r.lower_moments == doctest::Approx(r.lower_general).epsilon(1e-10));

    const SectorReport c = sector_report(make_quadruplet(1, 1, PositiveMeasure::zero()),
                                         make_thorin_pair(0, PositiveMeasure::atomic({{1, 1}})));
    CHECK(c.min_upper() == doctest::Approx(1.0));
    CHECK(c.empirical == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("non-ergodic input is rejected") {
    CHECK_THROWS_AS(bilinear_exp(make_quadruplet(1, 0, PositiveMeasure::atomic({{1, 1}})), 1, 1), DomainError);
}
