#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cbci/correspondence.hpp"
#include "cbci/error.hpp"
#include "cbci/mechanisms.hpp"

using namespace cbci;

namespace {
const double pi = std::numbers::pi;
}

TEST_CASE("two-atom forward map") {
    const auto m = PositiveMeasure::atomic({{1, 1}, {1, 2}});
    const ForwardResult f = forward(make_thorin_pair(0, m));
    CHECK(f.a == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(f.b == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    REQUIRE(f.M.atoms().size() == 1);
    CHECK(f.M.atoms()[0].location == doctest::Approx(1.5).epsilon(1e-14));
    CHECK(f.M.atoms()[0].weight == doctest::Approx(1.0 / 12.0).epsilon(1e-14));
    CHECK(f.report.identity_residual < 1e-12);
}

TEST_CASE("degenerate m gives the CIR quadruplet") {
    const double g = 2.5, l = 1.5;
    const ForwardResult f = forward(make_thorin_pair(0, PositiveMeasure::atomic({{g, l}})));
    CHECK(f.a == doctest::Approx(1.0 / g));
    CHECK(f.b == doctest::Approx(l / g));
    CHECK(f.M.is_zero());
    CHECK(f.report.method == Method::closed_form);
}

TEST_CASE("stable tail forward is closed form") {
    const ForwardResult f = forward(make_thorin_pair(0, PositiveMeasure::stable_tail(0.5, 1.0)));
    CHECK(f.a == 0.0);
    CHECK(f.b == doctest::Approx(1.0).epsilon(1e-10));
    for (double x : {1.5, 2.0, 10.0}) CHECK(f.M.density(x) == doctest::Approx(std::sqrt(x - 1.0) / (x * pi)).epsilon(1e-12));
    CHECK(f.report.identity_residual < 1e-8);
}

TEST_CASE("backward map examples") {
    const BackwardResult r = backward(0, 1, PositiveMeasure::atomic({{1, 2}}));
    CHECK(r.pair.q == doctest::Approx(0.5).epsilon(1e-15));
    REQUIRE(r.pair.m.atoms().size() == 1);
    CHECK(r.pair.m.atoms()[0].weight == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(r.pair.m.atoms()[0].location == doctest::Approx(1.0).epsilon(1e-14));

    const BackwardResult t = backward(0.5, 2.0 / 3.0, PositiveMeasure::atomic({{1.0 / 12.0, 1.5}}));
    CHECK(t.pair.q == 0.0);
    REQUIRE(t.pair.m.atoms().size() == 2);
    CHECK(t.pair.m.atoms()[0].location == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(t.pair.m.atoms()[1].location == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(identity_residual(t.pair, 0.5, 2.0 / 3.0, PositiveMeasure::atomic({{1.0 / 12.0, 1.5}})) < 1e-12);
}

TEST_CASE("window spectral measure: density and pole") {
    const double a = 2.0, b = 1.0;
    const BackwardResult r = backward(a, b, PositiveMeasure::window(0, 1));
    CHECK(r.report.method == Method::inversion);
    const auto* g = std::get_if<family::Grid>(&r.pair.m.variant());
    REQUIRE(g != nullptr);
    REQUIRE(g->atoms.size() == 1);
    const double x0 = g->atoms[0].location;
    CHECK(b / a < x0);
    CHECK(x0 < 1.0 + (b + 1.0) / a);
    CHECK(std::abs(a * x0 - b + x0 * std::log1p(-1.0 / x0)) < 1e-10);
    CHECK(g->atoms[0].weight == doctest::Approx(1.0 / (b / x0 + 1.0 / (x0 - 1.0))).epsilon(1e-8));
    for (double x : {0.2, 0.4, 0.6, 0.8}) {
        const double l = a - b / x - std::log(x / (1.0 - x));
        CHECK(r.pair.m.density(x) == doctest::Approx(1.0 / (x * (l * l + pi * pi))).epsilon(1e-5));
    }
}

TEST_CASE("window Thorin measure: forward density") {
    const double l1 = 1.0, l2 = 2.0;
    const ForwardResult f = forward(make_thorin_pair(0, PositiveMeasure::window(l1, l2)));
    // The log term vanishes at the midpoint.
    const double x = 0.5 * (l1 + l2);
    CHECK(f.M.density(x) == doctest::Approx(1.0 / (x * pi * pi)).epsilon(1e-5));
    CHECK(f.report.identity_residual < 1e-4);
}

TEST_CASE("moments of M from moments of m") {
    const MMoments mm = m_moments_of_M(PositiveMeasure::atomic({{1, 1}, {1, 2}}));
    CHECK(mm.M0 == doctest::Approx(1.0 / 12.0).epsilon(1e-14));
    const double m1 = 1.5, m2 = 1.25, m3 = 1.125;
    CHECK(mm.Mm2 == doctest::Approx((m1 * m3 - m2 * m2) / (m1 * m1 * m1)).epsilon(1e-14));
    // Same value from the single atom (1/12) at 3/2.
    CHECK(mm.Mm2 == doctest::Approx((1.0 / 12.0) / (1.5 * 1.5)).epsilon(1e-14));
    CHECK(mm.Mm1 == doctest::Approx((1.0 / 12.0) / 1.5).epsilon(1e-14));
}

TEST_CASE("support bracket") {
    const SupportBracket s = support_bracket(0, 0, PositiveMeasure::atomic({{1, 1}, {1, 2}}));
    CHECK(s.case_id == 4);
    CHECK(s.lower == doctest::Approx(1.0));
    CHECK(s.upper == doctest::Approx(2.0));

    const SupportBracket st = support_bracket(0, 0, PositiveMeasure::stable_tail(0.5, 1.0));
    CHECK(st.lower == doctest::Approx(1.0));

    const double q = 0.4;
    const auto m = PositiveMeasure::window(0.5, 1.5);
    const SupportBracket sq = support_bracket(q, 0, m);
    CHECK(sq.s_plus <= 1.5 + 1.0 / q + 1e-12);
}

TEST_CASE("Stieltjes-Perron inversion of closed-form transforms") {
    // G_M for the window Thorin measure on (1, 2).
    const double l1 = 1.0, l2 = 2.0;
    const auto m = PositiveMeasure::window(l1, l2);
    const double a = 1.0 / (l2 - l1);
    const double b = 1.0 / std::log(l2 / l1);
    auto GM = [&](Complex z) { return a - b / z - 1.0 / (z * stieltjes(m, z)); };
    const std::vector<double> x{1.5};
    const InversionResult r = stieltjes_invert(GM, x, y_sequence());
    CHECK(r.density[0] == doctest::Approx(1.0 / (1.5 * pi * pi)).epsilon(1e-6));

    // G_m(z) = -(1 - z)^{-1/2}: m density (x - 1)^{-1/2} / pi, 1/pi at x = 2.
    auto Gm = [](Complex z) { return -1.0 / std::sqrt(1.0 - z); };
    const std::vector<double> x2{2.0};
    const InversionResult s = stieltjes_invert(Gm, x2, y_sequence());
    CHECK(s.density[0] == doctest::Approx(1.0 / pi).epsilon(1e-6));
}

TEST_CASE("interlacing for random atomic inputs") {
    const auto m = PositiveMeasure::atomic({{0.3, 0.5}, {1.2, 1.1}, {0.7, 4.0}, {2.0, 9.0}});
    const ForwardResult f = forward(make_thorin_pair(0, m));
    const auto lam = m.atoms();
    const auto kap = f.M.atoms();
    REQUIRE(kap.size() == 3);
    for (std::size_t i = 0; i < kap.size(); ++i) {
        CHECK(lam[i].location < kap[i].location);
        CHECK(kap[i].location < lam[i + 1].location);
    }
    const double q = 0.8;
    const ForwardResult g = forward(make_thorin_pair(q, m));
    REQUIRE(g.M.atoms().size() == 4);
    CHECK(g.a == 0.0);
    CHECK(g.M.atoms().back().location <= 9.0 + moment(m, 0) / q);
}

TEST_CASE("errors") {
    CHECK_THROWS_AS(forward(ThorinPair{0, PositiveMeasure::zero()}), DomainError);
    CHECK_THROWS_AS(backward(1, 0, PositiveMeasure::atomic({{1, 1}})), DomainError);
}
