#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "cbci/correspondence.hpp"
#include "cbci/error.hpp"
#include "cbci/simulate.hpp"

using namespace cbci;

TEST_CASE("stationary sampler") {
    const auto m = PositiveMeasure::atomic({{1, 1}, {1, 2}});
    const auto s = sample_stationary({make_thorin_pair(0, m), 1.0}, 40000, 11);
    const MeanEstimate e = sample_mean(s);
    CHECK(std::abs(e.mean - 1.5) < 4.0 * e.stderr_);

    const auto shifted = sample_stationary({make_thorin_pair(0.5, PositiveMeasure::atomic({{0.5, 1}})), 2.0}, 5000, 3);
    CHECK(*std::min_element(shifted.begin(), shifted.end()) >= 1.0);

    CHECK(sample_stationary({make_thorin_pair(0, m), 1.0}, 100, 5) ==
          sample_stationary({make_thorin_pair(0, m), 1.0}, 100, 5));
}

TEST_CASE("simulation is deterministic and thread-count independent") {
    const Quadruplet q = make_quadruplet(0.5, 2.0 / 3.0, PositiveMeasure::atomic({{1.0 / 12.0, 1.5}}));
    SimConfig cfg;
    cfg.T = 0.2;
    cfg.dt = 1e-3;
    cfg.paths = 37;
    cfg.seed = 99;
    cfg.threads = 1;
    const SimEnsemble a = simulate_path(q, 1.0, cfg);
    cfg.threads = 3;
    const SimEnsemble b = simulate_path(q, 1.0, cfg);
    CHECK(a.terminals == b.terminals);
    CHECK(a.jump_counts == b.jump_counts);
    cfg.seed = 100;
    CHECK(simulate_path(q, 1.0, cfg).terminals != a.terminals);
}

TEST_CASE("CIR terminal Laplace transform") {
    const Quadruplet cir = make_quadruplet(1, 1, PositiveMeasure::zero());
    SimConfig cfg;
    cfg.T = 8.0;
    cfg.dt = 2e-3;
    cfg.paths = 20000;
    cfg.seed = 4;
    const SimEnsemble e = simulate_path(cir, 1.0, cfg);
    const LaplaceEstimate l = empirical_laplace(e.terminals, {1.0});
    // exp(-log 2) = 1/2.
    CHECK(std::abs(l.value[0] - 0.5) < 3.0 * l.stderr_[0] + 1e-3);
}

TEST_CASE("transient check and GGC mean") {
    const auto m = PositiveMeasure::atomic({{1, 1}, {1, 2}});
    const ForwardResult f = forward(make_thorin_pair(0, m));
    const Quadruplet q = make_quadruplet(f.a, f.b, f.M, 1.0);
    SimConfig cfg;
    cfg.T = 0.5;
    cfg.dt = 1e-3;
    cfg.paths = 10000;
    cfg.seed = 8;
    const TransientReport r = verify_transient(q, simulate_path(q, 1.0, cfg), {0.3, 1.0, 3.0});
    CHECK(r.pass);

    cfg.T = 6.0;
    cfg.paths = 8000;
    const MeanEstimate mean = sample_mean(simulate_path(q, 1.5, cfg).terminals);
    CHECK(std::abs(mean.mean - 1.5) < 4.0 * mean.stderr_);
}

TEST_CASE("support floor") {
    const Quadruplet q = make_quadruplet(0, 0.5, PositiveMeasure::atomic({{0.5, 1.0}}));
    SimConfig cfg;
    cfg.T = 1.0;
    cfg.dt = 1e-3;
    cfg.paths = 2000;
    cfg.seed = 21;
    const SimEnsemble e = simulate_path(q, 2.0, cfg);
    const double floor = support_infimum(q, 1.0, 2.0).value - 2.0 * cfg.dt * 1.0 * 2.0;
    CHECK(*std::min_element(e.terminals.begin(), e.terminals.end()) >= floor);
}

TEST_CASE("discretization keeps mass and first moment") {
    const auto w = PositiveMeasure::window(1, 2);
    const Discretized d = discretize(w, 32);
    CHECK(d.measure.atoms().size() <= 32);
    CHECK(moment(d.measure, 0) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(moment(d.measure, 1) == doctest::Approx(1.5).epsilon(1e-10));
    CHECK(d.bias < 1e-3);
    CHECK_THROWS_AS(discretize(PositiveMeasure::stable_tail_dual(0.5, 1.0)), DomainError);
}

TEST_CASE("input validation") {
    const Quadruplet cir = make_quadruplet(1, 1, PositiveMeasure::zero());
    SimConfig cfg;
    cfg.dt = 0.0;
    CHECK_THROWS_AS(simulate_path(cir, 1.0, cfg), DomainError);
    cfg.dt = 1e-3;
    CHECK_THROWS_AS(simulate_path(cir, -1.0, cfg), DomainError);
    CHECK_THROWS_AS(sample_mean({}), DomainError);
}
