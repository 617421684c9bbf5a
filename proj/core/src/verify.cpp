#include "cbci/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <sstream>

#include <boost/random/uniform_int_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>

#include "cbci/boolean.hpp"
#include "cbci/correspondence.hpp"
#include "cbci/error.hpp"
#include "cbci/sector.hpp"
#include "cbci/simulate.hpp"

namespace cbci::verify {

namespace {

using Rng = std::mt19937_64;
using Clock = std::chrono::steady_clock;

double uniform(Rng& rng, double lo, double hi) {
    return boost::random::uniform_real_distribution<double>(lo, hi)(rng);
}

double log_uniform(Rng& rng, double lo, double hi) {
    return std::exp(uniform(rng, std::log(lo), std::log(hi)));
}

int uniform_int(Rng& rng, int lo, int hi) { return boost::random::uniform_int_distribution<int>(lo, hi)(rng); }

// Sorted atoms with locations at least 1e-2 apart in log scale.
std::vector<Atom> random_atoms(Rng& rng, int n, double lo = 0.1, double hi = 10.0) {
    std::vector<double> loc;
    while (static_cast<int>(loc.size()) < n) {
        const double x = log_uniform(rng, lo, hi);
        const bool close = std::any_of(loc.begin(), loc.end(),
                                       [&](double y) { return std::abs(std::log(x / y)) < 1e-2; });
        if (!close) loc.push_back(x);
    }
    std::sort(loc.begin(), loc.end());
    std::vector<Atom> out;
    for (double x : loc) out.push_back({log_uniform(rng, lo, hi), x});
    return out;
}

std::vector<Atom> sorted(std::span<const Atom> a) {
    std::vector<Atom> v(a.begin(), a.end());
    std::sort(v.begin(), v.end(), [](const Atom& x, const Atom& y) { return x.location < y.location; });
    return v;
}

double atom_distance(std::span<const Atom> x, std::span<const Atom> y) {
    if (x.size() != y.size()) return kInf;
    const auto a = sorted(x), b = sorted(y);
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        worst = std::max(worst, std::abs(a[i].weight - b[i].weight) / std::max(1.0, std::abs(a[i].weight)));
        worst = std::max(worst, std::abs(a[i].location - b[i].location) / std::max(1.0, std::abs(a[i].location)));
    }
    return worst;
}

// lam_1 < kap_1 < lam_2 < ... with kap the atoms of M. For q > 0 the last kappa
// lies beyond the last lambda but not past lam_l + m0 / q.
bool interlaces(std::span<const Atom> m, std::span<const Atom> M, double q) {
    const auto lam = sorted(m), kap = sorted(M);
    if (q == 0.0) {
        if (kap.size() + 1 != lam.size()) return false;
        for (std::size_t i = 0; i < kap.size(); ++i) {
            if (!(lam[i].location < kap[i].location && kap[i].location < lam[i + 1].location)) return false;
        }
        return true;
    }
    if (kap.size() != lam.size()) return false;
    double m0 = 0.0;
    for (const Atom& a : lam) m0 += a.weight;
    for (std::size_t i = 0; i < kap.size(); ++i) {
        if (!(lam[i].location < kap[i].location)) return false;
        if (i + 1 < lam.size() && !(kap[i].location < lam[i + 1].location)) return false;
    }
    // Attained with equality for a single atom.
    const double cap = lam.back().location + m0 / q;
    return kap.back().location <= cap * (1.0 + 1e-12);
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

struct Builder {
    Criterion c;
    explicit Builder(int id) {
        c.id = id;
        c.name = criterion_name(id);
        c.pass = true;
    }
    // Records value <= bound (or value >= bound when `above`).
    void check(double value, double bound, bool above = false) {
        const bool ok = above ? value > bound : value <= bound;
        if (!ok || !std::isfinite(value)) c.pass = false;
        c.value = value;
        c.bound = bound;
    }
    void require(bool ok, const std::string& why) {
        if (!ok) {
            c.pass = false;
            note(why);
        }
    }
    void note(const std::string& s) {
        if (!c.detail.empty()) c.detail += "; ";
        c.detail += s;
    }
};

double tolerance(const Options& o, double dflt) { return o.tol.value_or(dflt); }

Criterion example_two_atoms(const Options& o) {
    Builder out(1);
    const double tol = tolerance(o, 1e-12);
    Rng rng(101);
    const auto t0 = Clock::now();
    double worst = 0.0;
    for (int i = 0; i < 50; ++i) {
        const double g1 = uniform(rng, 0.1, 10), l1 = uniform(rng, 0.1, 10);
        const double g2 = uniform(rng, 0.1, 10), l2 = uniform(rng, 0.1, 10);
        const ForwardResult f = forward(make_thorin_pair(0.0, PositiveMeasure::atomic({{g1, l1}, {g2, l2}})));
        const double kappa = (l2 * g1 + l1 * g2) / (g1 + g2);
        const double c = g1 * g2 * (l1 - l2) * (l1 - l2) / ((g1 + g2) * (g1 + g2) * (l2 * g1 + l1 * g2));
        const auto at = f.M.atoms();
        if (at.size() != 1) {
            worst = kInf;
            break;
        }
        worst = std::max({worst, std::abs(at[0].location - kappa), std::abs(at[0].weight - c),
                          std::abs(f.a - 1.0 / (g1 + g2)), std::abs(f.b - 1.0 / (g1 / l1 + g2 / l2))});
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    out.check(worst, tol);
    out.require(secs < 1.0, "runtime " + fmt(secs) + " s exceeds 1 s");
    out.note("50 draws in [0.1,10]^4");
    return out.c;
}

Criterion identity(const Options& o) {
    Builder out(2);
    const double tol = tolerance(o, 1e-10);
    Rng rng(202);
    double worst = 0.0;
    int runs = 0;
    bool interlace = true;
    for (int n = 1; n <= 8; ++n) {
        for (int rep = 0; rep < 3; ++rep) {
            // forward, q = 0 needs at least one atom; q > 0 likewise.
            const auto m = random_atoms(rng, n);
            for (double q : {0.0, uniform(rng, 0.1, 5.0)}) {
                const ThorinPair p = make_thorin_pair(q, PositiveMeasure::atomic(m));
                const ForwardResult f = forward(p);
                worst = std::max(worst, identity_residual(p, f.a, f.b, f.M));
                interlace = interlace && interlaces(m, f.M.atoms(), q);
                ++runs;
            }
            const auto M = random_atoms(rng, n);
            const double b = uniform(rng, 0.1, 10.0);
            for (double a : {uniform(rng, 0.1, 10.0), 0.0}) {
                const BackwardResult r = backward(a, b, PositiveMeasure::atomic(M));
                worst = std::max(worst, identity_residual(r.pair, a, b, PositiveMeasure::atomic(M)));
                interlace = interlace && interlaces(r.pair.m.atoms(), M, r.pair.q);
                ++runs;
            }
        }
    }
    out.check(worst, tol);
    out.require(interlace, "interlacing violated");
    out.note(std::to_string(runs) + " runs, 1-8 atoms");
    return out.c;
}

Criterion round_trip(const Options& o) {
    Builder out(3);
    const double tol = tolerance(o, 1e-10);
    Rng rng(303);
    double worst = 0.0;
    for (int i = 0; i < 50; ++i) {
        const int n = uniform_int(rng, 2, 6);
        const auto m = random_atoms(rng, n);
        const double q = i % 2 ? uniform(rng, 0.1, 5.0) : 0.0;
        const ForwardResult f = forward(make_thorin_pair(q, PositiveMeasure::atomic(m)));
        const BackwardResult back = backward(f.a, f.b, f.M);
        worst = std::max({worst, atom_distance(m, back.pair.m.atoms()), std::abs(back.pair.q - q)});

        const auto M = random_atoms(rng, n);
        const double a = i % 2 ? 0.0 : uniform(rng, 0.1, 10.0);
        const double b = uniform(rng, 0.1, 10.0);
        const BackwardResult r = backward(a, b, PositiveMeasure::atomic(M));
        const ForwardResult again = forward(r.pair);
        worst = std::max({worst, atom_distance(M, again.M.atoms()), std::abs(again.a - a), std::abs(again.b - b)});
    }
    out.check(worst, tol);
    out.note("50 measures, both directions");
    return out.c;
}

Criterion inversion(const Options& o) {
    Builder out(4);
    const double tol = tolerance(o, 1e-4);
    const double alpha = 0.5, kappa = 1.0;
    const PositiveMeasure m = PositiveMeasure::stable_tail(alpha, kappa);
    const double b = 1.0 / moment(m, -1.0);
    // G_M(z) = a - b / z - 1 / (z G_m(z)) with a = 0.
    auto GM = [&](Complex z) { return -b / z - 1.0 / (z * stieltjes(m, z)); };
    std::vector<double> x;
    for (int k = 0; k < 50; ++k) x.push_back(1.01 + (10.0 - 1.01) * (k + 0.5) / 50.0);
    const InversionResult inv = stieltjes_invert(GM, x, y_sequence());
    const double norm = std::tgamma(alpha) * std::tgamma(1.0 - alpha);
    double worst = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double exact = std::pow(x[k] - kappa, alpha) / (x[k] * norm);
        worst = std::max(worst, std::abs(inv.density[k] - exact) / exact);
    }
    out.check(worst, tol);

    const double a3 = 2.0, b3 = 1.0;
    const BackwardResult r = backward(a3, b3, PositiveMeasure::window(0.0, 1.0));
    const auto* g = std::get_if<family::Grid>(&r.pair.m.variant());
    if (g == nullptr || g->atoms.size() != 1) {
        out.require(false, "expected a single pole");
        return out.c;
    }
    const double x0 = g->atoms[0].location;
    const double eq = std::abs(a3 * x0 - b3 + x0 * std::log1p(-1.0 / x0));
    const double mass = 1.0 / (b3 / x0 + 1.0 / (x0 - 1.0));
    out.require(eq <= tolerance(o, 1e-10), "pole equation residual " + fmt(eq));
    out.require(b3 / a3 < x0 && x0 < 1.0 + (b3 + 1.0) / a3, "pole outside bracket");
    out.require(std::abs(g->atoms[0].weight - mass) <= 1e-8 * mass, "pole mass mismatch");
    out.note("pole x0=" + fmt(x0) + " residual " + fmt(eq));
    return out.c;
}

Criterion psi_solver(const Options& o) {
    Builder out(5);
    const double tol = tolerance(o, 1e-8);
    Rng rng(505);
    const double a = uniform(rng, 0.5, 2.0), b = uniform(rng, 0.5, 2.0);
    const Quadruplet cir = make_quadruplet(a, b, PositiveMeasure::zero(), 1.0);
    double worst = 0.0;
    for (double t : numeric::logspace(0.01, 10.0, 10)) {
        for (double lam : numeric::logspace(0.01, 100.0, 10)) {
            const double e = std::exp(-b * t);
            const double exact = b * lam * e / (b + a * lam * (1.0 - e));
            const PsiSolution s = psi(cir, t, lam);
            worst = std::max(worst, std::abs(s.psi - exact) / std::max(1.0, exact));
        }
    }
    out.check(worst, tol);

    const Quadruplet st = make_quadruplet(0.0, 1.0, PositiveMeasure::stable_tail_dual(0.5, 1.0), 1.0);
    double implicit = 0.0;
    for (double t : {0.1, 0.5, 1.0, 2.0}) {
        for (double lam : {0.1, 1.0, 10.0}) implicit = std::max(implicit, psi(st, t, lam).residual);
    }
    out.require(implicit < tolerance(o, 1e-8), "implicit residual " + fmt(implicit));
    out.note("CIR a=" + fmt(a) + " b=" + fmt(b) + "; implicit residual " + fmt(implicit));
    return out.c;
}

Criterion sandwich(const Options& o) {
    Builder out(6);
    const PositiveMeasure m = PositiveMeasure::atomic({{1.0, 1.0}, {1.0, 2.0}});
    const ThorinPair pair = make_thorin_pair(0.0, m);
    const ForwardResult f = forward(pair);
    const Quadruplet q = make_quadruplet(f.a, f.b, f.M, 1.0);
    const SectorReport r = sector_report(q, pair);
    const double upper = 1.0 + std::sqrt(2.0 / 3.0);
    const double routes = std::abs(r.lower_moments - r.lower_general);
    out.check(routes, tolerance(o, 1e-10));
    out.require(r.lower_moments <= r.empirical, "lower bound exceeds empirical");
    out.require(r.empirical <= upper + 1e-6, "empirical exceeds 1+sqrt(2/3)");
    out.require(r.empirical > 1.0, "empirical not above 1");
    char buf[128];
    std::snprintf(buf, sizeof buf, "lower %.10f <= empirical %.10f <= %.10f", r.lower_moments, r.empirical, upper);
    out.note(buf);
    return out.c;
}

Criterion reversibility(const Options& o) {
    Builder out(7);
    const double tol = tolerance(o, 1e-12);
    const auto grid = default_reversibility_grid();
    Rng rng(707);
    double cir = 0.0;
    for (int i = 0; i < 20; ++i) {
        const Quadruplet q = make_quadruplet(uniform(rng, 0.1, 10.0), uniform(rng, 0.1, 10.0), PositiveMeasure::zero(),
                                             uniform(rng, 0.1, 10.0));
        cir = std::max(cir, reversibility_residual(q, grid));
    }
    // Two atoms a decade apart keep the antisymmetric part visible on the grid.
    double ggc = kInf;
    for (int i = 0; i < 20; ++i) {
        const double l1 = uniform(rng, 0.2, 1.0);
        const double l2 = l1 * uniform(rng, 4.0, 10.0);
        const ThorinPair p = make_thorin_pair(
            0.0, PositiveMeasure::atomic({{uniform(rng, 0.5, 2.0), l1}, {uniform(rng, 0.5, 2.0), l2}}));
        const ForwardResult f = forward(p);
        ggc = std::min(ggc, reversibility_residual_relative(make_quadruplet(f.a, f.b, f.M, 1.0), grid));
    }
    out.check(cir, tol);
    out.require(ggc > 1e-3, "GGC relative residual " + fmt(ggc) + " not above 1e-3");
    out.note("CIR max " + fmt(cir) + "; GGC relative min " + fmt(ggc));
    return out.c;
}

Criterion simulation(const Options& o) {
    Builder out(8);
    const auto t0 = Clock::now();
    SimConfig cfg;
    cfg.dt = 1e-3;
    cfg.threads = o.threads;

    const Quadruplet cir = make_quadruplet(1.0, 1.0, PositiveMeasure::zero(), 1.0);
    cfg.T = 20.0;
    cfg.paths = 100000;
    cfg.seed = o.seed;
    const SimEnsemble e = simulate_path(cir, 1.0, cfg);
    const std::vector<double> lam = numeric::logspace(0.1, 10.0, 10);
    const LaplaceEstimate le = empirical_laplace(e.terminals, lam);
    double zmax = 0.0;
    for (std::size_t k = 0; k < lam.size(); ++k) {
        const double exact = std::exp(-std::log1p(lam[k]));
        zmax = std::max(zmax, std::abs(le.value[k] - exact) / le.stderr_[k]);
    }
    out.check(zmax, 3.0);

    const PositiveMeasure m = PositiveMeasure::atomic({{1.0, 1.0}, {1.0, 2.0}});
    const ForwardResult f = forward(make_thorin_pair(0.0, m));
    const Quadruplet ggc = make_quadruplet(f.a, f.b, f.M, 1.0);
    cfg.T = 10.0;
    cfg.paths = 20000;
    cfg.seed = splitmix64(o.seed + 1);
    const MeanEstimate mean = sample_mean(simulate_path(ggc, 1.5, cfg).terminals);
    const double target = ggc.delta * moment(m, -1.0);
    const double zmean = std::abs(mean.mean - target) / mean.stderr_;
    out.require(zmean < 4.0, "GGC mean z " + fmt(zmean));

    double ztr = 0.0;
    for (double t : {0.5, 2.0}) {
        cfg.T = t;
        cfg.seed = splitmix64(o.seed + static_cast<std::uint64_t>(10 * t));
        const TransientReport tr = verify_transient(ggc, simulate_path(ggc, 1.0, cfg), lam);
        ztr = std::max(ztr, tr.max_abs_z);
        out.require(tr.pass, "transient at t=" + fmt(t) + " max z " + fmt(tr.max_abs_z));
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    out.require(secs < 120.0, "runtime " + fmt(secs) + " s exceeds 120 s");
    out.note("CIR max z " + fmt(zmax) + "; GGC mean z " + fmt(zmean) + "; transient max z " + fmt(ztr));
    return out.c;
}

Criterion support_floor(const Options& o) {
    Builder out(9);
    const Quadruplet q = make_quadruplet(0.0, 0.5, PositiveMeasure::atomic({{0.5, 1.0}}), 1.0);
    const double x0 = 2.0;
    SimConfig cfg;
    cfg.T = 1.0;
    cfg.dt = 1e-3;
    cfg.paths = 20000;
    cfg.seed = splitmix64(o.seed + 9);
    cfg.threads = o.threads;
    const SimEnsemble e = simulate_path(q, x0, cfg);
    const double lowest = *std::min_element(e.terminals.begin(), e.terminals.end());
    const double kdrift = q.b + jump_mean(q);
    const double floor = support_infimum(q, cfg.T, x0).value - 2.0 * cfg.dt * kdrift * x0;
    // Margin above the floor; negative means a violation.
    out.check(lowest - floor, 0.0, true);
    out.note("min " + fmt(lowest) + " vs floor " + fmt(floor));
    return out.c;
}

Criterion boolean(const Options& o) {
    Builder out(10);
    const double tol = tolerance(o, 1e-10);
    const PositiveMeasure s = boolean_convolve(PositiveMeasure::atomic({{1.0, 1.0}}), PositiveMeasure::atomic({{1.0, 2.0}}));
    const auto at = s.atoms();
    out.require(at.size() == 1 && std::abs(at[0].location - 3.0) <= tolerance(o, 1e-12) &&
                    std::abs(at[0].weight - 1.0) <= tolerance(o, 1e-12),
                "eps1 + eps2 is not eps3");

    Rng rng(1010);
    double kadd = 0.0;
    const auto prob = [&](int n) {
        auto a = random_atoms(rng, n);
        double total = 0.0;
        for (const Atom& x : a) total += x.weight;
        for (Atom& x : a) x.weight /= total;
        return PositiveMeasure::atomic(std::move(a));
    };
    for (int i = 0; i < 20; ++i) {
        const PositiveMeasure m1 = prob(uniform_int(rng, 1, 4)), m2 = prob(uniform_int(rng, 1, 4));
        kadd = std::max(kadd, k_additivity_residual(m1, m2, boolean_convolve(m1, m2)));
    }
    out.check(kadd, tol);

    // P_{1,1}: sqrt(u (4 - u)) / (2 pi u) on (0, 4).
    const ForwardResult f = forward(make_thorin_pair(0.0, PositiveMeasure::free_poisson(1.0, 1.0, 1.0)));
    double dens = 0.0;
    for (int k = 0; k <= 390; ++k) {
        const double u = 0.05 + 0.01 * k;
        const double exact = std::sqrt(u * (4.0 - u)) / (2.0 * std::numbers::pi * u);
        dens = std::max(dens, std::abs(f.M.density(u) - exact));
    }
    out.require(std::abs(f.a - 1.0) <= tol && std::abs(f.b) <= tol, "fixed point a, b = " + fmt(f.a) + ", " + fmt(f.b));
    out.require(dens < tolerance(o, 1e-4), "free Poisson density error " + fmt(dens));
    out.note("K residual " + fmt(kadd) + "; density error " + fmt(dens));
    return out.c;
}

}  // namespace

const char* criterion_name(int id) {
    switch (id) {
        case 1: return "two-atom example";
        case 2: return "identity residual";
        case 3: return "round trip";
        case 4: return "Stieltjes inversion";
        case 5: return "psi solver";
        case 6: return "sector sandwich";
        case 7: return "reversibility dichotomy";
        case 8: return "simulation vs analytics";
        case 9: return "support floor";
        case 10: return "Boolean algebra";
        default: return "unknown";
    }
}

Criterion run(int id, const Options& opts) {
    using Fn = Criterion (*)(const Options&);
    static constexpr Fn table[] = {example_two_atoms, identity,      round_trip, inversion,     psi_solver,
                                   sandwich,          reversibility, simulation, support_floor, boolean};
    if (id < 1 || id > kCriteria) throw DomainError("verify: criterion id must be in 1.." + std::to_string(kCriteria));
    const auto t0 = Clock::now();
    Criterion c;
    try {
        c = table[id - 1](opts);
    } catch (const Error& e) {
        c.id = id;
        c.name = criterion_name(id);
        c.pass = false;
        c.value = kInf;
        c.detail = std::string("error: ") + e.what();
    }
    c.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    return c;
}

std::vector<Criterion> run_all(const Options& opts) {
    std::vector<Criterion> out;
    for (int id = 1; id <= kCriteria; ++id) out.push_back(run(id, opts));
    return out;
}

std::string format_line(const Criterion& c) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s [%d] %s: value %.3g (bound %.3g) %.2f s", c.pass ? "PASS" : "FAIL", c.id,
                  c.name.c_str(), c.value, c.bound, c.seconds);
    std::string s = buf;
    if (!c.detail.empty()) s += " | " + c.detail;
    return s;
}

}  // namespace cbci::verify
