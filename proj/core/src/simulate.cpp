#include "cbci/simulate.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <thread>

#include <boost/random/exponential_distribution.hpp>
#include <boost/random/gamma_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>

#include "cbci/error.hpp"

namespace cbci {

namespace {

using Engine = std::mt19937_64;

Engine path_engine(std::uint64_t seed, std::uint64_t index) {
    return Engine(splitmix64(seed ^ splitmix64(index)));
}

// Runs body(i) for i in [0, n) on a fixed partition; results depend only on i.
template <class F>
void parallel_for(std::size_t n, unsigned threads, F&& body) {
    unsigned w = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
    w = static_cast<unsigned>(std::min<std::size_t>(w, std::max<std::size_t>(n, 1)));
    if (w <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(w);
    for (unsigned t = 0; t < w; ++t) {
        pool.emplace_back([&, t] {
            for (std::size_t i = t; i < n; i += w) body(i);
        });
    }
    for (auto& th : pool) th.join();
}

PositiveMeasure atomized(const PositiveMeasure& m, double* bias) {
    *bias = 0.0;
    if (m.is_atomic()) return m;
    Discretized d = discretize(m);
    *bias = d.bias;
    return d.measure;
}

struct JumpMixture {
    double rho = 0.0;
    std::vector<double> cumulative;
    std::vector<double> kappa;

    explicit JumpMixture(const PositiveMeasure& M) {
        for (const Atom& at : M.atoms()) {
            rho += at.weight * at.location;
            cumulative.push_back(rho);
            kappa.push_back(at.location);
        }
        for (double& c : cumulative) c /= rho;
        if (!cumulative.empty()) cumulative.back() = 1.0;
    }

    template <class Rng>
    double draw(Rng& rng) const {
        const double u = boost::random::uniform_01<double>()(rng);
        const auto it = std::lower_bound(cumulative.begin(), cumulative.end(), u);
        const std::size_t k = std::min<std::size_t>(it - cumulative.begin(), kappa.size() - 1);
        return boost::random::exponential_distribution<double>(kappa[k])(rng);
    }
};

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

Discretized discretize(const PositiveMeasure& m, int bins) {
    if (m.is_atomic()) return {m, 0.0};
    if (bins < 1) throw DomainError("discretize: need at least one bin");
    const double lo = m.support_inf();
    const double hi = m.support_sup();
    if (!std::isfinite(hi)) throw DomainError("discretize: support must be bounded");

    constexpr int cells = 512;
    std::vector<double> mass(cells), first(cells);
    const double w = (hi - lo) / cells;
    const auto dens = [&](double u) { return m.density(u); };
    for (int k = 0; k < cells; ++k) {
        const double a = lo + k * w;
        const double b = k + 1 == cells ? hi : a + w;
        mass[k] = numeric::integrate_or_throw(dens, a, b, false);
        first[k] = numeric::integrate_or_throw([&](double u) { return u * m.density(u); }, a, b, false);
    }
    double total = 0.0;
    for (double v : mass) total += v;

    std::vector<Atom> atoms;
    double acc_m = 0.0, acc_f = 0.0, done = 0.0;
    int next = 1;
    for (int k = 0; k < cells; ++k) {
        acc_m += mass[k];
        acc_f += first[k];
        if (done + acc_m >= total * next / bins || k + 1 == cells) {
            if (acc_m > 0.0) atoms.push_back({acc_m, acc_f / acc_m});
            done += acc_m;
            acc_m = acc_f = 0.0;
            while (next < bins && done >= total * next / bins) ++next;
        }
    }
    if (const auto* g = std::get_if<family::Grid>(&m.variant())) {
        for (const Atom& at : g->atoms) atoms.push_back({at.weight * m.factor(), at.location});
    }
    std::sort(atoms.begin(), atoms.end(), [](const Atom& x, const Atom& y) { return x.location < y.location; });
    std::vector<Atom> merged;
    for (const Atom& at : atoms) {
        if (!merged.empty() && merged.back().location == at.location) {
            merged.back().weight += at.weight;
        } else {
            merged.push_back(at);
        }
    }
    Discretized out{PositiveMeasure::atomic(std::move(merged)), 0.0};
    const double g = mechanism_g(m, 1.0);
    out.bias = std::abs(mechanism_g(out.measure, 1.0) - g) / g;
    return out;
}

std::vector<double> sample_stationary(const StationaryLaw& law, std::size_t count,
                                      std::uint64_t seed) {
    if (!(law.delta > 0.0)) throw DomainError("sample_stationary: delta must be positive");
    double bias = 0.0;
    const PositiveMeasure m = atomized(law.pair.m, &bias);
    const auto atoms = m.atoms();
    const double shift = law.delta * law.pair.q;
    std::vector<double> out(count);
    parallel_for(count, 0, [&](std::size_t i) {
        Engine rng = path_engine(seed, i);
        double x = shift;
        for (const Atom& at : atoms) {
            x += boost::random::gamma_distribution<double>(law.delta * at.weight, 1.0)(rng) / at.location;
        }
        out[i] = x;
    });
    return out;
}

double default_dt(const Quadruplet& q) {
    const double k = q.b + jump_mean(q);
    return 1e-3 * std::min(1.0, 1.0 / k);
}

SimEnsemble simulate_from(const Quadruplet& q, const std::vector<double>& x0s,
                          const SimConfig& cfg) {
    if (!(cfg.dt > 0.0) || !(cfg.T >= 0.0)) throw DomainError("simulate: need dt > 0 and T >= 0");
    for (double x : x0s) {
        if (!(x >= 0.0)) throw DomainError("simulate: initial values must be >= 0");
    }
    SimEnsemble ens;
    ens.seed = cfg.seed;
    ens.paths = x0s.size();
    ens.dt = cfg.dt;
    ens.T = cfg.T;
    ens.x0 = x0s.empty() ? 0.0 : x0s.front();
    for (double x : x0s) {
        if (x != ens.x0) {
            ens.x0 = std::numeric_limits<double>::quiet_NaN();
            break;
        }
    }

    const PositiveMeasure M = atomized(q.M, &ens.discretization_bias);
    const JumpMixture jumps(M);
    const double c = moment(M, 0.0);
    if (!std::isfinite(jumps.rho)) throw DomainError("simulate: infinite jump activity");
    const double kdrift = q.b + c;
    const double delta = q.delta;
    const double dt = cfg.dt;
    const double vol = std::sqrt(2.0 * q.a * dt);
    const auto steps = static_cast<std::size_t>(std::llround(cfg.T / dt));

    const double typical = std::max(ens.x0 == ens.x0 ? ens.x0 : 0.0, delta / kdrift);
    if (jumps.rho * typical * dt > 0.1) {
        ens.warnings.push_back("dt large relative to jump intensity");
    }
    if (std::abs(steps * dt - cfg.T) > 1e-9 * std::max(1.0, cfg.T)) {
        ens.warnings.push_back("horizon not a multiple of dt; rounded");
    }

    ens.terminals.resize(ens.paths);
    ens.jump_counts.resize(ens.paths);
    // Paths advance in interleaved lanes so the per-step dependency chains overlap.
    constexpr std::size_t lanes = 8;
    const std::size_t batches = (ens.paths + lanes - 1) / lanes;
    parallel_for(batches, cfg.threads, [&](std::size_t bi) {
        const std::size_t first = bi * lanes;
        const std::size_t width = std::min(lanes, ens.paths - first);
        std::array<Engine, lanes> rng;
        std::array<double, lanes> x{}, clock{};
        std::array<std::uint32_t, lanes> count{};
        boost::random::normal_distribution<double> normal;
        boost::random::exponential_distribution<double> unit_exp;
        boost::random::uniform_01<double> unif;
        for (std::size_t l = 0; l < width; ++l) {
            rng[l] = path_engine(cfg.seed, first + l);
            x[l] = x0s[first + l];
            clock[l] = jumps.rho > 0.0 ? unit_exp(rng[l]) : kInf;
        }
        for (std::size_t n = 0; n < steps; ++n) {
            for (std::size_t l = 0; l < width; ++l) {
                const double xl = x[l];
                double next = xl + (delta - kdrift * xl) * dt;
                if (vol > 0.0) next += vol * std::sqrt(xl) * normal(rng[l]);
                next = std::abs(next);
                if (jumps.rho > 0.0) {
                    const double envelope = jumps.rho * (xl + delta * dt);
                    clock[l] -= envelope * dt;
                    while (clock[l] <= 0.0) {
                        if (unif(rng[l]) * envelope <= jumps.rho * next) {
                            next += jumps.draw(rng[l]);
                            ++count[l];
                        }
                        clock[l] += unit_exp(rng[l]);
                    }
                }
                x[l] = next;
            }
        }
        for (std::size_t l = 0; l < width; ++l) {
            ens.terminals[first + l] = x[l];
            ens.jump_counts[first + l] = count[l];
        }
    });
    return ens;
}

SimEnsemble simulate_path(const Quadruplet& q, double x0, const SimConfig& cfg) {
    return simulate_from(q, std::vector<double>(cfg.paths, x0), cfg);
}

MeanEstimate sample_mean(const std::vector<double>& v) {
    if (v.empty()) throw DomainError("sample_mean: empty sample");
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    const double n = static_cast<double>(v.size());
    const double var = v.size() > 1 ? ss / (n - 1.0) : 0.0;
    return {mean, std::sqrt(var / n)};
}

LaplaceEstimate empirical_laplace(const std::vector<double>& samples,
                                  const std::vector<double>& lambda) {
    if (samples.empty()) throw DomainError("empirical_laplace: empty ensemble");
    LaplaceEstimate out;
    out.lambda = lambda;
    std::vector<double> e(samples.size());
    for (double l : lambda) {
        for (std::size_t i = 0; i < samples.size(); ++i) e[i] = std::exp(-l * samples[i]);
        const MeanEstimate s = sample_mean(e);
        out.value.push_back(l == 0.0 ? 1.0 : s.mean);
        out.stderr_.push_back(l == 0.0 ? 0.0 : s.stderr_);
    }
    return out;
}

TransientReport verify_transient(const Quadruplet& q, const SimEnsemble& ens,
                                 const std::vector<double>& lambda, double z_limit) {
    if (!(ens.x0 == ens.x0)) throw DomainError("verify_transient: ensemble needs a common x0");
    TransientReport r;
    const LaplaceEstimate emp = empirical_laplace(ens.terminals, lambda);
    r.lambda = lambda;
    r.empirical = emp.value;
    for (std::size_t k = 0; k < lambda.size(); ++k) {
        const double exact = ens.T == 0.0 ? std::exp(-lambda[k] * ens.x0)
                                          : transient_laplace(q, ens.T, lambda[k], ens.x0);
        r.exact.push_back(exact);
        const double diff = emp.value[k] - exact;
        double z = 0.0;
        if (emp.stderr_[k] > 0.0) {
            z = diff / emp.stderr_[k];
        } else if (std::abs(diff) > 1e-12) {
            z = kInf;
        }
        r.z.push_back(z);
        r.max_abs_z = std::max(r.max_abs_z, std::abs(z));
    }
    r.pass = r.max_abs_z < z_limit;
    return r;
}

}  // namespace cbci
