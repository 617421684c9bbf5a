#include "cbci/mechanisms.hpp"

#include <array>
#include <cmath>
#include <sstream>

#include <boost/numeric/odeint.hpp>

#include "cbci/error.hpp"

namespace cbci {

Quadruplet make_quadruplet(double a, double b, PositiveMeasure M, double delta) {
    if (!(a >= 0.0) || !std::isfinite(a)) throw DomainError("quadruplet: a must be finite and >= 0");
    if (!(b >= 0.0) || !std::isfinite(b)) throw DomainError("quadruplet: b must be finite and >= 0");
    if (!(delta > 0.0) || !std::isfinite(delta)) throw DomainError("quadruplet: delta must be positive");
    if (a == 0.0 && b == 0.0 && M.is_zero()) throw DomainError("quadruplet: a, b and M cannot all vanish");
    return Quadruplet{a, b, std::move(M), delta};
}

double mechanism_g(const PositiveMeasure& M, double lambda) {
    if (!(lambda >= 0.0)) throw DomainError("mechanism_g: lambda must be >= 0");
    if (M.is_zero()) return 0.0;
    if (lambda == 0.0) return moment(M, -1.0);
    if (M.is_atomic()) {
        double s = 0.0;
        for (const Atom& a : M.atoms()) s += a.weight / (lambda + a.location);
        return s;
    }
    if (const auto* sd = std::get_if<family::StableTailDual>(&M.variant())) {
        const double k = sd->kappa, al = sd->alpha;
        if (lambda < 1e-7 * k) {
            return M.factor() * (al * std::pow(k, al - 1.0) + 0.5 * al * (al - 1.0) * std::pow(k, al - 2.0) * lambda);
        }
        return M.factor() * (std::pow(lambda + k, al) - std::pow(k, al)) / lambda;
    }
    return -stieltjes(M, Complex(-lambda, 0.0)).real();
}

double branching_R0(const Quadruplet& q, double lambda) {
    if (lambda == 0.0) return q.b;
    return q.a * lambda + q.b + lambda * mechanism_g(q.M, lambda);
}

double branching_R(const Quadruplet& q, double lambda) {
    if (!(lambda >= 0.0)) throw DomainError("branching_R: lambda must be >= 0");
    if (lambda == 0.0) return 0.0;
    return -lambda * branching_R0(q, lambda);
}

JumpDensity jump_density(const Quadruplet& q, double y) {
    if (!(y > 0.0)) throw DomainError("jump_density: y must be positive");
    if (q.M.is_zero()) return {};
    return {exponential_moment(q.M, 2, y), exponential_moment(q.M, 1, y)};
}

double jump_mean(const Quadruplet& q) { return moment(q.M, 0.0); }

double jump_rate(const Quadruplet& q) { return moment(q.M, 1.0); }

double phi_prime(const Quadruplet& q, double lambda) { return 1.0 / branching_R0(q, lambda); }

double phi(const Quadruplet& q, double lambda) {
    if (!(lambda >= 0.0)) throw DomainError("phi: lambda must be >= 0");
    if (lambda == 0.0) return 0.0;
    if (q.M.is_zero()) {
        if (q.a == 0.0) return lambda / q.b;
        if (q.b == 0.0) return kInf;
        return std::log1p(q.a * lambda / q.b) / q.a;
    }
    if (q.b == 0.0 && is_ergodic(q) == Decision::no) return kInf;
    numeric::QuadOptions opts;
    opts.rel_tol = 1e-12;
    return numeric::integrate_or_throw([&](double u) { return 1.0 / branching_R0(q, u); }, 0.0, lambda,
                                       true, opts);
}

namespace {

double log_space_time(const Quadruplet& q, double psi_value, double lambda) {
    if (psi_value >= lambda) return 0.0;
    auto f = [&](double s) { return 1.0 / branching_R0(q, std::exp(s)); };
    return numeric::gauss_kronrod(f, std::log(psi_value), std::log(lambda), 1e-13, nullptr, 15);
}

}  // namespace

PsiSolution psi(const Quadruplet& q, double t, double lambda, const PsiOptions& opts) {
    if (!(t >= 0.0) || !(lambda >= 0.0)) throw DomainError("psi: t and lambda must be >= 0");
    PsiSolution sol{t, lambda, lambda, 0.0, 0.0};
    if (t == 0.0 || lambda == 0.0) return sol;

    using State = std::array<double, 2>;
    namespace ode = boost::numeric::odeint;
    // State (log psi, int psi); the log keeps the error relative as psi decays.
    auto rhs = [&](const State& x, State& dxdt, double) {
        const double p = std::exp(x[0]);
        dxdt[0] = -branching_R0(q, p);
        dxdt[1] = p;
    };
    State x{std::log(lambda), 0.0};
    const double r0 = branching_R0(q, lambda);
    const double dt0 = std::min(t, 1e-3 / std::max(1.0, r0));
    auto stepper = ode::make_controlled(opts.abs_tol, opts.rel_tol, ode::runge_kutta_dopri5<State>());
    ode::integrate_adaptive(stepper, rhs, x, 0.0, t, dt0);
    sol.psi = std::exp(x[0]);
    sol.integral = x[1];

    std::ostringstream diag;
    diag.precision(17);
    if (!(sol.psi > 0.0) || sol.psi > lambda * (1.0 + 1e-12)) {
        diag << "psi: solution left (0, lambda]: t=" << t << " lambda=" << lambda << " psi=" << sol.psi;
        throw NumericError(diag.str());
    }
    sol.psi = std::min(sol.psi, lambda);
    sol.residual = std::abs(t - log_space_time(q, sol.psi, lambda));
    const double lower = lambda * std::exp(-t * r0);
    const double upper = lambda * std::exp(-t * branching_R0(q, sol.psi));
    const double slack = 1e-9;
    if (sol.psi < lower * (1.0 - slack) || sol.psi > upper * (1.0 + slack)) {
        diag << "psi: bracket violated: " << lower << " <= " << sol.psi << " <= " << upper;
        throw NumericError(diag.str());
    }
    if (sol.residual > opts.residual_tol) {
        diag << "psi: implicit-identity residual " << sol.residual << " exceeds " << opts.residual_tol
             << " (t=" << t << ", lambda=" << lambda << ", psi=" << sol.psi << ")";
        throw NumericError(diag.str());
    }
    return sol;
}

double transient_laplace(const Quadruplet& q, double t, double lambda, double x) {
    if (!(x >= 0.0)) throw DomainError("transient_laplace: x must be >= 0");
    const PsiSolution s = psi(q, t, lambda);
    return std::exp(-x * s.psi - q.delta * s.integral);
}

double stationary_laplace(const Quadruplet& q, double lambda) { return std::exp(-q.delta * phi(q, lambda)); }

SupportInfimum support_infimum(const Quadruplet& q, double t, double x) {
    if (!(t > 0.0)) throw DomainError("support_infimum: t must be positive");
    if (!(x >= 0.0)) throw DomainError("support_infimum: x must be >= 0");
    if (q.a > 0.0) return {0.0, false};
    const double c = jump_mean(q);
    if (std::isinf(c)) return {0.0, true};
    const double k = q.b + c;
    if (std::isinf(t)) return {q.delta / k, false};
    const double decay = std::exp(-t * k);
    return {x * decay - (q.delta / k) * std::expm1(-t * k), false};
}

Decision is_ergodic(const Quadruplet& q) {
    if (q.b > 0.0) return Decision::yes;
    if (q.M.is_zero() || q.M.is_atomic()) return Decision::no;
    const numeric::QuadResult r = numeric::integrate([&](double u) { return 1.0 / branching_R0(q, u); }, 0.0, 1.0);
    switch (r.status) {
        case numeric::QuadStatus::converged: return Decision::yes;
        case numeric::QuadStatus::divergent: return Decision::no;
        case numeric::QuadStatus::inconclusive: break;
    }
    return Decision::inconclusive;
}

namespace {

// Laplace-domain exponential polynomial: sum_i sum_j coef[i][j] / (z + kappa_i)^(j+1).
struct ExpPoly {
    std::vector<double> kappa;
    std::vector<std::vector<double>> coef;

    void add(std::size_t i, std::size_t power, double v) {
        if (coef[i].size() < power) coef[i].resize(power, 0.0);
        coef[i][power - 1] += v;
    }
};

double binom(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

ExpPoly multiply(const ExpPoly& x, const ExpPoly& y) {
    ExpPoly out{x.kappa, std::vector<std::vector<double>>(x.kappa.size())};
    for (std::size_t i = 0; i < x.kappa.size(); ++i) {
        for (std::size_t j = 0; j < x.coef[i].size(); ++j) {
            const double cx = x.coef[i][j];
            if (cx == 0.0) continue;
            const int m = static_cast<int>(j) + 1;
            for (std::size_t k = 0; k < y.kappa.size(); ++k) {
                for (std::size_t l = 0; l < y.coef[k].size(); ++l) {
                    const double cy = y.coef[k][l];
                    if (cy == 0.0) continue;
                    const int n = static_cast<int>(l) + 1;
                    const double w = cx * cy;
                    if (i == k) {
                        out.add(i, static_cast<std::size_t>(m + n), w);
                        continue;
                    }
                    // 1/((z+al)^m (z+be)^n) in partial fractions, d = be - al.
                    const double d = y.kappa[k] - x.kappa[i];
                    for (int p = 1; p <= m; ++p) {
                        const double s = ((m - p) % 2 ? -1.0 : 1.0) * binom(n + m - p - 1, m - p) /
                                         std::pow(d, n + m - p);
                        out.add(i, static_cast<std::size_t>(p), w * s);
                    }
                    for (int p = 1; p <= n; ++p) {
                        const double s = ((n - p) % 2 ? -1.0 : 1.0) * binom(m + n - p - 1, n - p) /
                                         std::pow(-d, m + n - p);
                        out.add(k, static_cast<std::size_t>(p), w * s);
                    }
                }
            }
        }
    }
    return out;
}

// Inverse Laplace transform evaluated at y.
double evaluate(const ExpPoly& e, double y) {
    double total = 0.0;
    for (std::size_t i = 0; i < e.kappa.size(); ++i) {
        const double decay = std::exp(-e.kappa[i] * y);
        double power = 1.0;  // y^j / j!
        for (std::size_t j = 0; j < e.coef[i].size(); ++j) {
            total += e.coef[i][j] * power * decay;
            power *= y / static_cast<double>(j + 1);
        }
    }
    return total;
}

}  // namespace

double levy_series_a0(const Quadruplet& q, double y, int N) {
    if (q.a != 0.0) throw DomainError("levy_series_a0: requires a = 0");
    if (!(y > 0.0)) throw DomainError("levy_series_a0: y must be positive");
    if (N < 1) throw DomainError("levy_series_a0: N must be >= 1");
    if (!q.M.is_atomic()) throw DomainError("levy_series_a0: unsupported M variant (atomic only)");
    if (q.M.is_zero()) return 0.0;
    const double k = q.b + jump_mean(q);
    ExpPoly base;
    for (const Atom& a : q.M.atoms()) {
        base.kappa.push_back(a.location);
        base.coef.push_back({a.weight * a.location});
    }
    ExpPoly power = base;
    double total = 0.0;
    double scale = 1.0 / (k * k);
    for (int n = 1; n <= N; ++n) {
        if (n > 1) {
            power = multiply(power, base);
            scale /= k;
        }
        total += scale * evaluate(power, y);
    }
    return total / y;
}

}  // namespace cbci
