#include "cbci/measures.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include "cbci/error.hpp"

namespace cbci {

using numeric::QuadOptions;
using numeric::QuadResult;
using numeric::QuadStatus;
using numeric::RealFn;

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double stable_norm(double alpha) { return 1.0 / (std::tgamma(alpha) * std::tgamma(1.0 - alpha)); }

double binomial(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

QuadResult merge(QuadResult acc, const QuadResult& r) {
    acc.value += r.value;
    acc.error += r.error;
    if (r.status == QuadStatus::divergent || acc.status == QuadStatus::divergent) {
        acc.status = QuadStatus::divergent;
    } else if (r.status == QuadStatus::inconclusive) {
        acc.status = QuadStatus::inconclusive;
    }
    return acc;
}

bool finite_positive(double v) { return std::isfinite(v) && v > 0.0; }

// Interpolation of a Grid density.
class GridView {
  public:
    explicit GridView(const family::Grid& g) : g_(g) {}

    std::size_t cells() const { return g_.u.size() - 1; }

    bool singular_left() const { return std::isinf(g_.density.front()); }
    bool singular_right() const { return std::isinf(g_.density.back()); }

    double operator()(double u) const {
        const auto& x = g_.u;
        if (u < x.front() || u > x.back()) return 0.0;
        auto it = std::upper_bound(x.begin(), x.end(), u);
        std::size_t i = it == x.begin() ? 0 : static_cast<std::size_t>(it - x.begin()) - 1;
        if (i >= cells()) i = cells() - 1;
        return in_cell(i, u);
    }

    double in_cell(std::size_t i, double u) const {
        const auto& x = g_.u;
        const auto& d = g_.density;
        if (i == 0 && singular_left()) return power_law(u, x[0], x[1], d[1], x[2], d[2]);
        if (i + 1 == cells() && singular_right()) {
            const std::size_t n = x.size() - 1;
            return power_law(u, x[n], x[n - 1], d[n - 1], x[n - 2], d[n - 2]);
        }
        if (d[i] > 0.0 && d[i + 1] > 0.0 && x[i] > 0.0) {
            const double t = std::log(u / x[i]) / std::log(x[i + 1] / x[i]);
            return d[i] * std::pow(d[i + 1] / d[i], t);
        }
        const double t = (u - x[i]) / (x[i + 1] - x[i]);
        return (1.0 - t) * d[i] + t * d[i + 1];
    }

    // Integral of f * density over cell i.
    QuadResult cell_integral(std::size_t i, const RealFn& f, const QuadOptions& opts) const {
        const double lo = g_.u[i], hi = g_.u[i + 1];
        auto integrand = [&](double u) { return f(u) * in_cell(i, u); };
        const bool edge = (i == 0 && (lo == 0.0 || singular_left())) ||
                          (i + 1 == cells() && singular_right());
        if (edge) return numeric::integrate(integrand, lo, hi, opts);
        double err = 0.0;
        const double v = numeric::gauss_kronrod(integrand, lo, hi, 1e-13, &err);
        return {v, err, QuadStatus::converged};
    }

  private:
    // C |u - e|^(-p) through (x1, d1), (x2, d2).
    static double power_law(double u, double e, double x1, double d1, double x2, double d2) {
        const double r1 = std::abs(x1 - e), r2 = std::abs(x2 - e);
        const double p = std::log(d1 / d2) / std::log(r2 / r1);
        return d1 * std::pow(r1 / std::abs(u - e), p);
    }

    const family::Grid& g_;
};

void validate_atoms(std::vector<Atom>& atoms) {
    for (const Atom& a : atoms) {
        if (!(a.weight > 0.0) || !std::isfinite(a.weight)) {
            throw DomainError("atom weights must be finite and positive");
        }
        if (!(a.location > 0.0) || !std::isfinite(a.location)) {
            throw DomainError("atom locations must be finite and positive");
        }
    }
    std::sort(atoms.begin(), atoms.end(),
              [](const Atom& l, const Atom& r) { return l.location < r.location; });
    for (std::size_t i = 1; i < atoms.size(); ++i) {
        if (!(atoms[i].location > atoms[i - 1].location)) {
            throw DomainError("atom locations must be distinct");
        }
    }
}

Complex atomic_g(std::span<const Atom> atoms, Complex z) {
    Complex s = 0.0;
    for (const Atom& a : atoms) s += a.weight / (z - a.location);
    return s;
}

Complex free_poisson_g(const family::FreePoissonScaled& f, Complex z) {
    const double sb = std::sqrt(f.beta);
    const double A = f.alpha * (1.0 - sb) * (1.0 - sb);
    const double B = f.alpha * (1.0 + sb) * (1.0 + sb);
    const Complex root = std::sqrt(z - A) * std::sqrt(z - B);
    return f.scale * (z + f.alpha * (1.0 - f.beta) - root) / (2.0 * f.alpha * z);
}

Complex stable_dual_g(const family::StableTailDual& f, Complex z) {
    const double ka = std::pow(f.kappa, f.alpha);
    if (std::abs(z) < 1e-7 * std::max(f.kappa, 1e-300)) {
        const double a = f.alpha, k = f.kappa;
        return -a * std::pow(k, a - 1.0) + 0.5 * a * (a - 1.0) * std::pow(k, a - 2.0) * z;
    }
    return (std::pow(Complex(f.kappa) - z, f.alpha) - ka) / z;
}

// Complex integral over [a, b] by two real Gauss-Kronrod passes.
Complex complex_gk(const std::function<Complex(double)>& f, double a, double b) {
    const double re = numeric::gauss_kronrod([&](double u) { return f(u).real(); }, a, b, 1e-12);
    const double im = numeric::gauss_kronrod([&](double u) { return f(u).imag(); }, a, b, 1e-12);
    return {re, im};
}

Complex grid_g(const family::Grid& g, Complex z) {
    const GridView view(g);
    if (view.singular_left() || view.singular_right()) {
        throw DomainError("stieltjes: grid with a singular endpoint");
    }
    const auto& x = g.u;
    const double xr = z.real();
    Complex total = atomic_g(g.atoms, z);
    const bool near = xr > x.front() && xr < x.back();
    if (!near && z.imag() == 0.0) {
        // Real argument off the support: fixed Gauss-Legendre on cells well separated
        // from the pole and from u = 0, adaptive elsewhere.
        double re = 0.0;
        for (std::size_t i = 0; i < view.cells(); ++i) {
            const double lo = x[i], hi = x[i + 1], h = hi - lo;
            const double gap = std::min(std::abs(xr - lo), std::abs(xr - hi));
            auto f = [&](double u) { return view.in_cell(i, u) / (xr - u); };
            if (h < 0.5 * gap && h < 0.5 * lo) {
                re += numeric::gauss_legendre10(f, lo, hi);
            } else {
                re += numeric::gauss_kronrod(f, lo, hi, 1e-12);
            }
        }
        return total + re;
    }
    if (!near) {
        for (std::size_t i = 0; i < view.cells(); ++i) {
            total += complex_gk([&](double u) { return view.in_cell(i, u) / (z - u); }, x[i], x[i + 1]);
        }
        return total;
    }
    // Subtract the density value at Re z so the remaining integrand stays bounded.
    const double rx = view(xr);
    total += rx * (std::log(z - x.front()) - std::log(z - x.back()));
    for (std::size_t i = 0; i < view.cells(); ++i) {
        auto f = [&](double u) { return (view.in_cell(i, u) - rx) / (z - u); };
        if (xr > x[i] && xr < x[i + 1]) {
            total += complex_gk(f, x[i], xr) + complex_gk(f, xr, x[i + 1]);
        } else {
            total += complex_gk(f, x[i], x[i + 1]);
        }
    }
    return total;
}

// Two-step Richardson central difference along the imaginary direction.
Complex derivative_fd(const PositiveMeasure& m, Complex z) {
    const double h = 1e-3 * std::max(1.0, std::abs(z));
    const Complex ih(0.0, h);
    auto d = [&](Complex step) { return (stieltjes(m, z + step) - stieltjes(m, z - step)) / (2.0 * step); };
    const Complex d1 = d(ih);
    const Complex d2 = d(0.5 * ih);
    return (4.0 * d2 - d1) / 3.0;
}

}  // namespace

PositiveMeasure PositiveMeasure::zero() { return PositiveMeasure(family::Atomic{}); }

PositiveMeasure PositiveMeasure::atomic(std::vector<Atom> atoms) {
    validate_atoms(atoms);
    return PositiveMeasure(family::Atomic{std::move(atoms)});
}

PositiveMeasure PositiveMeasure::stable_tail(double alpha, double kappa) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("stable_tail: alpha must lie in (0,1)");
    if (!(kappa >= 0.0) || !std::isfinite(kappa)) throw DomainError("stable_tail: kappa must be >= 0");
    return PositiveMeasure(family::StableTail{alpha, kappa});
}

PositiveMeasure PositiveMeasure::stable_tail_dual(double alpha, double kappa) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("stable_tail_dual: alpha must lie in (0,1)");
    if (!(kappa >= 0.0) || !std::isfinite(kappa)) throw DomainError("stable_tail_dual: kappa must be >= 0");
    return PositiveMeasure(family::StableTailDual{alpha, kappa});
}

PositiveMeasure PositiveMeasure::window(double lo, double hi) {
    if (!(lo >= 0.0) || !(hi > lo) || !std::isfinite(hi)) throw DomainError("window: need 0 <= lo < hi < inf");
    return PositiveMeasure(family::Window{lo, hi});
}

PositiveMeasure PositiveMeasure::free_poisson(double scale, double alpha, double beta) {
    if (!(scale > 0.0) || !(alpha > 0.0) || !std::isfinite(scale) || !std::isfinite(alpha)) {
        throw DomainError("free_poisson: scale and alpha must be positive");
    }
    if (!(beta >= 1.0) || !std::isfinite(beta)) throw DomainError("free_poisson: beta must be >= 1");
    return PositiveMeasure(family::FreePoissonScaled{scale, alpha, beta});
}

PositiveMeasure PositiveMeasure::grid(std::vector<double> u, std::vector<double> density,
                                      std::vector<Atom> atoms) {
    if (u.size() < 2 || u.size() != density.size()) {
        throw DomainError("grid: need matching abscissae and density with at least two nodes");
    }
    if (!(u.front() >= 0.0) || !std::isfinite(u.back())) throw DomainError("grid: abscissae must be finite and >= 0");
    for (std::size_t i = 1; i < u.size(); ++i) {
        if (!(u[i] > u[i - 1])) throw DomainError("grid: abscissae must be strictly increasing");
    }
    const std::size_t n = u.size() - 1;
    for (std::size_t i = 0; i <= n; ++i) {
        const double d = density[i];
        if (std::isnan(d) || d < 0.0) throw DomainError("grid: density values must be >= 0");
        if (std::isinf(d)) {
            if (i != 0 && i != n) throw DomainError("grid: only end nodes may be infinite");
            if (n < 3) throw DomainError("grid: singular endpoint needs at least four nodes");
            const std::size_t a = i == 0 ? 1 : n - 1, b = i == 0 ? 2 : n - 2;
            if (!finite_positive(density[a]) || !finite_positive(density[b])) {
                throw DomainError("grid: nodes next to a singular endpoint must be finite and positive");
            }
        }
    }
    validate_atoms(atoms);
    return PositiveMeasure(family::Grid{std::move(u), std::move(density), std::move(atoms)});
}

std::string PositiveMeasure::kind() const {
    return std::visit(overloaded{
                          [](const family::Atomic&) { return std::string("atomic"); },
                          [](const family::StableTail&) { return std::string("stable_tail"); },
                          [](const family::StableTailDual&) { return std::string("stable_tail_dual"); },
                          [](const family::Window&) { return std::string("window"); },
                          [](const family::FreePoissonScaled&) { return std::string("free_poisson"); },
                          [](const family::Grid&) { return std::string("grid"); },
                      },
                      v_);
}

bool PositiveMeasure::is_zero() const {
    if (const auto* a = std::get_if<family::Atomic>(&v_)) return a->atoms.empty();
    if (const auto* g = std::get_if<family::Grid>(&v_)) {
        return g->atoms.empty() &&
               std::all_of(g->density.begin(), g->density.end(), [](double d) { return d == 0.0; });
    }
    return false;
}

bool PositiveMeasure::is_degenerate() const {
    const auto* a = std::get_if<family::Atomic>(&v_);
    return a && a->atoms.size() == 1;
}

std::span<const Atom> PositiveMeasure::atoms() const {
    if (const auto* a = std::get_if<family::Atomic>(&v_)) return a->atoms;
    return {};
}

double PositiveMeasure::support_inf() const {
    return std::visit(
        overloaded{
            [](const family::Atomic& a) { return a.atoms.empty() ? kInf : a.atoms.front().location; },
            [](const family::StableTail& s) { return s.kappa; },
            [](const family::StableTailDual& s) { return s.kappa; },
            [](const family::Window& w) { return w.lo; },
            [](const family::FreePoissonScaled& f) {
                const double r = 1.0 - std::sqrt(f.beta);
                return f.alpha * r * r;
            },
            [](const family::Grid& g) {
                double lo = kInf;
                for (std::size_t i = 0; i + 1 < g.u.size(); ++i) {
                    if (g.density[i] > 0.0 || g.density[i + 1] > 0.0) {
                        lo = g.u[i];
                        break;
                    }
                }
                if (!g.atoms.empty()) lo = std::min(lo, g.atoms.front().location);
                return lo;
            },
        },
        v_);
}

double PositiveMeasure::support_sup() const {
    return std::visit(
        overloaded{
            [](const family::Atomic& a) { return a.atoms.empty() ? 0.0 : a.atoms.back().location; },
            [](const family::StableTail&) { return kInf; },
            [](const family::StableTailDual&) { return kInf; },
            [](const family::Window& w) { return w.hi; },
            [](const family::FreePoissonScaled& f) {
                const double r = 1.0 + std::sqrt(f.beta);
                return f.alpha * r * r;
            },
            [](const family::Grid& g) {
                double hi = 0.0;
                for (std::size_t i = g.u.size() - 1; i > 0; --i) {
                    if (g.density[i] > 0.0 || g.density[i - 1] > 0.0) {
                        hi = g.u[i];
                        break;
                    }
                }
                if (!g.atoms.empty()) hi = std::max(hi, g.atoms.back().location);
                return hi;
            },
        },
        v_);
}

double PositiveMeasure::density(double u) const {
    const double d = std::visit(
        overloaded{
            [](const family::Atomic&) { return 0.0; },
            [u](const family::StableTail& s) {
                return u > s.kappa ? std::pow(u - s.kappa, -s.alpha) * stable_norm(s.alpha) : 0.0;
            },
            [u](const family::StableTailDual& s) {
                return u > s.kappa ? std::pow(u - s.kappa, s.alpha) / u * stable_norm(s.alpha) : 0.0;
            },
            [u](const family::Window& w) { return (u > w.lo && u < w.hi) ? 1.0 : 0.0; },
            [u](const family::FreePoissonScaled& f) {
                if (!(u > 0.0)) return 0.0;
                const double r = std::sqrt(f.beta);
                const double lo = f.alpha * (1.0 - r) * (1.0 - r), hi = f.alpha * (1.0 + r) * (1.0 + r);
                if (u <= lo || u >= hi) return 0.0;
                const double disc = (u - lo) * (hi - u);
                return f.scale * std::sqrt(disc) / (2.0 * std::numbers::pi * f.alpha * u);
            },
            [u](const family::Grid& g) { return GridView(g)(u); },
        },
        v_);
    return factor_ * d;
}

PositiveMeasure PositiveMeasure::scaled(double t) const {
    if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("scaled: factor must be positive");
    if (const auto* a = std::get_if<family::Atomic>(&v_)) {
        family::Atomic out = *a;
        for (Atom& at : out.atoms) at.weight *= t;
        return PositiveMeasure(std::move(out));
    }
    return PositiveMeasure(v_, factor_ * t);
}

PositiveMeasure operator+(const PositiveMeasure& a, const PositiveMeasure& b) {
    if (!a.is_atomic() || !b.is_atomic()) throw DomainError("measure sum is defined for atomic measures only");
    std::vector<Atom> out(a.atoms().begin(), a.atoms().end());
    for (const Atom& x : b.atoms()) {
        auto it = std::find_if(out.begin(), out.end(), [&](const Atom& y) { return y.location == x.location; });
        if (it != out.end()) {
            it->weight += x.weight;
        } else {
            out.push_back(x);
        }
    }
    return PositiveMeasure::atomic(std::move(out));
}

ThorinPair make_thorin_pair(double q, PositiveMeasure m) {
    if (!(q >= 0.0) || !std::isfinite(q)) throw DomainError("thorin pair: q must be finite and >= 0");
    if (is_thorin(m) != Decision::yes) throw DomainError("thorin pair: m is not a Thorin measure");
    return ThorinPair{q, std::move(m)};
}

QuadResult integrate_against(const PositiveMeasure& m, const RealFn& f, const QuadOptions& opts) {
    QuadResult r = std::visit(
        overloaded{
            [&](const family::Atomic& a) {
                QuadResult out;
                for (const Atom& at : a.atoms) out.value += at.weight * f(at.location);
                return out;
            },
            [&](const family::StableTail& s) {
                const double c = stable_norm(s.alpha);
                auto g = [&](double u) { return f(u) * c * std::pow(u - s.kappa, -s.alpha); };
                return numeric::integrate(g, s.kappa, kInf, opts, s.kappa > 0.0 ? 2.0 * s.kappa : 1.0);
            },
            [&](const family::StableTailDual& s) {
                const double c = stable_norm(s.alpha);
                auto g = [&](double u) { return f(u) * c * std::pow(u - s.kappa, s.alpha) / u; };
                return numeric::integrate(g, s.kappa, kInf, opts, s.kappa > 0.0 ? 2.0 * s.kappa : 1.0);
            },
            [&](const family::Window& w) { return numeric::integrate(f, w.lo, w.hi, opts); },
            [&](const family::FreePoissonScaled& fp) {
                const PositiveMeasure unit = PositiveMeasure::free_poisson(fp.scale, fp.alpha, fp.beta);
                const double r = std::sqrt(fp.beta);
                const double A = fp.alpha * (1.0 - r) * (1.0 - r), B = fp.alpha * (1.0 + r) * (1.0 + r);
                auto g = [&](double u) { return f(u) * unit.density(u); };
                return numeric::integrate(g, A, B, opts);
            },
            [&](const family::Grid& g) {
                const GridView view(g);
                QuadResult out;
                for (std::size_t i = 0; i < view.cells(); ++i) out = merge(out, view.cell_integral(i, f, opts));
                for (const Atom& at : g.atoms) out.value += at.weight * f(at.location);
                return out;
            },
        },
        m.variant());
    r.value *= m.factor();
    r.error *= m.factor();
    return r;
}

double moment(const PositiveMeasure& m, double s) {
    if (m.is_zero()) return 0.0;
    const double f = m.factor();
    if (const auto* st = std::get_if<family::StableTail>(&m.variant())) {
        if (!(s < st->alpha - 1.0) || st->kappa == 0.0) return kInf;
        const double a = st->alpha;
        return f * std::pow(st->kappa, s + 1.0 - a) * std::tgamma(a - 1.0 - s) / (std::tgamma(-s) * std::tgamma(a));
    }
    if (const auto* sd = std::get_if<family::StableTailDual>(&m.variant())) {
        if (!(s < -sd->alpha) || sd->kappa == 0.0) return kInf;
        const double a = sd->alpha;
        return f * std::pow(sd->kappa, s + a) * std::tgamma(1.0 + a) * std::tgamma(-s - a) /
               (std::tgamma(1.0 - s) * std::tgamma(a) * std::tgamma(1.0 - a));
    }
    if (const auto* w = std::get_if<family::Window>(&m.variant())) {
        if (w->lo == 0.0 && s <= -1.0) return kInf;
        if (s == -1.0) return f * std::log(w->hi / w->lo);
        return f * (std::pow(w->hi, s + 1.0) - std::pow(w->lo, s + 1.0)) / (s + 1.0);
    }
    QuadOptions opts;
    opts.rel_tol = 1e-12;
    const QuadResult r = integrate_against(m, [s](double u) { return std::pow(u, s); }, opts);
    switch (r.status) {
        case QuadStatus::converged: return r.value;
        case QuadStatus::divergent: return kInf;
        case QuadStatus::inconclusive: break;
    }
    std::ostringstream msg;
    msg << "moment of order " << s << " is inconclusive";
    throw InconclusiveError(msg.str());
}

Decision is_thorin(const PositiveMeasure& m) {
    if (m.is_zero() || m.is_atomic()) return Decision::yes;
    if (!std::holds_alternative<family::Grid>(m.variant())) return Decision::yes;
    auto f = [](double u) { return u <= 0.5 ? -std::log(u) : 1.0 / u; };
    const QuadResult r = integrate_against(m, f);
    switch (r.status) {
        case QuadStatus::converged: return Decision::yes;
        case QuadStatus::divergent: return Decision::no;
        case QuadStatus::inconclusive: break;
    }
    return Decision::inconclusive;
}

Complex stieltjes(const PositiveMeasure& m, Complex z) {
    if (m.is_zero()) return 0.0;
    if (z.imag() == 0.0) {
        const double x = z.real();
        if (m.is_atomic()) {
            for (const Atom& a : m.atoms()) {
                if (a.location == x) throw DomainError("stieltjes: z coincides with an atom");
            }
        } else if (x >= m.support_inf() && x <= m.support_sup()) {
            throw DomainError("stieltjes: real z inside the support");
        }
    }
    const double f = m.factor();
    return f * std::visit(
                   overloaded{
                       [&](const family::Atomic& a) { return atomic_g(a.atoms, z); },
                       [&](const family::StableTail& s) {
                           return Complex(-std::pow(Complex(s.kappa) - z, -s.alpha));
                       },
                       [&](const family::StableTailDual& s) { return stable_dual_g(s, z); },
                       [&](const family::Window& w) {
                           if (z.imag() == 0.0) {
                               return Complex(std::log((z.real() - w.lo) / (z.real() - w.hi)));
                           }
                           return std::log(z - w.lo) - std::log(z - w.hi);
                       },
                       [&](const family::FreePoissonScaled& fp) {
                           if (z == Complex(0.0)) return Complex(-moment(m, -1.0) / f);
                           return free_poisson_g(fp, z);
                       },
                       [&](const family::Grid& g) { return grid_g(g, z); },
                   },
                   m.variant());
}

Complex stieltjes_derivative(const PositiveMeasure& m, Complex z) {
    if (m.is_zero()) return 0.0;
    const double f = m.factor();
    if (const auto* a = std::get_if<family::Atomic>(&m.variant())) {
        Complex s = 0.0;
        for (const Atom& at : a->atoms) s -= at.weight / ((z - at.location) * (z - at.location));
        return s;
    }
    if (const auto* st = std::get_if<family::StableTail>(&m.variant())) {
        return -f * st->alpha * std::pow(Complex(st->kappa) - z, -st->alpha - 1.0);
    }
    if (const auto* w = std::get_if<family::Window>(&m.variant())) {
        return f * (1.0 / (z - w->lo) - 1.0 / (z - w->hi));
    }
    if (const auto* sd = std::get_if<family::StableTailDual>(&m.variant())) {
        if (std::abs(z) > 1e-4 * std::max(sd->kappa, 1e-300)) {
            const Complex w = std::pow(Complex(sd->kappa) - z, sd->alpha);
            const Complex dw = -sd->alpha * w / (Complex(sd->kappa) - z);
            return f * (dw * z - (w - std::pow(sd->kappa, sd->alpha))) / (z * z);
        }
    }
    return derivative_fd(m, z);
}

double exponential_moment(const PositiveMeasure& m, int k, double y) {
    if (k < 0) throw DomainError("exponential_moment: k must be >= 0");
    if (!(y > 0.0)) throw DomainError("exponential_moment: y must be positive");
    if (m.is_zero()) return 0.0;
    const double f = m.factor();
    if (const auto* a = std::get_if<family::Atomic>(&m.variant())) {
        double s = 0.0;
        for (const Atom& at : a->atoms) s += at.weight * std::pow(at.location, k) * std::exp(-at.location * y);
        return s;
    }
    if (const auto* st = std::get_if<family::StableTail>(&m.variant())) {
        const double al = st->alpha;
        double s = 0.0;
        for (int j = 0; j <= k; ++j) {
            s += binomial(k, j) * std::pow(st->kappa, k - j) * std::tgamma(j + 1.0 - al) * std::pow(y, al - 1.0 - j);
        }
        return f * stable_norm(al) * std::exp(-st->kappa * y) * s;
    }
    if (const auto* sd = std::get_if<family::StableTailDual>(&m.variant()); sd && k >= 1) {
        const double al = sd->alpha;
        double s = 0.0;
        for (int j = 0; j <= k - 1; ++j) {
            s += binomial(k - 1, j) * std::pow(sd->kappa, k - 1 - j) * std::tgamma(j + 1.0 + al) *
                 std::pow(y, -(j + 1.0 + al));
        }
        return f * stable_norm(al) * std::exp(-sd->kappa * y) * s;
    }
    QuadOptions opts;
    opts.rel_tol = 1e-12;
    const QuadResult r =
        integrate_against(m, [k, y](double u) { return std::pow(u, k) * std::exp(-u * y); }, opts);
    if (!r.converged()) throw NumericError("exponential_moment: quadrature failed");
    return r.value;
}

double thorin_phi(const PositiveMeasure& m, double y) { return exponential_moment(m, 0, y); }

double thorin_phi_prime(const PositiveMeasure& m, double y) { return -exponential_moment(m, 1, y); }

double levy_density(const ThorinPair& p, double y) {
    if (!(y > 0.0)) throw DomainError("levy_density: y must be positive");
    return thorin_phi(p.m, y) / y;
}

double laplace_exponent_fast(const ThorinPair& p, double lambda) {
    if (!(lambda >= 0.0)) throw DomainError("laplace_exponent: lambda must be >= 0");
    if (lambda == 0.0) return 0.0;
    double v = p.q * lambda;
    const PositiveMeasure& m = p.m;
    if (m.is_zero()) return v;
    const double f = m.factor();
    if (const auto* a = std::get_if<family::Atomic>(&m.variant())) {
        for (const Atom& at : a->atoms) v += at.weight * std::log1p(lambda / at.location);
        return v;
    }
    if (const auto* st = std::get_if<family::StableTail>(&m.variant())) {
        const double e = 1.0 - st->alpha;
        return v + f * (std::pow(lambda + st->kappa, e) - std::pow(st->kappa, e)) / e;
    }
    if (const auto* w = std::get_if<family::Window>(&m.variant())) {
        auto part = [lambda](double u) { return u == 0.0 ? 0.0 : u * std::log1p(lambda / u); };
        return v + f * (part(w->hi) - part(w->lo) + lambda * std::log((w->hi + lambda) / (w->lo + lambda)));
    }
    QuadOptions opts;
    opts.rel_tol = 1e-12;
    const QuadResult r = integrate_against(m, [lambda](double u) { return std::log1p(lambda / u); }, opts);
    if (!r.converged()) throw NumericError("laplace_exponent: quadrature failed");
    return v + r.value;
}

double laplace_exponent_levy(const ThorinPair& p, double lambda) {
    if (!(lambda >= 0.0)) throw DomainError("laplace_exponent: lambda must be >= 0");
    if (lambda == 0.0) return 0.0;
    double v = p.q * lambda;
    if (p.m.is_zero()) return v;
    QuadOptions opts;
    opts.rel_tol = 1e-9;
    auto g = [&](double y) { return -std::expm1(-lambda * y) * thorin_phi(p.m, y) / y; };
    const QuadResult r = numeric::integrate(g, 0.0, kInf, opts, 1.0 / lambda);
    if (!r.converged()) throw NumericError("laplace_exponent: Levy-measure quadrature failed");
    return v + r.value;
}

double laplace_exponent(const ThorinPair& p, double lambda) {
    const double a = laplace_exponent_fast(p, lambda);
    if (lambda == 0.0 || p.m.is_zero()) return a;
    const double b = laplace_exponent_levy(p, lambda);
    if (numeric::rel_diff(a, b) > 1e-6) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "laplace_exponent: routes disagree (" << a << " vs " << b << ")";
        throw InvariantError(msg.str());
    }
    return a;
}

}  // namespace cbci
