#include "cbci/correspondence.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "cbci/error.hpp"
#include "cbci/mechanisms.hpp"

namespace cbci {

const char* to_string(Method m) {
    switch (m) {
        case Method::closed_form: return "closed-form";
        case Method::polynomial: return "polynomial";
        case Method::inversion: return "inversion";
    }
    return "?";
}

namespace {

double nudge_up(double x) { return std::nextafter(x, kInf); }
double nudge_down(double x) { return std::nextafter(x, -kInf); }

// First point beyond `from` (moving up) where f turns positive; doubles the step.
double expand_until_positive(const numeric::RealFn& f, double from, double step) {
    double x = from + step;
    for (int i = 0; i < 2000 && !(f(x) > 0.0); ++i) {
        step *= 2.0;
        x = from + step;
        if (!std::isfinite(x)) throw NumericError("root bracket expansion overflowed");
    }
    return x;
}

std::vector<double> chebyshev_grid(double lo, double hi, int n) {
    std::vector<double> x(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
        x[static_cast<std::size_t>(j)] =
            0.5 * (lo + hi) - 0.5 * (hi - lo) * std::cos(std::numbers::pi * j / (n - 1));
    }
    x.front() = lo;
    x.back() = hi;
    return x;
}

std::vector<double> continuous_grid(const PositiveMeasure& input, const InversionOptions& opts) {
    if (!opts.grid.empty()) return opts.grid;
    const double lo = input.support_inf();
    double hi = input.support_sup();
    if (std::isinf(hi)) {
        hi = opts.unbounded_cutoff > lo ? opts.unbounded_cutoff : lo + 1e3 * std::max(1.0, lo);
        // Geometric spacing away from the lower edge.
        std::vector<double> x;
        const double s = std::max(lo, 1.0);
        x.push_back(lo);
        for (double d : numeric::logspace(1e-6 * s, hi - lo, opts.grid_points - 1)) x.push_back(lo + d);
        return x;
    }
    return chebyshev_grid(lo, hi, opts.grid_points);
}

// Exact routes must satisfy the identity; the inversion route only reports it.
void check_report(const CorrespondenceReport& r) {
    if (r.method == Method::inversion) return;
    const double limit = 1e-8;
    if (!(r.identity_residual < limit)) {
        std::ostringstream msg;
        msg << "correspondence: identity residual " << r.identity_residual << " exceeds " << limit << " ("
            << to_string(r.method) << ")";
        throw InvariantError(msg.str());
    }
}

// Roots x of G_m(x) = q for atomic m, with the residues c = -1/(x G_m'(x)).
std::vector<Atom> forward_atomic(double q, std::span<const Atom> m) {
    auto G = [&](double x) {
        double s = 0.0;
        for (const Atom& a : m) s += a.weight / (x - a.location);
        return s - q;
    };
    std::vector<double> roots;
    for (std::size_t i = 0; i + 1 < m.size(); ++i) {
        roots.push_back(numeric::bracketed_root(G, nudge_up(m[i].location), nudge_down(m[i + 1].location)));
    }
    if (q > 0.0) {
        double mass = 0.0;
        for (const Atom& a : m) mass += a.weight;
        const double lo = nudge_up(m.back().location);
        double hi = m.back().location + mass / q;
        if (!(G(hi) <= 0.0)) hi = expand_until_positive([&](double x) { return -G(x); }, lo, hi - lo);
        roots.push_back(numeric::bracketed_root(G, lo, hi));
    }
    std::vector<Atom> out;
    for (std::size_t i = 0; i < roots.size(); ++i) {
        const double x = roots[i];
        const bool inside = x > m[i].location && (i + 1 < m.size() ? x < m[i + 1].location : true);
        if (!inside) throw NumericError("forward: interlacing violated");
        double d = 0.0;
        for (const Atom& a : m) d += a.weight / ((x - a.location) * (x - a.location));
        const double c = 1.0 / (x * d);
        if (!(c > 0.0) || !std::isfinite(c)) throw NumericError("forward: non-positive residue");
        out.push_back({c, x});
    }
    return out;
}

// Roots x of H(x) = a - b/x - G_M(x) for atomic M, with weights 1/(x H'(x)).
std::vector<Atom> backward_atomic(double a, double b, std::span<const Atom> M) {
    auto H = [&](double x) {
        double s = 0.0;
        for (const Atom& c : M) s += c.weight / (x - c.location);
        return a - b / x - s;
    };
    auto Hp = [&](double x) {
        double s = b / (x * x);
        for (const Atom& c : M) s += c.weight / ((x - c.location) * (x - c.location));
        return s;
    };
    std::vector<double> roots;
    if (b > 0.0) {
        // H(0+) = -inf, H(kappa_1-) = +inf.
        double lo = M.front().location * 1e-3;
        while (H(lo) > 0.0) lo *= 1e-3;
        roots.push_back(numeric::bracketed_root(H, lo, nudge_down(M.front().location)));
    }
    for (std::size_t i = 0; i + 1 < M.size(); ++i) {
        roots.push_back(numeric::bracketed_root(H, nudge_up(M[i].location), nudge_down(M[i + 1].location)));
    }
    if (a > 0.0) {
        const double lo = nudge_up(M.back().location);
        const double hi = expand_until_positive(H, M.back().location, std::max(M.back().location, b / a));
        roots.push_back(numeric::bracketed_root(H, lo, hi));
    }
    std::vector<Atom> out;
    for (double x : roots) {
        const double g = 1.0 / (x * Hp(x));
        if (!(g > 0.0) || !std::isfinite(g)) throw NumericError("backward: non-positive residue");
        out.push_back({g, x});
    }
    for (std::size_t i = 1; i < out.size(); ++i) {
        if (!(out[i].location > out[i - 1].location)) throw NumericError("backward: interlacing violated");
    }
    return out;
}

// Root of a monotone increasing real function on (lo, hi), if it changes sign there.
bool monotone_root(const numeric::RealFn& f, double lo, double hi, double& root) {
    const double flo = f(lo), fhi = f(hi);
    if (!(flo < 0.0 && fhi > 0.0)) return false;
    root = numeric::bracketed_root(f, lo, hi);
    return true;
}

}  // namespace

std::vector<double> y_sequence(double y0, int levels) {
    if (!(y0 > 0.0) || levels < 4) throw DomainError("y_sequence: need y0 > 0 and at least four levels");
    std::vector<double> y(static_cast<std::size_t>(levels));
    for (int k = 0; k < levels; ++k) y[static_cast<std::size_t>(k)] = std::ldexp(y0, -k);
    return y;
}

PositiveMeasure InversionResult::measure(std::vector<Atom> extra_atoms) const {
    std::vector<double> d(density.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = std::isfinite(density[i]) ? std::max(density[i], 0.0) : 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (atom_mass[i] > 0.0) extra_atoms.push_back({atom_mass[i], x[i]});
    }
    return PositiveMeasure::grid(x, std::move(d), std::move(extra_atoms));
}

InversionResult stieltjes_invert(const ComplexFn& G, std::span<const double> x, std::span<const double> y,
                                 const InversionOptions& opts) {
    if (y.size() < 4) throw DomainError("stieltjes_invert: need at least four y values");
    for (std::size_t k = 1; k < y.size(); ++k) {
        if (!(y[k] < y[k - 1]) || !(y[k] > 0.0)) throw DomainError("stieltjes_invert: y must decrease to 0");
    }
    InversionResult out;
    const std::size_t n = y.size();
    std::vector<double> v(n), w(n);
    for (double xi : x) {
        for (std::size_t k = 0; k < n; ++k) {
            const double im = -G(Complex(xi, y[k])).imag();
            v[k] = im / std::numbers::pi;
            w[k] = y[k] * im;
        }
        double mass = 0.0;
        const double w_last = w[n - 1], w_prev = w[n - 2];
        if (w_last > opts.atom_threshold && std::abs(w_last - w_prev) <= 1e-2 * w_last) {
            mass = numeric::extrapolate_to_zero(y, w);
            for (std::size_t k = 0; k < n; ++k) v[k] -= mass / (std::numbers::pi * y[k]);
        }
        const double d = numeric::extrapolate_to_zero(y, v);
        const double d_prev = numeric::extrapolate_to_zero(y.first(n - 1), std::span<const double>(v).first(n - 1));
        const bool ok = std::isfinite(d) && std::abs(d - d_prev) <= opts.flag_tol * std::abs(d) + 1e-12;
        out.x.push_back(xi);
        out.density.push_back(d);
        out.atom_mass.push_back(mass);
        out.converged.push_back(ok);
        if (!ok) ++out.failures;
    }
    return out;
}

double identity_residual(const ThorinPair& pair, double a, double b, const PositiveMeasure& M) {
    double worst = 0.0;
    for (double lam : numeric::logspace(1e-3, 1e3, 100)) {
        const double lhs = pair.q + mechanism_g(pair.m, lam);
        const double den = a * lam + b + lam * mechanism_g(M, lam);
        worst = std::max(worst, std::abs(lhs * den - 1.0));
    }
    return worst;
}

ForwardResult forward(const ThorinPair& pair, const InversionOptions& opts) {
    const double q = pair.q;
    const PositiveMeasure& m = pair.m;
    if (m.is_zero()) throw DomainError("forward: m must be non-zero");
    if (!(q >= 0.0)) throw DomainError("forward: q must be >= 0");
    ForwardResult r;
    const double m0 = moment(m, 0.0);
    r.a = q > 0.0 ? 0.0 : 1.0 / m0;
    r.b = 1.0 / (q + moment(m, -1.0));

    if (m.is_atomic()) {
        r.report.method = m.is_degenerate() && q == 0.0 ? Method::closed_form : Method::polynomial;
        r.M = PositiveMeasure::atomic(forward_atomic(q, m.atoms()));
        // Total mass of M against its closed form.
        const double expected = q > 0.0 ? 1.0 / q - r.b : moment(m, 1.0) / (m0 * m0) - r.b;
        const double got = moment(r.M, 0.0);
        if (std::abs(got - expected) > 1e-8 * std::max(1.0, std::abs(expected))) {
            std::ostringstream msg;
            msg.precision(17);
            msg << "forward: total mass of M " << got << " disagrees with closed form " << expected;
            throw InvariantError(msg.str());
        }
    } else if (const auto* st = std::get_if<family::StableTail>(&m.variant()); st && q == 0.0) {
        r.report.method = Method::closed_form;
        r.M = PositiveMeasure::stable_tail_dual(st->alpha, st->kappa).scaled(1.0 / m.factor());
    } else {
        r.report.method = Method::inversion;
        auto GM = [&](Complex z) { return r.a - r.b / z - 1.0 / (z * (stieltjes(m, z) - q)); };
        const std::vector<double> x = continuous_grid(m, opts);
        const InversionResult inv = stieltjes_invert(GM, x, y_sequence(opts.y0, opts.levels), opts);
        std::vector<Atom> poles;
        if (q > 0.0) {
            // G_m(x) = q beyond the support: an atom of M.
            const double sup = m.support_sup();
            if (std::isfinite(sup) && std::isfinite(m0)) {
                auto f = [&](double t) { return q - stieltjes(m, Complex(t, 0.0)).real(); };
                double root = 0.0;
                const double lo = sup + 1e-12 * std::max(1.0, sup);
                if (monotone_root(f, lo, sup + m0 / q + 1e-12 * std::max(1.0, sup), root)) {
                    const double mass = -1.0 / (root * stieltjes_derivative(m, Complex(root, 0.0)).real());
                    if (!(mass > 0.0)) throw NumericError("forward: non-positive pole mass");
                    poles.push_back({mass, root});
                }
            }
        }
        r.M = inv.measure(std::move(poles));
        r.report.inversion_failures = inv.failures;
    }
    r.report.identity_residual = identity_residual(pair, r.a, r.b, r.M);
    check_report(r.report);
    return r;
}

BackwardResult backward(double a, double b, const PositiveMeasure& M, const InversionOptions& opts) {
    const Quadruplet quad = make_quadruplet(a, b, M, 1.0);
    const Decision erg = is_ergodic(quad);
    if (erg != Decision::yes) {
        throw DomainError(std::string("backward: input is not ergodic (") + to_string(erg) + ")");
    }
    BackwardResult r;
    const double M0 = moment(M, 0.0);
    const double q = a > 0.0 ? 0.0 : 1.0 / (b + M0);

    if (M.is_zero()) {
        r.report.method = Method::closed_form;
        r.pair = a > 0.0 ? ThorinPair{0.0, PositiveMeasure::atomic({{1.0 / a, b / a}})}
                         : ThorinPair{1.0 / b, PositiveMeasure::zero()};
    } else if (M.is_atomic()) {
        r.report.method = Method::polynomial;
        r.pair = ThorinPair{q, PositiveMeasure::atomic(backward_atomic(a, b, M.atoms()))};
    } else if (const auto* sd = std::get_if<family::StableTailDual>(&M.variant());
               sd && a == 0.0 && std::abs(b - M.factor() * std::pow(sd->kappa, sd->alpha)) <= 1e-14 * std::max(b, 1.0)) {
        r.report.method = Method::closed_form;
        r.pair = ThorinPair{0.0, PositiveMeasure::stable_tail(sd->alpha, sd->kappa).scaled(1.0 / M.factor())};
    } else {
        r.report.method = Method::inversion;
        auto H = [&](Complex z) { return a - b / z - stieltjes(M, z); };
        auto Gm = [&](Complex z) { return q + 1.0 / (z * H(z)); };
        const std::vector<double> x = continuous_grid(M, opts);
        const InversionResult inv = stieltjes_invert(Gm, x, y_sequence(opts.y0, opts.levels), opts);
        // Isolated poles: zeros of the increasing function H off the support.
        std::vector<Atom> poles;
        auto Hr = [&](double t) { return H(Complex(t, 0.0)).real(); };
        auto add_pole = [&](double x0) {
            const double hp = b / (x0 * x0) - stieltjes_derivative(M, Complex(x0, 0.0)).real();
            const double mass = 1.0 / (x0 * hp);
            if (!(mass > 0.0) || !std::isfinite(mass)) throw NumericError("backward: non-positive pole mass");
            poles.push_back({mass, x0});
        };
        const double inf = M.support_inf(), sup = M.support_sup();
        double root = 0.0;
        if (inf > 0.0) {
            const double hi = inf * (1.0 - 1e-12);
            double lo = inf * 1e-3;
            while (b > 0.0 && Hr(lo) > 0.0 && lo > 1e-300) lo *= 1e-3;
            if (monotone_root(Hr, lo, hi, root)) add_pole(root);
        }
        if (std::isfinite(sup) && a > 0.0) {
            const double lo = sup + 1e-12 * std::max(1.0, sup);
            if (Hr(lo) < 0.0) {
                const double hi = expand_until_positive(Hr, sup, std::max(sup, b / a));
                if (!monotone_root(Hr, lo, hi, root)) {
                    throw NumericError("backward: pole search failed beyond the support");
                }
                add_pole(root);
            }
        }
        r.pair = ThorinPair{q, inv.measure(std::move(poles))};
        r.report.inversion_failures = inv.failures;
    }
    r.report.identity_residual = identity_residual(r.pair, a, b, M);
    check_report(r.report);
    return r;
}

MMoments m_moments_of_M(const PositiveMeasure& m) {
    if (m.is_zero()) throw DomainError("m_moments_of_M: m must be non-zero");
    if (m.is_degenerate()) return {};
    const double m1 = moment(m, 1.0), m0 = moment(m, 0.0);
    const double n1 = moment(m, -1.0), n2 = moment(m, -2.0), n3 = moment(m, -3.0), n4 = moment(m, -4.0);
    MMoments r;
    r.M0 = std::isinf(m0) ? kInf : m1 / (m0 * m0) - 1.0 / n1;
    r.Mm1 = std::isinf(n2) ? kInf : n2 / (n1 * n1) - 1.0 / m0;
    r.Mm2 = std::isinf(n3) ? kInf : (n1 * n3 - n2 * n2) / (n1 * n1 * n1);
    r.Mm3 = std::isinf(n4) ? kInf : (n1 * n1 * n4 - 2.0 * n1 * n2 * n3 + n2 * n2 * n2) / (n1 * n1 * n1 * n1);
    return r;
}

SupportBracket support_bracket(double q, double r, const PositiveMeasure& m) {
    if (m.is_zero()) throw DomainError("support_bracket: m must be non-zero");
    if (!(q >= 0.0) || !(r >= 0.0)) throw DomainError("support_bracket: q and r must be >= 0");
    SupportBracket s;
    const double m0 = moment(m, 0.0);
    s.a = q > 0.0 ? 0.0 : 1.0 / (r + m0);
    s.b = r > 0.0 ? 0.0 : 1.0 / (q + moment(m, -1.0));
    const double inf = m.support_inf(), sup = m.support_sup();

    auto h = [&](double t) { return t * (q - stieltjes(m, Complex(t, 0.0)).real()) - r; };
    if (r == 0.0 || inf == 0.0) {
        s.s_minus = 0.0;
    } else {
        const double hi = inf * (1.0 - 1e-15);
        s.s_minus = h(hi) <= 0.0 ? inf : numeric::bracketed_root(h, 0.0, hi);
    }
    if (q == 0.0 || std::isinf(sup)) {
        s.s_plus = kInf;
    } else {
        const double lo = sup * (1.0 + 1e-15) + 1e-300;
        if (h(lo) >= 0.0) {
            s.s_plus = sup;
        } else {
            const double hi = expand_until_positive(h, sup, std::max(sup, (r + std::min(m0, 1e300)) / q));
            s.s_plus = numeric::bracketed_root(h, lo, hi);
        }
    }
    // Closed-form estimates from the quadratic equations.
    if (q > 0.0 && std::isfinite(m0)) {
        const double p = r + m0 + q * inf;
        s.closed_minus = (p - std::sqrt(std::max(p * p - 4.0 * q * r * inf, 0.0))) / (2.0 * q);
        const double u = r + m0 + q * sup;
        s.closed_plus = (u + std::sqrt(std::max(u * u - 4.0 * q * r * sup, 0.0))) / (2.0 * q);
    } else {
        s.closed_minus = std::isfinite(m0) ? r * inf / (r + m0) : 0.0;
        s.closed_plus = kInf;
    }
    if (s.a == 0.0 && s.b == 0.0) {
        s.case_id = 1;
        s.lower = s.s_minus;
        s.upper = s.s_plus;
    } else if (s.a > 0.0 && s.b == 0.0) {
        s.case_id = 2;
        s.lower = s.s_minus;
        s.upper = sup;
    } else if (s.a == 0.0) {
        s.case_id = 3;
        s.lower = inf;
        s.upper = s.s_plus;
    } else {
        s.case_id = 4;
        s.lower = inf;
        s.upper = sup;
    }
    return s;
}

}  // namespace cbci
