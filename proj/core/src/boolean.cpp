#include "cbci/boolean.hpp"

#include <cmath>
#include <numbers>

#include "cbci/error.hpp"

namespace cbci {

namespace {

void require_probability(const PositiveMeasure& m, const char* who) {
    if (m.is_zero()) throw DomainError(std::string(who) + ": zero measure");
    const double mass = moment(m, 0.0);
    if (!(std::abs(mass - 1.0) <= 1e-9)) {
        throw DomainError(std::string(who) + ": measure must have total mass 1");
    }
    if (!(m.support_inf() > 0.0)) {
        throw DomainError(std::string(who) + ": support must lie in (0, inf)");
    }
}

struct Normalized {
    double b = 0.0;
    PositiveMeasure M;
};

Normalized to_quadruplet(const PositiveMeasure& m, const char* who) {
    require_probability(m, who);
    if (!m.is_atomic()) throw DomainError(std::string(who) + ": atomic measures only");
    const ForwardResult f = forward(ThorinPair{0.0, m});
    if (!(std::abs(f.a - 1.0) <= 1e-9)) {
        throw InvariantError(std::string(who) + ": forward map did not give a = 1");
    }
    return {f.b, f.M};
}

PositiveMeasure from_quadruplet(double b, const PositiveMeasure& M) {
    const BackwardResult r = backward(1.0, b, M);
    if (r.pair.q != 0.0) throw InvariantError("boolean: backward map gave q != 0");
    return r.pair.m;
}

}  // namespace

Complex boolean_cumulant(const PositiveMeasure& m, Complex z) {
    require_probability(m, "boolean_cumulant");
    if (z.imag() == 0.0 && z.real() >= 0.0) {
        throw DomainError("boolean_cumulant: z must lie off [0, inf)");
    }
    return z - 1.0 / stieltjes(m, z);
}

std::vector<Complex> boolean_test_points() {
    std::vector<Complex> out;
    const double pi = std::numbers::pi;
    for (double r : {1.0, 2.0, 5.0, 10.0}) {
        for (double th : {pi / 3.0, pi / 2.0, 2.0 * pi / 3.0, pi, 3.0 * pi / 2.0}) {
            out.push_back(std::polar(r, th));
        }
    }
    return out;
}

PositiveMeasure boolean_convolve(const PositiveMeasure& m1, const PositiveMeasure& m2) {
    const Normalized n1 = to_quadruplet(m1, "boolean_convolve");
    const Normalized n2 = to_quadruplet(m2, "boolean_convolve");
    return from_quadruplet(n1.b + n2.b, n1.M + n2.M);
}

PositiveMeasure boolean_power(const PositiveMeasure& m, double t) {
    if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("boolean_power: t must be positive");
    const Normalized n = to_quadruplet(m, "boolean_power");
    return from_quadruplet(t * n.b, n.M.is_zero() ? n.M : n.M.scaled(t));
}

double k_additivity_residual(const PositiveMeasure& m1, const PositiveMeasure& m2,
                             const PositiveMeasure& sum) {
    double worst = 0.0;
    for (Complex z : boolean_test_points()) {
        const Complex d = boolean_cumulant(sum, z) - boolean_cumulant(m1, z) - boolean_cumulant(m2, z);
        worst = std::max(worst, std::abs(d));
    }
    return worst;
}

double k_homogeneity_residual(const PositiveMeasure& m, double t, const PositiveMeasure& power) {
    double worst = 0.0;
    for (Complex z : boolean_test_points()) {
        worst = std::max(worst, std::abs(boolean_cumulant(power, z) - t * boolean_cumulant(m, z)));
    }
    return worst;
}

double free_poisson_density(const FreePoissonParams& p, double u) {
    if (!(p.alpha > 0.0) || !(p.beta >= 0.0)) throw DomainError("free_poisson_density: need alpha > 0, beta >= 0");
    const double r = std::sqrt(p.beta);
    const double lo = p.alpha * (1.0 - r) * (1.0 - r);
    const double hi = p.alpha * (1.0 + r) * (1.0 + r);
    if (!(u > 0.0) || u < lo || u > hi) return 0.0;
    const double dens = std::sqrt(std::max(0.0, (u - lo) * (hi - u))) / (2.0 * std::numbers::pi * p.alpha * u);
    return p.beta < 1.0 ? p.beta * dens : dens;
}

FixedPoint fixed_point_measure(double q, double a, double b) {
    if (!(q >= 0.0) || !(a >= 0.0) || !(b >= 0.0)) {
        throw DomainError("fixed_point_measure: q, a, b must be >= 0");
    }
    if (q > 0.0 && a > 0.0) throw DomainError("fixed_point_measure: q > 0 forces a = 0");
    FixedPoint fp;
    if (q == 0.0 && a == 0.0) {
        fp.branch = 2;
        const double kappa = 0.25 * b * b;
        fp.pair = ThorinPair{0.0, PositiveMeasure::stable_tail_dual(0.5, kappa)};
        return fp;
    }
    const double s = 1.0 - b * q;
    if (!(s > 0.0)) throw DomainError("fixed_point_measure: needs 1 - b q > 0");
    const double aq = a + q;
    fp.params = {s / (aq * aq), (1.0 + a * b) / s};
    fp.pair = ThorinPair{q, PositiveMeasure::free_poisson(s / aq, fp.params.alpha, fp.params.beta)};
    return fp;
}

double fixed_point_residual(const FixedPoint& fp, double a, double b) {
    double worst = 0.0;
    for (Complex z : boolean_test_points()) {
        const Complex G = stieltjes(fp.pair.m, z);
        const Complex d = G - fp.pair.q - 1.0 / (a * z - b - z * G);
        worst = std::max(worst, std::abs(d));
    }
    return worst;
}

}  // namespace cbci
