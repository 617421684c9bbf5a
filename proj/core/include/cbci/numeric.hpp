#pragma once

#include <complex>
#include <functional>
#include <limits>
#include <span>
#include <vector>

namespace cbci {

using Complex = std::complex<double>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Three-valued answer for decisions that rest on quadrature.
enum class Decision { yes, no, inconclusive };

const char* to_string(Decision d);

namespace numeric {

using RealFn = std::function<double(double)>;

enum class QuadStatus { converged, divergent, inconclusive };

struct QuadOptions {
    double rel_tol = 1e-10;
    double abs_tol = 1e-300;
    int max_shells = 400;
    /// A tail is declared divergent once this many consecutive dyadic shells
    /// fail to shrink below `divergence_ratio` times their predecessor.
    int divergence_shells = 10;
    double divergence_ratio = 0.99;
};

struct QuadResult {
    double value = 0.0;
    double error = 0.0;
    QuadStatus status = QuadStatus::converged;

    bool converged() const { return status == QuadStatus::converged; }
};

/// Fixed 10-point Gauss-Legendre on [a, b].
template <class F>
double gauss_legendre10(F&& f, double a, double b) {
    static constexpr double node[5] = {0.1488743389816312, 0.4333953941292472, 0.6794095682990244,
                                       0.8650633666889845, 0.9739065285171717};
    static constexpr double weight[5] = {0.2955242247147529, 0.2692667193099963, 0.2190863625159820,
                                         0.1494513491505806, 0.0666713443086881};
    const double c = 0.5 * (a + b), r = 0.5 * (b - a);
    double acc = 0.0;
    for (int k = 0; k < 5; ++k) acc += weight[k] * (f(c - r * node[k]) + f(c + r * node[k]));
    return r * acc;
}

/// Adaptive 15-point Gauss-Kronrod on a finite interval with smooth integrand.
double gauss_kronrod(const RealFn& f, double a, double b, double rel_tol = 1e-12,
                     double* error = nullptr, unsigned max_depth = 12);

/// Integral of `f` over (lo, hi), 0 <= lo < hi <= inf, for integrands that may
/// be singular at either endpoint. Each end is approached through dyadic shells
/// so that non-integrable endpoint behaviour is reported as `divergent` rather
/// than silently truncated. `split` (optional, inside (lo, hi)) is the point
/// where the two tails meet; for hi = inf it also sets the scale of the
/// outward shells.
QuadResult integrate(const RealFn& f, double lo, double hi, const QuadOptions& opts = {},
                     double split = std::numeric_limits<double>::quiet_NaN());

/// Same, returning the value or throwing (divergent -> +inf is returned only
/// when `allow_infinite` is set; inconclusive always throws).
double integrate_or_throw(const RealFn& f, double lo, double hi, bool allow_infinite,
                          const QuadOptions& opts = {},
                          double split = std::numeric_limits<double>::quiet_NaN());

/// Root of a continuous function with f(lo) and f(hi) of opposite sign.
/// Bisection to the floating-point limit followed by one secant polish.
double bracketed_root(const RealFn& f, double lo, double hi);

/// Value at y = 0 of the quadratic through the last three (y, v) pairs.
double extrapolate_to_zero(std::span<const double> y, std::span<const double> v);

/// Logarithmically spaced points, inclusive of both ends.
std::vector<double> logspace(double lo, double hi, int n);

/// Linearly spaced points, inclusive of both ends.
std::vector<double> linspace(double lo, double hi, int n);

/// Relative difference |a - b| / max(|a|, |b|, floor).
double rel_diff(double a, double b, double floor = 1e-300);

}  // namespace numeric
}  // namespace cbci
