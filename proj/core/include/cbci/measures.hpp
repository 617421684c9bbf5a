#pragma once

#include <span>
#include <string>
#include <variant>
#include <vector>

#include "cbci/numeric.hpp"

namespace cbci {

struct Atom {
    double weight = 0.0;
    double location = 0.0;
};

namespace family {

/// Finite sum of point masses; an empty list is the zero measure.
struct Atomic {
    std::vector<Atom> atoms;
};

/// (u - kappa)^(-alpha) / (Gamma(alpha) Gamma(1 - alpha)) on (kappa, inf).
struct StableTail {
    double alpha = 0.5;
    double kappa = 0.0;
};

/// u^(-1) (u - kappa)^alpha / (Gamma(alpha) Gamma(1 - alpha)) on (kappa, inf).
/// This is the spectral jump measure paired with StableTail.
struct StableTailDual {
    double alpha = 0.5;
    double kappa = 0.0;
};

/// Lebesgue measure restricted to (lo, hi).
struct Window {
    double lo = 0.0;
    double hi = 1.0;
};

/// scale * P_{alpha,beta}, the free Poisson law; beta >= 1 so there is no atom at 0.
struct FreePoissonScaled {
    double scale = 1.0;
    double alpha = 1.0;
    double beta = 1.0;
};

/// Tabulated density, interpolated linearly in (log u, log density) (plainly
/// linearly when a node value or abscissa is 0)
/// and zero outside [u.front(), u.back()]. An end node may carry +inf to mark an
/// endpoint singularity; the adjacent cell is then modelled by the power law
/// through the two nearest finite nodes. Optional atoms are added on top.
struct Grid {
    std::vector<double> u;
    std::vector<double> density;
    std::vector<Atom> atoms;
};

}  // namespace family

class PositiveMeasure {
  public:
    using Variant = std::variant<family::Atomic, family::StableTail, family::StableTailDual,
                                 family::Window, family::FreePoissonScaled, family::Grid>;

    PositiveMeasure() = default;

    static PositiveMeasure zero();
    /// Atoms are sorted by location; duplicated locations are rejected.
    static PositiveMeasure atomic(std::vector<Atom> atoms);
    static PositiveMeasure stable_tail(double alpha, double kappa);
    static PositiveMeasure stable_tail_dual(double alpha, double kappa);
    static PositiveMeasure window(double lo, double hi);
    static PositiveMeasure free_poisson(double scale, double alpha, double beta);
    static PositiveMeasure grid(std::vector<double> u, std::vector<double> density,
                                std::vector<Atom> atoms = {});

    const Variant& variant() const { return v_; }
    /// Overall multiplier applied to the family (always 1 for Atomic).
    double factor() const { return factor_; }
    std::string kind() const;

    bool is_zero() const;
    bool is_atomic() const { return std::holds_alternative<family::Atomic>(v_); }
    /// Single atom.
    bool is_degenerate() const;
    /// Atom list; empty for non-atomic families.
    std::span<const Atom> atoms() const;

    double support_inf() const;
    double support_sup() const;

    /// Density of the absolutely continuous part at u (0 for Atomic).
    double density(double u) const;

    /// t times this measure, t > 0.
    PositiveMeasure scaled(double t) const;

  private:
    explicit PositiveMeasure(Variant v, double factor = 1.0) : v_(std::move(v)), factor_(factor) {}

    Variant v_ = family::Atomic{};
    double factor_ = 1.0;
};

/// Sum of two atomic measures (atoms at equal locations are merged).
PositiveMeasure operator+(const PositiveMeasure& a, const PositiveMeasure& b);

struct ThorinPair {
    double q = 0.0;
    PositiveMeasure m;
};

/// Validates q >= 0 and the Thorin condition (inconclusive counts as failure).
ThorinPair make_thorin_pair(double q, PositiveMeasure m);

/// factor * int f dm, with endpoint singularities resolved by dyadic shells.
numeric::QuadResult integrate_against(const PositiveMeasure& m, const numeric::RealFn& f,
                                      const numeric::QuadOptions& opts = {});

/// Integral of u^s against m. Returns +inf for divergent integrals and throws
/// InconclusiveError when quadrature cannot decide.
double moment(const PositiveMeasure& m, double s);

/// int_(0,1/2] |log u| m(du) + int_(1/2,inf) u^-1 m(du) < inf.
Decision is_thorin(const PositiveMeasure& m);

/// G_m(z) = int m(du) / (z - u), principal branches.
Complex stieltjes(const PositiveMeasure& m, Complex z);

/// G_m'(z) = -int m(du) / (z - u)^2.
Complex stieltjes_derivative(const PositiveMeasure& m, Complex z);

/// int u^k e^{-u y} m(du) for y > 0 and integer k >= 0.
double exponential_moment(const PositiveMeasure& m, int k, double y);

/// phi(y) = int e^{-uy} m(du).
double thorin_phi(const PositiveMeasure& m, double y);
/// phi'(y).
double thorin_phi_prime(const PositiveMeasure& m, double y);

/// Density of the Levy measure of the GGC, phi(y) / y.
double levy_density(const ThorinPair& p, double y);

/// q lambda + int log(1 + lambda/u) m(du), checked against the Levy-measure
/// route int (1 - e^{-lambda y}) phi(y) dy / y.
double laplace_exponent(const ThorinPair& p, double lambda);

/// Log form only (no cross-check); used in inner loops.
double laplace_exponent_fast(const ThorinPair& p, double lambda);

/// Levy-measure route only.
double laplace_exponent_levy(const ThorinPair& p, double lambda);

}  // namespace cbci
