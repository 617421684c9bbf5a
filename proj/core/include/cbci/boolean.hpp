#pragma once

#include <vector>

#include "cbci/correspondence.hpp"

namespace cbci {

struct FreePoissonParams {
    double alpha = 1.0;
    double beta = 1.0;
};

/// K_m(z) = z - 1 / G_m(z) for a probability measure m on (0, inf).
Complex boolean_cumulant(const PositiveMeasure& m, Complex z);

/// Twenty fixed points r e^{i theta} off the positive half-line.
std::vector<Complex> boolean_test_points();

/// m1 (+) m2 through the quadruplets (1, b1 + b2, M1 + M2). Atomic inputs only.
PositiveMeasure boolean_convolve(const PositiveMeasure& m1, const PositiveMeasure& m2);

/// m^{(+)t} through (1, t b, t M). Atomic input only.
PositiveMeasure boolean_power(const PositiveMeasure& m, double t);

/// max |K_{m1 (+) m2} - K_{m1} - K_{m2}| over the test points.
double k_additivity_residual(const PositiveMeasure& m1, const PositiveMeasure& m2,
                             const PositiveMeasure& sum);

/// max |K_{m^t} - t K_m| over the test points.
double k_homogeneity_residual(const PositiveMeasure& m, double t, const PositiveMeasure& power);

/// Density of the absolutely continuous part of P_{alpha,beta}.
double free_poisson_density(const FreePoissonParams& p, double u);

struct FixedPoint {
    /// 1: scaled free Poisson law (finite mass); 2: the infinite-mass branch.
    int branch = 1;
    ThorinPair pair;
    FreePoissonParams params;
};

/// The measure m with M = m for the given (q, a, b).
FixedPoint fixed_point_measure(double q, double a, double b);

/// max |G_m(z) - q - 1 / (a z - b - z G_m(z))| over the test points.
double fixed_point_residual(const FixedPoint& fp, double a, double b);

}  // namespace cbci
