#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "cbci/mechanisms.hpp"

namespace cbci {

/// E(f_lambda, f_mu) for f_lambda(x) = e^{-lambda x}, split into symmetric and
/// antisymmetric parts.
struct BilinearValue {
    double full = 0.0;
    double symmetric = 0.0;
    double antisymmetric = 0.0;
};

/// E(f_lambda, f_mu) = <x f_{lambda+mu}>_delta * lambda * (R_0(lambda+mu) - R_0(lambda)).
/// Throws DomainError for a non-ergodic quadruplet.
BilinearValue bilinear_exp(const Quadruplet& q, double lambda, double mu);

/// Same value with the ergodicity check skipped (used in matrix assembly).
double bilinear_exp_full(const Quadruplet& q, double lambda, double mu);

std::vector<double> default_reversibility_grid();

/// max |E(f_l, f_m) - E(f_m, f_l)| over grid x grid.
double reversibility_residual(const Quadruplet& q, const std::vector<double>& grid);

/// The same maximum divided by max |E(f_l, f_m)| over the grid.
double reversibility_residual_relative(const Quadruplet& q, const std::vector<double>& grid);

struct SectorMatrices {
    Eigen::MatrixXd full;
    Eigen::MatrixXd symmetric;
};

SectorMatrices sector_matrices(const Quadruplet& q, const std::vector<double>& grid);

/// Largest singular value of S^{-1/2} A S^{-1/2} on the span of the exponentials
/// f_l, l in grid. A lower bound on the sector constant.
double empirical_sector(const Quadruplet& q, const std::vector<double>& grid);
double empirical_sector(const SectorMatrices& mats);

std::vector<double> default_sector_grid();

/// Both upper bounds on Sect for the Thorin pair (q = 0) with spectral measure M,
/// given as Sect values (1 + ...). +inf when the hypotheses fail.
struct ThorinUpper {
    double first = kInf;
    double second = kInf;
};

ThorinUpper upper_bound_thorin(const ThorinPair& pair, const PositiveMeasure& M);

struct QuadUpper {
    /// 1 + sqrt of the closed bound on (Sect - 1)^2 in terms of (a, b, M).
    double closed = kInf;
    /// sup of V'(0) - V'(y) over the log grid, and its analytic cap.
    std::optional<double> c2_grid;
    std::optional<double> c2;
    /// 1 + sqrt(2 C_2 / inf S(M)).
    std::optional<double> via_c2;
    /// 1 + sqrt(2 C_1 / (a inf S(M))) with C_1 = a C_2.
    std::optional<double> via_c1;
};

/// The C_2 route needs the Thorin measure m paired with (a, b, M); pass it when
/// known, otherwise it is derived when the backward map is exact.
QuadUpper upper_bound_quad(double a, double b, const PositiveMeasure& M,
                           const std::optional<PositiveMeasure>& m = std::nullopt);

/// Lower bound on Sect from the negative moments of m (delta = 1, q = 0).
double lower_bound_moments(const PositiveMeasure& m);

/// Two-function lower bound on Sect from E(f,f), E(g,g), E(f,g), E(g,f).
/// Returns 1 when the hypotheses fail; +inf in the degenerate case.
double lower_bound_general(double e_ff, double e_gg, double e_fg, double e_gf);

struct GGCMoments {
    double x1 = 0.0;
    double x2 = 0.0;
    double x3 = 0.0;
};

/// First three moments of the GGC with pair (0, m).
GGCMoments ggc_moments(const PositiveMeasure& m);

struct PolyForms {
    double e_ff = 0.0;
    double e_gg = 0.0;
    double e_fg = 0.0;
    double e_gf = 0.0;
};

/// E on f(x) = x, g(x) = x^2 for the quadruplet (a, b, M, 1) with stationary pair (0, m).
PolyForms polynomial_forms(double a, const PositiveMeasure& M, const PositiveMeasure& m);

struct SectorReport {
    double lower_moments = 1.0;
    double lower_general = 1.0;
    double upper_thorin_a = kInf;
    double upper_thorin_b = kInf;
    double upper_quad = kInf;
    double empirical = 1.0;
    double reversibility = 0.0;
    std::vector<double> basis;
    SectorMatrices matrices;

    double min_upper() const;
    double max_lower() const;
    bool sandwich_ok(double tol = 1e-6) const;
};

/// Full report for the quadruplet paired with the Thorin pair (q = 0 for the
/// Thorin-side bounds; they are left at their defaults otherwise).
SectorReport sector_report(const Quadruplet& q, const ThorinPair& pair,
                           const std::vector<double>& grid = default_sector_grid());

}  // namespace cbci
