#pragma once

#include "cbci/measures.hpp"

namespace cbci {

/// CBCI generator data (a, b, M, delta); the jump measure n is derived from M.
struct Quadruplet {
    double a = 0.0;
    double b = 0.0;
    PositiveMeasure M;
    double delta = 1.0;
};

/// Validates a, b >= 0, delta > 0 and rejects a = b = 0 with M zero.
Quadruplet make_quadruplet(double a, double b, PositiveMeasure M, double delta = 1.0);

/// g_M(lambda) = int M(du) / (lambda + u); g_M(0) = M-bar_{-1}.
double mechanism_g(const PositiveMeasure& M, double lambda);

/// R_0(lambda) = -R(lambda) / lambda = a lambda + b + lambda g_M(lambda).
double branching_R0(const Quadruplet& q, double lambda);

/// R(lambda) = -a lambda^2 - b lambda - lambda^2 g_M(lambda).
double branching_R(const Quadruplet& q, double lambda);

struct JumpDensity {
    double n = 0.0;       ///< int u^2 e^{-uy} M(du)
    double n_tail = 0.0;  ///< int u e^{-uy} M(du), density of n([y, inf)) dy
};

JumpDensity jump_density(const Quadruplet& q, double y);

/// c = M-bar_0 (mean jump drift); may be +inf.
double jump_mean(const Quadruplet& q);
/// rho = M-bar_1 (total jump rate); may be +inf.
double jump_rate(const Quadruplet& q);

/// Phi(lambda) = int_0^lambda du / R_0(u); +inf when the integral diverges at 0.
/// The stationary law has Laplace exponent delta * Phi.
double phi(const Quadruplet& q, double lambda);

/// Phi'(lambda) = 1 / R_0(lambda).
double phi_prime(const Quadruplet& q, double lambda);

struct PsiSolution {
    double t = 0.0;
    double lambda = 0.0;
    double psi = 0.0;
    /// int_0^t psi(s, lambda) ds
    double integral = 0.0;
    /// |t - int_psi^lambda du / (u R_0(u))|
    double residual = 0.0;
};

struct PsiOptions {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double residual_tol = 1e-8;
};

/// Solves d psi / dt = R(psi), psi(0) = lambda, with the time integral of psi
/// carried along. Throws NumericError when the residual or the a-priori bracket
/// lambda e^{-t R_0(lambda)} <= psi <= lambda e^{-t R_0(psi)} fails.
PsiSolution psi(const Quadruplet& q, double t, double lambda, const PsiOptions& opts = {});

/// E_x[e^{-lambda X_t}] = exp(-x psi(t, lambda) - delta int_0^t psi(s, lambda) ds).
double transient_laplace(const Quadruplet& q, double t, double lambda, double x);

/// exp(-delta Phi(lambda)).
double stationary_laplace(const Quadruplet& q, double lambda);

struct SupportInfimum {
    double value = 0.0;
    /// Set when a = 0 and c = inf: the value 0 is reported without a full
    /// description of the support in that regime.
    bool flagged = false;
};

/// Infimum of the support of X_t started at x. t may be +inf (stationary value).
SupportInfimum support_infimum(const Quadruplet& q, double t, double x);

Decision is_ergodic(const Quadruplet& q);

/// Partial sum over N >= 1 of the Neumann series for the Levy density of the
/// stationary law when a = 0 and b + c < inf (atomic M only).
double levy_series_a0(const Quadruplet& q, double y, int N);

}  // namespace cbci
