#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "cbci/measures.hpp"

namespace cbci {

enum class Method { closed_form, polynomial, inversion };

const char* to_string(Method m);

struct CorrespondenceReport {
    Method method = Method::closed_form;
    /// max over 100 log-spaced lambda in [1e-3, 1e3] of
    /// |(q + int m(du)/(lambda+u)) (a lambda + b + int lambda M(du)/(lambda+u)) - 1|.
    double identity_residual = 0.0;
    /// Grid points where the y -> 0 extrapolation did not settle.
    int inversion_failures = 0;

    /// Residual bound for the method: 1e-8 for exact routes, 1e-4 for inversion.
    double residual_limit() const { return method == Method::inversion ? 1e-4 : 1e-8; }
    bool residual_ok() const { return identity_residual < residual_limit(); }
};

struct ForwardResult {
    double a = 0.0;
    double b = 0.0;
    PositiveMeasure M;
    CorrespondenceReport report;
};

struct BackwardResult {
    ThorinPair pair;
    CorrespondenceReport report;
};

struct InversionOptions {
    double y0 = 1e-3;
    /// y_k = y0 2^-k, k = 0 .. levels-1 (at least 4 so two extrapolants exist).
    int levels = 7;
    /// Relative disagreement between successive extrapolants that flags a point.
    double flag_tol = 1e-5;
    /// y |Im G| settling above this value marks an atom.
    double atom_threshold = 1e-6;
    /// Nodes of the default x-grid when none is supplied.
    int grid_points = 401;
    /// Explicit x-grid for the absolutely continuous part (strictly increasing).
    std::vector<double> grid;
    /// Upper end used when the support is unbounded.
    double unbounded_cutoff = 0.0;
};

struct InversionResult {
    std::vector<double> x;
    std::vector<double> density;
    std::vector<double> atom_mass;
    std::vector<bool> converged;
    int failures = 0;

    /// Grid measure built from the nonnegative part of the recovered density,
    /// with `extra_atoms` added on top.
    PositiveMeasure measure(std::vector<Atom> extra_atoms = {}) const;
};

using ComplexFn = std::function<Complex(Complex)>;

/// y_k = y0 2^-k for k = 0 .. levels-1.
std::vector<double> y_sequence(double y0 = 1e-3, int levels = 7);

/// Stieltjes-Perron inversion: density -(1/pi) lim Im G(x + iy), quadratic
/// extrapolation in y through the last three samples.
InversionResult stieltjes_invert(const ComplexFn& G, std::span<const double> x,
                                 std::span<const double> y, const InversionOptions& opts = {});

/// (q, m) -> (a, b, M) with r = 0.
ForwardResult forward(const ThorinPair& pair, const InversionOptions& opts = {});

/// (a, b, M) -> (q, m) for ergodic input.
BackwardResult backward(double a, double b, const PositiveMeasure& M, const InversionOptions& opts = {});

/// Identity defect described in CorrespondenceReport.
double identity_residual(const ThorinPair& pair, double a, double b, const PositiveMeasure& M);

struct MMoments {
    double M0 = 0.0;
    double Mm1 = 0.0;
    double Mm2 = 0.0;
    double Mm3 = 0.0;
};

/// Moments of M for q = 0 from the negative moments of m.
MMoments m_moments_of_M(const PositiveMeasure& m);

struct SupportBracket {
    /// Which of the four (a, b) sign cases applies (1..4).
    int case_id = 0;
    double a = 0.0;
    double b = 0.0;
    double s_minus = 0.0;
    double s_plus = kInf;
    double closed_minus = 0.0;
    double closed_plus = kInf;
    /// Interval guaranteed to contain S(M).
    double lower = 0.0;
    double upper = kInf;
};

SupportBracket support_bracket(double q, double r, const PositiveMeasure& m);

}  // namespace cbci
