#include "cbci/sector.hpp"

#include <algorithm>
#include <cmath>

#include "cbci/correspondence.hpp"
#include "cbci/error.hpp"

namespace cbci {

namespace {

void require_ergodic(const Quadruplet& q) {
    if (is_ergodic(q) != Decision::yes) {
        throw DomainError("sector: quadruplet is not ergodic");
    }
}

// R_0(lambda + mu) - R_0(lambda), without the cancellation for atomic M.
double r0_increment(const Quadruplet& q, double lambda, double mu) {
    const double s = lambda + mu;
    double jump = 0.0;
    if (q.M.is_atomic()) {
        for (const Atom& at : q.M.atoms()) {
            const double u = at.location;
            jump += at.weight * u * mu / ((lambda + u) * (s + u));
        }
    } else if (!q.M.is_zero()) {
        jump = s * mechanism_g(q.M, s) - lambda * mechanism_g(q.M, lambda);
    }
    return q.a * mu + jump;
}

// Weighted mean of u under e^{-uy} m(du).
double tilted_mean(const PositiveMeasure& m, double y) {
    if (m.is_atomic()) {
        const double u0 = m.support_inf();
        double num = 0.0;
        double den = 0.0;
        for (const Atom& at : m.atoms()) {
            const double w = at.weight * std::exp(-(at.location - u0) * y);
            num += w * at.location;
            den += w;
        }
        return num / den;
    }
    return exponential_moment(m, 1, y) / exponential_moment(m, 0, y);
}

// <x f_s>_delta for every s = l + m over grid x grid; Phi is accumulated between
// consecutive sums instead of from 0 each time.
class TiltTable {
  public:
    TiltTable(const Quadruplet& q, const std::vector<double>& grid) : q_(q) {
        for (double l : grid) {
            for (double m : grid) s_.push_back(l + m);
        }
        std::sort(s_.begin(), s_.end());
        s_.erase(std::unique(s_.begin(), s_.end()), s_.end());
        v_.reserve(s_.size());
        double Phi = 0.0, prev = 0.0;
        for (double s : s_) {
            if (prev == 0.0) {
                Phi = phi(q, s);
            } else {
                // 1/R0 is analytic off (-inf, 0]; cells of width <= prev/4 keep the rule exact to rounding.
                const int cells = static_cast<int>(std::ceil(4.0 * (s - prev) / prev));
                const double h = (s - prev) / cells;
                for (int k = 0; k < cells; ++k) {
                    Phi += numeric::gauss_legendre10([&](double u) { return 1.0 / branching_R0(q, u); },
                                                     prev + k * h, prev + (k + 1) * h);
                }
            }
            prev = s;
            v_.push_back(q.delta * phi_prime(q, s) * std::exp(-q.delta * Phi));
        }
    }

    double form(double lambda, double mu) const {
        const auto it = std::lower_bound(s_.begin(), s_.end(), lambda + mu);
        return v_[static_cast<std::size_t>(it - s_.begin())] * lambda * r0_increment(q_, lambda, mu);
    }

  private:
    const Quadruplet& q_;
    std::vector<double> s_;
    std::vector<double> v_;
};

}  // namespace

double bilinear_exp_full(const Quadruplet& q, double lambda, double mu) {
    if (lambda < 0.0 || mu < 0.0) {
        throw DomainError("bilinear_exp: arguments must be nonnegative");
    }
    if (lambda == 0.0 || mu == 0.0) {
        return 0.0;
    }
    const double s = lambda + mu;
    const double x_fs = q.delta * phi_prime(q, s) * std::exp(-q.delta * phi(q, s));
    return x_fs * lambda * r0_increment(q, lambda, mu);
}

BilinearValue bilinear_exp(const Quadruplet& q, double lambda, double mu) {
    require_ergodic(q);
    BilinearValue v;
    v.full = bilinear_exp_full(q, lambda, mu);
    const double swapped = bilinear_exp_full(q, mu, lambda);
    v.symmetric = 0.5 * (v.full + swapped);
    v.antisymmetric = v.full - v.symmetric;
    return v;
}

std::vector<double> default_reversibility_grid() { return {0.25, 0.5, 1.0, 2.0, 4.0}; }

double reversibility_residual(const Quadruplet& q, const std::vector<double>& grid) {
    const TiltTable t(q, grid);
    double worst = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        for (std::size_t j = i + 1; j < grid.size(); ++j) {
            worst = std::max(worst, std::abs(t.form(grid[i], grid[j]) - t.form(grid[j], grid[i])));
        }
    }
    return worst;
}

double reversibility_residual_relative(const Quadruplet& q, const std::vector<double>& grid) {
    const TiltTable t(q, grid);
    double worst = 0.0;
    double scale = 0.0;
    for (double l : grid) {
        for (double m : grid) {
            const double e = t.form(l, m);
            scale = std::max(scale, std::abs(e));
            worst = std::max(worst, std::abs(e - t.form(m, l)));
        }
    }
    return scale > 0.0 ? worst / scale : 0.0;
}

SectorMatrices sector_matrices(const Quadruplet& q, const std::vector<double>& grid) {
    require_ergodic(q);
    const auto n = static_cast<Eigen::Index>(grid.size());
    if (n == 0) {
        throw DomainError("sector: empty grid");
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!(grid[i] > 0.0) || (i > 0 && !(grid[i] > grid[i - 1]))) {
            throw DomainError("sector: grid must be positive and strictly increasing");
        }
    }
    SectorMatrices mats;
    const TiltTable t(q, grid);
    mats.full.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            mats.full(i, j) = t.form(grid[i], grid[j]);
        }
    }
    mats.symmetric = 0.5 * (mats.full + mats.full.transpose());
    return mats;
}

double empirical_sector(const SectorMatrices& mats) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(mats.symmetric);
    if (eig.info() != Eigen::Success) {
        throw NumericError("empirical_sector: eigen-decomposition failed");
    }
    const Eigen::VectorXd& ev = eig.eigenvalues();
    const double top = ev.maxCoeff();
    if (!(top > 0.0)) {
        throw NumericError("empirical_sector: symmetric part has no positive direction");
    }
    if (ev.minCoeff() < -1e-10 * std::max(1.0, top)) {
        throw NumericError("empirical_sector: symmetric part is not positive semidefinite");
    }
    const double cut = 1e-12 * top;
    Eigen::Index kept = 0;
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        kept += ev(i) > cut ? 1 : 0;
    }
    Eigen::MatrixXd W(ev.size(), kept);
    Eigen::Index col = 0;
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        if (ev(i) > cut) {
            W.col(col++) = eig.eigenvectors().col(i) / std::sqrt(ev(i));
        }
    }
    const Eigen::MatrixXd B = W.transpose() * mats.full * W;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(B);
    return svd.singularValues()(0);
}

double empirical_sector(const Quadruplet& q, const std::vector<double>& grid) {
    return empirical_sector(sector_matrices(q, grid));
}

std::vector<double> default_sector_grid() { return {0.5, 1.0, 2.0, 4.0}; }

ThorinUpper upper_bound_thorin(const ThorinPair& pair, const PositiveMeasure& M) {
    ThorinUpper out;
    const PositiveMeasure& m = pair.m;
    if (pair.q != 0.0 || m.is_zero()) {
        return out;
    }
    if (m.is_degenerate()) {
        out.first = out.second = 1.0;
        return out;
    }
    const double inf_m = m.support_inf();
    const double inf_M = M.support_inf();
    const double m1 = moment(m, 1.0);
    const double m0 = moment(m, 0.0);
    if (!(inf_m > 0.0) || !(inf_M > 0.0) || !std::isfinite(m1) || !std::isfinite(m0)) {
        return out;
    }
    out.first = 1.0 + std::sqrt(std::max(0.0, m1 / m0 - inf_m) * 2.0 / inf_M);
    out.second = 1.0 + std::sqrt(2.0 * std::max(0.0, m1 / (m0 * inf_m) - 1.0));
    return out;
}

QuadUpper upper_bound_quad(double a, double b, const PositiveMeasure& M,
                           const std::optional<PositiveMeasure>& m_in) {
    QuadUpper out;
    if (M.is_zero()) {
        out.closed = 1.0;
        out.c2_grid = out.c2 = 0.0;
        out.via_c2 = out.via_c1 = 1.0;
        return out;
    }
    const double inf_M = M.support_inf();
    const double M0 = moment(M, 0.0);
    if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(M0) || !(inf_M > 0.0)) {
        return out;
    }
    const double s = a * inf_M;
    const double d = s - b - M0;
    const double x = (std::sqrt(d * d + 4.0 * a * M0 * inf_M) - d) / s;
    out.closed = 1.0 + std::sqrt(std::max(0.0, x));

    std::optional<PositiveMeasure> m = m_in;
    if (!m && M.is_atomic()) {
        m = backward(a, b, M).pair.m;
    }
    if (!m || m->is_zero()) {
        return out;
    }
    const double m0 = moment(*m, 0.0);
    const double m1 = moment(*m, 1.0);
    const double inf_m = m->support_inf();
    if (!std::isfinite(m1) || !(inf_m > 0.0)) {
        return out;
    }
    const double v0 = m1 / m0;
    double sup = 0.0;
    for (double y : numeric::logspace(1e-6, 1e3, 200)) {
        const double t = tilted_mean(*m, y);
        if (std::isfinite(t)) {
            sup = std::max(sup, v0 - t);
        }
    }
    const double cap = std::max(0.0, v0 - inf_m);
    out.c2_grid = sup;
    out.c2 = cap;
    out.via_c2 = 1.0 + std::sqrt(2.0 * cap / inf_M);
    const double c1 = a * cap;
    out.via_c1 = 1.0 + std::sqrt(2.0 * c1 / a / inf_M);
    return out;
}

double lower_bound_moments(const PositiveMeasure& m) {
    if (m.is_zero()) {
        throw DomainError("lower_bound_moments: zero measure");
    }
    if (!(m.support_inf() > 0.0) || !std::isfinite(moment(m, 0.0))) {
        throw DomainError("lower_bound_moments: needs inf S(m) > 0 and finite total mass");
    }
    if (m.is_degenerate()) {
        return 1.0;
    }
    const double m1 = moment(m, -1.0);
    const double m2 = moment(m, -2.0);
    const double m3 = moment(m, -3.0);
    const double m4 = moment(m, -4.0);
    const double lead = m1 * m3 - m2 * m2;
    const double num = lead * lead;
    const double den = 2.0 * m1 * m2 * m2 * m3 + 4.0 * m1 * m1 * m2 * m2 * m2 +
                       12.0 * m1 * m1 * m2 * m4 - 9.0 * m1 * m1 * m3 * m3 - m2 * m2 * m2 * m2;
    if (!(den > 0.0)) {
        throw InvariantError("lower_bound_moments: denominator is not positive");
    }
    return std::sqrt(1.0 + num / den);
}

double lower_bound_general(double e_ff, double e_gg, double e_fg, double e_gf) {
    double anti = 0.5 * (e_fg - e_gf);
    const double sym = 0.5 * (e_fg + e_gf);
    if (anti < 0.0) {
        std::swap(e_ff, e_gg);
        std::swap(e_fg, e_gf);
        anti = -anti;
    }
    const double prod = e_ff * e_gg;
    if (!(prod > 0.0) || !(anti > 0.0)) {
        return 1.0;
    }
    const double tol = 1e-14 * std::max(prod, std::abs(e_fg * sym));
    if (std::abs(prod - e_fg * sym) <= tol) {
        return sym > 0.0 ? std::sqrt(1.0 + anti / sym) : kInf;
    }
    const double delta = prod - sym * sym;
    if (delta <= 1e-14 * prod) {
        return kInf;
    }
    return std::sqrt(1.0 + anti * anti / delta);
}

GGCMoments ggc_moments(const PositiveMeasure& m) {
    if (!m.is_zero() && !(m.support_inf() > 0.0)) {
        throw DomainError("ggc_moments: needs inf S(m) > 0");
    }
    const double m1 = moment(m, -1.0);
    const double m2 = moment(m, -2.0);
    const double m3 = moment(m, -3.0);
    return {m1, m1 * m1 + m2, 2.0 * m3 + 3.0 * m1 * m2 + m1 * m1 * m1};
}

PolyForms polynomial_forms(double a, const PositiveMeasure& M, const PositiveMeasure& m) {
    const GGCMoments x = ggc_moments(m);
    const double Mm1 = moment(M, -1.0);
    const double Mm2 = moment(M, -2.0);
    const double Mm3 = moment(M, -3.0);
    const double k = a + Mm1;
    const double anti = -x.x1 * Mm2;
    const double sym = 2.0 * x.x2 * k + 3.0 * x.x1 * Mm2;
    PolyForms p;
    p.e_ff = x.x1 * k;
    p.e_gg = 4.0 * x.x3 * k + 12.0 * x.x2 * Mm2 + 12.0 * x.x1 * Mm3;
    p.e_fg = sym + anti;
    p.e_gf = sym - anti;
    return p;
}

double SectorReport::min_upper() const {
    return std::min({upper_thorin_a, upper_thorin_b, upper_quad});
}

double SectorReport::max_lower() const {
    return std::max({1.0, lower_moments, lower_general});
}

bool SectorReport::sandwich_ok(double tol) const {
    return max_lower() <= empirical + tol && empirical <= min_upper() + tol;
}

SectorReport sector_report(const Quadruplet& q, const ThorinPair& pair,
                           const std::vector<double>& grid) {
    SectorReport r;
    r.basis = grid;
    r.matrices = sector_matrices(q, grid);
    r.empirical = empirical_sector(r.matrices);
    r.reversibility = reversibility_residual(q, default_reversibility_grid());

    const PositiveMeasure& m = pair.m;
    const bool thorin_side = pair.q == 0.0 && !m.is_zero() && m.support_inf() > 0.0 &&
                             std::isfinite(moment(m, 0.0));
    if (thorin_side && q.delta == 1.0) {
        r.lower_moments = lower_bound_moments(m);
        const PolyForms p = polynomial_forms(q.a, q.M, m);
        r.lower_general = lower_bound_general(p.e_ff, p.e_gg, p.e_fg, p.e_gf);
    }
    if (pair.q == 0.0) {
        const ThorinUpper t = upper_bound_thorin(pair, q.M);
        r.upper_thorin_a = t.first;
        r.upper_thorin_b = t.second;
    }
    const QuadUpper u = upper_bound_quad(q.a, q.b, q.M, pair.q == 0.0 ? std::optional(m) : std::nullopt);
    r.upper_quad = u.closed;
    return r;
}

}  // namespace cbci
