#include "cbci/numeric.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "cbci/error.hpp"

namespace cbci {

const char* to_string(Decision d) {
    switch (d) {
        case Decision::yes: return "yes";
        case Decision::no: return "no";
        case Decision::inconclusive: return "inconclusive";
    }
    return "?";
}

namespace numeric {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Shell-by-shell accumulation shared by the inward and outward tails.
class ShellAccumulator {
  public:
    explicit ShellAccumulator(const QuadOptions& opts) : opts_(opts) {}

    // Returns true when the tail is finished (converged or diverged).
    bool add(double s) {
        const double mag = std::abs(s);
        const double ratio = prev_ > 0.0 ? mag / prev_ : 0.0;
        // Non-decay only counts once the shell ratio has settled: a steady ratio is
        // the signature of a power-law endpoint, while a ramp-up toward a peak
        // near the endpoint shows a rapidly drifting ratio.
        const bool steady = ratio_ > 0.0 && std::abs(ratio - ratio_) <= 0.02 * ratio_;
        if (count_ > 1 && mag > 0.0 && ratio >= opts_.divergence_ratio && steady) {
            ++growing_;
        } else {
            growing_ = 0;
        }
        ratio_ = ratio;
        total_ += s;
        error_ += 1e-14 * mag;
        // A run of exact zeros proves nothing while the total is still zero: the
        // mass may sit closer to the endpoint than the shells reached so far.
        const bool small =
            total_ != 0.0 && mag <= opts_.rel_tol * std::abs(total_) + opts_.abs_tol;
        small_run_ = small ? small_run_ + 1 : 0;
        prev_ = mag;
        last_ = s;
        ++count_;
        if (growing_ >= opts_.divergence_shells) {
            status_ = QuadStatus::divergent;
            return true;
        }
        if (small_run_ >= 2) {
            add_geometric_tail();
            return true;
        }
        return false;
    }

    // The shells can no longer be refined; close off with a geometric tail when
    // the contributions are visibly shrinking.
    void exhaust() {
        if (ratio_ < opts_.divergence_ratio || std::abs(last_) <= opts_.abs_tol) {
            add_geometric_tail();
        } else {
            status_ = QuadStatus::inconclusive;
        }
    }

    double total() const { return total_; }
    double error() const { return error_; }
    QuadStatus status() const { return status_; }
    int count() const { return count_; }

  private:
    void add_geometric_tail() {
        if (ratio_ > 0.0 && ratio_ < 1.0) {
            const double tail = last_ * ratio_ / (1.0 - ratio_);
            total_ += tail;
            error_ += std::abs(tail);
        }
        status_ = QuadStatus::converged;
    }

    const QuadOptions& opts_;
    double total_ = 0.0;
    double error_ = 0.0;
    double prev_ = 0.0;
    double last_ = 0.0;
    double ratio_ = 0.0;
    int growing_ = 0;
    int small_run_ = 0;
    int count_ = 0;
    QuadStatus status_ = QuadStatus::inconclusive;
};

// Shell accuracy is measured against the running total, so shells that are
// negligible (or too narrow to resolve in floating point) stay cheap.
double shell_integral(const RealFn& f, double a, double b, const QuadOptions& opts, double total,
                      double* err) {
    if (a > b) std::swap(a, b);
    double e0 = 0.0;
    const double v0 = gauss_kronrod(f, a, b, 1.0, &e0, 0);
    const double target = std::max(1e-13 * std::abs(v0), 0.1 * opts.rel_tol * std::abs(total));
    if (e0 <= target || v0 == 0.0) {
        *err = e0;
        return v0;
    }
    return gauss_kronrod(f, a, b, std::max(1e-13, target / std::abs(v0)), err);
}

// Tail from interior point p toward the finite endpoint e.
QuadResult inward_tail(const RealFn& f, double e, double p, const QuadOptions& opts) {
    ShellAccumulator acc(opts);
    const double w = p - e;
    double outer = p;
    for (int k = 0; k < opts.max_shells; ++k) {
        const double inner = e + w * std::ldexp(1.0, -(k + 1));
        if (inner == outer || std::abs(inner - e) <= 4.0 * kEps * std::abs(e)) {
            acc.exhaust();
            return {acc.total(), acc.error(), acc.status()};
        }
        double err = 0.0;
        if (acc.add(shell_integral(f, inner, outer, opts, acc.total(), &err))) {
            return {acc.total(), acc.error() + err, acc.status()};
        }
        outer = inner;
    }
    acc.exhaust();
    return {acc.total(), acc.error(), acc.status()};
}

// Tail from p > 0 outward to +inf.
QuadResult outward_tail(const RealFn& f, double p, const QuadOptions& opts) {
    ShellAccumulator acc(opts);
    double inner = p;
    for (int k = 0; k < opts.max_shells; ++k) {
        const double outer = 2.0 * inner;
        if (!std::isfinite(outer)) {
            acc.exhaust();
            return {acc.total(), acc.error(), acc.status()};
        }
        double err = 0.0;
        if (acc.add(shell_integral(f, inner, outer, opts, acc.total(), &err))) {
            return {acc.total(), acc.error() + err, acc.status()};
        }
        inner = outer;
    }
    acc.exhaust();
    return {acc.total(), acc.error(), acc.status()};
}

QuadResult combine(const QuadResult& a, const QuadResult& b) {
    QuadResult r{a.value + b.value, a.error + b.error, QuadStatus::converged};
    if (a.status == QuadStatus::divergent || b.status == QuadStatus::divergent) {
        r.status = QuadStatus::divergent;
    } else if (a.status == QuadStatus::inconclusive || b.status == QuadStatus::inconclusive) {
        r.status = QuadStatus::inconclusive;
    }
    return r;
}

}  // namespace

double gauss_kronrod(const RealFn& f, double a, double b, double rel_tol, double* error,
                     unsigned max_depth) {
    if (a == b) {
        if (error) *error = 0.0;
        return 0.0;
    }
    // Mapped onto [-1, 1]: the library's error control misbehaves on very short intervals.
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    auto g = [&](double t) { return f(mid + half * t); };
    double err = 0.0;
    const double v = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
        g, -1.0, 1.0, max_depth, rel_tol, &err);
    if (error) *error = std::abs(half) * err;
    return half * v;
}

QuadResult integrate(const RealFn& f, double lo, double hi, const QuadOptions& opts,
                     double split) {
    if (!(lo < hi)) throw DomainError("integrate: empty interval");
    if (std::isfinite(hi)) {
        const double p = std::isnan(split) ? 0.5 * (lo + hi) : split;
        return combine(inward_tail(f, lo, p, opts), inward_tail(f, hi, p, opts));
    }
    double p = split;
    if (std::isnan(p)) p = lo > 0.0 ? 2.0 * lo : 1.0;
    return combine(inward_tail(f, lo, p, opts), outward_tail(f, p, opts));
}

double integrate_or_throw(const RealFn& f, double lo, double hi, bool allow_infinite,
                          const QuadOptions& opts, double split) {
    const QuadResult r = integrate(f, lo, hi, opts, split);
    switch (r.status) {
        case QuadStatus::converged: return r.value;
        case QuadStatus::divergent:
            if (allow_infinite) return r.value >= 0.0 ? kInf : -kInf;
            throw NumericError("integral diverges");
        case QuadStatus::inconclusive: break;
    }
    throw InconclusiveError("quadrature inconclusive: neither convergence nor divergence");
}

double bracketed_root(const RealFn& f, double lo, double hi) {
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if (std::signbit(flo) == std::signbit(fhi)) {
        throw NumericError("bracketed_root: no sign change on bracket");
    }
    for (int it = 0; it < 2200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if (std::signbit(fm) == std::signbit(flo)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
            fhi = fm;
        }
    }
    // Secant polish inside the final bracket.
    const double x = lo - flo * (hi - lo) / (fhi - flo);
    if (x > lo && x < hi) {
        const double fx = f(x);
        if (std::abs(fx) < std::min(std::abs(flo), std::abs(fhi))) return x;
    }
    return std::abs(flo) <= std::abs(fhi) ? lo : hi;
}

double extrapolate_to_zero(std::span<const double> y, std::span<const double> v) {
    if (y.size() != v.size() || y.size() < 3) {
        throw DomainError("extrapolate_to_zero: need at least three samples");
    }
    const std::size_t n = y.size();
    const double y0 = y[n - 3], y1 = y[n - 2], y2 = y[n - 1];
    const double l0 = (y1 * y2) / ((y0 - y1) * (y0 - y2));
    const double l1 = (y0 * y2) / ((y1 - y0) * (y1 - y2));
    const double l2 = (y0 * y1) / ((y2 - y0) * (y2 - y1));
    return l0 * v[n - 3] + l1 * v[n - 2] + l2 * v[n - 1];
}

std::vector<double> logspace(double lo, double hi, int n) {
    std::vector<double> out(static_cast<std::size_t>(n));
    if (n == 1) {
        out[0] = lo;
        return out;
    }
    const double a = std::log(lo), b = std::log(hi);
    for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = std::exp(a + (b - a) * i / (n - 1));
    out.front() = lo;
    out.back() = hi;
    return out;
}

std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> out(static_cast<std::size_t>(n));
    if (n == 1) {
        out[0] = lo;
        return out;
    }
    for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
    out.back() = hi;
    return out;
}

double rel_diff(double a, double b, double floor) {
    const double scale = std::max({std::abs(a), std::abs(b), floor});
    return std::abs(a - b) / scale;
}

}  // namespace numeric
}  // namespace cbci
