#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cbci/mechanisms.hpp"

namespace cbci {

struct StationaryLaw {
    ThorinPair pair;
    double delta = 1.0;
};

/// Equal-mass binning of a compactly supported measure into at most `bins` atoms.
/// Mass and first moment are preserved; `bias` is the relative change in g_M(1).
struct Discretized {
    PositiveMeasure measure;
    double bias = 0.0;
};

Discretized discretize(const PositiveMeasure& m, int bins = 64);

/// splitmix64 finalizer; per-path seeds are splitmix64(seed + index).
std::uint64_t splitmix64(std::uint64_t x);

/// delta q + sum_i Gamma(delta gamma_i, rate lambda_i).
std::vector<double> sample_stationary(const StationaryLaw& law, std::size_t count,
                                      std::uint64_t seed);

struct SimConfig {
    double T = 1.0;
    double dt = 1e-3;
    std::size_t paths = 100000;
    std::uint64_t seed = 1;
    /// 0 means one worker per hardware thread.
    unsigned threads = 0;
};

/// Default step 1e-3 * min(1, 1 / (b + c)).
double default_dt(const Quadruplet& q);

struct SimEnsemble {
    std::uint64_t seed = 0;
    std::size_t paths = 0;
    double dt = 0.0;
    double T = 0.0;
    double x0 = 0.0;
    std::vector<double> terminals;
    std::vector<std::uint32_t> jump_counts;
    /// Relative bias from atom discretization of M (0 for atomic M).
    double discretization_bias = 0.0;
    std::vector<std::string> warnings;
};

/// Euler steps for dX = (delta - (b + c) X) dt + sqrt(2 a X) dW, reflected at 0,
/// plus jumps at rate rho X with sizes from the exponential mixture of n.
SimEnsemble simulate_path(const Quadruplet& q, double x0, const SimConfig& cfg);

/// As simulate_path with path i started from x0s[i]; paths = x0s.size().
SimEnsemble simulate_from(const Quadruplet& q, const std::vector<double>& x0s,
                          const SimConfig& cfg);

struct LaplaceEstimate {
    std::vector<double> lambda;
    std::vector<double> value;
    std::vector<double> stderr_;
};

LaplaceEstimate empirical_laplace(const std::vector<double>& samples,
                                  const std::vector<double>& lambda);

struct TransientReport {
    std::vector<double> lambda;
    std::vector<double> empirical;
    std::vector<double> exact;
    std::vector<double> z;
    double max_abs_z = 0.0;
    bool pass = false;
};

/// Compares the ensemble at its horizon with exp(-x0 psi(t, l) - delta int_0^t psi).
TransientReport verify_transient(const Quadruplet& q, const SimEnsemble& ens,
                                 const std::vector<double>& lambda, double z_limit = 4.0);

/// Sample mean and its standard error.
struct MeanEstimate {
    double mean = 0.0;
    double stderr_ = 0.0;
};

MeanEstimate sample_mean(const std::vector<double>& v);

}  // namespace cbci
