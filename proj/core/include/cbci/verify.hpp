#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace cbci::verify {

struct Options {
    /// Seed for the Monte Carlo criteria (8, 9). Analytic draws use fixed seeds.
    std::uint64_t seed = 20240611;
    /// Replaces every analytic tolerance when set.
    std::optional<double> tol;
    unsigned threads = 0;
};

struct Criterion {
    int id = 0;
    std::string name;
    bool pass = false;
    /// Worst observed value of the governing quantity and the bound it is held to.
    double value = 0.0;
    double bound = 0.0;
    std::string detail;
    double seconds = 0.0;
};

inline constexpr int kCriteria = 10;

const char* criterion_name(int id);

/// Throws DomainError for an id outside 1..kCriteria.
Criterion run(int id, const Options& opts = {});
std::vector<Criterion> run_all(const Options& opts = {});

/// "PASS [3] round trip: value 1.2e-14 (bound 1e-10) 0.02 s" style line.
std::string format_line(const Criterion& c);

}  // namespace cbci::verify
