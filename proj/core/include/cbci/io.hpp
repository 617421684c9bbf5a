#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "cbci/boolean.hpp"
#include "cbci/correspondence.hpp"
#include "cbci/sector.hpp"
#include "cbci/simulate.hpp"

namespace cbci::io {

using Json = nlohmann::ordered_json;

const char* version();

std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t h);

/// Non-finite doubles are written as the strings "inf", "-inf", "nan".
Json number(double v);
double to_double(const Json& j);

Json to_json(const PositiveMeasure& m);
Json to_json(const ThorinPair& p);
Json to_json(const Quadruplet& q);
Json to_json(const CorrespondenceReport& r);
Json to_json(const ForwardResult& r);
Json to_json(const BackwardResult& r);
Json to_json(const SectorReport& r);
Json to_json(const TransientReport& r);
Json to_json(const FixedPoint& fp);

/// Parsers throw DomainError on malformed input.
PositiveMeasure measure_from_json(const Json& j);
ThorinPair pair_from_json(const Json& j);
Quadruplet quadruplet_from_json(const Json& j);

Json read_json(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const Json& j);

using Row = std::vector<double>;

/// Numbers are written with 17 significant digits.
std::string csv(const std::vector<std::string>& header, const std::vector<Row>& rows);

/// Rows (x, density, atom_mass) for a measure; the grid is used for densities.
std::vector<Row> density_rows(const PositiveMeasure& m, const std::vector<double>& grid);

/// Rows (lambda, mu, full, sym, antisym) over grid x grid.
std::vector<Row> bilinear_rows(const Quadruplet& q, const std::vector<double>& grid);

}  // namespace cbci::io
