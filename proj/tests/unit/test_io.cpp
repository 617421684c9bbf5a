#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "cbci/error.hpp"
#include "cbci/io.hpp"

using namespace cbci;
using io::Json;

TEST_CASE("measure JSON round trip") {
    const std::vector<PositiveMeasure> all{
        PositiveMeasure::atomic({{1, 1}, {0.5, 2}}),
        PositiveMeasure::stable_tail(0.5, 1.0),
        PositiveMeasure::stable_tail_dual(0.25, 2.0).scaled(3.0),
        PositiveMeasure::window(1, 2),
        PositiveMeasure::free_poisson(2.0, 0.5, 1.5),
        PositiveMeasure::grid({1, 2, 3}, {1, 0.5, 0.25}, {{0.1, 5}}),
    };
    for (const auto& m : all) {
        const Json j = io::to_json(m);
        const PositiveMeasure back = io::measure_from_json(Json::parse(j.dump()));
        CHECK(io::to_json(back).dump() == j.dump());
        CHECK(back.density(1.5) == doctest::Approx(m.density(1.5)));
    }
}

TEST_CASE("non-finite numbers are strings") {
    CHECK(io::number(kInf) == "inf");
    CHECK(std::isinf(io::to_double(Json("inf"))));
    CHECK(std::isnan(io::to_double(Json("nan"))));
    CHECK_THROWS_AS(io::to_double(Json("soon")), DomainError);
}

TEST_CASE("pair and quadruplet parsing") {
    const ThorinPair p = io::pair_from_json(Json::parse(R"({"q": 0.5, "m": {"kind": "atomic", "atoms": [[1, 2]]}})"));
    CHECK(p.q == 0.5);
    const Quadruplet q = io::quadruplet_from_json(
        Json::parse(R"({"a": 1, "b": 0.5, "M": {"kind": "window", "lo": 0, "hi": 1}, "delta": 2})"));
    CHECK(q.delta == 2.0);
    CHECK(q.M.support_sup() == 1.0);

    CHECK_THROWS_AS(io::measure_from_json(Json::parse(R"({"kind": "triangle"})")), DomainError);
    CHECK_THROWS_AS(io::measure_from_json(Json::parse(R"({"atoms": []})")), DomainError);
    CHECK_THROWS_AS(io::measure_from_json(Json::parse(R"({"kind": "atomic", "atoms": [[1]]})")), DomainError);
    CHECK_THROWS_AS(io::pair_from_json(Json::parse(R"({"q": -1, "m": {"kind": "atomic", "atoms": [[1, 1]]}})")),
                    DomainError);
}

TEST_CASE("malformed files raise input errors") {
    const auto dir = std::filesystem::temp_directory_path() / "cbci_io_test";
    io::write_text(dir / "bad.json", "{\"kind\": ");
    CHECK_THROWS_AS(io::read_json(dir / "bad.json"), DomainError);
    CHECK_THROWS_AS(io::read_json(dir / "missing.json"), DomainError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("hashing and CSV") {
    // FNV-1a reference values.
    CHECK(io::fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(io::fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(io::hex64(0xabcULL) == "0000000000000abc");
    CHECK(io::csv({"x", "y"}, {{1, 0.5}}) == "x,y\n1,0.5\n");
}
