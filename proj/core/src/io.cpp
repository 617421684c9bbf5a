#include "cbci/io.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "cbci/error.hpp"

#ifndef CBCI_VERSION
#define CBCI_VERSION "0.0.0"
#endif

namespace cbci::io {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

Json atoms_json(std::span<const Atom> atoms, double factor = 1.0) {
    Json arr = Json::array();
    for (const Atom& a : atoms) arr.push_back(Json::array({number(a.weight * factor), number(a.location)}));
    return arr;
}

std::vector<Atom> atoms_from(const Json& j) {
    std::vector<Atom> out;
    if (!j.is_array()) throw DomainError("measure json: atoms must be an array");
    for (const Json& a : j) {
        if (!a.is_array() || a.size() != 2) throw DomainError("measure json: atom must be [weight, location]");
        out.push_back({to_double(a[0]), to_double(a[1])});
    }
    return out;
}

std::vector<double> doubles_from(const Json& j, const char* what) {
    if (!j.is_array()) throw DomainError(std::string("json: ") + what + " must be an array");
    std::vector<double> out;
    for (const Json& v : j) out.push_back(to_double(v));
    return out;
}

const Json& field(const Json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw DomainError(std::string("json: missing field '") + key + "'");
    return j.at(key);
}

double field_or(const Json& j, const char* key, double dflt) {
    return j.contains(key) ? to_double(j.at(key)) : dflt;
}

}  // namespace

const char* version() { return CBCI_VERSION; }

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t h) {
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

Json number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

double to_double(const Json& j) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    }
    throw DomainError("json: expected a number");
}

Json to_json(const PositiveMeasure& m) {
    Json j;
    const double f = m.factor();
    std::visit(overloaded{
                   [&](const family::Atomic& a) {
                       j["kind"] = "atomic";
                       j["atoms"] = atoms_json(a.atoms);
                   },
                   [&](const family::StableTail& s) {
                       j["kind"] = "stable_tail";
                       j["alpha"] = s.alpha;
                       j["kappa"] = s.kappa;
                   },
                   [&](const family::StableTailDual& s) {
                       j["kind"] = "stable_tail_dual";
                       j["alpha"] = s.alpha;
                       j["kappa"] = s.kappa;
                   },
                   [&](const family::Window& w) {
                       j["kind"] = "window";
                       j["lo"] = w.lo;
                       j["hi"] = w.hi;
                   },
                   [&](const family::FreePoissonScaled& p) {
                       j["kind"] = "free_poisson";
                       j["scale"] = p.scale;
                       j["alpha"] = p.alpha;
                       j["beta"] = p.beta;
                   },
                   [&](const family::Grid& g) {
                       j["kind"] = "grid";
                       Json u = Json::array(), d = Json::array();
                       for (double v : g.u) u.push_back(number(v));
                       for (double v : g.density) d.push_back(number(v));
                       j["u"] = u;
                       j["density"] = d;
                       if (!g.atoms.empty()) j["atoms"] = atoms_json(g.atoms);
                   },
               },
               m.variant());
    if (f != 1.0 && !m.is_atomic()) j["factor"] = f;
    return j;
}

PositiveMeasure measure_from_json(const Json& j) {
    try {
        const std::string kind = field(j, "kind").get<std::string>();
        PositiveMeasure m;
        if (kind == "atomic") {
            m = PositiveMeasure::atomic(atoms_from(field(j, "atoms")));
        } else if (kind == "zero") {
            m = PositiveMeasure::zero();
        } else if (kind == "stable_tail") {
            m = PositiveMeasure::stable_tail(to_double(field(j, "alpha")), to_double(field(j, "kappa")));
        } else if (kind == "stable_tail_dual") {
            m = PositiveMeasure::stable_tail_dual(to_double(field(j, "alpha")), to_double(field(j, "kappa")));
        } else if (kind == "window") {
            m = PositiveMeasure::window(to_double(field(j, "lo")), to_double(field(j, "hi")));
        } else if (kind == "free_poisson") {
            m = PositiveMeasure::free_poisson(field_or(j, "scale", 1.0), to_double(field(j, "alpha")),
                                              to_double(field(j, "beta")));
        } else if (kind == "grid") {
            std::vector<Atom> atoms = j.contains("atoms") ? atoms_from(j.at("atoms")) : std::vector<Atom>{};
            m = PositiveMeasure::grid(doubles_from(field(j, "u"), "u"), doubles_from(field(j, "density"), "density"),
                                      std::move(atoms));
        } else {
            throw DomainError("measure json: unknown kind '" + kind + "'");
        }
        const double f = field_or(j, "factor", 1.0);
        return f == 1.0 ? m : m.scaled(f);
    } catch (const nlohmann::json::exception& e) {
        throw DomainError(std::string("measure json: ") + e.what());
    }
}

Json to_json(const ThorinPair& p) {
    Json j;
    j["q"] = p.q;
    j["m"] = to_json(p.m);
    return j;
}

ThorinPair pair_from_json(const Json& j) {
    return make_thorin_pair(field_or(j, "q", 0.0), measure_from_json(field(j, "m")));
}

Json to_json(const Quadruplet& q) {
    Json j;
    j["a"] = q.a;
    j["b"] = q.b;
    j["M"] = to_json(q.M);
    j["delta"] = q.delta;
    return j;
}

Quadruplet quadruplet_from_json(const Json& j) {
    return make_quadruplet(to_double(field(j, "a")), to_double(field(j, "b")), measure_from_json(field(j, "M")),
                           field_or(j, "delta", 1.0));
}

Json to_json(const CorrespondenceReport& r) {
    Json j;
    j["method"] = to_string(r.method);
    j["identity_residual"] = number(r.identity_residual);
    j["residual_limit"] = r.residual_limit();
    j["inversion_failures"] = r.inversion_failures;
    return j;
}

Json to_json(const ForwardResult& r) {
    Json j;
    j["a"] = r.a;
    j["b"] = r.b;
    j["M"] = to_json(r.M);
    if (r.M.is_zero()) j["note"] = "CIR";
    j["report"] = to_json(r.report);
    return j;
}

Json to_json(const BackwardResult& r) {
    Json j;
    j["q"] = r.pair.q;
    j["m"] = to_json(r.pair.m);
    j["report"] = to_json(r.report);
    return j;
}

Json to_json(const SectorReport& r) {
    Json j;
    j["lowerMoments"] = number(r.lower_moments);
    j["lowerGeneral"] = number(r.lower_general);
    j["upperThorinA"] = number(r.upper_thorin_a);
    j["upperThorinB"] = number(r.upper_thorin_b);
    j["upperQuad"] = number(r.upper_quad);
    j["empirical"] = number(r.empirical);
    j["reversibilityResidual"] = number(r.reversibility);
    j["sandwich"] = r.sandwich_ok();
    j["basis"] = r.basis;
    const auto mat = [](const Eigen::MatrixXd& m) {
        Json rows = Json::array();
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            Json row = Json::array();
            for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(number(m(i, k)));
            rows.push_back(row);
        }
        return rows;
    };
    j["matrices"] = {{"full", mat(r.matrices.full)}, {"symmetric", mat(r.matrices.symmetric)}};
    return j;
}

Json to_json(const TransientReport& r) {
    Json j;
    j["lambda"] = r.lambda;
    j["empirical"] = r.empirical;
    j["exact"] = r.exact;
    Json z = Json::array();
    for (double v : r.z) z.push_back(number(v));
    j["z"] = z;
    j["max_abs_z"] = number(r.max_abs_z);
    j["pass"] = r.pass;
    return j;
}

Json to_json(const FixedPoint& fp) {
    Json j;
    j["branch"] = fp.branch;
    j["pair"] = to_json(fp.pair);
    if (fp.branch == 1) j["params"] = {{"alpha", fp.params.alpha}, {"beta", fp.params.beta}};
    return j;
}

Json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open " + path.string());
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw DomainError("malformed JSON in " + path.string() + ": " + e.what());
    }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DomainError("cannot write " + path.string());
    out << text;
}

void write_json(const std::filesystem::path& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

std::string csv(const std::vector<std::string>& header, const std::vector<Row>& rows) {
    std::ostringstream os;
    os << std::setprecision(17);
    for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
    os << "\n";
    for (const Row& r : rows) {
        for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
        os << "\n";
    }
    return os.str();
}

std::vector<Row> density_rows(const PositiveMeasure& m, const std::vector<double>& grid) {
    std::vector<Row> rows;
    for (double x : grid) rows.push_back({x, m.density(x), 0.0});
    std::span<const Atom> atoms = m.atoms();
    if (const auto* g = std::get_if<family::Grid>(&m.variant())) atoms = g->atoms;
    for (const Atom& a : atoms) rows.push_back({a.location, 0.0, a.weight * (m.is_atomic() ? 1.0 : m.factor())});
    std::sort(rows.begin(), rows.end(), [](const Row& x, const Row& y) { return x[0] < y[0]; });
    return rows;
}

std::vector<Row> bilinear_rows(const Quadruplet& q, const std::vector<double>& grid) {
    const SectorMatrices mats = sector_matrices(q, grid);
    std::vector<Row> rows;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        for (std::size_t j = 0; j < grid.size(); ++j) {
            const auto a = static_cast<Eigen::Index>(i), b = static_cast<Eigen::Index>(j);
            const double sym = mats.symmetric(a, b);
            rows.push_back({grid[i], grid[j], mats.full(a, b), sym, mats.full(a, b) - sym});
        }
    }
    return rows;
}

}  // namespace cbci::io
