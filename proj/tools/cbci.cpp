// cbci: command-line front end for the correspondence, sector, simulation,
// inversion, Boolean and verification routines.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cbci/boolean.hpp"
#include "cbci/correspondence.hpp"
#include "cbci/error.hpp"
#include "cbci/io.hpp"
#include "cbci/sector.hpp"
#include "cbci/simulate.hpp"
#include "cbci/verify.hpp"

namespace fs = std::filesystem;
using cbci::io::Json;

namespace {

enum Exit { kOk = 0, kFail = 1, kInput = 2, kNumeric = 3, kInvariant = 4 };

struct Global {
    std::optional<double> tol;
    std::string out = ".";
    std::uint64_t seed = 20240611;
    bool json = false;
};

// Every artifact carries the hash of this object.
struct Run {
    Json config;
    std::string hash;

    void seal() { hash = cbci::io::hex64(cbci::io::fnv1a64(config.dump())); }

    Json stamp(Json body) const {
        Json j;
        j["version"] = cbci::io::version();
        j["config_hash"] = hash;
        j["config"] = config;
        for (auto it = body.begin(); it != body.end(); ++it) j[it.key()] = it.value();
        return j;
    }

    std::string csv_header() const {
        return std::string("# cbci ") + cbci::io::version() + " config_hash=" + hash + "\n";
    }
};

Json input(const std::string& path, Run& run, const char* key) {
    Json j = cbci::io::read_json(path);
    run.config["inputs"][key] = cbci::io::hex64(cbci::io::fnv1a64(j.dump()));
    return j;
}

void emit(const Global& g, const Run& run, const std::string& name, const Json& body, const std::string& human) {
    const Json doc = run.stamp(body);
    cbci::io::write_json(fs::path(g.out) / (name + ".json"), doc);
    if (g.json) {
        std::cout << doc.dump(2) << "\n";
    } else {
        std::cout << human;
    }
}

void emit_csv(const Global& g, const Run& run, const std::string& name, const std::vector<std::string>& header,
              const std::vector<cbci::io::Row>& rows) {
    cbci::io::write_text(fs::path(g.out) / (name + ".csv"), run.csv_header() + cbci::io::csv(header, rows));
}

std::vector<double> plot_grid(const cbci::PositiveMeasure& m, int n) {
    double lo = m.support_inf(), hi = m.support_sup();
    if (!std::isfinite(hi)) hi = lo + 50.0 * std::max(1.0, lo);
    if (hi <= lo) hi = lo + 1.0;
    std::vector<double> x;
    for (int k = 0; k < n; ++k) x.push_back(lo + (hi - lo) * (k + 0.5) / n);
    return x;
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

// --- correspond -------------------------------------------------------------

struct CorrespondArgs {
    std::string direction;
    std::string file;
    int grid_points = 401;
};

int cmd_correspond(const Global& g, const CorrespondArgs& a) {
    Run run;
    run.config = {{"command", "correspond"}, {"direction", a.direction}, {"grid_points", a.grid_points}};
    if (g.tol) run.config["tol"] = *g.tol;
    cbci::InversionOptions opts;
    opts.grid_points = a.grid_points;

    Json body;
    cbci::CorrespondenceReport report;
    cbci::PositiveMeasure out_measure;
    std::string summary;
    if (a.direction == "forward") {
        const cbci::ThorinPair pair = cbci::io::pair_from_json(input(a.file, run, "pair"));
        run.seal();
        const cbci::ForwardResult r = cbci::forward(pair, opts);
        body = cbci::io::to_json(r);
        report = r.report;
        out_measure = r.M;
        summary = "a = " + fmt("%.12g", r.a) + ", b = " + fmt("%.12g", r.b) + "\n";
        for (const cbci::Atom& at : r.M.atoms()) {
            summary += "  M atom " + fmt("%.12g", at.weight) + " at " + fmt("%.12g", at.location) + "\n";
        }
    } else {
        const cbci::Quadruplet q = cbci::io::quadruplet_from_json(input(a.file, run, "quadruplet"));
        run.seal();
        const cbci::BackwardResult r = cbci::backward(q.a, q.b, q.M, opts);
        body = cbci::io::to_json(r);
        report = r.report;
        out_measure = r.pair.m;
        summary = "q = " + fmt("%.12g", r.pair.q) + "\n";
        for (const cbci::Atom& at : r.pair.m.atoms()) {
            summary += "  m atom " + fmt("%.12g", at.weight) + " at " + fmt("%.12g", at.location) + "\n";
        }
    }
    const double limit = g.tol.value_or(report.residual_limit());
    const bool ok = report.identity_residual < limit;
    body["residual_ok"] = ok;
    summary += "method " + std::string(cbci::to_string(report.method)) + ", identity residual " +
               fmt("%.3g", report.identity_residual) + (ok ? "" : " (exceeds " + fmt("%.3g", limit) + ")") + "\n";
    emit(g, run, "correspond", body, summary);
    if (!out_measure.is_zero()) {
        emit_csv(g, run, "density", {"x", "density", "atom_mass"},
                 cbci::io::density_rows(out_measure, out_measure.is_atomic() ? std::vector<double>{}
                                                                            : plot_grid(out_measure, 400)));
    }
    return ok ? kOk : kFail;
}

// --- sector -----------------------------------------------------------------

struct SectorArgs {
    std::string file;
    std::vector<double> grid;
};

int cmd_sector(const Global& g, const SectorArgs& a) {
    Run run;
    run.config = {{"command", "sector"}};
    if (!a.grid.empty()) run.config["grid"] = a.grid;
    if (g.tol) run.config["tol"] = *g.tol;
    const Json in = input(a.file, run, "input");
    run.seal();

    cbci::Quadruplet quad;
    cbci::ThorinPair pair;
    if (in.contains("m")) {
        pair = cbci::io::pair_from_json(in);
        const cbci::ForwardResult f = cbci::forward(pair);
        quad = cbci::make_quadruplet(f.a, f.b, f.M, in.contains("delta") ? cbci::io::to_double(in["delta"]) : 1.0);
    } else {
        quad = cbci::io::quadruplet_from_json(in);
        if (cbci::is_ergodic(quad) != cbci::Decision::yes) throw cbci::NumericError("sector: quadruplet is not ergodic");
        pair = cbci::backward(quad.a, quad.b, quad.M).pair;
    }

    const std::vector<double> grid = a.grid.empty() ? cbci::default_sector_grid() : a.grid;
    const cbci::SectorReport r = cbci::sector_report(quad, pair, grid);
    const double tol = g.tol.value_or(1e-6);
    const bool ok = r.sandwich_ok(tol);
    Json body = {{"quadruplet", cbci::io::to_json(quad)}, {"pair", cbci::io::to_json(pair)},
                 {"report", cbci::io::to_json(r)}};
    std::string human = "lower (moments)  " + fmt("%.12g", r.lower_moments) + "\n" +
                        "lower (general)  " + fmt("%.12g", r.lower_general) + "\n" +
                        "empirical        " + fmt("%.12g", r.empirical) + "\n" +
                        "upper (Thorin A) " + fmt("%.12g", r.upper_thorin_a) + "\n" +
                        "upper (Thorin B) " + fmt("%.12g", r.upper_thorin_b) + "\n" +
                        "upper (quad)     " + fmt("%.12g", r.upper_quad) + "\n" +
                        "reversibility    " + fmt("%.3g", r.reversibility) + "\n" +
                        (ok ? "sandwich ok\n" : "sandwich VIOLATED\n");
    emit(g, run, "sector", body, human);
    emit_csv(g, run, "bilinear", {"lambda", "mu", "full", "symmetric", "antisymmetric"},
             cbci::io::bilinear_rows(quad, cbci::numeric::logspace(0.1, 10.0, 25)));
    return ok ? kOk : kInvariant;
}

// --- simulate ---------------------------------------------------------------

struct SimulateArgs {
    std::string file;
    double x0 = 1.0;
    double T = 1.0;
    std::optional<double> dt;
    std::size_t paths = 10000;
    unsigned threads = 0;
    std::vector<double> lambda;
};

int cmd_simulate(const Global& g, const SimulateArgs& a) {
    Run run;
    run.config = {{"command", "simulate"}, {"x0", a.x0}, {"T", a.T}, {"paths", a.paths}, {"seed", g.seed}};
    const cbci::Quadruplet q = cbci::io::quadruplet_from_json(input(a.file, run, "quadruplet"));
    cbci::SimConfig cfg;
    cfg.T = a.T;
    cfg.dt = a.dt.value_or(cbci::default_dt(q));
    cfg.paths = a.paths;
    cfg.seed = g.seed;
    cfg.threads = a.threads;
    const std::vector<double> lambda = a.lambda.empty() ? cbci::numeric::logspace(0.1, 10.0, 10) : a.lambda;
    run.config["dt"] = cfg.dt;
    run.config["lambda"] = lambda;
    if (g.tol) run.config["tol"] = *g.tol;
    run.seal();

    const cbci::SimEnsemble e = cbci::simulate_path(q, a.x0, cfg);
    const cbci::TransientReport tr = cbci::verify_transient(q, e, lambda, g.tol.value_or(4.0));
    const cbci::MeanEstimate mean = cbci::sample_mean(e.terminals);
    std::uint64_t jumps = 0;
    for (auto c : e.jump_counts) jumps += c;

    Json body = {{"quadruplet", cbci::io::to_json(q)},
                 {"mean", mean.mean},
                 {"mean_stderr", mean.stderr_},
                 {"jumps", jumps},
                 {"discretization_bias", e.discretization_bias},
                 {"warnings", e.warnings},
                 {"transient", cbci::io::to_json(tr)}};
    std::string human = "paths " + std::to_string(e.paths) + ", dt " + fmt("%.3g", e.dt) + ", T " + fmt("%.3g", e.T) +
                        "\nterminal mean " + fmt("%.6g", mean.mean) + " +- " + fmt("%.2g", mean.stderr_) +
                        "\ntransient Laplace max |z| " + fmt("%.3g", tr.max_abs_z) + (tr.pass ? " (ok)\n" : " (FAIL)\n");
    for (const std::string& w : e.warnings) human += "warning: " + w + "\n";
    emit(g, run, "simulate", body, human);

    std::vector<cbci::io::Row> rows;
    for (std::size_t i = 0; i < e.terminals.size(); ++i) {
        rows.push_back({static_cast<double>(i), e.terminals[i], static_cast<double>(e.jump_counts[i])});
    }
    emit_csv(g, run, "terminals", {"path", "x", "jumps"}, rows);
    std::vector<cbci::io::Row> lap;
    for (std::size_t k = 0; k < lambda.size(); ++k) lap.push_back({lambda[k], tr.empirical[k], tr.exact[k], tr.z[k]});
    emit_csv(g, run, "laplace", {"lambda", "empirical", "exact", "z"}, lap);
    return tr.pass ? kOk : kFail;
}

// --- invert -----------------------------------------------------------------

struct InvertArgs {
    std::string direction;
    std::string file;
    double lo = 0.0;
    double hi = 0.0;
    int points = 200;
    double y0 = 1e-3;
    int levels = 7;
};

int cmd_invert(const Global& g, const InvertArgs& a) {
    Run run;
    run.config = {{"command", "invert"}, {"direction", a.direction}, {"lo", a.lo}, {"hi", a.hi},
                  {"points", a.points},  {"y0", a.y0},               {"levels", a.levels}};
    if (!(a.hi > a.lo) || a.points < 2) throw cbci::DomainError("invert: need hi > lo and at least two points");
    const std::vector<double> x = cbci::numeric::linspace(a.lo, a.hi, a.points);

    cbci::ComplexFn G;
    cbci::PositiveMeasure keep;
    double A = 0.0, B = 0.0, Q = 0.0;
    if (a.direction == "forward") {
        const cbci::ThorinPair p = cbci::io::pair_from_json(input(a.file, run, "pair"));
        keep = p.m;
        Q = p.q;
        A = Q > 0.0 ? 0.0 : 1.0 / cbci::moment(p.m, 0.0);
        B = 1.0 / (Q + cbci::moment(p.m, -1.0));
        G = [&keep, A, B, Q](cbci::Complex z) { return A - B / z - 1.0 / (z * (cbci::stieltjes(keep, z) - Q)); };
    } else {
        const cbci::Quadruplet q = cbci::io::quadruplet_from_json(input(a.file, run, "quadruplet"));
        keep = q.M;
        A = q.a;
        B = q.b;
        Q = A > 0.0 ? 0.0 : 1.0 / (B + cbci::moment(q.M, 0.0));
        G = [&keep, A, B, Q](cbci::Complex z) { return Q + 1.0 / (z * (A - B / z - cbci::stieltjes(keep, z))); };
    }
    run.seal();
    cbci::InversionOptions opts;
    const cbci::InversionResult inv = cbci::stieltjes_invert(G, x, cbci::y_sequence(a.y0, a.levels), opts);
    std::vector<cbci::io::Row> rows;
    for (std::size_t k = 0; k < x.size(); ++k) {
        rows.push_back({x[k], inv.density[k], inv.atom_mass[k], inv.converged[k] ? 1.0 : 0.0});
    }
    emit_csv(g, run, "inversion", {"x", "density", "atom_mass", "converged"}, rows);
    Json body = {{"a", A}, {"b", B}, {"q", Q}, {"points", x.size()}, {"failures", inv.failures}};
    emit(g, run, "invert", body,
         std::to_string(x.size()) + " points, " + std::to_string(inv.failures) + " not settled\n");
    return inv.failures == 0 ? kOk : kFail;
}

// --- boolean ----------------------------------------------------------------

struct BooleanArgs {
    std::string m1, m2, m;
    double t = 1.0;
    double q = 0.0, a = 1.0, b = 0.0;
};

int cmd_boolean(const Global& g, const std::string& op, const BooleanArgs& a) {
    Run run;
    run.config = {{"command", "boolean"}, {"op", op}};
    const double tol = g.tol.value_or(1e-10);
    Json body;
    double residual = 0.0;
    if (op == "conv") {
        const cbci::PositiveMeasure m1 = cbci::io::measure_from_json(input(a.m1, run, "m1"));
        const cbci::PositiveMeasure m2 = cbci::io::measure_from_json(input(a.m2, run, "m2"));
        run.seal();
        const cbci::PositiveMeasure s = cbci::boolean_convolve(m1, m2);
        residual = cbci::k_additivity_residual(m1, m2, s);
        body = {{"measure", cbci::io::to_json(s)}, {"k_additivity_residual", residual}};
    } else if (op == "pow") {
        run.config["t"] = a.t;
        const cbci::PositiveMeasure m = cbci::io::measure_from_json(input(a.m, run, "m"));
        run.seal();
        const cbci::PositiveMeasure p = cbci::boolean_power(m, a.t);
        residual = cbci::k_homogeneity_residual(m, a.t, p);
        body = {{"measure", cbci::io::to_json(p)}, {"k_homogeneity_residual", residual}};
    } else {
        run.config["q"] = a.q;
        run.config["a"] = a.a;
        run.config["b"] = a.b;
        run.seal();
        const cbci::FixedPoint fp = cbci::fixed_point_measure(a.q, a.a, a.b);
        residual = cbci::fixed_point_residual(fp, a.a, a.b);
        body = {{"fixed_point", cbci::io::to_json(fp)}, {"residual", residual}};
    }
    const bool ok = residual < tol;
    body["residual_ok"] = ok;
    emit(g, run, "boolean", body, op + " residual " + fmt("%.3g", residual) + (ok ? "\n" : " (FAIL)\n"));
    return ok ? kOk : kFail;
}

// --- verify -----------------------------------------------------------------

struct VerifyArgs {
    std::vector<int> only;
    unsigned threads = 0;
};

int cmd_verify(const Global& g, const VerifyArgs& a) {
    Run run;
    run.config = {{"command", "verify"}, {"seed", g.seed}, {"criteria", a.only}};
    if (g.tol) run.config["tol"] = *g.tol;
    run.seal();
    cbci::verify::Options opts;
    opts.seed = g.seed;
    opts.tol = g.tol;
    opts.threads = a.threads;

    std::vector<int> ids = a.only;
    if (ids.empty()) {
        for (int i = 1; i <= cbci::verify::kCriteria; ++i) ids.push_back(i);
    }
    Json list = Json::array();
    bool all = true;
    for (int id : ids) {
        const cbci::verify::Criterion c = cbci::verify::run(id, opts);
        all = all && c.pass;
        if (!g.json) std::cout << cbci::verify::format_line(c) << std::endl;
        // Timings stay out of the artifact so reruns are byte-identical.
        list.push_back({{"id", c.id},
                        {"name", c.name},
                        {"pass", c.pass},
                        {"value", cbci::io::number(c.value)},
                        {"bound", cbci::io::number(c.bound)},
                        {"detail", c.detail}});
    }
    const Json doc = run.stamp({{"criteria", list}, {"all_pass", all}});
    cbci::io::write_json(fs::path(g.out) / "verify.json", doc);
    if (g.json) std::cout << doc.dump(2) << "\n";
    return all ? kOk : kFail;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Continuous-state branching processes with continuous immigration: "
                 "Thorin correspondence, sector bounds, simulation"};
    app.require_subcommand(1);
    app.set_version_flag("--version", cbci::io::version());

    Global g;
    double tol = 0.0;
    auto* tol_opt = app.add_option("--tol", tol, "Override the governing tolerance")
                        ->check(CLI::PositiveNumber);
    app.add_option("--out", g.out, "Output directory for artifacts");
    app.add_option("--seed", g.seed, "Seed for Monte Carlo work");
    app.add_flag("--json", g.json, "Print the JSON artifact to stdout");
    // Global flags are accepted after the subcommand as well.
    app.fallthrough();

    CorrespondArgs ca;
    auto* corr = app.add_subcommand("correspond", "Thorin pair <-> quadruplet");
    corr->add_option("direction", ca.direction, "forward | backward")
        ->required()
        ->check(CLI::IsMember({"forward", "backward"}));
    corr->add_option("file", ca.file, "Pair JSON (forward) or quadruplet JSON (backward)")->required();
    corr->add_option("--grid-points", ca.grid_points, "Inversion grid size")->check(CLI::Range(8, 100000));

    SectorArgs sa;
    auto* sec = app.add_subcommand("sector", "Sector constant bounds and estimate");
    sec->add_option("file", sa.file, "Thorin pair or quadruplet JSON")->required();
    sec->add_option("--grid", sa.grid, "Exponents for the empirical estimate");

    SimulateArgs sm;
    auto* sim = app.add_subcommand("simulate", "Monte Carlo paths of the process");
    sim->add_option("file", sm.file, "Quadruplet JSON")->required();
    sim->add_option("--x0", sm.x0, "Initial value")->check(CLI::NonNegativeNumber);
    sim->add_option("--T", sm.T, "Horizon")->check(CLI::NonNegativeNumber);
    sim->add_option("--dt", sm.dt, "Time step")->check(CLI::PositiveNumber);
    sim->add_option("--paths", sm.paths, "Number of paths")->check(CLI::PositiveNumber);
    sim->add_option("--threads", sm.threads, "Worker threads (0 = hardware)");
    sim->add_option("--lambda", sm.lambda, "Laplace grid for the transient check");

    InvertArgs ia;
    auto* inv = app.add_subcommand("invert", "Raw Stieltjes inversion on a grid");
    inv->add_option("direction", ia.direction, "forward | backward")
        ->required()
        ->check(CLI::IsMember({"forward", "backward"}));
    inv->add_option("file", ia.file, "Pair or quadruplet JSON")->required();
    inv->add_option("--lo", ia.lo, "Grid start")->required();
    inv->add_option("--hi", ia.hi, "Grid end")->required();
    inv->add_option("--points", ia.points, "Grid size");
    inv->add_option("--y0", ia.y0, "Largest imaginary offset")->check(CLI::PositiveNumber);
    inv->add_option("--levels", ia.levels, "Number of halvings")->check(CLI::Range(4, 30));

    BooleanArgs ba;
    auto* boo = app.add_subcommand("boolean", "Boolean convolution and fixed points");
    boo->require_subcommand(1);
    auto* conv = boo->add_subcommand("conv", "m1 (+) m2");
    conv->add_option("m1", ba.m1)->required();
    conv->add_option("m2", ba.m2)->required();
    auto* pw = boo->add_subcommand("pow", "Boolean power");
    pw->add_option("m", ba.m)->required();
    pw->add_option("--t", ba.t, "Exponent")->check(CLI::PositiveNumber);
    auto* fix = boo->add_subcommand("fixed-point", "Measure with M = m");
    fix->add_option("--q", ba.q)->check(CLI::NonNegativeNumber);
    fix->add_option("--a", ba.a)->check(CLI::NonNegativeNumber);
    fix->add_option("--b", ba.b)->check(CLI::NonNegativeNumber);

    VerifyArgs va;
    auto* ver = app.add_subcommand("verify", "Run the acceptance criteria");
    ver->add_option("--criterion", va.only, "Run only these ids")->check(CLI::Range(1, cbci::verify::kCriteria));
    ver->add_option("--threads", va.threads, "Worker threads for simulation");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kInput;
    }
    if (tol_opt->count() > 0) g.tol = tol;

    try {
        if (*corr) return cmd_correspond(g, ca);
        if (*sec) return cmd_sector(g, sa);
        if (*sim) return cmd_simulate(g, sm);
        if (*inv) return cmd_invert(g, ia);
        if (*boo) return cmd_boolean(g, *conv ? "conv" : *pw ? "pow" : "fixed-point", ba);
        if (*ver) return cmd_verify(g, va);
    } catch (const cbci::DomainError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kInput;
    } catch (const cbci::InvariantError& e) {
        std::cerr << "invariant violated: " << e.what() << "\n";
        return kInvariant;
    } catch (const cbci::NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return kNumeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kNumeric;
    }
    return kOk;
}
