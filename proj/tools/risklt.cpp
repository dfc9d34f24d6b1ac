// Command-line front end: path fixtures, pathwise local-time queries, profile
// and occupation checks, the analytic expected-local-time sweep, and the
// worked half-line example with its Monte Carlo cross-check.
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "risklt/analytics.hpp"
#include "risklt/localtime.hpp"
#include "risklt/montecarlo.hpp"
#include "risklt/occupation.hpp"
#include "risklt/process.hpp"
#include "risklt/version.hpp"

namespace {

using nlohmann::json;
using namespace risklt;

// File could not be read or written (exit code 4), as opposed to a usage
// problem (exit code 2).
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string fmt_g(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Value columns keep a trailing ".0" on integral values so they read as
// floating point; grid echoes use fmt_g verbatim.
std::string fmt_value(double v) {
    std::string s = fmt_g(v);
    for (char ch : s)
        if (!std::isdigit(static_cast<unsigned char>(ch)) && ch != '-') return s;
    return s + ".0";
}

// Effective settings of one invocation; every field is echoed into every
// output, and the echo parses back as a config file.
struct RunConfig {
    double x0 = 0.0;
    double c = 1.0;
    double alpha = 1.0;
    double beta = 1.0;
    double horizon = 1.0;
    double t = 1.0;
    double epsilon = 1.0;
    std::vector<double> levels;
    std::string series = "adaptive";
    int terms = 5;
    double series_rel_tol = 1e-12;
    int max_terms = 500;
    double quad_rel_tol = 1e-8;
    int quad_max_depth = 48;
    std::uint64_t seed = 1;
    long long n_paths = 10000;
    int threads = 1;
    bool include_singular = false;
    std::string format = "csv";
    std::string out;
    std::string g;
    long long mc = 0;
    std::string path_file;
};

RunConfig base_defaults(const std::string& subcommand) {
    RunConfig cfg;
    if (subcommand == "simulate" || subcommand == "occupation-check") cfg.format = "json";
    if (subcommand == "occupation-check") cfg.g = "random";
    if (subcommand == "paper-example") {
        cfg.format = "json";
        cfg.x0 = 4.0;
        cfg.c = 1.1;
        cfg.alpha = 1.0;
        cfg.beta = 1.0;
        cfg.t = 1.0;
        cfg.epsilon = 12.0;
        cfg.series = "fixed";
        cfg.terms = 5;
        cfg.include_singular = false;
        cfg.g = "delta";
    }
    return cfg;
}

json config_to_json(const RunConfig& cfg) {
    json series;
    if (cfg.series == "fixed")
        series = {{"kind", "fixed"}, {"terms", cfg.terms}};
    else
        series = {{"kind", "adaptive"}, {"rel_tol", cfg.series_rel_tol}, {"max_terms", cfg.max_terms}};
    return json{
        {"params",
         {{"x0", cfg.x0},
          {"c", cfg.c},
          {"alpha", cfg.alpha},
          {"claims", {{"kind", "exponential"}, {"beta", cfg.beta}}}}},
        {"horizon", cfg.horizon},
        {"t", cfg.t},
        {"epsilon", cfg.epsilon},
        {"levels", cfg.levels},
        {"numeric",
         {{"series_mode", series},
          {"quad_rel_tol", cfg.quad_rel_tol},
          {"quad_max_depth", cfg.quad_max_depth}}},
        {"seed", cfg.seed},
        {"n_paths", cfg.n_paths},
        {"threads", cfg.threads},
        {"include_singular", cfg.include_singular},
        {"format", cfg.format},
        {"out", cfg.out},
        {"g", cfg.g},
        {"mc", cfg.mc},
        {"path_file", cfg.path_file}};
}

void expect_keys(const json& j, std::initializer_list<const char*> keys, const char* where) {
    for (const auto& item : j.items()) {
        bool known = false;
        for (const char* k : keys)
            if (item.key() == k) {
                known = true;
                break;
            }
        if (!known)
            throw std::invalid_argument("unknown key '" + item.key() + "' in " + where);
    }
}

// Applies a (possibly partial) config document over cfg; unknown keys are
// usage errors so typos never pass silently.  A whole emitted output record
// may be fed back: when a "config" member is present the siblings are this
// tool's own output fields, and only the nested config is read.
void apply_config(const json& raw, RunConfig& cfg) {
    if (!raw.is_object()) throw std::invalid_argument("config must be a JSON object");
    const json& j = raw.contains("config") ? raw["config"] : raw;
    if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
    expect_keys(j,
                {"params", "horizon", "t", "epsilon", "levels", "numeric", "seed", "n_paths",
                 "threads", "include_singular", "format", "out", "g", "mc", "path_file"},
                "config");
    if (j.contains("params")) {
        const json& p = j["params"];
        expect_keys(p, {"x0", "c", "alpha", "claims"}, "config.params");
        if (p.contains("x0")) cfg.x0 = p["x0"].get<double>();
        if (p.contains("c")) cfg.c = p["c"].get<double>();
        if (p.contains("alpha")) cfg.alpha = p["alpha"].get<double>();
        if (p.contains("claims")) {
            const json& cl = p["claims"];
            expect_keys(cl, {"kind", "beta"}, "config.params.claims");
            if (cl.contains("kind") && cl["kind"].get<std::string>() != "exponential")
                throw std::invalid_argument("config: only the exponential claim kind is supported");
            if (cl.contains("beta")) cfg.beta = cl["beta"].get<double>();
        }
    }
    if (j.contains("horizon")) cfg.horizon = j["horizon"].get<double>();
    if (j.contains("t")) cfg.t = j["t"].get<double>();
    if (j.contains("epsilon")) cfg.epsilon = j["epsilon"].get<double>();
    if (j.contains("levels")) cfg.levels = j["levels"].get<std::vector<double>>();
    if (j.contains("numeric")) {
        const json& n = j["numeric"];
        expect_keys(n, {"series_mode", "quad_rel_tol", "quad_max_depth"}, "config.numeric");
        if (n.contains("series_mode")) {
            const json& s = n["series_mode"];
            std::string kind = s.contains("kind") ? s["kind"].get<std::string>() : cfg.series;
            if (kind == "fixed") {
                expect_keys(s, {"kind", "terms"}, "config.numeric.series_mode");
                cfg.series = "fixed";
                if (s.contains("terms")) cfg.terms = s["terms"].get<int>();
            } else if (kind == "adaptive") {
                expect_keys(s, {"kind", "rel_tol", "max_terms"}, "config.numeric.series_mode");
                cfg.series = "adaptive";
                if (s.contains("rel_tol")) cfg.series_rel_tol = s["rel_tol"].get<double>();
                if (s.contains("max_terms")) cfg.max_terms = s["max_terms"].get<int>();
            } else {
                throw std::invalid_argument("config: series_mode.kind must be fixed or adaptive");
            }
        }
        if (n.contains("quad_rel_tol")) cfg.quad_rel_tol = n["quad_rel_tol"].get<double>();
        if (n.contains("quad_max_depth")) cfg.quad_max_depth = n["quad_max_depth"].get<int>();
    }
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("n_paths")) cfg.n_paths = j["n_paths"].get<long long>();
    if (j.contains("threads")) cfg.threads = j["threads"].get<int>();
    if (j.contains("include_singular")) cfg.include_singular = j["include_singular"].get<bool>();
    if (j.contains("format")) cfg.format = j["format"].get<std::string>();
    if (j.contains("out")) cfg.out = j["out"].get<std::string>();
    if (j.contains("g")) cfg.g = j["g"].get<std::string>();
    if (j.contains("mc")) cfg.mc = j["mc"].get<long long>();
    if (j.contains("path_file")) cfg.path_file = j["path_file"].get<std::string>();
}

std::string read_file(const std::string& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw IoError("cannot read file: " + file);
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("read failed: " + file);
    return ss.str();
}

ModelParams to_params(const RunConfig& cfg) {
    ModelParams p{cfg.x0, cfg.c, cfg.alpha, ClaimModel::exponential(cfg.beta)};
    p.validate();
    return p;
}

NumericConfig to_numeric(const RunConfig& cfg) {
    NumericConfig n;
    n.series_mode = cfg.series == "fixed" ? SeriesMode::fixed(cfg.terms)
                                          : SeriesMode::adaptive(cfg.series_rel_tol, cfg.max_terms);
    n.quad_rel_tol = cfg.quad_rel_tol;
    n.quad_max_depth = cfg.quad_max_depth;
    n.validate();
    return n;
}

json record_base(const RunConfig& cfg) {
    return json{{"version", kVersion}, {"config", config_to_json(cfg)}};
}

std::string csv_comment(const RunConfig& cfg) {
    return "# " + record_base(cfg).dump() + "\n";
}

// Fixture files are either a bare path document or the wrapped record that
// the simulate subcommand writes.
SamplePath load_path_file(const std::string& file) {
    std::string text = read_file(file);
    try {
        json j = json::parse(text);
        if (j.is_object() && j.contains("path")) {
            expect_keys(j, {"version", "config", "path"}, "path fixture");
            return path_from_json_string(j["path"].dump());
        }
        return path_from_json_string(text);
    } catch (const IoError&) {
        throw;
    } catch (const std::exception& e) {
        throw IoError("unusable path fixture " + file + ": " + e.what());
    }
}

SamplePath resolve_path(const RunConfig& cfg) {
    if (!cfg.path_file.empty()) return load_path_file(cfg.path_file);
    return simulate(to_params(cfg), cfg.horizon, cfg.seed);
}

void emit(const RunConfig& cfg, const std::string& body) {
    if (cfg.out.empty()) {
        std::fputs(body.c_str(), stdout);
        return;
    }
    std::ofstream outf(cfg.out, std::ios::binary);
    if (!outf) throw IoError("cannot open output file: " + cfg.out);
    outf << body;
    outf.flush();
    if (!outf) throw IoError("write failed: " + cfg.out);
}

void run_simulate(const RunConfig& cfg) {
    SamplePath path = simulate(to_params(cfg), cfg.horizon, cfg.seed);
    json j = record_base(cfg);
    j["path"] = json::parse(path_to_json_string(path));
    emit(cfg, j.dump(2) + "\n");
}

void run_local_time(const RunConfig& cfg) {
    if (cfg.levels.empty())
        throw std::invalid_argument("local-time: provide at least one level via --levels");
    SamplePath path = resolve_path(cfg);
    if (cfg.format == "json") {
        json rows = json::array();
        for (double x : cfg.levels) {
            rows.push_back({{"x", x},
                            {"local_time", local_time_at(path, cfg.t, x)},
                            {"crossings", crossing_count(path, cfg.t, x)}});
        }
        json j = record_base(cfg);
        j["rows"] = rows;
        emit(cfg, j.dump(2) + "\n");
        return;
    }
    std::string body = csv_comment(cfg) + "x,local_time,crossings\n";
    for (double x : cfg.levels) {
        body += fmt_g(x) + "," + fmt_value(local_time_at(path, cfg.t, x)) + "," +
                std::to_string(crossing_count(path, cfg.t, x)) + "\n";
    }
    emit(cfg, body);
}

void run_profile(const RunConfig& cfg) {
    SamplePath path = resolve_path(cfg);
    LocalTimeProfile prof = local_time_profile(path, cfg.t);
    if (cfg.format == "json") {
        json j = record_base(cfg);
        j["profile"] = json::parse(step_to_json_string(prof.density));
        j["atoms"] = json::array();
        for (const Atom& a : prof.atoms)
            j["atoms"].push_back({{"level", a.level}, {"mass", a.mass}});
        emit(cfg, j.dump(2) + "\n");
        return;
    }
    std::string body = csv_comment(cfg);
    for (const Atom& a : prof.atoms)
        body += "# atom," + fmt_g(a.level) + "," + fmt_value(a.mass) + "\n";
    body += step_to_csv(prof.density);
    emit(cfg, body);
}

StepFunction occupation_test_function(const RunConfig& cfg) {
    if (cfg.g == "one") return StepFunction::constant(1.0);
    if (cfg.g == "zero") return StepFunction::constant(0.0);
    if (cfg.g != "random")
        throw std::invalid_argument("occupation-check: --g must be random, one, or zero");
    // Deterministic 10-piece step over the region the paths actually visit,
    // drawn from a generator stream reserved for the test function.
    std::mt19937_64 gen(derive_path_seed(cfg.seed, 0x67u));
    double lo = cfg.x0 - 4.0 / cfg.beta - 1.0;
    double hi = cfg.x0 + cfg.c * cfg.t + 1.0;
    std::vector<double> breaks(9);
    for (double& b : breaks) b = lo + (hi - lo) * uniform_open01(gen);
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
    std::vector<double> vals(breaks.size() + 1);
    for (double& v : vals) v = 2.0 * uniform_open01(gen) - 1.0;
    return StepFunction(std::move(breaks), std::move(vals));
}

void run_occupation_check(const RunConfig& cfg) {
    StepFunction g = occupation_test_function(cfg);
    double max_disc =
        mc_occupation_identity(to_params(cfg), cfg.t, cfg.n_paths, cfg.seed, g, cfg.threads);
    json j = record_base(cfg);
    j["g"] = json::parse(step_to_json_string(g));
    j["max_discrepancy"] = max_disc;
    emit(cfg, j.dump(2) + "\n");
}

void run_expected_local_time(const RunConfig& cfg) {
    if (cfg.levels.empty())
        throw std::invalid_argument("expected-local-time: provide at least one level via --levels");
    ModelParams params = to_params(cfg);
    NumericConfig numeric = to_numeric(cfg);
    struct Row {
        double x;
        double analytic;
        bool has_mc = false;
        Estimate mc{};
    };
    std::vector<Row> rows;
    for (double x : cfg.levels) {
        Row r;
        r.x = x;
        r.analytic = expected_local_time(params, cfg.t, x, numeric, cfg.include_singular).value;
        if (cfg.mc > 0) {
            r.has_mc = true;
            r.mc = mc_expected_local_time(params, cfg.t, x, cfg.mc, cfg.seed, cfg.threads);
        }
        rows.push_back(r);
    }
    if (cfg.format == "json") {
        json j = record_base(cfg);
        j["rows"] = json::array();
        for (const Row& r : rows) {
            json row{{"x", r.x}, {"analytic", r.analytic}};
            if (r.has_mc) {
                row["mc_mean"] = r.mc.mean;
                row["mc_se"] = r.mc.std_error;
            }
            j["rows"].push_back(row);
        }
        emit(cfg, j.dump(2) + "\n");
        return;
    }
    std::string body = csv_comment(cfg) + "x,analytic,mc_mean,mc_se\n";
    for (const Row& r : rows) {
        body += fmt_g(r.x) + "," + fmt_value(r.analytic) + ",";
        if (r.has_mc)
            body += fmt_value(r.mc.mean) + "," + fmt_value(r.mc.std_error);
        else
            body += ",";
        body += "\n";
    }
    emit(cfg, body);
}

void run_paper_example(const RunConfig& cfg) {
    if (cfg.g != "delta" && cfg.g != "one")
        throw std::invalid_argument("paper-example: --g must be delta or one");
    ModelParams params = to_params(cfg);
    NumericConfig numeric = to_numeric(cfg);
    bool wide_open = cfg.g == "one";
    StepFunction a = wide_open ? StepFunction::constant(1.0) : StepFunction({0.0}, {0.0, 1.0});
    IntervalSet A = wide_open ? IntervalSet::whole_line() : IntervalSet::at_least(0.0);
    IntervalSet B = wide_open ? IntervalSet::whole_line() : IntervalSet::at_least(0.0);

    QuadResult value =
        theorem2_functional(params, cfg.t, cfg.epsilon, a, B, numeric, cfg.include_singular);

    NumericConfig tight;
    tight.series_mode = SeriesMode::adaptive(1e-12, 500);
    tight.quad_rel_tol = std::min(cfg.quad_rel_tol, 1e-10);
    tight.quad_max_depth = std::max(cfg.quad_max_depth, 48);
    QuadResult adaptive =
        theorem2_functional(params, cfg.t, cfg.epsilon, a, B, tight, cfg.include_singular);

    json j = record_base(cfg);
    j["value"] = value.value;
    j["err_estimate"] = value.err_estimate;
    j["value_adaptive"] = adaptive.value;
    j["adaptive_err_estimate"] = adaptive.err_estimate;
    if (!wide_open) {
        const double reference = 7.251e-3;
        j["reference"] = reference;
        j["relative_deviation"] = std::abs(value.value - reference) / reference;
    }
    if (cfg.mc > 0) {
        Estimate est = mc_theorem2_lhs(params, cfg.t, cfg.epsilon, A, B, cfg.mc, cfg.seed,
                                       cfg.threads);
        // The simulation measures the physical time integral, so it is held
        // against the singular-complete adaptive value.
        QuadResult truth =
            cfg.include_singular
                ? adaptive
                : theorem2_functional(params, cfg.t, cfg.epsilon, a, B, tight, true);
        j["mc"] = json::parse(estimate_to_json_string(est));
        j["mc_reference"] = truth.value;
        if (est.std_error > 0.0)
            j["mc_sigma_distance"] = std::abs(est.mean - truth.value) / est.std_error;
    } else {
        j["mc_cross_check"] =
            "risklt paper-example --series adaptive --include-singular --mc 100000";
    }
    emit(cfg, j.dump(2) + "\n");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Local time, crossings, and occupation analytics for the classical "
                 "compound-Poisson risk process"};
    app.require_subcommand(1);

    RunConfig fl;
    std::string config_file;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_file, "JSON config file; flags override its values");
        sub->add_option("--x0", fl.x0, "initial level");
        sub->add_option("--c", fl.c, "premium (drift) rate, > 0");
        sub->add_option("--alpha", fl.alpha, "claim arrival intensity, > 0");
        sub->add_option("--beta", fl.beta, "exponential claim rate, > 0");
        sub->add_option("--horizon", fl.horizon, "simulation horizon");
        sub->add_option("--t", fl.t, "evaluation time");
        sub->add_option("--epsilon", fl.epsilon, "forward increment width");
        sub->add_option("--levels", fl.levels, "comma-separated level grid")->delimiter(',');
        sub->add_option("--series", fl.series, "series truncation mode")
            ->check(CLI::IsMember({"fixed", "adaptive"}));
        sub->add_option("--terms", fl.terms, "terms in fixed series mode");
        sub->add_option("--series-rel-tol", fl.series_rel_tol, "adaptive series tolerance");
        sub->add_option("--max-terms", fl.max_terms, "adaptive series term budget");
        sub->add_option("--quad-rel-tol", fl.quad_rel_tol, "quadrature relative tolerance");
        sub->add_option("--quad-max-depth", fl.quad_max_depth, "quadrature recursion cap");
        sub->add_option("--seed", fl.seed, "master seed (default from RISKLT_SEED)");
        sub->add_option("--n-paths", fl.n_paths, "Monte Carlo path count");
        sub->add_option("--threads", fl.threads, "worker threads (result is thread-invariant)");
        sub->add_flag("--include-singular", fl.include_singular,
                      "add the no-jump (drift-through) mass to expected local time");
        sub->add_option("--format", fl.format, "output format")
            ->check(CLI::IsMember({"csv", "json"}));
        sub->add_option("--out", fl.out, "output file (default stdout)");
        sub->add_option("--g", fl.g, "test function selector (subcommand-specific)");
        sub->add_option("--mc", fl.mc, "Monte Carlo cross-check path count (0 = off)");
        sub->add_option("--path-file", fl.path_file, "path fixture to analyze");
        return sub;
    };

    CLI::App* sc_simulate = add_common(app.add_subcommand("simulate", "write a path fixture"));
    CLI::App* sc_local = add_common(
        app.add_subcommand("local-time", "local time and crossing count on a level grid"));
    CLI::App* sc_profile =
        add_common(app.add_subcommand("profile", "full local-time profile of one path"));
    CLI::App* sc_occ = add_common(app.add_subcommand(
        "occupation-check", "max pathwise discrepancy of the occupation identity"));
    CLI::App* sc_elt = add_common(app.add_subcommand(
        "expected-local-time", "analytic expected local time with optional Monte Carlo"));
    CLI::App* sc_paper = add_common(app.add_subcommand(
        "paper-example", "worked half-line example with reference value"));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    CLI::App* sub = nullptr;
    for (CLI::App* s : {sc_simulate, sc_local, sc_profile, sc_occ, sc_elt, sc_paper})
        if (s->parsed()) sub = s;

    try {
        RunConfig cfg = base_defaults(sub->get_name());
        if (const char* env_seed = std::getenv("RISKLT_SEED")) {
            try {
                std::size_t used = 0;
                std::string text(env_seed);
                unsigned long long v = std::stoull(text, &used);
                if (used != text.size()) throw std::invalid_argument("trailing characters");
                cfg.seed = v;
            } catch (const std::exception&) {
                throw std::invalid_argument("RISKLT_SEED must be a 64-bit unsigned integer");
            }
        }
        if (sub->count("--config") > 0) {
            json doc;
            try {
                doc = json::parse(read_file(config_file));
            } catch (const IoError&) {
                throw;
            } catch (const std::exception& e) {
                throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
            }
            apply_config(doc, cfg);
        }
        auto ov = [&](const char* name, auto member) {
            if (sub->count(name) > 0) cfg.*member = fl.*member;
        };
        ov("--x0", &RunConfig::x0);
        ov("--c", &RunConfig::c);
        ov("--alpha", &RunConfig::alpha);
        ov("--beta", &RunConfig::beta);
        ov("--horizon", &RunConfig::horizon);
        ov("--t", &RunConfig::t);
        ov("--epsilon", &RunConfig::epsilon);
        ov("--levels", &RunConfig::levels);
        ov("--series", &RunConfig::series);
        ov("--terms", &RunConfig::terms);
        ov("--series-rel-tol", &RunConfig::series_rel_tol);
        ov("--max-terms", &RunConfig::max_terms);
        ov("--quad-rel-tol", &RunConfig::quad_rel_tol);
        ov("--quad-max-depth", &RunConfig::quad_max_depth);
        ov("--seed", &RunConfig::seed);
        ov("--n-paths", &RunConfig::n_paths);
        ov("--threads", &RunConfig::threads);
        ov("--include-singular", &RunConfig::include_singular);
        ov("--format", &RunConfig::format);
        ov("--out", &RunConfig::out);
        ov("--g", &RunConfig::g);
        ov("--mc", &RunConfig::mc);
        ov("--path-file", &RunConfig::path_file);

        const std::string name = sub->get_name();
        if (name == "simulate")
            run_simulate(cfg);
        else if (name == "local-time")
            run_local_time(cfg);
        else if (name == "profile")
            run_profile(cfg);
        else if (name == "occupation-check")
            run_occupation_check(cfg);
        else if (name == "expected-local-time")
            run_expected_local_time(cfg);
        else
            run_paper_example(cfg);
    } catch (const NonConvergence& e) {
        std::fprintf(stderr, "error: %s (partial value %.17g, err %.17g)\n", e.what(),
                     e.partial_value, e.err_estimate);
        return 3;
    } catch (const IoError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 4;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::domain_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const json::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
