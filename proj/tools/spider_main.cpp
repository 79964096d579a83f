#include "spider/domain.hpp"
#include "spider/montecarlo.hpp"
#include "spider/value.hpp"
#include "spider/verify.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <string>

using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

// Exit codes: 0 success, 1 verification failure, 2 invalid input,
// 3 numerical tolerance failure, 4 simulation cap exhaustion.
enum ExitCode : int {
    kOk = 0,
    kVerificationFailed = 1,
    kInvalidInput = 2,
    kToleranceFailure = 3,
    kCapExhausted = 4,
};

std::string iso_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

json make_manifest(const std::string& command, json parameters) {
    return json{{"command", command},
                {"version", kVersion},
                {"timestamp", iso_timestamp()},
                {"parameters", std::move(parameters)}};
}

void emit_manifest_comments(std::ostream& os, const json& manifest) {
    os << "# command=" << manifest["command"].get<std::string>()
       << " version=" << manifest["version"].get<std::string>()
       << " timestamp=" << manifest["timestamp"].get<std::string>() << "\n";
    os << "# parameters=" << manifest["parameters"].dump() << "\n";
}

/// CSV rendering of a flat payload: "key,value" rows; arrays of objects get
/// one row per element. The manifest travels as '#' comment lines.
void emit_csv_keyvalue(const json& out) {
    emit_manifest_comments(std::cout, out["manifest"]);
    std::cout << "key,value\n";
    for (const auto& [key, val] : out.items()) {
        if (key == "manifest" || val.is_structured()) continue;
        std::cout << key << "," << (val.is_number_float() ? fmt17(val.get<double>()) : val.dump())
                  << "\n";
    }
}

void emit(const json& out, const std::string& format) {
    if (format == "csv") {
        emit_csv_keyvalue(out);
        return;
    }
    std::cout << out.dump(2) << "\n";
}

struct CommonMc {
    std::uint64_t paths = 100'000;
    double step = 1.0 / 64;
    std::uint64_t seed = 1;
    std::uint64_t max_steps = 100'000'000;
    int threads = 0;
    bool antithetic = false;

    spider::SimConfig config() const {
        spider::SimConfig cfg;
        cfg.num_paths = paths;
        cfg.step = step;
        cfg.seed = seed;
        cfg.max_steps = max_steps;
        cfg.threads = threads;
        cfg.antithetic = antithetic;
        return cfg;
    }
    json to_json() const {
        return json{{"paths", paths},     {"step", step},
                    {"seed", seed},       {"max_steps", max_steps},
                    {"threads", threads}, {"antithetic", antithetic}};
    }
    CLI::Option* step_opt = nullptr;

    void add_flags(CLI::App* cmd) {
        cmd->add_option("--paths", paths, "number of Monte Carlo paths");
        step_opt = cmd->add_option("--step", step, "spatial step h (time step h^2); 1/2 must be a multiple");
        cmd->add_option("--seed", seed, "RNG seed");
        cmd->add_option("--max-steps", max_steps, "per-path step cap");
        cmd->add_option("--threads", threads, "worker threads (0 = hardware)");
        cmd->add_flag("--antithetic", antithetic, "antithetic path pairing");
    }
};

json suite_to_json(const spider::verify::SuiteReport& rep, int n) {
    json details = json::array();
    for (const auto& d : rep.details)
        details.push_back({{"check", d.name},
                           {"measured", d.measured},
                           {"threshold", d.threshold},
                           {"pass", d.pass}});
    return json{{"suite", rep.suite}, {"n", n}, {"pass", rep.pass}, {"worst", rep.worst},
                {"details", details}};
}

spider::EvaluatorConfig evaluator_config(double tolerance) {
    spider::EvaluatorConfig cfg;
    cfg.quadrature.abs_tol = tolerance;
    cfg.quadrature.rel_tol = std::min(cfg.quadrature.rel_tol, tolerance);
    return cfg;
}

int run_constant(int n, double tolerance, const std::string& format) {
    spider::ValueEvaluator ev(spider::Params(n), evaluator_config(tolerance));
    json out{{"n", n}, {"u000", ev.u000()}, {"c_n", ev.best_constant()}};
    out["manifest"] = make_manifest("constant", json{{"n", n}, {"tolerance", tolerance}});
    emit(out, format);
    return kOk;
}

int run_table(int n_max, double tolerance, const std::string& format) {
    if (n_max < 1) throw std::invalid_argument("table: --n-max must be >= 1");
    const spider::EvaluatorConfig cfg = evaluator_config(tolerance);
    const json manifest = make_manifest("table", json{{"n_max", n_max}, {"tolerance", tolerance}});
    if (format == "csv") {
        emit_manifest_comments(std::cout, manifest);
        std::cout << "n,u000,c_n\n";
        for (int n = 1; n <= n_max; ++n) {
            spider::ValueEvaluator ev(spider::Params(n), cfg);
            std::cout << n << "," << fmt17(ev.u000()) << "," << fmt17(ev.best_constant()) << "\n";
        }
        return kOk;
    }
    json rows = json::array();
    for (int n = 1; n <= n_max; ++n) {
        spider::ValueEvaluator ev(spider::Params(n), cfg);
        rows.push_back({{"n", n}, {"u000", ev.u000()}, {"c_n", ev.best_constant()}});
    }
    json out{{"rows", rows}, {"manifest", manifest}};
    std::cout << out.dump(2) << "\n";
    return kOk;
}

int run_value(int n, double x, double y, double z, const std::string& format) {
    const spider::Params params(n);
    const spider::State s(x, y, z);
    spider::ValueEvaluator ev(params);
    json out{{"n", n},
             {"x", x},
             {"y", y},
             {"z", z},
             {"region", spider::region_name(ev.classify(s))},
             {"u", ev.evaluate(s)},
             {"gain", spider::gain(s)},
             {"is_stopping", spider::in_stopping_region(ev.boundary(), s)}};
    out["manifest"] =
        make_manifest("value", json{{"n", n}, {"x", x}, {"y", y}, {"z", z}});
    emit(out, format);
    return kOk;
}

int run_boundary(int n, const CLI::Option* z_opt, double z, const CLI::Option* s_opt, double s,
                 const CLI::Option* y_opt, double y, const std::string& plot_prefix, int samples,
                 const std::string& format) {
    if (n < 2) throw std::domain_error("boundary: requires n >= 2");
    const spider::BoundaryFn boundary{spider::Params(n)};
    json out{{"n", n}};
    json params{{"n", n}, {"samples", samples}};
    if (*z_opt) {
        out["z"] = z;
        out["f"] = boundary.f_lower(z);
        params["z"] = z;
    }
    if (*s_opt) {
        out["s"] = s;
        out["phi"] = boundary.phi(s);
        params["s"] = s;
    }
    if (*y_opt) {
        out["y"] = y;
        out["g"] = spider::BoundaryFn::g_upper(y);
        params["y"] = y;
    }
    if (!plot_prefix.empty()) {
        params["plot_data"] = plot_prefix;
        const json manifest = make_manifest("boundary", params);
        const std::string f_file = plot_prefix + "boundary_f.csv";
        {
            std::ofstream os(f_file);
            if (!os) throw std::invalid_argument("boundary: cannot write " + f_file);
            emit_manifest_comments(os, manifest);
            os << "z,f\n";
            for (int i = 0; i < samples; ++i) {
                const double zz = -1.5 + 1.5 * i / (samples - 1);
                os << fmt17(zz) << "," << fmt17(boundary.f_lower(zz)) << "\n";
            }
        }
        const std::string u_file = plot_prefix + "u_half_half.csv";
        {
            spider::ValueEvaluator ev{spider::Params(n)};
            std::ofstream os(u_file);
            if (!os) throw std::invalid_argument("boundary: cannot write " + u_file);
            emit_manifest_comments(os, manifest);
            os << "s,u_half_half\n";
            for (int i = 0; i < samples; ++i) {
                const double ss = -0.5 + 0.5 * i / (samples - 1);
                os << fmt17(ss) << "," << fmt17(ev.u_half_half(ss)) << "\n";
            }
        }
        out["files"] = json::array({f_file, u_file});
    }
    out["manifest"] = make_manifest("boundary", params);
    emit(out, format);
    return kOk;
}

int run_simulate(int n, const std::string& rule_text, const CommonMc& mc, const std::string& format) {
    const spider::Params params(n);
    const spider::StoppingRule rule = spider::parse_rule(rule_text);
    const spider::EstimateResult est = spider::estimate_payoff(params, mc.config(), rule);
    json out{{"n", n},
             {"rule", spider::rule_name(rule)},
             {"mean_payoff", est.mean_payoff},
             {"std_err", est.stderr_payoff},
             {"mean_tau", est.mean_tau},
             {"stderr_tau", est.stderr_tau},
             {"mean_D", est.mean_d},
             {"stderr_D", est.stderr_d},
             {"samples", est.samples},
             {"completed", est.completed},
             {"capped", est.capped}};
    json params_json = mc.to_json();
    params_json["n"] = n;
    params_json["rule"] = rule_text;
    out["manifest"] = make_manifest("simulate", params_json);
    emit(out, format);
    return kOk;
}

int run_verify(int n, const std::string& suite, const CommonMc& mc, double lambda, double horizon,
               int grid_points, double tolerance, const std::string& format) {
    const spider::Params params(n);
    double effective_step = mc.step;
    spider::verify::SuiteReport rep;
    if (suite == "zsigma") {
        spider::SimConfig cfg = mc.config();
        // the walk needs a fine grid here: it parks O(h) mass on "no second
        // rib yet", which the continuum law spreads over (-1/2, 0)
        if (mc.step_opt != nullptr && mc.step_opt->count() == 0) cfg.step = 1.0 / 1024;
        effective_step = cfg.step;
        rep = spider::verify::zsigma(params, cfg);
    } else if (suite == "scaling") {
        rep = spider::verify::scaling(params, mc.config(), lambda, horizon);
    } else {
        spider::ValueEvaluator ev(params, evaluator_config(tolerance));
        if (suite == "majorization")
            rep = spider::verify::majorization(ev);
        else if (suite == "seams")
            rep = spider::verify::seams(ev);
        else if (suite == "kink")
            rep = spider::verify::kink(ev);
        else if (suite == "neumann")
            rep = spider::verify::neumann(ev);
        else if (suite == "symmetry")
            rep = spider::verify::symmetry(ev);
        else if (suite == "uy")
            rep = spider::verify::uy_consistency(ev);
        else if (suite == "boundary-ode")
            rep = spider::verify::boundary_ode(ev);
        else if (suite == "n2-reduction")
            rep = spider::verify::n2_reduction(ev, grid_points);
        else if (suite == "inequality")
            rep = spider::verify::inequality(ev, mc.config());
        else
            throw std::invalid_argument("verify: unknown suite " + suite);
    }
    json out = suite_to_json(rep, n);
    json params_json = mc.to_json();
    params_json["step"] = effective_step;
    params_json["n"] = n;
    params_json["suite"] = suite;
    params_json["lambda"] = lambda;
    params_json["horizon"] = horizon;
    params_json["grid_points"] = grid_points;
    params_json["tolerance"] = tolerance;
    out["manifest"] = make_manifest("verify", params_json);
    if (format == "csv") {
        emit_manifest_comments(std::cout, out["manifest"]);
        std::cout << "suite,check,measured,threshold,pass\n";
        for (const auto& d : rep.details)
            std::cout << rep.suite << ",\"" << d.name << "\"," << fmt17(d.measured) << ","
                      << fmt17(d.threshold) << "," << (d.pass ? "true" : "false") << "\n";
    } else {
        std::cout << out.dump(2) << "\n";
    }
    return rep.pass ? kOk : kVerificationFailed;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"optimal stopping of the spider-process diameter: constants, value function, "
                 "free boundary, and Monte Carlo verification"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    std::string format = "json";
    auto* format_opt = app.add_option("--format", format, "output format: json or csv (table defaults to csv)")
                           ->check(CLI::IsMember({"json", "csv"}));

    int n = 1;
    double tolerance = 1e-10;

    auto* c_constant = app.add_subcommand("constant", "u000 and C_n = 2 sqrt(U(0,0,0)) for one n");
    c_constant->add_option("--n", n, "number of rays")->required();
    c_constant->add_option("--tolerance", tolerance, "quadrature tolerance");

    int n_max = 1;
    auto* c_table = app.add_subcommand("table", "CSV table (n, u000, c_n) for n = 1..n_max");
    c_table->add_option("--n-max", n_max, "largest n")->required();
    c_table->add_option("--tolerance", tolerance, "quadrature tolerance");

    double x = 0.0, y = 0.0, z = 0.0;
    auto* c_value = app.add_subcommand("value", "evaluate U at a state of the reduced space");
    c_value->add_option("--n", n, "number of rays")->required();
    c_value->add_option("--x", x, "signed position");
    c_value->add_option("--y", y, "longest rib");
    c_value->add_option("--z", z, "minus the second-longest rib");

    double bz = 0.0, bs = 0.0, by = 0.0;
    std::string plot_prefix;
    int samples = 201;
    auto* c_boundary = app.add_subcommand("boundary", "free-boundary queries and plot data");
    c_boundary->add_option("--n", n, "number of rays")->required();
    auto* z_opt = c_boundary->add_option("--z", bz, "query f(z)");
    auto* s_opt = c_boundary->add_option("--s", bs, "query phi(s)");
    auto* y_opt = c_boundary->add_option("--y", by, "query g(y)");
    c_boundary->add_option("--plot-data", plot_prefix, "write <prefix>boundary_f.csv and <prefix>u_half_half.csv");
    c_boundary->add_option("--samples", samples, "rows per plot file")->check(CLI::Range(2, 1000000));

    std::string rule_text = "optimal";
    CommonMc mc;
    auto* c_simulate = app.add_subcommand("simulate", "Monte Carlo payoff estimate from the origin");
    c_simulate->add_option("--n", n, "number of rays")->required();
    c_simulate->add_option("--rule", rule_text,
                           "optimal | fixed-time:T | first-hit-diameter:D");
    mc.add_flags(c_simulate);

    std::string suite;
    double lambda = 2.0, horizon = 1.0;
    int grid_points = 10000;
    auto* c_verify = app.add_subcommand("verify", "run a property suite; exit 1 on failure");
    c_verify->add_option("--n", n, "number of rays")->required();
    c_verify
        ->add_option("--suite", suite,
                     "majorization | seams | kink | neumann | symmetry | uy | boundary-ode | "
                     "n2-reduction | zsigma | scaling | inequality")
        ->required();
    mc.add_flags(c_verify);
    c_verify->add_option("--lambda", lambda, "scaling factor for the scaling suite");
    c_verify->add_option("--horizon", horizon, "time horizon for the scaling suite");
    c_verify->add_option("--grid-points", grid_points, "grid size for n2-reduction");
    c_verify->add_option("--tolerance", tolerance, "quadrature tolerance");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kInvalidInput;
    }

    try {
        if (app.got_subcommand(c_constant)) return run_constant(n, tolerance, format);
        if (app.got_subcommand(c_table))
            return run_table(n_max, tolerance, format_opt->count() > 0 ? format : "csv");
        if (app.got_subcommand(c_value)) return run_value(n, x, y, z, format);
        if (app.got_subcommand(c_boundary))
            return run_boundary(n, z_opt, bz, s_opt, bs, y_opt, by, plot_prefix, samples, format);
        if (app.got_subcommand(c_simulate)) return run_simulate(n, rule_text, mc, format);
        if (app.got_subcommand(c_verify))
            return run_verify(n, suite, mc, lambda, horizon, grid_points, tolerance, format);
    } catch (const spider::ToleranceError& e) {
        std::cerr << json{{"error", e.what()}}.dump() << "\n";
        return kToleranceFailure;
    } catch (const spider::SimulationCapError& e) {
        std::cerr << json{{"error", e.what()}}.dump() << "\n";
        return kCapExhausted;
    } catch (const std::domain_error& e) {
        std::cerr << json{{"error", e.what()}}.dump() << "\n";
        return kInvalidInput;
    } catch (const std::invalid_argument& e) {
        std::cerr << json{{"error", e.what()}}.dump() << "\n";
        return kInvalidInput;
    }
    return kInvalidInput;
}
