#include <chrono>
#include <functional>
#include <iostream>

#include "CLI11.hpp"

#include "commands.hpp"
#include "nhsta/errors.hpp"
#include "output.hpp"

namespace fs = std::filesystem;
using namespace nhsta;
using namespace nhsta::cli;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitInvalidSta = 3;
constexpr int kExitNumeric = 4;

struct Globals {
    std::string config;
    std::string out = ".";
    int jobs = 1;
    std::uint64_t seed = 1;
    double tol = 0.0;  // 0 keeps the config value
};

void add_globals(CLI::App& app, Globals& g) {
    app.add_option("--config", g.config, "JSON run configuration")->check(CLI::ExistingFile);
    app.add_option("--out", g.out, "output directory (created if missing)");
    app.add_option("--jobs", g.jobs, "worker threads")->check(CLI::Range(1, 1024));
    app.add_option("--seed", g.seed, "seed for Monte-Carlo checks");
    app.add_option("--tol", g.tol, "integrator relative tolerance (overrides the config)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Shortcuts to adiabaticity for non-Hermitian two-level systems"};
    app.set_version_flag("--version", NHSTA_VERSION);
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    add_globals(app, g);

    std::string command;
    std::function<void(Context&)> run;
    auto sub = [&](const std::string& name, const std::string& help, std::function<void(Context&)> fn) {
        CLI::App* s = app.add_subcommand(name, help);
        s->callback([&command, &run, name, fn] {
            command = name;
            run = fn;
        });
        return s;
    };

    sub("spectrum", "instantaneous eigenvalues along the loop", cmd_spectrum);
    sub("contour", "sampled loop and sqrt branch crossings", cmd_contour);
    sub("simulate", "propagate the configured protocol", cmd_simulate);
    std::string kind;
    CLI::App* corr = sub("correct", "build a corrected protocol", [&kind](Context& c) {
        cmd_correct(c, protocol_kind_from_string(kind));
    });
    corr->add_option("kind", kind, "td | satd | radd")->required()->check(CLI::IsMember({"td", "satd", "radd"}));
    sub("validity-map", "dressing-angle validity over (t0, delta0)", cmd_validity_map);
    sub("robustness", "noise-averaged errors against t0", cmd_robustness);
    sub("optimize-radd", "search the RADD mask", cmd_optimize_radd);
    sub("encircle-check", "EP encircling and spectral swap over (t0, delta0)", cmd_encircle_check);
    sub("map-optomech", "invert fields into laser power and detuning", cmd_map_optomech);
    std::string input, plot_kind, title;
    CLI::App* plot = sub("emit-plot", "render a CSV produced by another command as SVG",
                         [&](Context& c) { cmd_emit_plot(c, input, plot_kind, title); });
    plot->add_option("--input", input, "CSV file")->required()->check(CLI::ExistingFile);
    plot->add_option("--kind", plot_kind, "probability | error-vs-t0 | rms-vs-t0 | validity-map")->required();
    plot->add_option("--title", title, "plot title");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    const auto start = std::chrono::steady_clock::now();
    Context ctx;
    ctx.out = g.out;
    ctx.jobs = g.jobs;
    ctx.seed = g.seed;
    json manifest = {{"tool", "nhsta"}, {"version", NHSTA_VERSION}, {"command", command}};
    if (command == "correct") manifest["command"] = command + " " + kind;
    int rc = kExitOk;
    std::string error;
    try {
        std::error_code ec;
        fs::create_directories(ctx.out, ec);
        if (!fs::is_directory(ctx.out)) throw ConfigError("--out: cannot create directory " + g.out);
        if (!g.config.empty()) ctx.cfg = load_config(g.config);
        if (g.tol != 0.0) {
            if (!(g.tol >= 1e-13 && g.tol <= 1e-6)) throw ConfigError("--tol: must lie in [1e-13, 1e-6]");
            ctx.cfg.tol = g.tol;
        }
        manifest["config"] = ctx.cfg.raw.is_null() ? json::object() : ctx.cfg.raw;
        run(ctx);
    } catch (const InvalidStaError& e) {
        rc = kExitInvalidSta;
        error = e.what();
        ctx.summary["n_crossings"] = e.n_crossings();
        ctx.summary["mu_end_over_pi"] = e.mu_end_over_pi();
    } catch (const ConfigError& e) {
        rc = kExitConfig;
        error = e.what();
    } catch (const NumericError& e) {
        rc = kExitNumeric;
        error = e.what();
    } catch (const std::exception& e) {
        rc = kExitNumeric;
        error = e.what();
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    manifest["outputs"] = ctx.outputs;
    manifest["summary"] = ctx.summary;
    manifest["status"] = rc == kExitOk ? "ok" : "error";
    manifest["exit_code"] = rc;
    manifest["error"] = error.empty() ? json(nullptr) : json(error);
    manifest["jobs"] = ctx.jobs;
    manifest["seed"] = ctx.seed;
    manifest["tol"] = ctx.cfg.tol;
    manifest["wall_time_s"] = wall;
    try {
        if (fs::is_directory(ctx.out)) write_json(ctx.out / "manifest.json", manifest);
    } catch (const std::exception& e) {
        std::cerr << "nhsta: cannot write manifest: " << e.what() << "\n";
    }
    if (rc != kExitOk) std::cerr << "nhsta: " << error << "\n";
    return rc;
}
