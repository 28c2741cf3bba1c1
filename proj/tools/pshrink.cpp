// Command-line front end: `pshrink run <config>` and `pshrink verify`.

#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "pshrink/error.h"
#include "pshrink/runner.h"

int main(int argc, char** argv) {
    CLI::App app{"Shrinkage estimators of a normal mean with a singular Wishart covariance "
                 "estimate: risk simulation and identity checks"};
    app.require_subcommand(1);

    unsigned jobs = 0;
    app.add_option("--jobs,-j", jobs, "worker threads (0 = all cores); never changes results");

    auto* run = app.add_subcommand("run", "run the scenarios of a config file");
    std::string config_path;
    std::string out_dir;
    std::size_t replicates = 0;
    bool no_svg = false;
    run->add_option("config", config_path, "INI-style scenario config")->required();
    run->add_option("--out,-o", out_dir, "output directory (overrides output_dir)");
    run->add_option("--replicates,-r", replicates, "replicates per scenario (override)")
        ->check(CLI::PositiveNumber);
    run->add_flag("--no-svg", no_svg, "skip SVG charts");
    run->add_option("--jobs,-j", jobs, "worker threads");

    auto* verify = app.add_subcommand("verify", "check analytic identities against oracles");
    std::string only;
    std::uint64_t seed = pshrink::SuiteOptions{}.seed;
    std::string csv;
    std::size_t mc_reps = pshrink::SuiteOptions{}.mc_replicates;
    verify->add_option("--only", only, "run a single identity")
        ->check(CLI::IsMember(pshrink::identity_names()));
    verify->add_option("--seed", seed, "master seed for random configurations and draws");
    verify->add_option("--csv", csv, "also write the report table as CSV");
    verify->add_option("--mc-replicates", mc_reps, "replicates for Monte-Carlo identities")
        ->check(CLI::Range(std::size_t{1000}, std::size_t{100000000}));
    verify->add_option("--jobs,-j", jobs, "worker threads");

    CLI11_PARSE(app, argc, argv);

    if (*run) {
        pshrink::RunManifest manifest;
        try {
            manifest = pshrink::load_config(config_path);
        } catch (const pshrink::Error& e) {
            std::cerr << "{\"status\":\"error\",\"kind\":\"" << pshrink::to_string(e.kind())
                      << "\",\"message\":" << nlohmann::json(e.what()).dump() << "}\n";
            return 2;
        }
        pshrink::RunOverrides ov;
        if (!out_dir.empty()) ov.output_dir = out_dir;
        if (replicates > 0) ov.replicates = replicates;
        if (no_svg) ov.emit_svg = false;
        ov.jobs = jobs;
        return pshrink::run_manifest(std::move(manifest), ov, std::cout, std::cerr);
    }

    pshrink::SuiteOptions opts;
    opts.seed = seed;
    opts.jobs = jobs;
    opts.mc_replicates = mc_reps;
    if (!only.empty()) opts.only = only;
    return pshrink::run_verify(opts, std::cout, std::cerr,
                               csv.empty() ? std::nullopt : std::optional<std::string>(csv));
}
