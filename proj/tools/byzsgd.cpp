// Command-line front end: run experiment grids, verify resilience bounds,
// list available kinds.

#include <iostream>

#include <CLI11.hpp>

#include "byzsgd/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Byzantine-tolerant gradient aggregation simulator"};
    app.require_subcommand(1);

    // run
    std::string config_path, out_dir;
    int replicates = 1;
    std::uint64_t seed_base = 0;
    bool seed_given = false;
    bool timing = false;
    CLI::App* run = app.add_subcommand("run", "Run a (replicated) experiment grid");
    run->add_option("--config", config_path, "Experiment config file (JSON)")->required();
    run->add_option("--out", out_dir, "Output directory for CSV metrics")->required();
    run->add_option("--replicates", replicates, "Replicates per grid cell")
        ->check(CLI::PositiveNumber);
    run->add_option_function<std::uint64_t>(
           "--seed",
           [&](const std::uint64_t& s) {
               seed_base = s;
               seed_given = true;
           },
           "Base seed (replicate r uses seed + r); defaults to the config seed");
    run->add_flag("--timing", timing,
                  "Write measured aggregation wall times into the CSVs (breaks byte-level "
                  "determinism of the output)");

    // verify
    int v_n = 20, v_q = 6, v_d = 1;
    double v_sigma = 1.0, v_gnorm = 1.0;
    std::uint64_t v_seed = 0;
    CLI::App* verify = app.add_subcommand("verify", "Resilience bounds and counterexamples");
    verify->add_option("--n", v_n, "Worker count")->required();
    verify->add_option("--q", v_q, "Byzantine count")->required();
    verify->add_option("--d", v_d, "Gradient dimension")->required();
    verify->add_option("--sigma", v_sigma, "Per-component gradient stddev")->required();
    verify->add_option("--gnorm", v_gnorm, "Gradient norm ||g||")->required();
    verify->add_option("--seed", v_seed, "Seed for the counterexample gradients");

    CLI::App* list = app.add_subcommand("list", "List aggregator/attack/problem kinds");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            byzsgd::RunManifest manifest;
            manifest.doc = byzsgd::load_config_file(config_path);
            manifest.replicates = replicates;
            manifest.seed_base = seed_given ? seed_base : manifest.doc.base.seed;
            manifest.out_dir = out_dir;
            manifest.include_timing = timing;
            byzsgd::run_manifest(manifest, std::cout);
            return 0;
        }
        if (verify->parsed()) {
            const bool ok =
                byzsgd::verify_report(v_n, v_q, v_d, v_sigma, v_gnorm, v_seed, std::cout);
            return ok ? 0 : 1;
        }
        if (list->parsed()) {
            std::cout << byzsgd::list_kinds();
            return 0;
        }
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 1;
    }
    return 0;
}
