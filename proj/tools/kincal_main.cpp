#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "kincal/harness.hpp"

namespace {

using kincal::harness::ExperimentConfig;

// Seed precedence: --seed flag, then KINCAL_SEED, then the config file.
void apply_seed_overrides(ExperimentConfig& cfg, const std::optional<std::uint64_t>& flag) {
    if (const char* env = std::getenv("KINCAL_SEED")) {
        cfg.seed = std::strtoull(env, nullptr, 10);
    }
    if (flag) {
        cfg.seed = *flag;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Geometry-aware Bayesian experimental design for kinematic calibration"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::string mode_name = "both";
    std::string data_path;
    std::optional<std::uint64_t> seed_flag;

    CLI::App* run = app.add_subcommand("run", "Run the design loop and final calibration");
    run->add_option("--config", config_path, "Experiment config JSON")->required();
    run->add_option("--mode", mode_name, "bo | random | both")
        ->check(CLI::IsMember({"bo", "random", "both"}));
    run->add_option("--out", out_dir, "Output directory")->required();
    run->add_option("--seed", seed_flag, "Seed override (beats KINCAL_SEED and config)");

    CLI::App* kernel = app.add_subcommand("kernel-check",
                                          "Reproduce the kernel validity report");
    kernel->add_option("--config", config_path, "Experiment config JSON")->required();
    kernel->add_option("--out", out_dir, "Output directory")->required();

    CLI::App* calibrate = app.add_subcommand("calibrate",
                                             "Offline calibration from a measurement CSV");
    calibrate->add_option("--config", config_path, "Experiment config JSON")->required();
    calibrate->add_option("--data", data_path, "Measurement CSV")->required();
    calibrate->add_option("--out", out_dir, "Output directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        ExperimentConfig cfg = kincal::harness::load_config(config_path);
        apply_seed_overrides(cfg, seed_flag);

        if (run->parsed()) {
            kincal::harness::RunMode mode = kincal::harness::RunMode::Both;
            if (mode_name == "bo") mode = kincal::harness::RunMode::Bo;
            if (mode_name == "random") mode = kincal::harness::RunMode::Random;
            const auto bundle = kincal::harness::run_experiment(cfg, mode, out_dir);
            for (const auto& result : bundle.runs) {
                std::cout << result.mode << ": final objective "
                          << result.records.back().objective << ", calibration "
                          << (result.calibration.converged ? "converged" : "hit max iterations")
                          << " after " << result.calibration.history.size()
                          << " iterations\n";
            }
        } else if (kernel->parsed()) {
            const auto report = kincal::harness::kernel_check(cfg);
            const std::string text = kincal::harness::kernel_check_json(report);
            std::filesystem::create_directories(out_dir);
            std::ofstream file(std::filesystem::path(out_dir) / "kernel_check.json");
            file << text << '\n';
            std::cout << text << '\n';
        } else if (calibrate->parsed()) {
            const auto result = kincal::harness::calibrate_offline(cfg, data_path, out_dir);
            std::cout << "calibration "
                      << (result.converged ? "converged" : "hit max iterations") << " after "
                      << result.history.size() << " iterations; |delta| = "
                      << result.delta.norm() << '\n';
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
