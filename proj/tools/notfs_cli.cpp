// Command-line front end: BER sweeps, invariant checks and complexity tables.

#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "notfs/detect.hpp"
#include "notfs/harness.hpp"
#include "notfs/modem.hpp"
#include "notfs/verify.hpp"

using namespace notfs;

namespace {

int run_simulate(const std::string& config_path, const std::string& preset_name,
                 std::optional<std::uint64_t> seed, std::optional<std::size_t> iterations,
                 std::optional<std::size_t> max_frames, std::optional<std::size_t> min_errors,
                 std::size_t workers, const std::string& out_dir) {
    harness::SweepConfig cfg;
    std::optional<double> caption_eta;
    std::string stem = "results";
    if (!config_path.empty()) {
        cfg = harness::load_config(config_path);
    } else {
        const auto preset = harness::preset_by_name(preset_name);
        cfg = preset.config;
        caption_eta = preset.caption_eta_percent;
        stem = preset.name;
    }
    if (seed) cfg.master_seed = *seed;
    if (iterations) cfg.iterations = *iterations;
    if (max_frames) cfg.max_frames = *max_frames;
    if (min_errors) cfg.min_bit_errors = *min_errors;
    cfg.validate();

    harness::RunOptions options;
    options.workers = workers;
    std::printf("config %s: M=%zu N=%zu alpha=%g beta=%g eta=%.2f%% decoder=%s\n",
                harness::config_hash(cfg).c_str(), cfg.M, cfg.N, cfg.alpha, cfg.beta,
                100.0 * modem::overloading_factor(cfg.alpha, cfg.beta),
                harness::to_string(cfg.decoder).c_str());
    const auto result = harness::run_sweep(cfg, options);
    std::printf("%8s %6s %10s %10s %12s %10s\n", "Eb/N0", "omega", "bits", "errors", "BER", "time[s]");
    for (const auto& c : result.cells) {
        std::printf("%8.2f %6.3f %10llu %10llu %12.4e %10.2f%s\n", c.ebn0_db, c.omega,
                    static_cast<unsigned long long>(c.bits_sent),
                    static_cast<unsigned long long>(c.bit_errors), c.ber, c.wall_time_s,
                    c.completed ? "" : ("  FAILED: " + c.diagnostic).c_str());
    }
    const auto files = harness::emit_results(result, out_dir, stem, caption_eta);
    std::printf("wrote %s and %s\n", files.csv.c_str(), files.json.c_str());
    return result.all_completed() ? 0 : 1;
}

int run_verify(std::size_t signals, std::uint64_t seed) {
    using R = tfst::Rational;
    auto checks = verify::tfst_property_suite(signals, seed,
                                              {{R{1, 1}, R{1, 1}}, {R{1, 1}, R{2, 1}}, {R{2, 1}, R{1, 1}}});
    for (auto& c : verify::detect_property_suite(100, seed)) checks.push_back(std::move(c));
    bool all = true;
    std::printf("%-6s %-62s %12s %10s\n", "result", "property", "max error", "tolerance");
    for (const auto& c : checks) {
        all = all && c.passed;
        std::printf("%-6s %-62s %12.3e %10.1e\n", c.passed ? "PASS" : "FAIL", c.name.c_str(),
                    c.max_error, c.tolerance);
    }
    return all ? 0 : 1;
}

int run_complexity(std::size_t M, std::size_t N) {
    const auto e = detect::predicted_complexity(M, N);
    std::printf("(M, N) = (%zu, %zu)\n", M, N);
    std::printf("%-16s %22s %22s\n", "", "2-D search", "1-D search");
    std::printf("%-16s %10zux%-11zu %22s\n", "QR decomposition", e.qr_rows_dim, e.qr_rows_dim,
                (std::to_string(e.qr_1d_dim) + "x" + std::to_string(e.qr_1d_dim)).c_str());
    std::printf("%-16s %22s\n", "", ("and " + std::to_string(e.qr_cols_dim) + "x" +
                                     std::to_string(e.qr_cols_dim)).c_str());
    std::printf("%-16s %22llu %22llu\n", "complex mults", static_cast<unsigned long long>(e.mults_2d),
                static_cast<unsigned long long>(e.mults_1d));
    std::printf("%-16s %22llu %22llu\n", "complex adds", static_cast<unsigned long long>(e.adds_2d),
                static_cast<unsigned long long>(e.adds_1d));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"NOTFS modulation and detection toolkit"};
    app.require_subcommand(1);

    auto* simulate = app.add_subcommand("simulate", "Run a Monte-Carlo BER sweep");
    std::string config_path, preset_name, out_dir = "results";
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> iterations, max_frames, min_errors;
    std::size_t workers = 0;
    auto* config_opt = simulate->add_option("--config", config_path, "JSON sweep configuration")
                           ->check(CLI::ExistingFile);
    auto* preset_opt = simulate->add_option("--preset", preset_name, "fig2a, fig2b, fig3, fig4a or fig4b");
    config_opt->excludes(preset_opt);
    simulate->add_option("--seed", seed, "Override the master seed");
    simulate->add_option("--iterations", iterations, "Override the IM iteration count");
    simulate->add_option("--max-frames", max_frames, "Override the per-cell frame cap");
    simulate->add_option("--min-errors", min_errors, "Override the per-cell error target");
    simulate->add_option("--workers", workers, "Worker threads (default: NOTFS_WORKERS or all cores)");
    simulate->add_option("--out", out_dir, "Output directory");

    auto* verify_cmd = app.add_subcommand("verify-properties", "Check transform and detector invariants");
    std::size_t signals = 50;
    std::uint64_t verify_seed = 0;
    verify_cmd->add_option("--signals", signals, "Random signals per (lambda, mu) pair");
    verify_cmd->add_option("--seed", verify_seed, "Seed for the random instances");

    auto* complexity = app.add_subcommand("complexity", "Print complex operation counts");
    std::size_t M = 16, N = 16;
    complexity->add_option("--M", M, "Delay bins")->check(CLI::PositiveNumber);
    complexity->add_option("--N", N, "Doppler bins")->check(CLI::PositiveNumber);

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed()) {
            if (config_path.empty() && preset_name.empty()) {
                std::cerr << "simulate: one of --config or --preset is required\n";
                return 2;
            }
            return run_simulate(config_path, preset_name, seed, iterations, max_frames, min_errors,
                                workers, out_dir);
        }
        if (verify_cmd->parsed()) return run_verify(signals, verify_seed);
        if (complexity->parsed()) return run_complexity(M, N);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
