#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "notfs/detect.hpp"
#include "notfs/numerics.hpp"

namespace notfs::harness {

enum class DecoderKind { Matched, ImSoft, Sd2d, Sd2dImInit };
enum class RadiusPolicy {
    /// (1 + 1e-6) J(initial) when an initial estimate exists, infinite otherwise.
    Auto,
    Infinite,
};

std::string to_string(DecoderKind kind);
std::string to_string(RadiusPolicy policy);
DecoderKind decoder_from_string(const std::string& name);
RadiusPolicy radius_policy_from_string(const std::string& name);

/// Whether the decoder is driven by the IM relaxation (and so swept over omega).
bool uses_omega(DecoderKind kind);

struct SweepConfig {
    std::size_t M = 4;
    std::size_t N = 4;
    double alpha = 1.0;
    double beta = 1.0;
    std::string constellation = "qpsk";
    std::vector<double> ebn0_db_points{0.0, 2.0, 4.0, 6.0, 8.0};
    DecoderKind decoder = DecoderKind::Matched;
    std::vector<double> omega_values{0.25, 0.5, 0.75, 1.0};
    std::size_t iterations = 30;
    std::size_t K_list = 16;
    RadiusPolicy radius_policy = RadiusPolicy::Auto;
    std::uint64_t master_seed = 1;
    std::size_t min_bit_errors = 100;
    std::size_t max_frames = 10000;

    /// Throws std::invalid_argument on a violated invariant.
    void validate() const;
};

/// Strict JSON (de)serialization: exactly the SweepConfig fields, unknown keys rejected.
nlohmann::json to_json(const SweepConfig& cfg);
SweepConfig config_from_json(const nlohmann::json& j);
SweepConfig load_config(const std::filesystem::path& path);

/// FNV-1a over the canonical JSON form, as 16 hex digits.
std::string config_hash(const SweepConfig& cfg);

struct Preset {
    std::string name;
    SweepConfig config;
    /// Overloading factor printed in the figure caption, in percent.
    double caption_eta_percent = 0.0;
};

/// fig2a, fig2b, fig3, fig4a, fig4b.
std::vector<Preset> presets();
Preset preset_by_name(const std::string& name);

/// Knobs that are not part of the persisted configuration.
struct RunOptions {
    /// 0 means the NOTFS_WORKERS environment variable, or one per core.
    std::size_t workers = 0;
    std::size_t calibration_frames = 256;
    detect::ThresholdSchedule threshold_schedule = detect::ThresholdSchedule::IterationCount;
    /// Applied to the time-frequency frame; identity when absent.
    std::optional<ComplexMatrix> H1;
    std::optional<ComplexMatrix> H2;
    /// Frames processed between stopping-rule checks (per worker).
    std::size_t batch_per_worker = 32;
};

std::size_t resolve_workers(std::size_t requested);

struct Interval {
    double low = 0.0;
    double high = 0.0;
};

/// Wilson score interval at 95% confidence.
Interval wilson_interval(std::uint64_t errors, std::uint64_t trials);

struct BerCell {
    double ebn0_db = 0.0;
    double omega = 0.0;
    std::uint64_t bits_sent = 0;
    std::uint64_t bit_errors = 0;
    std::uint64_t frames = 0;
    double ber = 0.0;
    Interval wilson_95;
    double mean_decoder_ops = 0.0;
    double wall_time_s = 0.0;
    bool completed = true;
    std::string diagnostic;

    // Sphere decoding with an IM start only: errors of the IM estimate on the
    // same frames, and frames whose final objective exceeded the IM objective.
    std::uint64_t initial_bit_errors = 0;
    std::uint64_t objective_violations = 0;

    /// sqrt(ber (1 - ber) / bits_sent).
    double standard_error() const;
};

struct BerResult {
    SweepConfig config;
    double eta = 0.0;
    double eb = 0.0;
    std::vector<BerCell> cells;

    bool all_completed() const;
};

/// Energy per bit measured from the transmitted waveform (seeded calibration batch).
double calibrate_eb(const SweepConfig& cfg, const RunOptions& options = {});

/**
 * Monte-Carlo BER at one (Eb/N0, omega) cell. Frame f of cell c uses the
 * substream (master_seed, c, f), and the stopping rule is evaluated in frame
 * order, so the outcome does not depend on the worker count. An Eb/N0 of
 * +infinity disables the noise.
 */
BerCell run_ber_point(const SweepConfig& cfg, double ebn0_db, double omega,
                      std::uint64_t cell_index, double eb, const RunOptions& options = {});

/// All (Eb/N0 x omega) cells; a failed cell is recorded, not thrown.
BerResult run_sweep(const SweepConfig& cfg, const RunOptions& options = {});

inline constexpr const char* kCsvHeader =
    "config_hash,M,N,alpha,beta,eta,ebn0_db,omega,decoder,bits,errors,ber,ci_low,ci_high,mean_ops,"
    "seed";

/// One CSV data row per cell, without the header.
std::vector<std::string> csv_rows(const BerResult& result);

struct EmittedFiles {
    std::filesystem::path csv;
    std::filesystem::path json;
};

/**
 * Writes <stem>.csv and <stem>.json into `dir` (created if needed). Throws
 * std::runtime_error naming the path on I/O failure.
 */
EmittedFiles emit_results(const BerResult& result, const std::filesystem::path& dir,
                          const std::string& stem = "results",
                          std::optional<double> caption_eta_percent = std::nullopt);

/// Reference QPSK BER over AWGN: Q(sqrt(2 Eb/N0)).
double qpsk_reference_ber(double ebn0_db);

}  // namespace notfs::harness
