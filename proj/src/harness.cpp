#include "notfs/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <set>
#include <stdexcept>
#include <thread>

#include "notfs/channel.hpp"
#include "notfs/modem.hpp"

namespace notfs::harness {

namespace {

constexpr std::uint64_t kCalibrationStream = 0xEBCA11B7ULL;

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::size_t decoder_mults_per_distortion(std::size_t rows, std::size_t cols) {
    return rows * cols * (rows + cols);
}

struct FrameOutcome {
    std::uint64_t bits = 0;
    std::uint64_t errors = 0;
    double ops = 0.0;
    std::uint64_t initial_errors = 0;
    bool objective_violation = false;
};

// Everything a worker needs to process frames of one cell; read-only.
struct CellContext {
    const SweepConfig& cfg;
    const RunOptions& options;
    modem::ModemParams params;
    modem::Transforms transforms;
    modem::Constellation constellation;
    detect::EffectiveModel base_model;
    detect::SoftDecodeOptions soft;
    double sigma_sq = 0.0;
    double omega = 0.0;
};

std::uint64_t count_bit_errors(const std::vector<std::uint8_t>& a,
                               const std::vector<std::uint8_t>& b) {
    std::uint64_t errors = 0;
    for (std::size_t i = 0; i < a.size(); ++i) errors += (a[i] != b[i]) ? 1 : 0;
    return errors;
}

FrameOutcome run_frame(const CellContext& ctx, std::uint64_t seed) {
    channel::Rng rng(seed);
    const std::size_t nbits = ctx.params.M * ctx.params.N * ctx.constellation.bits_per_symbol;
    std::vector<std::uint8_t> bits(nbits);
    for (auto& b : bits) b = static_cast<std::uint8_t>(rng() >> 63);

    const auto frame = modem::map_bits(bits, ctx.constellation, ctx.params);
    auto tf = modem::isfft_nonorth(frame, ctx.transforms);
    if (ctx.options.H1 || ctx.options.H2) {
        const auto h1 = ctx.options.H1.value_or(ComplexMatrix::identity(ctx.params.N));
        const auto h2 = ctx.options.H2.value_or(ComplexMatrix::identity(ctx.params.M));
        tf.values = channel::apply_separable_channel(tf.values, h1, h2);
    }
    const auto tx = modem::heisenberg_rect(tf, ctx.params);
    const auto rx = channel::awgn(tx, ctx.sigma_sq, rng);

    detect::EffectiveModel model = ctx.base_model;
    detect::update_observation(model, modem::wigner_rect(rx, ctx.params).values);

    const std::size_t rows = model.rows();
    const std::size_t cols = model.cols();
    const double distortion_cost = static_cast<double>(decoder_mults_per_distortion(rows, cols));
    const double im_cost = distortion_cost * static_cast<double>(1 + ctx.cfg.iterations);

    FrameOutcome out;
    out.bits = nbits;
    ComplexMatrix decided;
    switch (ctx.cfg.decoder) {
        case DecoderKind::Matched:
            decided = detect::hard_demap(detect::matched_filter_estimate(model), ctx.constellation).symbols;
            out.ops = distortion_cost;
            break;
        case DecoderKind::ImSoft:
            decided = detect::hard_demap(
                          detect::im_soft_decode(model, ctx.omega, ctx.cfg.iterations, ctx.soft),
                          ctx.constellation)
                          .symbols;
            out.ops = im_cost;
            break;
        case DecoderKind::Sd2d: {
            detect::Sd2dOptions sd;
            sd.k_list = ctx.cfg.K_list;
            const auto res = detect::sd2d_decode(model, ctx.constellation, sd);
            decided = res.s_hat;
            out.ops = static_cast<double>(res.ops.complex_mults + res.ops.cache_mults);
            break;
        }
        case DecoderKind::Sd2dImInit: {
            const auto initial =
                detect::hard_demap(
                    detect::im_soft_decode(model, ctx.omega, ctx.cfg.iterations, ctx.soft),
                    ctx.constellation)
                    .symbols;
            detect::Sd2dOptions sd;
            sd.k_list = ctx.cfg.K_list;
            sd.initial = initial;
            if (ctx.cfg.radius_policy == RadiusPolicy::Infinite) {
                sd.radius_sq = std::numeric_limits<double>::infinity();
            }
            const auto res = detect::sd2d_decode(model, ctx.constellation, sd);
            decided = res.s_hat;
            out.ops = im_cost + static_cast<double>(res.ops.complex_mults + res.ops.cache_mults);
            out.initial_errors =
                count_bit_errors(bits, modem::demap_symbols({initial}, ctx.constellation));
            out.objective_violation =
                res.final_loss > detect::total_objective(model, initial);
            break;
        }
    }
    out.errors = count_bit_errors(bits, modem::demap_symbols({decided}, ctx.constellation));
    return out;
}

template <typename Fn>
void parallel_for(std::size_t count, std::size_t workers, Fn&& fn) {
    if (workers <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    const std::size_t n_threads = std::min(workers, count);
    pool.reserve(n_threads);
    for (std::size_t t = 0; t < n_threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

template <typename T>
T require_field(const nlohmann::json& j, const char* key) {
    if (!j.contains(key)) throw std::invalid_argument(std::string("config: missing field '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("config: bad value for '") + key + "': " + e.what());
    }
}

const std::set<std::string>& config_keys() {
    static const std::set<std::string> keys{
        "M", "N", "alpha", "beta", "constellation", "ebn0_db_points", "decoder", "omega_values",
        "iterations", "K_list", "radius_policy", "master_seed", "min_bit_errors", "max_frames"};
    return keys;
}

}  // namespace

std::string to_string(DecoderKind kind) {
    switch (kind) {
        case DecoderKind::Matched: return "matched";
        case DecoderKind::ImSoft: return "im_soft";
        case DecoderKind::Sd2d: return "sd2d";
        case DecoderKind::Sd2dImInit: return "sd2d_im_init";
    }
    return "unknown";
}

std::string to_string(RadiusPolicy policy) {
    return policy == RadiusPolicy::Auto ? "auto" : "infinite";
}

DecoderKind decoder_from_string(const std::string& name) {
    if (name == "matched") return DecoderKind::Matched;
    if (name == "im_soft") return DecoderKind::ImSoft;
    if (name == "sd2d") return DecoderKind::Sd2d;
    if (name == "sd2d_im_init") return DecoderKind::Sd2dImInit;
    throw std::invalid_argument("unknown decoder '" + name + "'");
}

RadiusPolicy radius_policy_from_string(const std::string& name) {
    if (name == "auto") return RadiusPolicy::Auto;
    if (name == "infinite") return RadiusPolicy::Infinite;
    throw std::invalid_argument("unknown radius policy '" + name + "'");
}

bool uses_omega(DecoderKind kind) {
    return kind == DecoderKind::ImSoft || kind == DecoderKind::Sd2dImInit;
}

void SweepConfig::validate() const {
    modem::ModemParams{M, N, alpha, beta, 1.0}.validate();
    (void)modem::Constellation::by_name(constellation);
    if (ebn0_db_points.empty()) throw std::invalid_argument("config: need at least one Eb/N0 point");
    if (uses_omega(decoder) && omega_values.empty()) {
        throw std::invalid_argument("config: need at least one omega value");
    }
    if (uses_omega(decoder) && iterations == 0) {
        throw std::invalid_argument("config: iterations must be positive");
    }
    if (K_list == 0) throw std::invalid_argument("config: K_list must be positive");
    if (min_bit_errors == 0) throw std::invalid_argument("config: min_bit_errors must be positive");
    if (max_frames == 0) throw std::invalid_argument("config: max_frames must be positive");
}

nlohmann::json to_json(const SweepConfig& cfg) {
    return {{"M", cfg.M},
            {"N", cfg.N},
            {"alpha", cfg.alpha},
            {"beta", cfg.beta},
            {"constellation", cfg.constellation},
            {"ebn0_db_points", cfg.ebn0_db_points},
            {"decoder", to_string(cfg.decoder)},
            {"omega_values", cfg.omega_values},
            {"iterations", cfg.iterations},
            {"K_list", cfg.K_list},
            {"radius_policy", to_string(cfg.radius_policy)},
            {"master_seed", cfg.master_seed},
            {"min_bit_errors", cfg.min_bit_errors},
            {"max_frames", cfg.max_frames}};
}

SweepConfig config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw std::invalid_argument("config: expected a JSON object");
    for (const auto& item : j.items()) {
        if (!config_keys().count(item.key())) {
            throw std::invalid_argument("config: unknown field '" + item.key() + "'");
        }
    }
    SweepConfig cfg;
    cfg.M = require_field<std::size_t>(j, "M");
    cfg.N = require_field<std::size_t>(j, "N");
    cfg.alpha = require_field<double>(j, "alpha");
    cfg.beta = require_field<double>(j, "beta");
    cfg.constellation = require_field<std::string>(j, "constellation");
    cfg.ebn0_db_points = require_field<std::vector<double>>(j, "ebn0_db_points");
    cfg.decoder = decoder_from_string(require_field<std::string>(j, "decoder"));
    cfg.omega_values = require_field<std::vector<double>>(j, "omega_values");
    cfg.iterations = require_field<std::size_t>(j, "iterations");
    cfg.K_list = require_field<std::size_t>(j, "K_list");
    cfg.radius_policy = radius_policy_from_string(require_field<std::string>(j, "radius_policy"));
    cfg.master_seed = require_field<std::uint64_t>(j, "master_seed");
    cfg.min_bit_errors = require_field<std::size_t>(j, "min_bit_errors");
    cfg.max_frames = require_field<std::size_t>(j, "max_frames");
    cfg.validate();
    return cfg;
}

SweepConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument("config " + path.string() + ": " + e.what());
    }
    return config_from_json(j);
}

std::string config_hash(const SweepConfig& cfg) {
    const std::string canonical = to_json(cfg).dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : canonical) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::vector<Preset> presets() {
    const std::vector<double> ebn0{0.0, 2.0, 4.0, 6.0, 8.0, 10.0, 12.0};
    const std::vector<double> omegas{0.25, 0.5, 0.75, 1.0};
    auto base = [&](std::size_t M, std::size_t N, double alpha, double beta, DecoderKind dec,
                    std::size_t iterations) {
        SweepConfig c;
        c.M = M;
        c.N = N;
        c.alpha = alpha;
        c.beta = beta;
        c.decoder = dec;
        c.iterations = iterations;
        c.ebn0_db_points = ebn0;
        c.omega_values = omegas;
        c.K_list = 16;
        c.master_seed = 1;
        c.min_bit_errors = 100;
        c.max_frames = 20000;
        return c;
    };
    return {
        {"fig2a", base(16, 16, 0.9, 0.9, DecoderKind::ImSoft, 75), 23.5},
        {"fig2b", base(8, 16, 0.85, 0.9, DecoderKind::ImSoft, 75), 31.0},
        // The 100-iteration panel is the same preset with iterations = 100.
        {"fig3", base(4, 4, 0.675, 0.675, DecoderKind::ImSoft, 75), 119.5},
        {"fig4a", base(4, 4, 0.8, 0.8, DecoderKind::Sd2dImInit, 30), 56.0},
        {"fig4b", base(4, 4, 0.775, 0.775, DecoderKind::Sd2dImInit, 20), 66.5},
    };
}

Preset preset_by_name(const std::string& name) {
    for (auto& p : presets())
        if (p.name == name) return p;
    throw std::invalid_argument("unknown preset '" + name + "'");
}

std::size_t resolve_workers(std::size_t requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("NOTFS_WORKERS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && v > 0) return static_cast<std::size_t>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

Interval wilson_interval(std::uint64_t errors, std::uint64_t trials) {
    if (trials == 0) return {0.0, 1.0};
    constexpr double z = 1.959963984540054;
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(errors) / n;
    const double denom = 1.0 + z * z / n;
    const double center = (p + z * z / (2.0 * n)) / denom;
    const double half = z / denom * std::sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n));
    return {std::clamp(center - half, 0.0, p), std::clamp(center + half, p, 1.0)};
}

double BerCell::standard_error() const {
    if (bits_sent == 0) return 0.0;
    return std::sqrt(ber * (1.0 - ber) / static_cast<double>(bits_sent));
}

bool BerResult::all_completed() const {
    return std::all_of(cells.begin(), cells.end(), [](const BerCell& c) { return c.completed; });
}

double calibrate_eb(const SweepConfig& cfg, const RunOptions& options) {
    const modem::ModemParams params{cfg.M, cfg.N, cfg.alpha, cfg.beta, 1.0};
    return channel::measure_eb(params, modem::Transforms::make(params),
                               modem::Constellation::by_name(cfg.constellation),
                               std::max<std::size_t>(options.calibration_frames, 1),
                               channel::substream_seed(cfg.master_seed, kCalibrationStream));
}

BerCell run_ber_point(const SweepConfig& cfg, double ebn0_db, double omega,
                      std::uint64_t cell_index, double eb, const RunOptions& options) {
    cfg.validate();
    BerCell cell;
    cell.ebn0_db = ebn0_db;
    cell.omega = omega;
    const auto start = std::chrono::steady_clock::now();

    const modem::ModemParams params{cfg.M, cfg.N, cfg.alpha, cfg.beta, 1.0};
    const auto transforms = modem::Transforms::make(params);
    const auto constellation = modem::Constellation::by_name(cfg.constellation);
    std::optional<detect::EffectiveModel> base;
    try {
        base = detect::build_effective_model(transforms.doppler, transforms.delay,
                                             ComplexMatrix(cfg.N, cfg.M), options.H1, options.H2);
    } catch (const std::exception& e) {
        cell.completed = false;
        cell.diagnostic = e.what();
        return cell;
    }

    detect::SoftDecodeOptions soft;
    soft.axis_amplitude = constellation.axis_amplitude;
    soft.schedule = options.threshold_schedule;
    soft.overloading = modem::overloading_factor(cfg.alpha, cfg.beta);

    const double sigma_sq = std::isinf(ebn0_db) && ebn0_db > 0 ? 0.0 : channel::noise_variance(ebn0_db, eb);
    const CellContext ctx{cfg, options, params, transforms, constellation, std::move(*base), soft,
                          sigma_sq, omega};

    const std::size_t workers = resolve_workers(options.workers);
    const std::size_t batch = workers * std::max<std::size_t>(options.batch_per_worker, 1);
    double ops_total = 0.0;
    bool done = false;
    try {
        while (!done && cell.frames < cfg.max_frames) {
            const std::uint64_t first = cell.frames;
            const std::size_t n = static_cast<std::size_t>(
                std::min<std::uint64_t>(batch, cfg.max_frames - first));
            std::vector<FrameOutcome> outcomes(n);
            parallel_for(n, workers, [&](std::size_t i) {
                outcomes[i] = run_frame(ctx, channel::substream_seed(cfg.master_seed, cell_index, first + i));
            });
            for (const auto& o : outcomes) {
                cell.frames += 1;
                cell.bits_sent += o.bits;
                cell.bit_errors += o.errors;
                cell.initial_bit_errors += o.initial_errors;
                cell.objective_violations += o.objective_violation ? 1 : 0;
                ops_total += o.ops;
                if (cell.bit_errors >= cfg.min_bit_errors || cell.frames >= cfg.max_frames) {
                    done = true;
                    break;
                }
            }
        }
    } catch (const std::exception& e) {
        cell.completed = false;
        cell.diagnostic = e.what();
    }

    if (cell.bits_sent > 0) {
        cell.ber = static_cast<double>(cell.bit_errors) / static_cast<double>(cell.bits_sent);
        cell.mean_decoder_ops = ops_total / static_cast<double>(cell.frames);
    }
    cell.wilson_95 = wilson_interval(cell.bit_errors, cell.bits_sent);
    cell.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return cell;
}

BerResult run_sweep(const SweepConfig& cfg, const RunOptions& options) {
    cfg.validate();
    BerResult result;
    result.config = cfg;
    result.eta = modem::overloading_factor(cfg.alpha, cfg.beta);
    result.eb = calibrate_eb(cfg, options);
    const std::vector<double> omegas =
        uses_omega(cfg.decoder) ? cfg.omega_values : std::vector<double>{0.0};
    std::uint64_t cell_index = 0;
    for (double ebn0 : cfg.ebn0_db_points) {
        for (double omega : omegas) {
            result.cells.push_back(run_ber_point(cfg, ebn0, omega, cell_index++, result.eb, options));
        }
    }
    return result;
}

std::vector<std::string> csv_rows(const BerResult& result) {
    const auto& cfg = result.config;
    const std::string hash = config_hash(cfg);
    std::vector<std::string> rows;
    for (const auto& c : result.cells) {
        std::string row;
        row += hash + ",";
        row += std::to_string(cfg.M) + "," + std::to_string(cfg.N) + ",";
        row += format_double(cfg.alpha) + "," + format_double(cfg.beta) + ",";
        row += format_double(result.eta) + ",";
        row += format_double(c.ebn0_db) + "," + format_double(c.omega) + ",";
        row += to_string(cfg.decoder) + ",";
        row += std::to_string(c.bits_sent) + "," + std::to_string(c.bit_errors) + ",";
        row += format_double(c.ber) + ",";
        row += format_double(c.wilson_95.low) + "," + format_double(c.wilson_95.high) + ",";
        row += format_double(c.mean_decoder_ops) + ",";
        row += std::to_string(cfg.master_seed);
        rows.push_back(std::move(row));
    }
    return rows;
}

EmittedFiles emit_results(const BerResult& result, const std::filesystem::path& dir,
                          const std::string& stem, std::optional<double> caption_eta_percent) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory " + dir.string() + ": " + ec.message());

    EmittedFiles files{dir / (stem + ".csv"), dir / (stem + ".json")};
    {
        std::ofstream csv(files.csv);
        if (!csv) throw std::runtime_error("cannot write " + files.csv.string());
        csv << kCsvHeader << '\n';
        for (const auto& row : csv_rows(result)) csv << row << '\n';
        if (!csv) throw std::runtime_error("write failed for " + files.csv.string());
    }

    nlohmann::json side;
    side["config"] = to_json(result.config);
    side["config_hash"] = config_hash(result.config);
    side["eta"] = result.eta;
    side["eb"] = result.eb;
    if (caption_eta_percent) side["caption_eta_percent"] = *caption_eta_percent;
    side["cells"] = nlohmann::json::array();
    for (const auto& c : result.cells) {
        nlohmann::json cell{{"ebn0_db", c.ebn0_db},
                            {"omega", c.omega},
                            {"frames", c.frames},
                            {"completed", c.completed},
                            {"wall_time_s", c.wall_time_s}};
        if (!c.diagnostic.empty()) cell["diagnostic"] = c.diagnostic;
        side["cells"].push_back(std::move(cell));
    }
    std::ofstream js(files.json);
    if (!js) throw std::runtime_error("cannot write " + files.json.string());
    js << side.dump(2) << '\n';
    if (!js) throw std::runtime_error("write failed for " + files.json.string());
    return files;
}

double qpsk_reference_ber(double ebn0_db) {
    return 0.5 * std::erfc(std::sqrt(std::pow(10.0, ebn0_db / 10.0)));
}

}  // namespace notfs::harness
