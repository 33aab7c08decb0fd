// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "ml_oracle.hpp"
#include "notfs/channel.hpp"
#include "notfs/detect.hpp"
#include "notfs/harness.hpp"
#include "notfs/modem.hpp"
#include "notfs/verify.hpp"

using namespace notfs;

namespace {

struct Outcome {
    bool passed = false;
    std::string detail;
};

struct Criterion {
    int id;
    std::string title;
    double time_limit_s;
    std::function<Outcome()> run;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof(buf), f, args...);
    return buf;
}

double se_of(const harness::BerCell& c) {
    return c.bits_sent ? c.standard_error() : 0.0;
}

// 1
Outcome overloading_factors() {
    const std::vector<std::pair<std::string, double>> expected{
        {"fig2a", 23.5}, {"fig2b", 30.7}, {"fig3", 119.5}, {"fig4a", 56.0}, {"fig4b", 66.5}};
    Outcome out{true, ""};
    for (const auto& [name, eta] : expected) {
        const auto cfg = harness::preset_by_name(name).config;
        const double got = 100.0 * modem::overloading_factor(cfg.alpha, cfg.beta);
        const bool ok = std::abs(got - eta) <= 0.1;
        out.passed = out.passed && ok;
        out.detail += fmt("%s %.2f%% (caption %.1f%%%s) ", name.c_str(), got, eta, ok ? "" : ", off");
    }
    return out;
}

// 2
Outcome table_one() {
    Outcome out{true, ""};
    std::mt19937_64 rng(2);
    const auto q = modem::Constellation::qpsk();
    for (auto [M, N] : std::vector<std::pair<std::size_t, std::size_t>>{{2, 2}, {4, 4}, {4, 8}, {16, 16}}) {
        const auto a = modem::build_doppler_matrix(0.9, N);
        const auto b = modem::build_delay_matrix(0.9, M);
        ComplexMatrix s(N, M);
        for (auto& z : s.data()) z = q.points[rng() % 4];
        const auto model = detect::build_effective_model(a, b, matmul(matmul(a, s), adjoint(b)));
        detect::OpCounter ops;
        detect::sweep_partial_metrics(model, s, ops);
        const std::size_t mn = M * N, k = std::min(M, N);
        const bool ok = ops.complex_mults == mn * (k + 3) / 2 && ops.complex_adds == mn * (k + 1) / 2;
        const auto e = detect::predicted_complexity(M, N);
        out.passed = out.passed && ok && e.mults_2d == ops.complex_mults;
        out.detail += fmt("(%zu,%zu) x%llu +%llu [1-D %llu] ", M, N,
                          static_cast<unsigned long long>(ops.complex_mults),
                          static_cast<unsigned long long>(ops.complex_adds),
                          static_cast<unsigned long long>(e.mults_1d));
    }
    return out;
}

// 3
Outcome ml_equivalence() {
    modem::ModemParams p;
    p.M = 2;
    p.N = 2;
    p.alpha = p.beta = 0.775;
    const auto t = modem::Transforms::make(p);
    const auto q = modem::Constellation::qpsk();
    const double eb = channel::measure_eb(p, t, q, 256, 3);
    const double sigma_sq = channel::noise_variance(4.0, eb);
    std::size_t matches = 0;
    const std::size_t frames = 200;
    for (std::size_t f = 0; f < frames; ++f) {
        channel::Rng rng(channel::substream_seed(3, 0, f));
        std::vector<std::uint8_t> bits(8);
        for (auto& bit : bits) bit = static_cast<std::uint8_t>(rng() >> 63);
        const auto tx = modem::modulate(modem::map_bits(bits, q, p), p, t);
        const auto y = modem::wigner_rect(channel::awgn(tx, sigma_sq, rng), p).values;
        const auto model = detect::build_effective_model(t.doppler, t.delay, y);
        detect::Sd2dOptions opt;
        opt.k_list = 256;
        opt.radius_sq = std::numeric_limits<double>::infinity();
        const auto sd = detect::sd2d_decode(model, q, opt);
        const auto ml = testutil::brute_force_ml(model, q);
        const bool same_frame = sd.s_hat == ml.s;
        const bool tied = std::abs(detect::total_objective(model, sd.s_hat) - ml.objective) <=
                          1e-12 * std::max(1.0, ml.objective);
        if (same_frame || tied) ++matches;
    }
    return {matches == frames, fmt("%zu/%zu frames match exhaustive search", matches, frames)};
}

// 4
Outcome decomposition() {
    std::mt19937_64 rng(4);
    std::uniform_int_distribution<std::size_t> size(1, 8);
    std::normal_distribution<double> g(0.0, 1.0);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const std::size_t rows = size(rng), cols = size(rng);
        auto random = [&](std::size_t r, std::size_t c) {
            ComplexMatrix m(r, c);
            for (auto& z : m.data()) z = {g(rng), g(rng)};
            return m;
        };
        const auto model = detect::build_effective_model(random(rows, rows), random(cols, cols),
                                                         random(rows, cols));
        const auto s = random(rows, cols);
        double sum = 0.0;
        for (std::size_t a = 0; a < rows; ++a)
            for (std::size_t b = 0; b < cols; ++b) sum += detect::partial_metric(model, s, a, b);
        const double total = detect::total_objective(model, s);
        worst = std::max(worst, std::abs(sum - total) / total);
    }
    return {worst <= 1e-10, fmt("worst relative gap %.2e over 100 instances", worst)};
}

// 5
Outcome tfst_suite() {
    using R = tfst::Rational;
    const auto checks =
        verify::tfst_property_suite(50, 5, {{R{1, 1}, R{1, 1}}, {R{1, 1}, R{2, 1}}, {R{2, 1}, R{1, 1}}, {R{1, 2}, R{1, 1}}},
                                    1e-8);
    Outcome out{true, ""};
    double worst = 0.0;
    std::size_t failed = 0;
    for (const auto& c : checks) {
        worst = std::max(worst, c.max_error);
        if (!c.passed) {
            ++failed;
            out.detail += "failed: " + c.name + "; ";
        }
    }
    out.passed = failed == 0;
    out.detail += fmt("%zu identities, worst relative error %.2e", checks.size(), worst);
    return out;
}

// 6
Outcome orthogonal_anchor() {
    harness::SweepConfig cfg;
    cfg.M = 4;
    cfg.N = 4;
    cfg.alpha = cfg.beta = 1.0;
    cfg.decoder = harness::DecoderKind::Matched;
    cfg.ebn0_db_points = {0.0, 2.0, 4.0, 6.0, 8.0};
    cfg.min_bit_errors = 100;
    cfg.max_frames = 1000000;
    cfg.master_seed = 6;
    const auto r = harness::run_sweep(cfg);
    Outcome out{true, ""};
    for (const auto& c : r.cells) {
        const double ref = harness::qpsk_reference_ber(c.ebn0_db);
        const double se = std::sqrt(ref * (1.0 - ref) / static_cast<double>(c.bits_sent));
        const double z = (c.ber - ref) / se;
        out.passed = out.passed && c.completed && c.bit_errors >= 100 && std::abs(z) <= 3.0;
        out.detail += fmt("%gdB: %.3e vs %.3e (%+.2f SE) ", c.ebn0_db, c.ber, ref, z);
    }
    return out;
}

// 7a
Outcome more_iterations() {
    auto cfg = harness::preset_by_name("fig3").config;
    cfg.master_seed = 71;
    const auto r75 = harness::run_sweep(cfg);
    cfg.iterations = 100;
    const auto r100 = harness::run_sweep(cfg);
    Outcome out{r75.all_completed() && r100.all_completed(), ""};
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < r75.cells.size(); ++i) {
        const auto& a = r75.cells[i];
        const auto& b = r100.cells[i];
        const double se = std::hypot(se_of(a), se_of(b));
        const double excess = se > 0.0 ? (b.ber - a.ber) / se : (b.ber > a.ber ? 1e9 : 0.0);
        worst = std::max(worst, excess);
        if (excess > 2.0) {
            out.passed = false;
            out.detail += fmt("[%gdB w=%g: %.3e > %.3e] ", a.ebn0_db, a.omega, b.ber, a.ber);
        }
    }
    out.passed = out.passed && worst <= 2.0;
    double best75 = 1.0, best100 = 1.0;
    for (const auto& c : r75.cells)
        if (c.ebn0_db == cfg.ebn0_db_points.back()) best75 = std::min(best75, c.ber);
    for (const auto& c : r100.cells)
        if (c.ebn0_db == cfg.ebn0_db_points.back()) best100 = std::min(best100, c.ber);
    out.detail += fmt("%zu cells, max (BER100-BER75)/SE = %+.2f; best at %gdB: 75 it %.3e, 100 it %.3e",
                      r75.cells.size(), worst, cfg.ebn0_db_points.back(), best75, best100);
    return out;
}

// 7b
Outcome sphere_after_im() {
    Outcome out{true, ""};
    for (const char* name : {"fig4a", "fig4b"}) {
        auto cfg = harness::preset_by_name(name).config;
        cfg.master_seed = 72;
        const auto r = harness::run_sweep(cfg);
        std::uint64_t violations = 0, frames = 0;
        double worst = -std::numeric_limits<double>::infinity();
        for (const auto& c : r.cells) {
            violations += c.objective_violations;
            frames += c.frames;
            const double n = static_cast<double>(c.bits_sent);
            const double p_sd = c.ber;
            const double p_im = static_cast<double>(c.initial_bit_errors) / n;
            const double se = std::sqrt((p_sd * (1 - p_sd) + p_im * (1 - p_im)) / n);
            const double excess = se > 0.0 ? (p_sd - p_im) / se : (p_sd > p_im ? 1e9 : 0.0);
            worst = std::max(worst, excess);
        }
        out.passed = out.passed && r.all_completed() && violations == 0 && worst <= 2.0;
        out.detail += fmt("%s: %llu objective violations in %llu frames, max (SD-IM)/SE = %+.2f; ", name,
                          static_cast<unsigned long long>(violations),
                          static_cast<unsigned long long>(frames), worst);
    }
    return out;
}

// 7c
Outcome low_overload_region() {
    auto cfg = harness::preset_by_name("fig2a").config;
    cfg.ebn0_db_points = {cfg.ebn0_db_points.back()};
    cfg.min_bit_errors = std::numeric_limits<std::size_t>::max() / 2;
    cfg.max_frames = (1000000 + 2 * cfg.M * cfg.N - 1) / (2 * cfg.M * cfg.N);
    cfg.master_seed = 73;
    const auto r = harness::run_sweep(cfg);
    Outcome out{false, ""};
    for (const auto& c : r.cells) {
        if (c.completed && c.bits_sent >= 1000000 && c.ber <= 1e-3) out.passed = true;
        out.detail += fmt("w=%g: %.3e (%llu bits) ", c.omega, c.ber,
                          static_cast<unsigned long long>(c.bits_sent));
    }
    out.detail = fmt("%gdB ", cfg.ebn0_db_points.back()) + out.detail;
    return out;
}

// 8
Outcome determinism() {
    auto cfg = harness::preset_by_name("fig4a").config;
    cfg.ebn0_db_points = {2.0, 8.0};
    cfg.omega_values = {0.5, 1.0};
    cfg.max_frames = 600;
    harness::RunOptions one, many;
    one.workers = 1;
    many.workers = 8;
    const auto a = harness::csv_rows(harness::run_sweep(cfg, one));
    const auto b = harness::csv_rows(harness::run_sweep(cfg, many));
    const auto c = harness::csv_rows(harness::run_sweep(cfg, many));
    return {a == b && b == c, fmt("%zu rows compared across 1/8/8 workers", a.size())};
}

}  // namespace

int main() {
    const std::vector<Criterion> criteria{
        {1, "overloading factors match the captions", 1.0, overloading_factors},
        {2, "operation counts match the complexity table", 10.0, table_one},
        {3, "K=256 sphere decoding equals exhaustive ML", 30.0, ml_equivalence},
        {4, "partial metrics sum to the objective", 5.0, decomposition},
        {5, "transform property suite", 30.0, tfst_suite},
        {6, "orthogonal limit follows the QPSK reference", 120.0, orthogonal_anchor},
        {7, "(a) more IM iterations do not hurt", 1800.0, more_iterations},
        {7, "(b) sphere decoding improves on its IM start", 1800.0, sphere_after_im},
        {7, "(c) BER <= 1e-3 at 23.5% overloading", 1800.0, low_overload_region},
        {8, "sweeps are bit-identical across worker counts", 60.0, determinism},
    };
    bool all = true;
    double seven_total = 0.0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        auto outcome = c.run();
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (c.id == 7) seven_total += elapsed;
        const bool in_time = elapsed <= c.time_limit_s && (c.id != 7 || seven_total <= 1800.0);
        const bool ok = outcome.passed && in_time;
        all = all && ok;
        std::printf("%s [%d] %s (%.1fs%s): %s\n", ok ? "PASS" : "FAIL", c.id, c.title.c_str(), elapsed,
                    in_time ? "" : ", over time budget", outcome.detail.c_str());
        std::fflush(stdout);
    }
    return all ? 0 : 1;
}
