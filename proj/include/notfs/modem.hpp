#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "notfs/numerics.hpp"

namespace notfs::modem {

/**
 * NOTFS modem configuration with lambda = rho = kappa = epsilon = 1.
 *
 * Compression lives entirely in the transform exponents: alpha = theta/mu
 * scales the Doppler kernel and beta = phi the delay kernel. The time-frequency
 * grid stays critically sampled (N slots of M subcarriers).
 */
struct ModemParams {
    std::size_t M = 4;  // delay bins
    std::size_t N = 4;  // Doppler bins
    double alpha = 1.0;
    double beta = 1.0;
    double T = 1.0;

    double delta_f() const { return 1.0 / T; }
    double sample_step() const { return T / static_cast<double>(M); }
    void validate() const;
};

/// x[k, l]: N rows (Doppler index) by M columns (delay index).
struct DDFrame {
    ComplexMatrix symbols;
};

/// X_TF[n, m]: N rows (time slot) by M columns (subcarrier).
struct TFFrame {
    ComplexMatrix values;
};

/// N*M samples, block n holding slot n, spaced T/M apart.
struct TimeSignal {
    std::vector<Complex> samples;
    double sample_step = 1.0;
};

/// A[n, k] = exp(j 2 pi alpha n k / N) / sqrt(N).
ComplexMatrix build_doppler_matrix(double alpha, std::size_t N);

/// B[m, l] = exp(j 2 pi beta m l / M) / sqrt(M); used as X_TF = A S B^H.
ComplexMatrix build_delay_matrix(double beta, std::size_t M);

/// Precomputed (A, B) pair for a configuration; shared read-only between workers.
struct Transforms {
    ComplexMatrix doppler;  // A, N x N
    ComplexMatrix delay;    // B, M x M

    static Transforms make(const ModemParams& params);
};

TFFrame isfft_nonorth(const DDFrame& s, const ModemParams& params);
TFFrame isfft_nonorth(const DDFrame& s, const Transforms& transforms);

/// Rectangular-pulse Heisenberg transform; unitary per time slot.
TimeSignal heisenberg_rect(const TFFrame& x, const ModemParams& params);

/// Matched receive front end, the exact inverse of heisenberg_rect.
TFFrame wigner_rect(const TimeSignal& y, const ModemParams& params);

TimeSignal modulate(const DDFrame& s, const ModemParams& params);
TimeSignal modulate(const DDFrame& s, const ModemParams& params, const Transforms& transforms);

/// eta = 1/(alpha*beta) - 1.
double overloading_factor(double alpha, double beta);

/**
 * Gray-labelled constellation. points[i] carries label i, written MSB first
 * into bits_per_symbol bits.
 */
struct Constellation {
    std::string name;
    std::vector<Complex> points;
    std::size_t bits_per_symbol = 0;
    /// Per-axis amplitude of the points; the soft clipper works in units of it.
    double axis_amplitude = 1.0;

    static Constellation qpsk();
    /// Accepts "qpsk"; throws std::invalid_argument for anything else.
    static Constellation by_name(const std::string& name);

    /// Nearest point, ties broken toward the lower index.
    std::size_t nearest(Complex z) const;
    double min_distance() const;
};

DDFrame map_bits(std::span<const std::uint8_t> bits, const Constellation& constellation,
                 const ModemParams& params);
std::vector<std::uint8_t> demap_symbols(const DDFrame& s, const Constellation& constellation);

}  // namespace notfs::modem
