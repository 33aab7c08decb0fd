#pragma once

#include <cstdint>
#include <optional>
#include <random>

#include "notfs/modem.hpp"
#include "notfs/numerics.hpp"

namespace notfs::channel {

struct ChannelConfig {
    double ebn0_db = 10.0;
    std::size_t bits_per_symbol = 2;
    std::uint64_t rng_seed = 0;
    std::optional<ComplexMatrix> H1;  // N x N, identity when absent
    std::optional<ComplexMatrix> H2;  // M x M, identity when absent
};

/// SplitMix64 finalizer; used to derive independent substream seeds.
std::uint64_t mix64(std::uint64_t x);

/**
 * Seed for the substream identified by (master, a, b). Frames are keyed on
 * (master seed, cell index, frame index) so results never depend on which
 * worker processes a frame.
 */
std::uint64_t substream_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0);

/// Per-substream generator. mt19937_64 seeded from substream_seed.
using Rng = std::mt19937_64;

/// N0 = eb / 10^(ebn0_db/10); per complex sample noise variance.
double noise_variance(double ebn0_db, double eb);

/// Adds CN(0, sigma_sq) noise to every sample (sigma_sq/2 per real axis).
modem::TimeSignal awgn(const modem::TimeSignal& y, double sigma_sq, Rng& rng);

/// H1 * X * H2^H.
ComplexMatrix apply_separable_channel(const ComplexMatrix& x, const ComplexMatrix& h1,
                                      const ComplexMatrix& h2);

/**
 * Mean transmitted energy per bit, measured by modulating `frames` random
 * frames drawn from `seed`.
 */
double measure_eb(const modem::ModemParams& params, const modem::Transforms& transforms,
                  const modem::Constellation& constellation, std::size_t frames,
                  std::uint64_t seed);

}  // namespace notfs::channel
