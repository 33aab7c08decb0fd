#include "notfs/channel.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace notfs::channel {

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t substream_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b) {
    return mix64(mix64(mix64(master) ^ a) ^ (b * 0xd1b54a32d192ed03ULL));
}

double noise_variance(double ebn0_db, double eb) {
    if (!(eb > 0.0)) throw std::invalid_argument("noise_variance: Eb must be positive");
    return eb / std::pow(10.0, ebn0_db / 10.0);
}

modem::TimeSignal awgn(const modem::TimeSignal& y, double sigma_sq, Rng& rng) {
    if (sigma_sq < 0.0) throw std::invalid_argument("awgn: negative noise variance");
    modem::TimeSignal out = y;
    if (sigma_sq == 0.0) return out;
    std::normal_distribution<double> axis(0.0, std::sqrt(sigma_sq / 2.0));
    for (auto& s : out.samples) {
        const double re = axis(rng);
        const double im = axis(rng);
        s += Complex(re, im);
    }
    return out;
}

ComplexMatrix apply_separable_channel(const ComplexMatrix& x, const ComplexMatrix& h1,
                                      const ComplexMatrix& h2) {
    if (h1.cols() != x.rows() || h2.cols() != x.cols()) {
        throw std::invalid_argument("apply_separable_channel: channel/frame dimension mismatch");
    }
    return matmul(matmul(h1, x), adjoint(h2));
}

double measure_eb(const modem::ModemParams& params, const modem::Transforms& transforms,
                  const modem::Constellation& constellation, std::size_t frames,
                  std::uint64_t seed) {
    if (frames == 0) throw std::invalid_argument("measure_eb: need at least one frame");
    Rng rng(seed);
    const std::size_t nbits = params.M * params.N * constellation.bits_per_symbol;
    std::vector<std::uint8_t> bits(nbits);
    double energy = 0.0;
    for (std::size_t f = 0; f < frames; ++f) {
        for (auto& b : bits) b = static_cast<std::uint8_t>(rng() >> 63);
        const auto signal =
            modem::modulate(modem::map_bits(bits, constellation, params), params, transforms);
        for (const auto& s : signal.samples) energy += std::norm(s);
    }
    return energy / (static_cast<double>(frames) * static_cast<double>(nbits));
}

}  // namespace notfs::channel
