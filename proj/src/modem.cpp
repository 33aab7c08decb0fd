#include "notfs/modem.hpp"

#include <cmath>
#include <stdexcept>

namespace notfs::modem {

namespace {

ComplexMatrix kernel_matrix(double compression, std::size_t n, const char* what) {
    if (!(compression > 0.0)) {
        throw std::invalid_argument(std::string(what) + ": compression factor must be positive");
    }
    if (n == 0) throw std::invalid_argument(std::string(what) + ": size must be positive");
    ComplexMatrix m(n, n);
    const double norm = 1.0 / std::sqrt(static_cast<double>(n));
    const double nd = static_cast<double>(n);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) {
            // At compression 1 reduce the integer product so the DFT phases are exact.
            const std::size_t rc = compression == 1.0 ? (r * c) % n : r * c;
            double cycles = compression * static_cast<double>(rc) / nd;
            cycles -= std::floor(cycles);
            const double angle = 2.0 * kPi * cycles;
            m(r, c) = norm * Complex(std::cos(angle), std::sin(angle));
        }
    }
    return m;
}

void require_frame(const ComplexMatrix& m, const ModemParams& params, const char* what) {
    if (m.rows() != params.N || m.cols() != params.M) {
        throw std::invalid_argument(std::string(what) + ": expected " + std::to_string(params.N) +
                                    "x" + std::to_string(params.M) + " frame");
    }
}

}  // namespace

void ModemParams::validate() const {
    if (M == 0 || N == 0) throw std::invalid_argument("ModemParams: M and N must be positive");
    if (!(alpha > 0.0 && alpha <= 1.0) || !(beta > 0.0 && beta <= 1.0)) {
        throw std::invalid_argument("ModemParams: alpha and beta must lie in (0, 1]");
    }
    if (!(T > 0.0)) throw std::invalid_argument("ModemParams: T must be positive");
}

ComplexMatrix build_doppler_matrix(double alpha, std::size_t N) {
    return kernel_matrix(alpha, N, "build_doppler_matrix");
}

ComplexMatrix build_delay_matrix(double beta, std::size_t M) {
    return kernel_matrix(beta, M, "build_delay_matrix");
}

Transforms Transforms::make(const ModemParams& params) {
    params.validate();
    return {build_doppler_matrix(params.alpha, params.N), build_delay_matrix(params.beta, params.M)};
}

TFFrame isfft_nonorth(const DDFrame& s, const Transforms& transforms) {
    if (s.symbols.rows() != transforms.doppler.rows() ||
        s.symbols.cols() != transforms.delay.rows()) {
        throw std::invalid_argument("isfft_nonorth: frame does not match transform sizes");
    }
    return {matmul(matmul(transforms.doppler, s.symbols), adjoint(transforms.delay))};
}

TFFrame isfft_nonorth(const DDFrame& s, const ModemParams& params) {
    require_frame(s.symbols, params, "isfft_nonorth");
    return isfft_nonorth(s, Transforms::make(params));
}

TimeSignal heisenberg_rect(const TFFrame& x, const ModemParams& params) {
    require_frame(x.values, params, "heisenberg_rect");
    const std::size_t M = params.M;
    const double norm = 1.0 / std::sqrt(static_cast<double>(M));
    TimeSignal out{std::vector<Complex>(params.N * M), params.sample_step()};
    for (std::size_t n = 0; n < params.N; ++n) {
        for (std::size_t p = 0; p < M; ++p) {
            Complex acc = 0.0;
            for (std::size_t m = 0; m < M; ++m) {
                const double angle = 2.0 * kPi * static_cast<double>((m * p) % M) / static_cast<double>(M);
                acc += x.values(n, m) * Complex(std::cos(angle), std::sin(angle));
            }
            out.samples[n * M + p] = norm * acc;
        }
    }
    return out;
}

TFFrame wigner_rect(const TimeSignal& y, const ModemParams& params) {
    params.validate();
    const std::size_t M = params.M;
    if (y.samples.size() != params.N * M) {
        throw std::invalid_argument("wigner_rect: expected " + std::to_string(params.N * M) +
                                    " samples, got " + std::to_string(y.samples.size()));
    }
    const double norm = 1.0 / std::sqrt(static_cast<double>(M));
    TFFrame out{ComplexMatrix(params.N, M)};
    for (std::size_t n = 0; n < params.N; ++n) {
        for (std::size_t m = 0; m < M; ++m) {
            Complex acc = 0.0;
            for (std::size_t p = 0; p < M; ++p) {
                const double angle = -2.0 * kPi * static_cast<double>((m * p) % M) / static_cast<double>(M);
                acc += y.samples[n * M + p] * Complex(std::cos(angle), std::sin(angle));
            }
            out.values(n, m) = norm * acc;
        }
    }
    return out;
}

TimeSignal modulate(const DDFrame& s, const ModemParams& params, const Transforms& transforms) {
    require_frame(s.symbols, params, "modulate");
    return heisenberg_rect(isfft_nonorth(s, transforms), params);
}

TimeSignal modulate(const DDFrame& s, const ModemParams& params) {
    return modulate(s, params, Transforms::make(params));
}

double overloading_factor(double alpha, double beta) {
    if (!(alpha > 0.0) || !(beta > 0.0)) {
        throw std::invalid_argument("overloading_factor: alpha and beta must be positive");
    }
    return 1.0 / (alpha * beta) - 1.0;
}

Constellation Constellation::qpsk() {
    const double a = 1.0 / std::sqrt(2.0);
    // Labels 00, 01, 10, 11.
    return {"qpsk", {{a, a}, {-a, a}, {a, -a}, {-a, -a}}, 2, a};
}

Constellation Constellation::by_name(const std::string& name) {
    if (name == "qpsk" || name == "QPSK") return qpsk();
    throw std::invalid_argument("unknown constellation '" + name + "'");
}

std::size_t Constellation::nearest(Complex z) const {
    if (points.empty()) throw std::invalid_argument("Constellation: empty");
    std::size_t best = 0;
    double best_d = std::norm(z - points[0]);
    for (std::size_t i = 1; i < points.size(); ++i) {
        const double d = std::norm(z - points[i]);
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

double Constellation::min_distance() const {
    double best = INFINITY;
    for (std::size_t i = 0; i < points.size(); ++i)
        for (std::size_t j = i + 1; j < points.size(); ++j)
            best = std::min(best, std::abs(points[i] - points[j]));
    return best;
}

DDFrame map_bits(std::span<const std::uint8_t> bits, const Constellation& constellation,
                 const ModemParams& params) {
    if (constellation.points.empty() || constellation.bits_per_symbol == 0) {
        throw std::invalid_argument("map_bits: empty constellation");
    }
    const std::size_t bps = constellation.bits_per_symbol;
    if (bits.size() != params.M * params.N * bps) {
        throw std::invalid_argument("map_bits: expected " +
                                    std::to_string(params.M * params.N * bps) + " bits, got " +
                                    std::to_string(bits.size()));
    }
    DDFrame frame{ComplexMatrix(params.N, params.M)};
    auto out = frame.symbols.data();
    for (std::size_t i = 0; i < out.size(); ++i) {
        std::size_t label = 0;
        for (std::size_t b = 0; b < bps; ++b) label = (label << 1) | (bits[i * bps + b] & 1u);
        out[i] = constellation.points.at(label);
    }
    return frame;
}

std::vector<std::uint8_t> demap_symbols(const DDFrame& s, const Constellation& constellation) {
    if (constellation.points.empty()) throw std::invalid_argument("demap_symbols: empty constellation");
    const std::size_t bps = constellation.bits_per_symbol;
    const auto in = s.symbols.data();
    std::vector<std::uint8_t> bits(in.size() * bps);
    for (std::size_t i = 0; i < in.size(); ++i) {
        const std::size_t label = constellation.nearest(in[i]);
        for (std::size_t b = 0; b < bps; ++b)
            bits[i * bps + b] = static_cast<std::uint8_t>((label >> (bps - 1 - b)) & 1u);
    }
    return bits;
}

}  // namespace notfs::modem
