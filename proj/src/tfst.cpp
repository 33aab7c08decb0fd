#include "notfs/tfst.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace notfs::tfst {

namespace {

constexpr double kGridTol = 1e-9;

std::int64_t wrap(std::int64_t i, std::int64_t n) {
    const std::int64_t r = i % n;
    return r < 0 ? r + n : r;
}

// exp(j 2 pi num / den) with the integer phase reduced first.
Complex unit_phase(std::int64_t num, std::int64_t den) {
    const double angle = 2.0 * kPi * static_cast<double>(wrap(num, den)) / static_cast<double>(den);
    return {std::cos(angle), std::sin(angle)};
}

Complex unit_phase(double cycles) {
    const double angle = 2.0 * kPi * (cycles - std::floor(cycles));
    return {std::cos(angle), std::sin(angle)};
}

std::int64_t grid_index(double value, double step, const char* what) {
    const double pos = value / step;
    const double idx = std::round(pos);
    if (std::abs(pos - idx) > kGridTol * std::max(1.0, std::abs(pos))) {
        throw std::invalid_argument(std::string(what) + " is not aligned with the grid");
    }
    return static_cast<std::int64_t>(idx);
}

void require_frame(const SampledSignal& x, const TfstParams& p) {
    p.validate();
    if (x.samples.size() != p.frame_samples()) {
        throw std::invalid_argument("signal length " + std::to_string(x.samples.size()) +
                                    " does not match frame of " +
                                    std::to_string(p.frame_samples()) + " samples");
    }
    if (std::abs(x.step - p.step()) > kGridTol * p.step()) {
        throw std::invalid_argument("signal step does not match the TFST grid");
    }
}

void require_cell(double tau0, double nu0, const TfstParams& p) {
    const double period = p.lambda.value() * p.T;
    const double band = p.mu.value() * p.delta_f();
    if (tau0 < 0.0 || tau0 >= period || nu0 < 0.0 || nu0 >= band) {
        throw std::invalid_argument("(tau0, nu0) outside the fundamental cell");
    }
}

double sqrt_lambda_t(const TfstParams& p) { return std::sqrt(p.lambda.value() * p.T); }
double lambda_mu(const TfstParams& p) { return p.lambda.value() * p.mu.value(); }

}  // namespace

std::size_t TfstParams::samples_per_period() const {
    const auto spt = static_cast<std::int64_t>(samples_per_T);
    if (lambda.den <= 0 || lambda.num <= 0 || (lambda.num * spt) % lambda.den != 0) {
        throw std::invalid_argument("lambda*T is not an integer number of samples");
    }
    return static_cast<std::size_t>(lambda.num * spt / lambda.den);
}

double TfstParams::nu_step() const {
    return mu.value() * delta_f() / static_cast<double>(periods);
}

void TfstParams::validate() const {
    if (lambda.num <= 0 || lambda.den <= 0 || mu.num <= 0 || mu.den <= 0) {
        throw std::invalid_argument("lambda and mu must be positive rationals");
    }
    if (!(T > 0.0) || samples_per_T == 0 || periods == 0) {
        throw std::invalid_argument("T, samples_per_T and periods must be positive");
    }
    (void)samples_per_period();
}

Complex tfst_at(const SampledSignal& x, const TfstParams& p, std::int64_t tau_index,
                std::int64_t nu_index) {
    const auto length = static_cast<std::int64_t>(x.samples.size());
    const auto period = static_cast<std::int64_t>(p.samples_per_period());
    const auto periods = static_cast<std::int64_t>(p.periods);
    Complex acc = 0.0;
    for (std::int64_t n = 0; n < periods; ++n) {
        const auto idx = wrap(tau_index + n * period, length);
        acc += x.samples[static_cast<std::size_t>(idx)] * unit_phase(-n * nu_index, periods);
    }
    return sqrt_lambda_t(p) * acc;
}

DDMap tfst_forward(const SampledSignal& x, const TfstParams& p) {
    require_frame(x, p);
    const std::size_t n_tau = p.samples_per_period();
    const std::size_t n_nu = p.periods;
    DDMap out{std::vector<double>(n_tau), std::vector<double>(n_nu), ComplexMatrix(n_tau, n_nu)};
    for (std::size_t a = 0; a < n_tau; ++a) out.tau_grid[a] = static_cast<double>(a) * p.step();
    for (std::size_t b = 0; b < n_nu; ++b) out.nu_grid[b] = static_cast<double>(b) * p.nu_step();
    for (std::size_t a = 0; a < n_tau; ++a)
        for (std::size_t b = 0; b < n_nu; ++b)
            out.values(a, b) = tfst_at(x, p, static_cast<std::int64_t>(a),
                                       static_cast<std::int64_t>(b));
    return out;
}

SampledSignal tfst_invert_time(const DDMap& m, const TfstParams& p) {
    p.validate();
    if (m.values.empty() || m.tau_grid.empty() || m.nu_grid.empty()) {
        throw std::invalid_argument("tfst_invert_time: empty grid");
    }
    const std::size_t n_tau = p.samples_per_period();
    const std::size_t n_nu = p.periods;
    if (m.values.rows() != n_tau || m.values.cols() != n_nu) {
        throw std::invalid_argument("tfst_invert_time: map does not cover the fundamental cell");
    }
    const double weight = sqrt_lambda_t(p) / lambda_mu(p) * p.nu_step();
    SampledSignal x{std::vector<Complex>(n_tau * n_nu), p.step(), 0.0};
    const auto periods = static_cast<std::int64_t>(n_nu);
    for (std::size_t n = 0; n < n_nu; ++n) {
        for (std::size_t a = 0; a < n_tau; ++a) {
            Complex acc = 0.0;
            // M(tau + n lambda T, nu_b) = exp(j 2 pi n b / P) M(tau, nu_b)
            for (std::size_t b = 0; b < n_nu; ++b)
                acc += unit_phase(static_cast<std::int64_t>(n * b), periods) * m.values(a, b);
            x.samples[n * n_tau + a] = weight * acc;
        }
    }
    return x;
}

Complex tfst_to_fourier(const DDMap& m, const TfstParams& p, double f) {
    p.validate();
    if (m.values.empty()) throw std::invalid_argument("tfst_to_fourier: empty map");
    const std::int64_t b = grid_index(lambda_mu(p) * f, p.nu_step(), "lambda*mu*f");
    const auto col = static_cast<std::size_t>(wrap(b, static_cast<std::int64_t>(p.periods)));
    Complex acc = 0.0;
    for (std::size_t a = 0; a < m.values.rows(); ++a)
        acc += m.values(a, col) * unit_phase(-f * m.tau_grid[a]);
    return acc * p.step() / sqrt_lambda_t(p);
}

Complex fourier_direct(const SampledSignal& x, double f) {
    Complex acc = 0.0;
    for (std::size_t i = 0; i < x.samples.size(); ++i) {
        const double t = x.origin + static_cast<double>(i) * x.step;
        acc += x.samples[i] * unit_phase(-f * t);
    }
    return acc * x.step;
}

SampledSignal apply_dd_shift(const SampledSignal& x, double tau0, double nu0) {
    if (x.samples.empty() || !(x.step > 0.0)) {
        throw std::invalid_argument("apply_dd_shift: empty signal");
    }
    const std::int64_t shift = grid_index(tau0, x.step, "tau0");
    const auto length = static_cast<std::int64_t>(x.samples.size());
    SampledSignal r{std::vector<Complex>(x.samples.size()), x.step, x.origin};
    for (std::int64_t i = 0; i < length; ++i) {
        const double t = x.origin + static_cast<double>(i) * x.step;
        r.samples[static_cast<std::size_t>(i)] =
            x.samples[static_cast<std::size_t>(wrap(i - shift, length))] *
            unit_phase(nu0 * (t - tau0));
    }
    return r;
}

ImpulseTrain gen_basis_p(double tau0, double nu0, const TfstParams& p, std::int64_t n_first,
                         std::int64_t n_last) {
    p.validate();
    require_cell(tau0, nu0, p);
    const double amplitude = sqrt_lambda_t(p) / lambda_mu(p);
    const double period = p.lambda.value() * p.T;
    const double mu = p.mu.value();
    ImpulseTrain train;
    for (std::int64_t n = n_first; n <= n_last; ++n) {
        const double nd = static_cast<double>(n);
        train.atoms.push_back({tau0 + nd * period, amplitude * unit_phase(nu0 * nd * p.T / mu)});
    }
    return train;
}

SampledSignal render(const ImpulseTrain& train, double step, std::size_t length,
                     DeltaRendering mode) {
    if (!(step > 0.0) || length == 0) throw std::invalid_argument("render: empty grid");
    SampledSignal out{std::vector<Complex>(length), step, 0.0};
    const double gain = mode == DeltaRendering::ScaledUnitSample ? 1.0 / step : 1.0;
    for (const auto& atom : train.atoms) {
        const auto idx = wrap(grid_index(atom.time, step, "impulse time"),
                              static_cast<std::int64_t>(length));
        out.samples[static_cast<std::size_t>(idx)] += gain * atom.weight;
    }
    return out;
}

Complex inner_product(const SampledSignal& a, const SampledSignal& b) {
    if (a.samples.size() != b.samples.size()) {
        throw std::invalid_argument("inner_product: length mismatch");
    }
    Complex acc = 0.0;
    for (std::size_t i = 0; i < a.samples.size(); ++i) acc += std::conj(a.samples[i]) * b.samples[i];
    return acc * a.step;
}

Complex project_coefficient(const SampledSignal& x, double tau0, double nu0,
                            const TfstParams& p) {
    require_frame(x, p);
    (void)grid_index(tau0, p.step(), "tau0");
    (void)grid_index(nu0, p.nu_step(), "nu0");
    const auto last = static_cast<std::int64_t>(p.periods) - 1;
    const auto basis = render(gen_basis_p(tau0, nu0, p, 0, last), p.step(), p.frame_samples(),
                              DeltaRendering::ScaledUnitSample);
    return inner_product(basis, x);
}

SampledSignal reconstruct_from_coefficients(const ComplexMatrix& coefficients,
                                            const TfstParams& p) {
    p.validate();
    const std::size_t n_tau = p.samples_per_period();
    const std::size_t n_nu = p.periods;
    if (coefficients.rows() != n_tau || coefficients.cols() != n_nu) {
        throw std::invalid_argument("reconstruct_from_coefficients: grid mismatch");
    }
    const std::size_t length = p.frame_samples();
    const double cell_area = p.step() * p.nu_step();
    const auto last = static_cast<std::int64_t>(n_nu) - 1;
    SampledSignal x{std::vector<Complex>(length), p.step(), 0.0};
    for (std::size_t a = 0; a < n_tau; ++a) {
        for (std::size_t b = 0; b < n_nu; ++b) {
            const auto basis = render(gen_basis_p(static_cast<double>(a) * p.step(),
                                                  static_cast<double>(b) * p.nu_step(), p, 0, last),
                                      p.step(), length, DeltaRendering::ScaledUnitSample);
            const Complex c = coefficients(a, b) * cell_area * lambda_mu(p);
            for (std::size_t i = 0; i < length; ++i) x.samples[i] += c * basis.samples[i];
        }
    }
    return x;
}

std::size_t retained_periods(std::size_t n_doppler, const TfstParams& p, double epsilon) {
    const double n = std::round(epsilon * static_cast<double>(n_doppler) / p.lambda.value());
    return n < 1.0 ? 1 : static_cast<std::size_t>(n);
}

SampledSignal gen_basis_psi(double tau0, double nu0, const TfstParams& p, std::size_t n_count,
                            std::size_t pulse_samples) {
    p.validate();
    require_cell(tau0, nu0, p);
    if (n_count == 0 || n_count > p.periods) {
        throw std::invalid_argument("gen_basis_psi: n_count must be in [1, periods]");
    }
    if (pulse_samples == 0) throw std::invalid_argument("gen_basis_psi: empty pulse");
    const std::int64_t start = grid_index(tau0, p.step(), "tau0");
    const auto length = static_cast<std::int64_t>(p.frame_samples());
    const auto period = static_cast<std::int64_t>(p.samples_per_period());
    const double amplitude = sqrt_lambda_t(p) / lambda_mu(p);
    const double mu = p.mu.value();
    SampledSignal psi{std::vector<Complex>(p.frame_samples()), p.step(), 0.0};
    for (std::size_t n = 0; n < n_count; ++n) {
        const double nd = static_cast<double>(n);
        const Complex w = amplitude * unit_phase(nu0 * nd * p.T / mu);
        const std::int64_t first = start + static_cast<std::int64_t>(n) * period;
        for (std::size_t s = 0; s < pulse_samples; ++s)
            psi.samples[static_cast<std::size_t>(wrap(first + static_cast<std::int64_t>(s), length))] += w;
    }
    return psi;
}

double psi_concentration_sq(double tau_offset, double nu_offset, const TfstParams& p,
                            std::size_t n_doppler, std::size_t m_delay) {
    const double lt = p.lambda.value() * p.T;
    const double lm = lambda_mu(p);
    return (lt * lt) / (lm * lm) *
           dirichlet_sq(nu_offset / (p.mu.value() * p.delta_f()), n_doppler) *
           dirichlet_sq(tau_offset / lt, m_delay);
}

SampledSignal gen_basis_chi(std::size_t k, std::size_t l, const TfstParams& p,
                            const ChiLayout& layout) {
    if (k >= layout.N || l >= layout.M) {
        throw std::invalid_argument("gen_basis_chi: index out of range");
    }
    if (p.samples_per_T % layout.M != 0) {
        throw std::invalid_argument("gen_basis_chi: samples_per_T must be a multiple of M");
    }
    const double tau0 = static_cast<double>(l) * layout.phi * p.T / static_cast<double>(layout.M);
    const double nu0 =
        static_cast<double>(k) * layout.theta * p.delta_f() / static_cast<double>(layout.N);
    auto chi = gen_basis_psi(tau0, nu0, p, layout.N, p.samples_per_T / layout.M);
    const double norm = 1.0 / std::sqrt(static_cast<double>(layout.M * layout.N));
    for (auto& s : chi.samples) s *= norm;
    return chi;
}

}  // namespace notfs::tfst
