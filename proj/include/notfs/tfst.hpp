#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "notfs/numerics.hpp"

/**
 * Discrete Time-Frequency Space Transformation (TFST).
 *
 * For a signal x(t) the transform with parameters (lambda, mu) is
 *
 *   M(tau, nu) = sqrt(lambda T) * sum_n x(tau + n lambda T) exp(-j 2 pi n nu T / mu)
 *
 * Here the signal lives on a uniform grid of step T/samples_per_T and spans a
 * frame of `periods` delay periods (each lambda*T long). The frame is treated as
 * periodic, so every sum over n runs over `periods` terms and the Doppler axis
 * [0, mu*delta_f) is sampled at `periods` points. With this convention the
 * quasi-periodicity, multiplication and convolution identities hold exactly in
 * circular form.
 */
namespace notfs::tfst {

struct Rational {
    std::int64_t num = 1;
    std::int64_t den = 1;

    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

struct TfstParams {
    Rational lambda{1, 1};
    Rational mu{1, 1};
    double T = 1.0;
    std::size_t samples_per_T = 4;
    std::size_t periods = 8;

    double delta_f() const { return 1.0 / T; }
    double step() const { return T / static_cast<double>(samples_per_T); }
    /// Samples in one delay period lambda*T. Throws if lambda*T is off-grid.
    std::size_t samples_per_period() const;
    std::size_t frame_samples() const { return samples_per_period() * periods; }
    /// Doppler grid spacing mu*delta_f / periods.
    double nu_step() const;

    /// Throws std::invalid_argument on any violated invariant.
    void validate() const;
};

struct SampledSignal {
    std::vector<Complex> samples;
    double step = 1.0;
    double origin = 0.0;
};

/// TFST sampled on the fundamental cell [0, lambda T) x [0, mu delta_f).
struct DDMap {
    std::vector<double> tau_grid;
    std::vector<double> nu_grid;
    ComplexMatrix values;  // (tau index, nu index)
};

struct ImpulseAtom {
    double time = 0.0;
    Complex weight;
};

struct ImpulseTrain {
    std::vector<ImpulseAtom> atoms;
};

/// How a Dirac impulse is rendered onto the sample grid.
enum class DeltaRendering {
    /// weight / step at the atom's sample, so sum(samples)*step == weight.
    ScaledUnitSample,
    /// weight itself at the atom's sample.
    UnitSample,
};

/// Transform of a frame-periodic signal on the fundamental cell.
DDMap tfst_forward(const SampledSignal& x, const TfstParams& p);

/**
 * Evaluate the transform at tau = tau_index*step, nu = nu_index*nu_step for
 * arbitrary (possibly negative or out-of-cell) integer indices, using the
 * periodic extension of x.
 */
Complex tfst_at(const SampledSignal& x, const TfstParams& p, std::int64_t tau_index,
                std::int64_t nu_index);

/// Time-domain inversion over the whole frame (rectangle rule over nu).
SampledSignal tfst_invert_time(const DDMap& m, const TfstParams& p);

/**
 * Fourier inversion at frequency f. lambda*mu*f must fall on the Doppler grid
 * modulo mu*delta_f; otherwise std::invalid_argument.
 */
Complex tfst_to_fourier(const DDMap& m, const TfstParams& p, double f);

/// Reference Fourier transform of the sampled frame, sum x[i] exp(-j2pi f t_i) * step.
Complex fourier_direct(const SampledSignal& x, double f);

/// r(t) = x(t - tau0) exp(j 2 pi nu0 (t - tau0)) with circular wrap at the frame edge.
SampledSignal apply_dd_shift(const SampledSignal& x, double tau0, double nu0);

ImpulseTrain gen_basis_p(double tau0, double nu0, const TfstParams& p, std::int64_t n_first,
                         std::int64_t n_last);

/// Renders atoms onto a zero frame of `length` samples (times wrap modulo the frame).
SampledSignal render(const ImpulseTrain& train, double step, std::size_t length,
                     DeltaRendering mode);

/// <p_(tau0,nu0), x> as a discretized inner product against the rendered basis.
Complex project_coefficient(const SampledSignal& x, double tau0, double nu0,
                            const TfstParams& p);

/**
 * Synthesizes a frame from coefficients c(tau_a, nu_b) laid out like a DDMap.
 * The double integral of c * p is scaled by lambda*mu so that analysis followed
 * by synthesis is the identity for every (lambda, mu).
 */
SampledSignal reconstruct_from_coefficients(const ComplexMatrix& coefficients,
                                            const TfstParams& p);

/// Number of retained delay periods for a modem of N Doppler bins: round(eps*N/lambda).
std::size_t retained_periods(std::size_t n_doppler, const TfstParams& p, double epsilon = 1.0);

/**
 * psi basis with a rectangular s(t) of `pulse_samples` samples (1 for the
 * single-step rendering, samples_per_period() for the full-period one).
 * Rendered onto a frame of p.frame_samples() samples.
 */
SampledSignal gen_basis_psi(double tau0, double nu0, const TfstParams& p, std::size_t n_count,
                            std::size_t pulse_samples = 1);

/**
 * Closed-form |M_psi(tau, nu)|^2 for rectangular pulses:
 * (lambda T)^2/(lambda mu)^2 * D(nu offset/(mu df), n_doppler) * D(tau offset/(lambda T), m_delay).
 * The (lambda T)^2 factor is the amplitude of the grid rendering and is 1 when lambda T = 1.
 */
double psi_concentration_sq(double tau_offset, double nu_offset, const TfstParams& p,
                            std::size_t n_doppler, std::size_t m_delay);

struct ChiLayout {
    std::size_t M = 4;
    std::size_t N = 4;
    double theta = 1.0;
    double phi = 1.0;
};

/**
 * chi_(k,l) = psi(tau0 = l phi T / M, nu0 = k theta df / N) / sqrt(MN), using a
 * rectangular pulse one delay bin (T/M) wide and N retained periods.
 * Requires samples_per_T to be a multiple of M and tau0 to land on the grid.
 */
SampledSignal gen_basis_chi(std::size_t k, std::size_t l, const TfstParams& p,
                            const ChiLayout& layout);

/// Discretized inner product sum conj(a[i]) b[i] * step.
Complex inner_product(const SampledSignal& a, const SampledSignal& b);

}  // namespace notfs::tfst
