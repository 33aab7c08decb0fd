#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "notfs/modem.hpp"
#include "notfs/numerics.hpp"

/**
 * Receiver side of the NOTFS link.
 *
 * Detection is posed on the separable model Y_T = G S H^H + Z with the
 * objective J(S) = ||Y_T - G S H^H||_F^2. With G = Q_G R and H = Q_H R_H the
 * objective becomes ||U - R S L||_F^2 with U = Q_G^H Y_T Q_H and L = R_H^H, and
 * since R is upper and L lower triangular, entry (i, j) of the residual only
 * depends on the lower-right quadrant S[i:, j:]. The sphere decoder exploits
 * this by deciding entries from the bottom-right corner outwards.
 *
 * Positions are 0-based (row, col); the corner is (rows-1, cols-1).
 */
namespace notfs::detect {

class SingularModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class RadiusExhaustedError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct EffectiveModel {
    ComplexMatrix G;    // rows x rows
    ComplexMatrix H;    // cols x cols
    ComplexMatrix y_t;  // rows x cols
    ComplexMatrix q_g;
    ComplexMatrix r;    // upper triangular, real non-negative diagonal
    ComplexMatrix q_h;
    ComplexMatrix l;    // lower triangular, L = R_H^H
    ComplexMatrix u;    // Q_G^H Y_T Q_H
    ComplexMatrix gram_g;  // G^H G
    ComplexMatrix gram_h;  // H^H H

    std::size_t rows() const { return G.rows(); }
    std::size_t cols() const { return H.rows(); }
};

/**
 * Builds the model for the TF-domain observation y_tf.
 *
 * A channel acting on the time-frequency frame as Y_TF = H1 X_TF H2^H + Z gives
 * G = H1 A and H = H2 B; with no channel matrices G = A, H = B and Y_T = Y_TF.
 * Throws SingularModelError if either QR factor is rank deficient.
 */
EffectiveModel build_effective_model(const ComplexMatrix& doppler, const ComplexMatrix& delay,
                                     const ComplexMatrix& y_tf,
                                     const std::optional<ComplexMatrix>& h1 = std::nullopt,
                                     const std::optional<ComplexMatrix>& h2 = std::nullopt);

/// Replaces Y_T (and U) keeping the factorization.
void update_observation(EffectiveModel& model, const ComplexMatrix& y_t);

double total_objective(const EffectiveModel& model, const ComplexMatrix& s);

/// Frame with some entries still undecided.
struct PartialFrame {
    ComplexMatrix values;
    std::vector<std::uint8_t> decided;  // row-major mask

    static PartialFrame empty(std::size_t rows, std::size_t cols);
    static PartialFrame complete(const ComplexMatrix& s);
    bool is_decided(std::size_t row, std::size_t col) const {
        return decided[row * values.cols() + col] != 0;
    }
    void set(std::size_t row, std::size_t col, Complex value);
};

/// J_{i,j} = |U_ij - R[i, i:] S[i:, j:] L[j:, j]|^2; throws if the quadrant has gaps.
double partial_metric(const EffectiveModel& model, const PartialFrame& s, std::size_t row,
                      std::size_t col);
double partial_metric(const EffectiveModel& model, const ComplexMatrix& s, std::size_t row,
                      std::size_t col);

struct Position {
    std::size_t row = 0;
    std::size_t col = 0;
    friend bool operator==(const Position&, const Position&) = default;
};

/**
 * Visiting order from the corner outwards in L-shaped shells: for shell i the
 * cells (R-k, C-i) and (R-i, C-k) for k < i, then (R-i, C-i), followed by the
 * remaining columns (or rows) of a rectangular frame. Every cell's lower-right
 * quadrant is visited before the cell itself.
 */
std::vector<Position> wavefront_schedule(std::size_t rows, std::size_t cols);

/**
 * Complex operation tallies. complex_mults/complex_adds count the partial
 * metric kernel: the dot product of one row of R (or column of L) against the
 * cached half-product, the subtraction from U, and the squared magnitude.
 * The half-product cache itself (S L or R S) is tallied in cache_mults/adds.
 */
struct OpCounter {
    std::uint64_t complex_mults = 0;
    std::uint64_t complex_adds = 0;
    std::uint64_t cache_mults = 0;
    std::uint64_t cache_adds = 0;

    OpCounter& operator+=(const OpCounter& other);
};

/**
 * Sum of all partial metrics of a complete frame, evaluated in schedule order
 * through the same cached kernel the sphere decoder uses. For one frame this
 * is a single-candidate sweep.
 */
double sweep_partial_metrics(const EffectiveModel& model, const ComplexMatrix& s,
                             OpCounter& counter);

struct Candidate {
    std::vector<int> labels;  // constellation index per cell, -1 when undecided
    ComplexMatrix cache;      // S L (rows <= cols) or R S (rows > cols), filled as decided
    double loss = 0.0;
};

struct CandidateList {
    std::size_t k_list = 1;
    double radius_sq = std::numeric_limits<double>::infinity();
    std::vector<Candidate> entries;  // active candidates, ascending loss

    static CandidateList seed(const EffectiveModel& model, std::size_t k_list, double radius_sq);
    std::vector<double> losses() const;
};

/**
 * Expands every active candidate within the radius by each constellation point
 * at (row, col), sorts all children by accumulated loss and keeps the best
 * k_list inside the radius. When nothing survives and progress_guarantee is
 * set, the single best child is kept; otherwise RadiusExhaustedError.
 */
CandidateList sd2d_update(const CandidateList& candidates, const EffectiveModel& model,
                          const modem::Constellation& constellation, std::size_t row,
                          std::size_t col, OpCounter& counter, bool progress_guarantee = true);

struct Sd2dOptions {
    std::size_t k_list = 16;
    /// Squared radius. Unset: infinite, or (1 + 1e-6) J(initial) when an initial frame is given.
    std::optional<double> radius_sq;
    /// Hard-decided starting estimate; also returned if the search ends worse than it.
    std::optional<ComplexMatrix> initial;
    bool progress_guarantee = true;
};

struct Sd2dResult {
    ComplexMatrix s_hat;
    double final_loss = 0.0;
    OpCounter ops;
    bool returned_initial = false;
};

Sd2dResult sd2d_decode(const EffectiveModel& model, const modem::Constellation& constellation,
                       const Sd2dOptions& options);

struct ComplexityEstimate {
    std::uint64_t mults_2d = 0;
    std::uint64_t adds_2d = 0;
    std::size_t qr_rows_dim = 0;  // M x M factorization
    std::size_t qr_cols_dim = 0;  // N x N factorization
    std::uint64_t mults_1d = 0;
    std::uint64_t adds_1d = 0;
    std::size_t qr_1d_dim = 0;    // MN x MN factorization
};

/// Operation counts of the 2-D search against a 1-D search over the vectorized frame.
ComplexityEstimate predicted_complexity(std::size_t M, std::size_t N);

/// x0 = G^H Y_T H.
ComplexMatrix matched_filter_estimate(const EffectiveModel& model);

/// Distortion operator G^H G S (H^H H)^H, whose inverse is the zero-forcing solution.
ComplexMatrix apply_distortion(const EffectiveModel& model, const ComplexMatrix& s);

/// ||x0 - apply_distortion(x)||_F.
double im_residual(const EffectiveModel& model, const ComplexMatrix& x0, const ComplexMatrix& x);

/// x_k = omega (x0 - G(x_{k-1})) + x_{k-1}, starting from x0.
ComplexMatrix im_decode(const EffectiveModel& model, double omega, std::size_t iterations);

/// Per axis: keep the component if |p| < d, otherwise replace by sign(p) (sign(0) = +1).
ComplexMatrix soft_clip(const ComplexMatrix& w, double d);

enum class ThresholdSchedule {
    /// d_r = max(0, 1 - r / iterations)
    IterationCount,
    /// d_r = max(0, 1 - r / eta) with eta the overloading factor
    OverloadingFactor,
};

enum class SoftStateUpdate {
    /// w <- omega (w0 - G(c)) + c with c = soft_clip(w, d): the clipped estimate carries over.
    Clipped,
    /// w <- omega (w0 - G(c)) + w: only the distortion term sees the clipped estimate.
    Raw,
};

struct SoftDecodeOptions {
    /// Constellation per-axis amplitude; the clipper saturates at +-1 in these units.
    double axis_amplitude = 1.0;
    ThresholdSchedule schedule = ThresholdSchedule::IterationCount;
    double overloading = 0.0;
    SoftStateUpdate update = SoftStateUpdate::Clipped;
};

double soft_threshold(std::size_t r, std::size_t iterations, const SoftDecodeOptions& options);

/**
 * For r = 1..iterations: c = soft_clip(w, d_r), w <- omega (w0 - G(c)) + c
 * (or + w, see SoftStateUpdate), starting from w0 = matched_filter_estimate.
 * Returned in constellation units.
 */
ComplexMatrix im_soft_decode(const EffectiveModel& model, double omega, std::size_t iterations,
                             const SoftDecodeOptions& options = {});

/// Entrywise nearest constellation point, ties to the lower index.
modem::DDFrame hard_demap(const ComplexMatrix& w, const modem::Constellation& constellation);

}  // namespace notfs::detect
