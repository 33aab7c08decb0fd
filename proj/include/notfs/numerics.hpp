#pragma once

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace notfs {

using Complex = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

/**
 * Dense complex matrix, row-major.
 *
 * Frames handled by this library are at most a few dozen entries per side, so
 * everything is stored densely and operations are straightforward loops.
 */
class ComplexMatrix {
public:
    ComplexMatrix() = default;
    ComplexMatrix(std::size_t rows, std::size_t cols);
    ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<Complex> entries);
    ComplexMatrix(std::initializer_list<std::initializer_list<Complex>> rows);

    static ComplexMatrix identity(std::size_t n);
    static ComplexMatrix zeros(std::size_t rows, std::size_t cols) { return {rows, cols}; }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }
    bool is_square() const { return rows_ == cols_; }

    Complex& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    const Complex& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<Complex> data() { return data_; }
    std::span<const Complex> data() const { return data_; }

    bool all_finite() const;

    ComplexMatrix& operator+=(const ComplexMatrix& other);
    ComplexMatrix& operator-=(const ComplexMatrix& other);
    ComplexMatrix& operator*=(Complex factor);

    friend bool operator==(const ComplexMatrix&, const ComplexMatrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<Complex> data_;
};

ComplexMatrix operator+(ComplexMatrix lhs, const ComplexMatrix& rhs);
ComplexMatrix operator-(ComplexMatrix lhs, const ComplexMatrix& rhs);

// Throws std::invalid_argument on inner-dimension mismatch.
ComplexMatrix matmul(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix adjoint(const ComplexMatrix& a);
ComplexMatrix scale(const ComplexMatrix& a, Complex factor);

/// Sum of squared magnitudes of all entries.
double frobenius_sq(const ComplexMatrix& a);
double frobenius(const ComplexMatrix& a);

/// ||a - b||_F; throws on shape mismatch.
double frobenius_distance(const ComplexMatrix& a, const ComplexMatrix& b);

struct QrResult {
    ComplexMatrix q;
    ComplexMatrix r;
    /// Set when the smallest |R_ii| falls below 1e-12 * ||A||_F.
    bool rank_deficient = false;
    double min_abs_diagonal = 0.0;
};

/**
 * Householder QR of a square complex matrix.
 *
 * The factors are normalized so that diag(R) is real and non-negative, which
 * makes them unique for full-rank input. Rank loss is reported through
 * QrResult::rank_deficient rather than thrown; callers that cannot tolerate a
 * singular triangular factor must check it.
 */
QrResult qr_decompose(const ComplexMatrix& a);

/**
 * sin^2(pi K x) / sin^2(pi x), i.e. |sum_{n<K} exp(j 2 pi n x)|^2.
 * Integer x resolves to K^2.
 */
double dirichlet_sq(double x, std::size_t k);

}  // namespace notfs
