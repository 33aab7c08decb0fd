#include "notfs/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace notfs {

namespace {

void require_same_shape(const ComplexMatrix& a, const ComplexMatrix& b, const char* what) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw std::invalid_argument(std::string(what) + ": shape mismatch (" +
                                    std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                                    " vs " + std::to_string(b.rows()) + "x" +
                                    std::to_string(b.cols()) + ")");
    }
}

}  // namespace

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols) {
    if (rows == 0 || cols == 0) {
        throw std::invalid_argument("ComplexMatrix: dimensions must be positive");
    }
}

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<Complex> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
    if (rows == 0 || cols == 0) {
        throw std::invalid_argument("ComplexMatrix: dimensions must be positive");
    }
    if (data_.size() != rows * cols) {
        throw std::invalid_argument("ComplexMatrix: entry count does not match rows*cols");
    }
}

ComplexMatrix::ComplexMatrix(std::initializer_list<std::initializer_list<Complex>> rows) {
    rows_ = rows.size();
    cols_ = rows_ ? rows.begin()->size() : 0;
    if (rows_ == 0 || cols_ == 0) {
        throw std::invalid_argument("ComplexMatrix: dimensions must be positive");
    }
    data_.reserve(rows_ * cols_);
    for (const auto& row : rows) {
        if (row.size() != cols_) {
            throw std::invalid_argument("ComplexMatrix: ragged initializer");
        }
        data_.insert(data_.end(), row.begin(), row.end());
    }
}

ComplexMatrix ComplexMatrix::identity(std::size_t n) {
    ComplexMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

bool ComplexMatrix::all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](const Complex& z) {
        return std::isfinite(z.real()) && std::isfinite(z.imag());
    });
}

ComplexMatrix& ComplexMatrix::operator+=(const ComplexMatrix& other) {
    require_same_shape(*this, other, "operator+=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
}

ComplexMatrix& ComplexMatrix::operator-=(const ComplexMatrix& other) {
    require_same_shape(*this, other, "operator-=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
    return *this;
}

ComplexMatrix& ComplexMatrix::operator*=(Complex factor) {
    for (auto& z : data_) z *= factor;
    return *this;
}

ComplexMatrix operator+(ComplexMatrix lhs, const ComplexMatrix& rhs) { return lhs += rhs; }
ComplexMatrix operator-(ComplexMatrix lhs, const ComplexMatrix& rhs) { return lhs -= rhs; }

ComplexMatrix matmul(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.cols() != b.rows()) {
        throw std::invalid_argument("matmul: inner dimension mismatch (" +
                                    std::to_string(a.cols()) + " vs " +
                                    std::to_string(b.rows()) + ")");
    }
    ComplexMatrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const Complex aik = a(i, k);
            for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
        }
    }
    return c;
}

ComplexMatrix adjoint(const ComplexMatrix& a) {
    ComplexMatrix out(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = std::conj(a(i, j));
    return out;
}

ComplexMatrix scale(const ComplexMatrix& a, Complex factor) {
    ComplexMatrix out = a;
    out *= factor;
    return out;
}

double frobenius_sq(const ComplexMatrix& a) {
    double acc = 0.0;
    for (const auto& z : a.data()) acc += std::norm(z);
    return acc;
}

double frobenius(const ComplexMatrix& a) { return std::sqrt(frobenius_sq(a)); }

double frobenius_distance(const ComplexMatrix& a, const ComplexMatrix& b) {
    require_same_shape(a, b, "frobenius_distance");
    double acc = 0.0;
    auto da = a.data();
    auto db = b.data();
    for (std::size_t i = 0; i < da.size(); ++i) acc += std::norm(da[i] - db[i]);
    return std::sqrt(acc);
}

QrResult qr_decompose(const ComplexMatrix& a) {
    if (!a.is_square()) {
        throw std::invalid_argument("qr_decompose: matrix must be square");
    }
    const std::size_t n = a.rows();
    ComplexMatrix r = a;
    ComplexMatrix q = ComplexMatrix::identity(n);
    std::vector<Complex> v(n);

    for (std::size_t k = 0; k + 1 < n; ++k) {
        double xnorm_sq = 0.0;
        for (std::size_t i = k; i < n; ++i) xnorm_sq += std::norm(r(i, k));
        const double xnorm = std::sqrt(xnorm_sq);
        if (xnorm == 0.0) continue;

        // Reflect x onto -phase(x0)*||x||*e1 so that v0 never cancels.
        const Complex x0 = r(k, k);
        const Complex phase = std::abs(x0) > 0.0 ? x0 / std::abs(x0) : Complex(1.0, 0.0);
        const Complex alpha = -phase * xnorm;
        for (std::size_t i = k; i < n; ++i) v[i] = r(i, k);
        v[k] -= alpha;
        double vnorm_sq = 0.0;
        for (std::size_t i = k; i < n; ++i) vnorm_sq += std::norm(v[i]);
        if (vnorm_sq == 0.0) continue;
        const double tau = 2.0 / vnorm_sq;

        // R <- (I - tau v v^H) R
        for (std::size_t j = k; j < n; ++j) {
            Complex dot = 0.0;
            for (std::size_t i = k; i < n; ++i) dot += std::conj(v[i]) * r(i, j);
            dot *= tau;
            for (std::size_t i = k; i < n; ++i) r(i, j) -= v[i] * dot;
        }
        for (std::size_t i = k + 1; i < n; ++i) r(i, k) = 0.0;

        // Q <- Q (I - tau v v^H)
        for (std::size_t i = 0; i < n; ++i) {
            Complex dot = 0.0;
            for (std::size_t j = k; j < n; ++j) dot += q(i, j) * v[j];
            dot *= tau;
            for (std::size_t j = k; j < n; ++j) q(i, j) -= dot * std::conj(v[j]);
        }
    }

    // Rotate each row of R so its diagonal is real non-negative.
    for (std::size_t i = 0; i < n; ++i) {
        const double mag = std::abs(r(i, i));
        if (mag == 0.0) continue;
        const Complex phase = r(i, i) / mag;
        const Complex undo = std::conj(phase);
        for (std::size_t j = i; j < n; ++j) r(i, j) *= undo;
        r(i, i) = mag;
        for (std::size_t row = 0; row < n; ++row) q(row, i) *= phase;
    }

    QrResult out{std::move(q), std::move(r), false, 0.0};
    double min_diag = std::abs(out.r(0, 0));
    for (std::size_t i = 1; i < n; ++i) min_diag = std::min(min_diag, std::abs(out.r(i, i)));
    out.min_abs_diagonal = min_diag;
    out.rank_deficient = min_diag <= 1e-12 * frobenius(a);
    return out;
}

double dirichlet_sq(double x, std::size_t k) {
    // Period 1 and even: reduce to [-1/2, 1/2] before evaluating.
    const double r = x - std::round(x);
    const double den = std::sin(kPi * r);
    const double kk = static_cast<double>(k);
    if (std::abs(den) < 1e-12) return kk * kk;
    const double num = std::sin(kPi * kk * r);
    return (num * num) / (den * den);
}

}  // namespace notfs
