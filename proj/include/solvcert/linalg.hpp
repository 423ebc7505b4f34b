#pragma once

// Dense complex linear algebra used by the certificate machinery: a small
// row-major matrix type, infinity norms, LU with partial pivoting, and the
// block matrix J* together with its inverse blocks M and N.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <type_traits>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "solvcert/errors.hpp"

namespace solvcert {

using Complex = std::complex<double>;
using CVector = std::vector<Complex>;

namespace detail {
inline bool is_finite(double v) { return std::isfinite(v); }
inline bool is_finite(const Complex& v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); }
inline double magnitude(double v) { return std::abs(v); }
inline double magnitude(const Complex& v) { return std::abs(v); }
}  // namespace detail

template <typename T>
class Matrix {
public:
    using value_type = T;

    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, T{}) {}

    /// Takes ownership of row-major `data`; rejects NaN/Inf entries.
    Matrix(std::size_t rows, std::size_t cols, std::vector<T> data)
        : rows_(rows), cols_(cols), data_(std::move(data)) {
        if (data_.size() != rows_ * cols_) throw std::invalid_argument("Matrix: data size mismatch");
        for (const auto& v : data_)
            if (!detail::is_finite(v)) throw std::invalid_argument("Matrix: non-finite entry");
    }

    Matrix(std::initializer_list<std::initializer_list<T>> rows) {
        rows_ = rows.size();
        cols_ = rows_ ? rows.begin()->size() : 0;
        data_.reserve(rows_ * cols_);
        for (const auto& r : rows) {
            if (r.size() != cols_) throw std::invalid_argument("Matrix: ragged initializer");
            for (const auto& v : r) {
                if (!detail::is_finite(v)) throw std::invalid_argument("Matrix: non-finite entry");
                data_.push_back(v);
            }
        }
    }

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = T{1};
        return m;
    }

    static Matrix diagonal(std::span<const T> d) {
        Matrix m(d.size(), d.size());
        for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
        return m;
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool square() const noexcept { return rows_ == cols_; }

    T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const T& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<T> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
    std::span<const T> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

    const std::vector<T>& data() const noexcept { return data_; }
    std::vector<T>& data() noexcept { return data_; }

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

using ComplexMatrix = Matrix<Complex>;
using RealMatrix = Matrix<double>;

// ---------------------------------------------------------------------------
// Norms. All norms are infinity norms.

/// max_i |v_i|; 0 for an empty vector.
double inf_norm(std::span<const Complex> v);

/// Maximum absolute row sum.
double inf_norm(const ComplexMatrix& a);

// ---------------------------------------------------------------------------
// Elementwise and product helpers.

ComplexMatrix conj(const ComplexMatrix& a);
CVector conj(std::span<const Complex> v);

ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix operator+(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix operator-(const ComplexMatrix& a, const ComplexMatrix& b);
CVector operator*(const ComplexMatrix& a, std::span<const Complex> x);

/// a · diag(d)
ComplexMatrix scale_columns(const ComplexMatrix& a, std::span<const Complex> d);
/// diag(d) · a
ComplexMatrix scale_rows(std::span<const Complex> d, const ComplexMatrix& a);

/// Largest entrywise modulus of a - b.
double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b);

// ---------------------------------------------------------------------------
// LU factorization with partial pivoting, PA = LU.

template <typename T>
class LuFactorization {
public:
    /// Throws SingularMatrixError when a pivot is negligible relative to the
    /// largest entry of `a`.
    explicit LuFactorization(const Matrix<T>& a) {
        if (!a.square()) throw std::invalid_argument("LU: matrix must be square");
        const auto n = static_cast<Eigen::Index>(a.rows());
        const Eigen::Map<const EigenMat> view(a.data().data(), n, n);
        double scale = 0.0;
        for (const auto& v : a.data()) scale = std::max(scale, detail::magnitude(v));
        const double threshold = scale * static_cast<double>(n) * 1e-15;
        lu_.compute(view);
        const auto& packed = lu_.matrixLU();
        for (Eigen::Index k = 0; k < n; ++k)
            if (scale == 0.0 || !(std::abs(packed(k, k)) > threshold))
                throw SingularMatrixError(static_cast<std::size_t>(k));
    }

    std::size_t size() const noexcept { return static_cast<std::size_t>(lu_.rows()); }

    std::vector<T> solve(std::span<const T> b) const {
        const std::size_t n = size();
        if (b.size() != n) throw std::invalid_argument("LU solve: dimension mismatch");
        const Eigen::Map<const EigenVec> rhs(b.data(), static_cast<Eigen::Index>(n));
        std::vector<T> x(n);
        Eigen::Map<EigenVec>(x.data(), static_cast<Eigen::Index>(n)) = lu_.solve(rhs);
        return x;
    }

    Matrix<T> inverse() const {
        const std::size_t n = size();
        Matrix<T> inv(n, n);
        Eigen::Map<EigenMat>(inv.data().data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)) =
            lu_.inverse();
        return inv;
    }

private:
    using EigenMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    using EigenVec = Eigen::Matrix<T, Eigen::Dynamic, 1>;
    Eigen::PartialPivLU<EigenMat> lu_;
};

struct DenseInverse {
    ComplexMatrix inverse;
    /// ||A||_1 · ||A^-1||_1
    double condition_estimate = 0.0;
};

/// Inverts a square matrix. Throws SingularMatrixError carrying the pivot index.
DenseInverse invert_dense(const ComplexMatrix& a);

// ---------------------------------------------------------------------------
// J* = [[I, conj(Z*) diag(conj(s*))], [Z* diag(s*), I]] and its inverse
// [[M, N], [conj(N), conj(M)]].

struct JStarBlocks {
    ComplexMatrix z_star;
    ComplexMatrix m;
    ComplexMatrix n;
    double inv_jstar_norm = 0.0;
    double condition_estimate = 0.0;
    /// ||J* · J*^-1 - I||_inf measured on the assembled blocks.
    double reconstruction_residual = 0.0;
};

/// Builds J* explicitly, inverts it and extracts M, N. The lower block row of
/// the inverse must equal [conj(N), conj(M)] to 1e-8 relative.
///
/// Throws BaseValidityError if J* is singular and InternalConsistencyError if
/// the block-conjugate structure does not hold.
JStarBlocks assemble_jstar(const ComplexMatrix& z_star, std::span<const Complex> s_star);

/// The full 2n x 2n matrix J*.
ComplexMatrix build_jstar(const ComplexMatrix& z_star, std::span<const Complex> s_star);

/// Reassembles [[M, N], [conj(N), conj(M)]].
ComplexMatrix jstar_inverse_from_blocks(const ComplexMatrix& m, const ComplexMatrix& n);

}  // namespace solvcert
