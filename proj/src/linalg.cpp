#include "solvcert/linalg.hpp"

#include <algorithm>
#include <string>

namespace solvcert {

double inf_norm(std::span<const Complex> v) {
    double m = 0.0;
    for (const auto& x : v) m = std::max(m, std::abs(x));
    return m;
}

double inf_norm(const ComplexMatrix& a) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double sum = 0.0;
        for (const auto& x : a.row(i)) sum += std::abs(x);
        m = std::max(m, sum);
    }
    return m;
}

ComplexMatrix conj(const ComplexMatrix& a) {
    ComplexMatrix out(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) = std::conj(a(i, j));
    return out;
}

CVector conj(std::span<const Complex> v) {
    CVector out(v.size());
    std::transform(v.begin(), v.end(), out.begin(), [](const Complex& x) { return std::conj(x); });
    return out;
}

ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.cols() != b.rows()) throw std::invalid_argument("matrix product: dimension mismatch");
    ComplexMatrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        auto oi = out.row(i);
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const Complex aik = a(i, k);
            if (aik == Complex{}) continue;
            const auto bk = b.row(k);
            for (std::size_t j = 0; j < b.cols(); ++j) oi[j] += aik * bk[j];
        }
    }
    return out;
}

ComplexMatrix operator+(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw std::invalid_argument("matrix sum: dimension mismatch");
    ComplexMatrix out(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) = a(i, j) + b(i, j);
    return out;
}

ComplexMatrix operator-(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw std::invalid_argument("matrix difference: dimension mismatch");
    ComplexMatrix out(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) = a(i, j) - b(i, j);
    return out;
}

CVector operator*(const ComplexMatrix& a, std::span<const Complex> x) {
    if (a.cols() != x.size()) throw std::invalid_argument("matrix-vector product: dimension mismatch");
    CVector out(a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        Complex acc{};
        const auto ri = a.row(i);
        for (std::size_t j = 0; j < x.size(); ++j) acc += ri[j] * x[j];
        out[i] = acc;
    }
    return out;
}

ComplexMatrix scale_columns(const ComplexMatrix& a, std::span<const Complex> d) {
    if (a.cols() != d.size()) throw std::invalid_argument("scale_columns: dimension mismatch");
    ComplexMatrix out(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) = a(i, j) * d[j];
    return out;
}

ComplexMatrix scale_rows(std::span<const Complex> d, const ComplexMatrix& a) {
    if (a.rows() != d.size()) throw std::invalid_argument("scale_rows: dimension mismatch");
    ComplexMatrix out(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) = d[i] * a(i, j);
    return out;
}

double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw std::invalid_argument("max_abs_diff: dimension mismatch");
    double m = 0.0;
    for (std::size_t k = 0; k < a.data().size(); ++k) m = std::max(m, std::abs(a.data()[k] - b.data()[k]));
    return m;
}

namespace {

double one_norm(const ComplexMatrix& a) {
    double m = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) {
        double sum = 0.0;
        for (std::size_t i = 0; i < a.rows(); ++i) sum += std::abs(a(i, j));
        m = std::max(m, sum);
    }
    return m;
}

}  // namespace

DenseInverse invert_dense(const ComplexMatrix& a) {
    if (!a.square()) throw std::invalid_argument("invert_dense: matrix must be square");
    if (a.rows() == 0) return {};
    LuFactorization<Complex> lu(a);
    DenseInverse out{lu.inverse(), 0.0};
    out.condition_estimate = one_norm(a) * one_norm(out.inverse);
    return out;
}

ComplexMatrix build_jstar(const ComplexMatrix& z_star, std::span<const Complex> s_star) {
    const std::size_t n = z_star.rows();
    if (!z_star.square() || s_star.size() != n)
        throw std::invalid_argument("build_jstar: dimension mismatch");
    ComplexMatrix j(2 * n, 2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        j(i, i) = 1.0;
        j(n + i, n + i) = 1.0;
        for (std::size_t k = 0; k < n; ++k) {
            j(i, n + k) = std::conj(z_star(i, k)) * std::conj(s_star[k]);
            j(n + i, k) = z_star(i, k) * s_star[k];
        }
    }
    return j;
}

ComplexMatrix jstar_inverse_from_blocks(const ComplexMatrix& m, const ComplexMatrix& n) {
    const std::size_t dim = m.rows();
    ComplexMatrix out(2 * dim, 2 * dim);
    for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t k = 0; k < dim; ++k) {
            out(i, k) = m(i, k);
            out(i, dim + k) = n(i, k);
            out(dim + i, k) = std::conj(n(i, k));
            out(dim + i, dim + k) = std::conj(m(i, k));
        }
    return out;
}

JStarBlocks assemble_jstar(const ComplexMatrix& z_star, std::span<const Complex> s_star) {
    const std::size_t n = z_star.rows();
    const ComplexMatrix jstar = build_jstar(z_star, s_star);

    DenseInverse inv;
    try {
        inv = invert_dense(jstar);
    } catch (const SingularMatrixError& e) {
        throw BaseValidityError("base point at certificate validity limit: J* singular (pivot " +
                                std::to_string(e.pivot()) + ")");
    }

    JStarBlocks out;
    out.z_star = z_star;
    out.m = ComplexMatrix(n, n);
    out.n = ComplexMatrix(n, n);
    double deviation = 0.0;
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < n; ++k) {
            const Complex mik = inv.inverse(i, k);
            const Complex nik = inv.inverse(i, n + k);
            out.m(i, k) = mik;
            out.n(i, k) = nik;
            deviation = std::max(deviation, std::abs(inv.inverse(n + i, k) - std::conj(nik)));
            deviation = std::max(deviation, std::abs(inv.inverse(n + i, n + k) - std::conj(mik)));
            scale = std::max({scale, std::abs(mik), std::abs(nik)});
        }
    if (deviation > 1e-8 * std::max(1.0, scale))
        throw InternalConsistencyError("J* inverse lacks block-conjugate structure (deviation " +
                                       std::to_string(deviation) + ")");

    const ComplexMatrix assembled = jstar_inverse_from_blocks(out.m, out.n);
    out.inv_jstar_norm = inf_norm(assembled);
    out.condition_estimate = inv.condition_estimate;
    out.reconstruction_residual =
        inf_norm(jstar * assembled - ComplexMatrix::identity(2 * n));
    return out;
}

}  // namespace solvcert
