#include "autokg/matrix.hpp"

#include <algorithm>
#include <cmath>

#include "autokg/error.hpp"
#include "autokg/simd.hpp"

namespace autokg {

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
    const std::size_t cols = rows.empty() ? 0 : rows.front().size();
    Matrix m(rows.size(), cols);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != cols) throw ShapeMismatch("ragged rows in Matrix::from_rows");
        std::copy(rows[r].begin(), rows[r].end(), m.row(r).begin());
    }
    return m;
}

Matrix Matrix::transposed() const {
    Matrix t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
    return t;
}

bool Matrix::all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw ShapeMismatch("matmul: inner dimensions differ");
    Matrix out(a.rows(), b.cols());
    const auto& k = simd::active();
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double* dst = out.row(i).data();
        for (std::size_t p = 0; p < a.cols(); ++p) {
            const double s = a(i, p);
            if (s != 0.0) k.axpy(s, b.row(p).data(), dst, b.cols());
        }
    }
    return out;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols()) throw ShapeMismatch("matmul_nt: inner dimensions differ");
    Matrix out(a.rows(), b.rows());
    const auto& k = simd::active();
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < b.rows(); ++j) out(i, j) = k.dot(a.row(i).data(), b.row(j).data(), a.cols());
    return out;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows()) throw ShapeMismatch("matmul_tn: row counts differ");
    Matrix out(a.cols(), b.cols());
    const auto& k = simd::active();
    for (std::size_t p = 0; p < a.rows(); ++p)
        for (std::size_t i = 0; i < a.cols(); ++i) {
            const double s = a(p, i);
            if (s != 0.0) k.axpy(s, b.row(p).data(), out.row(i).data(), b.cols());
        }
    return out;
}

void add_scaled(Matrix& out, const Matrix& a, double alpha) {
    if (out.rows() != a.rows() || out.cols() != a.cols()) throw ShapeMismatch("add_scaled: shapes differ");
    simd::axpy(alpha, a.data().data(), out.data().data(), a.data().size());
}

Matrix hconcat(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows()) throw ShapeMismatch("hconcat: row counts differ");
    Matrix out(a.rows(), a.cols() + b.cols());
    for (std::size_t r = 0; r < a.rows(); ++r) {
        std::copy(a.row(r).begin(), a.row(r).end(), out.row(r).begin());
        std::copy(b.row(r).begin(), b.row(r).end(), out.row(r).begin() + static_cast<std::ptrdiff_t>(a.cols()));
    }
    return out;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw ShapeMismatch("max_abs_diff: shapes differ");
    double m = 0.0;
    for (std::size_t i = 0; i < a.data().size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
    return m;
}

double l2_norm(std::span<const double> v) { return std::sqrt(simd::dot(v.data(), v.data(), v.size())); }

double cosine(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw ShapeMismatch("cosine: length mismatch");
    const double na = l2_norm(a);
    const double nb = l2_norm(b);
    if (na == 0.0 || nb == 0.0) return 0.0;
    return std::clamp(simd::dot(a.data(), b.data(), a.size()) / (na * nb), -1.0, 1.0);
}

}  // namespace autokg
