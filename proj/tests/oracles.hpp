#pragma once
// Dense restatements of the graph layers, written independently of the
// library code paths (no sparse aggregation, no SIMD kernels).

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>

#include "autokg/gnn.hpp"
#include "test_util.hpp"

namespace oracle {

using autokg::KnowledgeGraph;
using autokg::Matrix;
using autokg::gnn::LayerParams;
using testutil::naive_matmul;

inline double lrelu(double x, double s) { return x > 0 ? x : s * x; }

inline std::vector<std::size_t> neighbourhood(const KnowledgeGraph& g, std::size_t i) {
    std::vector<std::size_t> s{i};
    for (std::size_t j = 0; j < g.num_nodes(); ++j)
        if (g.has_edge(i, j)) s.push_back(j);
    return s;
}

inline Matrix softmax_aggregate(const KnowledgeGraph& g, const Matrix& y,
                         const std::function<double(std::size_t, std::size_t)>& score) {
    Matrix out(y.rows(), y.cols());
    for (std::size_t i = 0; i < y.rows(); ++i) {
        const auto s = neighbourhood(g, i);
        std::vector<double> e;
        for (std::size_t j : s) e.push_back(score(i, j));
        const double mx = *std::max_element(e.begin(), e.end());
        double z = 0;
        for (double& v : e) z += (v = std::exp(v - mx));
        for (std::size_t t = 0; t < s.size(); ++t)
            for (std::size_t c = 0; c < y.cols(); ++c) out(i, c) += e[t] / z * y(s[t], c);
    }
    return out;
}

inline Matrix fdn_oracle(const Matrix& x, const KnowledgeGraph& g, const LayerParams& p, double slope) {
    const Matrix y = naive_matmul(x, p.w_fd.transposed());
    const std::size_t f = y.cols();
    return softmax_aggregate(g, y, [&](std::size_t i, std::size_t j) {
        double c = 0, d = 0;
        for (std::size_t m = 0; m < f; ++m) {
            c += p.a_fd[m] * y(i, m) + p.a_fd[f + m] * y(j, m);
            d += y(i, m) * y(j, m);
        }
        return lrelu(c / (1.0 + std::exp(-d)), slope);
    });
}

inline Matrix semantic_oracle(const Matrix& x, const KnowledgeGraph& g, const Matrix& w_s, const std::vector<double>& a,
                       double slope) {
    const Matrix u = naive_matmul(x, w_s.transposed());
    const std::size_t f = u.cols();
    return softmax_aggregate(g, u, [&](std::size_t i, std::size_t j) {
        double s = 0;
        for (std::size_t m = 0; m < f; ++m) s += a[m] * lrelu(u(i, m), slope) + a[f + m] * lrelu(u(j, m), slope);
        return s;
    });
}

inline Matrix topo_oracle(const Matrix& x, const KnowledgeGraph& g, const Matrix& w) {
    const std::size_t n = g.num_nodes();
    Matrix a = adjacency(g);
    for (std::size_t i = 0; i < n; ++i) a(i, i) += 1.0;
    std::vector<double> d(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) d[i] += a(i, j);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) a(i, j) /= std::sqrt(d[i] * d[j]);
    return naive_matmul(naive_matmul(a, x), w);
}

inline double cheb_t(std::size_t k, double x) {
    if (std::abs(x) <= 1.0) return std::cos(static_cast<double>(k) * std::acos(x));
    const double c = std::cosh(static_cast<double>(k) * std::acosh(std::abs(x)));
    return (x < 0 && k % 2 == 1) ? -c : c;
}

// sum_k T_(k-1)(Lhat) X W_k with T evaluated on the eigenvalues of Lhat.
inline Matrix cheb_oracle(const Matrix& x, const Matrix& lhat, const std::vector<Matrix>& w) {
    const std::size_t n = lhat.rows();
    Eigen::MatrixXd l(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) l(i, j) = lhat(i, j);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(l);
    Matrix out(n, w.front().cols());
    for (std::size_t k = 0; k < w.size(); ++k) {
        Eigen::VectorXd t(n);
        for (std::size_t i = 0; i < n; ++i) t(i) = cheb_t(k, es.eigenvalues()(i));
        const Eigen::MatrixXd tk = es.eigenvectors() * t.asDiagonal() * es.eigenvectors().transpose();
        Matrix tm(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) tm(i, j) = tk(i, j);
        add_scaled(out, naive_matmul(naive_matmul(tm, x), w[k]));
    }
    return out;
}

}  // namespace oracle
