#include "autokg/gnn.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "autokg/error.hpp"
#include "autokg/rng.hpp"
#include "autokg/simd.hpp"

namespace autokg::gnn {
namespace {

void fill_uniform(std::vector<double>& v, Rng& rng, double scale) {
    for (double& x : v) x = rng.uniform(-scale, scale);
}

void softmax_inplace(std::vector<double>& v) {
    if (v.empty()) return;
    const double m = *std::max_element(v.begin(), v.end());
    double sum = 0.0;
    for (double& x : v) {
        x = std::exp(x - m);
        sum += x;
    }
    for (double& x : v) x /= sum;
}

void expect_rows(const Matrix& m, std::size_t rows, const char* what) {
    if (m.rows() != rows)
        throw ShapeMismatch(std::string(what) + ": expected " + std::to_string(rows) + " rows, got " +
                            std::to_string(m.rows()));
}

void expect_shape(const Matrix& m, std::size_t rows, std::size_t cols, const char* what) {
    if (m.rows() != rows || m.cols() != cols)
        throw ShapeMismatch(std::string(what) + ": expected " + std::to_string(rows) + "x" + std::to_string(cols) +
                            ", got " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
}

}  // namespace

ModelDims LayerParams::dims() const { return {w_fd.cols(), w_fd.rows(), w_nr.size()}; }

bool LayerParams::all_finite() const {
    auto finite = [](const std::vector<double>& v) {
        return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
    };
    return w_fd.all_finite() && finite(a_fd) && w_tr.all_finite() &&
           std::all_of(w_nr.begin(), w_nr.end(), [](const Matrix& m) { return m.all_finite(); }) &&
           w_s.all_finite() && finite(a_s);
}

LayerParams init_params(const ModelDims& dims, std::uint64_t seed, double scale) {
    if (dims.hidden < 1 || dims.cheb_order < 1 || dims.input_dim < 1) throw ShapeMismatch("invalid model dimensions");
    Rng rng(seed);
    const std::size_t f = dims.hidden;
    LayerParams p;
    p.w_fd = Matrix(f, dims.input_dim);
    fill_uniform(p.w_fd.data(), rng, scale);
    p.a_fd.resize(2 * f);
    fill_uniform(p.a_fd, rng, scale);
    p.w_tr = Matrix(f, f);
    fill_uniform(p.w_tr.data(), rng, scale);
    for (std::size_t k = 0; k < dims.cheb_order; ++k) {
        Matrix w(f, f);
        fill_uniform(w.data(), rng, scale);
        p.w_nr.push_back(std::move(w));
    }
    p.w_s = Matrix(f, 2 * f);
    fill_uniform(p.w_s.data(), rng, scale);
    p.a_s.resize(2 * f);
    fill_uniform(p.a_s, rng, scale);
    return p;
}

double leaky_relu(double x, double slope) noexcept { return x > 0.0 ? x : slope * x; }

double sigmoid(double x) noexcept {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

Attention self_and_neighbors(const KnowledgeGraph& g) {
    Attention att;
    att.nbrs.resize(g.num_nodes());
    att.alpha.resize(g.num_nodes());
    for (NodeId i = 0; i < g.num_nodes(); ++i) att.nbrs[i].push_back(i);
    for (const Edge& e : g.edges()) {
        att.nbrs[e.src].push_back(e.dst);
        att.nbrs[e.dst].push_back(e.src);
    }
    for (auto& l : att.nbrs) std::sort(l.begin() + 1, l.end());
    return att;
}

// ---------------------------------------------------------------------------
// Feature denoising

FdnForward fdn_forward_full(const Matrix& x0, const KnowledgeGraph& g, const Matrix& w_fd, std::span<const double> a_fd,
                            double slope) {
    expect_rows(x0, g.num_nodes(), "fdn_forward input");
    if (x0.cols() != w_fd.cols()) throw ShapeMismatch("fdn_forward: W_fd expects " + std::to_string(w_fd.cols()) +
                                                      " input columns, got " + std::to_string(x0.cols()));
    const std::size_t f = w_fd.rows();
    if (a_fd.size() != 2 * f) throw ShapeMismatch("fdn_forward: attention vector must have length 2F");

    FdnForward fwd;
    fwd.y = matmul_nt(x0, w_fd);
    fwd.att = self_and_neighbors(g);
    const std::size_t n = g.num_nodes();
    const double* a_self = a_fd.data();
    const double* a_nbr = a_fd.data() + f;
    std::vector<double> self_part(n), nbr_part(n);
    for (std::size_t i = 0; i < n; ++i) {
        self_part[i] = simd::dot(a_self, fwd.y.row(i).data(), f);
        nbr_part[i] = simd::dot(a_nbr, fwd.y.row(i).data(), f);
    }
    fwd.out = Matrix(n, f);
    fwd.concat_score.resize(n);
    fwd.gate.resize(n);
    fwd.score.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& nb = fwd.att.nbrs[i];
        auto& c = fwd.concat_score[i];
        auto& s = fwd.gate[i];
        auto& e = fwd.score[i];
        auto& alpha = fwd.att.alpha[i];
        c.resize(nb.size());
        s.resize(nb.size());
        e.resize(nb.size());
        alpha.resize(nb.size());
        for (std::size_t k = 0; k < nb.size(); ++k) {
            const NodeId j = nb[k];
            c[k] = self_part[i] + nbr_part[j];
            s[k] = sigmoid(simd::dot(fwd.y.row(i).data(), fwd.y.row(j).data(), f));
            e[k] = c[k] * s[k];
            alpha[k] = leaky_relu(e[k], slope);
        }
        softmax_inplace(alpha);
        double* dst = fwd.out.row(i).data();
        for (std::size_t k = 0; k < nb.size(); ++k) simd::axpy(alpha[k], fwd.y.row(nb[k]).data(), dst, f);
    }
    return fwd;
}

Matrix fdn_forward(const Matrix& x0, const KnowledgeGraph& g, const LayerParams& params, double slope) {
    return fdn_forward_full(x0, g, params.w_fd, params.a_fd, slope).out;
}

FdnGrads fdn_backward(const FdnForward& fwd, const Matrix& x0, std::span<const double> a_fd, double slope,
                      const Matrix& d_out) {
    const std::size_t n = fwd.y.rows();
    const std::size_t f = fwd.y.cols();
    expect_shape(d_out, n, f, "fdn_backward gradient");
    Matrix dy(n, f);
    std::vector<double> self_coef(n, 0.0), nbr_coef(n, 0.0);
    std::vector<double> dalpha;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& nb = fwd.att.nbrs[i];
        const auto& alpha = fwd.att.alpha[i];
        const double* gi = d_out.row(i).data();
        dalpha.assign(nb.size(), 0.0);
        double mean = 0.0;
        for (std::size_t k = 0; k < nb.size(); ++k) {
            dalpha[k] = simd::dot(gi, fwd.y.row(nb[k]).data(), f);
            simd::axpy(alpha[k], gi, dy.row(nb[k]).data(), f);
            mean += alpha[k] * dalpha[k];
        }
        for (std::size_t k = 0; k < nb.size(); ++k) {
            const NodeId j = nb[k];
            const double dl = alpha[k] * (dalpha[k] - mean);
            const double de = dl * (fwd.score[i][k] > 0.0 ? 1.0 : slope);
            const double s = fwd.gate[i][k];
            const double dc = de * s;
            const double dp = de * fwd.concat_score[i][k] * s * (1.0 - s);
            simd::axpy(dp, fwd.y.row(j).data(), dy.row(i).data(), f);
            simd::axpy(dp, fwd.y.row(i).data(), dy.row(j).data(), f);
            self_coef[i] += dc;
            nbr_coef[j] += dc;
        }
    }
    FdnGrads grads;
    grads.a_fd.assign(2 * f, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        simd::axpy(self_coef[i], fwd.y.row(i).data(), grads.a_fd.data(), f);
        simd::axpy(nbr_coef[i], fwd.y.row(i).data(), grads.a_fd.data() + f, f);
        simd::axpy(self_coef[i], a_fd.data(), dy.row(i).data(), f);
        simd::axpy(nbr_coef[i], a_fd.data() + f, dy.row(i).data(), f);
    }
    grads.w_fd = matmul_tn(dy, x0);
    return grads;
}

// ---------------------------------------------------------------------------
// Topological relations

Matrix normalized_adjacency_with_self(const KnowledgeGraph& g) {
    const std::size_t n = g.num_nodes();
    std::vector<double> deg(n, 1.0);
    for (const Edge& e : g.edges()) {
        deg[e.src] += e.weight;
        deg[e.dst] += e.weight;
    }
    Matrix a(n, n);
    for (std::size_t i = 0; i < n; ++i) a(i, i) = 1.0 / deg[i];
    for (const Edge& e : g.edges()) {
        const double v = e.weight / std::sqrt(deg[e.src] * deg[e.dst]);
        a(e.src, e.dst) = v;
        a(e.dst, e.src) = v;
    }
    return a;
}

TopoForward topo_forward_full(const Matrix& xd, const KnowledgeGraph& g, const Matrix& w_tr) {
    expect_rows(xd, g.num_nodes(), "topo_forward input");
    expect_rows(w_tr, xd.cols(), "topo_forward W_tr");
    const std::size_t n = g.num_nodes();
    const std::size_t f = xd.cols();
    std::vector<double> deg(n, 1.0);
    for (const Edge& e : g.edges()) {
        deg[e.src] += e.weight;
        deg[e.dst] += e.weight;
    }
    TopoForward fwd;
    fwd.agg = Matrix(n, f);
    for (std::size_t i = 0; i < n; ++i) simd::axpy(1.0 / deg[i], xd.row(i).data(), fwd.agg.row(i).data(), f);
    for (const Edge& e : g.edges()) {
        const double coef = e.weight / std::sqrt(deg[e.src] * deg[e.dst]);
        simd::axpy(coef, xd.row(e.src).data(), fwd.agg.row(e.dst).data(), f);
        simd::axpy(coef, xd.row(e.dst).data(), fwd.agg.row(e.src).data(), f);
    }
    fwd.out = matmul(fwd.agg, w_tr);
    return fwd;
}

Matrix topo_forward(const Matrix& xd, const KnowledgeGraph& g, const Matrix& w_tr) {
    return topo_forward_full(xd, g, w_tr).out;
}

Matrix topo_backward(const TopoForward& fwd, const Matrix& d_out) {
    expect_shape(d_out, fwd.out.rows(), fwd.out.cols(), "topo_backward gradient");
    return matmul_tn(fwd.agg, d_out);
}

// ---------------------------------------------------------------------------
// Local relations

ChebForward cheb_forward_full(const Matrix& xd, const Matrix& lhat, const std::vector<Matrix>& w_nr) {
    if (w_nr.empty()) throw ShapeMismatch("cheb_forward: K must be >= 1");
    expect_shape(lhat, xd.rows(), xd.rows(), "cheb_forward Lhat");
    ChebForward fwd;
    fwd.z.push_back(xd);
    if (w_nr.size() >= 2) fwd.z.push_back(matmul(lhat, xd));
    for (std::size_t k = 2; k < w_nr.size(); ++k) {
        Matrix next = matmul(lhat, fwd.z[k - 1]);
        simd::scal(2.0, next.data().data(), next.data().size());
        add_scaled(next, fwd.z[k - 2], -1.0);
        fwd.z.push_back(std::move(next));
    }
    for (std::size_t k = 0; k < w_nr.size(); ++k) {
        expect_shape(w_nr[k], xd.cols(), w_nr.front().cols(), "cheb_forward W_nr");
        Matrix term = matmul(fwd.z[k], w_nr[k]);
        if (k == 0) fwd.out = std::move(term);
        else add_scaled(fwd.out, term);
    }
    return fwd;
}

Matrix cheb_forward(const Matrix& xd, const Matrix& lhat, const std::vector<Matrix>& w_nr, std::size_t k) {
    if (k < 1 || k > w_nr.size()) throw ShapeMismatch("cheb_forward: K out of range for the weight list");
    return cheb_forward_full(xd, lhat, std::vector<Matrix>(w_nr.begin(), w_nr.begin() + static_cast<std::ptrdiff_t>(k)))
        .out;
}

std::vector<Matrix> cheb_backward(const ChebForward& fwd, const Matrix& d_out) {
    expect_shape(d_out, fwd.out.rows(), fwd.out.cols(), "cheb_backward gradient");
    std::vector<Matrix> grads;
    for (const Matrix& z : fwd.z) grads.push_back(matmul_tn(z, d_out));
    return grads;
}

Matrix graph_scaled_laplacian(const KnowledgeGraph& g, std::uint64_t seed) {
    const Matrix l = normalized_laplacian(g);
    const double lambda = estimate_lambda_max(l, 100, seed) * kLambdaSafetyFactor;
    return scaled_laplacian(l, lambda);
}

// ---------------------------------------------------------------------------
// Semantic attention convolution

SemanticForward semantic_forward_full(const Matrix& x, const KnowledgeGraph& g, const Matrix& w_s,
                                      std::span<const double> a_s, double slope) {
    expect_rows(x, g.num_nodes(), "semantic_forward input");
    if (x.cols() != w_s.cols()) throw ShapeMismatch("semantic_forward: W_s expects " + std::to_string(w_s.cols()) +
                                                    " input columns, got " + std::to_string(x.cols()));
    const std::size_t f = w_s.rows();
    if (a_s.size() != 2 * f) throw ShapeMismatch("semantic_forward: attention vector must have length 2F");
    const std::size_t n = g.num_nodes();

    SemanticForward fwd;
    fwd.u = matmul_nt(x, w_s);
    fwd.att = self_and_neighbors(g);
    std::vector<double> act(f), self_part(n), nbr_part(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t c = 0; c < f; ++c) act[c] = leaky_relu(fwd.u(i, c), slope);
        self_part[i] = simd::dot(a_s.data(), act.data(), f);
        nbr_part[i] = simd::dot(a_s.data() + f, act.data(), f);
    }
    fwd.out = Matrix(n, f);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& nb = fwd.att.nbrs[i];
        auto& alpha = fwd.att.alpha[i];
        alpha.resize(nb.size());
        for (std::size_t k = 0; k < nb.size(); ++k) alpha[k] = self_part[i] + nbr_part[nb[k]];
        softmax_inplace(alpha);
        double* dst = fwd.out.row(i).data();
        for (std::size_t k = 0; k < nb.size(); ++k) simd::axpy(alpha[k], fwd.u.row(nb[k]).data(), dst, f);
    }
    return fwd;
}

Matrix semantic_forward(const Matrix& x, const KnowledgeGraph& g, const Matrix& w_s, std::span<const double> a_s,
                        double slope) {
    return semantic_forward_full(x, g, w_s, a_s, slope).out;
}

SemanticGrads semantic_backward(const SemanticForward& fwd, const Matrix& x, const Matrix& w_s,
                                std::span<const double> a_s, double slope, const Matrix& d_out) {
    const std::size_t n = fwd.u.rows();
    const std::size_t f = fwd.u.cols();
    expect_shape(d_out, n, f, "semantic_backward gradient");
    Matrix du(n, f);
    std::vector<double> self_coef(n, 0.0), nbr_coef(n, 0.0), dalpha;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& nb = fwd.att.nbrs[i];
        const auto& alpha = fwd.att.alpha[i];
        const double* gi = d_out.row(i).data();
        dalpha.assign(nb.size(), 0.0);
        double mean = 0.0;
        for (std::size_t k = 0; k < nb.size(); ++k) {
            dalpha[k] = simd::dot(gi, fwd.u.row(nb[k]).data(), f);
            simd::axpy(alpha[k], gi, du.row(nb[k]).data(), f);
            mean += alpha[k] * dalpha[k];
        }
        for (std::size_t k = 0; k < nb.size(); ++k) {
            const double ds = alpha[k] * (dalpha[k] - mean);
            self_coef[i] += ds;
            nbr_coef[nb[k]] += ds;
        }
    }
    SemanticGrads grads;
    grads.a_s.assign(2 * f, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t c = 0; c < f; ++c) {
            const double u = fwd.u(i, c);
            const double act = leaky_relu(u, slope);
            const double dact = u > 0.0 ? 1.0 : slope;
            grads.a_s[c] += self_coef[i] * act;
            grads.a_s[f + c] += nbr_coef[i] * act;
            du(i, c) += (self_coef[i] * a_s[c] + nbr_coef[i] * a_s[f + c]) * dact;
        }
    }
    grads.w_s = matmul_tn(du, x);
    grads.d_input = matmul(du, w_s);
    return grads;
}

// ---------------------------------------------------------------------------
// Filtering stack

FilterForward filter_forward_full(const Matrix& xd, const KnowledgeGraph& g, const Matrix& lhat,
                                  const LayerParams& params, double slope) {
    FilterForward fwd;
    fwd.topo = topo_forward_full(xd, g, params.w_tr);
    fwd.cheb = cheb_forward_full(xd, lhat, params.w_nr);
    fwd.concat = hconcat(fwd.topo.out, fwd.cheb.out);
    fwd.semantic = semantic_forward_full(fwd.concat, g, params.w_s, params.a_s, slope);
    return fwd;
}

Matrix filter_forward(const Matrix& xd, const KnowledgeGraph& g, const Matrix& lhat, const LayerParams& params,
                      double slope) {
    return filter_forward_full(xd, g, lhat, params, slope).out();
}

FilterGrads filter_backward(const FilterForward& fwd, const LayerParams& params, double slope, const Matrix& d_out) {
    SemanticGrads sg = semantic_backward(fwd.semantic, fwd.concat, params.w_s, params.a_s, slope, d_out);
    const std::size_t n = fwd.concat.rows();
    const std::size_t ft = fwd.topo.out.cols();
    const std::size_t fl = fwd.cheb.out.cols();
    Matrix d_topo(n, ft), d_cheb(n, fl);
    for (std::size_t i = 0; i < n; ++i) {
        const auto r = sg.d_input.row(i);
        std::copy(r.begin(), r.begin() + static_cast<std::ptrdiff_t>(ft), d_topo.row(i).begin());
        std::copy(r.begin() + static_cast<std::ptrdiff_t>(ft), r.end(), d_cheb.row(i).begin());
    }
    FilterGrads grads;
    grads.w_tr = topo_backward(fwd.topo, d_topo);
    grads.w_nr = cheb_backward(fwd.cheb, d_cheb);
    grads.w_s = std::move(sg.w_s);
    grads.a_s = std::move(sg.a_s);
    return grads;
}

// ---------------------------------------------------------------------------
// Self-supervision

std::vector<NodePair> edge_pairs(const KnowledgeGraph& g) {
    std::vector<NodePair> out;
    out.reserve(g.num_edges());
    for (const Edge& e : g.edges()) out.emplace_back(e.src, e.dst);
    return out;
}

double self_supervised_loss(const Matrix& z, std::span<const NodePair> pos, std::span<const NodePair> neg,
                            Matrix* grad) {
    constexpr double kEps = 1e-7;
    const std::size_t f = z.cols();
    if (grad) *grad = Matrix(z.rows(), f);
    double loss = 0.0;
    auto term = [&](std::span<const NodePair> pairs, bool positive) {
        if (pairs.empty()) return;
        const double inv = 1.0 / static_cast<double>(pairs.size());
        double sum = 0.0;
        for (const auto& [i, j] : pairs) {
            if (i >= z.rows() || j >= z.rows()) throw ShapeMismatch("loss pair references a missing node");
            const double p = simd::dot(z.row(i).data(), z.row(j).data(), f);
            const double s = sigmoid(p);
            const double phi = std::clamp(s, kEps, 1.0 - kEps);
            sum += positive ? std::log(phi) : std::log(1.0 - phi);
            if (grad && s > kEps && s < 1.0 - kEps) {
                const double dp = positive ? -(1.0 - s) * inv : s * inv;
                simd::axpy(dp, z.row(j).data(), grad->row(i).data(), f);
                simd::axpy(dp, z.row(i).data(), grad->row(j).data(), f);
            }
        }
        loss -= sum * inv;
    };
    term(pos, true);
    term(neg, false);
    return loss;
}

std::size_t count_non_edges(const KnowledgeGraph& g) {
    const std::size_t n = g.num_nodes();
    return n * (n - (n > 0 ? 1 : 0)) / 2 - g.num_edges();
}

std::vector<NodePair> negative_sample(const KnowledgeGraph& g, std::size_t count, std::uint64_t seed) {
    if (count == 0) return {};
    const std::size_t available = count_non_edges(g);
    if (count > available) throw NotEnoughNonEdges(count, available);
    Rng rng(seed);
    const std::size_t n = g.num_nodes();
    std::set<NodePair> taken;
    std::vector<NodePair> out;
    out.reserve(count);
    while (out.size() < count) {
        NodeId a = rng.index(n);
        NodeId b = rng.index(n);
        if (a == b) continue;
        if (a > b) std::swap(a, b);
        if (g.has_edge(a, b) || !taken.emplace(a, b).second) continue;
        out.emplace_back(a, b);
    }
    return out;
}

}  // namespace autokg::gnn
