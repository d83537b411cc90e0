#include "autokg/graph.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "autokg/error.hpp"
#include "autokg/rng.hpp"
#include "autokg/simd.hpp"
#include "autokg/unicode.hpp"

namespace autokg {

std::string_view to_string(Provenance p) noexcept {
    switch (p) {
        case Provenance::SentenceCooccur: return "SentenceCooccur";
        case Provenance::TypeMatch: return "TypeMatch";
        case Provenance::LlmSuggested: return "LlmSuggested";
        case Provenance::Synthetic: return "Synthetic";
    }
    return "Synthetic";
}

Provenance provenance_from_string(std::string_view s) {
    if (s == "SentenceCooccur") return Provenance::SentenceCooccur;
    if (s == "TypeMatch") return Provenance::TypeMatch;
    if (s == "LlmSuggested") return Provenance::LlmSuggested;
    if (s == "Synthetic") return Provenance::Synthetic;
    throw SchemaViolation("provenance", "unknown provenance '" + std::string(s) + "'");
}

std::string_view to_string(Stage s) noexcept {
    switch (s) {
        case Stage::Raw: return "raw";
        case Stage::Denoised: return "denoised";
        case Stage::Final: return "final";
    }
    return "raw";
}

std::optional<Stage> stage_from_string(std::string_view s) noexcept {
    if (s == "raw") return Stage::Raw;
    if (s == "denoised") return Stage::Denoised;
    if (s == "final") return Stage::Final;
    return std::nullopt;
}

KnowledgeGraph::KnowledgeGraph(std::vector<Entity> nodes, std::vector<Edge> edges)
    : nodes_(std::move(nodes)), edges_(std::move(edges)) {
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const std::string at = "/nodes/" + std::to_string(i);
        if (nodes_[i].id != i)
            throw SchemaViolation(at + "/id", "ids must be contiguous from 0, got " + std::to_string(nodes_[i].id));
        if (nodes_[i].surface.empty()) throw SchemaViolation(at + "/surface", "surface is empty");
        nodes_[i].surface = unicode::nfc(nodes_[i].surface);
    }
    std::set<std::pair<NodeId, NodeId>> seen;
    for (std::size_t k = 0; k < edges_.size(); ++k) {
        Edge& e = edges_[k];
        const std::string at = "/edges/" + std::to_string(k);
        if (e.src == e.dst) throw SchemaViolation(at, "self-loop on node " + std::to_string(e.src));
        if (e.src >= nodes_.size() || e.dst >= nodes_.size())
            throw SchemaViolation(at, "endpoint out of range: " + std::to_string(e.src) + "-" + std::to_string(e.dst));
        if (!(e.weight >= 0.0) || !std::isfinite(e.weight))
            throw SchemaViolation(at + "/weight", "weight must be finite and >= 0");
        if (e.src > e.dst) std::swap(e.src, e.dst);
        if (!seen.emplace(e.src, e.dst).second)
            throw SchemaViolation(at, "duplicate edge " + std::to_string(e.src) + "-" + std::to_string(e.dst));
    }
    std::sort(edges_.begin(), edges_.end(),
              [](const Edge& a, const Edge& b) { return std::tie(a.src, a.dst) < std::tie(b.src, b.dst); });
}

const Matrix* KnowledgeGraph::feature(Stage s) const {
    auto it = features_.find(s);
    return it == features_.end() ? nullptr : &it->second;
}

bool KnowledgeGraph::has_edge(NodeId a, NodeId b) const {
    if (a > b) std::swap(a, b);
    auto it = std::lower_bound(edges_.begin(), edges_.end(), std::pair{a, b}, [](const Edge& e, const auto& key) {
        return std::pair{e.src, e.dst} < key;
    });
    return it != edges_.end() && it->src == a && it->dst == b;
}

std::size_t KnowledgeGraph::degree(NodeId v) const {
    return static_cast<std::size_t>(
        std::count_if(edges_.begin(), edges_.end(), [v](const Edge& e) { return e.src == v || e.dst == v; }));
}

std::vector<NodeId> KnowledgeGraph::neighbors(NodeId v) const {
    std::vector<NodeId> out;
    for (const Edge& e : edges_) {
        if (e.src == v) out.push_back(e.dst);
        else if (e.dst == v) out.push_back(e.src);
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::vector<std::pair<NodeId, double>>> KnowledgeGraph::adjacency_lists() const {
    std::vector<std::vector<std::pair<NodeId, double>>> out(nodes_.size());
    for (const Edge& e : edges_) {
        out[e.src].emplace_back(e.dst, e.weight);
        out[e.dst].emplace_back(e.src, e.weight);
    }
    for (auto& l : out) std::sort(l.begin(), l.end());
    return out;
}

KnowledgeGraph KnowledgeGraph::with_features(Stage s, Matrix m) const {
    if (m.rows() != nodes_.size())
        throw ShapeMismatch("feature matrix has " + std::to_string(m.rows()) + " rows, graph has " +
                            std::to_string(nodes_.size()) + " nodes");
    if (!m.all_finite()) throw ShapeMismatch("feature matrix contains non-finite entries");
    KnowledgeGraph copy = *this;
    copy.features_[s] = std::move(m);
    return copy;
}

KnowledgeGraph KnowledgeGraph::with_edges(std::vector<Edge> edges) const {
    KnowledgeGraph copy(nodes_, std::move(edges));
    copy.features_ = features_;
    return copy;
}

Matrix adjacency(const KnowledgeGraph& g) {
    Matrix a(g.num_nodes(), g.num_nodes());
    for (const Edge& e : g.edges()) {
        a(e.src, e.dst) = e.weight;
        a(e.dst, e.src) = e.weight;
    }
    return a;
}

Matrix normalized_laplacian(const KnowledgeGraph& g) {
    const std::size_t n = g.num_nodes();
    const Matrix a = adjacency(g);
    std::vector<double> inv_sqrt(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double d = 0.0;
        for (std::size_t j = 0; j < n; ++j) d += a(i, j);
        if (d > 0.0) inv_sqrt[i] = 1.0 / std::sqrt(d);
    }
    Matrix l(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        if (inv_sqrt[i] > 0.0) l(i, i) = 1.0;
        for (std::size_t j = 0; j < n; ++j)
            if (a(i, j) != 0.0) l(i, j) = -a(i, j) * inv_sqrt[i] * inv_sqrt[j];
    }
    return l;
}

Matrix scaled_laplacian(const Matrix& laplacian, double lambda_max) {
    if (!(lambda_max > 0.0)) throw NonPositiveLambda(lambda_max);
    if (laplacian.rows() != laplacian.cols()) throw ShapeMismatch("scaled_laplacian: matrix is not square");
    Matrix out = laplacian;
    simd::scal(2.0 / lambda_max, out.data().data(), out.data().size());
    for (std::size_t i = 0; i < out.rows(); ++i) out(i, i) -= 1.0;
    return out;
}

double estimate_lambda_max(const Matrix& laplacian, int iters, std::uint64_t seed) {
    constexpr double kFloor = 1e-6;
    constexpr double kCeil = 2.0;
    const std::size_t n = laplacian.rows();
    if (n == 0) return kFloor;
    Rng rng(seed);
    std::vector<double> v(n);
    for (double& x : v) x = rng.uniform(0.5, 1.5);
    auto normalize = [](std::vector<double>& x) {
        const double nrm = l2_norm(x);
        if (nrm > 0.0) simd::scal(1.0 / nrm, x.data(), x.size());
        return nrm;
    };
    normalize(v);
    std::vector<double> w(n);
    double estimate = 0.0;
    for (int it = 0; it < std::max(iters, 1); ++it) {
        for (std::size_t i = 0; i < n; ++i) w[i] = simd::dot(laplacian.row(i).data(), v.data(), n);
        estimate = simd::dot(v.data(), w.data(), n);  // Rayleigh quotient
        if (normalize(w) == 0.0) return kFloor;
        v.swap(w);
    }
    return std::clamp(estimate, kFloor, kCeil);
}

}  // namespace autokg
