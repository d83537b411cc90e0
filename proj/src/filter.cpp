#include "autokg/filter.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "autokg/error.hpp"
#include "autokg/rng.hpp"
#include "autokg/simd.hpp"

namespace autokg {

void PruneConfig::validate() const {
    if (mode == PruneMode::RetainFraction && !(retain_fraction > 0.0 && retain_fraction <= 1.0))
        throw ConfigError("retain_fraction must lie in (0, 1]");
    if (mode == PruneMode::AbsoluteThreshold && !(gamma >= -1.0 && gamma <= 1.0))
        throw ConfigError("gamma must lie in [-1, 1]");
}

std::vector<EdgeSimilarity> edge_similarities(const KnowledgeGraph& g, const Matrix& h) {
    if (h.rows() != g.num_nodes())
        throw ShapeMismatch("feature matrix has " + std::to_string(h.rows()) + " rows, graph has " +
                            std::to_string(g.num_nodes()) + " nodes");
    std::vector<EdgeSimilarity> out;
    out.reserve(g.num_edges());
    for (const Edge& e : g.edges()) out.push_back({e, cosine(h.row(e.src), h.row(e.dst))});
    return out;
}

std::size_t retained_edge_count(std::size_t m, double fraction) {
    // Guard against 0.9 * 10 landing a hair above 9 in binary.
    const double exact = fraction * static_cast<double>(m);
    const auto k = static_cast<std::size_t>(std::ceil(exact - 1e-9 * std::max(1.0, exact)));
    return std::min(m, std::max<std::size_t>(k, m > 0 ? 1 : 0));
}

PruneResult prune(const KnowledgeGraph& g, const Matrix& h, const PruneConfig& cfg) {
    cfg.validate();
    const std::vector<EdgeSimilarity> sims = edge_similarities(g, h);
    std::vector<bool> keep(sims.size(), false);
    if (cfg.mode == PruneMode::RetainFraction) {
        std::vector<std::size_t> order(sims.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return sims[a].similarity > sims[b].similarity; });
        const std::size_t k = retained_edge_count(sims.size(), cfg.retain_fraction);
        for (std::size_t r = 0; r < k; ++r) keep[order[r]] = true;
    } else {
        for (std::size_t i = 0; i < sims.size(); ++i) keep[i] = sims[i].similarity >= cfg.gamma;
    }

    std::vector<Edge> kept;
    PruneResult result;
    for (std::size_t i = 0; i < sims.size(); ++i) {
        Edge e = sims[i].edge;
        e.similarity = sims[i].similarity;
        (keep[i] ? kept : result.removed).push_back(e);
    }
    result.graph = g.with_edges(std::move(kept)).with_features(Stage::Final, h);
    return result;
}

double asfas(const KnowledgeGraph& g, const Matrix& h) {
    if (g.num_edges() == 0) throw EmptyEdgeSet();
    double sum = 0.0;
    for (const EdgeSimilarity& s : edge_similarities(g, h)) sum += s.similarity;
    return sum / static_cast<double>(g.num_edges());
}

void SyntheticSpec::validate() const {
    if (clusters < 1 || nodes_per_cluster < 1) throw ConfigError("synthetic graph needs clusters and nodes");
    if (!(intra_edge_prob >= 0.0 && intra_edge_prob <= 1.0)) throw ConfigError("intra_edge_prob must lie in [0, 1]");
    if (noise_fraction && !(*noise_fraction >= 0.0 && *noise_fraction < 1.0))
        throw ConfigError("noise_fraction must lie in [0, 1)");
    if (!(feature_noise_sigma >= 0.0)) throw ConfigError("feature_noise_sigma must be >= 0");
    if (dim < 1) throw ConfigError("synthetic feature dim must be >= 1");
}

SyntheticGraph generate_synthetic(const SyntheticSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);
    const std::size_t n = spec.clusters * spec.nodes_per_cluster;

    std::vector<std::vector<double>> directions(spec.clusters, std::vector<double>(spec.dim));
    for (auto& d : directions) {
        for (double& x : d) x = rng.normal();
        const double nrm = l2_norm(d);
        simd::scal(1.0 / nrm, d.data(), d.size());
    }

    SyntheticGraph out;
    Matrix x(n, spec.dim);
    std::vector<Entity> nodes;
    for (std::size_t c = 0; c < spec.clusters; ++c) {
        for (std::size_t k = 0; k < spec.nodes_per_cluster; ++k) {
            const NodeId id = c * spec.nodes_per_cluster + k;
            nodes.push_back({id, "c" + std::to_string(c) + "_n" + std::to_string(k), "UNKNOWN", {}});
            out.cluster_of.push_back(c);
            auto row = x.row(id);
            for (std::size_t d = 0; d < spec.dim; ++d) row[d] = directions[c][d] + spec.feature_noise_sigma * rng.normal();
            const double nrm = l2_norm(row);
            if (nrm > 0.0) simd::scal(1.0 / nrm, row.data(), row.size());
        }
    }

    std::vector<Edge> edges;
    std::set<std::pair<NodeId, NodeId>> noise;
    for (std::size_t c = 0; c < spec.clusters; ++c)
        for (std::size_t a = 0; a < spec.nodes_per_cluster; ++a)
            for (std::size_t b = a + 1; b < spec.nodes_per_cluster; ++b)
                if (rng.uniform() < spec.intra_edge_prob)
                    edges.push_back({c * spec.nodes_per_cluster + a, c * spec.nodes_per_cluster + b, 1.0,
                                     Provenance::Synthetic, std::nullopt});

    std::size_t noise_count = spec.noise_edges;
    if (spec.noise_fraction) {
        const double f = *spec.noise_fraction;
        noise_count = static_cast<std::size_t>(std::llround(static_cast<double>(edges.size()) * f / (1.0 - f)));
    }
    const std::size_t cross_capacity = n * (n - 1) / 2 - spec.clusters * spec.nodes_per_cluster *
                                                            (spec.nodes_per_cluster - 1) / 2;
    if (noise_count > cross_capacity) throw NotEnoughNonEdges(noise_count, cross_capacity);
    while (noise.size() < noise_count) {
        NodeId a = rng.index(n);
        NodeId b = rng.index(n);
        if (out.cluster_of[a] == out.cluster_of[b]) continue;
        if (a > b) std::swap(a, b);
        if (noise.emplace(a, b).second) edges.push_back({a, b, 1.0, Provenance::Synthetic, std::nullopt});
    }

    out.graph = KnowledgeGraph(std::move(nodes), std::move(edges)).with_features(Stage::Raw, std::move(x));
    for (const Edge& e : out.graph.edges()) out.is_noise.push_back(noise.count({e.src, e.dst}) > 0);
    return out;
}

NoiseReport noise_removal_report(const std::vector<Edge>& removed, const SyntheticGraph& truth) {
    std::set<std::pair<NodeId, NodeId>> noise;
    const auto& edges = truth.graph.edges();
    for (std::size_t i = 0; i < edges.size(); ++i)
        if (truth.is_noise[i]) noise.emplace(edges[i].src, edges[i].dst);
    std::size_t hits = 0;
    for (const Edge& e : removed) hits += noise.count({std::min(e.src, e.dst), std::max(e.src, e.dst)});
    NoiseReport r;
    if (!removed.empty()) r.precision = static_cast<double>(hits) / static_cast<double>(removed.size());
    if (!noise.empty()) r.recall = static_cast<double>(hits) / static_cast<double>(noise.size());
    return r;
}

}  // namespace autokg
