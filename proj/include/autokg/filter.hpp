#pragma once
// Similarity-based edge pruning, the A-SFAS metric and the planted-noise
// synthetic benchmark graphs.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "autokg/graph.hpp"

namespace autokg {

enum class PruneMode { RetainFraction, AbsoluteThreshold };

struct PruneConfig {
    PruneMode mode = PruneMode::RetainFraction;
    double retain_fraction = 0.9;  // RetainFraction mode, in (0, 1]
    double gamma = 0.0;            // AbsoluteThreshold mode, in [-1, 1]

    void validate() const;  // throws ConfigError
};

struct EdgeSimilarity {
    Edge edge;
    double similarity = 0.0;
};

// Cosine of the endpoint rows of h for every stored edge, in edge order.
std::vector<EdgeSimilarity> edge_similarities(const KnowledgeGraph& g, const Matrix& h);

struct PruneResult {
    KnowledgeGraph graph;       // kept edges annotated with similarity, h under Stage::Final
    std::vector<Edge> removed;  // annotated with similarity, in edge order
};

// Number of edges RetainFraction keeps out of m: ceil(fraction * m).
std::size_t retained_edge_count(std::size_t m, double fraction);

PruneResult prune(const KnowledgeGraph& g, const Matrix& h, const PruneConfig& cfg);

// Mean edge cosine similarity. Throws EmptyEdgeSet.
double asfas(const KnowledgeGraph& g, const Matrix& h);

struct SyntheticSpec {
    std::size_t clusters = 5;
    std::size_t nodes_per_cluster = 10;
    double intra_edge_prob = 0.5;
    std::size_t noise_edges = 0;
    // When set, overrides noise_edges so that noise makes up this fraction of
    // all edges: round(intra * f / (1 - f)).
    std::optional<double> noise_fraction;
    double feature_noise_sigma = 0.05;
    std::size_t dim = 728;
    std::uint64_t seed = 0;

    void validate() const;  // throws ConfigError
};

struct SyntheticGraph {
    KnowledgeGraph graph;          // features under Stage::Raw
    std::vector<bool> is_noise;    // parallel to graph.edges()
    std::vector<std::size_t> cluster_of;
};

// Throws NotEnoughNonEdges when the noise edges exceed cross-cluster capacity.
SyntheticGraph generate_synthetic(const SyntheticSpec& spec);

struct NoiseReport {
    double precision = 0.0;  // 0 when nothing was removed
    double recall = 0.0;     // 0 when there is no noise
};

NoiseReport noise_removal_report(const std::vector<Edge>& removed, const SyntheticGraph& truth);

}  // namespace autokg
