#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "autokg/matrix.hpp"

namespace autokg {

using NodeId = std::size_t;

struct Entity {
    NodeId id = 0;
    std::string surface;
    std::string entity_type = "UNKNOWN";
    std::vector<std::string> tags;

    friend bool operator==(const Entity&, const Entity&) = default;
};

enum class Provenance { SentenceCooccur, TypeMatch, LlmSuggested, Synthetic };

std::string_view to_string(Provenance p) noexcept;
Provenance provenance_from_string(std::string_view s);  // throws SchemaViolation

// Undirected edge. Stored with src < dst.
struct Edge {
    NodeId src = 0;
    NodeId dst = 0;
    double weight = 1.0;
    Provenance provenance = Provenance::SentenceCooccur;
    // Cosine similarity of the endpoint features, filled in by pruning.
    std::optional<double> similarity;

    friend bool operator==(const Edge&, const Edge&) = default;
};

enum class Stage { Raw, Denoised, Final };

std::string_view to_string(Stage s) noexcept;
std::optional<Stage> stage_from_string(std::string_view s) noexcept;

// Nodes, undirected edges and per-stage feature matrices. Constructed once
// and then treated as a value: the `with_*` helpers return modified copies.
class KnowledgeGraph {
public:
    KnowledgeGraph() = default;
    // Validates ids (contiguous from 0), non-empty NFC surfaces, no self loops,
    // no duplicate unordered pairs, non-negative weights. Edges are
    // canonicalised to src < dst and sorted by (src, dst).
    KnowledgeGraph(std::vector<Entity> nodes, std::vector<Edge> edges);

    std::size_t num_nodes() const noexcept { return nodes_.size(); }
    std::size_t num_edges() const noexcept { return edges_.size(); }
    const std::vector<Entity>& nodes() const noexcept { return nodes_; }
    const std::vector<Edge>& edges() const noexcept { return edges_; }

    const std::map<Stage, Matrix>& features() const noexcept { return features_; }
    const Matrix* feature(Stage s) const;
    bool has_edge(NodeId a, NodeId b) const;
    std::size_t degree(NodeId v) const;
    // Node ids with an edge to v, ascending.
    std::vector<NodeId> neighbors(NodeId v) const;
    // (neighbor, weight) lists for every node, neighbors ascending.
    std::vector<std::vector<std::pair<NodeId, double>>> adjacency_lists() const;

    // Throws ShapeMismatch if m.rows() != N or m has non-finite entries.
    KnowledgeGraph with_features(Stage s, Matrix m) const;
    KnowledgeGraph with_edges(std::vector<Edge> edges) const;

    friend bool operator==(const KnowledgeGraph&, const KnowledgeGraph&) = default;

private:
    std::vector<Entity> nodes_;
    std::vector<Edge> edges_;
    std::map<Stage, Matrix> features_;
};

// Symmetric N x N weight matrix; 0 where no edge.
Matrix adjacency(const KnowledgeGraph& g);

// I - D^-1/2 A D^-1/2 with weighted degrees. Isolated nodes get a zero row
// and column (including the diagonal).
Matrix normalized_laplacian(const KnowledgeGraph& g);

// (2 / lambda_max) L - I. Throws NonPositiveLambda.
Matrix scaled_laplacian(const Matrix& laplacian, double lambda_max);

// Power iteration estimate of the top eigenvalue of a symmetric PSD matrix,
// clamped to [1e-6, 2].
double estimate_lambda_max(const Matrix& laplacian, int iters = 100, std::uint64_t seed = 0);

// Margin applied to the estimate before scaling the Laplacian.
inline constexpr double kLambdaSafetyFactor = 1.01;

}  // namespace autokg
