#pragma once
// The four learnable graph layers, their hand-written backward passes, the
// link-prediction self-supervision loss and negative sampling.
//
// Row-vector convention throughout: node features are matrix rows.
//   denoise (FDN):   Y = X W_fd^T, out_i = sum_j alpha_ij y_j over j in {i} + N(i)
//                    e_ij = (a_fd . [y_i || y_j]) * sigmoid(y_i . y_j)
//                    alpha_i = softmax_j LeakyReLU(e_ij)
//   topological:     out = D^-1/2 (A + I) D^-1/2 X W_tr,  d_i = 1 + sum_j A_ij
//   local (Cheb):    Z1 = X, Z2 = Lhat X, Zk = 2 Lhat Z(k-1) - Z(k-2); out = sum_k Zk W_k
//   semantic:        U = X W_s^T, s_ij = a_s . LeakyReLU([u_i || u_j])
//                    alpha_i = softmax_j s_ij, out_i = sum_j alpha_ij u_j

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include "autokg/graph.hpp"
#include "autokg/matrix.hpp"

namespace autokg::gnn {

using NodePair = std::pair<NodeId, NodeId>;

struct ModelDims {
    std::size_t input_dim = 728;  // embedding length
    std::size_t hidden = 128;     // F
    std::size_t cheb_order = 3;   // K
};

struct LayerParams {
    Matrix w_fd;                // F x D
    std::vector<double> a_fd;   // 2F
    Matrix w_tr;                // F x F
    std::vector<Matrix> w_nr;   // K of F x F
    Matrix w_s;                 // F x 2F
    std::vector<double> a_s;    // 2F

    ModelDims dims() const;
    bool all_finite() const;
    friend bool operator==(const LayerParams&, const LayerParams&) = default;
};

// Every entry uniform in (-scale, scale), drawn in declaration order.
LayerParams init_params(const ModelDims& dims, std::uint64_t seed, double scale = 0.1);

double leaky_relu(double x, double slope) noexcept;
double sigmoid(double x) noexcept;

// Per-node attention neighbourhood: self first, then neighbours ascending,
// with the softmax weights over it.
struct Attention {
    std::vector<std::vector<NodeId>> nbrs;
    std::vector<std::vector<double>> alpha;
};

Attention self_and_neighbors(const KnowledgeGraph& g);

// ---- feature denoising ----
struct FdnForward {
    Matrix y;    // X W_fd^T
    Matrix out;  // X^d
    Attention att;
    std::vector<std::vector<double>> concat_score;  // a_fd . [y_i || y_j]
    std::vector<std::vector<double>> gate;          // sigmoid(y_i . y_j)
    std::vector<std::vector<double>> score;         // e_ij
};

struct FdnGrads {
    Matrix w_fd;
    std::vector<double> a_fd;
};

FdnForward fdn_forward_full(const Matrix& x0, const KnowledgeGraph& g, const Matrix& w_fd, std::span<const double> a_fd,
                            double slope);
Matrix fdn_forward(const Matrix& x0, const KnowledgeGraph& g, const LayerParams& params, double slope = 0.2);
FdnGrads fdn_backward(const FdnForward& fwd, const Matrix& x0, std::span<const double> a_fd, double slope,
                      const Matrix& d_out);

// ---- topological relations ----
// D^-1/2 (A + I) D^-1/2 with weighted degrees.
Matrix normalized_adjacency_with_self(const KnowledgeGraph& g);

struct TopoForward {
    Matrix agg;  // normalised aggregation of X before W_tr
    Matrix out;
};

TopoForward topo_forward_full(const Matrix& xd, const KnowledgeGraph& g, const Matrix& w_tr);
Matrix topo_forward(const Matrix& xd, const KnowledgeGraph& g, const Matrix& w_tr);
// dL/dW_tr given dL/dout.
Matrix topo_backward(const TopoForward& fwd, const Matrix& d_out);

// ---- local relations (Chebyshev) ----
struct ChebForward {
    std::vector<Matrix> z;  // Z1..ZK
    Matrix out;
};

ChebForward cheb_forward_full(const Matrix& xd, const Matrix& lhat, const std::vector<Matrix>& w_nr);
Matrix cheb_forward(const Matrix& xd, const Matrix& lhat, const std::vector<Matrix>& w_nr, std::size_t k);
std::vector<Matrix> cheb_backward(const ChebForward& fwd, const Matrix& d_out);

// Lhat = (2 / (lambda_est * 1.01)) L - I for the normalised Laplacian of g.
Matrix graph_scaled_laplacian(const KnowledgeGraph& g, std::uint64_t seed = 0);

// ---- semantic attention convolution ----
struct SemanticForward {
    Matrix u;  // X W_s^T
    Matrix out;
    Attention att;
};

struct SemanticGrads {
    Matrix w_s;
    std::vector<double> a_s;
    Matrix d_input;  // dL/dX
};

SemanticForward semantic_forward_full(const Matrix& x, const KnowledgeGraph& g, const Matrix& w_s,
                                      std::span<const double> a_s, double slope);
Matrix semantic_forward(const Matrix& x, const KnowledgeGraph& g, const Matrix& w_s, std::span<const double> a_s,
                        double slope = 0.2);
SemanticGrads semantic_backward(const SemanticForward& fwd, const Matrix& x, const Matrix& w_s,
                                std::span<const double> a_s, double slope, const Matrix& d_out);

// ---- semantic filtering stack: [topo || cheb] -> semantic ----
struct FilterForward {
    TopoForward topo;
    ChebForward cheb;
    Matrix concat;
    SemanticForward semantic;
    const Matrix& out() const noexcept { return semantic.out; }
};

struct FilterGrads {
    Matrix w_tr;
    std::vector<Matrix> w_nr;
    Matrix w_s;
    std::vector<double> a_s;
};

FilterForward filter_forward_full(const Matrix& xd, const KnowledgeGraph& g, const Matrix& lhat,
                                  const LayerParams& params, double slope);
Matrix filter_forward(const Matrix& xd, const KnowledgeGraph& g, const Matrix& lhat, const LayerParams& params,
                      double slope = 0.2);
FilterGrads filter_backward(const FilterForward& fwd, const LayerParams& params, double slope, const Matrix& d_out);

// ---- self-supervision ----
std::vector<NodePair> edge_pairs(const KnowledgeGraph& g);

// -mean log sigmoid(z_i.z_j) over positives - mean log(1 - sigmoid(z_i.z_j))
// over negatives, with the sigmoid clamped to [1e-7, 1 - 1e-7]. An empty set
// contributes 0. If grad is non-null it receives dLoss/dZ.
double self_supervised_loss(const Matrix& z, std::span<const NodePair> pos, std::span<const NodePair> neg,
                            Matrix* grad = nullptr);

std::size_t count_non_edges(const KnowledgeGraph& g);

// Uniform rejection sampling of distinct non-adjacent unordered pairs
// (first < second). Throws NotEnoughNonEdges.
std::vector<NodePair> negative_sample(const KnowledgeGraph& g, std::size_t count, std::uint64_t seed);

// ---- checkpoints ----
void save_checkpoint(const LayerParams& params, std::uint64_t seed, double slope, const std::filesystem::path& path);
struct Checkpoint {
    LayerParams params;
    std::uint64_t seed = 0;
    double leaky_relu_slope = 0.2;
};
Checkpoint load_checkpoint(const std::filesystem::path& path);  // throws IoError, SchemaViolation

}  // namespace autokg::gnn
