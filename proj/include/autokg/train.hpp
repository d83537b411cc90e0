#pragma once
// Self-supervised two-stage trainer and finite-difference gradient checks.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "autokg/gnn.hpp"

namespace autokg::gnn {

struct TrainConfig {
    std::size_t epochs = 200;
    double step_size = 0.01;
    std::size_t neg_samples_per_edge = 1;
    std::uint64_t seed = 0;
    double leaky_relu_slope = 0.2;

    void validate() const;  // throws ConfigError
};

struct StageTrace {
    // Training loss at each epoch, before that epoch's update.
    std::vector<double> loss;
    // Loss on a fixed held negative set before the first and after the last update.
    double initial_eval = 0.0;
    double final_eval = 0.0;
};

struct TrainResult {
    LayerParams params;
    StageTrace stage1;
    StageTrace stage2;
};

// Negatives per epoch: neg_samples_per_edge * M, capped at the number of
// non-edges in g.
std::size_t negatives_per_epoch(const KnowledgeGraph& g, const TrainConfig& cfg);

// Stage 1: gradient descent on W_fd and a_fd with the loss taken on X^d.
StageTrace train_denoiser(const KnowledgeGraph& g, const Matrix& x0, LayerParams& params, const TrainConfig& cfg);

// Stage 2: W_tr, W_nr, W_s and a_s with X^d held fixed, loss on H.
StageTrace train_filter(const KnowledgeGraph& g, const Matrix& xd, const Matrix& lhat, LayerParams& params,
                        const TrainConfig& cfg);

// Initialises from cfg.seed, runs stage 1, computes X^d, runs stage 2.
// Throws Error if g has no edges, NonFiniteLoss on divergence.
TrainResult train(const KnowledgeGraph& g, const Matrix& x0, const ModelDims& dims, const TrainConfig& cfg);

enum class Layer { Denoise, Topological, Local, Semantic, FilterStack };

struct GradCheckInputs {
    KnowledgeGraph graph;
    // Layer input: X^o for Denoise, X^d for Topological/Local/FilterStack,
    // the N x 2F concatenation for Semantic.
    Matrix features;
    Matrix lhat;  // Local and FilterStack only
    std::vector<NodePair> pos;
    std::vector<NodePair> neg;
    double slope = 0.2;
};

// Largest |g_a - g_n| / max(1, |g_a|, |g_n|) over every parameter entry of
// the layer, where g_n is a central difference with step epsilon.
double grad_check(Layer layer, const LayerParams& params, const GradCheckInputs& in, double epsilon = 1e-5);

}  // namespace autokg::gnn
