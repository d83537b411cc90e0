#include "autokg/train.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include <spdlog/spdlog.h>

#include "autokg/error.hpp"
#include "autokg/rng.hpp"
#include "autokg/simd.hpp"

namespace autokg::gnn {
namespace {

constexpr std::uint64_t kEvalStream = 0x5eedULL;

void step(std::vector<double>& param, const std::vector<double>& grad, double lr) {
    simd::axpy(-lr, grad.data(), param.data(), param.size());
}

void step(Matrix& param, const Matrix& grad, double lr) { step(param.data(), grad.data(), lr); }

void check_finite(double loss, int stage, std::size_t epoch) {
    if (!std::isfinite(loss)) throw NonFiniteLoss(stage, epoch, loss);
}

template <typename LossFn, typename StepFn>
StageTrace run_stage(const KnowledgeGraph& g, const TrainConfig& cfg, int stage, LossFn loss_at, StepFn descend) {
    cfg.validate();
    const std::vector<NodePair> pos = edge_pairs(g);
    const std::size_t n_neg = negatives_per_epoch(g, cfg);
    const std::uint64_t stage_seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(stage));
    const std::vector<NodePair> eval_neg = negative_sample(g, n_neg, derive_seed(stage_seed, kEvalStream));

    StageTrace trace;
    trace.initial_eval = loss_at(pos, eval_neg);
    check_finite(trace.initial_eval, stage, 0);
    trace.loss.reserve(cfg.epochs);
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        const std::vector<NodePair> neg = negative_sample(g, n_neg, derive_seed(stage_seed, epoch));
        const double loss = descend(pos, neg);
        check_finite(loss, stage, epoch);
        trace.loss.push_back(loss);
    }
    trace.final_eval = loss_at(pos, eval_neg);
    check_finite(trace.final_eval, stage, cfg.epochs);
    spdlog::debug("stage {}: eval loss {:.6f} -> {:.6f} over {} epochs", stage, trace.initial_eval, trace.final_eval,
                  cfg.epochs);
    return trace;
}

// Flattened view over the parameters of one layer, paired with the matching
// analytic gradient entries.
struct ParamView {
    std::vector<double*> entries;
    void add(std::vector<double>& v) {
        for (double& x : v) entries.push_back(&x);
    }
    void add(Matrix& m) { add(m.data()); }
};

void append(std::vector<double>& into, const std::vector<double>& v) { into.insert(into.end(), v.begin(), v.end()); }

}  // namespace

void TrainConfig::validate() const {
    if (!(step_size > 0.0)) throw ConfigError("step_size must be > 0");
    if (!std::isfinite(leaky_relu_slope)) throw ConfigError("leaky_relu_slope must be finite");
}

std::size_t negatives_per_epoch(const KnowledgeGraph& g, const TrainConfig& cfg) {
    return std::min(cfg.neg_samples_per_edge * g.num_edges(), count_non_edges(g));
}

StageTrace train_denoiser(const KnowledgeGraph& g, const Matrix& x0, LayerParams& params, const TrainConfig& cfg) {
    const double slope = cfg.leaky_relu_slope;
    auto loss_at = [&](const std::vector<NodePair>& pos, const std::vector<NodePair>& neg) {
        return self_supervised_loss(fdn_forward(x0, g, params, slope), pos, neg);
    };
    auto descend = [&](const std::vector<NodePair>& pos, const std::vector<NodePair>& neg) {
        const FdnForward fwd = fdn_forward_full(x0, g, params.w_fd, params.a_fd, slope);
        Matrix d_out;
        const double loss = self_supervised_loss(fwd.out, pos, neg, &d_out);
        if (!std::isfinite(loss)) return loss;
        const FdnGrads grads = fdn_backward(fwd, x0, params.a_fd, slope, d_out);
        step(params.w_fd, grads.w_fd, cfg.step_size);
        step(params.a_fd, grads.a_fd, cfg.step_size);
        return loss;
    };
    return run_stage(g, cfg, 1, loss_at, descend);
}

StageTrace train_filter(const KnowledgeGraph& g, const Matrix& xd, const Matrix& lhat, LayerParams& params,
                        const TrainConfig& cfg) {
    const double slope = cfg.leaky_relu_slope;
    auto loss_at = [&](const std::vector<NodePair>& pos, const std::vector<NodePair>& neg) {
        return self_supervised_loss(filter_forward(xd, g, lhat, params, slope), pos, neg);
    };
    auto descend = [&](const std::vector<NodePair>& pos, const std::vector<NodePair>& neg) {
        const FilterForward fwd = filter_forward_full(xd, g, lhat, params, slope);
        Matrix d_out;
        const double loss = self_supervised_loss(fwd.out(), pos, neg, &d_out);
        if (!std::isfinite(loss)) return loss;
        const FilterGrads grads = filter_backward(fwd, params, slope, d_out);
        step(params.w_tr, grads.w_tr, cfg.step_size);
        for (std::size_t k = 0; k < params.w_nr.size(); ++k) step(params.w_nr[k], grads.w_nr[k], cfg.step_size);
        step(params.w_s, grads.w_s, cfg.step_size);
        step(params.a_s, grads.a_s, cfg.step_size);
        return loss;
    };
    return run_stage(g, cfg, 2, loss_at, descend);
}

TrainResult train(const KnowledgeGraph& g, const Matrix& x0, const ModelDims& dims, const TrainConfig& cfg) {
    if (g.num_edges() == 0) throw Error("training needs at least one edge");
    if (x0.cols() != dims.input_dim) throw ShapeMismatch("input features do not match the model input dimension");
    TrainResult result;
    result.params = init_params(dims, cfg.seed);
    result.stage1 = train_denoiser(g, x0, result.params, cfg);
    const Matrix xd = fdn_forward(x0, g, result.params, cfg.leaky_relu_slope);
    const Matrix lhat = graph_scaled_laplacian(g, cfg.seed);
    result.stage2 = train_filter(g, xd, lhat, result.params, cfg);
    return result;
}

double grad_check(Layer layer, const LayerParams& params, const GradCheckInputs& in, double epsilon) {
    if (!(epsilon >= 1e-7 && epsilon <= 1e-3)) throw ConfigError("grad_check epsilon must lie in [1e-7, 1e-3]");
    LayerParams p = params;
    const KnowledgeGraph& g = in.graph;
    const double slope = in.slope;

    std::function<double()> loss;
    std::vector<double> analytic;
    ParamView view;
    Matrix d_out;

    switch (layer) {
        case Layer::Denoise: {
            loss = [&] { return self_supervised_loss(fdn_forward(in.features, g, p, slope), in.pos, in.neg); };
            const FdnForward fwd = fdn_forward_full(in.features, g, p.w_fd, p.a_fd, slope);
            self_supervised_loss(fwd.out, in.pos, in.neg, &d_out);
            const FdnGrads grads = fdn_backward(fwd, in.features, p.a_fd, slope, d_out);
            append(analytic, grads.w_fd.data());
            append(analytic, grads.a_fd);
            view.add(p.w_fd);
            view.add(p.a_fd);
            break;
        }
        case Layer::Topological: {
            loss = [&] { return self_supervised_loss(topo_forward(in.features, g, p.w_tr), in.pos, in.neg); };
            const TopoForward fwd = topo_forward_full(in.features, g, p.w_tr);
            self_supervised_loss(fwd.out, in.pos, in.neg, &d_out);
            append(analytic, topo_backward(fwd, d_out).data());
            view.add(p.w_tr);
            break;
        }
        case Layer::Local: {
            loss = [&] { return self_supervised_loss(cheb_forward_full(in.features, in.lhat, p.w_nr).out, in.pos, in.neg); };
            const ChebForward fwd = cheb_forward_full(in.features, in.lhat, p.w_nr);
            self_supervised_loss(fwd.out, in.pos, in.neg, &d_out);
            for (const Matrix& gk : cheb_backward(fwd, d_out)) append(analytic, gk.data());
            for (Matrix& w : p.w_nr) view.add(w);
            break;
        }
        case Layer::Semantic: {
            loss = [&] {
                return self_supervised_loss(semantic_forward(in.features, g, p.w_s, p.a_s, slope), in.pos, in.neg);
            };
            const SemanticForward fwd = semantic_forward_full(in.features, g, p.w_s, p.a_s, slope);
            self_supervised_loss(fwd.out, in.pos, in.neg, &d_out);
            const SemanticGrads grads = semantic_backward(fwd, in.features, p.w_s, p.a_s, slope, d_out);
            append(analytic, grads.w_s.data());
            append(analytic, grads.a_s);
            view.add(p.w_s);
            view.add(p.a_s);
            break;
        }
        case Layer::FilterStack: {
            loss = [&] {
                return self_supervised_loss(filter_forward(in.features, g, in.lhat, p, slope), in.pos, in.neg);
            };
            const FilterForward fwd = filter_forward_full(in.features, g, in.lhat, p, slope);
            self_supervised_loss(fwd.out(), in.pos, in.neg, &d_out);
            const FilterGrads grads = filter_backward(fwd, p, slope, d_out);
            append(analytic, grads.w_tr.data());
            for (const Matrix& gk : grads.w_nr) append(analytic, gk.data());
            append(analytic, grads.w_s.data());
            append(analytic, grads.a_s);
            view.add(p.w_tr);
            for (Matrix& w : p.w_nr) view.add(w);
            view.add(p.w_s);
            view.add(p.a_s);
            break;
        }
    }

    double worst = 0.0;
    for (std::size_t k = 0; k < view.entries.size(); ++k) {
        double* x = view.entries[k];
        const double saved = *x;
        *x = saved + epsilon;
        const double up = loss();
        *x = saved - epsilon;
        const double down = loss();
        *x = saved;
        const double numeric = (up - down) / (2.0 * epsilon);
        const double a = analytic[k];
        const double rel = std::abs(a - numeric) / std::max({1.0, std::abs(a), std::abs(numeric)});
        worst = std::max(worst, rel);
    }
    return worst;
}

}  // namespace autokg::gnn
