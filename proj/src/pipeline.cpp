#include "autokg/pipeline.hpp"

#include <chrono>
#include <cstdlib>
#include <sstream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "autokg/error.hpp"
#include "autokg/graph_io.hpp"
#include "autokg/rng.hpp"
#include "autokg/simd.hpp"

namespace autokg {
namespace {

constexpr std::uint64_t kTrainStream = 1;

class Timer {
public:
    Timer(std::vector<StageTiming>& out, std::string stage) : out_(out), stage_(std::move(stage)) {}
    ~Timer() {
        const auto dt = std::chrono::steady_clock::now() - start_;
        out_.push_back({stage_, std::chrono::duration<double, std::milli>(dt).count()});
    }

private:
    std::vector<StageTiming>& out_;
    std::string stage_;
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

template <typename Fn>
auto tagged(const char* stage, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(stage, e.what());
    }
}

std::optional<double> try_asfas(const KnowledgeGraph& g, const Matrix& h) {
    if (g.num_edges() == 0) return std::nullopt;
    return asfas(g, h);
}

std::string escape_dot(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        if (c == '\n') {
            out += "\\n";
            continue;
        }
        out.push_back(c);
    }
    return out;
}

}  // namespace

nlohmann::json PipelineReport::to_json() const {
    nlohmann::json j;
    j["counts"] = {{"nodes", nodes}, {"edges", edges}, {"final_edges", final_edges}};
    j["asfas_before"] = asfas_before ? nlohmann::json(*asfas_before) : nlohmann::json(nullptr);
    j["asfas_unpruned"] = asfas_unpruned ? nlohmann::json(*asfas_unpruned) : nlohmann::json(nullptr);
    j["asfas_after"] = asfas_after ? nlohmann::json(*asfas_after) : nlohmann::json(nullptr);
    nlohmann::json t = nlohmann::json::array();
    for (const StageTiming& s : timings) t.push_back({{"stage", s.stage}, {"millis", s.millis}});
    j["timings"] = t;
    j["loss"] = {{"stage1", stage1_loss}, {"stage2", stage2_loss}};
    j["extractor"] = extractor_used;
    j["simd"] = simd_isa;
    j["config"] = config;
    return j;
}

ExtractionResult run_extraction(std::string_view text, const PipelineConfig& cfg, std::string* used) {
    auto set_used = [used](const char* name) {
        if (used) *used = name;
    };
    const std::size_t num_sentences = segment_sentences(text).size();
    switch (cfg.extractor) {
        case ExtractorMode::Rule:
            set_used("rule");
            return refine_entities(extract_rule_based(text, cfg.extract), cfg.extract);
        case ExtractorMode::Fixture: {
            set_used("fixture");
            ExtractionResult r = extract_from_fixture(cfg.fixture_path);
            check_sentence_indices(r, num_sentences);
            return refine_entities(r, cfg.extract);
        }
        case ExtractorMode::Llm: {
            try {
                if (cfg.llm.endpoint.empty()) throw ConfigError("no LLM endpoint configured");
                ExtractionResult r = extract_via_llm(text, cfg.llm);
                check_sentence_indices(r, num_sentences);
                set_used("llm");
                return refine_entities(r, cfg.extract);
            } catch (const Error& e) {
                if (!cfg.llm_fallback) throw;
                spdlog::warn("LLM extraction failed ({}); falling back to the rule-based extractor", e.what());
                set_used("rule (llm fallback)");
                return refine_entities(extract_rule_based(text, cfg.extract), cfg.extract);
            }
        }
    }
    throw ConfigError("unknown extractor mode");
}

PipelineResult run_graph_stages(const KnowledgeGraph& base, const PipelineConfig& cfg) {
    cfg.validate();
    const Matrix* raw = base.feature(Stage::Raw);
    if (!raw) throw StageError("features", "base graph carries no raw features");
    const Matrix& x0 = *raw;
    const gnn::ModelDims dims = cfg.dims();
    if (x0.cols() != dims.input_dim)
        throw StageError("features", fmt::format("feature width {} does not match embedding dim {}", x0.cols(),
                                                 dims.input_dim));

    PipelineResult result;
    PipelineReport& rep = result.report;
    rep.nodes = base.num_nodes();
    rep.edges = base.num_edges();
    rep.simd_isa = std::string(simd::isa_name(simd::active().isa));
    rep.config = config_to_json(cfg);
    rep.asfas_before = try_asfas(base, x0);

    gnn::TrainConfig tcfg = cfg.train;
    tcfg.seed = derive_seed(cfg.global_seed, kTrainStream);
    const double slope = tcfg.leaky_relu_slope;
    const bool trainable = base.num_edges() > 0;
    if (!trainable) spdlog::warn("graph has no edges; training is skipped");

    result.params = tagged("init", [&] { return gnn::init_params(dims, tcfg.seed); });
    gnn::LayerParams& params = result.params;

    Matrix xd;
    {
        Timer t(rep.timings, "denoise");
        xd = tagged("denoise", [&] {
            if (!cfg.ablation.enable_fdn) {
                // Fixed seeded projection to F dims, no attention and no training.
                return matmul_nt(x0, params.w_fd);
            }
            if (trainable) rep.stage1_loss = gnn::train_denoiser(base, x0, params, tcfg).loss;
            return gnn::fdn_forward(x0, base, params, slope);
        });
    }

    if (!cfg.ablation.enable_sf) {
        result.final = tagged("export", [&] {
            return KnowledgeGraph(base.nodes(), base.edges())
                .with_features(Stage::Denoised, xd)
                .with_features(Stage::Final, xd);
        });
        rep.final_edges = result.final.num_edges();
        rep.asfas_unpruned = try_asfas(base, xd);
        rep.asfas_after = try_asfas(result.final, xd);
        return result;
    }

    Matrix h;
    {
        Timer t(rep.timings, "filter");
        h = tagged("filter", [&] {
            const Matrix lhat = gnn::graph_scaled_laplacian(base, tcfg.seed);
            if (trainable) rep.stage2_loss = gnn::train_filter(base, xd, lhat, params, tcfg).loss;
            return gnn::filter_forward(xd, base, lhat, params, slope);
        });
    }
    {
        Timer t(rep.timings, "prune");
        PruneResult pr = tagged("prune", [&] { return prune(base, h, cfg.prune); });
        result.final = tagged("prune", [&] {
            return KnowledgeGraph(pr.graph.nodes(), pr.graph.edges())
                .with_features(Stage::Denoised, xd)
                .with_features(Stage::Final, h);
        });
        result.removed = std::move(pr.removed);
    }
    rep.final_edges = result.final.num_edges();
    rep.asfas_unpruned = try_asfas(base, h);
    rep.asfas_after = try_asfas(result.final, h);
    return result;
}

PipelineResult run_pipeline(std::string_view text, const PipelineConfig& cfg, const Dictionary& dict) {
    tagged("config", [&] { cfg.validate(); });
    std::vector<StageTiming> timings;
    std::string used;
    ExtractionResult ex;
    {
        Timer t(timings, "extract");
        ex = tagged("extract", [&] { return run_extraction(text, cfg, &used); });
    }
    KnowledgeGraph base;
    {
        Timer t(timings, "edges");
        base = tagged("edges", [&] {
            return KnowledgeGraph(entities_to_nodes(ex.entities), build_base_edges(ex.entities, ex.relations, cfg.rules));
        });
    }
    {
        Timer t(timings, "features");
        base = tagged("features", [&] {
            const auto provider = make_provider(cfg.embedding);
            Matrix x0 = build_feature_matrix(base, dict, *provider);
            return base.with_features(Stage::Raw, std::move(x0));
        });
    }
    spdlog::info("base graph: {} nodes, {} edges ({} extractor)", base.num_nodes(), base.num_edges(), used);
    PipelineResult result = run_graph_stages(base, cfg);
    timings.insert(timings.end(), result.report.timings.begin(), result.report.timings.end());
    result.report.timings = std::move(timings);
    result.report.extractor_used = used;
    result.base = std::move(base);
    spdlog::info("final graph: {} of {} edges kept", result.report.final_edges, result.report.edges);
    return result;
}

PipelineResult run_pipeline(std::string_view text, const PipelineConfig& cfg) {
    const Dictionary dict = cfg.dictionary_path.empty()
                                ? Dictionary{}
                                : tagged("dictionary", [&] { return load_dictionary(cfg.dictionary_path); });
    return run_pipeline(text, cfg, dict);
}

std::string to_dot(const KnowledgeGraph& g) {
    const Matrix* h = g.feature(Stage::Final);
    std::string out = "graph kg {\n";
    for (const Entity& e : g.nodes()) out += fmt::format("  n{} [label=\"{}\"];\n", e.id, escape_dot(e.surface));
    for (const Edge& e : g.edges()) {
        std::optional<double> sim = e.similarity;
        if (!sim && h) sim = cosine(h->row(e.src), h->row(e.dst));
        if (sim)
            out += fmt::format("  n{} -- n{} [label=\"{:.3f}\"];\n", e.src, e.dst, *sim);
        else
            out += fmt::format("  n{} -- n{};\n", e.src, e.dst);
    }
    out += "}\n";
    return out;
}

void export_dot(const KnowledgeGraph& g, const std::filesystem::path& path) { write_file(path, to_dot(g)); }

const std::vector<BenchVariant>& bench_variants() {
    static const std::vector<BenchVariant> v{
        {"sf+fdn", {true, true}},
        {"sf", {true, false}},
        {"fdn", {false, true}},
        {"none", {false, false}},
    };
    return v;
}

std::vector<BenchRow> run_bench_seed(const BenchSpec& spec, std::uint64_t seed) {
    SyntheticSpec sspec = spec.synthetic;
    sspec.seed = seed;
    sspec.dim = spec.pipeline.embedding.dim;
    const SyntheticGraph sg = generate_synthetic(sspec);
    std::vector<BenchRow> rows;
    for (const BenchVariant& v : bench_variants()) {
        PipelineConfig cfg = spec.pipeline;
        cfg.ablation = v.ablation;
        cfg.global_seed = seed;
        const PipelineResult r = run_graph_stages(sg.graph, cfg);
        const NoiseReport nr = noise_removal_report(r.removed, sg);
        BenchRow row;
        row.variant = v.name;
        row.asfas_before = r.report.asfas_before.value_or(0.0);
        row.asfas_unpruned = r.report.asfas_unpruned.value_or(0.0);
        row.asfas_after = r.report.asfas_after.value_or(0.0);
        row.edges_removed = r.removed.size();
        row.noise_precision = nr.precision;
        row.noise_recall = nr.recall;
        row.seed = seed;
        rows.push_back(row);
    }
    return rows;
}

std::vector<BenchRow> run_bench(const BenchSpec& spec) {
    std::vector<BenchRow> rows;
    for (std::size_t i = 0; i < spec.seeds; ++i) {
        const std::uint64_t seed = spec.first_seed + i;
        auto part = run_bench_seed(spec, seed);
        spdlog::info("bench seed {} done", seed);
        rows.insert(rows.end(), part.begin(), part.end());
    }
    return rows;
}

std::string bench_csv(const std::vector<BenchRow>& rows) {
    std::string out = "variant,seed,asfas_before,asfas_unpruned,asfas_after,edges_removed,noise_precision,noise_recall\n";
    for (const BenchRow& r : rows)
        out += fmt::format("{},{},{},{},{},{},{},{}\n", r.variant, r.seed, r.asfas_before, r.asfas_unpruned,
                           r.asfas_after, r.edges_removed, r.noise_precision, r.noise_recall);
    return out;
}

}  // namespace autokg
