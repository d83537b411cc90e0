#pragma once
// End-to-end orchestration: text -> base graph -> denoised features ->
// semantic filtering -> pruned graph, plus the synthetic ablation bench.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "autokg/embed.hpp"
#include "autokg/extract.hpp"
#include "autokg/filter.hpp"
#include "autokg/gnn.hpp"
#include "autokg/llm_client.hpp"
#include "autokg/train.hpp"

namespace autokg {

enum class ExtractorMode { Rule, Fixture, Llm };

struct Ablation {
    bool enable_sf = true;
    bool enable_fdn = true;
};

struct PipelineConfig {
    ExtractorMode extractor = ExtractorMode::Rule;
    ExtractorConfig extract;
    std::filesystem::path fixture_path;
    LlmClientConfig llm;
    // Fall back to the rule-based extractor when the LLM call fails.
    bool llm_fallback = true;
    EdgeRules rules;
    EmbeddingProviderConfig embedding;
    std::filesystem::path dictionary_path;
    std::size_t feature_dim = 128;  // F
    std::size_t cheb_order = 3;     // K
    PruneConfig prune;
    gnn::TrainConfig train;
    Ablation ablation;
    std::uint64_t global_seed = 0;

    void validate() const;  // throws ConfigError
    gnn::ModelDims dims() const { return {embedding.dim, feature_dim, cheb_order}; }
};

// Flat INI-style file, sections [extractor] [edges] [embedding] [model]
// [prune] [train] [ablation] [pipeline]. Unknown keys are rejected. Relative
// paths resolve against base_dir. Throws ConfigError.
PipelineConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});
PipelineConfig load_config(const std::filesystem::path& path);
// Every hyperparameter, for report provenance.
nlohmann::json config_to_json(const PipelineConfig& cfg);

struct StageTiming {
    std::string stage;
    double millis = 0.0;
};

struct PipelineReport {
    std::size_t nodes = 0;
    std::size_t edges = 0;        // M
    std::size_t final_edges = 0;  // M_f
    // Raw features on the base edges; final features on the base edges;
    // final features on the kept edges.
    std::optional<double> asfas_before;
    std::optional<double> asfas_unpruned;
    std::optional<double> asfas_after;
    std::vector<StageTiming> timings;
    std::vector<double> stage1_loss;
    std::vector<double> stage2_loss;
    std::string extractor_used;
    std::string simd_isa;
    nlohmann::json config;

    nlohmann::json to_json() const;
};

struct PipelineResult {
    KnowledgeGraph base;   // extracted nodes/edges with raw features
    KnowledgeGraph final;  // pruned graph, denoised + final features
    std::vector<Edge> removed;
    gnn::LayerParams params;
    PipelineReport report;
};

// Stages from a base graph carrying Stage::Raw features onward.
PipelineResult run_graph_stages(const KnowledgeGraph& base, const PipelineConfig& cfg);

ExtractionResult run_extraction(std::string_view text, const PipelineConfig& cfg, std::string* used = nullptr);

// Full flow from text. Stage failures are rethrown as StageError.
PipelineResult run_pipeline(std::string_view text, const PipelineConfig& cfg, const Dictionary& dict);
PipelineResult run_pipeline(std::string_view text, const PipelineConfig& cfg);

// ---- exporters ----
std::string to_dot(const KnowledgeGraph& g);
void export_dot(const KnowledgeGraph& g, const std::filesystem::path& path);  // throws IoError

// ---- synthetic ablation bench ----
struct BenchSpec {
    SyntheticSpec synthetic;
    std::size_t seeds = 1;
    std::uint64_t first_seed = 0;
    PipelineConfig pipeline;
};

struct BenchRow {
    std::string variant;
    double asfas_before = 0.0;
    double asfas_unpruned = 0.0;
    double asfas_after = 0.0;
    std::size_t edges_removed = 0;
    double noise_precision = 0.0;
    double noise_recall = 0.0;
    std::uint64_t seed = 0;
};

// Variants in row order: sf+fdn, sf, fdn, none.
struct BenchVariant {
    std::string name;
    Ablation ablation;
};
const std::vector<BenchVariant>& bench_variants();

// [synthetic] and [bench] sections plus any pipeline sections.
BenchSpec parse_bench_spec(const std::string& text, const std::filesystem::path& base_dir = {});
BenchSpec load_bench_spec(const std::filesystem::path& path);

std::vector<BenchRow> run_bench_seed(const BenchSpec& spec, std::uint64_t seed);
std::vector<BenchRow> run_bench(const BenchSpec& spec);
std::string bench_csv(const std::vector<BenchRow>& rows);

}  // namespace autokg
