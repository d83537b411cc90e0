#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <set>
#include <sstream>

#include "autokg/error.hpp"
#include "autokg/graph_io.hpp"
#include "autokg/pipeline.hpp"

namespace autokg {
namespace {

namespace pt = boost::property_tree;

std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item.erase(0, item.find_first_not_of(" \t"));
        item.erase(item.find_last_not_of(" \t") + 1);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
    std::string s = v;
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    throw ConfigError(key + ": expected a boolean, got '" + v + "'");
}

double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument("trailing characters");
        return d;
    } catch (const std::exception&) {
        throw ConfigError(key + ": expected a number, got '" + v + "'");
    }
}

std::uint64_t parse_uint(const std::string& key, const std::string& v) {
    try {
        if (!v.empty() && v.front() == '-') throw std::invalid_argument("negative");
        std::size_t used = 0;
        const unsigned long long u = std::stoull(v, &used);
        if (used != v.size()) throw std::invalid_argument("trailing characters");
        return u;
    } catch (const std::exception&) {
        throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
    }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& v) {
    std::filesystem::path p(v);
    if (p.is_relative() && !base.empty()) p = base / p;
    return p;
}

using Setter = std::function<void(const std::string& key, const std::string& value)>;

// Applies every key of `tree` through `setters`; unknown section.key pairs
// are errors unless the section is listed in `ignore_sections`.
void apply_settings(const pt::ptree& tree, const std::map<std::string, Setter>& setters,
           const std::set<std::string>& ignore_sections = {}) {
    for (const auto& [section, body] : tree) {
        if (ignore_sections.count(section)) continue;
        if (body.empty() && !body.data().empty())
            throw ConfigError("key '" + section + "' must live inside a [section]");
        for (const auto& [key, value] : body) {
            const std::string full = section + "." + key;
            auto it = setters.find(full);
            if (it == setters.end()) throw ConfigError("unknown config key '" + full + "'");
            it->second(full, value.data());
        }
    }
}

pt::ptree read_ini(const std::string& text) {
    pt::ptree tree;
    std::istringstream in(text);
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    return tree;
}

std::map<std::string, Setter> pipeline_setters(PipelineConfig& c, const std::filesystem::path& base) {
    std::map<std::string, Setter> s;
    s["extractor.mode"] = [&c](const std::string& k, const std::string& v) {
        if (v == "rule") c.extractor = ExtractorMode::Rule;
        else if (v == "fixture") c.extractor = ExtractorMode::Fixture;
        else if (v == "llm") c.extractor = ExtractorMode::Llm;
        else throw ConfigError(k + ": expected rule, fixture or llm");
    };
    s["extractor.fixture"] = [&c, base](const std::string&, const std::string& v) { c.fixture_path = resolve(base, v); };
    s["extractor.stopwords"] = [&c, base](const std::string&, const std::string& v) {
        c.extract.stopword_path = resolve(base, v);
    };
    s["extractor.max_entity_chars"] = [&c](const std::string& k, const std::string& v) { c.extract.max_entity_chars = parse_uint(k, v); };
    s["extractor.min_token_chars"] = [&c](const std::string& k, const std::string& v) { c.extract.min_token_chars = parse_uint(k, v); };
    s["extractor.excluded_pos_tags"] = [&c](const std::string&, const std::string& v) { c.extract.excluded_pos_tags = split_csv(v); };
    s["extractor.llm_endpoint"] = [&c](const std::string&, const std::string& v) { c.llm.endpoint = v; };
    s["extractor.llm_model"] = [&c](const std::string&, const std::string& v) { c.llm.model = v; };
    s["extractor.llm_timeout_s"] = [&c](const std::string& k, const std::string& v) { c.llm.timeout_s = parse_double(k, v); };
    s["extractor.llm_retries"] = [&c](const std::string& k, const std::string& v) { c.llm.retries = static_cast<int>(parse_uint(k, v)); };
    s["extractor.llm_fallback"] = [&c](const std::string& k, const std::string& v) { c.llm_fallback = parse_bool(k, v); };

    s["edges.cooccur"] = [&c](const std::string& k, const std::string& v) { c.rules.cooccur = parse_bool(k, v); };
    s["edges.type_match"] = [&c](const std::string& k, const std::string& v) { c.rules.type_match = parse_bool(k, v); };
    s["edges.llm"] = [&c](const std::string& k, const std::string& v) { c.rules.llm = parse_bool(k, v); };
    s["edges.paragraph"] = [&c](const std::string& k, const std::string& v) { c.rules.paragraph = parse_bool(k, v); };

    s["embedding.kind"] = [&c](const std::string& k, const std::string& v) {
        if (v == "hash") c.embedding.kind = ProviderKind::HashNGram;
        else if (v == "file") c.embedding.kind = ProviderKind::FileBacked;
        else throw ConfigError(k + ": expected hash or file");
    };
    s["embedding.dim"] = [&c](const std::string& k, const std::string& v) { c.embedding.dim = parse_uint(k, v); };
    s["embedding.ngram_sizes"] = [&c](const std::string& k, const std::string& v) {
        c.embedding.ngram_sizes.clear();
        for (const std::string& item : split_csv(v)) c.embedding.ngram_sizes.push_back(parse_uint(k, item));
    };
    s["embedding.seed"] = [&c](const std::string& k, const std::string& v) { c.embedding.seed = parse_uint(k, v); };
    s["embedding.vector_file"] = [&c, base](const std::string&, const std::string& v) { c.embedding.vector_file = resolve(base, v); };
    s["embedding.dictionary"] = [&c, base](const std::string&, const std::string& v) { c.dictionary_path = resolve(base, v); };

    s["model.feature_dim"] = [&c](const std::string& k, const std::string& v) { c.feature_dim = parse_uint(k, v); };
    s["model.cheb_order"] = [&c](const std::string& k, const std::string& v) { c.cheb_order = parse_uint(k, v); };

    s["prune.mode"] = [&c](const std::string& k, const std::string& v) {
        if (v == "retain_fraction") c.prune.mode = PruneMode::RetainFraction;
        else if (v == "absolute") c.prune.mode = PruneMode::AbsoluteThreshold;
        else throw ConfigError(k + ": expected retain_fraction or absolute");
    };
    s["prune.retain_fraction"] = [&c](const std::string& k, const std::string& v) { c.prune.retain_fraction = parse_double(k, v); };
    s["prune.gamma"] = [&c](const std::string& k, const std::string& v) { c.prune.gamma = parse_double(k, v); };

    s["train.epochs"] = [&c](const std::string& k, const std::string& v) { c.train.epochs = parse_uint(k, v); };
    s["train.step_size"] = [&c](const std::string& k, const std::string& v) { c.train.step_size = parse_double(k, v); };
    s["train.neg_samples_per_edge"] = [&c](const std::string& k, const std::string& v) { c.train.neg_samples_per_edge = parse_uint(k, v); };
    s["train.leaky_relu_slope"] = [&c](const std::string& k, const std::string& v) { c.train.leaky_relu_slope = parse_double(k, v); };

    s["ablation.enable_sf"] = [&c](const std::string& k, const std::string& v) { c.ablation.enable_sf = parse_bool(k, v); };
    s["ablation.enable_fdn"] = [&c](const std::string& k, const std::string& v) { c.ablation.enable_fdn = parse_bool(k, v); };

    s["pipeline.global_seed"] = [&c](const std::string& k, const std::string& v) { c.global_seed = parse_uint(k, v); };
    return s;
}

std::string mode_name(ExtractorMode m) {
    switch (m) {
        case ExtractorMode::Rule: return "rule";
        case ExtractorMode::Fixture: return "fixture";
        case ExtractorMode::Llm: return "llm";
    }
    return "rule";
}

}  // namespace

void PipelineConfig::validate() const {
    extract.validate();
    embedding.validate();
    prune.validate();
    train.validate();
    if (feature_dim < 1) throw ConfigError("feature_dim (F) must be >= 1");
    if (cheb_order < 1) throw ConfigError("cheb_order (K) must be >= 1");
    if (extractor == ExtractorMode::Fixture && fixture_path.empty())
        throw ConfigError("extractor.mode = fixture needs extractor.fixture");
}

PipelineConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
    PipelineConfig cfg;
    apply_settings(read_ini(text), pipeline_setters(cfg, base_dir));
    if (const char* env = std::getenv("AUTOKG_LLM_ENDPOINT"); env && *env) cfg.llm.endpoint = env;
    if (const char* key = std::getenv("AUTOKG_LLM_API_KEY"); key && *key) cfg.llm.api_key = key;
    cfg.validate();
    return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
    std::string text;
    try {
        text = read_file(path);
    } catch (const IoError& e) {
        throw ConfigError(e.what());
    }
    return parse_config(text, path.parent_path());
}

nlohmann::json config_to_json(const PipelineConfig& c) {
    return {
        {"extractor",
         {{"mode", mode_name(c.extractor)},
          {"fixture", c.fixture_path.string()},
          {"stopwords", c.extract.stopword_path.string()},
          {"max_entity_chars", c.extract.max_entity_chars},
          {"min_token_chars", c.extract.min_token_chars},
          {"excluded_pos_tags", c.extract.excluded_pos_tags},
          {"llm_endpoint", c.llm.endpoint},
          {"llm_model", c.llm.model},
          {"llm_timeout_s", c.llm.timeout_s},
          {"llm_retries", c.llm.retries},
          {"llm_fallback", c.llm_fallback}}},
        {"edges",
         {{"cooccur", c.rules.cooccur}, {"type_match", c.rules.type_match}, {"llm", c.rules.llm}, {"paragraph", c.rules.paragraph}}},
        {"embedding",
         {{"kind", c.embedding.kind == ProviderKind::HashNGram ? "hash" : "file"},
          {"dim", c.embedding.dim},
          {"ngram_sizes", c.embedding.ngram_sizes},
          {"seed", c.embedding.seed},
          {"vector_file", c.embedding.vector_file ? c.embedding.vector_file->string() : ""},
          {"dictionary", c.dictionary_path.string()}}},
        {"model", {{"feature_dim", c.feature_dim}, {"cheb_order", c.cheb_order}}},
        {"prune",
         {{"mode", c.prune.mode == PruneMode::RetainFraction ? "retain_fraction" : "absolute"},
          {"retain_fraction", c.prune.retain_fraction},
          {"gamma", c.prune.gamma}}},
        {"train",
         {{"epochs", c.train.epochs},
          {"step_size", c.train.step_size},
          {"neg_samples_per_edge", c.train.neg_samples_per_edge},
          {"leaky_relu_slope", c.train.leaky_relu_slope}}},
        {"ablation", {{"enable_sf", c.ablation.enable_sf}, {"enable_fdn", c.ablation.enable_fdn}}},
        {"pipeline", {{"global_seed", c.global_seed}}},
    };
}

BenchSpec parse_bench_spec(const std::string& text, const std::filesystem::path& base_dir) {
    BenchSpec spec;
    // Small-run defaults for the planted-noise benchmark.
    spec.synthetic.noise_fraction = 0.1;
    auto setters = pipeline_setters(spec.pipeline, base_dir);
    SyntheticSpec& sy = spec.synthetic;
    setters["synthetic.clusters"] = [&sy](const std::string& k, const std::string& v) { sy.clusters = parse_uint(k, v); };
    setters["synthetic.nodes_per_cluster"] = [&sy](const std::string& k, const std::string& v) { sy.nodes_per_cluster = parse_uint(k, v); };
    setters["synthetic.intra_edge_prob"] = [&sy](const std::string& k, const std::string& v) { sy.intra_edge_prob = parse_double(k, v); };
    setters["synthetic.noise_edges"] = [&sy](const std::string& k, const std::string& v) {
        sy.noise_edges = parse_uint(k, v);
        sy.noise_fraction.reset();
    };
    setters["synthetic.noise_fraction"] = [&sy](const std::string& k, const std::string& v) { sy.noise_fraction = parse_double(k, v); };
    setters["synthetic.feature_noise_sigma"] = [&sy](const std::string& k, const std::string& v) { sy.feature_noise_sigma = parse_double(k, v); };
    setters["bench.seeds"] = [&spec](const std::string& k, const std::string& v) { spec.seeds = parse_uint(k, v); };
    setters["bench.first_seed"] = [&spec](const std::string& k, const std::string& v) { spec.first_seed = parse_uint(k, v); };
    apply_settings(read_ini(text), setters);
    sy.dim = spec.pipeline.embedding.dim;
    if (spec.seeds < 1) throw ConfigError("bench.seeds must be >= 1");
    sy.validate();
    spec.pipeline.validate();
    return spec;
}

BenchSpec load_bench_spec(const std::filesystem::path& path) {
    std::string text;
    try {
        text = read_file(path);
    } catch (const IoError& e) {
        throw ConfigError(e.what());
    }
    return parse_bench_spec(text, path.parent_path());
}

}  // namespace autokg
