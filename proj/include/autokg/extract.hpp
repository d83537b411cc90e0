#pragma once
// Text -> entity candidates -> initial edge set.

#include <cstddef>
#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "autokg/graph.hpp"

namespace autokg {

struct ExtractedEntity {
    std::string surface;
    std::string entity_type = "UNKNOWN";
    std::vector<std::string> tags;
    std::vector<std::size_t> sentence_indices;  // ascending, unique
    // Filled by the rule-based extractor; empty when the source does not know.
    std::vector<std::size_t> paragraph_indices;

    friend bool operator==(const ExtractedEntity&, const ExtractedEntity&) = default;
};

struct Relation {
    std::string head_surface;
    std::string tail_surface;
    std::string label;

    friend bool operator==(const Relation&, const Relation&) = default;
};

struct ExtractionResult {
    std::vector<ExtractedEntity> entities;
    std::vector<Relation> relations;

    friend bool operator==(const ExtractionResult&, const ExtractionResult&) = default;
};

struct ExtractorConfig {
    std::size_t max_entity_chars = 32;
    std::size_t min_token_chars = 2;
    std::filesystem::path stopword_path;
    std::vector<std::string> excluded_pos_tags;

    void validate() const;  // throws ConfigError
};

struct EdgeRules {
    bool cooccur = true;
    bool type_match = true;
    bool llm = true;
    // Entities sharing a paragraph. Off by default.
    bool paragraph = false;
};

struct Sentence {
    std::string text;
    std::size_t paragraph = 0;
};

// Splits on the danda (U+0964), '.', '?', '!' and blank lines. Segments are
// trimmed and empty ones dropped.
std::vector<std::string> segment_sentences(std::string_view text);
// Same segmentation, with the blank-line-delimited paragraph of each sentence.
std::vector<Sentence> segment_document(std::string_view text);

// Whitespace/punctuation tokenisation of NFC text.
std::vector<std::string> tokenize(std::string_view text);

using Stopwords = std::set<std::string>;

// One token per line, '#' starts a comment line. Throws StopwordFileMissing.
Stopwords load_stopwords(const std::filesystem::path& path);

ExtractionResult extract_rule_based(std::string_view text, const ExtractorConfig& cfg);
ExtractionResult extract_rule_based(std::string_view text, const ExtractorConfig& cfg, const Stopwords& stopwords);

// JSON <-> ExtractionResult. Parsing validates the schema and the relation
// endpoint invariant, merging duplicate surfaces. Throws SchemaViolation.
nlohmann::json extraction_to_json(const ExtractionResult& r);
ExtractionResult extraction_from_json(const nlohmann::json& j);
ExtractionResult parse_extraction(std::string_view json_text);
std::string dump_extraction(const ExtractionResult& r);

ExtractionResult extract_from_fixture(const std::filesystem::path& path);

// Throws SchemaViolation if a sentence index is >= num_sentences.
void check_sentence_indices(const ExtractionResult& r, std::size_t num_sentences);

// Drops entities tagged with an excluded POS tag or longer than
// max_entity_chars, plus relations that lose an endpoint.
ExtractionResult refine_entities(const ExtractionResult& r, const ExtractorConfig& cfg);

// Edge {i, j} for entity indices i < j iff an enabled rule fires. Provenance
// is the first rule that fired in the order cooccur, type_match, llm
// (paragraph co-occurrence is reported as SentenceCooccur).
std::vector<Edge> build_base_edges(const std::vector<ExtractedEntity>& entities, const std::vector<Relation>& relations,
                                   const EdgeRules& rules);

// Entities become nodes in extraction order.
std::vector<Entity> entities_to_nodes(const std::vector<ExtractedEntity>& entities);

}  // namespace autokg
