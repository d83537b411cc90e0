#pragma once
// Initial node features: surface + dictionary words -> unit vectors.

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "autokg/graph.hpp"

namespace autokg {

struct DictionaryEntry {
    std::string headword;
    std::vector<std::string> translations;
    std::vector<std::string> synonyms;

    friend bool operator==(const DictionaryEntry&, const DictionaryEntry&) = default;
};

class Dictionary {
public:
    Dictionary() = default;
    void add(DictionaryEntry entry);  // merges with an existing headword
    // NFC-normalised exact match.
    const DictionaryEntry* find(std::string_view word) const;
    std::size_t size() const noexcept { return entries_.size(); }

private:
    std::map<std::string, DictionaryEntry> entries_;
};

// "headword<TAB>trans1;trans2<TAB>syn1;syn2" per line; the synonym column may
// be omitted. Blank lines are skipped. Throws IoError, MalformedLine.
Dictionary load_dictionary(const std::filesystem::path& path);
Dictionary parse_dictionary(std::string_view tsv);

enum class ProviderKind { HashNGram, FileBacked };

struct EmbeddingProviderConfig {
    ProviderKind kind = ProviderKind::HashNGram;
    std::size_t dim = 728;
    std::vector<std::size_t> ngram_sizes{2, 3};
    std::uint64_t seed = 0;
    std::optional<std::filesystem::path> vector_file;

    void validate() const;  // throws ConfigError
};

// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis = 0xcbf29ce484222325ULL) noexcept;

// Signed feature hashing of character n-grams of "<token>" (NFC, code
// points). L2-normalised; the empty token maps to the zero vector.
std::vector<double> hash_embed(std::string_view token, std::size_t dim, const std::vector<std::size_t>& ngram_sizes,
                               std::uint64_t seed);

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual std::size_t dim() const = 0;
    virtual std::vector<double> embed(std::string_view token) const = 0;
};

class HashNGramProvider final : public EmbeddingProvider {
public:
    explicit HashNGramProvider(EmbeddingProviderConfig cfg) : cfg_(std::move(cfg)) {}
    std::size_t dim() const override { return cfg_.dim; }
    std::vector<double> embed(std::string_view token) const override;

private:
    EmbeddingProviderConfig cfg_;
};

// Vectors from a "token<TAB>v1,v2,..." file. Tokens missing from the file fall
// back to hash embeddings. Throws DimensionMismatch on a wrong-length row.
class FileBackedProvider final : public EmbeddingProvider {
public:
    explicit FileBackedProvider(EmbeddingProviderConfig cfg);
    std::size_t dim() const override { return cfg_.dim; }
    std::vector<double> embed(std::string_view token) const override;
    std::size_t size() const noexcept { return vectors_.size(); }

private:
    EmbeddingProviderConfig cfg_;
    std::unordered_map<std::string, std::vector<double>> vectors_;
};

std::unique_ptr<EmbeddingProvider> make_provider(const EmbeddingProviderConfig& cfg);

std::vector<double> embed_entity(const Entity& entity, const Dictionary& dict, const EmbeddingProvider& provider);

// Row i = embed_entity(node i). Throws Error for an empty graph.
Matrix build_feature_matrix(const KnowledgeGraph& g, const Dictionary& dict, const EmbeddingProvider& provider);

}  // namespace autokg
