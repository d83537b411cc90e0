#include "autokg/embed.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "autokg/error.hpp"
#include "autokg/graph_io.hpp"
#include "autokg/simd.hpp"
#include "autokg/unicode.hpp"

namespace autokg {
namespace {

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t pos = s.find(sep, start);
        out.emplace_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::vector<std::string> split_list(std::string_view field) {
    std::vector<std::string> out;
    for (const std::string& item : split(field, ';')) {
        std::string t = unicode::nfc(unicode::trim(item));
        if (!t.empty()) out.push_back(std::move(t));
    }
    return out;
}

void append_unique(std::vector<std::string>& into, const std::vector<std::string>& from) {
    for (const std::string& s : from)
        if (std::find(into.begin(), into.end(), s) == into.end()) into.push_back(s);
}

void normalize(std::vector<double>& v) {
    const double n = l2_norm(v);
    if (n > 0.0) simd::scal(1.0 / n, v.data(), v.size());
}

}  // namespace

void Dictionary::add(DictionaryEntry entry) {
    entry.headword = unicode::nfc(entry.headword);
    auto [it, inserted] = entries_.try_emplace(entry.headword, entry);
    if (inserted) return;
    append_unique(it->second.translations, entry.translations);
    append_unique(it->second.synonyms, entry.synonyms);
}

const DictionaryEntry* Dictionary::find(std::string_view word) const {
    auto it = entries_.find(unicode::nfc(word));
    return it == entries_.end() ? nullptr : &it->second;
}

Dictionary parse_dictionary(std::string_view tsv) {
    Dictionary dict;
    std::size_t line_no = 0;
    for (std::string line : split(tsv, '\n')) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (unicode::trim(line).empty()) continue;
        const std::vector<std::string> fields = split(line, '\t');
        if (fields.size() < 2 || fields.size() > 3)
            throw MalformedLine(line_no, "expected 2 or 3 tab-separated fields, got " + std::to_string(fields.size()));
        DictionaryEntry e;
        e.headword = unicode::nfc(unicode::trim(fields[0]));
        if (e.headword.empty()) throw MalformedLine(line_no, "empty headword");
        e.translations = split_list(fields[1]);
        if (fields.size() == 3) e.synonyms = split_list(fields[2]);
        dict.add(std::move(e));
    }
    return dict;
}

Dictionary load_dictionary(const std::filesystem::path& path) { return parse_dictionary(read_file(path)); }

void EmbeddingProviderConfig::validate() const {
    if (dim < 1) throw ConfigError("embedding dim must be >= 1");
    if (ngram_sizes.empty()) throw ConfigError("at least one n-gram size is required");
    for (std::size_t n : ngram_sizes)
        if (n < 1) throw ConfigError("n-gram sizes must be >= 1");
    if (kind == ProviderKind::FileBacked && !vector_file) throw ConfigError("file-backed provider needs vector_file");
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis) noexcept {
    std::uint64_t h = basis;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::vector<double> hash_embed(std::string_view token, std::size_t dim, const std::vector<std::size_t>& ngram_sizes,
                               std::uint64_t seed) {
    std::vector<double> v(dim, 0.0);
    if (token.empty() || dim == 0) return v;
    std::u32string cps = U"<" + unicode::to_u32(unicode::nfc(token)) + U">";

    char seed_bytes[8];
    for (int i = 0; i < 8; ++i) seed_bytes[i] = static_cast<char>((seed >> (8 * i)) & 0xff);
    const std::uint64_t keyed = fnv1a64(std::string_view(seed_bytes, 8));

    for (std::size_t n : ngram_sizes) {
        if (n == 0 || n > cps.size()) continue;
        for (std::size_t i = 0; i + n <= cps.size(); ++i) {
            const std::string gram = unicode::to_utf8(std::u32string_view(cps).substr(i, n));
            const std::uint64_t h = fnv1a64(gram, keyed);
            v[h % dim] += (h >> 63) ? -1.0 : 1.0;
        }
    }
    normalize(v);
    return v;
}

std::vector<double> HashNGramProvider::embed(std::string_view token) const {
    return hash_embed(token, cfg_.dim, cfg_.ngram_sizes, cfg_.seed);
}

FileBackedProvider::FileBackedProvider(EmbeddingProviderConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    const std::string text = read_file(*cfg_.vector_file);
    std::size_t line_no = 0;
    for (std::string line : split(text, '\n')) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (unicode::trim(line).empty()) continue;
        const std::size_t tab = line.find('\t');
        if (tab == std::string::npos) throw MalformedLine(line_no, "expected token<TAB>values");
        std::vector<double> values;
        for (const std::string& item : split(std::string_view(line).substr(tab + 1), ',')) {
            try {
                std::size_t used = 0;
                values.push_back(std::stod(item, &used));
            } catch (const std::exception&) {
                throw MalformedLine(line_no, "bad number '" + item + "'");
            }
        }
        if (values.size() != cfg_.dim)
            throw DimensionMismatch("vector for '" + line.substr(0, tab) + "' on line " + std::to_string(line_no) +
                                    " has " + std::to_string(values.size()) + " values, expected " +
                                    std::to_string(cfg_.dim));
        vectors_[unicode::nfc(line.substr(0, tab))] = std::move(values);
    }
}

std::vector<double> FileBackedProvider::embed(std::string_view token) const {
    auto it = vectors_.find(unicode::nfc(token));
    if (it != vectors_.end()) return it->second;
    return hash_embed(token, cfg_.dim, cfg_.ngram_sizes, cfg_.seed);
}

std::unique_ptr<EmbeddingProvider> make_provider(const EmbeddingProviderConfig& cfg) {
    cfg.validate();
    if (cfg.kind == ProviderKind::FileBacked) return std::make_unique<FileBackedProvider>(cfg);
    return std::make_unique<HashNGramProvider>(cfg);
}

std::vector<double> embed_entity(const Entity& entity, const Dictionary& dict, const EmbeddingProvider& provider) {
    std::vector<double> surface = provider.embed(entity.surface);
    if (surface.size() != provider.dim())
        throw DimensionMismatch("provider returned " + std::to_string(surface.size()) + " values, expected " +
                                std::to_string(provider.dim()));
    const DictionaryEntry* entry = dict.find(entity.surface);
    if (entry == nullptr) return surface;

    std::vector<double> sum = std::move(surface);
    std::size_t count = 1;
    auto accumulate = [&](const std::string& word) {
        const std::vector<double> v = provider.embed(word);
        if (v.size() != sum.size()) throw DimensionMismatch("embedding for '" + word + "' has the wrong length");
        simd::axpy(1.0, v.data(), sum.data(), sum.size());
        ++count;
    };
    for (const std::string& w : entry->translations) accumulate(w);
    for (const std::string& w : entry->synonyms) accumulate(w);
    simd::scal(1.0 / static_cast<double>(count), sum.data(), sum.size());
    normalize(sum);
    return sum;
}

Matrix build_feature_matrix(const KnowledgeGraph& g, const Dictionary& dict, const EmbeddingProvider& provider) {
    if (g.num_nodes() == 0) throw Error("cannot build features for an empty graph");
    Matrix x(g.num_nodes(), provider.dim());
    for (const Entity& e : g.nodes()) {
        const std::vector<double> v = embed_entity(e, dict, provider);
        std::copy(v.begin(), v.end(), x.row(e.id).begin());
    }
    return x;
}

}  // namespace autokg
