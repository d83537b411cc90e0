#include "autokg/extract.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include "autokg/error.hpp"
#include "autokg/graph_io.hpp"
#include "autokg/unicode.hpp"

namespace autokg {
namespace {

using nlohmann::json;

constexpr char32_t kDanda = U'।';

bool is_sentence_delim(char32_t cp) { return cp == kDanda || cp == U'.' || cp == U'?' || cp == U'!'; }

bool is_blank(std::u32string_view line) {
    return std::all_of(line.begin(), line.end(), [](char32_t c) { return unicode::is_space(c); });
}

template <typename T>
void merge_sorted_unique(std::vector<T>& into, const std::vector<T>& from) {
    std::vector<T> out;
    std::set_union(into.begin(), into.end(), from.begin(), from.end(), std::back_inserter(out));
    into = std::move(out);
}

bool intersects(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
    auto i = a.begin();
    auto j = b.begin();
    while (i != a.end() && j != b.end()) {
        if (*i == *j) return true;
        if (*i < *j) ++i;
        else ++j;
    }
    return false;
}

std::vector<std::size_t> index_list(const json& j, const std::string& path) {
    if (!j.is_array()) throw SchemaViolation(path, "expected an array of non-negative integers");
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number_unsigned())
            throw SchemaViolation(path + "/" + std::to_string(i), "expected a non-negative integer");
        out.push_back(j[i].get<std::size_t>());
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::string string_field(const json& obj, const char* key, const std::string& path, bool required) {
    auto it = obj.find(key);
    if (it == obj.end()) {
        if (required) throw SchemaViolation(path + "/" + key, "missing required field");
        return {};
    }
    if (!it->is_string()) throw SchemaViolation(path + "/" + key, "expected a string");
    return it->get<std::string>();
}

}  // namespace

void ExtractorConfig::validate() const {
    if (min_token_chars < 1) throw ConfigError("min_token_chars must be >= 1");
    if (max_entity_chars <= min_token_chars) throw ConfigError("max_entity_chars must exceed min_token_chars");
}

std::vector<Sentence> segment_document(std::string_view text) {
    const std::u32string cps = unicode::to_u32(text);
    std::vector<std::u32string> lines;
    {
        std::u32string cur;
        for (char32_t c : cps) {
            if (c == U'\n') {
                lines.push_back(std::move(cur));
                cur.clear();
            } else {
                cur.push_back(c);
            }
        }
        lines.push_back(std::move(cur));
    }

    std::vector<Sentence> out;
    std::size_t paragraph = 0;
    bool paragraph_open = false;
    std::u32string segment;
    auto flush = [&] {
        std::string s = unicode::trim(unicode::to_utf8(segment));
        segment.clear();
        if (!s.empty()) {
            out.push_back({std::move(s), paragraph});
            paragraph_open = true;
        }
    };
    for (const std::u32string& line : lines) {
        if (is_blank(line)) {
            flush();
            if (paragraph_open) {
                ++paragraph;
                paragraph_open = false;
            }
            continue;
        }
        for (char32_t c : line) {
            if (is_sentence_delim(c)) flush();
            else segment.push_back(c);
        }
        segment.push_back(U'\n');
    }
    flush();
    return out;
}

std::vector<std::string> segment_sentences(std::string_view text) {
    std::vector<std::string> out;
    for (Sentence& s : segment_document(text)) out.push_back(std::move(s.text));
    return out;
}

std::vector<std::string> tokenize(std::string_view text) {
    const std::u32string cps = unicode::to_u32(unicode::nfc(text));
    std::vector<std::string> out;
    std::u32string cur;
    for (char32_t c : cps) {
        if (unicode::is_space(c) || unicode::is_punct(c)) {
            if (!cur.empty()) out.push_back(unicode::to_utf8(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) out.push_back(unicode::to_utf8(cur));
    return out;
}

Stopwords load_stopwords(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw StopwordFileMissing(path.string());
    Stopwords words;
    std::string line;
    while (std::getline(in, line)) {
        std::string t = unicode::trim(line);
        if (t.empty() || t.front() == '#') continue;
        words.insert(unicode::nfc(t));
    }
    return words;
}

ExtractionResult extract_rule_based(std::string_view text, const ExtractorConfig& cfg) {
    const Stopwords stop = cfg.stopword_path.empty() ? Stopwords{} : load_stopwords(cfg.stopword_path);
    return extract_rule_based(text, cfg, stop);
}

ExtractionResult extract_rule_based(std::string_view text, const ExtractorConfig& cfg, const Stopwords& stopwords) {
    cfg.validate();
    ExtractionResult result;
    std::map<std::string, std::size_t> index;
    const std::vector<Sentence> sentences = segment_document(unicode::nfc(text));
    for (std::size_t s = 0; s < sentences.size(); ++s) {
        for (std::string& tok : tokenize(sentences[s].text)) {
            const std::size_t len = unicode::length(tok);
            if (len < cfg.min_token_chars || len > cfg.max_entity_chars) continue;
            if (stopwords.count(tok)) continue;
            auto [it, inserted] = index.emplace(tok, result.entities.size());
            if (inserted) {
                ExtractedEntity e;
                e.surface = std::move(tok);
                result.entities.push_back(std::move(e));
            }
            ExtractedEntity& e = result.entities[it->second];
            merge_sorted_unique(e.sentence_indices, std::vector<std::size_t>{s});
            merge_sorted_unique(e.paragraph_indices, std::vector<std::size_t>{sentences[s].paragraph});
        }
    }
    return result;
}

json extraction_to_json(const ExtractionResult& r) {
    json entities = json::array();
    for (const ExtractedEntity& e : r.entities) {
        json je = {{"surface", e.surface},
                   {"type", e.entity_type},
                   {"tags", e.tags},
                   {"sentence_indices", e.sentence_indices}};
        if (!e.paragraph_indices.empty()) je["paragraph_indices"] = e.paragraph_indices;
        entities.push_back(std::move(je));
    }
    json relations = json::array();
    for (const Relation& rel : r.relations)
        relations.push_back({{"head_surface", rel.head_surface}, {"tail_surface", rel.tail_surface}, {"label", rel.label}});
    return {{"entities", entities}, {"relations", relations}};
}

ExtractionResult extraction_from_json(const json& j) {
    if (!j.is_object()) throw SchemaViolation("", "expected an object");
    auto ents = j.find("entities");
    if (ents == j.end()) throw SchemaViolation("/entities", "missing required field");
    if (!ents->is_array()) throw SchemaViolation("/entities", "expected an array");

    ExtractionResult out;
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < ents->size(); ++i) {
        const json& je = (*ents)[i];
        const std::string p = "/entities/" + std::to_string(i);
        if (!je.is_object()) throw SchemaViolation(p, "expected an object");
        ExtractedEntity e;
        e.surface = unicode::nfc(unicode::trim(string_field(je, "surface", p, true)));
        if (e.surface.empty()) throw SchemaViolation(p + "/surface", "surface is empty");
        if (je.contains("type")) e.entity_type = string_field(je, "type", p, true);
        if (e.entity_type.empty()) e.entity_type = "UNKNOWN";
        if (auto t = je.find("tags"); t != je.end()) {
            if (!t->is_array()) throw SchemaViolation(p + "/tags", "expected an array of strings");
            for (std::size_t k = 0; k < t->size(); ++k) {
                if (!(*t)[k].is_string()) throw SchemaViolation(p + "/tags/" + std::to_string(k), "expected a string");
                e.tags.push_back((*t)[k].get<std::string>());
            }
        }
        if (auto s = je.find("sentence_indices"); s != je.end()) e.sentence_indices = index_list(*s, p + "/sentence_indices");
        if (auto s = je.find("paragraph_indices"); s != je.end())
            e.paragraph_indices = index_list(*s, p + "/paragraph_indices");

        auto [it, inserted] = index.emplace(e.surface, out.entities.size());
        if (inserted) {
            out.entities.push_back(std::move(e));
            continue;
        }
        ExtractedEntity& prev = out.entities[it->second];
        if (prev.entity_type == "UNKNOWN") prev.entity_type = e.entity_type;
        for (std::string& tag : e.tags)
            if (std::find(prev.tags.begin(), prev.tags.end(), tag) == prev.tags.end()) prev.tags.push_back(std::move(tag));
        merge_sorted_unique(prev.sentence_indices, e.sentence_indices);
        merge_sorted_unique(prev.paragraph_indices, e.paragraph_indices);
    }

    if (auto rels = j.find("relations"); rels != j.end()) {
        if (!rels->is_array()) throw SchemaViolation("/relations", "expected an array");
        for (std::size_t i = 0; i < rels->size(); ++i) {
            const json& jr = (*rels)[i];
            const std::string p = "/relations/" + std::to_string(i);
            if (!jr.is_object()) throw SchemaViolation(p, "expected an object");
            Relation r;
            r.head_surface = unicode::nfc(unicode::trim(string_field(jr, "head_surface", p, true)));
            r.tail_surface = unicode::nfc(unicode::trim(string_field(jr, "tail_surface", p, true)));
            r.label = string_field(jr, "label", p, false);
            if (!index.count(r.head_surface))
                throw SchemaViolation(p + "/head_surface", "unknown entity '" + r.head_surface + "'");
            if (!index.count(r.tail_surface))
                throw SchemaViolation(p + "/tail_surface", "unknown entity '" + r.tail_surface + "'");
            out.relations.push_back(std::move(r));
        }
    }
    return out;
}

ExtractionResult parse_extraction(std::string_view json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw SchemaViolation("", std::string("invalid JSON: ") + e.what());
    }
    return extraction_from_json(j);
}

std::string dump_extraction(const ExtractionResult& r) { return extraction_to_json(r).dump(1) + "\n"; }

ExtractionResult extract_from_fixture(const std::filesystem::path& path) { return parse_extraction(read_file(path)); }

void check_sentence_indices(const ExtractionResult& r, std::size_t num_sentences) {
    for (std::size_t i = 0; i < r.entities.size(); ++i)
        for (std::size_t s : r.entities[i].sentence_indices)
            if (s >= num_sentences)
                throw SchemaViolation("/entities/" + std::to_string(i) + "/sentence_indices",
                                      "index " + std::to_string(s) + " exceeds sentence count " +
                                          std::to_string(num_sentences));
}

ExtractionResult refine_entities(const ExtractionResult& r, const ExtractorConfig& cfg) {
    ExtractionResult out;
    std::set<std::string> kept;
    for (const ExtractedEntity& e : r.entities) {
        const bool excluded = std::any_of(e.tags.begin(), e.tags.end(), [&](const std::string& t) {
            return std::find(cfg.excluded_pos_tags.begin(), cfg.excluded_pos_tags.end(), t) != cfg.excluded_pos_tags.end();
        });
        if (excluded || unicode::length(e.surface) > cfg.max_entity_chars) continue;
        kept.insert(e.surface);
        out.entities.push_back(e);
    }
    for (const Relation& rel : r.relations)
        if (kept.count(rel.head_surface) && kept.count(rel.tail_surface)) out.relations.push_back(rel);
    return out;
}

std::vector<Edge> build_base_edges(const std::vector<ExtractedEntity>& entities, const std::vector<Relation>& relations,
                                   const EdgeRules& rules) {
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < entities.size(); ++i) index.emplace(entities[i].surface, i);
    std::set<std::pair<std::size_t, std::size_t>> suggested;
    for (const Relation& r : relations) {
        auto h = index.find(r.head_surface);
        auto t = index.find(r.tail_surface);
        if (h == index.end() || t == index.end() || h->second == t->second) continue;
        suggested.emplace(std::min(h->second, t->second), std::max(h->second, t->second));
    }

    std::vector<Edge> edges;
    for (std::size_t i = 0; i < entities.size(); ++i) {
        for (std::size_t j = i + 1; j < entities.size(); ++j) {
            const ExtractedEntity& a = entities[i];
            const ExtractedEntity& b = entities[j];
            std::optional<Provenance> why;
            if (rules.cooccur && intersects(a.sentence_indices, b.sentence_indices)) why = Provenance::SentenceCooccur;
            else if (rules.paragraph && intersects(a.paragraph_indices, b.paragraph_indices))
                why = Provenance::SentenceCooccur;
            else if (rules.type_match && a.entity_type != "UNKNOWN" && a.entity_type == b.entity_type)
                why = Provenance::TypeMatch;
            else if (rules.llm && suggested.count({i, j}))
                why = Provenance::LlmSuggested;
            if (why) edges.push_back(Edge{i, j, 1.0, *why, std::nullopt});
        }
    }
    return edges;
}

std::vector<Entity> entities_to_nodes(const std::vector<ExtractedEntity>& entities) {
    std::vector<Entity> nodes;
    nodes.reserve(entities.size());
    for (std::size_t i = 0; i < entities.size(); ++i)
        nodes.push_back(Entity{i, entities[i].surface, entities[i].entity_type, entities[i].tags});
    return nodes;
}

}  // namespace autokg
