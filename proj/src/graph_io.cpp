#include "autokg/graph_io.hpp"

#include <fstream>
#include <sstream>

#include "autokg/error.hpp"

namespace autokg {
namespace {

using nlohmann::json;

const json& require(const json& obj, const char* key, const std::string& path) {
    if (!obj.is_object()) throw SchemaViolation(path, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) throw SchemaViolation(path + "/" + key, "missing required field");
    return *it;
}

json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (std::size_t r = 0; r < m.rows(); ++r) rows.push_back(std::vector<double>(m.row(r).begin(), m.row(r).end()));
    return rows;
}

Matrix matrix_from_json(const json& j, const std::string& path) {
    if (!j.is_array()) throw SchemaViolation(path, "expected an array of rows");
    std::vector<std::vector<double>> rows;
    for (std::size_t r = 0; r < j.size(); ++r) {
        const std::string rp = path + "/" + std::to_string(r);
        if (!j[r].is_array()) throw SchemaViolation(rp, "expected an array of numbers");
        std::vector<double> row;
        for (std::size_t c = 0; c < j[r].size(); ++c) {
            if (!j[r][c].is_number()) throw SchemaViolation(rp + "/" + std::to_string(c), "expected a number");
            row.push_back(j[r][c].get<double>());
        }
        if (!rows.empty() && row.size() != rows.front().size()) throw SchemaViolation(rp, "ragged feature rows");
        rows.push_back(std::move(row));
    }
    return Matrix::from_rows(rows);
}

}  // namespace

json graph_to_json(const KnowledgeGraph& g) {
    json nodes = json::array();
    for (const Entity& e : g.nodes())
        nodes.push_back({{"id", e.id}, {"surface", e.surface}, {"type", e.entity_type}, {"tags", e.tags}});
    json edges = json::array();
    for (const Edge& e : g.edges()) {
        json je = {{"src", e.src}, {"dst", e.dst}, {"weight", e.weight}, {"provenance", to_string(e.provenance)}};
        if (e.similarity) je["similarity"] = *e.similarity;
        edges.push_back(std::move(je));
    }
    json features = json::object();
    for (const auto& [stage, m] : g.features()) features[std::string(to_string(stage))] = matrix_to_json(m);
    return {{"nodes", nodes}, {"edges", edges}, {"features", features}};
}

KnowledgeGraph graph_from_json(const json& j) {
    const json& jn = require(j, "nodes", "");
    if (!jn.is_array()) throw SchemaViolation("/nodes", "expected an array");
    std::vector<Entity> nodes;
    for (std::size_t i = 0; i < jn.size(); ++i) {
        const std::string p = "/nodes/" + std::to_string(i);
        Entity e;
        const json& id = require(jn[i], "id", p);
        if (!id.is_number_unsigned()) throw SchemaViolation(p + "/id", "expected a non-negative integer");
        e.id = id.get<NodeId>();
        const json& surface = require(jn[i], "surface", p);
        if (!surface.is_string() || surface.get<std::string>().empty())
            throw SchemaViolation(p + "/surface", "expected a non-empty string");
        e.surface = surface.get<std::string>();
        const json& type = require(jn[i], "type", p);
        if (!type.is_string()) throw SchemaViolation(p + "/type", "expected a string");
        e.entity_type = type.get<std::string>();
        if (auto it = jn[i].find("tags"); it != jn[i].end()) {
            if (!it->is_array()) throw SchemaViolation(p + "/tags", "expected an array of strings");
            for (std::size_t t = 0; t < it->size(); ++t) {
                if (!(*it)[t].is_string()) throw SchemaViolation(p + "/tags/" + std::to_string(t), "expected a string");
                e.tags.push_back((*it)[t].get<std::string>());
            }
        }
        nodes.push_back(std::move(e));
    }

    const json& je = require(j, "edges", "");
    if (!je.is_array()) throw SchemaViolation("/edges", "expected an array");
    std::vector<Edge> edges;
    for (std::size_t i = 0; i < je.size(); ++i) {
        const std::string p = "/edges/" + std::to_string(i);
        Edge e;
        const json& src = require(je[i], "src", p);
        const json& dst = require(je[i], "dst", p);
        if (!src.is_number_unsigned()) throw SchemaViolation(p + "/src", "expected a non-negative integer");
        if (!dst.is_number_unsigned()) throw SchemaViolation(p + "/dst", "expected a non-negative integer");
        e.src = src.get<NodeId>();
        e.dst = dst.get<NodeId>();
        if (auto it = je[i].find("weight"); it != je[i].end()) {
            if (!it->is_number()) throw SchemaViolation(p + "/weight", "expected a number");
            e.weight = it->get<double>();
        }
        if (auto it = je[i].find("provenance"); it != je[i].end()) {
            if (!it->is_string()) throw SchemaViolation(p + "/provenance", "expected a string");
            try {
                e.provenance = provenance_from_string(it->get<std::string>());
            } catch (const SchemaViolation&) {
                throw SchemaViolation(p + "/provenance", "unknown provenance");
            }
        }
        if (auto it = je[i].find("similarity"); it != je[i].end()) {
            if (!it->is_number()) throw SchemaViolation(p + "/similarity", "expected a number");
            e.similarity = it->get<double>();
        }
        edges.push_back(e);
    }

    KnowledgeGraph g;
    try {
        g = KnowledgeGraph(std::move(nodes), std::move(edges));
    } catch (const SchemaViolation&) {
        throw;
    } catch (const Error& err) {
        throw SchemaViolation("", err.what());
    }

    if (auto it = j.find("features"); it != j.end()) {
        if (!it->is_object()) throw SchemaViolation("/features", "expected an object");
        for (const auto& [key, value] : it->items()) {
            auto stage = stage_from_string(key);
            if (!stage) throw SchemaViolation("/features/" + key, "unknown feature stage");
            Matrix m = matrix_from_json(value, "/features/" + key);
            try {
                g = g.with_features(*stage, std::move(m));
            } catch (const Error& err) {
                throw SchemaViolation("/features/" + key, err.what());
            }
        }
    }
    return g;
}

std::string dump_graph(const KnowledgeGraph& g) { return graph_to_json(g).dump(1) + "\n"; }

void export_json(const KnowledgeGraph& g, const std::filesystem::path& path) { write_file(path, dump_graph(g)); }

KnowledgeGraph import_json(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw SchemaViolation("", std::string("invalid JSON: ") + e.what());
    }
    return graph_from_json(j);
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << contents;
    if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace autokg
