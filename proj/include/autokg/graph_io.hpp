#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "autokg/graph.hpp"

namespace autokg {

// Canonical graph JSON: keys sorted, UTF-8, doubles in shortest round-trip
// form. Edges may carry an optional "similarity".
nlohmann::json graph_to_json(const KnowledgeGraph& g);
KnowledgeGraph graph_from_json(const nlohmann::json& j);  // throws SchemaViolation

std::string dump_graph(const KnowledgeGraph& g);
void export_json(const KnowledgeGraph& g, const std::filesystem::path& path);  // throws IoError
KnowledgeGraph import_json(const std::filesystem::path& path);                 // throws IoError, SchemaViolation

// Reads a whole file; throws IoError.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& contents);

}  // namespace autokg
