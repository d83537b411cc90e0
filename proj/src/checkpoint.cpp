#include <json.hpp>

#include "autokg/error.hpp"
#include "autokg/gnn.hpp"
#include "autokg/graph_io.hpp"

namespace autokg::gnn {
namespace {

using nlohmann::json;

constexpr int kCheckpointVersion = 1;

json to_json(const Matrix& m) {
    json rows = json::array();
    for (std::size_t r = 0; r < m.rows(); ++r) rows.push_back(std::vector<double>(m.row(r).begin(), m.row(r).end()));
    return rows;
}

Matrix matrix_at(const json& j, const std::string& key, std::size_t rows, std::size_t cols) {
    if (!j.contains(key) || !j[key].is_array()) throw SchemaViolation("/" + key, "missing matrix");
    std::vector<std::vector<double>> data;
    try {
        data = j[key].get<std::vector<std::vector<double>>>();
    } catch (const json::exception& e) {
        throw SchemaViolation("/" + key, e.what());
    }
    if (data.size() != rows) throw SchemaViolation("/" + key, "wrong row count");
    for (const auto& r : data)
        if (r.size() != cols) throw SchemaViolation("/" + key, "wrong column count");
    return Matrix::from_rows(data);
}

std::vector<double> vector_at(const json& j, const std::string& key, std::size_t len) {
    if (!j.contains(key) || !j[key].is_array()) throw SchemaViolation("/" + key, "missing vector");
    std::vector<double> v;
    try {
        v = j[key].get<std::vector<double>>();
    } catch (const json::exception& e) {
        throw SchemaViolation("/" + key, e.what());
    }
    if (v.size() != len) throw SchemaViolation("/" + key, "wrong length");
    return v;
}

}  // namespace

void save_checkpoint(const LayerParams& params, std::uint64_t seed, double slope, const std::filesystem::path& path) {
    const ModelDims d = params.dims();
    json w_nr = json::array();
    for (const Matrix& m : params.w_nr) w_nr.push_back(to_json(m));
    json j = {{"version", kCheckpointVersion},
              {"dims", {{"input_dim", d.input_dim}, {"hidden", d.hidden}, {"cheb_order", d.cheb_order}}},
              {"seed", seed},
              {"leaky_relu_slope", slope},
              {"w_fd", to_json(params.w_fd)},
              {"a_fd", params.a_fd},
              {"w_tr", to_json(params.w_tr)},
              {"w_nr", w_nr},
              {"w_s", to_json(params.w_s)},
              {"a_s", params.a_s}};
    write_file(path, j.dump() + "\n");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw SchemaViolation("", std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object() || j.value("version", 0) != kCheckpointVersion)
        throw SchemaViolation("/version", "unsupported checkpoint version");
    if (!j.contains("dims") || !j["dims"].is_object()) throw SchemaViolation("/dims", "missing");
    ModelDims d;
    try {
        d.input_dim = j["dims"].at("input_dim").get<std::size_t>();
        d.hidden = j["dims"].at("hidden").get<std::size_t>();
        d.cheb_order = j["dims"].at("cheb_order").get<std::size_t>();
    } catch (const json::exception& e) {
        throw SchemaViolation("/dims", e.what());
    }
    Checkpoint ck;
    ck.seed = j.value("seed", std::uint64_t{0});
    ck.leaky_relu_slope = j.value("leaky_relu_slope", 0.2);
    const std::size_t f = d.hidden;
    ck.params.w_fd = matrix_at(j, "w_fd", f, d.input_dim);
    ck.params.a_fd = vector_at(j, "a_fd", 2 * f);
    ck.params.w_tr = matrix_at(j, "w_tr", f, f);
    if (!j.contains("w_nr") || !j["w_nr"].is_array() || j["w_nr"].size() != d.cheb_order)
        throw SchemaViolation("/w_nr", "expected cheb_order matrices");
    for (std::size_t k = 0; k < d.cheb_order; ++k) {
        json wrapper = {{"m", j["w_nr"][k]}};
        ck.params.w_nr.push_back(matrix_at(wrapper, "m", f, f));
    }
    ck.params.w_s = matrix_at(j, "w_s", f, 2 * f);
    ck.params.a_s = vector_at(j, "a_s", 2 * f);
    return ck;
}

}  // namespace autokg::gnn
