#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "autokg/error.hpp"
#include "autokg/graph.hpp"
#include "autokg/graph_io.hpp"
#include "autokg/rng.hpp"
#include "autokg/unicode.hpp"
#include "test_util.hpp"

using namespace autokg;
using testutil::graph_from_pairs;
using testutil::make_nodes;

namespace {

Eigen::VectorXd eigenvalues(const Matrix& m) {
    Eigen::MatrixXd e(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) e(i, j) = m(i, j);
    return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(e).eigenvalues();
}

std::filesystem::path temp_path(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("autokg_core_" + name);
}

}  // namespace

TEST_SUITE("matrix") {
    TEST_CASE("identity and transpose") {
        const Matrix i3 = Matrix::identity(3);
        CHECK(i3(0, 0) == 1.0);
        CHECK(i3(0, 1) == 0.0);
        const Matrix a = Matrix::from_rows({{1, 2, 3}, {4, 5, 6}});
        const Matrix t = a.transposed();
        CHECK(t.rows() == 3);
        CHECK(t(2, 1) == 6.0);
        CHECK(matmul(a, i3) == a);
    }

    TEST_CASE("shape errors") {
        CHECK_THROWS_AS(matmul(Matrix(2, 3), Matrix(2, 3)), ShapeMismatch);
        CHECK_THROWS_AS(Matrix::from_rows({{1, 2}, {3}}), ShapeMismatch);
        CHECK_THROWS_AS(hconcat(Matrix(2, 1), Matrix(3, 1)), ShapeMismatch);
    }

    TEST_CASE("cosine") {
        const std::vector<double> a{1, 0}, b{0, 1}, c{2, 0}, z{0, 0};
        CHECK(cosine(a, b) == doctest::Approx(0.0));
        CHECK(cosine(a, c) == doctest::Approx(1.0));
        CHECK(cosine(a, z) == 0.0);
        const std::vector<double> d{-3, 0};
        CHECK(cosine(a, d) == doctest::Approx(-1.0));
    }

    TEST_CASE("hconcat") {
        const Matrix a = Matrix::from_rows({{1}, {2}});
        const Matrix b = Matrix::from_rows({{3, 4}, {5, 6}});
        CHECK(hconcat(a, b) == Matrix::from_rows({{1, 3, 4}, {2, 5, 6}}));
    }
}

TEST_SUITE("rng") {
    TEST_CASE("same seed same stream") {
        Rng a(42), b(42), c(43);
        for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
        CHECK(Rng(42).next_u64() != c.next_u64());
    }

    TEST_CASE("uniform, index and normal stay in range") {
        Rng r(7);
        double sum = 0, sq = 0;
        const int n = 20000;
        for (int i = 0; i < n; ++i) {
            const double u = r.uniform();
            CHECK((u >= 0.0 && u < 1.0));
            CHECK(r.index(5) < 5);
            const double z = r.normal();
            sum += z;
            sq += z * z;
        }
        CHECK(std::abs(sum / n) < 0.05);
        CHECK(std::abs(sq / n - 1.0) < 0.05);
    }

    TEST_CASE("derived seeds differ per stream") {
        CHECK(derive_seed(1, 0) != derive_seed(1, 1));
        CHECK(derive_seed(1, 0) != derive_seed(2, 0));
        CHECK(derive_seed(5, 9) == derive_seed(5, 9));
    }
}

TEST_SUITE("unicode") {
    TEST_CASE("nfc composes Bengali vowel signs") {
        // U+09C7 U+09BE composes to U+09CB.
        const std::string decomposed = "\xE0\xA6\x95\xE0\xA7\x87\xE0\xA6\xBE";
        const std::string composed = "\xE0\xA6\x95\xE0\xA7\x8B";
        CHECK(unicode::nfc(decomposed) == composed);
        CHECK(unicode::is_nfc(composed));
        CHECK_FALSE(unicode::is_nfc(decomposed));
    }

    TEST_CASE("length counts code points") {
        CHECK(unicode::length("স্বাধীনতা") == 9);
        CHECK(unicode::length("abc") == 3);
        CHECK(unicode::length("") == 0);
    }

    TEST_CASE("trim and classes") {
        CHECK(unicode::trim("  \t x y \n") == "x y");
        CHECK(unicode::is_space(U' '));
        CHECK(unicode::is_punct(U'।'));
        CHECK_FALSE(unicode::is_punct(U'ক'));
        CHECK(unicode::to_utf8(unicode::to_u32("বাংলা")) == "বাংলা");
    }
}

TEST_SUITE("graph") {
    TEST_CASE("edges are canonicalised and sorted") {
        const KnowledgeGraph g = graph_from_pairs(4, {{3, 1}, {0, 2}, {1, 0}});
        REQUIRE(g.num_edges() == 3);
        CHECK(g.edges()[0].src == 0);
        CHECK(g.edges()[0].dst == 1);
        CHECK(g.edges()[2].src == 1);
        CHECK(g.edges()[2].dst == 3);
        CHECK(g.has_edge(3, 1));
        CHECK(g.has_edge(1, 3));
        CHECK_FALSE(g.has_edge(2, 3));
        CHECK(g.degree(1) == 2);
        CHECK(g.neighbors(1) == std::vector<NodeId>{0, 3});
    }

    TEST_CASE("invariant violations") {
        CHECK_THROWS_AS(graph_from_pairs(3, {{1, 1}}), SchemaViolation);
        CHECK_THROWS_AS(graph_from_pairs(3, {{0, 1}, {1, 0}}), SchemaViolation);
        CHECK_THROWS_AS(graph_from_pairs(3, {{0, 5}}), SchemaViolation);
        CHECK_THROWS_AS(graph_from_pairs(3, {{0, 1}}, {-1.0}), SchemaViolation);
        CHECK_THROWS_AS(graph_from_pairs(3, {{0, 1}}, {NAN}), SchemaViolation);
        auto nodes = make_nodes(2);
        nodes[1].id = 5;
        CHECK_THROWS_AS(KnowledgeGraph(nodes, {}), SchemaViolation);
        nodes = make_nodes(2);
        nodes[0].surface = "";
        CHECK_THROWS_AS(KnowledgeGraph(nodes, {}), SchemaViolation);
    }

    TEST_CASE("surfaces are stored in NFC") {
        auto nodes = make_nodes(1);
        nodes[0].surface = "\xE0\xA6\x95\xE0\xA7\x87\xE0\xA6\xBE";
        const KnowledgeGraph g(nodes, {});
        CHECK(g.nodes()[0].surface == "\xE0\xA6\x95\xE0\xA7\x8B");
    }

    TEST_CASE("features must match the node count and be finite") {
        const KnowledgeGraph g = graph_from_pairs(3, {{0, 1}});
        CHECK_THROWS_AS(g.with_features(Stage::Raw, Matrix(2, 4)), ShapeMismatch);
        Matrix bad(3, 2);
        bad(1, 1) = INFINITY;
        CHECK_THROWS_AS(g.with_features(Stage::Raw, bad), ShapeMismatch);
        const KnowledgeGraph h = g.with_features(Stage::Raw, Matrix(3, 2, 1.0));
        REQUIRE(h.feature(Stage::Raw) != nullptr);
        CHECK(h.feature(Stage::Final) == nullptr);
    }

    TEST_CASE("path graph laplacian by hand") {
        const KnowledgeGraph g = graph_from_pairs(3, {{0, 1}, {1, 2}});
        const Matrix l = normalized_laplacian(g);
        const double s = 1.0 / std::sqrt(2.0);
        CHECK(l(0, 0) == doctest::Approx(1.0));
        CHECK(l(0, 1) == doctest::Approx(-s));
        CHECK(l(1, 2) == doctest::Approx(-s));
        CHECK(l(0, 2) == 0.0);
        // Eigenvalues of the 3-path normalised Laplacian are 0, 1, 2.
        const Eigen::VectorXd ev = eigenvalues(l);
        CHECK(ev(0) == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(ev(1) == doctest::Approx(1.0));
        CHECK(ev(2) == doctest::Approx(2.0));
        CHECK(estimate_lambda_max(l) == doctest::Approx(2.0).epsilon(1e-6));
    }

    TEST_CASE("isolated nodes give zero rows") {
        const KnowledgeGraph g = graph_from_pairs(3, {{0, 1}});
        const Matrix l = normalized_laplacian(g);
        for (std::size_t j = 0; j < 3; ++j) {
            CHECK(l(2, j) == 0.0);
            CHECK(l(j, 2) == 0.0);
        }
    }

    TEST_CASE("laplacian spectrum lies in [0, 2] and the scaled one in [-1, 1]") {
        for (std::uint64_t seed = 0; seed < 40; ++seed) {
            CAPTURE(seed);
            const KnowledgeGraph g = testutil::random_graph(3 + seed % 9, 0.4, seed, seed % 2 == 1);
            const Matrix l = normalized_laplacian(g);
            const Eigen::VectorXd ev = eigenvalues(l);
            CHECK(ev.minCoeff() >= -1e-12);
            CHECK(ev.maxCoeff() <= 2.0 + 1e-12);
            const double est = estimate_lambda_max(l);
            CHECK(est <= ev.maxCoeff() + 1e-9 + (ev.maxCoeff() < 1e-6 ? 1e-6 : 0.0));
            const Matrix lhat = scaled_laplacian(l, est * kLambdaSafetyFactor);
            const Eigen::VectorXd sev = eigenvalues(lhat);
            CHECK(sev.minCoeff() >= -1.0 - 1e-9);
            CHECK(sev.maxCoeff() <= 1.0 + 1e-9);
        }
    }

    TEST_CASE("scaled laplacian rejects non-positive lambda") {
        const Matrix l = normalized_laplacian(graph_from_pairs(2, {{0, 1}}));
        CHECK_THROWS_AS(scaled_laplacian(l, 0.0), NonPositiveLambda);
        CHECK_THROWS_AS(scaled_laplacian(l, -1.0), NonPositiveLambda);
    }

    TEST_CASE("adjacency is symmetric with weights") {
        const Matrix a = adjacency(graph_from_pairs(3, {{0, 2}}, {2.5}));
        CHECK(a(0, 2) == 2.5);
        CHECK(a(2, 0) == 2.5);
        CHECK(a(0, 1) == 0.0);
    }
}

TEST_SUITE("graph_io") {
    KnowledgeGraph sample() {
        std::vector<Entity> nodes{{0, "স্বাধীনতা", "CONCEPT", {"NOUN"}}, {1, "পতাকা", "SYMBOL", {}}, {2, "মা", "PERSON", {}}};
        std::vector<Edge> edges{{0, 1, 1.0, Provenance::LlmSuggested, 0.953}, {1, 2, 0.5, Provenance::TypeMatch, std::nullopt}};
        Matrix f = testutil::random_matrix(3, 4, 9);
        f(0, 0) = 0.1;
        f(0, 1) = 1.0 / 3.0;
        return KnowledgeGraph(nodes, edges).with_features(Stage::Final, f);
    }

    TEST_CASE("json round trip is exact") {
        const KnowledgeGraph g = sample();
        const KnowledgeGraph back = graph_from_json(nlohmann::json::parse(dump_graph(g)));
        CHECK(back == g);
        CHECK(dump_graph(back) == dump_graph(g));
        CHECK(dump_graph(g).find("0.1,") != std::string::npos);
    }

    TEST_CASE("file round trip") {
        const auto p = temp_path("rt.json");
        export_json(sample(), p);
        CHECK(import_json(p) == sample());
        std::filesystem::remove(p);
    }

    TEST_CASE("truncated file is a schema violation") {
        const std::string full = dump_graph(sample());
        const auto p = temp_path("trunc.json");
        write_file(p, full.substr(0, full.size() / 2));
        CHECK_THROWS_AS(import_json(p), SchemaViolation);
        std::filesystem::remove(p);
    }

    TEST_CASE("schema errors carry a field path") {
        auto j = graph_to_json(sample());
        j["edges"][1]["provenance"] = "guess";
        try {
            graph_from_json(j);
            FAIL("expected SchemaViolation");
        } catch (const SchemaViolation& e) {
            CHECK(e.field() == "/edges/1/provenance");
        }
        j = graph_to_json(sample());
        j["features"]["final"][0] = nlohmann::json::array({1.0});
        CHECK_THROWS_AS(graph_from_json(j), SchemaViolation);
        j = graph_to_json(sample());
        j.erase("nodes");
        CHECK_THROWS_AS(graph_from_json(j), SchemaViolation);
    }

    TEST_CASE("missing file is an IO error") {
        CHECK_THROWS_AS(import_json("/nonexistent/graph.json"), IoError);
    }
}
