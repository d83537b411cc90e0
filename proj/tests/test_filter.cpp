#include <doctest.h>

#include <cmath>
#include <set>

#include "autokg/error.hpp"
#include "autokg/filter.hpp"
#include "test_util.hpp"

using namespace autokg;
using testutil::graph_from_pairs;

namespace {

// Features on the unit circle at the given angles.
Matrix angles(const std::vector<double>& theta) {
    Matrix m(theta.size(), 2);
    for (std::size_t i = 0; i < theta.size(); ++i) {
        m(i, 0) = std::cos(theta[i]);
        m(i, 1) = std::sin(theta[i]);
    }
    return m;
}

}  // namespace

TEST_SUITE("prune") {
    TEST_CASE("retained count is ceil(0.9 M) in exact arithmetic") {
        for (std::size_t m = 0; m <= 500; ++m) {
            CAPTURE(m);
            CHECK(retained_edge_count(m, 0.9) == (9 * m + 9) / 10);
            CHECK(retained_edge_count(m, 1.0) == m);
            CHECK(retained_edge_count(m, 0.5) == (m + 1) / 2);
        }
    }

    TEST_CASE("drops the least similar edge") {
        // Path 0-1-2-3 with angles making edge 1-2 the least aligned.
        const KnowledgeGraph g = graph_from_pairs(4, {{0, 1}, {1, 2}, {2, 3}});
        const Matrix h = angles({0.0, 0.1, 1.4, 1.5});
        PruneConfig cfg;
        cfg.retain_fraction = 0.6;  // ceil(1.8) = 2
        const PruneResult r = prune(g, h, cfg);
        CHECK(r.graph.num_edges() == 2);
        REQUIRE(r.removed.size() == 1);
        CHECK(r.removed[0].src == 1);
        CHECK(r.removed[0].dst == 2);
        REQUIRE(r.removed[0].similarity.has_value());
        CHECK(*r.removed[0].similarity == doctest::Approx(std::cos(1.3)));
        for (const Edge& e : r.graph.edges()) CHECK(*e.similarity == doctest::Approx(std::cos(0.1)));
        REQUIRE(r.graph.feature(Stage::Final) != nullptr);
        CHECK(*r.graph.feature(Stage::Final) == h);
    }

    TEST_CASE("ties break by edge order") {
        const KnowledgeGraph g = graph_from_pairs(3, {{0, 1}, {1, 2}, {0, 2}});
        const Matrix h(3, 2, 1.0);
        PruneConfig cfg;
        cfg.retain_fraction = 0.5;  // keeps 2 of 3
        const PruneResult r = prune(g, h, cfg);
        REQUIRE(r.removed.size() == 1);
        CHECK(r.removed[0].src == 1);
        CHECK(r.removed[0].dst == 2);
    }

    TEST_CASE("absolute threshold") {
        const KnowledgeGraph g = graph_from_pairs(4, {{0, 1}, {1, 2}, {2, 3}});
        PruneConfig cfg;
        cfg.mode = PruneMode::AbsoluteThreshold;
        cfg.gamma = 0.5;
        const PruneResult r = prune(g, angles({0.0, 0.1, 1.4, 1.5}), cfg);
        CHECK(r.graph.num_edges() == 2);
        cfg.gamma = -1.0;
        CHECK(prune(g, angles({0.0, 0.1, 1.4, 1.5}), cfg).removed.empty());
    }

    TEST_CASE("config validation") {
        PruneConfig cfg;
        cfg.retain_fraction = 0.0;
        CHECK_THROWS_AS(cfg.validate(), ConfigError);
        cfg.retain_fraction = 1.5;
        CHECK_THROWS_AS(cfg.validate(), ConfigError);
        cfg = {};
        cfg.mode = PruneMode::AbsoluteThreshold;
        cfg.gamma = 2.0;
        CHECK_THROWS_AS(cfg.validate(), ConfigError);
    }

    TEST_CASE("shape mismatch") {
        const KnowledgeGraph g = graph_from_pairs(3, {{0, 1}});
        CHECK_THROWS_AS(prune(g, Matrix(2, 2), PruneConfig{}), ShapeMismatch);
    }

    TEST_CASE("pruning never lowers A-SFAS") {
        for (std::uint64_t seed = 0; seed < 100; ++seed) {
            CAPTURE(seed);
            KnowledgeGraph g = testutil::random_graph(4 + seed % 12, 0.4, seed);
            if (g.num_edges() == 0) continue;
            const Matrix h = testutil::random_matrix(g.num_nodes(), 5, seed + 1);
            const double before = asfas(g, h);
            const PruneResult r = prune(g, h, PruneConfig{});
            const double after = asfas(r.graph, h);
            CHECK(after >= before - 1e-15);
            if (!r.removed.empty()) CHECK(after > before);
        }
    }
}

TEST_SUITE("asfas") {
    TEST_CASE("mean edge cosine") {
        const KnowledgeGraph g = graph_from_pairs(3, {{0, 1}, {1, 2}});
        const Matrix h = angles({0.0, M_PI / 2, M_PI / 2});
        CHECK(asfas(g, h) == doctest::Approx(0.5));
    }

    TEST_CASE("bounded by one") {
        const KnowledgeGraph g = graph_from_pairs(2, {{0, 1}});
        CHECK(asfas(g, Matrix(2, 3, 1.0)) == doctest::Approx(1.0));
        CHECK(asfas(g, Matrix::from_rows({{1.0}, {-2.0}})) == doctest::Approx(-1.0));
    }

    TEST_CASE("empty edge set") {
        CHECK_THROWS_AS(asfas(graph_from_pairs(2, {}), Matrix(2, 2)), EmptyEdgeSet);
    }
}

TEST_SUITE("synthetic") {
    TEST_CASE("cluster structure and planted noise") {
        SyntheticSpec s;
        s.dim = 32;
        s.noise_edges = 7;
        s.seed = 3;
        const SyntheticGraph sg = generate_synthetic(s);
        CHECK(sg.graph.num_nodes() == 50);
        CHECK(sg.is_noise.size() == sg.graph.num_edges());
        std::size_t noise = 0;
        for (std::size_t i = 0; i < sg.graph.num_edges(); ++i) {
            const Edge& e = sg.graph.edges()[i];
            const bool cross = sg.cluster_of[e.src] != sg.cluster_of[e.dst];
            CHECK(cross == sg.is_noise[i]);
            noise += sg.is_noise[i];
        }
        CHECK(noise == 7);
        const Matrix* x = sg.graph.feature(Stage::Raw);
        REQUIRE(x != nullptr);
        CHECK(l2_norm(x->row(0)) == doctest::Approx(1.0));
        CHECK(cosine(x->row(0), x->row(1)) > cosine(x->row(0), x->row(10)));
    }

    TEST_CASE("noise fraction") {
        SyntheticSpec s;
        s.dim = 16;
        s.noise_fraction = 0.1;
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            s.seed = seed;
            const SyntheticGraph sg = generate_synthetic(s);
            std::size_t noise = 0;
            for (bool b : sg.is_noise) noise += b;
            const std::size_t intra = sg.graph.num_edges() - noise;
            CHECK(noise == static_cast<std::size_t>(std::llround(intra * 0.1 / 0.9)));
            const double frac = static_cast<double>(noise) / sg.graph.num_edges();
            CHECK(std::abs(frac - 0.1) < 0.02);
        }
    }

    TEST_CASE("deterministic per seed") {
        SyntheticSpec s;
        s.dim = 8;
        s.seed = 5;
        CHECK(generate_synthetic(s).graph == generate_synthetic(s).graph);
        SyntheticSpec t = s;
        t.seed = 6;
        CHECK_FALSE(generate_synthetic(s).graph == generate_synthetic(t).graph);
    }

    TEST_CASE("too much noise") {
        SyntheticSpec s;
        s.clusters = 2;
        s.nodes_per_cluster = 2;
        s.dim = 4;
        s.noise_edges = 5;
        CHECK_THROWS_AS(generate_synthetic(s), NotEnoughNonEdges);
    }

    TEST_CASE("noise removal precision and recall") {
        SyntheticSpec s;
        s.dim = 8;
        s.noise_edges = 4;
        const SyntheticGraph sg = generate_synthetic(s);
        std::vector<Edge> removed;
        std::size_t taken = 0;
        for (std::size_t i = 0; i < sg.graph.num_edges(); ++i)
            if (sg.is_noise[i] && taken < 2) {
                removed.push_back(sg.graph.edges()[i]);
                ++taken;
            }
        for (std::size_t i = 0; i < sg.graph.num_edges(); ++i)
            if (!sg.is_noise[i]) {
                removed.push_back(sg.graph.edges()[i]);
                break;
            }
        const NoiseReport r = noise_removal_report(removed, sg);
        CHECK(r.precision == doctest::Approx(2.0 / 3.0));
        CHECK(r.recall == doctest::Approx(0.5));
        const NoiseReport none = noise_removal_report({}, sg);
        CHECK(none.precision == 0.0);
        CHECK(none.recall == 0.0);
    }
}
