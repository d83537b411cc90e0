#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <set>

#include "autokg/error.hpp"
#include "autokg/gnn.hpp"
#include "autokg/graph_io.hpp"
#include "autokg/train.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace autokg;
using namespace autokg::gnn;
using testutil::naive_matmul;
using testutil::random_graph;
using testutil::random_matrix;
using namespace oracle;

namespace {

KnowledgeGraph permuted(const KnowledgeGraph& g, const std::vector<std::size_t>& perm) {
    std::vector<Edge> edges;
    for (Edge e : g.edges()) {
        e.src = perm[e.src];
        e.dst = perm[e.dst];
        edges.push_back(e);
    }
    return KnowledgeGraph(testutil::make_nodes(g.num_nodes()), edges);
}

Matrix permute_rows(const Matrix& m, const std::vector<std::size_t>& perm) {
    Matrix out(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t c = 0; c < m.cols(); ++c) out(perm[i], c) = m(i, c);
    return out;
}

void check_rows_sum_to_one(const Attention& att) {
    for (const auto& row : att.alpha) {
        const double s = std::accumulate(row.begin(), row.end(), 0.0);
        CHECK(std::abs(s - 1.0) <= 1e-9);
        for (double a : row) CHECK(a >= 0.0);
    }
}

}  // namespace

TEST_SUITE("parameters") {
    TEST_CASE("shapes and seeded determinism") {
        const ModelDims dims{10, 4, 3};
        const LayerParams p = init_params(dims, 5);
        CHECK(p.w_fd.rows() == 4);
        CHECK(p.w_fd.cols() == 10);
        CHECK(p.a_fd.size() == 8);
        CHECK(p.w_nr.size() == 3);
        CHECK(p.w_s.cols() == 8);
        CHECK(p.a_s.size() == 8);
        CHECK(p.dims().input_dim == 10);
        CHECK(p == init_params(dims, 5));
        CHECK_FALSE(p == init_params(dims, 6));
        for (double v : p.w_tr.data()) CHECK(std::abs(v) < 0.1);
    }

    TEST_CASE("checkpoint round trip") {
        const auto path = std::filesystem::temp_directory_path() / "autokg_ckpt.json";
        const LayerParams p = init_params({6, 3, 2}, 11);
        save_checkpoint(p, 11, 0.2, path);
        const Checkpoint c = load_checkpoint(path);
        CHECK(c.params == p);
        CHECK(c.seed == 11);
        CHECK(c.leaky_relu_slope == 0.2);
        auto j = nlohmann::json::parse(read_file(path));
        j["version"] = 99;
        write_file(path, j.dump());
        CHECK_THROWS_AS(load_checkpoint(path), SchemaViolation);
        std::filesystem::remove(path);
    }
}

TEST_SUITE("forward oracles") {
    TEST_CASE("denoising layer matches a dense restatement") {
        for (std::uint64_t seed = 0; seed < 30; ++seed) {
            CAPTURE(seed);
            const std::size_t n = 2 + seed % 7;
            const KnowledgeGraph g = random_graph(n, 0.5, seed);
            const LayerParams p = init_params({5, 3, 2}, seed, 0.8);
            const Matrix x = random_matrix(n, 5, seed + 100);
            const FdnForward fwd = fdn_forward_full(x, g, p.w_fd, p.a_fd, 0.2);
            CHECK(max_abs_diff(fwd.out, fdn_oracle(x, g, p, 0.2)) < 1e-12);
            check_rows_sum_to_one(fwd.att);
        }
    }

    TEST_CASE("topological layer matches the dense normalised adjacency") {
        for (std::uint64_t seed = 0; seed < 50; ++seed) {
            CAPTURE(seed);
            const std::size_t n = 1 + seed % 8;
            const KnowledgeGraph g = random_graph(n, 0.45, seed, seed % 2 == 0);
            const Matrix x = random_matrix(n, 4, seed + 7);
            const Matrix w = random_matrix(4, 4, seed + 8);
            CHECK(max_abs_diff(topo_forward(x, g, w), topo_oracle(x, g, w)) < 1e-12);
        }
    }

    TEST_CASE("chebyshev layer matches the polynomial oracle") {
        for (std::uint64_t seed = 0; seed < 50; ++seed) {
            for (std::size_t k = 1; k <= 4; ++k) {
                CAPTURE(seed);
                CAPTURE(k);
                const std::size_t n = 1 + seed % 8;
                const KnowledgeGraph g = random_graph(n, 0.45, seed, seed % 3 == 0);
                const Matrix lhat = graph_scaled_laplacian(g, seed);
                const Matrix x = random_matrix(n, 3, seed + 1);
                std::vector<Matrix> w;
                for (std::size_t t = 0; t < k; ++t) w.push_back(random_matrix(3, 3, seed * 10 + t));
                CHECK(max_abs_diff(cheb_forward(x, lhat, w, k), cheb_oracle(x, lhat, w)) < 1e-10);
            }
        }
    }

    TEST_CASE("chebyshev recursion on an arbitrary symmetric operator") {
        // Spectrum outside [-1, 1] exercises the hyperbolic branch of the oracle.
        const Matrix s = Matrix::from_rows({{0.5, 1.2, 0.0}, {1.2, -0.3, 0.4}, {0.0, 0.4, 0.9}});
        const Matrix x = random_matrix(3, 2, 1);
        std::vector<Matrix> w{random_matrix(2, 2, 2), random_matrix(2, 2, 3), random_matrix(2, 2, 4), random_matrix(2, 2, 5)};
        CHECK(max_abs_diff(cheb_forward(x, s, w, 4), cheb_oracle(x, s, w)) < 1e-10);
    }

    TEST_CASE("semantic layer matches a dense restatement") {
        for (std::uint64_t seed = 0; seed < 30; ++seed) {
            CAPTURE(seed);
            const std::size_t n = 1 + seed % 8;
            const KnowledgeGraph g = random_graph(n, 0.5, seed);
            const Matrix x = random_matrix(n, 6, seed + 3);
            const Matrix w = random_matrix(3, 6, seed + 4);
            const std::vector<double> a = random_matrix(1, 6, seed + 5).data();
            const SemanticForward fwd = semantic_forward_full(x, g, w, a, 0.2);
            CHECK(max_abs_diff(fwd.out, semantic_oracle(x, g, w, a, 0.2)) < 1e-12);
            check_rows_sum_to_one(fwd.att);
        }
    }

    TEST_CASE("filter stack concatenates topology and locality") {
        const KnowledgeGraph g = random_graph(6, 0.5, 3);
        const LayerParams p = init_params({5, 3, 3}, 3, 0.5);
        const Matrix xd = random_matrix(6, 3, 4);
        const Matrix lhat = graph_scaled_laplacian(g);
        const FilterForward f = filter_forward_full(xd, g, lhat, p, 0.2);
        const Matrix concat = hconcat(topo_oracle(xd, g, p.w_tr), cheb_oracle(xd, lhat, p.w_nr));
        CHECK(max_abs_diff(f.concat, concat) < 1e-12);
        CHECK(max_abs_diff(f.out(), semantic_oracle(concat, g, p.w_s, p.a_s, 0.2)) < 1e-12);
        CHECK(f.out() == filter_forward(xd, g, lhat, p, 0.2));
    }

    TEST_CASE("isolated nodes attend only to themselves") {
        const KnowledgeGraph g = testutil::graph_from_pairs(3, {{0, 1}});
        const LayerParams p = init_params({4, 2, 2}, 1, 0.5);
        const Matrix x = random_matrix(3, 4, 2);
        const FdnForward fwd = fdn_forward_full(x, g, p.w_fd, p.a_fd, 0.2);
        REQUIRE(fwd.att.nbrs[2].size() == 1);
        CHECK(fwd.att.alpha[2][0] == 1.0);
        for (std::size_t c = 0; c < 2; ++c) CHECK(fwd.out(2, c) == fwd.y(2, c));
    }

    TEST_CASE("shape mismatches are rejected") {
        const KnowledgeGraph g = random_graph(4, 0.5, 1);
        const LayerParams p = init_params({5, 3, 2}, 1);
        CHECK_THROWS_AS(fdn_forward(random_matrix(3, 5, 1), g, p), ShapeMismatch);
        CHECK_THROWS_AS(fdn_forward(random_matrix(4, 6, 1), g, p), ShapeMismatch);
    }
}

TEST_SUITE("equivariance") {
    TEST_CASE("relabelling nodes permutes every layer output") {
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            CAPTURE(seed);
            const std::size_t n = 6;
            const KnowledgeGraph g = random_graph(n, 0.5, seed);
            std::vector<std::size_t> perm(n);
            std::iota(perm.begin(), perm.end(), 0);
            Rng rng(seed);
            for (std::size_t i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng.index(i + 1)]);
            const KnowledgeGraph gp = permuted(g, perm);
            const LayerParams p = init_params({5, 3, 3}, seed, 0.5);
            const Matrix x = random_matrix(n, 5, seed + 1);
            const Matrix xp = permute_rows(x, perm);

            CHECK(max_abs_diff(permute_rows(fdn_forward(x, g, p), perm), fdn_forward(xp, gp, p)) < 1e-12);
            const Matrix xd = fdn_forward(x, g, p);
            const Matrix xdp = permute_rows(xd, perm);
            // Same lambda estimate on both labellings keeps Lhat exactly comparable.
            const double lam = estimate_lambda_max(normalized_laplacian(g)) * kLambdaSafetyFactor;
            const Matrix lh = scaled_laplacian(normalized_laplacian(g), lam);
            const Matrix lhp = scaled_laplacian(normalized_laplacian(gp), lam);
            CHECK(max_abs_diff(permute_rows(filter_forward(xd, g, lh, p), perm), filter_forward(xdp, gp, lhp, p)) < 1e-11);
        }
    }
}

TEST_SUITE("loss and sampling") {
    TEST_CASE("loss matches its definition") {
        const Matrix z = random_matrix(4, 3, 9);
        const std::vector<NodePair> pos{{0, 1}, {2, 3}};
        const std::vector<NodePair> neg{{0, 2}};
        auto dot = [&](std::size_t i, std::size_t j) {
            double s = 0;
            for (std::size_t c = 0; c < 3; ++c) s += z(i, c) * z(j, c);
            return s;
        };
        auto sig = [](double x) { return 1.0 / (1.0 + std::exp(-x)); };
        const double want = -(std::log(sig(dot(0, 1))) + std::log(sig(dot(2, 3)))) / 2.0 - std::log(1.0 - sig(dot(0, 2)));
        CHECK(self_supervised_loss(z, pos, neg) == doctest::Approx(want).epsilon(1e-12));
        CHECK(self_supervised_loss(z, {}, {}) == 0.0);
    }

    TEST_CASE("loss gradient matches finite differences") {
        Matrix z = random_matrix(5, 3, 4);
        const std::vector<NodePair> pos{{0, 1}, {1, 2}, {3, 4}};
        const std::vector<NodePair> neg{{0, 4}, {2, 3}};
        Matrix grad;
        self_supervised_loss(z, pos, neg, &grad);
        for (std::size_t k = 0; k < z.data().size(); ++k) {
            const double old = z.data()[k];
            z.data()[k] = old + 1e-6;
            const double up = self_supervised_loss(z, pos, neg);
            z.data()[k] = old - 1e-6;
            const double down = self_supervised_loss(z, pos, neg);
            z.data()[k] = old;
            CHECK(grad.data()[k] == doctest::Approx((up - down) / 2e-6).epsilon(1e-6));
        }
    }

    TEST_CASE("clamping keeps the loss finite") {
        Matrix z(2, 1);
        z(0, 0) = 100;
        z(1, 0) = 100;
        const double l = self_supervised_loss(z, {}, std::vector<NodePair>{{0, 1}});
        CHECK(std::isfinite(l));
        CHECK(l == doctest::Approx(-std::log(1e-7)).epsilon(1e-6));
    }

    TEST_CASE("negative samples are distinct non-edges") {
        const KnowledgeGraph g = random_graph(9, 0.4, 2);
        const std::size_t avail = count_non_edges(g);
        CHECK(avail == 9 * 8 / 2 - g.num_edges());
        const auto neg = negative_sample(g, avail, 3);
        CHECK(neg.size() == avail);
        std::set<NodePair> seen(neg.begin(), neg.end());
        CHECK(seen.size() == avail);
        for (const auto& [a, b] : neg) {
            CHECK(a < b);
            CHECK_FALSE(g.has_edge(a, b));
        }
        CHECK(negative_sample(g, 5, 3) == negative_sample(g, 5, 3));
        CHECK_THROWS_AS(negative_sample(g, avail + 1, 3), NotEnoughNonEdges);
    }

    TEST_CASE("edge pairs follow stored order") {
        const KnowledgeGraph g = testutil::graph_from_pairs(3, {{2, 1}, {0, 1}});
        CHECK(edge_pairs(g) == std::vector<NodePair>{{0, 1}, {1, 2}});
    }
}

TEST_SUITE("gradients") {
    GradCheckInputs instance(Layer layer, std::uint64_t seed, const LayerParams& p) {
        const std::size_t n = 5 + seed % 4;
        KnowledgeGraph g = random_graph(n, 0.45, seed);
        if (g.num_edges() == 0) g = testutil::graph_from_pairs(n, {{0, 1}, {1, 2}});
        GradCheckInputs in;
        in.graph = g;
        const std::size_t f = p.w_fd.rows();
        const std::size_t cols = layer == Layer::Denoise ? p.w_fd.cols() : layer == Layer::Semantic ? 2 * f : f;
        in.features = random_matrix(n, cols, seed + 1000);
        in.lhat = graph_scaled_laplacian(g, seed);
        in.pos = edge_pairs(g);
        in.neg = negative_sample(g, std::min(in.pos.size(), count_non_edges(g)), seed);
        return in;
    }

    TEST_CASE("analytic gradients match central differences") {
        for (Layer layer : {Layer::Denoise, Layer::Topological, Layer::Local, Layer::Semantic, Layer::FilterStack}) {
            for (std::uint64_t seed = 0; seed < 20; ++seed) {
                CAPTURE(static_cast<int>(layer));
                CAPTURE(seed);
                const LayerParams p = init_params({6, 4, 3}, seed, 0.5);
                CHECK(grad_check(layer, p, instance(layer, seed, p)) <= 1e-4);
            }
        }
    }

    TEST_CASE("epsilon outside the accepted range") {
        const LayerParams p = init_params({6, 4, 3}, 0, 0.5);
        const auto in = instance(Layer::Topological, 0, p);
        CHECK_THROWS_AS(grad_check(Layer::Topological, p, in, 1e-2), ConfigError);
        CHECK_THROWS_AS(grad_check(Layer::Topological, p, in, 1e-9), ConfigError);
    }

    TEST_CASE("self half of a_s receives no gradient") {
        // The semantic score is separable, so the i-term is constant across a
        // softmax row and cancels.
        const LayerParams p = init_params({6, 4, 3}, 1, 0.5);
        const auto in = instance(Layer::Semantic, 1, p);
        const SemanticForward fwd = semantic_forward_full(in.features, in.graph, p.w_s, p.a_s, 0.2);
        Matrix d_out;
        self_supervised_loss(fwd.out, in.pos, in.neg, &d_out);
        const SemanticGrads g = semantic_backward(fwd, in.features, p.w_s, p.a_s, 0.2, d_out);
        for (std::size_t m = 0; m < 4; ++m) CHECK(std::abs(g.a_s[m]) < 1e-14);
    }
}
