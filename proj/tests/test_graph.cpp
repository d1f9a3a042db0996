#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "dasga/graph.hpp"
#include "test_util.hpp"

using namespace dasga;
namespace fs = std::filesystem;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
    const fs::path path = fs::temp_directory_path() / name;
    std::ofstream out(path);
    out << content;
    return path.string();
}

}  // namespace

TEST_CASE("knn graph on collinear points") {
    FeatureMatrix features(3, 1);
    features << 0.0, 1.0, 2.0;
    const Graph g = build_knn_graph(features, 1, 1.0);

    REQUIRE(g.n == 3);
    CHECK(g.weights.coeff(0, 1) == Catch::Approx(std::exp(-1.0)).epsilon(1e-14));
    CHECK(g.weights.coeff(1, 2) == Catch::Approx(std::exp(-1.0)).epsilon(1e-14));
    CHECK(g.weights.coeff(0, 2) == 0.0);
}

TEST_CASE("knn graph connects identical points with weight 1") {
    FeatureMatrix features(2, 2);
    features << 3.0, 4.0, 3.0, 4.0;
    SECTION("explicit scale") {
        const Graph g = build_knn_graph(features, 1, 2.5);
        CHECK(g.weights.coeff(0, 1) == 1.0);
    }
    SECTION("auto scale with zero kth distance") {
        const Graph g = build_knn_graph(features, 1);
        CHECK(g.weights.coeff(0, 1) == 1.0);
    }
}

TEST_CASE("knn graph matches brute-force oracle on a 200-sample cloud") {
    std::mt19937_64 rng(42);
    const int n = 200, k = 25;
    const FeatureMatrix features = testutil::random_matrix(rng, n, 3);
    const Graph g = build_knn_graph(features, k);

    // Independent all-pairs oracle: k-th neighbor distances, auto scale, and
    // the union edge set.
    Eigen::MatrixXd dist(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) dist(i, j) = (features.row(i) - features.row(j)).norm();

    double scale = 0.0;
    std::set<std::pair<int, int>> expected_edges;
    for (int i = 0; i < n; ++i) {
        std::vector<int> idx;
        for (int j = 0; j < n; ++j)
            if (j != i) idx.push_back(j);
        std::sort(idx.begin(), idx.end(), [&](int a, int b) {
            return dist(i, a) != dist(i, b) ? dist(i, a) < dist(i, b) : a < b;
        });
        scale += dist(i, idx[k - 1]);
        for (int m = 0; m < k; ++m)
            expected_edges.insert({std::min(i, idx[m]), std::max(i, idx[m])});
    }
    scale /= n;

    std::set<std::pair<int, int>> actual_edges;
    for (int col = 0; col < g.weights.outerSize(); ++col) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(g.weights, col); it; ++it) {
            const int i = static_cast<int>(it.row()), j = static_cast<int>(it.col());
            if (i < j) {
                actual_edges.insert({i, j});
                const double expected_w = std::exp(-dist(i, j) * dist(i, j) / (scale * scale));
                REQUIRE(it.value() == Catch::Approx(expected_w).margin(1e-14));
            }
        }
    }
    CHECK(actual_edges == expected_edges);

    for (int i = 0; i < n; ++i) {
        int degree = 0;
        for (Eigen::SparseMatrix<double>::InnerIterator it(g.weights, i); it; ++it) ++degree;
        CHECK(degree >= k);
    }
}

TEST_CASE("knn graph parameter validation") {
    std::mt19937_64 rng(1);
    const FeatureMatrix features = testutil::random_matrix(rng, 5, 2);
    CHECK_THROWS_AS(build_knn_graph(features, 5), std::invalid_argument);
    CHECK_THROWS_AS(build_knn_graph(features, 0), std::invalid_argument);
    FeatureMatrix bad = features;
    bad(2, 1) = std::nan("");
    CHECK_THROWS_AS(build_knn_graph(bad, 2), std::invalid_argument);
}

TEST_CASE("knn distance ties break toward the lower node index") {
    // Node 3 at (2,2) is equidistant from node 1 (1,0) and node 2 (0,1).
    FeatureMatrix features(4, 2);
    features << 0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 2.0, 2.0;
    const Graph g = build_knn_graph(features, 1, 1.0);
    CHECK(g.weights.coeff(1, 3) > 0.0);
    CHECK(g.weights.coeff(2, 3) == 0.0);

    const Graph again = build_knn_graph(features, 1, 1.0);
    REQUIRE(Eigen::MatrixXd(g.weights) == Eigen::MatrixXd(again.weights));
}

TEST_CASE("laplacian of the unit-weight 2-node graph") {
    const Graph g = make_graph(2, {{0, 1, 1.0}});
    const Laplacian lap = laplacian(g);
    Eigen::MatrixXd expected(2, 2);
    expected << 1.0, -1.0, -1.0, 1.0;
    CHECK(lap.matrix == expected);
}

TEST_CASE("laplacian of an edgeless graph is zero") {
    const Graph g = make_graph(3, {});
    CHECK(laplacian(g).matrix.isZero(0.0));
}

TEST_CASE("laplacian rows sum to zero") {
    std::mt19937_64 rng(7);
    const Graph g = testutil::random_connected_graph(rng, 10);
    const Laplacian lap = laplacian(g);
    const Eigen::VectorXd row_sums = lap.matrix * Eigen::VectorXd::Ones(10);
    CHECK(row_sums.cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("variation") {
    SECTION("constant signal has zero variation") {
        std::mt19937_64 rng(3);
        const Graph g = testutil::random_connected_graph(rng, 8);
        const Laplacian lap = laplacian(g);
        CHECK(std::abs(variation(lap, Eigen::VectorXd::Constant(8, 2.5))) <= 1e-12);
    }
    SECTION("two-node example") {
        const Laplacian lap = laplacian(make_graph(2, {{0, 1, 1.0}}));
        Eigen::VectorXd f(2);
        f << 1.0, -1.0;
        CHECK(variation(lap, f) == Catch::Approx(4.0).margin(1e-14));
    }
    SECTION("matches the pairwise-sum form") {
        std::mt19937_64 rng(11);
        const Graph g = testutil::random_connected_graph(rng, 15);
        const Laplacian lap = laplacian(g);
        const Eigen::VectorXd f = testutil::random_vector(rng, 15);

        double pairwise = 0.0;
        const Eigen::MatrixXd w(g.weights);
        for (int i = 0; i < g.n; ++i)
            for (int j = 0; j < g.n; ++j) pairwise += w(i, j) * (f[i] - f[j]) * (f[i] - f[j]);
        pairwise *= 0.5;
        CHECK(variation(lap, f) == Catch::Approx(pairwise).margin(1e-10));
    }
    SECTION("dimension mismatch") {
        const Laplacian lap = laplacian(make_graph(2, {{0, 1, 1.0}}));
        CHECK_THROWS_AS(variation(lap, Eigen::VectorXd::Zero(3)), std::invalid_argument);
    }
    SECTION("nonnegative on random signals") {
        std::mt19937_64 rng(13);
        const Graph g = testutil::random_connected_graph(rng, 12);
        const Laplacian lap = laplacian(g);
        for (int trial = 0; trial < 20; ++trial) {
            CHECK(variation(lap, testutil::random_vector(rng, 12)) >= -1e-10);
        }
    }
}

TEST_CASE("edge list loading") {
    SECTION("single edge") {
        const auto path = write_temp("edges_single.txt", "0 1 1.0\n");
        const Graph g = load_edge_list(path);
        REQUIRE(g.n == 2);
        CHECK(g.weights.coeff(0, 1) == 1.0);
        CHECK(g.weights.coeff(1, 0) == 1.0);
    }
    SECTION("duplicate orientation keeps the last weight") {
        const auto path = write_temp("edges_dup.txt", "0 1 1.0\n1 0 2.5\n");
        const Graph g = load_edge_list(path);
        CHECK(g.weights.coeff(0, 1) == 2.5);
        CHECK(g.weights.nonZeros() == 2);
    }
    SECTION("comments and blank lines") {
        const auto path = write_temp("edges_comment.txt", "# header\n\n0 1 0.5 # inline\n");
        CHECK(load_edge_list(path).weights.coeff(0, 1) == 0.5);
    }
    SECTION("negative weight names the line") {
        const auto path = write_temp("edges_neg.txt", "0 1 1.0\n1 2 -3.0\n");
        CHECK_THROWS_WITH(load_edge_list(path), Catch::Matchers::ContainsSubstring(":2:"));
    }
    SECTION("self-loop rejected") {
        const auto path = write_temp("edges_loop.txt", "1 1 1.0\n");
        CHECK_THROWS_AS(load_edge_list(path), parse_error);
    }
    SECTION("malformed line rejected") {
        const auto path = write_temp("edges_bad.txt", "0 1\n");
        CHECK_THROWS_WITH(load_edge_list(path), Catch::Matchers::ContainsSubstring(":1:"));
    }
}

TEST_CASE("connected components of two disjoint triangles") {
    const Graph g = make_graph(
        6, {{0, 1, 1.0}, {1, 2, 1.0}, {0, 2, 1.0}, {3, 4, 1.0}, {4, 5, 1.0}, {3, 5, 1.0}});
    const auto parts = connected_components(g);
    REQUIRE(parts.size() == 2);
    CHECK(parts[0] == std::vector<int>{0, 1, 2});
    CHECK(parts[1] == std::vector<int>{3, 4, 5});
    CHECK_FALSE(is_connected(g));
}

TEST_CASE("constructed weights are exactly symmetric with zero diagonal") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 5; ++trial) {
        const FeatureMatrix features = testutil::random_matrix(rng, 30, 2);
        const Graph g = build_knn_graph(features, 4);
        const Eigen::MatrixXd w(g.weights);
        REQUIRE(w == w.transpose().eval());
        REQUIRE(w.diagonal().isZero(0.0));
        REQUIRE((w.array() >= 0.0).all());
    }
}
