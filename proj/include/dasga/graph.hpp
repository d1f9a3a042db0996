#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <queue>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Sparse>

#include "dasga/errors.hpp"

namespace dasga {

/// Undirected weighted graph: node count plus a sparse symmetric nonnegative
/// weight matrix with zero diagonal. Immutable after construction.
struct Graph {
    int n = 0;
    Eigen::SparseMatrix<double> weights;  // n x n, symmetric, zero diagonal
};

/// Row-major sample coordinates; one row per node.
using FeatureMatrix = Eigen::MatrixXd;

/// Combinatorial Laplacian L = D - W with the degree vector kept alongside.
struct Laplacian {
    Eigen::MatrixXd matrix;
    Eigen::VectorXd degree;
};

namespace detail {

// Inserts both (i,j) and (j,i) so the stored matrix is bitwise symmetric.
inline Graph graph_from_edge_map(int n, const std::map<std::pair<int, int>, double>& edges) {
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(2 * edges.size());
    for (const auto& [ij, w] : edges) {
        triplets.emplace_back(ij.first, ij.second, w);
        triplets.emplace_back(ij.second, ij.first, w);
    }
    Graph g;
    g.n = n;
    g.weights.resize(n, n);
    g.weights.setFromTriplets(triplets.begin(), triplets.end());
    g.weights.makeCompressed();
    return g;
}

}  // namespace detail

/// Builds a graph from an explicit undirected edge list. Self-loops and
/// negative weights are rejected; duplicate edges keep the last weight given.
inline Graph make_graph(int n, const std::vector<std::tuple<int, int, double>>& edges) {
    std::map<std::pair<int, int>, double> dedup;
    for (const auto& [a, b, w] : edges) {
        if (a < 0 || b < 0 || a >= n || b >= n)
            throw std::invalid_argument("make_graph: node id out of range");
        if (a == b) throw std::invalid_argument("make_graph: self-loop not allowed");
        if (w < 0.0) throw std::invalid_argument("make_graph: negative weight");
        dedup[{std::min(a, b), std::max(a, b)}] = w;
    }
    return detail::graph_from_edge_map(n, dedup);
}

/// k-nearest-neighbor graph with Gaussian kernel weights
/// w_ij = exp(-||x_i - x_j||^2 / scale^2). The directed k-NN relation is
/// symmetrized by union, so every node ends up with degree >= k. Distance
/// ties are broken by lower node index. kernel_scale <= 0 selects the auto
/// policy: scale = mean distance from each node to its k-th neighbor.
inline Graph build_knn_graph(const FeatureMatrix& features, int k, double kernel_scale = 0.0) {
    const int n = static_cast<int>(features.rows());
    if (n < 2) throw std::invalid_argument("build_knn_graph: need at least 2 samples");
    if (k < 1 || k >= n) throw std::invalid_argument("build_knn_graph: require 1 <= k < n");
    if (!features.allFinite()) throw std::invalid_argument("build_knn_graph: non-finite features");

    // Brute-force all-pairs distances; desk scale keeps this comfortably cheap.
    Eigen::MatrixXd sqd(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            sqd(i, j) = (features.row(i) - features.row(j)).squaredNorm();
        }
    }

    std::map<std::pair<int, int>, double> edges;  // keyed (min,max); weight filled later
    std::vector<double> kth_dist(n);
    std::vector<int> order;
    for (int i = 0; i < n; ++i) {
        order.resize(n);
        std::iota(order.begin(), order.end(), 0);
        order.erase(order.begin() + i);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            if (sqd(i, a) != sqd(i, b)) return sqd(i, a) < sqd(i, b);
            return a < b;
        });
        for (int m = 0; m < k; ++m) {
            const int j = order[m];
            edges[{std::min(i, j), std::max(i, j)}] = 0.0;
        }
        kth_dist[i] = std::sqrt(sqd(i, order[k - 1]));
    }

    double scale = kernel_scale;
    if (scale <= 0.0) {
        scale = std::accumulate(kth_dist.begin(), kth_dist.end(), 0.0) / n;
        if (scale <= 0.0) scale = 1.0;  // all points coincide
    }

    const double inv_s2 = 1.0 / (scale * scale);
    for (auto& [ij, w] : edges) {
        w = std::exp(-sqd(ij.first, ij.second) * inv_s2);
    }
    return detail::graph_from_edge_map(n, edges);
}

/// L = D - W with D_ii = sum_j W_ij.
inline Laplacian laplacian(const Graph& g) {
    Laplacian lap;
    lap.degree = Eigen::VectorXd(g.weights * Eigen::VectorXd::Ones(g.n));
    lap.matrix = Eigen::MatrixXd(-g.weights);
    lap.matrix.diagonal() += lap.degree;
    return lap;
}

/// Dirichlet energy f^T L f, the speed of variation of a signal on the graph.
inline double variation(const Laplacian& lap, const Eigen::VectorXd& f) {
    if (f.size() != lap.matrix.rows())
        throw std::invalid_argument("variation: signal length does not match graph size");
    return f.dot(lap.matrix * f);
}

/// Whitespace-separated `src dst weight` lines, `#` comments, 0-based ids.
/// Duplicate edges (either orientation) keep the last weight seen.
inline Graph load_edge_list(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw parse_error("load_edge_list: cannot open " + path);

    std::map<std::pair<int, int>, double> edges;
    int max_id = -1;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ss(line);
        long long a, b;
        double w;
        if (!(ss >> a)) continue;  // blank line
        if (!(ss >> b >> w)) {
            throw parse_error("load_edge_list: " + path + ":" + std::to_string(lineno) +
                              ": expected `src dst weight`");
        }
        std::string rest;
        if (ss >> rest) {
            throw parse_error("load_edge_list: " + path + ":" + std::to_string(lineno) +
                              ": trailing tokens");
        }
        if (a < 0 || b < 0) {
            throw parse_error("load_edge_list: " + path + ":" + std::to_string(lineno) +
                              ": negative node id");
        }
        if (a == b) {
            throw parse_error("load_edge_list: " + path + ":" + std::to_string(lineno) +
                              ": self-loop");
        }
        if (w < 0.0) {
            throw parse_error("load_edge_list: " + path + ":" + std::to_string(lineno) +
                              ": negative weight");
        }
        const int i = static_cast<int>(a), j = static_cast<int>(b);
        edges[{std::min(i, j), std::max(i, j)}] = w;
        max_id = std::max(max_id, std::max(i, j));
    }
    if (max_id < 0) throw parse_error("load_edge_list: " + path + ": no edges");
    return detail::graph_from_edge_map(max_id + 1, edges);
}

/// Node partition into connected components, each sorted ascending; the
/// component list is ordered by smallest contained node.
inline std::vector<std::vector<int>> connected_components(const Graph& g) {
    std::vector<int> comp(g.n, -1);
    std::vector<std::vector<int>> parts;
    for (int start = 0; start < g.n; ++start) {
        if (comp[start] >= 0) continue;
        const int id = static_cast<int>(parts.size());
        parts.emplace_back();
        std::queue<int> q;
        q.push(start);
        comp[start] = id;
        while (!q.empty()) {
            const int u = q.front();
            q.pop();
            parts[id].push_back(u);
            for (Eigen::SparseMatrix<double>::InnerIterator it(g.weights, u); it; ++it) {
                const int v = static_cast<int>(it.row());
                if (comp[v] < 0) {
                    comp[v] = id;
                    q.push(v);
                }
            }
        }
        std::sort(parts[id].begin(), parts[id].end());
    }
    return parts;
}

inline bool is_connected(const Graph& g) { return connected_components(g).size() <= 1; }

}  // namespace dasga
