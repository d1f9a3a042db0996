#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dasga/errors.hpp"
#include "dasga/graph.hpp"
#include "dasga/align.hpp"

namespace dasga {

struct BaselinePrediction {
    Eigen::VectorXd f;  // predicted values on all nodes
    std::string method;
};

/// Harmonic semi-supervised solution: the minimizer of f^T L f subject to
/// matching the known labels. The unlabeled block solves
/// L_uu f_u = -L_ul f_l; labeled entries are interpolated exactly.
inline BaselinePrediction ssl_gaussian_fields(const Graph& g, const LabelSet& labels) {
    if (labels.indices.empty()) throw config_error("ssl_gaussian_fields: no labels");

    std::vector<bool> is_labeled(g.n, false);
    for (const int idx : labels.indices) {
        if (idx < 0 || idx >= g.n)
            throw std::invalid_argument("ssl_gaussian_fields: label index out of range");
        is_labeled[idx] = true;
    }

    // A component with no labeled node makes L_uu singular; name it.
    const auto parts = connected_components(g);
    for (size_t c = 0; c < parts.size(); ++c) {
        const bool touched = std::any_of(parts[c].begin(), parts[c].end(),
                                         [&](int v) { return is_labeled[v]; });
        if (!touched)
            throw config_error("ssl_gaussian_fields: component " + std::to_string(c) +
                               " (containing node " + std::to_string(parts[c].front()) +
                               ") has no labeled node");
    }

    std::vector<int> unlabeled;
    for (int v = 0; v < g.n; ++v)
        if (!is_labeled[v]) unlabeled.push_back(v);

    BaselinePrediction pred;
    pred.method = "ssl";
    pred.f = Eigen::VectorXd::Zero(g.n);
    for (size_t i = 0; i < labels.indices.size(); ++i)
        pred.f[labels.indices[i]] = labels.values[static_cast<Eigen::Index>(i)];
    if (unlabeled.empty()) return pred;

    const Laplacian lap = laplacian(g);
    const auto nu = static_cast<Eigen::Index>(unlabeled.size());
    Eigen::MatrixXd l_uu(nu, nu);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nu);
    for (Eigen::Index a = 0; a < nu; ++a) {
        for (Eigen::Index b = 0; b < nu; ++b) l_uu(a, b) = lap.matrix(unlabeled[a], unlabeled[b]);
        for (size_t li = 0; li < labels.indices.size(); ++li)
            rhs[a] -= lap.matrix(unlabeled[a], labels.indices[li]) *
                      labels.values[static_cast<Eigen::Index>(li)];
    }

    const Eigen::VectorXd f_u = l_uu.ldlt().solve(rhs);
    if (!f_u.allFinite()) throw numerical_error("ssl_gaussian_fields: harmonic solve failed");
    for (Eigen::Index a = 0; a < nu; ++a) pred.f[unlabeled[a]] = f_u[a];
    return pred;
}

/// One harmonic +/-1 function per class, argmax decode; mirrors the alignment
/// module's one-vs-all treatment.
inline Eigen::VectorXd ssl_one_vs_all(const Graph& g, const LabelSet& labels) {
    std::map<double, int> classes;
    for (Eigen::Index i = 0; i < labels.values.size(); ++i) classes[labels.values[i]]++;
    std::vector<double> class_values;
    std::vector<Eigen::VectorXd> scores;
    for (const auto& [cls, cnt] : classes) {
        LabelSet sub = labels;
        for (Eigen::Index i = 0; i < sub.values.size(); ++i)
            sub.values[i] = labels.values[i] == cls ? 1.0 : -1.0;
        scores.push_back(ssl_gaussian_fields(g, sub).f);
        class_values.push_back(cls);
    }
    return decode_one_vs_all(scores, class_values);
}

/// Euclidean nearest-neighbor classification; distance ties keep the lower
/// training index.
inline Eigen::VectorXd nearest_neighbor(const FeatureMatrix& features_train,
                                        const Eigen::VectorXd& labels_train,
                                        const FeatureMatrix& features_test) {
    if (features_train.rows() < 1) throw std::invalid_argument("nearest_neighbor: empty training set");
    if (features_train.rows() != labels_train.size())
        throw std::invalid_argument("nearest_neighbor: training size mismatch");
    if (features_train.cols() != features_test.cols())
        throw std::invalid_argument("nearest_neighbor: feature dimension mismatch");

    Eigen::VectorXd out(features_test.rows());
    for (Eigen::Index i = 0; i < features_test.rows(); ++i) {
        Eigen::Index best = 0;
        double best_d = (features_test.row(i) - features_train.row(0)).squaredNorm();
        for (Eigen::Index j = 1; j < features_train.rows(); ++j) {
            const double d = (features_test.row(i) - features_train.row(j)).squaredNorm();
            if (d < best_d) {
                best_d = d;
                best = j;
            }
        }
        out[i] = labels_train[best];
    }
    return out;
}

}  // namespace dasga
