#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dasga/errors.hpp"
#include "dasga/graph.hpp"

namespace dasga {

enum class Task { Classification, Regression };

/// A dataset with full ground truth; features and/or a prebuilt graph.
struct LabeledDataset {
    std::optional<FeatureMatrix> features;
    std::optional<Graph> graph;
    Eigen::VectorXd labels;
    Task task = Task::Classification;

    int size() const { return static_cast<int>(labels.size()); }
};

/// Revealed/hidden split of one domain's labels.
struct ExperimentSplit {
    std::vector<int> known;
    std::vector<int> hidden;
    double label_ratio = 0.0;
    std::uint64_t seed = 0;
};

/// Two-class Gaussian clouds in R^3. Target class means are the source means
/// with the y-coordinate negated. Per class and domain, n_per_class samples
/// of N(mean, variance I).
inline std::pair<LabeledDataset, LabeledDataset> synth_gaussian_pair(
    int n_per_class, const std::array<Eigen::Vector3d, 2>& class_means_source, double variance,
    std::uint64_t seed) {
    if (n_per_class < 1) throw std::invalid_argument("synth_gaussian_pair: n_per_class must be positive");
    if (variance <= 0.0) throw std::invalid_argument("synth_gaussian_pair: variance must be positive");

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    // Degenerate limit: below this the draws could not move a coordinate by
    // even one ulp, so place samples exactly at the means.
    const double sd = variance < 1e-100 ? 0.0 : std::sqrt(variance);

    auto make_domain = [&](const std::array<Eigen::Vector3d, 2>& means) {
        LabeledDataset d;
        d.task = Task::Classification;
        d.features = FeatureMatrix(2 * n_per_class, 3);
        d.labels = Eigen::VectorXd(2 * n_per_class);
        int row = 0;
        for (int cls = 0; cls < 2; ++cls) {
            for (int s = 0; s < n_per_class; ++s, ++row) {
                for (int dim = 0; dim < 3; ++dim)
                    (*d.features)(row, dim) = means[cls][dim] + sd * normal(rng);
                d.labels[row] = cls;
            }
        }
        return d;
    };

    std::array<Eigen::Vector3d, 2> target_means = class_means_source;
    target_means[0][1] = -target_means[0][1];
    target_means[1][1] = -target_means[1][1];

    LabeledDataset source = make_domain(class_means_source);
    LabeledDataset target = make_domain(target_means);
    return {std::move(source), std::move(target)};
}

/// The two synthetic presets: shared class means, variance 1.0 (`synth1`,
/// near-separable) or 2.25 (`synth2`, overlapping).
inline std::pair<LabeledDataset, LabeledDataset> synth_preset(const std::string& name,
                                                              std::uint64_t seed,
                                                              int n_per_class = 100) {
    const std::array<Eigen::Vector3d, 2> means = {Eigen::Vector3d(2.0, 2.0, 0.0),
                                                  Eigen::Vector3d(2.0, -2.0, 0.0)};
    if (name == "synth1") return synth_gaussian_pair(n_per_class, means, 1.0, seed);
    if (name == "synth2") return synth_gaussian_pair(n_per_class, means, 2.25, seed);
    throw config_error("synth_preset: unknown preset `" + name + "` (expected synth1 or synth2)");
}

/// Stratified uniform label split without replacement. Classification keeps
/// at least one revealed label per class; a class whose revealed count rounds
/// to zero is a configuration error naming the class.
inline ExperimentSplit sample_split(const LabeledDataset& dataset, double label_ratio,
                                    std::uint64_t seed) {
    if (label_ratio <= 0.0 || label_ratio > 1.0)
        throw std::invalid_argument("sample_split: label_ratio must be in (0, 1]");

    ExperimentSplit split;
    split.label_ratio = label_ratio;
    split.seed = seed;
    std::mt19937_64 rng(seed);

    std::vector<char> known(dataset.size(), 0);
    if (dataset.task == Task::Classification) {
        std::map<double, std::vector<int>> by_class;
        for (int i = 0; i < dataset.size(); ++i) by_class[dataset.labels[i]].push_back(i);
        for (auto& [cls, members] : by_class) {
            const auto want = static_cast<long>(
                std::lround(label_ratio * static_cast<double>(members.size())));
            if (want < 1)
                throw config_error("sample_split: ratio " + std::to_string(label_ratio) +
                                   " reveals no label for class " + std::to_string(cls));
            std::shuffle(members.begin(), members.end(), rng);
            for (long i = 0; i < want; ++i) known[members[i]] = 1;
        }
    } else {
        std::vector<int> all(dataset.size());
        for (int i = 0; i < dataset.size(); ++i) all[i] = i;
        const auto want =
            std::max(1L, static_cast<long>(std::lround(label_ratio * dataset.size())));
        std::shuffle(all.begin(), all.end(), rng);
        for (long i = 0; i < want; ++i) known[all[i]] = 1;
    }

    for (int i = 0; i < dataset.size(); ++i) {
        (known[i] ? split.known : split.hidden).push_back(i);
    }
    return split;
}

/// Fraction of evaluated indices where the decoded label differs.
inline double misclassification_rate(const Eigen::VectorXd& predicted, const Eigen::VectorXd& truth,
                                     const std::vector<int>& evaluated_indices) {
    if (predicted.size() != truth.size())
        throw std::invalid_argument("misclassification_rate: length mismatch");
    if (evaluated_indices.empty()) return 0.0;
    long wrong = 0;
    for (const int i : evaluated_indices) {
        if (predicted[i] != truth[i]) ++wrong;
    }
    return static_cast<double>(wrong) / static_cast<double>(evaluated_indices.size());
}

/// Root mean square difference over evaluated indices.
inline double rms_error(const Eigen::VectorXd& predicted, const Eigen::VectorXd& truth,
                        const std::vector<int>& evaluated_indices) {
    if (predicted.size() != truth.size()) throw std::invalid_argument("rms_error: length mismatch");
    if (evaluated_indices.empty()) return 0.0;
    double acc = 0.0;
    for (const int i : evaluated_indices) {
        const double d = predicted[i] - truth[i];
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(evaluated_indices.size()));
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

inline double parse_double(const std::string& cell, const std::string& where) {
    try {
        size_t pos = 0;
        const double v = std::stod(cell, &pos);
        while (pos < cell.size() && std::isspace(static_cast<unsigned char>(cell[pos]))) ++pos;
        if (pos != cell.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw parse_error(where + ": cannot parse value `" + cell + "`");
    }
}

}  // namespace detail

/// CSV feature matrix, one row per sample. Rows must agree in width.
inline FeatureMatrix load_csv_features(const std::string& path, bool has_header = false) {
    std::ifstream in(path);
    if (!in) throw parse_error("load_csv_features: cannot open " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (lineno == 1 && has_header) continue;
        if (line.empty()) continue;
        const auto cells = detail::split_csv_line(line);
        std::vector<double> row;
        row.reserve(cells.size());
        for (const auto& cell : cells)
            row.push_back(detail::parse_double(cell, path + ":" + std::to_string(lineno)));
        if (!rows.empty() && row.size() != rows.front().size())
            throw parse_error("load_csv_features: " + path + ":" + std::to_string(lineno) +
                              ": row has " + std::to_string(row.size()) + " columns, expected " +
                              std::to_string(rows.front().size()));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw parse_error("load_csv_features: " + path + ": no data rows");
    FeatureMatrix features(rows.size(), rows.front().size());
    for (size_t i = 0; i < rows.size(); ++i)
        for (size_t j = 0; j < rows[i].size(); ++j)
            features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    if (!features.allFinite()) throw parse_error("load_csv_features: " + path + ": non-finite value");
    return features;
}

/// One label per line (single CSV column).
inline Eigen::VectorXd load_labels(const std::string& path, bool has_header = false) {
    std::ifstream in(path);
    if (!in) throw parse_error("load_labels: cannot open " + path);
    std::vector<double> values;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (lineno == 1 && has_header) continue;
        if (line.empty()) continue;
        values.push_back(detail::parse_double(line, path + ":" + std::to_string(lineno)));
    }
    if (values.empty()) throw parse_error("load_labels: " + path + ": no data rows");
    return Eigen::Map<Eigen::VectorXd>(values.data(), values.size());
}

inline void write_csv_features(const std::string& path, const FeatureMatrix& features) {
    std::ofstream out(path);
    if (!out) throw parse_error("write_csv_features: cannot open " + path);
    char buf[48];
    for (Eigen::Index i = 0; i < features.rows(); ++i) {
        for (Eigen::Index j = 0; j < features.cols(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", features(i, j));
            out << (j ? "," : "") << buf;
        }
        out << '\n';
    }
}

inline void write_labels(const std::string& path, const Eigen::VectorXd& labels) {
    std::ofstream out(path);
    if (!out) throw parse_error("write_labels: cannot open " + path);
    char buf[48];
    for (Eigen::Index i = 0; i < labels.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g\n", labels[i]);
        out << buf;
    }
}

/// Amazon-style similarity weight: inversely proportional to the mean
/// absolute score difference over commonly rated items.
inline double rating_similarity_weight(double mean_abs_score_diff, double epsilon = 0.1) {
    if (mean_abs_score_diff < 0.0)
        throw std::invalid_argument("rating_similarity_weight: negative difference");
    return 1.0 / (epsilon + mean_abs_score_diff);
}

}  // namespace dasga
