#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "dasga/errors.hpp"
#include "dasga/graph.hpp"
#include "dasga/spectral.hpp"
#include "dasga/sqp.hpp"

namespace dasga {

enum class LabelEncoding { Binary, OneVsAll, Regression };

/// Partially observed label function: node indices with known values.
struct LabelSet {
    std::vector<int> indices;
    Eigen::VectorXd values;
    LabelEncoding encoding = LabelEncoding::Binary;
};

struct AlignmentParams {
    double mu1 = 0.1;       // coefficient-coupling weight
    double mu2 = 1.0;       // mask-penalty weight
    double sigma = 0.0;     // mask scale; <= 0 selects the default R/4
    int R = 9;              // basis size
    int max_outer_iters = 50;
    double outer_tol = 1e-6;  // relative objective decrease threshold

    double effective_sigma() const { return sigma > 0.0 ? sigma : R / 4.0; }
};

struct AlignmentProblem {
    SpectralBasis basis_s, basis_t;
    LabelSet labels_s, labels_t;
    AlignmentParams params;
    Eigen::MatrixXd mask;     // R x R penalty mask
    Eigen::MatrixXd sel_u_s;  // labeled rows of the source basis (L_s x R)
    Eigen::MatrixXd sel_u_t;  // labeled rows of the target basis (L_t x R)
};

struct AlignmentState {
    Eigen::VectorXd alpha_s, alpha_t;  // length R
    Eigen::MatrixXd T;                 // R x R, unit-norm columns
};

struct BoundConstants {
    double delta = 0.0;        // max |lambda_i^s - lambda_i^t|
    double lambda_R = 0.0;     // max(lambda_R^s, lambda_R^t)
    double delta_alpha = 0.0;  // ||alpha_s - alpha_t||
    double delta_T = 0.0;      // operator norm ||T - I||
    double C = 0.0;            // max(||alpha_s||, ||alpha_t||)
};

struct RunResult {
    Eigen::VectorXd f_s, f_t;     // reconstructed label functions
    AlignmentState state;
    std::vector<double> history;  // objective per half-step, history[0] at init
    int outer_iters = 0;
    bool converged = false;
    std::vector<std::string> warnings;
};

/// Mask entry exp((i-j)^2 / sigma^2); equals 1 on the diagonal and grows away
/// from it, restricting each source frequency to mix only nearby target ones.
inline Eigen::MatrixXd penalty_mask(int R, double sigma) {
    if (R < 1) throw std::invalid_argument("penalty_mask: R must be positive");
    if (sigma <= 0.0) throw std::invalid_argument("penalty_mask: sigma must be positive");
    Eigen::MatrixXd mask(R, R);
    for (int i = 0; i < R; ++i) {
        for (int j = 0; j < R; ++j) {
            const double d = i - j;
            mask(i, j) = std::exp(d * d / (sigma * sigma));
        }
    }
    return mask;
}

struct MatchedPairs {
    std::vector<std::pair<int, int>> pairs;  // (source node, target node)
    std::vector<std::string> warnings;
};

/// Default matched-pair count for the transform initialization. A handful of
/// pairs per basis vector is needed to vote down sign errors on the dominant
/// frequencies; 2 * #classes alone misreads the sign on a noticeable fraction
/// of label draws.
inline int default_pair_count(const LabelSet& labels_s, const LabelSet& labels_t, int R) {
    std::map<double, std::pair<long, long>> counts;
    for (Eigen::Index i = 0; i < labels_s.values.size(); ++i)
        counts[labels_s.values[i]].first++;
    for (Eigen::Index i = 0; i < labels_t.values.size(); ++i)
        counts[labels_t.values[i]].second++;
    long pair_space = 0;
    for (const auto& [cls, c] : counts) pair_space += c.first * c.second;
    const long classes = static_cast<long>(counts.size());
    const long want = std::max(2 * classes, 3L * R);
    return static_cast<int>(std::max(1L, std::min(pair_space, want)));
}

/// Random same-class (source, target) node pairs, classes cycled round-robin
/// so every class with labels on both sides contributes. Classes with labels
/// on one side only are skipped with a warning.
inline MatchedPairs pick_matched_pairs(const LabelSet& source_labels, const LabelSet& target_labels,
                                       int pair_count, std::uint64_t seed) {
    if (pair_count < 1) throw std::invalid_argument("pick_matched_pairs: pair_count must be positive");
    std::map<double, std::vector<int>> by_class_s, by_class_t;
    for (size_t i = 0; i < source_labels.indices.size(); ++i)
        by_class_s[source_labels.values[static_cast<Eigen::Index>(i)]].push_back(source_labels.indices[i]);
    for (size_t i = 0; i < target_labels.indices.size(); ++i)
        by_class_t[target_labels.values[static_cast<Eigen::Index>(i)]].push_back(target_labels.indices[i]);

    MatchedPairs out;
    std::vector<double> usable;
    for (const auto& [cls, nodes] : by_class_t) {
        if (by_class_s.count(cls)) {
            usable.push_back(cls);
        } else {
            out.warnings.push_back("pick_matched_pairs: class " + std::to_string(cls) +
                                   " has target labels but no source labels; skipped");
        }
    }
    for (const auto& [cls, nodes] : by_class_s) {
        if (!by_class_t.count(cls)) {
            out.warnings.push_back("pick_matched_pairs: class " + std::to_string(cls) +
                                   " has source labels but no target labels; skipped");
        }
    }
    if (usable.empty())
        throw config_error("pick_matched_pairs: no class is labeled on both sides");

    std::mt19937_64 rng(seed);
    for (int d = 0; d < pair_count; ++d) {
        const double cls = usable[d % usable.size()];
        const auto& src = by_class_s[cls];
        const auto& tgt = by_class_t[cls];
        const int si = std::uniform_int_distribution<int>(0, static_cast<int>(src.size()) - 1)(rng);
        const int ti = std::uniform_int_distribution<int>(0, static_cast<int>(tgt.size()) - 1)(rng);
        out.pairs.emplace_back(src[si], tgt[ti]);
    }
    return out;
}

/// Sign-correcting initialization: each target basis vector, restricted to the
/// matched nodes, is compared against every restricted source vector; the
/// diagonal entry takes the sign of the best match (zero inner product -> +1).
inline Eigen::MatrixXd init_transform(const SpectralBasis& basis_s, const SpectralBasis& basis_t,
                                      const std::vector<std::pair<int, int>>& pairs) {
    if (basis_s.basis_size() != basis_t.basis_size())
        throw std::invalid_argument("init_transform: basis sizes differ");
    if (pairs.empty()) throw std::invalid_argument("init_transform: empty pair list");
    const int R = basis_s.basis_size();
    const int K = static_cast<int>(pairs.size());

    Eigen::MatrixXd restricted_s(K, R), restricted_t(K, R);
    for (int k = 0; k < K; ++k) {
        restricted_s.row(k) = basis_s.eigenvectors.row(pairs[k].first);
        restricted_t.row(k) = basis_t.eigenvectors.row(pairs[k].second);
    }

    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(R, R);
    for (int i = 0; i < R; ++i) {
        int best_j = 0;
        double best_mag = -1.0;
        for (int j = 0; j < R; ++j) {
            const double ip = restricted_s.col(j).dot(restricted_t.col(i));
            if (std::abs(ip) > best_mag) {
                best_mag = std::abs(ip);
                best_j = j;
            }
        }
        const double ip = restricted_s.col(best_j).dot(restricted_t.col(i));
        T(i, i) = ip < 0.0 ? -1.0 : 1.0;
    }
    return T;
}

/// The Problem 3 objective
///   ||S^s U^s a_s - y_s||^2 + ||S^t U^t T a_t - y_t||^2
///   + mu1 ||a_s - a_t||^2 + mu2 ||M .* T||_F^2.
inline double objective(const AlignmentState& state, const AlignmentProblem& problem) {
    if (state.alpha_s.size() != problem.params.R || state.alpha_t.size() != problem.params.R ||
        state.T.rows() != problem.params.R || state.T.cols() != problem.params.R)
        throw std::invalid_argument("objective: state dimensions do not match problem");
    const double fit_s = (problem.sel_u_s * state.alpha_s - problem.labels_s.values).squaredNorm();
    const double fit_t =
        (problem.sel_u_t * (state.T * state.alpha_t) - problem.labels_t.values).squaredNorm();
    const double couple = problem.params.mu1 * (state.alpha_s - state.alpha_t).squaredNorm();
    const double mask_pen = problem.params.mu2 * problem.mask.cwiseProduct(state.T).squaredNorm();
    return fit_s + fit_t + couple + mask_pen;
}

/// Closed-form minimizer of the coefficient subproblem with T fixed.
/// A rank-deficient system (tiny label sets) falls back to the minimum-norm
/// least-squares solution, which still zeroes the gradient since the system
/// is consistent for this convex quadratic.
inline std::pair<Eigen::VectorXd, Eigen::VectorXd> update_coefficients(
    const AlignmentState& state, const AlignmentProblem& problem,
    std::vector<std::string>* warnings = nullptr) {
    const double inv_mu1 = 1.0 / problem.params.mu1;
    const Eigen::MatrixXd ut_t = problem.sel_u_t * state.T;  // S^t U^t T
    const Eigen::MatrixXd a_s = problem.sel_u_s.transpose() * problem.sel_u_s;
    const Eigen::MatrixXd a_t = ut_t.transpose() * ut_t;
    const Eigen::VectorXd bs_y = problem.sel_u_s.transpose() * problem.labels_s.values;
    const Eigen::VectorXd bt_y = ut_t.transpose() * problem.labels_t.values;

    const Eigen::MatrixXd system = inv_mu1 * a_t * a_s + a_t + a_s;
    const Eigen::VectorXd rhs = inv_mu1 * a_t * bs_y + bs_y + bt_y;

    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(system);
    if (warnings && cod.rank() < problem.params.R) {
        warnings->push_back("update_coefficients: singular system (rank " +
                            std::to_string(cod.rank()) + " < " + std::to_string(problem.params.R) +
                            "), using least-squares pseudo-solution");
    }
    const Eigen::VectorXd alpha_s = cod.solve(rhs);
    const Eigen::VectorXd alpha_t = inv_mu1 * a_s * alpha_s + alpha_s - inv_mu1 * bs_y;
    return {alpha_s, alpha_t};
}

/// Builds the vectorized transform subproblem for the current coefficients.
inline sqp::QuadraticAlignProblem make_transform_problem(const AlignmentState& state,
                                                         const AlignmentProblem& problem) {
    const int R = problem.params.R;
    const auto lt = problem.sel_u_t.rows();
    sqp::QuadraticAlignProblem p;
    p.R = R;
    p.mu2 = problem.params.mu2;
    p.y = problem.labels_t.values;
    p.A.resize(lt, static_cast<Eigen::Index>(R) * R);
    p.F_diag.resize(static_cast<Eigen::Index>(R) * R);
    for (int j = 0; j < R; ++j) {
        p.A.middleCols(j * R, R) = problem.sel_u_t * state.alpha_t[j];
        p.F_diag.segment(j * R, R) = problem.mask.col(j);
    }
    return p;
}

/// Transform update via SQP with a monotonicity fallback: a worse or failed
/// solve keeps the incoming T.
inline Eigen::MatrixXd update_transform(const AlignmentState& state,
                                        const AlignmentProblem& problem,
                                        const sqp::SqpOptions& opts = {},
                                        std::vector<std::string>* warnings = nullptr) {
    const sqp::QuadraticAlignProblem p = make_transform_problem(state, problem);
    const Eigen::VectorXd t0 = sqp::vectorize(state.T);
    try {
        const sqp::SqpResult result = sqp::solve(p, t0, opts);
        if (sqp::objective_h(p, result.t) <= sqp::objective_h(p, t0) + 1e-10) {
            return sqp::devectorize(result.t);
        }
        if (warnings)
            warnings->push_back("update_transform: SQP returned a worse point; keeping incoming T");
        return state.T;
    } catch (const numerical_error& e) {
        if (warnings)
            warnings->push_back(std::string("update_transform: SQP failed (") + e.what() +
                                "); keeping incoming T");
        return state.T;
    }
}

namespace detail {

inline void validate_label_set(const LabelSet& labels, int n, const char* which) {
    if (labels.indices.empty())
        throw config_error(std::string("alignment: no labeled nodes on the ") + which + " side");
    if (static_cast<Eigen::Index>(labels.indices.size()) != labels.values.size())
        throw std::invalid_argument(std::string("alignment: ") + which +
                                    " label index/value count mismatch");
    std::vector<int> sorted = labels.indices;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw std::invalid_argument(std::string("alignment: duplicate ") + which + " label index");
    if (sorted.front() < 0 || sorted.back() >= n)
        throw std::invalid_argument(std::string("alignment: ") + which +
                                    " label index out of range");
}

inline Eigen::MatrixXd selected_rows(const SpectralBasis& basis, const std::vector<int>& indices) {
    Eigen::MatrixXd rows(indices.size(), basis.basis_size());
    for (size_t i = 0; i < indices.size(); ++i) rows.row(i) = basis.eigenvectors.row(indices[i]);
    return rows;
}

}  // namespace detail

inline void validate_params(const AlignmentParams& params) {
    if (params.mu1 <= 0.0 || params.mu2 <= 0.0)
        throw std::invalid_argument("alignment: mu1 and mu2 must be positive");
    if (params.R < 2) throw std::invalid_argument("alignment: R must be at least 2");
    if (params.effective_sigma() <= 0.0)
        throw std::invalid_argument("alignment: sigma must be positive");
    if (params.max_outer_iters < 1)
        throw std::invalid_argument("alignment: max_outer_iters must be positive");
    if (params.outer_tol <= 0.0) throw std::invalid_argument("alignment: outer_tol must be positive");
}

/// Assembles a problem from prebuilt bases.
inline AlignmentProblem make_alignment_problem(SpectralBasis basis_s, SpectralBasis basis_t,
                                               LabelSet labels_s, LabelSet labels_t,
                                               AlignmentParams params) {
    validate_params(params);
    if (basis_s.basis_size() != params.R || basis_t.basis_size() != params.R)
        throw std::invalid_argument("alignment: basis size does not match params.R");
    detail::validate_label_set(labels_s, basis_s.n, "source");
    detail::validate_label_set(labels_t, basis_t.n, "target");

    AlignmentProblem problem;
    problem.mask = penalty_mask(params.R, params.effective_sigma());
    problem.sel_u_s = detail::selected_rows(basis_s, labels_s.indices);
    problem.sel_u_t = detail::selected_rows(basis_t, labels_t.indices);
    problem.basis_s = std::move(basis_s);
    problem.basis_t = std::move(basis_t);
    problem.labels_s = std::move(labels_s);
    problem.labels_t = std::move(labels_t);
    problem.params = params;
    return problem;
}

/// Assembles a problem from graphs: refuses disconnected graphs (the Fourier
/// basis degenerates across components), then eigendecomposes both sides.
inline AlignmentProblem make_alignment_problem(const Graph& graph_s, const Graph& graph_t,
                                               LabelSet labels_s, LabelSet labels_t,
                                               AlignmentParams params) {
    validate_params(params);
    if (!is_connected(graph_s)) throw config_error("alignment: source graph is disconnected");
    if (!is_connected(graph_t)) throw config_error("alignment: target graph is disconnected");
    if (params.R > std::min(graph_s.n, graph_t.n))
        throw std::invalid_argument("alignment: R exceeds a graph size");
    SpectralBasis basis_s = eigendecompose(laplacian(graph_s), params.R);
    SpectralBasis basis_t = eigendecompose(laplacian(graph_t), params.R);
    return make_alignment_problem(std::move(basis_s), std::move(basis_t), std::move(labels_s),
                                  std::move(labels_t), params);
}

/// Alternating minimization (coefficients, then transform), starting from the
/// sign-corrected diagonal transform. The objective history records one value
/// per half-step and never increases. pair_count <= 0 selects the default
/// min(#valid same-class pairs, 2 * #classes).
inline RunResult run(const AlignmentProblem& problem, std::uint64_t seed,
                     const std::vector<std::pair<int, int>>* pairs = nullptr, int pair_count = 0,
                     const sqp::SqpOptions& sqp_opts = {}) {
    const int R = problem.params.R;

    RunResult result;
    std::vector<std::pair<int, int>> picked;
    if (pairs == nullptr) {
        if (pair_count <= 0)
            pair_count = default_pair_count(problem.labels_s, problem.labels_t, R);
        MatchedPairs mp = pick_matched_pairs(problem.labels_s, problem.labels_t, pair_count, seed);
        picked = std::move(mp.pairs);
        result.warnings = std::move(mp.warnings);
        pairs = &picked;
    }

    AlignmentState state;
    state.alpha_s = Eigen::VectorXd::Zero(R);
    state.alpha_t = Eigen::VectorXd::Zero(R);
    state.T = init_transform(problem.basis_s, problem.basis_t, *pairs);

    result.history.push_back(objective(state, problem));
    double prev = result.history.back();
    for (int iter = 0; iter < problem.params.max_outer_iters; ++iter) {
        std::tie(state.alpha_s, state.alpha_t) =
            update_coefficients(state, problem, &result.warnings);
        result.history.push_back(objective(state, problem));

        state.T = update_transform(state, problem, sqp_opts, &result.warnings);
        result.history.push_back(objective(state, problem));

        const double curr = result.history.back();
        if (!std::isfinite(curr)) throw numerical_error("alignment: objective is not finite");
        result.outer_iters = iter + 1;
        if (prev - curr < problem.params.outer_tol * std::max(std::abs(prev), 1e-300)) {
            result.converged = true;
            break;
        }
        prev = curr;
    }

    result.f_s = problem.basis_s.eigenvectors * state.alpha_s;
    result.f_t = problem.basis_t.eigenvectors * (state.T * state.alpha_t);
    result.state = std::move(state);
    return result;
}

/// sign(f) with zeros mapped to +1.
inline Eigen::VectorXd decode_binary(const Eigen::VectorXd& f) {
    Eigen::VectorXd out(f.size());
    for (Eigen::Index i = 0; i < f.size(); ++i) out[i] = f[i] < 0.0 ? -1.0 : 1.0;
    return out;
}

/// Argmax over per-class score functions; ties keep the earlier class.
inline Eigen::VectorXd decode_one_vs_all(const std::vector<Eigen::VectorXd>& class_scores,
                                         const std::vector<double>& class_values) {
    if (class_scores.empty() || class_scores.size() != class_values.size())
        throw std::invalid_argument("decode_one_vs_all: score/class count mismatch");
    const Eigen::Index n = class_scores.front().size();
    Eigen::VectorXd out(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        int best = 0;
        for (size_t c = 1; c < class_scores.size(); ++c) {
            if (class_scores[c][i] > class_scores[best][i]) best = static_cast<int>(c);
        }
        out[i] = class_values[best];
    }
    return out;
}

/// Identity decode with optional clamping and rounding (score prediction).
inline Eigen::VectorXd decode_regression(const Eigen::VectorXd& f,
                                         std::optional<std::pair<double, double>> clamp = {},
                                         bool round_to_int = false) {
    Eigen::VectorXd out = f;
    for (Eigen::Index i = 0; i < out.size(); ++i) {
        if (clamp) out[i] = std::clamp(out[i], clamp->first, clamp->second);
        if (round_to_int) out[i] = std::round(out[i]);
    }
    return out;
}

struct VariationGap {
    double lhs = 0.0;
    double rhs = 0.0;
    BoundConstants constants;
};

/// Both sides of the variation-gap bound, constants measured from the state.
/// The left side uses the diagonal identity f^T L f = a^T Lambda a; the right
/// side is C^2 delta + 2 C lambda_R Delta_alpha + C^2 lambda_R (2 Delta_T + Delta_T^2).
inline VariationGap variation_gap_bound(const AlignmentState& state,
                                        const AlignmentProblem& problem) {
    const Eigen::VectorXd& ls = problem.basis_s.eigenvalues;
    const Eigen::VectorXd& lt = problem.basis_t.eigenvalues;
    const Eigen::VectorXd t_alpha = state.T * state.alpha_t;

    VariationGap gap;
    gap.lhs = std::abs(state.alpha_s.dot(ls.cwiseProduct(state.alpha_s)) -
                       t_alpha.dot(lt.cwiseProduct(t_alpha)));

    BoundConstants& c = gap.constants;
    c.delta = (ls - lt).cwiseAbs().maxCoeff();
    c.lambda_R = std::max(ls[ls.size() - 1], lt[lt.size() - 1]);
    c.delta_alpha = (state.alpha_s - state.alpha_t).norm();
    const Eigen::MatrixXd dev = state.T - Eigen::MatrixXd::Identity(state.T.rows(), state.T.cols());
    c.delta_T = dev.jacobiSvd().singularValues()(0);
    c.C = std::max(state.alpha_s.norm(), state.alpha_t.norm());

    gap.rhs = c.C * c.C * c.delta + 2.0 * c.C * c.lambda_R * c.delta_alpha +
              c.C * c.C * c.lambda_R * (2.0 * c.delta_T + c.delta_T * c.delta_T);
    return gap;
}

/// One-vs-all driver: one +/-1 run per class over shared bases, one matched
/// pairing per seed, argmax decode.
struct OneVsAllResult {
    std::vector<double> class_values;
    std::vector<RunResult> runs;
    Eigen::VectorXd decoded_s, decoded_t;  // class value per node
};

inline OneVsAllResult run_one_vs_all(const AlignmentProblem& problem, std::uint64_t seed,
                                     int pair_count = 0, const sqp::SqpOptions& sqp_opts = {}) {
    std::map<double, int> classes;
    for (Eigen::Index i = 0; i < problem.labels_s.values.size(); ++i)
        classes[problem.labels_s.values[i]]++;
    for (Eigen::Index i = 0; i < problem.labels_t.values.size(); ++i)
        classes[problem.labels_t.values[i]]++;

    OneVsAllResult result;
    for (const auto& [cls, cnt] : classes) result.class_values.push_back(cls);

    if (pair_count <= 0)
        pair_count = default_pair_count(problem.labels_s, problem.labels_t, problem.params.R);
    MatchedPairs mp = pick_matched_pairs(problem.labels_s, problem.labels_t, pair_count, seed);

    std::vector<Eigen::VectorXd> scores_s, scores_t;
    for (const double cls : result.class_values) {
        AlignmentProblem sub = problem;
        for (Eigen::Index i = 0; i < sub.labels_s.values.size(); ++i)
            sub.labels_s.values[i] = problem.labels_s.values[i] == cls ? 1.0 : -1.0;
        for (Eigen::Index i = 0; i < sub.labels_t.values.size(); ++i)
            sub.labels_t.values[i] = problem.labels_t.values[i] == cls ? 1.0 : -1.0;
        RunResult run_result = run(sub, seed, &mp.pairs, pair_count, sqp_opts);
        scores_s.push_back(run_result.f_s);
        scores_t.push_back(run_result.f_t);
        result.runs.push_back(std::move(run_result));
    }
    result.decoded_s = decode_one_vs_all(scores_s, result.class_values);
    result.decoded_t = decode_one_vs_all(scores_t, result.class_values);
    return result;
}

/// Objective history as `step,objective` CSV.
inline void write_history_csv(const std::string& path, const std::vector<double>& history) {
    std::ofstream out(path);
    if (!out) throw parse_error("write_history_csv: cannot open " + path);
    out << "step,objective\n";
    char buf[64];
    for (size_t i = 0; i < history.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%zu,%.12g\n", i, history[i]);
        out << buf;
    }
}

/// State snapshot (coefficients and transform) as CSV blocks.
inline void write_state_csv(const std::string& path, const AlignmentState& state) {
    std::ofstream out(path);
    if (!out) throw parse_error("write_state_csv: cannot open " + path);
    char buf[64];
    auto cell = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return std::string(buf);
    };
    out << "alpha_s";
    for (Eigen::Index i = 0; i < state.alpha_s.size(); ++i) out << ',' << cell(state.alpha_s[i]);
    out << "\nalpha_t";
    for (Eigen::Index i = 0; i < state.alpha_t.size(); ++i) out << ',' << cell(state.alpha_t[i]);
    out << '\n';
    for (Eigen::Index i = 0; i < state.T.rows(); ++i) {
        out << "T_row" << i;
        for (Eigen::Index j = 0; j < state.T.cols(); ++j) out << ',' << cell(state.T(i, j));
        out << '\n';
    }
}

}  // namespace dasga
