#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "dasga/errors.hpp"

namespace dasga::sqp {

/// The transform subproblem in vectorized form:
///   minimize  h(t) = ||A t - y||^2 + mu2 ||F t||^2
///   subject to each R-column of the devectorized t having unit norm.
/// A stacks the label rows against the coefficient vector; F is diagonal and
/// carries the penalty mask entry for each transform entry.
struct QuadraticAlignProblem {
    Eigen::MatrixXd A;       // L_t x R^2
    Eigen::VectorXd y;       // L_t
    Eigen::VectorXd F_diag;  // R^2, entries >= 1
    double mu2 = 1.0;
    int R = 0;
};

struct SqpOptions {
    int max_iters = 100;
    double tol = 1e-6;
    // Extra deterministic starts (all sign-diagonal matrices, plus the
    // normalized unconstrained minimizer) are tried when R <= this limit.
    int sign_start_limit = 4;
};

struct TracePoint {
    int iter;
    double h;
    double constraint_residual;
    double kkt_residual;
};

struct SqpResult {
    Eigen::VectorXd t;    // length R^2, unit-norm columns
    Eigen::VectorXd eta;  // length R Lagrange multipliers
    double kkt_residual = 0.0;
    double constraint_residual = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<TracePoint> trace;
    // (merit before, merit after) for each accepted step, at that step's
    // penalty weight; witnesses the merit monotonicity.
    std::vector<std::pair<double, double>> merit_steps;
};

struct ConvergenceReport {
    bool mu2_dominates = false;   // mu2 > eta_j at the solution, all j
    bool hessian_pd = false;      // Lagrangian Hessian positive definite
    double min_eigenvalue = 0.0;  // smallest eigenvalue of the Lagrangian Hessian
    double max_eta = 0.0;
};

/// Column-major vectorization: t_k = T(i,j) with k = j*R + i (0-based).
inline Eigen::VectorXd vectorize(const Eigen::MatrixXd& T) {
    if (T.rows() != T.cols()) throw std::invalid_argument("vectorize: matrix must be square");
    return Eigen::Map<const Eigen::VectorXd>(T.data(), T.size());
}

inline Eigen::MatrixXd devectorize(const Eigen::VectorXd& t) {
    const int R = static_cast<int>(std::llround(std::sqrt(static_cast<double>(t.size()))));
    if (static_cast<Eigen::Index>(R) * R != t.size())
        throw std::invalid_argument("devectorize: length is not a perfect square");
    return Eigen::Map<const Eigen::MatrixXd>(t.data(), R, R);
}

inline double objective_h(const QuadraticAlignProblem& p, const Eigen::VectorXd& t) {
    if (t.size() != p.A.cols()) throw std::invalid_argument("objective_h: dimension mismatch");
    return (p.A * t - p.y).squaredNorm() + p.mu2 * p.F_diag.cwiseProduct(t).squaredNorm();
}

/// Full gradient of h: 2 (A^T A + mu2 F^T F) t - 2 A^T y.
inline Eigen::VectorXd gradient_h(const QuadraticAlignProblem& p, const Eigen::VectorXd& t) {
    if (t.size() != p.A.cols()) throw std::invalid_argument("gradient_h: dimension mismatch");
    return 2.0 * (p.A.transpose() * (p.A * t) +
                  p.mu2 * p.F_diag.array().square().matrix().cwiseProduct(t)) -
           2.0 * p.A.transpose() * p.y;
}

/// Constant Hessian 2 (A^T A + mu2 F^T F); computed once per solve.
inline Eigen::MatrixXd hessian_h(const QuadraticAlignProblem& p) {
    Eigen::MatrixXd H = 2.0 * (p.A.transpose() * p.A);
    H.diagonal() += 2.0 * p.mu2 * p.F_diag.array().square().matrix();
    return H;
}

/// Unit-column constraints g_j(t) = sum_i T_ij^2 - 1 and their Jacobian
/// (row j holds 2 t_k over column block j, zeros elsewhere).
inline void constraints(const Eigen::VectorXd& t, int R, Eigen::VectorXd& g, Eigen::MatrixXd& jac) {
    if (t.size() != static_cast<Eigen::Index>(R) * R)
        throw std::invalid_argument("constraints: t length must be R^2");
    g.resize(R);
    jac = Eigen::MatrixXd::Zero(R, R * R);
    for (int j = 0; j < R; ++j) {
        const auto col = t.segment(j * R, R);
        g[j] = col.squaredNorm() - 1.0;
        jac.block(j, j * R, 1, R) = 2.0 * col.transpose();
    }
}

/// Hessian of the Lagrangian h(t) - sum_j eta_j g_j(t): the constant objective
/// Hessian minus 2 eta_j on the diagonal of column block j.
inline Eigen::MatrixXd lagrangian_hessian(const QuadraticAlignProblem& p,
                                          const Eigen::VectorXd& eta) {
    if (eta.size() != p.R) throw std::invalid_argument("lagrangian_hessian: eta length must be R");
    Eigen::MatrixXd H = hessian_h(p);
    for (int j = 0; j < p.R; ++j) {
        H.diagonal().segment(j * p.R, p.R).array() -= 2.0 * eta[j];
    }
    return H;
}

namespace detail {

inline Eigen::VectorXd renormalize_columns(const Eigen::VectorXd& t, int R) {
    Eigen::VectorXd out = t;
    for (int j = 0; j < R; ++j) {
        const double norm = out.segment(j * R, R).norm();
        if (norm > 0.0) {
            out.segment(j * R, R) /= norm;
        } else {
            out[j * R + j] = 1.0;  // dead column, pin to the diagonal entry
        }
    }
    return out;
}

// One SQP run from a fixed start. grad_scale fixes the stationarity tolerance
// shared across multistart candidates.
inline SqpResult solve_single(const QuadraticAlignProblem& p, const Eigen::VectorXd& t0,
                              const SqpOptions& opts, double grad_scale) {
    const int R = p.R;
    const int dim = R * R;
    const double tol_g = opts.tol;
    const double tol_stat = opts.tol * grad_scale;
    const Eigen::MatrixXd H = hessian_h(p);

    Eigen::VectorXd t = t0;
    Eigen::VectorXd eta = Eigen::VectorXd::Zero(R);
    double rho = 1.0;

    SqpResult result;
    result.trace.reserve(opts.max_iters + 1);

    // Best iterate seen, preferring feasibility, then objective value.
    Eigen::VectorXd best_t = t, best_eta = eta;
    double best_g = std::numeric_limits<double>::infinity();
    double best_k = std::numeric_limits<double>::infinity();
    bool best_set = false;
    auto consider_best = [&](const Eigen::VectorXd& tc, const Eigen::VectorXd& ec, double gres,
                             double kres) {
        bool better;
        if (!best_set) {
            better = true;
        } else if ((gres <= tol_g) != (best_g <= tol_g)) {
            better = gres <= tol_g;
        } else if (gres <= tol_g) {
            better = objective_h(p, tc) < objective_h(p, best_t);
        } else {
            better = gres < best_g;
        }
        if (better) {
            best_t = tc;
            best_eta = ec;
            best_g = gres;
            best_k = kres;
            best_set = true;
        }
    };

    Eigen::VectorXd g;
    Eigen::MatrixXd jac;
    for (int iter = 0; iter <= opts.max_iters; ++iter) {
        constraints(t, R, g, jac);
        const Eigen::VectorXd grad = gradient_h(p, t);
        const double gres = g.cwiseAbs().maxCoeff();
        const double kres = (grad - jac.transpose() * eta).norm();
        result.trace.push_back({iter, objective_h(p, t), gres, kres});
        consider_best(t, eta, gres, kres);

        if (kres <= tol_stat && gres <= tol_g) {
            result.t = t;
            result.eta = eta;
            result.kkt_residual = kres;
            result.constraint_residual = gres;
            result.iterations = iter;
            result.converged = true;
            return result;
        }
        if (iter == opts.max_iters) break;

        // Newton-KKT saddle system [W, -J^T; J, 0] (dt, eta+) = (-grad, -g).
        // A doubling diagonal shift handles singularity; an inertia
        // correction tau grows until the step has positive curvature, which
        // makes it a descent direction of the merit function below.
        const double h_scale = 1.0 + H.diagonal().cwiseAbs().maxCoeff();
        Eigen::VectorXd dt, eta_next;
        bool solved = false;
        double tau = 0.0;
        while (true) {
            bool factored = false;
            for (double shift = 0.0;;) {
                Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(dim + R, dim + R);
                kkt.topLeftCorner(dim, dim) = H;
                for (int j = 0; j < R; ++j) {
                    kkt.diagonal().segment(j * R, R).array() -= 2.0 * eta[j];
                }
                kkt.topLeftCorner(dim, dim).diagonal().array() += tau;
                kkt.topRightCorner(dim, R) = -jac.transpose();
                kkt.bottomLeftCorner(R, dim) = jac;
                kkt.diagonal().array() += shift;
                Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
                if (lu.isInvertible()) {
                    Eigen::VectorXd rhs(dim + R);
                    rhs.head(dim) = -grad;
                    rhs.tail(R) = -g;
                    const Eigen::VectorXd sol = lu.solve(rhs);
                    if (sol.allFinite()) {
                        dt = sol.head(dim);
                        eta_next = sol.tail(R);
                        factored = true;
                        // curvature of the step under the shifted Hessian
                        Eigen::VectorXd w_dt = H * dt;
                        for (int j = 0; j < R; ++j)
                            w_dt.segment(j * R, R) -= 2.0 * eta[j] * dt.segment(j * R, R);
                        w_dt += (tau + shift) * dt;
                        const double curvature = dt.dot(w_dt);
                        if (dt.norm() <= 1e-14 * (1.0 + t.norm()) ||
                            curvature > 1e-14 * dt.squaredNorm()) {
                            solved = true;
                        }
                        break;
                    }
                }
                shift = (shift == 0.0) ? 1e-10 : 2.0 * shift;
                if (shift > 1e-4) break;
            }
            if (!factored)
                throw numerical_error("sqp::solve: KKT system singular after regularization");
            if (solved) break;
            tau = (tau == 0.0) ? 1e-8 * h_scale : 10.0 * tau;
            if (tau > 1e10 * h_scale)
                throw numerical_error("sqp::solve: could not find a descent direction");
        }

        // Multiplier-only update: already stationary in t (e.g. a feasible
        // start that is a KKT point); adopt the multipliers and re-check.
        if (dt.norm() <= 1e-14 * (1.0 + t.norm())) {
            eta = eta_next;
            continue;
        }

        // Backtracking on the l1 merit function h + rho * ||g||_1.
        rho = std::max(rho, eta_next.cwiseAbs().maxCoeff() + 1.0);
        const double merit0 = objective_h(p, t) + rho * g.cwiseAbs().sum();
        const double dderiv = grad.dot(dt) - rho * g.cwiseAbs().sum();
        double step = 1.0;
        bool accepted = false;
        for (int ls = 0; ls < 40; ++ls) {
            const Eigen::VectorXd t_try = t + step * dt;
            Eigen::VectorXd g_try;
            Eigen::MatrixXd jac_try;
            constraints(t_try, R, g_try, jac_try);
            const double merit_try = objective_h(p, t_try) + rho * g_try.cwiseAbs().sum();
            const double target = (dderiv < 0.0) ? merit0 + 1e-4 * step * dderiv
                                                 : merit0 - 1e-12 * (1.0 + std::abs(merit0));
            if (merit_try <= target) {
                t = t_try;
                eta = eta_next;
                result.merit_steps.emplace_back(merit0, merit_try);
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;  // no acceptable step; fall through to best iterate
    }

    result.t = best_t;
    result.eta = best_eta;
    result.kkt_residual = best_k;
    result.constraint_residual = best_g;
    result.iterations = static_cast<int>(result.trace.size()) - 1;
    result.converged = false;
    return result;
}

}  // namespace detail

/// Equality-constrained SQP (Newton-KKT steps with an l1 merit line search).
/// t0 must be feasible within 1e-6. For R <= opts.sign_start_limit the solver
/// additionally tries all sign-diagonal starts and the normalized
/// unconstrained minimizer; the feasible set is tiny there and the extra
/// starts dodge sign-flip local minima. Columns of the returned point are
/// renormalized to exact unit norm.
inline SqpResult solve(const QuadraticAlignProblem& p, const Eigen::VectorXd& t0,
                       const SqpOptions& opts = {}) {
    const int R = p.R;
    if (t0.size() != static_cast<Eigen::Index>(R) * R)
        throw std::invalid_argument("sqp::solve: t0 length must be R^2");
    {
        Eigen::VectorXd g0;
        Eigen::MatrixXd j0;
        constraints(t0, R, g0, j0);
        if (g0.cwiseAbs().maxCoeff() > 1e-6)
            throw std::invalid_argument("sqp::solve: t0 is not feasible");
    }

    const double grad_scale = 1.0 + gradient_h(p, t0).norm();

    // R = 1: the feasible set is {-1,+1}; enumerate it.
    if (R == 1) {
        const Eigen::VectorXd plus = Eigen::VectorXd::Constant(1, 1.0);
        const Eigen::VectorXd minus = Eigen::VectorXd::Constant(1, -1.0);
        const Eigen::VectorXd& best = objective_h(p, plus) <= objective_h(p, minus) ? plus : minus;
        SqpResult result;
        result.t = best;
        result.eta = Eigen::VectorXd::Constant(1, gradient_h(p, best)[0] / (2.0 * best[0]));
        result.iterations = 0;
        result.converged = true;
        result.trace.push_back({0, objective_h(p, best), 0.0, 0.0});
        return result;
    }

    std::vector<Eigen::VectorXd> starts;
    starts.push_back(t0);
    if (R <= opts.sign_start_limit) {
        for (int signs = 0; signs < (1 << R); ++signs) {
            Eigen::VectorXd cand = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(R) * R);
            for (int j = 0; j < R; ++j) cand[j * R + j] = (signs >> j & 1) ? -1.0 : 1.0;
            starts.push_back(cand);
        }
        // Unconstrained minimizer of h, columns normalized onto the feasible set.
        const Eigen::VectorXd t_free = hessian_h(p).ldlt().solve(2.0 * p.A.transpose() * p.y);
        if (t_free.allFinite()) {
            bool usable = true;
            for (int j = 0; j < R; ++j) {
                if (t_free.segment(j * R, R).norm() < 1e-12) usable = false;
            }
            if (usable) starts.push_back(detail::renormalize_columns(t_free, R));
        }
    }

    SqpResult result;
    bool have = false;
    for (const auto& start : starts) {
        SqpResult run = detail::solve_single(p, start, opts, grad_scale);
        bool better;
        if (!have) {
            better = true;
        } else if ((run.constraint_residual <= opts.tol) !=
                   (result.constraint_residual <= opts.tol)) {
            better = run.constraint_residual <= opts.tol;
        } else if (std::abs(objective_h(p, run.t) - objective_h(p, result.t)) > 1e-12) {
            better = objective_h(p, run.t) < objective_h(p, result.t);
        } else {
            better = run.converged && !result.converged;
        }
        if (better) {
            result = std::move(run);
            have = true;
        }
    }

    // Exact unit columns; re-measure the residuals at the returned point.
    result.t = detail::renormalize_columns(result.t, R);
    Eigen::VectorXd g;
    Eigen::MatrixXd jac;
    constraints(result.t, R, g, jac);
    result.constraint_residual = g.cwiseAbs().maxCoeff();
    result.kkt_residual = (gradient_h(p, result.t) - jac.transpose() * result.eta).norm();
    if (result.converged &&
        (result.kkt_residual > opts.tol * grad_scale || result.constraint_residual > opts.tol)) {
        result.converged = false;
    }
    return result;
}

/// Convergence condition at a solve endpoint: mu2 must strictly dominate
/// every multiplier, and the Lagrangian Hessian must be positive definite on
/// the full space.
inline ConvergenceReport convergence_diagnostic(const QuadraticAlignProblem& p,
                                                const SqpResult& result) {
    ConvergenceReport report;
    report.max_eta = result.eta.size() ? result.eta.maxCoeff() : 0.0;
    report.mu2_dominates = p.mu2 > report.max_eta;
    const Eigen::MatrixXd H = lagrangian_hessian(p, result.eta);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(H, Eigen::EigenvaluesOnly);
    report.min_eigenvalue = solver.eigenvalues().minCoeff();
    report.hessian_pd = report.min_eigenvalue > 0.0;
    return report;
}

/// Per-iteration trace as `iter,h,constraint_residual,kkt_residual` CSV.
inline void write_trace_csv(const std::string& path, const SqpResult& result) {
    std::ofstream out(path);
    if (!out) throw parse_error("write_trace_csv: cannot open " + path);
    out << "iter,h,constraint_residual,kkt_residual\n";
    char buf[128];
    for (const auto& tp : result.trace) {
        std::snprintf(buf, sizeof(buf), "%d,%.12g,%.12g,%.12g\n", tp.iter, tp.h,
                      tp.constraint_residual, tp.kkt_residual);
        out << buf;
    }
}

}  // namespace dasga::sqp
