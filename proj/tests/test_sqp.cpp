#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "dasga/sqp.hpp"
#include "dasga/align.hpp"
#include "test_util.hpp"

using namespace dasga;
using sqp::QuadraticAlignProblem;

TEST_CASE("vectorize is column-major") {
    Eigen::MatrixXd T(2, 2);
    T << 1.0, 2.0, 3.0, 4.0;
    const Eigen::VectorXd t = sqp::vectorize(T);
    Eigen::VectorXd expected(4);
    expected << 1.0, 3.0, 2.0, 4.0;
    CHECK(t == expected);
    CHECK(sqp::devectorize(t) == T);

    std::mt19937_64 rng(2);
    const Eigen::MatrixXd T5 = testutil::random_matrix(rng, 5, 5);
    CHECK(sqp::devectorize(sqp::vectorize(T5)) == T5);

    CHECK_THROWS_AS(sqp::devectorize(Eigen::VectorXd::Zero(3)), std::invalid_argument);
    CHECK_THROWS_AS(sqp::vectorize(Eigen::MatrixXd::Zero(2, 3)), std::invalid_argument);
}

TEST_CASE("objective and gradient closed forms") {
    std::mt19937_64 rng(4);
    QuadraticAlignProblem p = testutil::random_sqp_problem(rng, 3, 6, 2.0);

    SECTION("at t = 0") {
        const Eigen::VectorXd t0 = Eigen::VectorXd::Zero(9);
        CHECK(sqp::objective_h(p, t0) == Catch::Approx(p.y.squaredNorm()).margin(1e-12));
        const Eigen::VectorXd expected = -2.0 * p.A.transpose() * p.y;
        CHECK((sqp::gradient_h(p, t0) - expected).norm() <= 1e-12);
    }
    SECTION("pure quadratic when y = 0, F = I, mu2 = 1") {
        p.y.setZero();
        p.F_diag.setOnes();
        p.mu2 = 1.0;
        const Eigen::VectorXd t = testutil::random_vector(rng, 9);
        const double expected =
            t.dot((p.A.transpose() * p.A * t)) + t.squaredNorm();
        CHECK(sqp::objective_h(p, t) == Catch::Approx(expected).epsilon(1e-12));
    }
    SECTION("gradient matches central differences") {
        for (const int R : {2, 3, 4}) {
            QuadraticAlignProblem q = testutil::random_sqp_problem(rng, R, 5, R / 2.0 + 0.5);
            const Eigen::VectorXd t = testutil::random_vector(rng, R * R);
            const Eigen::VectorXd fd =
                testutil::fd_gradient([&](const Eigen::VectorXd& x) { return sqp::objective_h(q, x); }, t);
            const Eigen::VectorXd an = sqp::gradient_h(q, t);
            REQUIRE((an - fd).norm() <= 1e-5 * (1.0 + fd.norm()));
        }
    }
}

TEST_CASE("hessian closed form") {
    std::mt19937_64 rng(6);
    SECTION("A = 0, F = I, mu2 = 1 gives 2I") {
        QuadraticAlignProblem p;
        p.R = 2;
        p.A = Eigen::MatrixXd::Zero(3, 4);
        p.y = Eigen::VectorXd::Zero(3);
        p.F_diag = Eigen::VectorXd::Ones(4);
        p.mu2 = 1.0;
        CHECK(sqp::hessian_h(p) == 2.0 * Eigen::MatrixXd::Identity(4, 4));
    }
    SECTION("symmetry and finite differences") {
        QuadraticAlignProblem p = testutil::random_sqp_problem(rng, 3, 7, 1.5);
        const Eigen::MatrixXd H = sqp::hessian_h(p);
        REQUIRE((H - H.transpose()).cwiseAbs().maxCoeff() <= 1e-12);

        const Eigen::VectorXd t = testutil::random_vector(rng, 9);
        const Eigen::MatrixXd fd = testutil::fd_jacobian(
            [&](const Eigen::VectorXd& x) { return sqp::gradient_h(p, x); }, t);
        REQUIRE((H - fd).cwiseAbs().maxCoeff() <= 1e-4 * (1.0 + fd.cwiseAbs().maxCoeff()));
    }
}

TEST_CASE("constraints and jacobian") {
    Eigen::VectorXd g;
    Eigen::MatrixXd jac;
    SECTION("identity is feasible") {
        sqp::constraints(sqp::vectorize(Eigen::MatrixXd::Identity(3, 3)), 3, g, jac);
        CHECK(g.cwiseAbs().maxCoeff() == 0.0);
    }
    SECTION("doubled identity violates each constraint by 3") {
        sqp::constraints(sqp::vectorize(2.0 * Eigen::MatrixXd::Identity(3, 3)), 3, g, jac);
        for (int j = 0; j < 3; ++j) CHECK(g[j] == Catch::Approx(3.0));
    }
    SECTION("jacobian matches finite differences") {
        std::mt19937_64 rng(12);
        const int R = 3;
        const Eigen::VectorXd t = testutil::random_vector(rng, R * R);
        sqp::constraints(t, R, g, jac);
        for (int j = 0; j < R; ++j) {
            const Eigen::VectorXd fd = testutil::fd_gradient(
                [&](const Eigen::VectorXd& x) {
                    Eigen::VectorXd gx;
                    Eigen::MatrixXd jx;
                    sqp::constraints(x, R, gx, jx);
                    return gx[j];
                },
                t);
            REQUIRE((jac.row(j).transpose() - fd).norm() <= 1e-6 * (1.0 + fd.norm()));
        }
    }
}

TEST_CASE("lagrangian hessian") {
    std::mt19937_64 rng(14);
    QuadraticAlignProblem p = testutil::random_sqp_problem(rng, 3, 5, 1.5);

    SECTION("zero multipliers recover the objective hessian") {
        CHECK(sqp::lagrangian_hessian(p, Eigen::VectorXd::Zero(3)) == sqp::hessian_h(p));
    }
    SECTION("A = 0 with eta_j = mu2 zeroes exactly the mask-diagonal entries") {
        QuadraticAlignProblem q = p;
        q.A.setZero();
        const Eigen::VectorXd eta = Eigen::VectorXd::Constant(3, q.mu2);
        const Eigen::MatrixXd H = sqp::lagrangian_hessian(q, eta);
        for (int j = 0; j < 3; ++j) {
            for (int i = 0; i < 3; ++i) {
                const double expected = 2.0 * q.mu2 * (q.F_diag[j * 3 + i] * q.F_diag[j * 3 + i] - 1.0);
                REQUIRE(H(j * 3 + i, j * 3 + i) == Catch::Approx(expected).margin(1e-12));
                REQUIRE(H(j * 3 + i, j * 3 + i) >= -1e-12);
                if (i == j) REQUIRE(H(j * 3 + i, j * 3 + i) == Catch::Approx(0.0).margin(1e-12));
            }
        }
    }
    SECTION("matches finite differences of the lagrangian gradient") {
        const Eigen::VectorXd eta = testutil::random_vector(rng, 3);
        const Eigen::VectorXd t = testutil::random_vector(rng, 9);
        const auto lagr_grad = [&](const Eigen::VectorXd& x) {
            Eigen::VectorXd gx;
            Eigen::MatrixXd jx;
            sqp::constraints(x, 3, gx, jx);
            return Eigen::VectorXd(sqp::gradient_h(p, x) - jx.transpose() * eta);
        };
        const Eigen::MatrixXd fd = testutil::fd_jacobian(lagr_grad, t);
        const Eigen::MatrixXd an = sqp::lagrangian_hessian(p, eta);
        REQUIRE((an - fd).cwiseAbs().maxCoeff() <= 1e-4 * (1.0 + fd.cwiseAbs().maxCoeff()));
    }
}

TEST_CASE("solve enumerates the R = 1 feasible set") {
    std::mt19937_64 rng(16);
    QuadraticAlignProblem p;
    p.R = 1;
    p.A = testutil::random_matrix(rng, 4, 1);
    p.y = testutil::random_vector(rng, 4);
    p.F_diag = Eigen::VectorXd::Ones(1);
    p.mu2 = 0.7;

    const double h_plus = sqp::objective_h(p, Eigen::VectorXd::Constant(1, 1.0));
    const double h_minus = sqp::objective_h(p, Eigen::VectorXd::Constant(1, -1.0));
    for (const double start : {1.0, -1.0}) {
        const auto result = sqp::solve(p, Eigen::VectorXd::Constant(1, start));
        REQUIRE(result.converged);
        CHECK(result.t[0] == (h_plus <= h_minus ? 1.0 : -1.0));
        CHECK(result.constraint_residual == 0.0);
    }
}

TEST_CASE("solve with no data term keeps a diagonal start") {
    QuadraticAlignProblem p;
    p.R = 3;
    p.A = Eigen::MatrixXd::Zero(2, 9);
    p.y = Eigen::VectorXd::Zero(2);
    p.mu2 = 1.3;
    const Eigen::MatrixXd mask = penalty_mask(3, 1.0);
    p.F_diag.resize(9);
    for (int j = 0; j < 3; ++j) p.F_diag.segment(j * 3, 3) = mask.col(j);

    Eigen::MatrixXd T0 = Eigen::MatrixXd::Identity(3, 3);
    T0(1, 1) = -1.0;
    const auto result = sqp::solve(p, sqp::vectorize(T0));
    REQUIRE(result.converged);
    CHECK(result.t == sqp::vectorize(T0));  // no progress needed
    CHECK(result.constraint_residual == 0.0);
    CHECK(sqp::objective_h(p, result.t) == Catch::Approx(p.mu2 * 3.0).margin(1e-12));
}

TEST_CASE("solve reaches the random-search optimum for R = 2") {
    std::mt19937_64 rng(18);
    for (int trial = 0; trial < 3; ++trial) {
        QuadraticAlignProblem p = testutil::random_sqp_problem(rng, 2, 6, 1.0);
        const Eigen::VectorXd t0 = testutil::random_feasible_t(rng, 2);
        const auto result = sqp::solve(p, t0);
        REQUIRE(result.converged);

        std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
        double best = std::numeric_limits<double>::infinity();
        Eigen::VectorXd cand(4);
        for (int i = 0; i < 10000; ++i) {
            const double a = angle(rng), b = angle(rng);
            cand << std::cos(a), std::sin(a), std::cos(b), std::sin(b);
            best = std::min(best, sqp::objective_h(p, cand));
        }
        CHECK(sqp::objective_h(p, result.t) <= best + 1e-6);
    }
}

TEST_CASE("solve residuals and determinism") {
    std::mt19937_64 rng(20);
    for (int trial = 0; trial < 10; ++trial) {
        const int R = std::uniform_int_distribution<int>(2, 4)(rng);
        QuadraticAlignProblem p = testutil::random_sqp_problem(rng, R, 6, R / 2.0 + 0.5);
        const Eigen::VectorXd t0 = testutil::random_feasible_t(rng, R);
        const double scale = 1.0 + sqp::gradient_h(p, t0).norm();

        const auto result = sqp::solve(p, t0);
        if (result.converged) {
            REQUIRE(result.constraint_residual <= 1e-6);
            REQUIRE(result.kkt_residual <= 1e-6 * scale);
        }
        for (const auto& [before, after] : result.merit_steps) {
            REQUIRE(after <= before + 1e-12 * (1.0 + std::abs(before)));
        }

        const auto again = sqp::solve(p, t0);
        REQUIRE(result.t == again.t);
        REQUIRE(result.eta == again.eta);
    }
}

TEST_CASE("solve rejects an infeasible start") {
    std::mt19937_64 rng(22);
    QuadraticAlignProblem p = testutil::random_sqp_problem(rng, 2, 4, 1.0);
    CHECK_THROWS_AS(sqp::solve(p, Eigen::VectorXd::Constant(4, 2.0)), std::invalid_argument);
}

TEST_CASE("convergence diagnostic") {
    std::mt19937_64 rng(24);
    QuadraticAlignProblem p = testutil::random_sqp_problem(rng, 3, 5, 1.5);

    SECTION("zero multipliers with positive mu2 dominate") {
        sqp::SqpResult result;
        result.eta = Eigen::VectorXd::Zero(3);
        const auto report = sqp::convergence_diagnostic(p, result);
        CHECK(report.mu2_dominates);
        CHECK(report.hessian_pd);
    }
    SECTION("eta touching mu2 fails the strict condition") {
        sqp::SqpResult result;
        result.eta = Eigen::VectorXd::Zero(3);
        result.eta[1] = p.mu2;
        CHECK_FALSE(sqp::convergence_diagnostic(p, result).mu2_dominates);
    }
    SECTION("minimum eigenvalue matches an independent eigensolve") {
        const Eigen::VectorXd t0 = testutil::random_feasible_t(rng, 3);
        const auto result = sqp::solve(p, t0);
        const auto report = sqp::convergence_diagnostic(p, result);

        // independent assembly of the Lagrangian Hessian
        Eigen::MatrixXd H = 2.0 * (p.A.transpose() * p.A);
        for (int k = 0; k < 9; ++k) H(k, k) += 2.0 * p.mu2 * p.F_diag[k] * p.F_diag[k];
        for (int j = 0; j < 3; ++j)
            for (int i = 0; i < 3; ++i) H(j * 3 + i, j * 3 + i) -= 2.0 * result.eta[j];
        const double min_eig =
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(H, Eigen::EigenvaluesOnly)
                .eigenvalues()
                .minCoeff();
        CHECK(report.min_eigenvalue == Catch::Approx(min_eig).margin(1e-10));
        CHECK(report.hessian_pd == (min_eig > 0.0));
    }
}

TEST_CASE("trace csv writer") {
    std::mt19937_64 rng(26);
    QuadraticAlignProblem p = testutil::random_sqp_problem(rng, 2, 4, 1.0);
    const auto result = sqp::solve(p, testutil::random_feasible_t(rng, 2));
    const auto path = (std::filesystem::temp_directory_path() / "sqp_trace.csv").string();
    sqp::write_trace_csv(path, result);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "iter,h,constraint_residual,kkt_residual");
}
