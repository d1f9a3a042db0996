#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "dasga/errors.hpp"
#include "dasga/graph.hpp"

namespace dasga {

/// Truncated graph Fourier basis: the R smallest Laplacian eigenpairs,
/// eigenvalues ascending, eigenvector columns orthonormal.
struct SpectralBasis {
    Eigen::VectorXd eigenvalues;   // length R, ascending, nonnegative
    Eigen::MatrixXd eigenvectors;  // n x R, orthonormal columns
    int n = 0;
    int basis_size() const { return static_cast<int>(eigenvalues.size()); }
};

/// R smallest eigenpairs of the Laplacian. Deterministic sign convention:
/// each eigenvector is scaled so its largest-magnitude entry is positive
/// (ties broken by the first such entry).
inline SpectralBasis eigendecompose(const Laplacian& lap, int R) {
    const int n = static_cast<int>(lap.matrix.rows());
    if (R < 1 || R > n) throw std::invalid_argument("eigendecompose: require 1 <= R <= n");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(lap.matrix);
    if (solver.info() != Eigen::Success)
        throw numerical_error("eigendecompose: eigensolver did not converge");

    SpectralBasis basis;
    basis.n = n;
    basis.eigenvalues = solver.eigenvalues().head(R);
    basis.eigenvectors = solver.eigenvectors().leftCols(R);

    for (int c = 0; c < R; ++c) {
        if (basis.eigenvalues[c] < -1e-10)
            throw numerical_error("eigendecompose: Laplacian not PSD, eigenvalue " +
                                  std::to_string(basis.eigenvalues[c]));
        if (basis.eigenvalues[c] < 0.0) basis.eigenvalues[c] = 0.0;

        int arg = 0;
        double best = -1.0;
        for (int r = 0; r < n; ++r) {
            const double mag = std::abs(basis.eigenvectors(r, c));
            if (mag > best) {
                best = mag;
                arg = r;
            }
        }
        if (basis.eigenvectors(arg, c) < 0.0) basis.eigenvectors.col(c) = -basis.eigenvectors.col(c);

        const double residual =
            (lap.matrix * basis.eigenvectors.col(c) - basis.eigenvalues[c] * basis.eigenvectors.col(c))
                .norm();
        if (residual > 1e-6 * std::max(1.0, basis.eigenvalues[c]))
            throw numerical_error("eigendecompose: eigen-residual " + std::to_string(residual) +
                                  " at column " + std::to_string(c));
    }
    return basis;
}

/// Graph Fourier transform: coefficients <f, u_k> for k = 1..R.
inline Eigen::VectorXd gft(const SpectralBasis& basis, const Eigen::VectorXd& f) {
    if (f.size() != basis.n)
        throw std::invalid_argument("gft: signal length does not match graph size");
    return basis.eigenvectors.transpose() * f;
}

/// Inverse transform: reconstructs sum_k coeffs_k u_k.
inline Eigen::VectorXd igft(const SpectralBasis& basis, const Eigen::VectorXd& coeffs) {
    if (coeffs.size() != basis.basis_size())
        throw std::invalid_argument("igft: coefficient length does not match basis size");
    return basis.eigenvectors * coeffs;
}

/// Magnitude spectrum (lambda_k, |<f, u_k>|), ordered by frequency.
inline std::vector<std::pair<double, double>> spectrum_report(const SpectralBasis& basis,
                                                              const Eigen::VectorXd& f) {
    const Eigen::VectorXd coeffs = gft(basis, f);
    std::vector<std::pair<double, double>> report(basis.basis_size());
    for (int k = 0; k < basis.basis_size(); ++k) {
        report[k] = {basis.eigenvalues[k], std::abs(coeffs[k])};
    }
    return report;
}

/// `lambda,magnitude` CSV for plotting.
inline void write_spectrum_csv(const std::string& path,
                               const std::vector<std::pair<double, double>>& report) {
    std::ofstream out(path);
    if (!out) throw parse_error("write_spectrum_csv: cannot open " + path);
    out << "lambda,magnitude\n";
    char buf[80];
    for (const auto& [lambda, mag] : report) {
        std::snprintf(buf, sizeof(buf), "%.12g,%.12g\n", lambda, mag);
        out << buf;
    }
}

}  // namespace dasga
