#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <vector>

#include "ranksim/path.hpp"

namespace ranksim {

/// Reflection, dispersion and covariance-diagonal matrices of the gap diffusion.
struct ModelMatrices {
    int K = 0;
    Eigen::MatrixXd R;      // reflection matrix, unit diagonal
    Eigen::MatrixXd R_inv;  // closed-form inverse of R
    Eigen::MatrixXd A;      // lower bidiagonal, sqrt(2) / -sqrt(2)
    Eigen::MatrixXd Lambda; // diag(A A')
};

ModelMatrices build_matrices(int K);

/// Row i (0-based) of R^{-1}: (K, K-1, ..., 1) for i = 0, twice
/// (K-i, ..., K-i, K-i, K-i-1, ..., 1) for i >= 1.
std::vector<double> r_inverse_row(int K, int i);

/// R^{-1} v in O(K) from the closed-form rows.
std::vector<double> r_inverse_apply(std::span<const double> v, const ModelMatrices& m);
std::vector<double> r_inverse_apply(std::span<const double> v);

struct MClassReport {
    bool ok = false;
    std::string reason;           // empty when ok
    double spectral_radius = 0.0; // power-iteration estimate of rho(I - M')
    double upper_bound = 0.0;     // certified upper bound used for the verdict
    int iterations = 0;
    explicit operator bool() const noexcept { return ok; }
};

/// M = I - Q' with Q >= 0, zero diagonal and spectral radius < 1.
MClassReport check_m_class(const Eigen::MatrixXd& M);

struct SolveOptions {
    double tolerance = 1e-10;  // bound on sup|eta - eta*| from the last change and contraction rate
    int max_iterations = 0;    // 0: ceil(10 K / (1 - spectral radius))
};

struct SkorokhodSolution {
    DiscretePath eta; // pushing process
    DiscretePath y;   // reflected path
    int iterations = 0;
    double residual = 0.0; // last sup-norm change
};

/// Solves y = x + M eta, eta nondecreasing from 0, y >= 0, eta_i increasing
/// only where y_i = 0, on the grid of x (values read at grid points).
///
/// Uses the monotone fixed-point map
///   eta_i(t_k) <- max_{m <= k} [ (Q' eta)_i(t_m) - x_i(t_m) ]^+,   Q' = I - M,
/// swept coordinate by coordinate (Gauss-Seidel order) starting from eta = 0.
/// Stops once the sweep change c and observed contraction q = c / c_prev give
/// c * max(1, q / (1 - q)) < tolerance, or c falls to the rounding floor
/// 64 eps max(1, sup|x|).
/// Throws ValidationError for a non M-class matrix or x(0) < 0 and SolverError
/// when the iteration budget runs out.
SkorokhodSolution solve(const DiscretePath& x, const Eigen::MatrixXd& M, const SolveOptions& opts = {});

/// Worst-case violations of the solution invariants on a solved instance.
struct SolutionCheck {
    double min_y = 0.0;               // most negative entry of y (0 if none)
    double max_eta_decrease = 0.0;    // largest drop of eta between grid points
    double affine_residual = 0.0;     // sup |y - x - M eta| / max(1, sup|x|)
    std::vector<double> complementarity; // per coordinate sum_k |y_i(t_k)| * d eta_i(t_k)
    double eta_at_zero = 0.0;         // sup |eta(0)|
};

SolutionCheck check_solution(const DiscretePath& x, const Eigen::MatrixXd& M, const SkorokhodSolution& s);

/// Default complementarity tolerance: 1e-8 * max(1, sup|x|).
double complementarity_tolerance(const DiscretePath& x);

} // namespace ranksim
