#include "ranksim/skorokhod.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "ranksim/error.hpp"

namespace ranksim {

ModelMatrices build_matrices(int K) {
    if (K < 1) throw ValidationError("build_matrices: K must be >= 1");
    ModelMatrices m;
    m.K = K;
    m.R = Eigen::MatrixXd::Identity(K, K);
    for (int i = 0; i + 1 < K; ++i) m.R(i, i + 1) = -0.5;
    if (K >= 2) m.R(1, 0) = -1.0;
    for (int i = 2; i < K; ++i) m.R(i, i - 1) = -0.5;

    m.R_inv.resize(K, K);
    for (int i = 0; i < K; ++i) {
        const auto row = r_inverse_row(K, i);
        for (int j = 0; j < K; ++j) m.R_inv(i, j) = row[static_cast<std::size_t>(j)];
    }

    const double s2 = std::sqrt(2.0);
    m.A = Eigen::MatrixXd::Zero(K, K);
    for (int i = 0; i < K; ++i) {
        m.A(i, i) = s2;
        if (i > 0) m.A(i, i - 1) = -s2;
    }
    m.Lambda = Eigen::MatrixXd::Zero(K, K);
    for (int i = 0; i < K; ++i) m.Lambda(i, i) = i == 0 ? 2.0 : 4.0;
    return m;
}

std::vector<double> r_inverse_row(int K, int i) {
    std::vector<double> row(static_cast<std::size_t>(K));
    for (int j = 0; j < K; ++j) {
        if (i == 0)
            row[static_cast<std::size_t>(j)] = K - j;
        else
            row[static_cast<std::size_t>(j)] = 2.0 * (j < i ? K - i : K - j);
    }
    return row;
}

std::vector<double> r_inverse_apply(std::span<const double> v) {
    const int K = static_cast<int>(v.size());
    std::vector<double> out(v.size(), 0.0);
    if (K == 0) return out;
    // weighted[i] = sum_{j >= i} (K - j) v_j, prefix[i] = sum_{j < i} v_j
    std::vector<double> weighted(v.size() + 1, 0.0);
    for (int j = K - 1; j >= 0; --j) weighted[static_cast<std::size_t>(j)] = weighted[static_cast<std::size_t>(j) + 1] + (K - j) * v[static_cast<std::size_t>(j)];
    out[0] = weighted[0];
    double prefix = 0.0;
    for (int i = 1; i < K; ++i) {
        prefix += v[static_cast<std::size_t>(i) - 1];
        out[static_cast<std::size_t>(i)] = 2.0 * (weighted[static_cast<std::size_t>(i)] + (K - i) * prefix);
    }
    return out;
}

std::vector<double> r_inverse_apply(std::span<const double> v, const ModelMatrices& m) {
    if (static_cast<int>(v.size()) != m.K) throw ValidationError("r_inverse_apply: dimension mismatch");
    return r_inverse_apply(v);
}

MClassReport check_m_class(const Eigen::MatrixXd& M) {
    MClassReport rep;
    if (M.rows() != M.cols() || M.rows() == 0) {
        rep.reason = "matrix must be square and nonempty";
        return rep;
    }
    const Eigen::Index K = M.rows();
    // Qt = I - M must be nonnegative with zero diagonal.
    Eigen::MatrixXd Qt = Eigen::MatrixXd::Identity(K, K) - M;
    for (Eigen::Index i = 0; i < K; ++i) {
        if (Qt(i, i) != 0.0) {
            std::ostringstream os;
            os << "diagonal entry M(" << i + 1 << "," << i + 1 << ") != 1";
            rep.reason = os.str();
            return rep;
        }
        for (Eigen::Index j = 0; j < K; ++j) {
            if (!std::isfinite(Qt(i, j)) || Qt(i, j) < 0.0) {
                std::ostringstream os;
                os << "off-diagonal entry M(" << i + 1 << "," << j + 1 << ") is positive or not finite";
                rep.reason = os.str();
                return rep;
            }
        }
    }

    // Power iteration on B = Qt + I (aperiodic shift, rho(B) = rho(Qt) + 1) with
    // Collatz-Wielandt bounds min_i (Bv)_i/v_i <= rho(B) <= max_i (Bv)_i/v_i.
    const Eigen::MatrixXd B = Qt + Eigen::MatrixXd::Identity(K, K);
    Eigen::VectorXd v = Eigen::VectorXd::Ones(K);
    double lower = 0.0, upper = std::numeric_limits<double>::infinity();
    int it = 0;
    for (; it < 200; ++it) {
        const Eigen::VectorXd w = B * v;
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
        for (Eigen::Index i = 0; i < K; ++i) {
            const double r = w(i) / v(i);
            lo = std::min(lo, r);
            hi = std::max(hi, r);
        }
        lower = std::max(lower, lo - 1.0);
        upper = std::min(upper, hi - 1.0);
        v = w / w.maxCoeff();
        if (upper - lower <= 1e-10 * std::max(1.0, upper)) break;
    }
    rep.iterations = std::min(it + 1, 200);
    rep.spectral_radius = 0.5 * (lower + upper);

    const double row_bound = Qt.rowwise().sum().maxCoeff();
    const double col_bound = Qt.colwise().sum().maxCoeff();
    rep.upper_bound = std::min({upper, row_bound, col_bound});
    if (rep.upper_bound < 1.0) {
        rep.ok = true;
    } else {
        std::ostringstream os;
        os.precision(12);
        os << "spectral radius of I - M' not certified below 1 (estimate " << rep.spectral_radius << ", bound "
           << rep.upper_bound << ")";
        rep.reason = os.str();
    }
    return rep;
}

namespace {

struct SparseRow {
    std::vector<int> cols;
    std::vector<double> vals;
};

} // namespace

double complementarity_tolerance(const DiscretePath& x) { return 1e-8 * std::max(1.0, x.amplitude()); }

SkorokhodSolution solve(const DiscretePath& x, const Eigen::MatrixXd& M, const SolveOptions& opts) {
    x.check_consistent();
    const std::size_t K = x.dim();
    if (static_cast<std::size_t>(M.rows()) != K || static_cast<std::size_t>(M.cols()) != K)
        throw ValidationError("skorokhod: matrix dimension does not match path");
    if (x.empty()) throw ValidationError("skorokhod: empty path");
    for (std::size_t i = 0; i < K; ++i)
        if (!(x.at(0, i) >= 0.0)) throw ValidationError("skorokhod: x(0) must be componentwise >= 0");

    const auto mc = check_m_class(M);
    if (!mc) throw ValidationError("skorokhod: matrix is not in the M class: " + mc.reason);

    std::vector<SparseRow> qt(K);
    for (std::size_t i = 0; i < K; ++i)
        for (std::size_t j = 0; j < K; ++j)
            if (i != j && M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) != 0.0) {
                qt[i].cols.push_back(static_cast<int>(j));
                qt[i].vals.push_back(-M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
            }

    const int budget = opts.max_iterations > 0
                           ? opts.max_iterations
                           : static_cast<int>(std::ceil(10.0 * static_cast<double>(K) / (1.0 - mc.upper_bound)));
    // rounding floor: changes below a few ulps of the path scale are noise
    const double floor = 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, x.amplitude());
    const double tol = std::max(opts.tolerance, floor);

    const std::size_t N = x.size();
    const double* xv = x.values().data();
    SkorokhodSolution sol;
    sol.eta = DiscretePath(K, x.grid());
    double* eta = sol.eta.values().data();

    double change = std::numeric_limits<double>::infinity();
    double error_bound = change;
    int it = 0;
    while (error_bound >= tol && change > floor) {
        if (it >= budget) {
            std::ostringstream os;
            os << "skorokhod: iteration budget " << budget << " exhausted, residual " << change;
            throw SolverError(os.str(), change);
        }
        const double previous = change;
        change = 0.0;
        for (std::size_t i = 0; i < K; ++i) {
            const auto& row = qt[i];
            double running = 0.0;
            for (std::size_t k = 0; k < N; ++k) {
                const double* ek = eta + k * K;
                double push = -xv[k * K + i];
                for (std::size_t c = 0; c < row.cols.size(); ++c) push += row.vals[c] * ek[row.cols[c]];
                running = std::max(running, push);
                change = std::max(change, std::abs(running - ek[i]));
                eta[k * K + i] = running;
            }
        }
        ++it;
        // a posteriori bound |eta - eta*| <= change q / (1 - q) from the observed contraction q
        const double q = change / previous;
        error_bound = q < 1.0 ? change * std::max(1.0, q / (1.0 - q)) : std::numeric_limits<double>::infinity();
        if (change == 0.0) error_bound = 0.0;
    }
    sol.iterations = it;
    sol.residual = change;

    sol.y = DiscretePath(K, x.grid());
    double* y = sol.y.values().data();
    for (std::size_t k = 0; k < N; ++k) {
        const double* ek = eta + k * K;
        for (std::size_t i = 0; i < K; ++i) {
            double v = xv[k * K + i] + ek[i];
            const auto& row = qt[i];
            for (std::size_t c = 0; c < row.cols.size(); ++c) v -= row.vals[c] * ek[row.cols[c]];
            y[k * K + i] = v;
        }
    }
    return sol;
}

SolutionCheck check_solution(const DiscretePath& x, const Eigen::MatrixXd& M, const SkorokhodSolution& s) {
    const std::size_t K = x.dim();
    const std::size_t N = x.size();
    SolutionCheck c;
    c.complementarity.assign(K, 0.0);
    const double scale = std::max(1.0, x.amplitude());
    Eigen::VectorXd e(static_cast<Eigen::Index>(K));
    for (std::size_t k = 0; k < N; ++k) {
        for (std::size_t i = 0; i < K; ++i) e(static_cast<Eigen::Index>(i)) = s.eta.at(k, i);
        const Eigen::VectorXd me = M * e;
        for (std::size_t i = 0; i < K; ++i) {
            const double y = s.y.at(k, i);
            c.min_y = std::min(c.min_y, y);
            c.affine_residual =
                std::max(c.affine_residual, std::abs(y - x.at(k, i) - me(static_cast<Eigen::Index>(i))) / scale);
            if (k == 0) {
                c.eta_at_zero = std::max(c.eta_at_zero, std::abs(s.eta.at(0, i)));
            } else {
                const double d = s.eta.at(k, i) - s.eta.at(k - 1, i);
                c.max_eta_decrease = std::max(c.max_eta_decrease, -d);
                if (d > 0.0) c.complementarity[i] += std::abs(y) * d;
            }
        }
    }
    return c;
}

} // namespace ranksim
