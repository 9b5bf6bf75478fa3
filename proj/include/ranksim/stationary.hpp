#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "ranksim/core_model.hpp"

namespace ranksim {

/// Product of independent exponentials on the nonnegative orthant:
/// density prod_i rate_i * exp(-rate_i x_i).
class ProductExpLaw {
public:
    explicit ProductExpLaw(std::vector<double> rates);

    std::size_t dim() const noexcept { return rates_.size(); }
    const std::vector<double>& rates() const noexcept { return rates_; }
    /// Exponent vector of the density, eta_i = -rate_i.
    std::vector<double> eta() const;

    double normalizing_constant() const noexcept;
    double density(std::span<const double> x) const;
    double mean(std::size_t i) const { return 1.0 / rates_.at(i); }
    std::vector<double> means() const;
    double cdf(std::size_t i, double x) const;
    double quantile(std::size_t i, double u) const;

    /// count draws per coordinate; coordinate i uses its own counter stream.
    std::vector<std::vector<double>> sample(std::size_t count, std::uint64_t seed) const;

private:
    std::vector<double> rates_;
};

struct StabilityReport {
    bool stable = false;
    std::vector<double> tail_sums; // sum_{j >= i} a_tilde_j
    double margin = 0.0;           // smallest tail sum
    explicit operator bool() const noexcept { return stable; }
};

/// Stable iff every tail sum of a_tilde is strictly positive.
StabilityReport stability_check(std::span<const double> a_tilde);
StabilityReport stability_check(const SystemParams& p);

/// eta_i = -sum_{j >= i} a_tilde_j.
std::vector<double> eta_vector(std::span<const double> a_tilde);
std::vector<double> eta_vector(const SystemParams& p);
/// Same vector through 2 Lambda^{-1} R^{-1} rho with the closed-form inverse.
std::vector<double> eta_via_matrices(std::span<const double> a_tilde);

/// Throws RegimeError for unstable parameters.
ProductExpLaw stationary_law(const SystemParams& p);
ProductExpLaw stationary_law(std::span<const double> a_tilde);

/// (a, b) when a_tilde = (a - b, a, ..., a) with K >= 2, compared exactly.
std::optional<std::pair<double, double>> mjsq_shape(std::span<const double> a_tilde);

/// Limit law of the upper K-1 gaps when a >= 0 and b > aK: rates (K-i) b / K.
ProductExpLaw unstable_gap_law(const SystemParams& p);
ProductExpLaw unstable_gap_law(std::span<const double> a_tilde);

/// Steady-state workload/imbalance figures for a d-scheme. Quantities not
/// defined for the scheme's regime are left empty.
struct MetricsReport {
    int d = 0;
    int K = 0;
    double a = 0.0;
    double b = 0.0;
    double upsilon = 0.0;
    std::optional<double> workload_mean;  // E W^d
    std::optional<double> imbalance_mean; // E D^d
    std::optional<double> R_W;
    std::optional<double> R_D;
    std::optional<double> D_stab;
    std::optional<double> D_unst;
    std::optional<double> workload_from_law; // sum_i (K-i+1)/lambda_i
};

/// E W^d = (K-d)/a + sum_{j<=d} (K-j+1) d / ((K-j+1) a d - (d-j+1)(aK - upsilon))
/// E D^d = sum_{2<=j<=d} d / (...) + sum_{j>d} 1 / ((K-j+1) a)
MetricsReport metrics(const SchemeSpec& scheme);

double workload_mean_closed_form(int K, double a, double upsilon, int d);
double imbalance_mean_closed_form(int K, double a, double upsilon, int d);

} // namespace ranksim
