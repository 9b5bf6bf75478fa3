#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "ranksim/path.hpp"
#include "ranksim/stationary.hpp"

namespace ranksim {

/// Samples of one coordinate or metric. effective_count discounts
/// autocorrelation through a thinning factor declared by the producer.
struct SampleSet {
    std::vector<double> values;
    std::string label;
    std::size_t effective_count = 0;

    SampleSet() = default;
    SampleSet(std::vector<double> v, std::string label);
    SampleSet(std::vector<double> v, std::string label, double thinning);

    std::size_t size() const noexcept { return values.size(); }
    double mean() const;
};

/// Thresholds a fit must meet. The named presets reflect the finite-n bias
/// of CTMC samples versus the discretization-only error of diffusion samples.
struct FitThresholds {
    double ks = 0.05;
    double mean_rel = 0.10;

    static constexpr FitThresholds ctmc() { return {0.05, 0.10}; }
    static constexpr FitThresholds diffusion() { return {0.03, 0.05}; }
};

struct FitReport {
    std::string label;
    double ks_distance = 0.0;
    double mean_rel_error = 0.0;
    double sample_mean = 0.0;
    double target_mean = 0.0;
    std::string target_law;
    std::size_t count = 0;
    std::size_t effective_count = 0;
    FitThresholds thresholds;
    bool pass = false;
};

/// sup_x |F_n(x) - F(x)|, evaluated at both sides of every jump of the ECDF.
double ks_distance(std::span<const double> samples, const std::function<double(double)>& cdf);
double ks_distance(const SampleSet& s, const std::function<double(double)>& cdf);

/// Two-sample statistic sup_x |F_n(x) - G_m(x)|; ties handled by advancing
/// both ECDFs past equal values.
double ks_two_sample(std::span<const double> a, std::span<const double> b);

/// Per-coordinate KS against Exp(rate_i) and relative error against 1/rate_i.
std::vector<FitReport> fit_product_exp(const std::vector<SampleSet>& samples, const ProductExpLaw& law,
                                       const FitThresholds& thresholds = {});
bool all_pass(const std::vector<FitReport>& reports);

struct SlopeEstimate {
    double slope = 0.0;
    double intercept = 0.0;
    double std_error = 0.0;
    std::size_t points = 0;
};

SlopeEstimate ols_slope(std::span<const double> t, std::span<const double> y);
/// OLS on the trailing window_fraction of the path's time span.
SlopeEstimate slope_estimate(const DiscretePath& path, std::size_t coordinate, double window_fraction);

double mean(std::span<const double> v);
double variance(std::span<const double> v);
double sample_correlation(std::span<const double> a, std::span<const double> b);

/// `x,F` rows of the empirical CDF.
void write_ecdf_csv(std::ostream& os, std::span<const double> samples);

} // namespace ranksim
