#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ranksim/core_model.hpp"
#include "ranksim/path.hpp"
#include "ranksim/skorokhod.hpp"
#include "ranksim/stats.hpp"

namespace ranksim {

struct DiffusionConfig {
    int K = 1;
    std::vector<double> rho;
    ModelMatrices matrices;
    double dt = 1e-3;
    double T = 1.0;
    std::uint64_t seed = 0;
    std::vector<double> Z0; // empty: origin
    double noise_scale = 1.0;

    /// Effective step dt / 2^refinement. Brownian increments at level r are
    /// bridge refinements of level r-1, so runs at different levels share a path.
    int refinement = 0;
    /// Insert a sampled per-coordinate bridge minimum inside each step before
    /// the reflection solve (only when noise_scale > 0).
    bool bridge_correction = true;
    /// Fine steps per windowed Skorokhod solve.
    std::size_t block_steps = 100000;
    /// Keep every output_stride-th fine grid point (the endpoint is always kept).
    std::size_t output_stride = 1;
    /// Start of the running time average reported with the result.
    double average_from = 0.0;

    /// Drift from a_tilde, matrices for its K.
    static DiffusionConfig from_a_tilde(std::span<const double> a_tilde);
    /// Throws ValidationError unless dt > 0, T >= dt, Z0 >= 0 and sizes agree.
    void validate() const;
    double step() const;
    std::uint64_t fine_steps() const;
};

struct DiffusionResult {
    GapPath Z;
    LocalTimePath L;
    /// Per-coordinate average of Z over fine grid points with t >= average_from.
    std::vector<double> time_average;
    int max_solver_iterations = 0;
};

/// Z = Gamma(Z0 + rho t + noise * A B) with M = R, windowed in blocks that
/// restart from the previous block's terminal value with cumulative L.
DiffusionResult simulate_reflected(const DiffusionConfig& c);

/// K particles on [0, inf) reflected independently at 0. The lowest (ties by
/// label) drifts at -a + b and the others at -a, all with dispersion sqrt2.
/// Under noise each step is an exact reflected-Brownian step with frozen
/// drifts. Returns the sorted-particle gap path. Requires rho to match the
/// MJSQ drift of (a, b).
GapPath simulate_atlas_ordered(const DiffusionConfig& c, double a, double b);

/// OLS slope of coordinate 1 over the final half of the path; needs a time span >= 100.
SlopeEstimate unstable_escape_slope(const GapPath& path);
SlopeEstimate unstable_escape_slope(const DiffusionConfig& c);

/// Per-coordinate mean of the path values at grid points with t >= t_from.
std::vector<double> time_average(const DiscretePath& path, double t_from);

/// Terminal values Z(T) of independent reflected runs; replication r uses seed derive_seed(c.seed, r).
std::vector<std::vector<double>> terminal_samples(const DiffusionConfig& c, int replications, unsigned threads = 0);

} // namespace ranksim
