#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ranksim/core_model.hpp"
#include "ranksim/path.hpp"
#include "ranksim/stats.hpp"

namespace ranksim {

struct SimOptions {
    /// Re-derive ranks and rates from scratch at every event and throw
    /// std::logic_error on any disagreement with the incremental bookkeeping.
    bool audit = false;
    /// Keep the full event log (time, queue, +1/-1).
    bool record_events = false;
    /// Counter stream; replication r uses stream r.
    std::uint64_t stream = 0;
};

struct QueueEvent {
    double t;
    int queue;
    int delta;
};

/// Sampled labeled-queue CTMC run with exact sojourn-time diagnostics.
struct Trajectory {
    SystemParams params;
    double horizon = 0.0;
    double sample_dt = 0.0;
    std::vector<double> sample_times;
    std::vector<LabeledState> states;
    LabeledState initial;
    LabeledState final_state;
    std::uint64_t event_count = 0;
    std::vector<std::uint64_t> arrivals;   // per queue label
    std::vector<std::uint64_t> departures; // per queue label
    std::vector<double> empty_time;        // Lebesgue time queue i was empty
    std::vector<double> tie_time_matrix;   // K*K, symmetric, time Q_i == Q_j
    std::vector<QueueEvent> events;

    explicit Trajectory(SystemParams p) : params(std::move(p)) {}
    int K() const noexcept { return params.K(); }
};

/// Simulates on [0, T] with one aggregated exponential clock of rate
/// (nK - upsilon sqrt(n)) + n * #nonempty. Arrivals go to the queue of rank j
/// with probability P(U = j); departures hit a uniformly chosen nonempty queue.
/// States are recorded at multiples of sample_dt (right-continuous).
Trajectory simulate(const SystemParams& p, const LabeledState& initial, double T, double sample_dt,
                    std::uint64_t seed, const SimOptions& opts = {});

GapPath diffusion_scale(const Trajectory& t);
/// Gap vector of a single labeled state.
std::vector<double> gap_vector(std::span<const std::int64_t> Q, double sqrt_n);

/// sqrt(n) * time queue i (0-based) spent empty.
double idle_time(const Trajectory& t, int i);
/// Time queues i and j (0-based, i != j) had equal length.
double tie_time(const Trajectory& t, int i, int j);

struct EmpiricalStationary {
    SystemParams params;
    std::vector<SampleSet> coordinates;
    std::vector<double> means;
    std::vector<std::size_t> counts;
    int replications = 0;
    double horizon = 0.0;
    double burn_in = 0.0;
    double sample_dt = 0.0;

    explicit EmpiricalStationary(SystemParams p) : params(std::move(p)) {}
};

struct StationaryRunOptions {
    double sample_dt = 1.0;
    unsigned threads = 0; // 0: RANK_SIM_THREADS or hardware count
    LabeledState initial; // empty: all queues empty
};

/// Pools post-burn-in gap samples from independent replications. Refuses
/// parameters that violate the stability condition.
EmpiricalStationary empirical_stationary(const SystemParams& p, double T, double burn_in, int replications,
                                         std::uint64_t seed, const StationaryRunOptions& opts = {});

/// Per-coordinate values of a gap path at times >= t_from.
std::vector<std::vector<double>> collect_samples(const DiscretePath& path, double t_from);

/// `metric,index,value` rows (1-based indices): idle, empty_time, tie, arrivals, departures.
void write_diagnostics_csv(std::ostream& os, const Trajectory& t);

} // namespace ranksim
