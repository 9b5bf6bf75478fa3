#include "ranksim/ctmc.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "ranksim/error.hpp"
#include "ranksim/parallel.hpp"
#include "ranksim/rng.hpp"
#include "ranksim/skorokhod.hpp"
#include "ranksim/stationary.hpp"

namespace ranksim {

namespace {

// Labels in rank order plus each label's position, kept sorted under +-1 moves.
class RankBook {
public:
    explicit RankBook(const std::vector<std::int64_t>& Q) : order_(rank_map(Q)), pos_(Q.size()) {
        for (std::size_t r = 0; r < order_.size(); ++r) pos_[static_cast<std::size_t>(order_[r])] = static_cast<int>(r);
    }

    int label_at(int rank) const { return order_[static_cast<std::size_t>(rank)]; }
    const std::vector<int>& order() const { return order_; }

    void moved_up(const std::vector<std::int64_t>& Q, int q) {
        int p = pos_[static_cast<std::size_t>(q)];
        const int K = static_cast<int>(order_.size());
        while (p + 1 < K) {
            const int nxt = order_[static_cast<std::size_t>(p) + 1];
            if (Q[static_cast<std::size_t>(nxt)] < Q[static_cast<std::size_t>(q)] ||
                (Q[static_cast<std::size_t>(nxt)] == Q[static_cast<std::size_t>(q)] && nxt < q)) {
                swap_ranks(p, p + 1);
                ++p;
            } else {
                break;
            }
        }
    }

    void moved_down(const std::vector<std::int64_t>& Q, int q) {
        int p = pos_[static_cast<std::size_t>(q)];
        while (p > 0) {
            const int prv = order_[static_cast<std::size_t>(p) - 1];
            if (Q[static_cast<std::size_t>(prv)] > Q[static_cast<std::size_t>(q)] ||
                (Q[static_cast<std::size_t>(prv)] == Q[static_cast<std::size_t>(q)] && prv > q)) {
                swap_ranks(p - 1, p);
                --p;
            } else {
                break;
            }
        }
    }

private:
    void swap_ranks(int r1, int r2) {
        std::swap(order_[static_cast<std::size_t>(r1)], order_[static_cast<std::size_t>(r2)]);
        pos_[static_cast<std::size_t>(order_[static_cast<std::size_t>(r1)])] = r1;
        pos_[static_cast<std::size_t>(order_[static_cast<std::size_t>(r2)])] = r2;
    }

    std::vector<int> order_;
    std::vector<int> pos_;
};

void accumulate_sojourn(const std::vector<std::int64_t>& Q, const RankBook& book, int empties, double dt,
                        std::vector<double>& empty_time, std::vector<double>& tie) {
    const int K = static_cast<int>(Q.size());
    for (int r = 0; r < empties; ++r) empty_time[static_cast<std::size_t>(book.label_at(r))] += dt;
    // Tied queues occupy consecutive ranks.
    int start = 0;
    while (start < K) {
        int end = start + 1;
        const auto v = Q[static_cast<std::size_t>(book.label_at(start))];
        while (end < K && Q[static_cast<std::size_t>(book.label_at(end))] == v) ++end;
        for (int r = start; r < end; ++r)
            for (int s = r + 1; s < end; ++s) {
                const auto i = static_cast<std::size_t>(book.label_at(r));
                const auto j = static_cast<std::size_t>(book.label_at(s));
                tie[i * static_cast<std::size_t>(K) + j] += dt;
                tie[j * static_cast<std::size_t>(K) + i] += dt;
            }
        start = end;
    }
}

void audit_state(const std::vector<std::int64_t>& Q, const RankBook& book, int empties, double total_rate,
                 const SystemParams& p) {
    if (rank_map(Q) != book.order()) throw std::logic_error("ctmc audit: incremental ranks disagree with rank_map");
    const auto nonempty = std::count_if(Q.begin(), Q.end(), [](std::int64_t v) { return v > 0; });
    if (static_cast<int>(Q.size()) - nonempty != empties) throw std::logic_error("ctmc audit: empty count mismatch");
    const double expect = p.arrival_rate() + static_cast<double>(p.n()) * static_cast<double>(nonempty);
    if (std::abs(expect - total_rate) > 1e-9 * expect) throw std::logic_error("ctmc audit: total event rate mismatch");
    for (auto v : Q)
        if (v < 0) throw std::logic_error("ctmc audit: negative queue length");
}

} // namespace

Trajectory simulate(const SystemParams& p, const LabeledState& initial, double T, double sample_dt,
                    std::uint64_t seed, const SimOptions& opts) {
    require_valid(p);
    if (!(T > 0.0) || !std::isfinite(T)) throw ValidationError("simulate: horizon must be positive");
    if (!(sample_dt > 0.0)) throw ValidationError("simulate: sample_dt must be positive");
    const int K = p.K();
    LabeledState init = initial;
    if (init.Q.empty()) init.Q.assign(static_cast<std::size_t>(K), 0);
    if (static_cast<int>(init.Q.size()) != K) throw ValidationError("simulate: initial state has wrong length");
    for (auto v : init.Q)
        if (v < 0) throw ValidationError("simulate: initial queue lengths must be >= 0");

    Trajectory tr{p};
    tr.horizon = T;
    tr.sample_dt = sample_dt;
    tr.initial = init;
    tr.arrivals.assign(static_cast<std::size_t>(K), 0);
    tr.departures.assign(static_cast<std::size_t>(K), 0);
    tr.empty_time.assign(static_cast<std::size_t>(K), 0.0);
    tr.tie_time_matrix.assign(static_cast<std::size_t>(K) * static_cast<std::size_t>(K), 0.0);

    const std::size_t n_samples = static_cast<std::size_t>(std::floor(T / sample_dt + 1e-9)) + 1;
    tr.sample_times.reserve(n_samples);
    tr.states.reserve(n_samples);

    const double arrival = p.arrival_rate();
    const double mu = static_cast<double>(p.n());
    const auto probs = routing_probabilities(p);
    std::vector<double> cum(probs.size());
    double acc = 0.0;
    for (std::size_t j = 0; j < probs.size(); ++j) {
        acc += arrival * probs[j];
        cum[j] = acc;
    }

    std::vector<std::int64_t> Q = init.Q;
    RankBook book(Q);
    int empties = static_cast<int>(std::count(Q.begin(), Q.end(), 0));
    CounterRng rng(seed, opts.stream);

    double t = 0.0;
    std::size_t next_sample = 0;
    for (;;) {
        const double total = arrival + mu * static_cast<double>(K - empties);
        if (opts.audit) audit_state(Q, book, empties, total, p);
        const double t_next = t + rng.exponential(total);
        const double seg_end = std::min(t_next, T);
        while (next_sample < n_samples) {
            const double ts = static_cast<double>(next_sample) * sample_dt;
            if (ts >= t_next && t_next <= T) break;
            if (ts > T + 1e-9 * sample_dt) break;
            tr.sample_times.push_back(ts);
            tr.states.push_back(LabeledState{Q});
            ++next_sample;
        }
        accumulate_sojourn(Q, book, empties, seg_end - t, tr.empty_time, tr.tie_time_matrix);
        if (t_next > T) break;
        t = t_next;

        const double u = rng.uniform() * total;
        if (u < arrival) {
            int rank = 0;
            while (rank + 1 < K && u >= cum[static_cast<std::size_t>(rank)]) ++rank;
            const int q = book.label_at(rank);
            if (Q[static_cast<std::size_t>(q)] == 0) --empties;
            ++Q[static_cast<std::size_t>(q)];
            book.moved_up(Q, q);
            ++tr.arrivals[static_cast<std::size_t>(q)];
            if (opts.record_events) tr.events.push_back({t, q, +1});
        } else {
            const int busy = K - empties;
            int idx = static_cast<int>((u - arrival) / mu);
            idx = std::clamp(idx, 0, busy - 1);
            const int q = book.label_at(empties + idx);
            --Q[static_cast<std::size_t>(q)];
            if (Q[static_cast<std::size_t>(q)] == 0) ++empties;
            book.moved_down(Q, q);
            ++tr.departures[static_cast<std::size_t>(q)];
            if (opts.record_events) tr.events.push_back({t, q, -1});
        }
        ++tr.event_count;
    }
    tr.final_state = LabeledState{Q};
    return tr;
}

std::vector<double> gap_vector(std::span<const std::int64_t> Q, double sqrt_n) {
    const auto order = rank_map(Q);
    std::vector<double> z(Q.size());
    std::int64_t prev = 0;
    for (std::size_t r = 0; r < order.size(); ++r) {
        const auto v = Q[static_cast<std::size_t>(order[r])];
        z[r] = static_cast<double>(v - prev) / sqrt_n;
        prev = v;
    }
    return z;
}

GapPath diffusion_scale(const Trajectory& t) {
    const std::size_t K = static_cast<std::size_t>(t.K());
    GapPath g(K, t.sample_times);
    const double sn = t.params.sqrt_n();
    for (std::size_t k = 0; k < t.states.size(); ++k) {
        const auto z = gap_vector(t.states[k].Q, sn);
        std::copy(z.begin(), z.end(), g.row(k).begin());
    }
    return g;
}

double idle_time(const Trajectory& t, int i) {
    if (i < 0 || i >= t.K()) throw ValidationError("idle_time: queue index out of range");
    return t.params.sqrt_n() * t.empty_time[static_cast<std::size_t>(i)];
}

double tie_time(const Trajectory& t, int i, int j) {
    if (i < 0 || j < 0 || i >= t.K() || j >= t.K()) throw ValidationError("tie_time: queue index out of range");
    if (i == j) throw ValidationError("tie_time: indices must differ");
    return t.tie_time_matrix[static_cast<std::size_t>(i) * static_cast<std::size_t>(t.K()) + static_cast<std::size_t>(j)];
}

std::vector<std::vector<double>> collect_samples(const DiscretePath& path, double t_from) {
    std::vector<std::vector<double>> out(path.dim());
    for (std::size_t k = 0; k < path.size(); ++k) {
        if (path.time(k) < t_from) continue;
        for (std::size_t i = 0; i < path.dim(); ++i) out[i].push_back(path.at(k, i));
    }
    return out;
}

EmpiricalStationary empirical_stationary(const SystemParams& p, double T, double burn_in, int replications,
                                         std::uint64_t seed, const StationaryRunOptions& opts) {
    require_valid(p);
    const auto st = stability_check(p);
    if (!st) {
        std::ostringstream os;
        os.precision(17);
        os << "empirical_stationary: parameters violate the stability condition "
              "(every tail sum of a_tilde must be > 0; smallest is "
           << st.margin << ")";
        throw RegimeError(os.str());
    }
    if (!(burn_in >= 0.0 && burn_in < T)) throw ValidationError("empirical_stationary: need 0 <= burn_in < T");
    if (replications < 1) throw ValidationError("empirical_stationary: replications must be >= 1");

    const std::size_t K = static_cast<std::size_t>(p.K());
    std::vector<std::vector<std::vector<double>>> per_rep(static_cast<std::size_t>(replications));
    parallel_for(per_rep.size(), opts.threads, [&](std::size_t r) {
        SimOptions so;
        so.stream = r;
        const auto tr = simulate(p, opts.initial, T, opts.sample_dt, seed, so);
        per_rep[r] = collect_samples(diffusion_scale(tr), burn_in);
    });

    EmpiricalStationary out{p};
    out.replications = replications;
    out.horizon = T;
    out.burn_in = burn_in;
    out.sample_dt = opts.sample_dt;
    const auto law = stationary_law(p);
    const auto& Lambda = build_matrices(p.K()).Lambda;
    for (std::size_t i = 0; i < K; ++i) {
        std::vector<double> pooled;
        for (const auto& rep : per_rep) pooled.insert(pooled.end(), rep[i].begin(), rep[i].end());
        // Relaxation scale of a reflected coordinate with rate lambda and
        // variance sigma^2: sigma^2 / drift^2 = 4 / (lambda^2 sigma^2).
        const double lam = law.rates()[i];
        const double tau = 4.0 / (lam * lam * Lambda(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)));
        SampleSet s(std::move(pooled), "z" + std::to_string(i + 1), opts.sample_dt / tau);
        out.means.push_back(s.values.empty() ? 0.0 : s.mean());
        out.counts.push_back(s.size());
        out.coordinates.push_back(std::move(s));
    }
    return out;
}

void write_diagnostics_csv(std::ostream& os, const Trajectory& t) {
    os << "metric,index,value\n";
    const int K = t.K();
    for (int i = 0; i < K; ++i) os << "idle," << i + 1 << ',' << format_double(idle_time(t, i)) << '\n';
    for (int i = 0; i < K; ++i)
        os << "empty_time," << i + 1 << ',' << format_double(t.empty_time[static_cast<std::size_t>(i)]) << '\n';
    for (int i = 0; i < K; ++i)
        for (int j = i + 1; j < K; ++j)
            os << "tie," << i + 1 << '-' << j + 1 << ',' << format_double(tie_time(t, i, j)) << '\n';
    for (int i = 0; i < K; ++i) os << "arrivals," << i + 1 << ',' << t.arrivals[static_cast<std::size_t>(i)] << '\n';
    for (int i = 0; i < K; ++i) os << "departures," << i + 1 << ',' << t.departures[static_cast<std::size_t>(i)] << '\n';
    os << "events,0," << t.event_count << '\n';
}

} // namespace ranksim
