#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "ranksim/ctmc.hpp"
#include "ranksim/error.hpp"
#include "ranksim/stats.hpp"

using namespace ranksim;

TEST_CASE("determinism and conservation") {
    const SystemParams p({-0.5, 0.5, 1.0}, 400);
    SimOptions so;
    so.record_events = true;
    const auto a = simulate(p, LabeledState{{3, 0, 7}}, 5.0, 0.1, 12, so);
    const auto b = simulate(p, LabeledState{{3, 0, 7}}, 5.0, 0.1, 12, so);
    CHECK(a.event_count == b.event_count);
    CHECK(a.final_state.Q == b.final_state.Q);
    CHECK(a.empty_time == b.empty_time);
    CHECK(a.tie_time_matrix == b.tie_time_matrix);
    REQUIRE(a.events.size() == b.events.size());
    for (std::size_t k = 0; k < a.events.size(); ++k) {
        CHECK(a.events[k].t == b.events[k].t);
        CHECK(a.events[k].queue == b.events[k].queue);
    }

    const auto arr = std::accumulate(a.arrivals.begin(), a.arrivals.end(), std::int64_t{0});
    const auto dep = std::accumulate(a.departures.begin(), a.departures.end(), std::int64_t{0});
    const auto q0 = std::accumulate(a.initial.Q.begin(), a.initial.Q.end(), std::int64_t{0});
    const auto q1 = std::accumulate(a.final_state.Q.begin(), a.final_state.Q.end(), std::int64_t{0});
    CHECK(arr - dep == q1 - q0);
    CHECK(a.event_count == static_cast<std::uint64_t>(arr + dep));

    const auto c = simulate(p, LabeledState{{3, 0, 7}}, 5.0, 0.1, 13, so);
    CHECK(c.event_count != a.event_count);
}

TEST_CASE("event log replays the sampled states") {
    const SystemParams p({0.0, 1.0}, 100);
    SimOptions so;
    so.record_events = true;
    const auto tr = simulate(p, {}, 3.0, 0.25, 4, so);
    REQUIRE(tr.sample_times.size() == 13);
    std::vector<std::int64_t> Q(2, 0);
    std::size_t e = 0;
    for (std::size_t k = 0; k < tr.sample_times.size(); ++k) {
        while (e < tr.events.size() && tr.events[e].t <= tr.sample_times[k]) {
            Q[static_cast<std::size_t>(tr.events[e].queue)] += tr.events[e].delta;
            REQUIRE(Q[static_cast<std::size_t>(tr.events[e].queue)] >= 0);
            ++e;
        }
        CHECK(Q == tr.states[k].Q);
    }
}

TEST_CASE("audit mode confirms incremental ranks and rates") {
    for (std::int64_t n : {4, 25, 400}) {
        SimOptions so;
        so.audit = true;
        CHECK_NOTHROW(simulate(SystemParams({-1.0, 0.5, 0.5, 1.0}, n), {}, 2.0, 0.5, 99, so));
        CHECK_NOTHROW(simulate(SystemParams({1.0, 1.0, 1.0}, n), LabeledState{{5, 5, 5}}, 2.0, 0.5, 7, so));
    }
}

TEST_CASE("input validation") {
    const SystemParams p({0.0, 0.0}, 100);
    CHECK_THROWS_AS(simulate(p, {}, 0.0, 1.0, 1), ValidationError);
    CHECK_THROWS_AS(simulate(p, {}, 1.0, 0.0, 1), ValidationError);
    CHECK_THROWS_AS(simulate(p, LabeledState{{1}}, 1.0, 1.0, 1), ValidationError);
    CHECK_THROWS_AS(simulate(p, LabeledState{{1, -1}}, 1.0, 1.0, 1), ValidationError);
    CHECK_THROWS_AS(simulate(SystemParams({3.0, 0.0}, 9), {}, 1.0, 1.0, 1), ValidationError);
}

TEST_CASE("single queue matches M/M/1") {
    const std::int64_t n = 100;
    const SystemParams p({1.0}, n);
    const double T = 2000.0;
    const auto tr = simulate(p, {}, T, 0.05, 2024);
    const double lambda = p.arrival_rate(), mu = static_cast<double>(n);
    double s = 0.0;
    for (const auto& st : tr.states) s += static_cast<double>(st.Q[0]);
    const double avg = s / static_cast<double>(tr.states.size()) / std::sqrt(static_cast<double>(n));
    const double expected = oracle::mm1_mean_queue(lambda, mu) / std::sqrt(static_cast<double>(n));
    CHECK(expected == doctest::Approx(0.9));
    CHECK(avg == doctest::Approx(expected).epsilon(0.05));

    const double idle = idle_time(tr, 0) / T;
    const double idle_ref = std::sqrt(static_cast<double>(n)) * oracle::mm1_empty_probability(lambda, mu);
    CHECK(idle_ref == doctest::Approx(1.0));
    CHECK(idle == doctest::Approx(idle_ref).epsilon(0.10));
}

TEST_CASE("symmetric routing spreads arrivals evenly") {
    const SystemParams p({0.0, 0.0, 0.0, 0.0}, 100);
    const auto tr = simulate(p, LabeledState{{50, 50, 50, 50}}, 100.0, 1.0, 5);
    const double total = static_cast<double>(std::accumulate(tr.arrivals.begin(), tr.arrivals.end(), std::uint64_t{0}));
    const double sd = std::sqrt(total * 0.25 * 0.75);
    for (auto c : tr.arrivals) CHECK(std::abs(static_cast<double>(c) - 0.25 * total) < 4.0 * sd);
}

TEST_CASE("diffusion scaling") {
    const auto z = gap_vector(std::vector<std::int64_t>{4, 1, 1}, 2.0);
    CHECK(z == std::vector<double>{0.5, 0.0, 1.5});
    for (double v : gap_vector(std::vector<std::int64_t>{0, 0, 0}, 2.0)) CHECK(v == 0.0);

    const SystemParams p({-1.0, 0.0, 2.0}, 64);
    const auto tr = simulate(p, LabeledState{{3, 9, 1}}, 4.0, 0.1, 6);
    const auto g = diffusion_scale(tr);
    REQUIRE(g.size() == tr.states.size());
    for (std::size_t k = 0; k < g.size(); ++k) {
        auto sorted = tr.states[k].Q;
        std::sort(sorted.begin(), sorted.end());
        double acc = 0.0;
        for (std::size_t i = 0; i < sorted.size(); ++i) {
            CHECK(g.at(k, i) >= 0.0);
            acc += g.at(k, i);
            CHECK(acc * 8.0 == doctest::Approx(static_cast<double>(sorted[i])).epsilon(1e-14));
        }
    }
}

TEST_CASE("idle and tie diagnostics") {
    const SystemParams p({0.0, 0.0}, 100);
    const auto full = simulate(p, LabeledState{{10 * 100 * 1, 10 * 100 * 1}}, 1.0, 0.5, 3);
    CHECK(idle_time(full, 0) == 0.0);
    CHECK(idle_time(full, 1) == 0.0);
    CHECK(tie_time(full, 0, 1) == tie_time(full, 1, 0));

    const auto apart = simulate(p, LabeledState{{0, 1000000}}, 0.5, 0.1, 3);
    CHECK(tie_time(apart, 0, 1) == 0.0);
    CHECK(idle_time(apart, 1) == 0.0);
    CHECK_THROWS_AS(tie_time(apart, 1, 1), ValidationError);
    CHECK_THROWS_AS(idle_time(apart, 2), ValidationError);

    // all tied at the start: tie time is at least the first sojourn
    const auto tied = simulate(SystemParams({0.0, 0.0, 0.0}, 100), {}, 1.0, 0.5, 3);
    CHECK(tie_time(tied, 0, 2) > 0.0);
    CHECK(tie_time(tied, 0, 2) <= 1.0);

    std::ostringstream os;
    write_diagnostics_csv(os, tied);
    CHECK(os.str().rfind("metric,index,value\nidle,1,", 0) == 0);
    CHECK(os.str().find("tie,1-3,") != std::string::npos);
}

TEST_CASE("empirical stationary law of a single queue") {
    const SystemParams p({1.0}, 10000);
    StationaryRunOptions so;
    so.threads = 1;
    const auto e = empirical_stationary(p, 1000.0, 100.0, 2, 77, so);
    REQUIRE(e.coordinates.size() == 1);
    CHECK(e.counts[0] == 2 * 901);
    CHECK(e.coordinates[0].effective_count <= e.counts[0]);
    CHECK(e.means[0] == doctest::Approx(0.99).epsilon(0.05));

    CHECK_THROWS_AS(empirical_stationary(SystemParams({2.0, -1.0}, 100), 10.0, 1.0, 1, 1), RegimeError);
    CHECK_THROWS_AS(empirical_stationary(p, 10.0, 10.0, 1, 1), ValidationError);
}

TEST_CASE("replications are independent of scheduling") {
    const SystemParams p({1.0, 1.0}, 100);
    StationaryRunOptions one, many;
    one.threads = 1;
    many.threads = 4;
    const auto a = empirical_stationary(p, 50.0, 5.0, 6, 3, one);
    const auto b = empirical_stationary(p, 50.0, 5.0, 6, 3, many);
    CHECK(a.coordinates[0].values == b.coordinates[0].values);
    CHECK(a.coordinates[1].values == b.coordinates[1].values);
}

TEST_CASE("labeled representation matches the ranked chain") {
    const std::vector<double> a_tilde{0.5, 1.0};
    const std::int64_t n = 400;
    const SystemParams p(a_tilde, n);
    const int reps = 2000;
    std::vector<std::vector<double>> lab(2), ranked(2);
    std::mt19937_64 gen(2718);
    for (int r = 0; r < reps; ++r) {
        SimOptions so;
        so.stream = static_cast<std::uint64_t>(r);
        const auto tr = simulate(p, {}, 1.0, 1.0, 31, so);
        const auto z = gap_vector(tr.final_state.Q, p.sqrt_n());
        const auto zr = oracle::gaps_of(oracle::ranked_chain_at(a_tilde, n, 1.0, gen), p.sqrt_n());
        for (std::size_t i = 0; i < 2; ++i) {
            lab[i].push_back(z[i]);
            ranked[i].push_back(zr[i]);
        }
    }
    for (std::size_t i = 0; i < 2; ++i) CHECK(ks_two_sample(lab[i], ranked[i]) < 0.05);
}

TEST_CASE("tie time shrinks as n grows") {
    std::vector<double> means;
    for (std::int64_t n : {400, 1600, 6400}) {
        const SystemParams p({0.0, 0.0}, n);
        double s = 0.0;
        for (int r = 0; r < 20; ++r) {
            SimOptions so;
            so.stream = static_cast<std::uint64_t>(r);
            s += tie_time(simulate(p, {}, 10.0, 10.0, 8, so), 0, 1);
        }
        means.push_back(s / 20.0);
    }
    CHECK(means[0] > means[1]);
    CHECK(means[1] > means[2]);
}
