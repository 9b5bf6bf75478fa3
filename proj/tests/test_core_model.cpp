#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "ranksim/core_model.hpp"
#include "ranksim/error.hpp"

using namespace ranksim;

TEST_CASE("validate_params accepts and rejects by n_star") {
    CHECK(validate_params(SystemParams({0.0, 0.0}, 1)).ok);

    const auto bad = validate_params(SystemParams({3.0, 0.0}, 9));
    CHECK_FALSE(bad.ok);
    CHECK(bad.constraint == "n");
    CHECK(bad.message.find("9") != std::string::npos);

    const SystemParams p({-1.0, 2.0, 2.0}, 5);
    CHECK(p.n_star() == 4.0);
    CHECK(validate_params(p).ok);
    CHECK_FALSE(validate_params(SystemParams({-1.0, 2.0, 2.0}, 4)).ok);
}

TEST_CASE("validate_params reports K and length violations") {
    const auto k0 = validate_params(SystemParams(0, {}, 10));
    CHECK(k0.constraint == "K");
    const auto len = validate_params(SystemParams(3, {1.0, 1.0}, 10));
    CHECK(len.constraint == "length");
    CHECK_THROWS_AS(require_valid(SystemParams({3.0, 0.0}, 9)), ValidationError);
}

TEST_CASE("derived scalars") {
    const SystemParams p({-1.0, 2.0, 0.5}, 5);
    CHECK(p.upsilon() == 1.5);
    CHECK(p.a_star() == 2.0);
    CHECK(p.arrival_rate() == doctest::Approx(15.0 - 1.5 * std::sqrt(5.0)));
}

TEST_CASE("routing probabilities") {
    for (std::int64_t n : {1, 7, 100}) {
        const auto pr = routing_probabilities(SystemParams({0.0, 0.0}, n));
        CHECK(pr[0] == 0.5);
        CHECK(pr[1] == 0.5);
    }
    const auto pr = routing_probabilities(SystemParams({-1.0, 1.0}, 16));
    CHECK(pr[0] == doctest::Approx(0.625).epsilon(1e-15));
    CHECK(pr[1] == doctest::Approx(0.375).epsilon(1e-15));

    const auto u = routing_probabilities(SystemParams({1.0, 1.0, 1.0}, 100));
    for (double v : u) CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-15));

    CHECK_THROWS_AS(routing_probabilities(SystemParams({3.0, 0.0}, 9)), ValidationError);
}

TEST_CASE("routing probabilities sum to one on random valid params") {
    std::mt19937_64 gen(11);
    std::uniform_int_distribution<int> kd(1, 10);
    std::uniform_real_distribution<double> ad(-5.0, 5.0);
    for (int trial = 0; trial < 2000; ++trial) {
        const int K = kd(gen);
        std::vector<double> a(static_cast<std::size_t>(K));
        for (double& v : a) v = ad(gen);
        double ns = 0.0;
        for (double v : a) ns = std::max(ns, std::max(v, 0.0) * std::max(v, 0.0));
        const auto n = static_cast<std::int64_t>(std::floor(ns)) + 1 + trial % 50;
        const auto pr = routing_probabilities(SystemParams(a, n));
        double s = 0.0;
        for (double v : pr) {
            CHECK(v > 0.0);
            CHECK(v < 1.0 + (K == 1 ? 1e-15 : 0.0));
            s += v;
        }
        CHECK(std::abs(s - 1.0) <= 8 * std::numeric_limits<double>::epsilon());
    }
}

TEST_CASE("rank_map with lexicographic ties") {
    using V = std::vector<std::int64_t>;
    CHECK(rank_map(V{3, 1, 2}) == std::vector<int>{1, 2, 0});
    CHECK(rank_map(V{2, 2, 1}) == std::vector<int>{2, 0, 1});
    CHECK(rank_map(V{5, 5, 5, 5}) == std::vector<int>{0, 1, 2, 3});
    CHECK(to_ranked(LabeledState{{4, 1, 1}}).X == V{1, 1, 4});
}

TEST_CASE("rank_map is a sorting permutation on random states") {
    std::mt19937_64 gen(5);
    std::uniform_int_distribution<int> kd(1, 8), qd(0, 4);
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<std::int64_t> Q(static_cast<std::size_t>(kd(gen)));
        for (auto& q : Q) q = qd(gen);
        const auto r = rank_map(Q);
        std::vector<int> seen(Q.size(), 0);
        for (int v : r) ++seen[static_cast<std::size_t>(v)];
        for (int s : seen) CHECK(s == 1);
        for (std::size_t j = 1; j < r.size(); ++j) {
            const auto lo = Q[static_cast<std::size_t>(r[j - 1])], hi = Q[static_cast<std::size_t>(r[j])];
            CHECK(lo <= hi);
            if (lo == hi) CHECK(r[j - 1] < r[j]);
        }
    }
}

TEST_CASE("drift vector") {
    const double a = 1.5, b = 0.75;
    const auto rho = drift_vector(std::vector<double>{a - b, a, a});
    CHECK(rho[0] == b - a);
    CHECK(rho[1] == -b);
    CHECK(rho[2] == 0.0);

    for (double v : drift_vector(std::vector<double>(4, 0.0))) CHECK(v == 0.0);

    const auto s = SchemeSpec::d_scheme(3, 1.0, 1.0, 2);
    CHECK(s.expand() == std::vector<double>{0.5, 0.5, 1.0});
    CHECK(drift_vector(s.expand()) == std::vector<double>{-0.5, 0.0, -0.5});
}

TEST_CASE("drift partial sums telescope") {
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> ad(-4.0, 4.0);
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<double> a(1 + trial % 9);
        for (double& v : a) v = ad(gen);
        const auto rho = drift_vector(a);
        double s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            s += rho[i];
            CHECK(s == doctest::Approx(-a[i]).epsilon(1e-12).scale(1.0));
        }
    }
}

TEST_CASE("d-scheme expansion and upsilon") {
    CHECK(SchemeSpec::d_scheme(3, 1.0, 2.0, 1).expand() == std::vector<double>{-1.0, 1.0, 1.0});
    CHECK(SchemeSpec::d_scheme(3, 1.0, 3.0, 3).expand() == std::vector<double>{0.0, 0.0, 0.0});
    // dyadic values keep the sum exact
    for (int K = 1; K <= 8; ++K)
        for (int d = 1; d <= K; ++d) {
            const double a = 0.75, b = 0.5 * d;
            const auto p = SchemeSpec::d_scheme(K, a, b, d).to_params(100);
            CHECK(p.upsilon() == K * a - b);
        }
    CHECK_THROWS_AS(SchemeSpec::d_scheme(3, 1.0, 1.0, 4), ValidationError);
    CHECK_THROWS_AS(SchemeSpec::d_scheme(3, 1.0, 1.0, 0), ValidationError);
    CHECK_THROWS_AS(SchemeSpec::d_scheme(0, 1.0, 1.0, 1), ValidationError);
}
