#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "ranksim/error.hpp"
#include "ranksim/skorokhod.hpp"

using namespace ranksim;

TEST_CASE("matrices for K = 2 and K = 3") {
    const auto m2 = build_matrices(2);
    CHECK(m2.R == oracle::reflection_matrix(2));
    Eigen::MatrixXd inv2(2, 2);
    inv2 << 2, 1, 2, 2;
    CHECK(m2.R_inv == inv2);
    CHECK((m2.R.inverse() - inv2).cwiseAbs().maxCoeff() < 1e-14);

    const auto m3 = build_matrices(3);
    Eigen::MatrixXd r3(3, 3);
    r3 << 1, -0.5, 0, -1, 1, -0.5, 0, -0.5, 1;
    CHECK(m3.R == r3);
    CHECK(m3.Lambda.diagonal() == Eigen::Vector3d(2, 4, 4));
}

TEST_CASE("matrix identities hold for K = 1..10") {
    for (int K = 1; K <= 10; ++K) {
        const auto m = build_matrices(K);
        CHECK((m.R * m.R_inv - Eigen::MatrixXd::Identity(K, K)).cwiseAbs().maxCoeff() <= 1e-12);
        // integer forms: A/sqrt2, 2R, Lambda; 2AA' = R Lambda + Lambda R' becomes 8 A1 A1' = (2R) Lambda + Lambda (2R)'
        const Eigen::MatrixXd A1 = m.A / std::sqrt(2.0);
        const Eigen::MatrixXd R2 = 2.0 * m.R;
        CHECK((A1.array() == A1.array().round()).all());
        CHECK((R2.array() == R2.array().round()).all());
        const Eigen::MatrixXi lhs = (8.0 * A1 * A1.transpose()).cast<int>();
        const Eigen::MatrixXi rhs = (R2 * m.Lambda + m.Lambda * R2.transpose()).cast<int>();
        CHECK(lhs == rhs);
        CHECK(((m.A * m.A.transpose()).diagonal() - m.Lambda.diagonal()).cwiseAbs().maxCoeff() < 1e-15);
    }
}

TEST_CASE("M-class membership") {
    const auto I = Eigen::MatrixXd::Identity(3, 3);
    CHECK(check_m_class(I).ok);
    CHECK(check_m_class(I).spectral_radius == 0.0);

    const auto r3 = check_m_class(build_matrices(3).R);
    CHECK(r3.ok);
    CHECK(r3.spectral_radius == doctest::Approx(std::sqrt(0.75)).epsilon(1e-8));

    Eigen::MatrixXd bad(2, 2);
    bad << 1, -1, -1, 1;
    const auto rb = check_m_class(bad);
    CHECK_FALSE(rb.ok);
    CHECK(rb.reason.find("spectral radius") != std::string::npos);

    Eigen::MatrixXd pos(2, 2);
    pos << 1, 0.5, 0, 1;
    CHECK_FALSE(check_m_class(pos).ok);
    Eigen::MatrixXd diag(2, 2);
    diag << 2, 0, 0, 1;
    CHECK_FALSE(check_m_class(diag).ok);

    for (int K = 1; K <= 10; ++K) CHECK(check_m_class(build_matrices(K).R).ok);
}

TEST_CASE("nonnegative nondecreasing input needs no pushing") {
    const auto x = fixture::linear_path({1.0, 0.0, 2.0}, 1.0, 50);
    const auto s = solve(x, build_matrices(3).R);
    for (double e : s.eta.values()) CHECK(e == 0.0);
    CHECK(s.y.values() == x.values());
}

TEST_CASE("one-dimensional reflection of -t") {
    const auto x = fixture::linear_path({-1.0}, 1.0, 101);
    const auto s = solve(x, Eigen::MatrixXd::Identity(1, 1));
    for (std::size_t k = 0; k < x.size(); ++k) {
        CHECK(std::abs(s.y.at(k, 0)) < 1e-15);
        CHECK(s.eta.at(k, 0) == doctest::Approx(x.time(k)).epsilon(1e-14));
    }
}

TEST_CASE("linear input with R: y = t (1,0,0), eta = t (0,4,2)") {
    const auto x = fixture::linear_path({3.0, -3.0, 0.0}, 1.0, 33);
    const auto s = solve(x, build_matrices(3).R);
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double t = x.time(k);
        CHECK(std::abs(s.y.at(k, 0) - t) < 1e-9);
        CHECK(std::abs(s.y.at(k, 1)) < 1e-9);
        CHECK(std::abs(s.y.at(k, 2)) < 1e-9);
        CHECK(std::abs(s.eta.at(k, 0)) < 1e-9);
        CHECK(std::abs(s.eta.at(k, 1) - 4 * t) < 1e-9);
        CHECK(std::abs(s.eta.at(k, 2) - 2 * t) < 1e-9);
    }
}

TEST_CASE("closed-form inverse application") {
    const auto w = r_inverse_apply(std::vector<double>{-1.0, 0.0});
    CHECK(w == std::vector<double>{-2.0, -2.0});
    for (double v : r_inverse_apply(std::vector<double>(5, 0.0))) CHECK(v == 0.0);

    std::mt19937_64 gen(17);
    std::normal_distribution<double> nd;
    for (int K = 1; K <= 10; ++K) {
        const auto m = build_matrices(K);
        for (int trial = 0; trial < 50; ++trial) {
            std::vector<double> v(static_cast<std::size_t>(K));
            for (double& e : v) e = nd(gen);
            const auto got = r_inverse_apply(v, m);
            const auto ref = oracle::dense_solve(oracle::reflection_matrix(K), v);
            for (int i = 0; i < K; ++i) CHECK(std::abs(got[static_cast<std::size_t>(i)] - ref[static_cast<std::size_t>(i)]) <= 1e-12 * std::max(1.0, std::abs(ref[static_cast<std::size_t>(i)])));
        }
    }
    CHECK_THROWS_AS(r_inverse_apply(std::vector<double>{1.0}, build_matrices(2)), ValidationError);
}

TEST_CASE("solver invariants on random piecewise-linear paths") {
    std::mt19937_64 gen(23);
    for (int K : {2, 3, 5}) {
        const auto R = build_matrices(K).R;
        for (int trial = 0; trial < 60; ++trial) {
            const auto x = fixture::random_pl_path(static_cast<std::size_t>(K), 12, 300, gen);
            const auto s = solve(x, R);
            const auto c = check_solution(x, R, s);
            CHECK(c.min_y >= -1e-9);
            CHECK(c.max_eta_decrease <= 1e-12);
            CHECK(c.affine_residual <= 1e-9);
            CHECK(c.eta_at_zero == 0.0);
            for (double v : c.complementarity) CHECK(v <= complementarity_tolerance(x));
        }
    }
}

TEST_CASE("solver errors") {
    const auto R = build_matrices(2).R;
    DiscretePath neg(2, {0.0, 1.0}, {-0.1, 0.0, 0.0, 0.0});
    CHECK_THROWS_AS(solve(neg, R), ValidationError);

    Eigen::MatrixXd bad(2, 2);
    bad << 1, -1, -1, 1;
    CHECK_THROWS_AS(solve(fixture::linear_path({1.0, 1.0}, 1.0, 5), bad), ValidationError);
    CHECK_THROWS_AS(solve(fixture::linear_path({1.0, 1.0, 1.0}, 1.0, 5), R), ValidationError);

    SolveOptions tight;
    tight.max_iterations = 1;
    try {
        (void)solve(fixture::linear_path({1.0, -3.0}, 1.0, 20), R, tight);
        FAIL("expected SolverError");
    } catch (const SolverError& e) {
        CHECK(e.residual() > 0.0);
    }
}

TEST_CASE("solution map is Lipschitz, with no growth under grid refinement") {
    std::mt19937_64 gen(31);
    for (int K : {2, 3, 5}) {
        const auto R = build_matrices(K).R;
        double worst_coarse = 0.0, worst_fine = 0.0;
        for (int trial = 0; trial < 100; ++trial) {
            const auto a = fixture::random_knots(static_cast<std::size_t>(K), 8, gen);
            auto b = a;
            std::normal_distribution<double> nd(0.0, 0.2);
            for (std::size_t k = 1; k < b.v.size(); ++k)
                for (double& v : b.v[k]) v += nd(gen);
            for (int level = 0; level < 2; ++level) {
                const std::size_t pts = level == 0 ? 129 : 257;
                const auto xa = fixture::sample_pl(a.t, a.v, pts);
                const auto xb = fixture::sample_pl(b.t, b.v, pts);
                const double dx = fixture::sup_diff(xa, xb);
                if (dx == 0.0) continue;
                const auto sa = solve(xa, R), sb = solve(xb, R);
                const double ratio = (fixture::sup_diff(sa.eta, sb.eta) + fixture::sup_diff(sa.y, sb.y)) / dx;
                (level == 0 ? worst_coarse : worst_fine) = std::max(level == 0 ? worst_coarse : worst_fine, ratio);
            }
        }
        INFO("K=" << K << " coarse " << worst_coarse << " fine " << worst_fine);
        CHECK(std::isfinite(worst_coarse));
        CHECK(worst_fine <= 1.05 * worst_coarse + 1e-9);
    }
}

TEST_CASE("linear inputs are solved exactly on every grid") {
    for (std::size_t pts : {3u, 17u, 1000u}) {
        const auto x = fixture::linear_path({3.0, -3.0, 0.0}, 2.0, pts);
        const auto s = solve(x, build_matrices(3).R);
        const std::size_t last = x.size() - 1;
        CHECK(std::abs(s.y.at(last, 0) - 2.0) < 1e-9);
        CHECK(std::abs(s.eta.at(last, 1) - 8.0) < 1e-9);
    }
}
