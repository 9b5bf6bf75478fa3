#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "ranksim/path.hpp"

namespace fixture {

inline ranksim::DiscretePath sample_pl(const std::vector<double>& kt, const std::vector<std::vector<double>>& kv,
                                       std::size_t points) {
    const std::size_t K = kv[0].size();
    ranksim::DiscretePath p(K, {});
    std::vector<double> row(K);
    std::size_t seg = 0;
    for (std::size_t k = 0; k < points; ++k) {
        const double t = static_cast<double>(k) / static_cast<double>(points - 1);
        while (seg + 2 < kt.size() && t > kt[seg + 1]) ++seg;
        const double w = kt[seg + 1] > kt[seg] ? (t - kt[seg]) / (kt[seg + 1] - kt[seg]) : 0.0;
        for (std::size_t i = 0; i < K; ++i) row[i] = (1.0 - w) * kv[seg][i] + w * kv[seg + 1][i];
        p.push_back(t, row);
    }
    return p;
}

// Random piecewise-linear path on [0, 1] with `knots` breakpoints, sampled on
// a uniform grid of `points` points. x(0) is nonnegative.
struct Knots {
    std::vector<double> t;
    std::vector<std::vector<double>> v;
};

inline Knots random_knots(std::size_t K, std::size_t knots, std::mt19937_64& gen, double scale = 1.0) {
    std::normal_distribution<double> nd(0.0, scale);
    std::uniform_real_distribution<double> ud(0.0, 1.0);
    std::vector<double> kt{0.0};
    for (std::size_t k = 1; k + 1 < knots; ++k) kt.push_back(ud(gen));
    kt.push_back(1.0);
    std::sort(kt.begin(), kt.end());
    std::vector<std::vector<double>> kv(kt.size(), std::vector<double>(K));
    for (std::size_t i = 0; i < K; ++i) {
        kv[0][i] = std::abs(nd(gen));
        for (std::size_t k = 1; k < kt.size(); ++k) kv[k][i] = kv[k - 1][i] + nd(gen);
    }
    return {kt, kv};
}

inline ranksim::DiscretePath random_pl_path(std::size_t K, std::size_t knots, std::size_t points, std::mt19937_64& gen,
                                            double scale = 1.0) {
    const auto k = random_knots(K, knots, gen, scale);
    return sample_pl(k.t, k.v, points);
}

// x(t) = t v on a uniform grid over [0, T].
inline ranksim::DiscretePath linear_path(const std::vector<double>& v, double T, std::size_t points) {
    ranksim::DiscretePath p(v.size(), {});
    std::vector<double> row(v.size());
    for (std::size_t k = 0; k < points; ++k) {
        const double t = T * static_cast<double>(k) / static_cast<double>(points - 1);
        for (std::size_t i = 0; i < v.size(); ++i) row[i] = t * v[i];
        p.push_back(t, row);
    }
    return p;
}

inline double sup_diff(const ranksim::DiscretePath& a, const ranksim::DiscretePath& b) {
    double m = 0.0;
    for (std::size_t k = 0; k < a.values().size(); ++k) m = std::max(m, std::abs(a.values()[k] - b.values()[k]));
    return m;
}

} // namespace fixture
