#include "ranksim/diffusion.hpp"

#include <algorithm>
#include <cmath>

#include "ranksim/error.hpp"
#include "ranksim/parallel.hpp"
#include "ranksim/rng.hpp"

namespace ranksim {

DiffusionConfig DiffusionConfig::from_a_tilde(std::span<const double> a_tilde) {
    DiffusionConfig c;
    c.K = static_cast<int>(a_tilde.size());
    c.rho = drift_vector(a_tilde);
    c.matrices = build_matrices(c.K);
    c.Z0.assign(a_tilde.size(), 0.0);
    return c;
}

void DiffusionConfig::validate() const {
    if (K < 1) throw ValidationError("diffusion: K must be >= 1");
    if (static_cast<int>(rho.size()) != K) throw ValidationError("diffusion: rho must have length K");
    if (!Z0.empty() && static_cast<int>(Z0.size()) != K) throw ValidationError("diffusion: Z0 must have length K");
    for (double z : Z0)
        if (!(z >= 0.0)) throw ValidationError("diffusion: Z0 must be componentwise >= 0");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("diffusion: dt must be positive");
    if (!(T >= dt) || !std::isfinite(T)) throw ValidationError("diffusion: T must be >= dt");
    if (!(noise_scale >= 0.0)) throw ValidationError("diffusion: noise_scale must be >= 0");
    if (refinement < 0 || refinement > 16) throw ValidationError("diffusion: refinement must lie in [0, 16]");
    if (block_steps < 1 || output_stride < 1) throw ValidationError("diffusion: block_steps and output_stride must be >= 1");
    if (matrices.K != K) throw ValidationError("diffusion: matrices built for a different K");
}

double DiffusionConfig::step() const { return std::ldexp(dt, -refinement); }

std::uint64_t DiffusionConfig::fine_steps() const {
    const auto base = static_cast<std::uint64_t>(std::ceil(T / dt - 1e-9));
    return base << refinement;
}

namespace {

// Brownian increments of one base step, refined to 2^r sub-steps.
void base_step_increments(const CounterDraws& draws, std::uint64_t k, int K, double dt, int r,
                          std::vector<double>& inc, std::vector<double>& scratch) {
    const std::size_t Ku = static_cast<std::size_t>(K);
    inc.assign(Ku, 0.0);
    const double sd = std::sqrt(dt);
    for (int i = 0; i < K; i += 2) {
        const auto z = draws.normals(k, static_cast<std::uint32_t>(i / 2), 0);
        inc[static_cast<std::size_t>(i)] = sd * z[0];
        if (i + 1 < K) inc[static_cast<std::size_t>(i) + 1] = sd * z[1];
    }
    for (int l = 1; l <= r; ++l) {
        const std::size_t parents = std::size_t{1} << (l - 1);
        const double half_sd = 0.5 * std::sqrt(std::ldexp(dt, -(l - 1)));
        scratch.assign(2 * parents * Ku, 0.0);
        for (std::size_t q = 0; q < parents; ++q) {
            for (int i = 0; i < K; i += 2) {
                const auto lane = static_cast<std::uint32_t>((q << 16) | static_cast<std::size_t>(i / 2));
                const auto z = draws.normals(k, lane, static_cast<std::uint32_t>(l));
                for (int s = 0; s < 2 && i + s < K; ++s) {
                    const std::size_t c = static_cast<std::size_t>(i + s);
                    const double total = inc[q * Ku + c];
                    const double left = 0.5 * total + half_sd * z[static_cast<std::size_t>(s)];
                    scratch[2 * q * Ku + c] = left;
                    scratch[(2 * q + 1) * Ku + c] = total - left;
                }
            }
        }
        inc.swap(scratch);
    }
}

// Minimum below the starting value of a Brownian bridge with end increment d
// and variance sigma2 * h.
inline double bridge_minimum(double d, double sigma2h, double u) {
    return 0.5 * (d - std::sqrt(d * d - 2.0 * sigma2h * std::log(u)));
}

} // namespace

DiffusionResult simulate_reflected(const DiffusionConfig& c) {
    c.validate();
    const int K = c.K;
    const std::size_t Ku = static_cast<std::size_t>(K);
    const double h = c.step();
    const std::uint64_t n_fine = c.fine_steps();
    const std::uint64_t per_base = std::uint64_t{1} << c.refinement;
    const std::uint64_t block_base = std::max<std::uint64_t>(1, c.block_steps >> c.refinement);
    const bool bridge = c.bridge_correction && c.noise_scale > 0.0;
    const CounterDraws draws{c.seed};
    const double s2 = std::sqrt(2.0) * c.noise_scale;

    std::vector<double> sigma2h(Ku);
    for (std::size_t i = 0; i < Ku; ++i)
        sigma2h[i] = c.noise_scale * c.noise_scale * c.matrices.Lambda(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) * h;

    std::vector<double> z(Ku, 0.0);
    if (!c.Z0.empty()) z = c.Z0;
    std::vector<double> L(Ku, 0.0);

    DiffusionResult res;
    const std::size_t n_out = static_cast<std::size_t>(n_fine / c.output_stride) + 2;
    res.Z = GapPath(Ku, {});
    res.L = LocalTimePath(Ku, {});
    res.Z.reserve(n_out);
    res.L.reserve(n_out);
    res.Z.push_back(0.0, z);
    res.L.push_back(0.0, L);

    std::vector<double> avg(Ku, 0.0);
    std::uint64_t avg_count = 0;
    auto accumulate = [&](double t, std::span<const double> v) {
        if (t + 1e-12 < c.average_from) return;
        for (std::size_t i = 0; i < Ku; ++i) avg[i] += v[i];
        ++avg_count;
    };
    accumulate(0.0, z);

    const std::uint64_t n_base = n_fine / per_base;
    std::vector<double> inc, scratch, dx(Ku), xk(Ku), mid(Ku);
    for (std::uint64_t b0 = 0; b0 < n_base; b0 += block_base) {
        const std::uint64_t b1 = std::min(n_base, b0 + block_base);
        const std::size_t steps = static_cast<std::size_t>((b1 - b0) * per_base);
        const std::size_t pts = 1 + steps * (bridge ? 2 : 1);
        const double t0 = static_cast<double>(b0 * per_base) * h;

        std::vector<double> grid;
        grid.reserve(pts);
        std::vector<double> vals;
        vals.reserve(pts * Ku);
        grid.push_back(0.0);
        vals.insert(vals.end(), z.begin(), z.end());
        xk = z;

        for (std::uint64_t k = b0; k < b1; ++k) {
            if (c.noise_scale > 0.0) base_step_increments(draws, k, K, c.dt, c.refinement, inc, scratch);
            for (std::uint64_t j = 0; j < per_base; ++j) {
                const std::uint64_t f = k * per_base + j;
                const double tl = static_cast<double>(f - b0 * per_base) * h;
                for (std::size_t i = 0; i < Ku; ++i) {
                    double noise = 0.0;
                    if (c.noise_scale > 0.0) {
                        const double* dB = inc.data() + j * Ku;
                        noise = s2 * (dB[i] - (i > 0 ? dB[i - 1] : 0.0));
                    }
                    dx[i] = c.rho[i] * h + noise;
                }
                if (bridge) {
                    for (int i = 0; i < K; i += 2) {
                        const auto u = draws.uniforms(f, static_cast<std::uint32_t>(i / 2),
                                                      static_cast<std::uint32_t>(100 + c.refinement));
                        for (int s = 0; s < 2 && i + s < K; ++s) {
                            const std::size_t q = static_cast<std::size_t>(i + s);
                            mid[q] = xk[q] + bridge_minimum(dx[q], sigma2h[q], u[static_cast<std::size_t>(s)]);
                        }
                    }
                    grid.push_back(tl + 0.5 * h);
                    vals.insert(vals.end(), mid.begin(), mid.end());
                }
                for (std::size_t i = 0; i < Ku; ++i) xk[i] += dx[i];
                grid.push_back(tl + h);
                vals.insert(vals.end(), xk.begin(), xk.end());
            }
        }

        const DiscretePath x(Ku, std::move(grid), std::move(vals));
        const auto sol = solve(x, c.matrices.R);
        res.max_solver_iterations = std::max(res.max_solver_iterations, sol.iterations);

        const std::size_t stride_pts = bridge ? 2 : 1;
        std::vector<double> lrow(Ku);
        for (std::size_t s = 1; s <= steps; ++s) {
            const std::size_t p = s * stride_pts;
            const std::uint64_t f = b0 * per_base + s;
            const double t = t0 + static_cast<double>(s) * h;
            const auto yrow = sol.y.row(p);
            accumulate(t, yrow);
            if (f % c.output_stride == 0 || f == n_fine) {
                const auto erow = sol.eta.row(p);
                for (std::size_t i = 0; i < Ku; ++i) lrow[i] = L[i] + erow[i];
                res.Z.push_back(static_cast<double>(f) * h, yrow);
                res.L.push_back(static_cast<double>(f) * h, lrow);
            }
        }
        const auto yend = sol.y.row(pts - 1);
        const auto eend = sol.eta.row(pts - 1);
        for (std::size_t i = 0; i < Ku; ++i) {
            z[i] = std::max(0.0, yend[i]);
            L[i] += eend[i];
        }
    }

    res.time_average.assign(Ku, 0.0);
    if (avg_count > 0)
        for (std::size_t i = 0; i < Ku; ++i) res.time_average[i] = avg[i] / static_cast<double>(avg_count);
    return res;
}

GapPath simulate_atlas_ordered(const DiffusionConfig& c, double a, double b) {
    c.validate();
    const int K = c.K;
    const std::size_t Ku = static_cast<std::size_t>(K);
    std::vector<double> expect(Ku, 0.0);
    expect[0] = b - a;
    if (K >= 2) {
        expect[0] = -(a - b);
        expect[1] = -b;
    }
    for (std::size_t i = 0; i < Ku; ++i)
        if (std::abs(expect[i] - c.rho[i]) > 1e-12 * std::max(1.0, std::abs(expect[i])))
            throw ValidationError("atlas: rho does not match the MJSQ drift for the given (a, b)");

    // Particle positions from cumulative gaps.
    std::vector<double> y(Ku, 0.0);
    double acc = 0.0;
    for (std::size_t i = 0; i < Ku; ++i) {
        acc += c.Z0.empty() ? 0.0 : c.Z0[i];
        y[i] = acc;
    }

    const double h = c.dt;
    const auto steps = static_cast<std::uint64_t>(std::ceil(c.T / c.dt - 1e-9));
    const CounterDraws draws{c.seed};
    const double sd = std::sqrt(2.0 * h) * c.noise_scale;
    const double sigma2h = 2.0 * c.noise_scale * c.noise_scale * h;

    std::vector<int> order(Ku);
    std::vector<double> gaps(Ku);
    auto to_gaps = [&] {
        for (std::size_t i = 0; i < Ku; ++i) order[i] = static_cast<int>(i);
        std::stable_sort(order.begin(), order.end(), [&](int p, int q) { return y[static_cast<std::size_t>(p)] < y[static_cast<std::size_t>(q)]; });
        double prev = 0.0;
        for (std::size_t r = 0; r < Ku; ++r) {
            const double v = y[static_cast<std::size_t>(order[r])];
            gaps[r] = v - prev;
            prev = v;
        }
    };

    GapPath out(Ku, {});
    out.reserve(static_cast<std::size_t>(steps / c.output_stride) + 2);
    to_gaps();
    out.push_back(0.0, gaps);
    for (std::uint64_t k = 0; k < steps; ++k) {
        const int lowest = order[0];
        for (int i = 0; i < K; i += 2) {
            std::array<double, 2> z{0.0, 0.0}, u{0.5, 0.5};
            if (c.noise_scale > 0.0) {
                z = draws.normals(k, static_cast<std::uint32_t>(i / 2), 200);
                u = draws.uniforms(k, static_cast<std::uint32_t>(i / 2), 300);
            }
            for (int s = 0; s < 2 && i + s < K; ++s) {
                const std::size_t p = static_cast<std::size_t>(i + s);
                const double drift = (i + s == lowest) ? -a + b : -a;
                const double d = drift * h + sd * z[static_cast<std::size_t>(s)];
                const double m = bridge_minimum(d, sigma2h, u[static_cast<std::size_t>(s)]);
                y[p] = y[p] + d + std::max(0.0, -(y[p] + m));
            }
        }
        to_gaps();
        if ((k + 1) % c.output_stride == 0 || k + 1 == steps) out.push_back(static_cast<double>(k + 1) * h, gaps);
    }
    return out;
}

SlopeEstimate unstable_escape_slope(const GapPath& path) {
    if (path.size() < 2 || path.time(path.size() - 1) - path.time(0) < 100.0)
        throw ValidationError("unstable_escape_slope: horizon too short (need T >= 100)");
    return slope_estimate(path, 0, 0.5);
}

SlopeEstimate unstable_escape_slope(const DiffusionConfig& c) {
    if (c.T < 100.0) throw ValidationError("unstable_escape_slope: horizon too short (need T >= 100)");
    return unstable_escape_slope(simulate_reflected(c).Z);
}

std::vector<double> time_average(const DiscretePath& path, double t_from) {
    std::vector<double> out(path.dim(), 0.0);
    std::size_t n = 0;
    for (std::size_t k = 0; k < path.size(); ++k) {
        if (path.time(k) < t_from) continue;
        for (std::size_t i = 0; i < path.dim(); ++i) out[i] += path.at(k, i);
        ++n;
    }
    if (n == 0) throw ValidationError("time_average: no grid points after t_from");
    for (double& v : out) v /= static_cast<double>(n);
    return out;
}

std::vector<std::vector<double>> terminal_samples(const DiffusionConfig& c, int replications, unsigned threads) {
    if (replications < 1) throw ValidationError("terminal_samples: replications must be >= 1");
    std::vector<std::vector<double>> per_rep(static_cast<std::size_t>(replications));
    parallel_for(per_rep.size(), threads, [&](std::size_t r) {
        DiffusionConfig cr = c;
        cr.seed = derive_seed(c.seed, r);
        cr.output_stride = static_cast<std::size_t>(cr.fine_steps()) + 1;
        const auto res = simulate_reflected(cr);
        const auto last = res.Z.row(res.Z.size() - 1);
        per_rep[r].assign(last.begin(), last.end());
    });
    std::vector<std::vector<double>> out(static_cast<std::size_t>(c.K));
    for (const auto& v : per_rep)
        for (std::size_t i = 0; i < v.size(); ++i) out[i].push_back(v[i]);
    return out;
}

} // namespace ranksim
