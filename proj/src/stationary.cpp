#include "ranksim/stationary.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "ranksim/error.hpp"
#include "ranksim/rng.hpp"
#include "ranksim/skorokhod.hpp"

namespace ranksim {

ProductExpLaw::ProductExpLaw(std::vector<double> rates) : rates_(std::move(rates)) {
    for (double r : rates_)
        if (!(r > 0.0) || !std::isfinite(r)) throw ValidationError("ProductExpLaw: rates must be positive and finite");
}

std::vector<double> ProductExpLaw::eta() const {
    std::vector<double> out(rates_.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = -rates_[i];
    return out;
}

double ProductExpLaw::normalizing_constant() const noexcept {
    double c = 1.0;
    for (double r : rates_) c *= r;
    return c;
}

double ProductExpLaw::density(std::span<const double> x) const {
    if (x.size() != rates_.size()) throw ValidationError("ProductExpLaw::density: dimension mismatch");
    double e = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] < 0.0) return 0.0;
        e -= rates_[i] * x[i];
    }
    return normalizing_constant() * std::exp(e);
}

std::vector<double> ProductExpLaw::means() const {
    std::vector<double> out(rates_.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = 1.0 / rates_[i];
    return out;
}

double ProductExpLaw::cdf(std::size_t i, double x) const {
    return x <= 0.0 ? 0.0 : -std::expm1(-rates_.at(i) * x);
}

double ProductExpLaw::quantile(std::size_t i, double u) const { return -std::log1p(-u) / rates_.at(i); }

std::vector<std::vector<double>> ProductExpLaw::sample(std::size_t count, std::uint64_t seed) const {
    std::vector<std::vector<double>> out(rates_.size());
    for (std::size_t i = 0; i < rates_.size(); ++i) {
        CounterRng rng(seed, i);
        out[i].resize(count);
        for (auto& v : out[i]) v = quantile(i, rng.uniform());
    }
    return out;
}

StabilityReport stability_check(std::span<const double> a_tilde) {
    StabilityReport rep;
    rep.tail_sums.assign(a_tilde.size(), 0.0);
    double s = 0.0;
    for (std::size_t i = a_tilde.size(); i-- > 0;) {
        s += a_tilde[i];
        rep.tail_sums[i] = s;
    }
    rep.stable = !a_tilde.empty();
    rep.margin = std::numeric_limits<double>::infinity();
    for (double t : rep.tail_sums) {
        rep.margin = std::min(rep.margin, t);
        if (!(t > 0.0)) rep.stable = false;
    }
    return rep;
}

StabilityReport stability_check(const SystemParams& p) { return stability_check(std::span<const double>(p.a_tilde())); }

std::vector<double> eta_vector(std::span<const double> a_tilde) {
    auto tails = stability_check(a_tilde).tail_sums;
    for (double& t : tails) t = -t;
    return tails;
}

std::vector<double> eta_vector(const SystemParams& p) { return eta_vector(std::span<const double>(p.a_tilde())); }

std::vector<double> eta_via_matrices(std::span<const double> a_tilde) {
    const auto rho = drift_vector(a_tilde);
    auto w = r_inverse_apply(rho);
    for (std::size_t i = 0; i < w.size(); ++i) w[i] *= 2.0 / (i == 0 ? 2.0 : 4.0);
    return w;
}

ProductExpLaw stationary_law(std::span<const double> a_tilde) {
    const auto st = stability_check(a_tilde);
    if (!st) {
        std::ostringstream os;
        os.precision(17);
        os << "stationary law requires every tail sum of a_tilde to be > 0 (smallest is " << st.margin << ")";
        throw RegimeError(os.str());
    }
    return ProductExpLaw(st.tail_sums);
}

ProductExpLaw stationary_law(const SystemParams& p) { return stationary_law(std::span<const double>(p.a_tilde())); }

std::optional<std::pair<double, double>> mjsq_shape(std::span<const double> a_tilde) {
    if (a_tilde.size() < 2) return std::nullopt;
    const double a = a_tilde[1];
    for (std::size_t i = 2; i < a_tilde.size(); ++i)
        if (a_tilde[i] != a) return std::nullopt;
    return std::make_pair(a, a - a_tilde[0]);
}

ProductExpLaw unstable_gap_law(std::span<const double> a_tilde) {
    const auto shape = mjsq_shape(a_tilde);
    if (!shape) throw RegimeError("unstable gap law needs a_tilde = (a - b, a, ..., a) with K >= 2");
    const auto [a, b] = *shape;
    const double K = static_cast<double>(a_tilde.size());
    if (a < 0.0) throw RegimeError("unstable gap law needs a >= 0");
    if (b == a * K) throw RegimeError("critical case b = aK is not covered by the unstable gap law");
    if (!(b > a * K)) throw RegimeError("unstable gap law needs b > aK (the system is stable otherwise)");
    std::vector<double> rates(a_tilde.size() - 1);
    for (std::size_t i = 1; i <= rates.size(); ++i) rates[i - 1] = (K - static_cast<double>(i)) / K * b;
    return ProductExpLaw(std::move(rates));
}

ProductExpLaw unstable_gap_law(const SystemParams& p) { return unstable_gap_law(std::span<const double>(p.a_tilde())); }

namespace {

double d_scheme_denominator(int K, double a, double upsilon, int d, int j) {
    return (K - j + 1) * a * d - (d - j + 1) * (a * K - upsilon);
}

} // namespace

double workload_mean_closed_form(int K, double a, double upsilon, int d) {
    double w = d < K ? (K - d) / a : 0.0;
    for (int j = 1; j <= d; ++j) w += static_cast<double>((K - j + 1) * d) / d_scheme_denominator(K, a, upsilon, d, j);
    return w;
}

double imbalance_mean_closed_form(int K, double a, double upsilon, int d) {
    double s = 0.0;
    for (int j = 2; j <= d; ++j) s += d / d_scheme_denominator(K, a, upsilon, d, j);
    for (int j = d + 1; j <= K; ++j) s += 1.0 / ((K - j + 1) * a);
    return s;
}

MetricsReport metrics(const SchemeSpec& scheme) {
    if (scheme.kind != SchemeSpec::Kind::d_scheme) throw RegimeError("metrics are defined for (a, b, d) schemes only");
    MetricsReport rep;
    rep.K = scheme.K;
    rep.d = scheme.d;
    rep.a = scheme.a;
    rep.b = scheme.b;
    const int K = scheme.K;
    const double a = scheme.a, b = scheme.b;
    rep.upsilon = a * K - b;

    const auto a_tilde = scheme.expand();
    const auto st = stability_check(a_tilde);
    const bool mjsq_unstable = scheme.d == 1 && K >= 2 && a >= 0.0 && b > a * K;
    if (!st && !mjsq_unstable) {
        if (b == a * K) throw RegimeError("critical case b = aK has no closed-form metrics");
        throw RegimeError("scheme is unstable and not an MJSQ scheme with b > aK");
    }

    if (a > 0.0) {
        double s = 0.0;
        for (int i = 1; i <= K - 1; ++i) s += 1.0 / (K - i);
        rep.D_stab = s / a;
    }

    if (st) {
        rep.workload_mean = workload_mean_closed_form(K, a, rep.upsilon, scheme.d);
        rep.imbalance_mean = imbalance_mean_closed_form(K, a, rep.upsilon, scheme.d);
        const auto& rates = st.tail_sums;
        double w = 0.0;
        for (int i = 0; i < K; ++i) w += (K - i) / rates[static_cast<std::size_t>(i)];
        rep.workload_from_law = w;
        if (std::abs(w - *rep.workload_mean) > 1e-10 * std::max(1.0, std::abs(w)))
            throw std::logic_error("metrics: closed-form workload disagrees with the stationary law");
        if (a > 0.0 && rep.upsilon > 0.0) {
            rep.R_W = K * K * a / ((K - 1) * rep.upsilon + K * a);
            if (K >= 2) rep.R_D = K * a / rep.upsilon;
        }
    }

    if (mjsq_unstable) {
        double s = 0.0;
        for (int i = 1; i <= K - 1; ++i) s += K / (b * (K - i));
        rep.D_unst = s;
    }
    return rep;
}

} // namespace ranksim
