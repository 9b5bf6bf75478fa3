#include "ranksim/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "ranksim/error.hpp"

namespace ranksim {

SystemParams::SystemParams(int K, std::vector<double> a_tilde, std::int64_t n)
    : K_(K), a_tilde_(std::move(a_tilde)), n_(n) {
    upsilon_ = 0.0;
    for (double v : a_tilde_) upsilon_ += v;
    a_star_ = a_tilde_.empty() ? -std::numeric_limits<double>::infinity()
                               : *std::max_element(a_tilde_.begin(), a_tilde_.end());
}

SystemParams::SystemParams(std::vector<double> a_tilde, std::int64_t n) : SystemParams(0, std::move(a_tilde), n) {
    K_ = static_cast<int>(a_tilde_.size());
}

double SystemParams::n_star() const noexcept {
    double m = 0.0;
    for (double v : a_tilde_) {
        const double pos = std::max(v, 0.0);
        m = std::max(m, pos * pos);
    }
    return m;
}

double SystemParams::sqrt_n() const noexcept { return std::sqrt(static_cast<double>(n_)); }

double SystemParams::arrival_rate() const noexcept {
    return static_cast<double>(n_) * K_ - upsilon_ * sqrt_n();
}

SchemeSpec SchemeSpec::general(std::vector<double> a_tilde) {
    SchemeSpec s;
    s.kind = Kind::general;
    s.K = static_cast<int>(a_tilde.size());
    s.a_tilde = std::move(a_tilde);
    return s;
}

SchemeSpec SchemeSpec::d_scheme(int K, double a, double b, int d) {
    if (K < 1) throw ValidationError("scheme: K must be >= 1");
    if (d < 1 || d > K) throw ValidationError("scheme: d must lie in [1, K]");
    if (a < 0.0) throw ValidationError("scheme: a must be >= 0");
    SchemeSpec s;
    s.kind = Kind::d_scheme;
    s.K = K;
    s.a = a;
    s.b = b;
    s.d = d;
    return s;
}

int SchemeSpec::size() const noexcept {
    return kind == Kind::general ? static_cast<int>(a_tilde.size()) : K;
}

std::vector<double> SchemeSpec::expand() const {
    if (kind == Kind::general) return a_tilde;
    std::vector<double> out(static_cast<std::size_t>(K), a);
    for (int i = 0; i < d; ++i) out[static_cast<std::size_t>(i)] = a - b / d;
    return out;
}

SystemParams SchemeSpec::to_params(std::int64_t n) const { return SystemParams(size(), expand(), n); }

ValidationResult validate_params(const SystemParams& p) {
    ValidationResult r;
    if (p.K() < 1) {
        r.ok = false;
        r.constraint = "K";
        r.message = "K must be >= 1";
        return r;
    }
    if (static_cast<int>(p.a_tilde().size()) != p.K()) {
        r.ok = false;
        r.constraint = "length";
        std::ostringstream os;
        os << "a_tilde has length " << p.a_tilde().size() << " but K = " << p.K();
        r.message = os.str();
        return r;
    }
    for (double v : p.a_tilde()) {
        if (!std::isfinite(v)) {
            r.ok = false;
            r.constraint = "a_tilde";
            r.message = "a_tilde entries must be finite";
            return r;
        }
    }
    const double ns = p.n_star();
    if (!(static_cast<double>(p.n()) > ns)) {
        r.ok = false;
        r.constraint = "n";
        std::ostringstream os;
        os.precision(17);
        os << "requires n > n_* = " << ns << " (got n = " << p.n() << ")";
        r.message = os.str();
        return r;
    }
    return r;
}

void require_valid(const SystemParams& p) {
    auto r = validate_params(p);
    if (!r) throw ValidationError("invalid parameters [" + r.constraint + "]: " + r.message);
}

std::vector<double> routing_probabilities(const SystemParams& p) {
    require_valid(p);
    const double inv = 1.0 / p.sqrt_n();
    const double denom = p.K() - p.upsilon() * inv;
    std::vector<double> out(static_cast<std::size_t>(p.K()));
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = (1.0 - p.a_tilde()[j] * inv) / denom;
    return out;
}

std::vector<int> rank_map(std::span<const std::int64_t> Q) {
    std::vector<int> r(Q.size());
    std::iota(r.begin(), r.end(), 0);
    std::stable_sort(r.begin(), r.end(), [&](int x, int y) { return Q[static_cast<std::size_t>(x)] < Q[static_cast<std::size_t>(y)]; });
    return r;
}

std::vector<int> rank_map(const LabeledState& s) { return rank_map(std::span<const std::int64_t>(s.Q)); }

RankedState to_ranked(const LabeledState& s) {
    RankedState out;
    out.X.reserve(s.Q.size());
    for (int label : rank_map(s)) out.X.push_back(s.Q[static_cast<std::size_t>(label)]);
    return out;
}

std::vector<double> drift_vector(std::span<const double> a_tilde) {
    std::vector<double> rho(a_tilde.size());
    for (std::size_t i = 0; i < a_tilde.size(); ++i)
        rho[i] = i == 0 ? -a_tilde[0] : -(a_tilde[i] - a_tilde[i - 1]);
    return rho;
}

std::vector<double> drift_vector(const SystemParams& p) { return drift_vector(std::span<const double>(p.a_tilde())); }

} // namespace ranksim
