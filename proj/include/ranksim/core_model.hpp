#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace ranksim {

/// Parameterization of the K-queue system with rank-preference drifts.
///
/// The arrival stream into the i-th shortest queue has rate n - a_tilde[i]*sqrt(n)
/// and every server works at rate n. upsilon and a_star are derived once at
/// construction and never change.
class SystemParams {
public:
    SystemParams(int K, std::vector<double> a_tilde, std::int64_t n);
    SystemParams(std::vector<double> a_tilde, std::int64_t n);

    int K() const noexcept { return K_; }
    std::int64_t n() const noexcept { return n_; }
    const std::vector<double>& a_tilde() const noexcept { return a_tilde_; }
    double upsilon() const noexcept { return upsilon_; }
    double a_star() const noexcept { return a_star_; }

    /// n_* = max_l (a_tilde_l v 0)^2.
    double n_star() const noexcept;
    double sqrt_n() const noexcept;
    /// Total arrival rate nK - upsilon*sqrt(n).
    double arrival_rate() const noexcept;

    bool operator==(const SystemParams&) const = default;

private:
    int K_;
    std::vector<double> a_tilde_;
    std::int64_t n_;
    double upsilon_;
    double a_star_;
};

/// Either a raw preference vector or the (a, b, d) family in which the
/// shortest d queues share an extra b/d of preference.
struct SchemeSpec {
    enum class Kind { general, d_scheme };

    Kind kind = Kind::general;
    std::vector<double> a_tilde;
    double a = 0.0;
    double b = 0.0;
    int d = 1;
    int K = 1;

    static SchemeSpec general(std::vector<double> a_tilde);
    static SchemeSpec d_scheme(int K, double a, double b, int d);

    int size() const noexcept;
    /// a_tilde_i = a - b/d for i <= d, a otherwise (d_scheme); a_tilde as given otherwise.
    std::vector<double> expand() const;
    SystemParams to_params(std::int64_t n) const;
};

struct LabeledState {
    std::vector<std::int64_t> Q;
};

struct RankedState {
    std::vector<std::int64_t> X;
};

struct ValidationResult {
    bool ok = true;
    std::string constraint; // "K", "length", "n" or empty
    std::string message;

    explicit operator bool() const noexcept { return ok; }
};

ValidationResult validate_params(const SystemParams& p);
/// Throws ValidationError carrying the violated constraint.
void require_valid(const SystemParams& p);

/// P(U = j) = (1 - a_tilde_j / sqrt(n)) / (K - upsilon / sqrt(n)); no renormalization.
std::vector<double> routing_probabilities(const SystemParams& p);

/// r[j] = label of the queue holding rank j (0-based); ties go to the smaller label.
std::vector<int> rank_map(std::span<const std::int64_t> Q);
std::vector<int> rank_map(const LabeledState& s);
RankedState to_ranked(const LabeledState& s);

/// rho_1 = -a_tilde_1, rho_i = -(a_tilde_i - a_tilde_{i-1}).
std::vector<double> drift_vector(const SystemParams& p);
std::vector<double> drift_vector(std::span<const double> a_tilde);

} // namespace ranksim
