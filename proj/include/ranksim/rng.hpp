#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace ranksim {

// Philox4x32-10 (Salmon et al., SC'11): a keyed bijection on 128-bit counters.
using PhiloxBlock = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

PhiloxBlock philox4x32(PhiloxBlock ctr, PhiloxKey key) noexcept;

inline PhiloxKey philox_key(std::uint64_t seed) noexcept {
    return {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
}

/// SplitMix64 finalizer, used to mix (seed, index) pairs into a key.
std::uint64_t splitmix64(std::uint64_t x) noexcept;
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept;

/// Map 64 random bits to a double in the open interval (0, 1).
inline double to_open_unit(std::uint64_t bits) noexcept {
    return (static_cast<double>(bits >> 12) + 0.5) * 0x1.0p-52;
}

/// Sequential engine over a Philox stream identified by (seed, stream).
/// Satisfies UniformRandomBitGenerator. Two streams with different ids never
/// overlap, so replication r can be generated independently of scheduling.
class CounterRng {
public:
    using result_type = std::uint64_t;

    CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept;

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        if (pos_ == 2) refill();
        return buf_[pos_++];
    }

    double uniform() noexcept { return to_open_unit((*this)()); }
    double exponential(double rate) noexcept;
    double normal() noexcept;

private:
    void refill() noexcept;

    PhiloxKey key_;
    std::uint32_t stream_lo_;
    std::uint32_t stream_hi_;
    std::uint64_t block_ = 0;
    std::array<std::uint64_t, 2> buf_{};
    int pos_ = 2;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

/// Stateless draws addressed by (seed, step, lane): the value does not depend on
/// how many other draws were made. Each call consumes one Philox block.
struct CounterDraws {
    std::uint64_t seed;

    std::array<double, 2> uniforms(std::uint64_t step, std::uint32_t lane, std::uint32_t domain) const noexcept;
    /// Two independent standard normals (Box-Muller on one block).
    std::array<double, 2> normals(std::uint64_t step, std::uint32_t lane, std::uint32_t domain) const noexcept;
};

} // namespace ranksim
