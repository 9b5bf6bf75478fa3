#include "ranksim/rng.hpp"

#include <cmath>
#include <numbers>

namespace ranksim {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) noexcept {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

inline std::uint64_t join(std::uint32_t hi, std::uint32_t lo) noexcept {
    return (static_cast<std::uint64_t>(hi) << 32) | lo;
}

} // namespace

PhiloxBlock philox4x32(PhiloxBlock ctr, PhiloxKey key) noexcept {
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kPhiloxM0, ctr[0], hi0, lo0);
        mulhilo(kPhiloxM1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kPhiloxW0;
        key[1] += kPhiloxW1;
    }
    return ctr;
}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept {
    return splitmix64(splitmix64(seed) ^ (index * 0xD1B54A32D192ED03ull + 0x8CB92BA72F3D8DD7ull));
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept
    : key_(philox_key(seed)),
      stream_lo_(static_cast<std::uint32_t>(stream)),
      stream_hi_(static_cast<std::uint32_t>(stream >> 32)) {}

void CounterRng::refill() noexcept {
    const PhiloxBlock out = philox4x32(
        {static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32), stream_lo_, stream_hi_}, key_);
    ++block_;
    buf_[0] = join(out[0], out[1]);
    buf_[1] = join(out[2], out[3]);
    pos_ = 0;
}

double CounterRng::exponential(double rate) noexcept { return -std::log(uniform()) / rate; }

double CounterRng::normal() noexcept {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double th = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(th);
    have_spare_ = true;
    return r * std::cos(th);
}

std::array<double, 2> CounterDraws::uniforms(std::uint64_t step, std::uint32_t lane, std::uint32_t domain) const noexcept {
    const PhiloxBlock out = philox4x32(
        {static_cast<std::uint32_t>(step), static_cast<std::uint32_t>(step >> 32), lane, domain}, philox_key(seed));
    return {to_open_unit(join(out[0], out[1])), to_open_unit(join(out[2], out[3]))};
}

std::array<double, 2> CounterDraws::normals(std::uint64_t step, std::uint32_t lane, std::uint32_t domain) const noexcept {
    const auto u = uniforms(step, lane, domain);
    const double r = std::sqrt(-2.0 * std::log(u[0]));
    const double th = 2.0 * std::numbers::pi * u[1];
    return {r * std::cos(th), r * std::sin(th)};
}

} // namespace ranksim
