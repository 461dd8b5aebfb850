#include "pgd/rng.hpp"

#include "pgd/stats.hpp"

namespace pgd {
namespace rng {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

} // namespace

std::array<std::uint32_t, 4> philox4x32(const std::array<std::uint32_t, 4>& counter,
                                        std::uint64_t key) {
    std::uint32_t x0 = counter[0], x1 = counter[1], x2 = counter[2], x3 = counter[3];
    std::uint32_t k0 = static_cast<std::uint32_t>(key);
    std::uint32_t k1 = static_cast<std::uint32_t>(key >> 32);
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kPhiloxM0, x0, hi0, lo0);
        mulhilo(kPhiloxM1, x2, hi1, lo1);
        const std::uint32_t y0 = hi1 ^ x1 ^ k0;
        const std::uint32_t y1 = lo1;
        const std::uint32_t y2 = hi0 ^ x3 ^ k1;
        const std::uint32_t y3 = lo0;
        x0 = y0;
        x1 = y1;
        x2 = y2;
        x3 = y3;
        k0 += kPhiloxW0;
        k1 += kPhiloxW1;
    }
    return {x0, x1, x2, x3};
}

double uniform01(std::uint64_t seed, std::uint32_t step, std::uint32_t unit,
                 std::uint32_t coord, Stream stream) {
    const std::uint32_t pair = coord >> 1;
    const std::uint32_t parity = coord & 1u;
    const std::array<std::uint32_t, 4> ctr = {step, unit, pair, static_cast<std::uint32_t>(stream)};
    const auto out = philox4x32(ctr, seed);
    const std::uint64_t word =
        (static_cast<std::uint64_t>(out[2 * parity]) << 32) | out[2 * parity + 1];
    // 53-bit mantissa, centered so the result is strictly inside (0,1).
    return (static_cast<double>(word >> 11) + 0.5) * 0x1p-53;
}

double normal(std::uint64_t seed, std::uint32_t step, std::uint32_t unit,
              std::uint32_t coord, Stream stream) {
    return stats::norm_ppf(uniform01(seed, step, unit, coord, stream));
}

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag, std::uint64_t index) {
    return mix64(mix64(base ^ mix64(tag)) + index);
}

} // namespace rng
} // namespace pgd
