#ifndef PGD_RNG_HPP
#define PGD_RNG_HPP

#include <array>
#include <cstdint>

namespace pgd {

// Counter-based randomness (Philox4x32-10). Every draw is a pure function of
// (seed, step, particle, coordinate, stream), so particle- and replicate-level
// parallelism is bitwise reproducible and coupled runs can share noise streams
// by sharing keys.
namespace rng {

// Stream tags keep logically distinct noise sources out of each other's
// counter space.
enum class Stream : std::uint32_t {
    ParticleNoise = 0, // sqrt(2h) W_k^n in the particle update
    ThetaNoise = 1,    // extra sqrt(2h/N) W_k term used by IPLA
    Init = 2,          // initial particle draws
    Sweep = 3,         // random Gaussian states for inequality sweeps
    Generic = 4,       // everything else (tests, oracles)
};

std::array<std::uint32_t, 4> philox4x32(const std::array<std::uint32_t, 4>& counter,
                                        std::uint64_t key);

// Uniform in the open interval (0,1), from words [2*parity, 2*parity+1] of one
// Philox block. Two consecutive coordinates share a block.
double uniform01(std::uint64_t seed, std::uint32_t step, std::uint32_t unit,
                 std::uint32_t coord, Stream stream);

// Standard normal via the inverse CDF of uniform01. Deterministic given the key.
double normal(std::uint64_t seed, std::uint32_t step, std::uint32_t unit,
              std::uint32_t coord, Stream stream);

// Derives independent 64-bit seeds (replicates, Q*-sampling, ...) from a base
// seed; SplitMix64-style mixing.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag, std::uint64_t index);

std::uint64_t mix64(std::uint64_t x);

} // namespace rng

// Convenience stateful wrapper for test/oracle sampling. Still counter-based
// underneath: it just tracks an incrementing draw index.
class SequenceRng {
public:
    explicit SequenceRng(std::uint64_t seed) : seed_(seed) {}

    double uniform() {
        const std::uint64_t i = next_++;
        return rng::uniform01(seed_, static_cast<std::uint32_t>(i >> 32), static_cast<std::uint32_t>(i),
                              0, rng::Stream::Generic);
    }
    double normal() {
        const std::uint64_t i = next_++;
        return rng::normal(seed_, static_cast<std::uint32_t>(i >> 32), static_cast<std::uint32_t>(i),
                           0, rng::Stream::Generic);
    }
    // Uniform on [lo, hi].
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

private:
    std::uint64_t seed_;
    std::uint64_t next_ = 0;
};

} // namespace pgd

#endif
