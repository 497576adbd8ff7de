#pragma once

#include <cstdint>

namespace causebound {

/// Counter-based 64-bit generator (splitmix64). The state advances by a fixed
/// odd increment, so jumping n steps ahead is a single multiply-add; output is
/// a bijective mix of the counter. One engine per (seed, stream) substream
/// keeps every sampled chance on its own reproducible stream, independent of
/// what the other chances consume.
class SplitMix64 {
public:
    using result_type = std::uint64_t;

    explicit SplitMix64(std::uint64_t state) : state_(state) {}

    std::uint64_t operator()() {
        state_ += kGamma;
        return mix(state_);
    }

    void jump(std::uint64_t steps) { state_ += steps * kGamma; }

    static constexpr std::uint64_t min() { return 0; }
    static constexpr std::uint64_t max() { return ~std::uint64_t{0}; }

    /// Finalizer used both for output and for deriving substream seeds.
    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

private:
    static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;
    std::uint64_t state_;
};

/// Independent substream of a master seed. Distinct stream ids give streams
/// with unrelated trajectories; the derivation depends on nothing else.
inline SplitMix64 substream(std::uint64_t seed, std::uint64_t stream) {
    return SplitMix64(SplitMix64::mix(SplitMix64::mix(seed) + stream));
}

/// Uniform draw in [0, 1) with 53-bit resolution.
inline double uniform01(SplitMix64& g) {
    return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

/// Standard normal via Box-Muller (cosine branch); consumes two uniforms.
double normal01(SplitMix64& g);

/// Gamma(alpha, 1) via Marsaglia-Tsang squeeze; alpha < 1 handled by the
/// boost Gamma(alpha+1) * U^(1/alpha). Requires alpha > 0.
double gamma_draw(SplitMix64& g, double alpha);

/// Beta(alpha, beta) as a ratio of gammas. Requires alpha, beta > 0.
double beta_draw(SplitMix64& g, double alpha, double beta);

} // namespace causebound
