#pragma once

// Deterministic 64-bit random number generation.
//
// The generator is SplitMix64 (Steele, Lea & Flood's mix function as
// popularized in java.util.SplittableRandom): a counter advanced by the
// golden-gamma constant, passed through an avalanching finalizer.  It is
// chosen here because it is trivially reproducible across platforms,
// allows O(1) derivation of independent per-item streams, and passes
// standard empirical test batteries at the sample counts we use.

#include <cstdint>

namespace ccfp {

class CounterRng {
  public:
    explicit CounterRng(std::uint64_t seed) : state_(seed) {}

    // Avalanche finalizer (the SplitMix64 mix).
    static constexpr std::uint64_t mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform on the open interval (0,1): 53 random bits centered in the
    // cell, so 0 and 1 are never returned and the quantile stays finite.
    double uniform01() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1p-53;
    }

    // Derive an independent stream (e.g. one per Monte Carlo sample).
    // Both inputs pass through the finalizer so that (seed, i) and
    // (seed, i+1) start statistically unrelated; this is what makes the
    // merged estimate independent of how samples are sharded over workers.
    static CounterRng derive(std::uint64_t seed, std::uint64_t stream) {
        return CounterRng(mix(seed ^ mix(0x9e3779b97f4a7c15ULL * (stream + 1))));
    }

  private:
    std::uint64_t state_;
};

}  // namespace ccfp
