#pragma once

#include <cstdint>
#include <vector>

namespace spl {

/// Deterministic PRNG with self-contained distributions. std::mt19937_64 is
/// portable, but the standard distributions are not; results here must be
/// reproducible byte-for-byte from a seed, so the transforms are our own.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) { reseed(seed); }

    void reseed(std::uint64_t seed);

    std::uint64_t next_u64();

    /// Uniform in [0,1).
    double uniform();

    /// Uniform in [lo,hi).
    double uniform(double lo, double hi);

    /// Uniform integer in [0,n). n must be > 0.
    std::size_t uniform_index(std::size_t n);

    /// Standard normal via Box-Muller (cached spare).
    double normal();

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

  private:
    std::uint64_t state_[4];
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// splitmix64: used to derive independent child seeds (per trial, per fit).
std::uint64_t split_seed(std::uint64_t base, std::uint64_t stream);

/// Stable 64-bit hash of an integer sequence (fit-seed derivation, cache keys).
std::uint64_t hash_sequence(const std::vector<int>& xs, std::uint64_t salt = 0);

}  // namespace spl
