#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace exo {

/// SplitMix64 finalizer folded over a list of words. Used to derive
/// independent stream seeds from (experiment, seed, episode) tuples.
std::uint64_t mix_seed(std::initializer_list<std::uint64_t> words);

/// Seedable, splittable random source.
///
/// Draws are produced from a 64-bit Mersenne twister and converted to
/// doubles with an explicit 53-bit mapping, so sequences are identical
/// across standard library implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0);

    /// Stream dedicated to one episode of one seed of one experiment.
    static Rng stream(std::uint64_t experiment, std::uint64_t seed, std::uint64_t episode);

    /// Child generator whose sequence is a pure function of this generator's
    /// seed and `stream_id`; does not advance this generator.
    Rng split(std::uint64_t stream_id) const;

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform double in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n).
    int uniform_int(int n);

    std::uint64_t seed() const { return seed_; }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

}  // namespace exo
