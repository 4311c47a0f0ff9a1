#include "exo/rng.hpp"

#include <stdexcept>

namespace exo {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

std::uint64_t mix_seed(std::initializer_list<std::uint64_t> words) {
    std::uint64_t h = 0x6a09e667f3bcc909ULL;
    for (std::uint64_t w : words) {
        h = splitmix64(h ^ splitmix64(w));
    }
    return h;
}

Rng::Rng(std::uint64_t seed) : seed_(seed), engine_(splitmix64(seed)) {}

Rng Rng::stream(std::uint64_t experiment, std::uint64_t seed, std::uint64_t episode) {
    return Rng(mix_seed({experiment, seed, episode}));
}

Rng Rng::split(std::uint64_t stream_id) const { return Rng(mix_seed({seed_, stream_id})); }

int Rng::uniform_int(int n) {
    if (n <= 0) {
        throw std::invalid_argument("Rng::uniform_int: n must be positive");
    }
    int k = static_cast<int>(uniform() * n);
    return k < n ? k : n - 1;
}

}  // namespace exo
