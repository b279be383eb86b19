#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace cbai {

// std::mt19937_64 is bit-exact across standard libraries; the distributions in
// <random> are not, so every draw goes through the helpers below instead.
using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a64(std::string_view text);

// Seed-derivation rule: splitmix64(master ^ fnv1a64(label)).
std::uint64_t derive_seed(std::uint64_t master, std::string_view label);

// Uniform double in [0, 1) from the top 53 bits of one draw.
double uniform01(Rng& rng);

// Uniform integer in [0, n) by rejection sampling; n > 0.
std::size_t uniform_index(Rng& rng, std::size_t n);

// Standard normal via Box-Muller (one value per two uniforms, no caching).
double standard_normal(Rng& rng);

template <typename T>
void shuffle_in_place(std::vector<T>& values, Rng& rng) {
    for (std::size_t i = values.size(); i > 1; --i) {
        std::size_t j = uniform_index(rng, i);
        std::swap(values[i - 1], values[j]);
    }
}

}  // namespace cbai
