#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace signbridge {

using Rng = std::mt19937_64;

// Independent sub-stream seed for (seed, name, index). All randomness in the
// pipeline is keyed this way so that work can be split or reordered without
// changing results.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream, std::uint64_t index = 0);

inline Rng make_rng(std::uint64_t seed, std::string_view stream, std::uint64_t index = 0) {
  return Rng(derive_seed(seed, stream, index));
}

}  // namespace signbridge
