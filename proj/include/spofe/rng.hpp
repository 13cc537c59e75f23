#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace spofe {

// Every stochastic stage draws from its own stream derived from the master
// seed and a stage name, so a stage can be reproduced in isolation and thread
// scheduling never changes which numbers a stage sees.
std::uint64_t derive_seed(std::uint64_t master, std::string_view stream, std::uint64_t index = 0);

using Rng = std::mt19937_64;

inline Rng make_stream(std::uint64_t master, std::string_view stream, std::uint64_t index = 0) {
  return Rng(derive_seed(master, stream, index));
}

}  // namespace spofe
