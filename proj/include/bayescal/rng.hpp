#pragma once

#include <cstdint>
#include <random>

namespace bayescal {

using Engine = std::mt19937_64;

/// Independent engine per (seed, stream) pair; chains and study cells each get a stream.
inline Engine make_engine(std::uint64_t seed, std::uint64_t stream = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    0x6a09e667u};
  return Engine(seq);
}

}  // namespace bayescal
