#pragma once

#include <array>
#include <cstdint>

namespace quadrant {

/// Philox4x32-10 block function (Salmon et al., "Parallel random numbers: as easy as 1, 2, 3").
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key);

/// Counter-based generator: the value at (seed, stream, step, lane) does not depend on the
/// order in which values are requested.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

  /// Uniform double in [0, 1) with 53 random bits. lane selects one of two values per block.
  double uniform(std::uint64_t step, unsigned lane = 0) const;

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
};

}  // namespace quadrant
