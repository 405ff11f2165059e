#include "quadrant/rng.hpp"

namespace quadrant {

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key) {
  constexpr std::uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
  constexpr std::uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = std::uint64_t(M0) * ctr[0];
    const std::uint64_t p1 = std::uint64_t(M1) * ctr[2];
    ctr = {std::uint32_t(p1 >> 32) ^ ctr[1] ^ key[0], std::uint32_t(p1),
           std::uint32_t(p0 >> 32) ^ ctr[3] ^ key[1], std::uint32_t(p0)};
    key[0] += W0;
    key[1] += W1;
  }
  return ctr;
}

double CounterRng::uniform(std::uint64_t step, unsigned lane) const {
  const auto out = philox4x32(
      {std::uint32_t(step), std::uint32_t(step >> 32), std::uint32_t(stream_),
       std::uint32_t(stream_ >> 32)},
      {std::uint32_t(seed_), std::uint32_t(seed_ >> 32)});
  const unsigned a = (lane & 1u) * 2;
  const std::uint64_t bits = (std::uint64_t(out[a]) << 32) | out[a + 1];
  return double(bits >> 11) * 0x1.0p-53;
}

}  // namespace quadrant
