#pragma once

#include <random>
#include <string>

#include "quadrant/model.hpp"
#include "quadrant/model_io.hpp"

namespace testing_support {

inline quadrant::QuadrantModel builtin(const std::string& name) {
  return quadrant::read_model("builtin:" + name);
}

inline std::string model_path(const std::string& name) {
  return std::string(QUADRANT_SOURCE_DIR) + "/models/" + name + ".model";
}

// Random law on offsets [lo_x, 2] x [lo_y, 2] with a few nonzero masses.
inline quadrant::StepDistribution random_law(std::mt19937_64& rng, int lo_x, int lo_y,
                                             int n_terms = 5) {
  std::uniform_int_distribution<int> dx(lo_x, 2), dy(lo_y, 2);
  std::uniform_real_distribution<double> w(0.05, 1.0);
  std::vector<quadrant::StepDistribution::Entry> entries;
  double total = 0.0;
  for (int k = 0; k < n_terms; ++k) {
    const double p = w(rng);
    entries.push_back({{dx(rng), dy(rng)}, p, std::nullopt});
    total += p;
  }
  for (auto& e : entries) e.p /= total;
  return quadrant::StepDistribution(std::move(entries));
}

// Random model with negative interior drift on both axes (ratio within [1/3, 3]), upward mass in each
// coordinate and lazy nearest-neighbour moves for irreducibility.
inline quadrant::QuadrantModel random_model(std::uint64_t seed, int k0 = 1) {
  using quadrant::StepDistribution;
  std::mt19937_64 rng(seed);
  for (;;) {
    auto core = random_law(rng, -k0, -k0, 6);
    auto interior = StepDistribution::mixture(
        core,
        StepDistribution::from_masses(
            {{1, 0, 0.15}, {0, 1, 0.15}, {-1, 0, 0.35}, {0, -1, 0.35}}),
        0.5);
    const auto m = quadrant::drift(interior);
    if (!(m.m1 < -0.05 && m.m2 < -0.05)) continue;
    if (m.m1 / m.m2 > 3.0 || m.m2 / m.m1 > 3.0) continue;
    std::vector<StepDistribution> horizontal, vertical, corner;
    // Base moves reach every neighbour the floors allow.
    auto base = [](int i, int j) {
      std::vector<StepDistribution::Entry> e{{{1, 0}, 1.0, {}}, {{0, 1}, 1.0, {}}, {{1, 1}, 1.0, {}}};
      if (i > 0) e.push_back({{-1, 0}, 1.0, {}});
      if (j > 0) e.push_back({{0, -1}, 1.0, {}});
      for (auto& x : e) x.p /= double(e.size());
      return StepDistribution(std::move(e));
    };
    for (int j = 0; j < k0; ++j)
      horizontal.push_back(StepDistribution::mixture(random_law(rng, -k0, -j), base(k0, j), 0.5));
    for (int i = 0; i < k0; ++i)
      vertical.push_back(StepDistribution::mixture(random_law(rng, -i, -k0), base(i, k0), 0.5));
    for (int i = 0; i < k0; ++i)
      for (int j = 0; j < k0; ++j)
        corner.push_back(StepDistribution::mixture(random_law(rng, -i, -j), base(i, j), 0.5));
    return quadrant::QuadrantModel(k0, interior, horizontal, vertical, corner);
  }
}

// Fixed k0 = 2 model with strong boundary kicks (V1 = 5/12, V2 = 7/12).
inline quadrant::QuadrantModel wide_model() {
  return quadrant::parse_model(R"(k0: 2
interior: [[1, 0, "1/6"], [0, 1, "1/8"], [-1, 0, "1/3"], [0, -1, "3/8"]]
horizontal:
  - [[2, 0, "1/2"], [1, 1, "1/4"], [-1, 0, "1/4"]]
  - [[2, 0, "1/2"], [1, 1, "1/4"], [-1, 0, "1/8"], [0, -1, "1/8"]]
vertical:
  - [[0, 2, "1/2"], [1, 1, "1/4"], [0, -1, "1/4"]]
  - [[0, 2, "1/2"], [1, 1, "1/4"], [0, -1, "1/8"], [-1, 0, "1/8"]]
corner:
  - - [[1, 0, "1/3"], [0, 1, "1/3"], [1, 1, "1/3"]]
    - [[1, 0, "1/3"], [0, 1, "1/3"], [1, 1, "1/6"], [0, -1, "1/6"]]
  - - [[1, 0, "1/3"], [0, 1, "1/3"], [1, 1, "1/6"], [-1, 0, "1/6"]]
    - [[1, 0, "1/4"], [0, 1, "1/4"], [-1, -1, "1/4"], [1, 1, "1/4"]]
)", "wide");
}

}  // namespace testing_support
