#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "nazarov/dyadic_geometry.hpp"

namespace nazarov::testing {

/// Disjoint dyadic seeds inside [0,1)^2.  The first seed has depth 1..3 and
/// the rest depth 1..max_depth; candidates meeting an earlier seed are
/// dropped.  A shallow first seed keeps tau small: its tail tiles the root
/// with cells no smaller than the ones deep seeds would add.
inline std::vector<DyadicSquare> random_seed_family(std::mt19937_64& rng, int max_seeds, int max_depth = 8) {
  std::vector<DyadicSquare> seeds;
  const int want = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(max_seeds));
  for (int i = 0; i < 4 * want && static_cast<int>(seeds.size()) < want; ++i) {
    const int d = i == 0 ? 1 + static_cast<int>(rng() % 3) : 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(max_depth));
    const std::uint64_t n = std::uint64_t{1} << d;
    const DyadicSquare c{d, static_cast<std::int64_t>(rng() % n), static_cast<std::int64_t>(rng() % n)};
    bool ok = true;
    for (const auto& q : seeds) ok = ok && relation(c, q) == Relation::disjoint;
    if (ok) seeds.push_back(c);
  }
  return seeds;
}

}  // namespace nazarov::testing
