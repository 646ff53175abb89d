#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "partition.hpp"
#include "rng.hpp"

namespace bgsol {

// Random partition of n drawn as a uniform-cut composition: pick a pile
// count, cut [1, n-1] at distinct random points, sort the gaps.  Not the
// uniform measure on partitions, but covers shapes from a single pile to
// all ones, which is what the test suites need.
inline Partition random_partition(i64 n, RngStream& rng) {
  if (n < 0) throw std::invalid_argument("random_partition: negative n");
  if (n == 0) return Partition{};
  const i64 parts = rng.uniform_int(1, n);
  if (parts == 1) return Partition::from_sorted({n});
  std::vector<i64> cuts;
  cuts.reserve(static_cast<std::size_t>(parts - 1));
  for (i64 i = 0; i < parts - 1; ++i) cuts.push_back(rng.uniform_int(1, n - 1));
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  std::vector<i64> sizes;
  sizes.reserve(cuts.size() + 1);
  i64 prev = 0;
  for (i64 c : cuts) {
    sizes.push_back(c - prev);
    prev = c;
  }
  sizes.push_back(n - prev);
  return ord(std::move(sizes));
}

// Random member of the reasonable set: at most alpha*sqrt(n) piles, largest
// pile at most beta*sqrt(n).  Starts from a balanced split and mixes with
// random transfers that respect the pile cap; emptied piles are dropped.
inline Partition random_partition_in_g(i64 n, double alpha, double beta, RngStream& rng) {
  if (n < 1) throw std::invalid_argument("random_partition_in_g: n must be positive");
  const double root = std::sqrt(static_cast<double>(n));
  const i64 cap = std::max<i64>(1, static_cast<i64>(std::floor(beta * root)));
  const i64 lmax = std::max<i64>(1, static_cast<i64>(std::floor(alpha * root)));
  const i64 lmin = (n + cap - 1) / cap;
  if (lmin > lmax)
    throw std::invalid_argument("random_partition_in_g: alpha*beta too small for n");
  const i64 parts = rng.uniform_int(lmin, std::min(lmax, n));
  std::vector<i64> piles(static_cast<std::size_t>(parts), n / parts);
  for (i64 i = 0; i < n % parts; ++i) piles[static_cast<std::size_t>(i)] += 1;
  const i64 rounds = 4 * parts;
  for (i64 r = 0; r < rounds; ++r) {
    const auto a = static_cast<std::size_t>(rng.uniform_int(0, parts - 1));
    const auto b = static_cast<std::size_t>(rng.uniform_int(0, parts - 1));
    if (a == b) continue;
    const i64 room = std::min(piles[a], cap - piles[b]);
    if (room <= 0) continue;
    const i64 amount = rng.uniform_int(0, room);
    piles[a] -= amount;
    piles[b] += amount;
  }
  return ord(std::move(piles));
}

}  // namespace bgsol
