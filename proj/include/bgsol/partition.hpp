#pragma once

#include <algorithm>
#include <bit>
#include <cassert>
#include <cmath>
#include <compare>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <iterator>
#include <limits>
#include <map>
#include <numeric>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"
#include "rng.hpp"

namespace bgsol {

using i64 = std::int64_t;
using u64 = std::uint64_t;

/**
 A configuration of the game: pile sizes stored sorted non-increasing,
 all entries positive.  The empty partition (zero cards) is a valid value.
 Immutable after construction; cheap to copy and safe to share across
 threads.
 */
class Partition {
 public:
  Partition() = default;

  // Requires the list to already be sorted non-increasing and positive.
  Partition(std::initializer_list<i64> piles) : piles_(piles) {
    for (std::size_t i = 0; i < piles_.size(); ++i) {
      if (piles_[i] <= 0 || (i > 0 && piles_[i] > piles_[i - 1]))
        throw std::invalid_argument("Partition: piles must be positive and non-increasing");
    }
  }

  // Adopts an already sorted, zero-free vector.  Checked only in debug builds.
  static Partition from_sorted(std::vector<i64> piles) {
#ifndef NDEBUG
    for (std::size_t i = 0; i < piles.size(); ++i) {
      assert(piles[i] > 0);
      assert(i == 0 || piles[i] <= piles[i - 1]);
    }
#endif
    Partition s;
    s.piles_ = std::move(piles);
    return s;
  }

  const std::vector<i64>& piles() const { return piles_; }
  bool empty() const { return piles_.empty(); }
  i64 length() const { return static_cast<i64>(piles_.size()); }    // number of piles
  i64 largest() const { return piles_.empty() ? 0 : piles_[0]; }    // biggest pile
  i64 total() const {                                               // number of cards
    return std::accumulate(piles_.begin(), piles_.end(), i64{0});
  }
  i64 pile(i64 j) const { return piles_[static_cast<std::size_t>(j - 1)]; }  // 1-based

  friend bool operator==(const Partition&, const Partition&) = default;
  friend auto operator<=>(const Partition&, const Partition&) = default;

 private:
  std::vector<i64> piles_;
};

// Sort descending, drop zeros.
inline Partition ord(std::vector<i64> sizes) {
  for (i64 v : sizes)
    if (v < 0) throw std::invalid_argument("ord: negative pile size");
  std::sort(sizes.begin(), sizes.end(), std::greater<>{});
  while (!sizes.empty() && sizes.back() == 0) sizes.pop_back();
  return Partition::from_sorted(std::move(sizes));
}

namespace detail {

// One game move with a newborn pile of size length+extra.  The decremented
// sequence stays sorted, so a single pass with one insertion point suffices.
inline Partition move_with_newborn(const Partition& s, i64 extra) {
  const auto& k = s.piles();
  const i64 born = s.length() + extra;
  std::vector<i64> out;
  out.reserve(k.size() + 1);
  bool placed = born == 0;
  for (i64 v : k) {
    const i64 d = v - 1;
    if (d == 0) break;  // sorted input: every remaining pile has size 1
    if (!placed && born >= d) {
      out.push_back(born);
      placed = true;
    }
    out.push_back(d);
  }
  if (!placed) out.push_back(born);
  return Partition::from_sorted(std::move(out));
}

}  // namespace detail

// Deterministic move: every pile loses a card, the removed cards form a new pile.
inline Partition q1_move(const Partition& s) { return detail::move_with_newborn(s, 0); }

/**
 Randomness source for the random game: the per-pile removal probability p
 and one RngStream.  p = 0 is rejected up front (the chain would freeze);
 p = 1 reproduces the deterministic move.
 */
class BernoulliField {
 public:
  BernoulliField(double p, u64 seed) : p_(p), stream_(seed) { check(p); }
  BernoulliField(double p, RngStream stream) : p_(p), stream_(stream) { check(p); }

  double p() const { return p_; }
  RngStream& stream() { return stream_; }
  bool draw() { return stream_.bernoulli(p_); }

 private:
  static void check(double p) {
    if (!(p > 0.0) || p > 1.0)
      throw std::invalid_argument("BernoulliField: p must lie in (0, 1]");
  }
  double p_;
  RngStream stream_;
};

// Random move: pile i loses a card iff xi_i = 1; the removed cards form a
// new pile.  Total card count is preserved.
inline Partition qp_move(const Partition& s, BernoulliField& field) {
  thread_local std::vector<i64> kept, dropped;
  kept.clear();
  dropped.clear();
  i64 born = 0;
  for (i64 v : s.piles()) {
    if (field.draw()) {
      ++born;
      if (v > 1) dropped.push_back(v - 1);
    } else {
      kept.push_back(v);
    }
  }
  // kept and dropped are subsequences of a sorted sequence, hence sorted.
  std::vector<i64> out;
  out.reserve(kept.size() + dropped.size() + 1);
  std::merge(kept.begin(), kept.end(), dropped.begin(), dropped.end(),
             std::back_inserter(out), std::greater<>{});
  if (born > 0) {
    auto pos = std::upper_bound(out.begin(), out.end(), born, std::greater<>{});
    out.insert(pos, born);
  }
  return Partition::from_sorted(std::move(out));
}

// Exact one-step kernel row: enumerates all 2^length removal patterns.
inline std::map<Partition, double> qp_transition_distribution(const Partition& s, double p) {
  if (!(p > 0.0) || p > 1.0)
    throw std::invalid_argument("qp_transition_distribution: p must lie in (0, 1]");
  const int len = static_cast<int>(s.length());
  if (len > 24) throw guard_error("qp_transition_distribution: more than 24 piles");
  const auto& k = s.piles();
  std::vector<double> pw_hit(len + 1), pw_miss(len + 1);
  pw_hit[0] = pw_miss[0] = 1.0;
  for (int i = 1; i <= len; ++i) {
    pw_hit[i] = pw_hit[i - 1] * p;
    pw_miss[i] = pw_miss[i - 1] * (1.0 - p);
  }
  std::map<Partition, double> dist;
  std::vector<i64> buf;
  const std::uint32_t patterns = std::uint32_t{1} << len;
  for (std::uint32_t mask = 0; mask < patterns; ++mask) {
    buf.clear();
    i64 born = 0;
    for (int i = 0; i < len; ++i) {
      if (mask & (std::uint32_t{1} << i)) {
        ++born;
        if (k[i] > 1) buf.push_back(k[i] - 1);
      } else {
        buf.push_back(k[i]);
      }
    }
    if (born > 0) buf.push_back(born);
    const int hits = std::popcount(mask);
    const double weight = pw_hit[hits] * pw_miss[len - hits];
    if (weight > 0.0) dist[ord(buf)] += weight;
  }
  return dist;
}

// Sup-distance between profiles, missing entries read as zero.
inline i64 rho(const Partition& a, const Partition& b) {
  const auto& x = a.piles();
  const auto& y = b.piles();
  const std::size_t m = std::max(x.size(), y.size());
  i64 best = 0;
  for (std::size_t j = 0; j < m; ++j) {
    const i64 xv = j < x.size() ? x[j] : 0;
    const i64 yv = j < y.size() ? y[j] : 0;
    best = std::max(best, std::abs(xv - yv));
  }
  return best;
}

// Partial order: entrywise dominance over the shorter profile plus a length bound.
inline bool leq(const Partition& a, const Partition& b) {
  const auto& x = a.piles();
  const auto& y = b.piles();
  if (x.size() > y.size()) return false;
  for (std::size_t j = 0; j < x.size(); ++j)
    if (x[j] > y[j]) return false;
  return true;
}

// Largest k with k(k+1)/2 <= n.
inline i64 theta(i64 n) {
  if (n <= 0) return 0;
  i64 k = static_cast<i64>((std::sqrt(8.0 * static_cast<double>(n) + 1.0) - 1.0) / 2.0);
  while ((k + 1) * (k + 2) / 2 <= n) ++k;
  while (k > 0 && k * (k + 1) / 2 > n) --k;
  return k;
}

inline bool is_triangular(i64 n) {
  const i64 k = theta(n);
  return n >= 0 && k * (k + 1) / 2 == n;
}

// The stable configuration (k, k-1, ..., 1).
inline Partition staircase(i64 k) {
  std::vector<i64> v;
  v.reserve(static_cast<std::size_t>(std::max<i64>(k, 0)));
  for (i64 j = k; j >= 1; --j) v.push_back(j);
  return Partition::from_sorted(std::move(v));
}

/**
 Reference triangular profile for given (p, N): entries
 ceil(sqrt(2*N*p) - p*j) truncated at the last positive one.  Its total need
 not equal N for p < 1; it is used purely as the target of the sup-distance.
 */
struct TriangularTarget {
  double p = 1.0;
  i64 n = 0;
  Partition profile;
};

inline TriangularTarget triangular_target(double p, i64 n) {
  if (!(p > 0.0) || p > 1.0)
    throw std::invalid_argument("triangular_target: p must lie in (0, 1]");
  if (n < 1) throw std::invalid_argument("triangular_target: n must be positive");
  const double r = std::sqrt(2.0 * static_cast<double>(n) * p);
  std::vector<i64> prof;
  for (i64 j = 1;; ++j) {
    const i64 v = static_cast<i64>(std::ceil(r - p * static_cast<double>(j)));
    if (v < 1) break;
    prof.push_back(v);
  }
  return TriangularTarget{p, n, Partition::from_sorted(std::move(prof))};
}

// Membership in the rho-ball of radius eps*sqrt(N) around the triangular profile.
inline bool in_rough_triangle(const Partition& s, double eps, double p) {
  const i64 n = s.total();
  if (n < 1) throw std::invalid_argument("in_rough_triangle: empty configuration");
  const TriangularTarget t = triangular_target(p, n);
  return static_cast<double>(rho(s, t.profile)) <= eps * std::sqrt(static_cast<double>(n));
}

// Near-triangular configuration of exactly n cards: one extra card on each of
// the n - k(k+1)/2 largest staircase piles.
inline Partition t0_config(i64 n) {
  if (n < 1) throw std::invalid_argument("t0_config: n must be positive");
  const i64 k = theta(n);
  const i64 extra = n - k * (k + 1) / 2;
  std::vector<i64> v;
  v.reserve(static_cast<std::size_t>(k));
  for (i64 i = 1; i <= k; ++i) v.push_back(k - i + 1 + (i <= extra ? 1 : 0));
  return Partition::from_sorted(std::move(v));
}

// Sufficient condition for the eps-ball around the triangular profile to
// contain t0_config(n) together with its whole rho-1 neighbourhood:
// rho(T0, profile) + 1 <= eps*sqrt(n) (sup-metric triangle inequality).
// Possibly conservative right at the boundary eps.
inline bool is_nondegenerate(double eps, i64 n) {
  if (n < 1) throw std::invalid_argument("is_nondegenerate: n must be positive");
  const TriangularTarget t = triangular_target(1.0, n);
  const i64 d = rho(t0_config(n), t.profile);
  return static_cast<double>(d + 1) <= eps * std::sqrt(static_cast<double>(n));
}

// "Reasonable" configurations: at most alpha*sqrt(N) piles, largest pile at
// most beta*sqrt(N).
inline bool in_g(const Partition& s, double alpha, double beta) {
  const i64 n = s.total();
  if (n < 1) throw std::invalid_argument("in_g: empty configuration");
  const double root = std::sqrt(static_cast<double>(n));
  return static_cast<double>(s.length()) <= alpha * root &&
         static_cast<double>(s.largest()) <= beta * root;
}

namespace detail {

inline void enumerate_rec(i64 left, i64 max_part, std::vector<i64>& cur,
                          std::vector<Partition>& out) {
  if (left == 0) {
    out.push_back(Partition::from_sorted(cur));
    return;
  }
  for (i64 v = std::min(max_part, left); v >= 1; --v) {
    cur.push_back(v);
    enumerate_rec(left - v, v, cur, out);
    cur.pop_back();
  }
}

}  // namespace detail

// All partitions of n, descending-lexicographic order.  Guarded: partition
// counts explode (p(40) = 37338).
inline std::vector<Partition> enumerate_partitions(i64 n) {
  if (n < 0) throw std::invalid_argument("enumerate_partitions: negative n");
  if (n > 40) throw guard_error("enumerate_partitions: n > 40");
  std::vector<Partition> out;
  std::vector<i64> cur;
  detail::enumerate_rec(n, n, cur, out);
  return out;
}

// Canonical text form: comma-separated piles, non-increasing, e.g. "5,3,2,1".
inline std::string render_partition(const Partition& s) {
  std::string out;
  for (std::size_t i = 0; i < s.piles().size(); ++i) {
    if (i) out.push_back(',');
    out += std::to_string(s.piles()[i]);
  }
  return out;
}

// Accepts piles in any order; empty string means the empty partition.
inline Partition parse_partition(std::string_view text) {
  if (!text.empty() && text.back() == ',')
    throw std::invalid_argument("parse_partition: trailing comma");
  std::vector<i64> piles;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find(',', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view tok = text.substr(pos, end - pos);
    if (tok.empty()) throw std::invalid_argument("parse_partition: empty pile entry");
    i64 v = 0;
    for (char c : tok) {
      if (c < '0' || c > '9')
        throw std::invalid_argument("parse_partition: pile sizes must be positive integers");
      if (v > (std::numeric_limits<i64>::max() - (c - '0')) / 10)
        throw std::invalid_argument("parse_partition: pile size out of range");
      v = v * 10 + (c - '0');
    }
    if (v <= 0) throw std::invalid_argument("parse_partition: pile sizes must be positive");
    piles.push_back(v);
    pos = end + (end < text.size() ? 1 : 0);
  }
  return ord(std::move(piles));
}

}  // namespace bgsol
