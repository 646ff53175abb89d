#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "partition.hpp"

namespace bgsol {

/**
 Occupancy representation of a configuration on the half-quadrant
 Z = {(i,j): i >= 1, 1 <= j <= i}.  Pile n of size k occupies the diagonal
 cells (n+m-1, m), m = 1..k.  Rows are bitsets with cached occupied counts;
 row i uses bit j-1 for cell (i,j) and rows are allocated lazily.

 One game move = cyclic shift of every row (column j -> j-1, column 1 wraps
 to column i) followed by gravity: any particle sitting above an empty cell
 of its column falls one unit, repeated until stable.  Falls never cross
 columns, so settling compacts each column downward; the resulting diagram
 and the number of unit falls do not depend on the order in which falls are
 performed.
 */
class EtienneDiagram {
 public:
  EtienneDiagram() = default;

  static EtienneDiagram from_partition(const Partition& s) {
    EtienneDiagram d;
    const auto& k = s.piles();
    i64 top = 0;
    for (std::size_t n = 0; n < k.size(); ++n)
      top = std::max(top, static_cast<i64>(n + 1) + k[n] - 1);
    d.rows_.resize(static_cast<std::size_t>(top));
    for (std::size_t n = 0; n < k.size(); ++n) {
      const i64 pile_row = static_cast<i64>(n + 1);
      for (i64 m = 1; m <= k[n]; ++m) d.set(pile_row + m - 1, m);
    }
    d.height_ = top;
    return d;
  }

  // Inverse of the representation; requires the occupancy laws to hold.
  Partition to_partition() const {
    std::vector<i64> col_counts;
    for (i64 j = 1; j <= height_; ++j) {
      i64 c = 0;
      while (occupied(j + c, j)) ++c;
      if (c == 0) break;
      col_counts.push_back(c);
    }
    // Column counts form the conjugate partition.
    std::vector<i64> piles;
    if (!col_counts.empty()) {
      piles.resize(static_cast<std::size_t>(col_counts[0]));
      for (i64 n = 1; n <= col_counts[0]; ++n) {
        i64 cnt = 0;
        while (cnt < static_cast<i64>(col_counts.size()) &&
               col_counts[static_cast<std::size_t>(cnt)] >= n)
          ++cnt;
        piles[static_cast<std::size_t>(n - 1)] = cnt;
      }
    }
    return Partition::from_sorted(std::move(piles));
  }

  bool occupied(i64 i, i64 j) const {
    if (i < 1 || j < 1 || j > i) return false;
    if (i > static_cast<i64>(rows_.size())) return false;
    const Row& r = rows_[static_cast<std::size_t>(i - 1)];
    const std::size_t word = static_cast<std::size_t>(j - 1) >> 6;
    if (word >= r.words.size()) return false;
    return (r.words[word] >> ((j - 1) & 63)) & 1ULL;
  }

  i64 height() const { return height_; }

  i64 cells() const {
    i64 total = 0;
    for (const Row& r : rows_) total += r.count;
    return total;
  }

  i64 row_count(i64 i) const {
    if (i < 1 || i > static_cast<i64>(rows_.size())) return 0;
    return rows_[static_cast<std::size_t>(i - 1)].count;
  }

  // Any occupied cell on row i with column in [lo, hi]?
  bool any_in_columns(i64 i, i64 lo, i64 hi) const {
    if (i < 1 || i > static_cast<i64>(rows_.size())) return false;
    lo = std::max<i64>(lo, 1);
    hi = std::min(hi, i);
    if (lo > hi) return false;
    const Row& r = rows_[static_cast<std::size_t>(i - 1)];
    const i64 top_bit = std::min<i64>(hi, static_cast<i64>(r.words.size()) * 64) - 1;
    for (i64 b = lo - 1; b <= top_bit;) {
      const std::size_t word = static_cast<std::size_t>(b) >> 6;
      std::uint64_t w = r.words[word];
      w &= ~0ULL << (b & 63);
      const i64 word_end = static_cast<i64>(word + 1) * 64 - 1;
      if (word_end > top_bit) {
        const int keep = static_cast<int>(top_bit - static_cast<i64>(word) * 64) + 1;
        if (keep < 64) w &= (1ULL << keep) - 1;
      }
      if (w != 0) return true;
      b = word_end + 1;
    }
    return false;
  }

  // One move; returns the number of unit falls.
  i64 apply_move() {
    shift_rows();
    return settle(nullptr);
  }

  /**
   Both staircase occupancy laws together are equivalent to: every column's
   particles form a contiguous block resting on the diagonal cell (j,j), and
   the column counts are non-increasing in j.  That is what we check.
   */
  bool laws_hold() const {
    i64 prev = height_ + 1;
    for (i64 j = 1; j <= height_; ++j) {
      i64 c = 0;
      while (occupied(j + c, j)) ++c;
      for (i64 i = j + c; i <= height_; ++i)
        if (occupied(i, j)) return false;
      if (c > prev) return false;
      prev = c;
    }
    for (i64 i = 1; i <= height_; ++i) {
      i64 pop = 0;
      const Row& r = rows_[static_cast<std::size_t>(i - 1)];
      for (std::uint64_t w : r.words) pop += std::popcount(w);
      if (pop != r.count) return false;
    }
    if (height_ > 0 && row_count(height_) == 0) return false;
    return true;
  }

  friend bool operator==(const EtienneDiagram& a, const EtienneDiagram& b) {
    if (a.height_ != b.height_) return false;
    for (i64 i = 1; i <= a.height_; ++i) {
      if (a.row_count(i) != b.row_count(i)) return false;
      for (i64 j = 1; j <= i; ++j)
        if (a.occupied(i, j) != b.occupied(i, j)) return false;
    }
    return true;
  }

 private:
  struct Row {
    std::vector<std::uint64_t> words;
    i64 count = 0;
  };

  // Pre-shift occupied rows of one column whose particles moved.
  struct ColumnLog {
    i64 column = 0;
    std::vector<i64> before;  // occupied rows, ascending
  };

  friend class Tracker;

  void set(i64 i, i64 j) {
    if (static_cast<i64>(rows_.size()) < i) rows_.resize(static_cast<std::size_t>(i));
    Row& r = rows_[static_cast<std::size_t>(i - 1)];
    const std::size_t word = static_cast<std::size_t>(j - 1) >> 6;
    if (r.words.size() <= word) r.words.resize(word + 1, 0);
    r.words[word] |= 1ULL << ((j - 1) & 63);
    r.count += 1;
  }

  void clear(i64 i, i64 j) {
    Row& r = rows_[static_cast<std::size_t>(i - 1)];
    r.words[static_cast<std::size_t>(j - 1) >> 6] &= ~(1ULL << ((j - 1) & 63));
    r.count -= 1;
  }

  void shift_rows() {
    for (i64 i = 1; i <= height_; ++i) {
      Row& r = rows_[static_cast<std::size_t>(i - 1)];
      if (r.count == 0 || r.count == i) continue;  // empty and full rows are fixed
      const bool carry = (r.words[0] & 1ULL) != 0;
      for (std::size_t w = 0; w < r.words.size(); ++w) {
        r.words[w] >>= 1;
        if (w + 1 < r.words.size()) r.words[w] |= r.words[w + 1] << 63;
      }
      if (carry) {
        r.count -= 1;  // the wrapped bit left column 1; set() re-adds it at column i
        set(i, i);
      }
    }
  }

  // Compacts every column downward; logs pre-fall occupancy of changed
  // columns when a log is supplied.  Returns the number of unit falls.
  i64 settle(std::vector<ColumnLog>* log) {
    i64 falls = 0;
    std::vector<i64> pos;
    for (i64 j = 1; j <= height_; ++j) {
      pos.clear();
      for (i64 i = j; i <= height_; ++i)
        if (occupied(i, j)) pos.push_back(i);
      bool moved = false;
      for (std::size_t r = 0; r < pos.size(); ++r) {
        const i64 target = j + static_cast<i64>(r);
        if (pos[r] != target) {
          falls += pos[r] - target;
          moved = true;
        }
      }
      if (!moved) continue;
      if (log) log->push_back(ColumnLog{j, pos});
      for (std::size_t r = 0; r < pos.size(); ++r)
        if (pos[r] != j + static_cast<i64>(r)) clear(pos[r], j);
      for (std::size_t r = 0; r < pos.size(); ++r)
        if (pos[r] != j + static_cast<i64>(r)) set(j + static_cast<i64>(r), j);
    }
    while (height_ > 0 && row_count(height_) == 0) --height_;
    return falls;
  }

  std::vector<Row> rows_;
  i64 height_ = 0;
};

inline std::pair<EtienneDiagram, i64> etienne_move(const EtienneDiagram& d) {
  EtienneDiagram next = d;
  const i64 falls = next.apply_move();
  return {std::move(next), falls};
}

/**
 Shape and energy diagnostics of one configuration, all relative to the
 reference row theta = theta(|S|).  Energies are kept as doubled integers
 (each hole below theta weighs theta-i+1/2, each particle above weighs
 i-theta-1/2), so the bookkeeping is exact; the tilde forms divide by the
 appropriate power of |S| only on read-out.
 */
struct ShapeStats {
  i64 n = 0;
  i64 theta = 0;
  i64 e2_minus = 0;  // 2 * E_-
  i64 e2_plus = 0;   // 2 * E_+
  i64 h_minus = 0;
  i64 h_plus = 0;
  i64 v_minus = 0;
  i64 v_plus = 0;
  i64 height = 0;

  i64 e2_total() const { return e2_minus + e2_plus; }
  double e_minus() const { return 0.5 * static_cast<double>(e2_minus); }
  double e_plus() const { return 0.5 * static_cast<double>(e2_plus); }
  double e_total() const { return 0.5 * static_cast<double>(e2_total()); }
  double e_tilde_minus() const { return e_minus() / std::pow(static_cast<double>(n), 1.5); }
  double e_tilde_plus() const { return e_plus() / std::pow(static_cast<double>(n), 1.5); }
  double e_tilde() const { return e_total() / std::pow(static_cast<double>(n), 1.5); }
  double h_tilde_minus() const { return static_cast<double>(h_minus) / std::sqrt(static_cast<double>(n)); }
  double h_tilde_plus() const { return static_cast<double>(h_plus) / std::sqrt(static_cast<double>(n)); }
  double v_tilde_minus() const { return static_cast<double>(v_minus) / static_cast<double>(n); }
  double v_tilde_plus() const { return static_cast<double>(v_plus) / static_cast<double>(n); }
};

namespace detail {

struct RowCounts {
  std::vector<i64> count;  // count[i] = occupied cells on row i, 1-based
  i64 height = 0;
};

// Per-row occupied counts straight from the pile sizes: column j covers rows
// [j, j+c_j-1] where c is the conjugate partition; accumulate as a difference
// array.  O(length + largest + height).
inline RowCounts row_counts_of(const Partition& s) {
  RowCounts rc;
  const auto& k = s.piles();
  const i64 len = s.length();
  const i64 big = s.largest();
  i64 top = 0;
  for (std::size_t n = 0; n < k.size(); ++n)
    top = std::max(top, static_cast<i64>(n + 1) + k[n] - 1);
  rc.height = top;
  rc.count.assign(static_cast<std::size_t>(top) + 2, 0);
  i64 t = len;
  for (i64 j = 1; j <= big; ++j) {
    while (t > 0 && k[static_cast<std::size_t>(t - 1)] < j) --t;
    const i64 cj = t;  // piles with at least j cards
    rc.count[static_cast<std::size_t>(j)] += 1;
    rc.count[static_cast<std::size_t>(j + cj)] -= 1;
  }
  for (std::size_t i = 1; i < rc.count.size(); ++i) rc.count[i] += rc.count[i - 1];
  return rc;
}

template <class RowCountFn, class HplusRowFn>
ShapeStats shape_stats_impl(i64 n, i64 top, RowCountFn&& cnt, HplusRowFn&& hplus_row) {
  ShapeStats st;
  st.n = n;
  st.theta = theta(n);
  st.height = top;
  for (i64 i = 1; i <= st.theta; ++i) {
    const i64 holes = i - cnt(i);
    st.v_minus += holes;
    st.e2_minus += holes * (2 * (st.theta - i) + 1);
  }
  for (i64 i = st.theta + 1; i <= top; ++i) {
    const i64 c = cnt(i);
    st.v_plus += c;
    st.e2_plus += c * (2 * (i - st.theta) - 1);
  }
  i64 first_hole = st.theta + 1;
  for (i64 i = 1; i <= st.theta; ++i) {
    if (cnt(i) < i) {
      first_hole = i;
      break;
    }
  }
  st.h_minus = std::max<i64>(0, st.theta - first_hole);
  st.h_plus = std::max<i64>(0, hplus_row(st.theta) - st.theta);
  return st;
}

}  // namespace detail

inline ShapeStats shape_stats(const EtienneDiagram& d) {
  const i64 n = d.cells();
  if (n < 1) throw std::invalid_argument("shape_stats: empty configuration");
  return detail::shape_stats_impl(
      n, d.height(), [&](i64 i) { return d.row_count(i); },
      [&](i64 th) {
        // Highest row with a particle inside the window j in [i-theta, theta].
        i64 best = th;
        for (i64 i = th + 1; i <= d.height(); ++i)
          if (d.any_in_columns(i, i - th, th)) best = i;
        return best;
      });
}

inline ShapeStats shape_stats(const Partition& s) {
  const i64 n = s.total();
  if (n < 1) throw std::invalid_argument("shape_stats: empty configuration");
  const detail::RowCounts rc = detail::row_counts_of(s);
  const auto& k = s.piles();
  return detail::shape_stats_impl(
      n, rc.height, [&](i64 i) { return rc.count[static_cast<std::size_t>(i)]; },
      [&](i64 th) {
        // Column j reaches up to row j + c_j - 1 and qualifies up to j + theta.
        i64 best = th;
        i64 t = s.length();
        for (i64 j = 1; j <= std::min(s.largest(), th); ++j) {
          while (t > 0 && k[static_cast<std::size_t>(t - 1)] < j) --t;
          best = std::max(best, std::min(j + t - 1, j + th));
        }
        return best;
      });
}

// Column of the cell from (i,j) after n moves if it never moved vertically:
// the cyclic shift brings it back to j every i moves.
inline i64 j_hat(i64 i, i64 j, i64 n) {
  if (i < 1 || j < 1 || j > i || n < 0) throw std::invalid_argument("j_hat: bad arguments");
  const i64 r = n % i;
  return r < j ? j - r : j - r + i;
}

struct TrajectoryRecord {
  i64 origin_i = 0;
  i64 origin_j = 0;
  bool is_particle = true;
  i64 j_current = 0;   // column after n moves
  i64 m = 0;           // vertical moves suffered (down for particles, up for holes)
  i64 n = 0;           // elapsed moves
  i64 j_predicted = 0; // j_hat(origin, n)
};

/**
 Evolves a diagram while carrying the identity of selected cells.  The shift
 maps a cell (r, j) to (r, j-1) with column 1 wrapping to column r; a unit
 fall swaps the falling particle with the hole right below it.  Within a
 column, particles keep their relative order during settling (the lowest
 unsupported one falls first) and so do holes, which pins down every tracked
 identity.
 */
class Tracker {
 public:
  Tracker(EtienneDiagram diagram, const std::vector<std::pair<i64, i64>>& cells)
      : d_(std::move(diagram)) {
    cells_.reserve(cells.size());
    for (const auto& [i, j] : cells) {
      if (i < 1 || j < 1 || j > i)
        throw std::invalid_argument("Tracker: cell outside the half-quadrant");
      cells_.push_back(Cell{i, j, d_.occupied(i, j), i, j, 0});
    }
  }

  void step() {
    for (Cell& c : cells_) c.col = (c.col == 1) ? c.row : c.col - 1;
    d_.shift_rows();
    log_.clear();
    d_.settle(&log_);
    for (const EtienneDiagram::ColumnLog& entry : log_) {
      for (Cell& c : cells_) {
        if (c.col != entry.column) continue;
        if (c.is_particle) {
          const auto it = std::lower_bound(entry.before.begin(), entry.before.end(), c.row);
          const i64 rank = it - entry.before.begin();
          const i64 target = entry.column + rank;
          c.m += c.row - target;
          c.row = target;
        } else {
          const i64 above =
              entry.before.end() -
              std::upper_bound(entry.before.begin(), entry.before.end(), c.row);
          c.m += above;
          c.row += above;
        }
      }
    }
    ++n_;
  }

  i64 moves() const { return n_; }
  const EtienneDiagram& diagram() const { return d_; }

  std::vector<TrajectoryRecord> records() const {
    std::vector<TrajectoryRecord> out;
    out.reserve(cells_.size());
    for (const Cell& c : cells_) {
      TrajectoryRecord r;
      r.origin_i = c.origin_i;
      r.origin_j = c.origin_j;
      r.is_particle = c.is_particle;
      r.j_current = c.col;
      r.m = c.m;
      r.n = n_;
      r.j_predicted = j_hat(c.origin_i, c.origin_j, n_);
      out.push_back(r);
    }
    return out;
  }

 private:
  struct Cell {
    i64 origin_i, origin_j;
    bool is_particle;
    i64 row, col;
    i64 m;
  };

  EtienneDiagram d_;
  std::vector<Cell> cells_;
  std::vector<EtienneDiagram::ColumnLog> log_;
  i64 n_ = 0;
};

inline std::vector<TrajectoryRecord> track(const EtienneDiagram& d,
                                           const std::vector<std::pair<i64, i64>>& cells,
                                           i64 n) {
  if (n < 0) throw std::invalid_argument("track: negative move count");
  Tracker t(d, cells);
  for (i64 i = 0; i < n; ++i) t.step();
  return t.records();
}

// Debug rendering, rows top-down.
inline std::string to_text_grid(const EtienneDiagram& d) {
  std::string out;
  for (i64 i = d.height(); i >= 1; --i) {
    for (i64 j = 1; j <= i; ++j) out.push_back(d.occupied(i, j) ? '#' : '.');
    out.push_back('\n');
  }
  return out;
}

// Figure-style snapshot: one square per particle, the diagonal column (i,i)
// forms the left edge and row numbers grow upward.
inline std::string to_svg(const EtienneDiagram& d, int cell_px = 8) {
  const i64 h = std::max<i64>(d.height(), 1);
  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"";
  out += std::to_string(h * cell_px);
  out += "\" height=\"";
  out += std::to_string(h * cell_px);
  out += "\">\n";
  for (i64 i = 1; i <= d.height(); ++i) {
    for (i64 j = 1; j <= i; ++j) {
      if (!d.occupied(i, j)) continue;
      out += "<rect x=\"";
      out += std::to_string((i - j) * cell_px);
      out += "\" y=\"";
      out += std::to_string((h - i) * cell_px);
      out += "\" width=\"";
      out += std::to_string(cell_px);
      out += "\" height=\"";
      out += std::to_string(cell_px);
      out += "\" fill=\"#335577\" stroke=\"white\"/>\n";
    }
  }
  out += "</svg>\n";
  return out;
}

}  // namespace bgsol
