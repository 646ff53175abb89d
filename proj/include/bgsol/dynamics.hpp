#pragma once

#include <atomic>
#include <cmath>
#include <functional>
#include <mutex>
#include <optional>
#include <thread>
#include <utility>
#include <vector>

#include "etienne.hpp"
#include "partition.hpp"

namespace bgsol {

namespace detail {

// Runs fn(0..count-1) on up to `threads` workers; writers index into
// preallocated slots, so results do not depend on scheduling.
template <class Fn>
void parallel_for_index(i64 count, int threads, Fn&& fn) {
  if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
  if (threads <= 0) threads = 1;
  const int workers = static_cast<int>(std::min<i64>(threads, count));
  if (workers <= 1) {
    for (i64 i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<i64> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const i64 i = next.fetch_add(1);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace detail

struct CycleReport {
  i64 transient_length = 0;
  i64 cycle_length = 0;
  std::vector<Partition> cycle_states;
  bool reached_stable = false;
};

/**
 Brent-style cycle search on the deterministic orbit: a teleporting
 comparator doubles its lag until the period is found, so memory stays O(1)
 however long the transient is.  Cycle states are reconstructed afterwards.
 `max_moves` caps the total number of moves spent searching; a finite orbit
 always cycles, so exhausting it signals a caller bug.
 */
inline CycleReport detect_cycle(const Partition& s0, i64 max_moves = 0) {
  if (s0.total() < 1) throw std::invalid_argument("detect_cycle: empty configuration");
  if (max_moves <= 0) max_moves = 60 * s0.total() + 10000;
  i64 used = 0;
  const auto step = [&](const Partition& x) {
    if (++used > max_moves) throw guard_error("detect_cycle: move budget exhausted");
    return q1_move(x);
  };

  i64 power = 1, period = 1;
  Partition tortoise = s0;
  Partition hare = step(s0);
  while (tortoise != hare) {
    if (power == period) {
      tortoise = hare;
      power <<= 1;
      period = 0;
    }
    hare = step(hare);
    ++period;
  }

  hare = s0;
  for (i64 i = 0; i < period; ++i) hare = step(hare);
  tortoise = s0;
  i64 entry = 0;
  while (tortoise != hare) {
    tortoise = step(tortoise);
    hare = step(hare);
    ++entry;
  }

  CycleReport report;
  report.transient_length = entry;
  report.cycle_length = period;
  report.cycle_states.reserve(static_cast<std::size_t>(period));
  Partition state = tortoise;
  for (i64 i = 0; i < period; ++i) {
    report.cycle_states.push_back(state);
    state = q1_move(state);
  }
  const i64 n = s0.total();
  report.reached_stable = period == 1 && is_triangular(n) &&
                          report.cycle_states.front() == staircase(theta(n));
  return report;
}

struct EnergyTracePoint {
  i64 move_index = 0;
  ShapeStats stats;
};

struct HittingReport {
  double eps = 0.0;
  i64 budget = 0;
  std::optional<i64> hit_time;     // first entry into the ball
  std::optional<i64> settle_time;  // first move after the last exit; inside from here on
  bool stayed = false;             // membership never lapsed after the first entry
  std::vector<EnergyTracePoint> energy_trace;
};

/**
 Entry of the deterministic orbit into the eps-ball around the triangular
 profile.  hit_time is the first touch; settle_time is the move from which
 membership holds for the whole remaining budget (the orbit may brush the
 ball early, leave, and settle later).  Shape statistics are sampled every
 ceil(sqrt(N)) moves.  A miss within the budget is an outcome, not an error.
 */
inline HittingReport hitting_time(const Partition& s0, double eps, i64 budget,
                                  bool record_energy = true) {
  const i64 n = s0.total();
  if (n < 1) throw std::invalid_argument("hitting_time: empty configuration");
  if (budget < 0) throw std::invalid_argument("hitting_time: negative budget");
  if (!is_nondegenerate(eps, n))
    throw std::invalid_argument("hitting_time: target ball is degenerate for this eps");
  const Partition profile = triangular_target(1.0, n).profile;
  const double radius = eps * std::sqrt(static_cast<double>(n));
  const i64 stride = static_cast<i64>(std::ceil(std::sqrt(static_cast<double>(n))));

  HittingReport report;
  report.eps = eps;
  report.budget = budget;
  Partition s = s0;
  i64 last_exit = -1;
  bool inside_at_end = false;
  for (i64 move = 0;; ++move) {
    const bool inside = static_cast<double>(rho(s, profile)) <= radius;
    if (!report.hit_time && inside) report.hit_time = move;
    if (!inside) last_exit = move;
    if (record_energy && move % stride == 0)
      report.energy_trace.push_back({move, shape_stats(s)});
    if (move == budget) {
      inside_at_end = inside;
      break;
    }
    s = q1_move(s);
  }
  if (inside_at_end) report.settle_time = last_exit + 1;
  report.stayed = report.hit_time && report.settle_time &&
                  *report.settle_time <= *report.hit_time;
  return report;
}

// max{h+, h-} within eps*sqrt(N).
inline bool in_v(const Partition& s, double eps) {
  const ShapeStats st = shape_stats(s);
  return static_cast<double>(std::max(st.h_plus, st.h_minus)) <=
         eps * std::sqrt(static_cast<double>(st.n));
}

// in_v plus a cap on the top occupied row.
inline bool in_v_hat(const Partition& s, double eps) {
  const ShapeStats st = shape_stats(s);
  const double root = std::sqrt(static_cast<double>(st.n));
  return static_cast<double>(std::max(st.h_plus, st.h_minus)) <= eps * root &&
         static_cast<double>(st.height - st.theta) <= eps * root;
}

/**
 Runs the deterministic game in blocks of ceil(c * Etilde^-2 * sqrt(N)) moves
 and records the shape statistics at every block boundary.  Energy is
 monotone, so the recorded Etilde sequence never increases; the per-block
 decrement is left to the caller to inspect.

 Blocks are capped at 8N moves: an orbit enters its cycle within O(N) moves,
 so a capped block with zero decrement means the energy has reached its
 limiting value and the experiment stops.  It also stops once the energy is
 exactly zero.
 */
inline std::vector<EnergyTracePoint> energy_decay_experiment(const Partition& s0, i64 stages,
                                                             double block_c = 1.0) {
  const i64 n = s0.total();
  if (n < 1) throw std::invalid_argument("energy_decay_experiment: empty configuration");
  if (stages < 0) throw std::invalid_argument("energy_decay_experiment: negative stages");
  if (!(block_c > 0)) throw std::invalid_argument("energy_decay_experiment: block_c must be positive");
  std::vector<EnergyTracePoint> trace;
  Partition s = s0;
  i64 move = 0;
  trace.push_back({move, shape_stats(s)});
  for (i64 stage = 0; stage < stages; ++stage) {
    const double et = trace.back().stats.e_tilde();
    if (!(et > 0.0)) break;
    i64 block = std::max<i64>(
        1, static_cast<i64>(std::ceil(block_c / (et * et) * std::sqrt(static_cast<double>(n)))));
    block = std::min(block, 8 * n);
    const i64 e2_before = trace.back().stats.e2_total();
    for (i64 i = 0; i < block; ++i) s = q1_move(s);
    move += block;
    trace.push_back({move, shape_stats(s)});
    if (trace.back().stats.e2_total() == e2_before) break;
  }
  return trace;
}

/**
 Rescaled profile D(S): pile i becomes ceil(n_i/p) minus a correction bit;
 the first sum(ceil) - floor(N/p) piles lose one card so the total is exactly
 floor(N/p).  d_tilde adds kappa cards on top of every pile.
 */
inline Partition d_map(const Partition& s, double p) {
  if (!(p > 0.0) || !(p < 1.0)) throw std::invalid_argument("d_map: p must lie in (0, 1)");
  const auto& k = s.piles();
  std::vector<i64> scaled;
  scaled.reserve(k.size());
  i64 sum = 0;
  for (i64 v : k) {
    const i64 c = static_cast<i64>(std::ceil(static_cast<double>(v) / p));
    scaled.push_back(c);
    sum += c;
  }
  const i64 target = static_cast<i64>(std::floor(static_cast<double>(s.total()) / p));
  const i64 d = sum - target;
  if (d < 0 || d > s.length()) throw std::logic_error("d_map: correction count out of range");
  for (i64 i = 0; i < d; ++i) scaled[static_cast<std::size_t>(i)] -= 1;
  return ord(std::move(scaled));
}

inline Partition d_tilde_map(const Partition& s, double p, i64 kappa) {
  if (kappa < 0) throw std::invalid_argument("d_tilde_map: negative kappa");
  const Partition base = d_map(s, p);
  std::vector<i64> piles = base.piles();
  for (i64& v : piles) v += kappa;
  return Partition::from_sorted(std::move(piles));
}

// Immigration move: one deterministic game move, then kappa extra cards on
// the newborn pile.
inline Partition q_tilde(const Partition& s, i64 kappa) {
  if (kappa < 0) throw std::invalid_argument("q_tilde: negative kappa");
  return detail::move_with_newborn(s, kappa);
}

inline i64 immigration_kappa(i64 n, double delta0) {
  if (!(delta0 > 0.0) || !(delta0 < 0.25))
    throw std::invalid_argument("immigration_kappa: delta0 must lie in (0, 1/4)");
  return static_cast<i64>(std::ceil(std::pow(static_cast<double>(n), delta0 + 0.25)));
}

struct ImmigrationProcess {
  i64 kappa = 0;
  double delta0 = 0.0;
  Partition state;
  i64 moves = 0;
  i64 initial_total = 0;
};

inline ImmigrationProcess make_immigration_process(const Partition& s0, double delta0) {
  ImmigrationProcess pr;
  pr.delta0 = delta0;
  pr.kappa = immigration_kappa(s0.total(), delta0);
  pr.state = s0;
  pr.initial_total = s0.total();
  return pr;
}

inline void q_tilde_move(ImmigrationProcess& pr) {
  pr.state = q_tilde(pr.state, pr.kappa);
  pr.moves += 1;
}

/**
 Fraction of independent random chains whose rescaled profile stays dominated
 by the deterministic immigration chain started from d_tilde(s0), checked at
 every step up to the horizon.  Ties count as success.  Trials run in
 parallel on per-trial streams; the deterministic trajectory is shared.
 */
inline double domination_experiment(const Partition& s0, double p, double delta0, i64 horizon,
                                    i64 trials, u64 seed, int threads = 0) {
  if (s0.total() < 1) throw std::invalid_argument("domination_experiment: empty configuration");
  if (!(p > 0.0) || !(p < 1.0))
    throw std::invalid_argument("domination_experiment: p must lie in (0, 1)");
  if (horizon < 0 || trials < 1)
    throw std::invalid_argument("domination_experiment: bad horizon or trial count");
  const i64 kappa = immigration_kappa(s0.total(), delta0);

  std::vector<Partition> dominating;
  dominating.reserve(static_cast<std::size_t>(horizon) + 1);
  dominating.push_back(d_tilde_map(s0, p, kappa));
  for (i64 i = 0; i < horizon; ++i) dominating.push_back(q_tilde(dominating.back(), kappa));

  std::vector<char> success(static_cast<std::size_t>(trials), 0);
  detail::parallel_for_index(trials, threads, [&](i64 trial) {
    BernoulliField field(p, RngStream::derive(seed, static_cast<u64>(trial)));
    Partition s = s0;
    bool ok = leq(d_map(s, p), dominating[0]);
    for (i64 move = 1; move <= horizon && ok; ++move) {
      s = qp_move(s, field);
      ok = leq(d_map(s, p), dominating[static_cast<std::size_t>(move)]);
    }
    success[static_cast<std::size_t>(trial)] = ok ? 1 : 0;
  });
  i64 count = 0;
  for (char c : success) count += c;
  return static_cast<double>(count) / static_cast<double>(trials);
}

// The staircase with one card moved from the biggest pile onto a new pile of
// size one; the slowest-converging start among configurations of k(k+1)/2
// cards.
inline Partition worst_case_config(i64 k) {
  if (k < 2) throw std::invalid_argument("worst_case_config: k must be at least 2");
  std::vector<i64> piles;
  piles.reserve(static_cast<std::size_t>(k) + 1);
  piles.push_back(k - 1);
  for (i64 v = k - 1; v >= 1; --v) piles.push_back(v);
  piles.push_back(1);
  return Partition::from_sorted(std::move(piles));
}

}  // namespace bgsol
