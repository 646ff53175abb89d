#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dynamics.hpp"
#include "etienne.hpp"
#include "partition.hpp"

namespace bgsol {

// Proof constants behind the "typical configurations are reasonable" bound.
inline double reasonable_alpha(double p) { return 5.0 / p; }
inline double reasonable_beta(double p) { return 5.0 / p + 1.5; }

struct PredicateSpec {
  enum class Kind { always_true, rough_triangle, reasonable, low_defect, low_defect_capped };
  Kind kind = Kind::always_true;
  double eps = 0.0;     // rough_triangle, low_defect, low_defect_capped
  double p = 0.0;       // rough_triangle target; 0 means the chain's own p
  double alpha = 0.0;   // reasonable
  double beta = 0.0;    // reasonable

  static PredicateSpec always_true() { return PredicateSpec{}; }
  static PredicateSpec rough_triangle(double eps, double p = 0.0) {
    PredicateSpec s;
    s.kind = Kind::rough_triangle;
    s.eps = eps;
    s.p = p;
    return s;
  }
  static PredicateSpec reasonable(double alpha, double beta) {
    PredicateSpec s;
    s.kind = Kind::reasonable;
    s.alpha = alpha;
    s.beta = beta;
    return s;
  }
  static PredicateSpec low_defect(double eps) {
    PredicateSpec s;
    s.kind = Kind::low_defect;
    s.eps = eps;
    return s;
  }
  static PredicateSpec low_defect_capped(double eps) {
    PredicateSpec s;
    s.kind = Kind::low_defect_capped;
    s.eps = eps;
    return s;
  }

  const char* name() const {
    switch (kind) {
      case Kind::always_true: return "always-true";
      case Kind::rough_triangle: return "rough-triangle";
      case Kind::reasonable: return "g";
      case Kind::low_defect: return "v";
      case Kind::low_defect_capped: return "vhat";
    }
    return "?";
  }
};

enum class StartKind { t0, worst_case, single_pile, custom };

inline const char* start_kind_name(StartKind k) {
  switch (k) {
    case StartKind::t0: return "t0";
    case StartKind::worst_case: return "worst";
    case StartKind::single_pile: return "single";
    case StartKind::custom: return "custom";
  }
  return "?";
}

/**
 Full description of one Monte Carlo estimation run.  Defaults: burn-in of
 20*N moves, thinning stride ceil(sqrt(N)), start at the near-triangular
 configuration.  Identical configs produce bit-identical estimates whatever
 the worker-thread count.
 */
struct EstimateConfig {
  i64 n = 0;
  double p = 0.5;
  PredicateSpec predicate;
  int chains = 8;
  i64 moves = 0;
  i64 burn_in = -1;   // -1: default 20*n
  i64 stride = -1;    // -1: default ceil(sqrt(n))
  u64 seed = 0;
  StartKind start = StartKind::t0;
  Partition custom_start;

  i64 resolved_burn_in() const { return burn_in >= 0 ? burn_in : 20 * n; }
  i64 resolved_stride() const {
    return stride >= 1 ? stride
                       : static_cast<i64>(std::ceil(std::sqrt(static_cast<double>(n))));
  }

  void validate() const {
    if (n < 1) throw std::invalid_argument("EstimateConfig: n must be positive");
    if (!(p > 0.0) || !(p < 1.0))
      throw std::invalid_argument("EstimateConfig: p must lie in (0, 1)");
    if (chains < 1) throw std::invalid_argument("EstimateConfig: need at least one chain");
    if (moves < 1) throw std::invalid_argument("EstimateConfig: need at least one move");
    if (resolved_burn_in() >= moves)
      throw std::invalid_argument("EstimateConfig: burn-in must be smaller than moves");
    if (resolved_stride() < 1) throw std::invalid_argument("EstimateConfig: bad stride");
    if (start == StartKind::custom && custom_start.total() != n)
      throw std::invalid_argument("EstimateConfig: custom start has the wrong total");
  }
};

struct StationaryEstimate {
  double value = 0.0;
  std::string method;  // "exact" | "monte_carlo"
  i64 n_samples = 0;
  i64 burn_in = 0;
  int chains = 0;
  u64 seed = 0;
  double ci_low = 0.0;   // 95% t-interval across chains (monte_carlo)
  double ci_high = 1.0;
  double residual = 0.0;  // max |piP - pi| entry (exact)
};

// Two-sided 97.5% Student t quantiles; beyond the table the next bracket is
// used, which errs on the wide side.
inline double t_quantile_975(int df) {
  static const double table[] = {12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306,
                                 2.262,  2.228, 2.201, 2.179, 2.160, 2.145, 2.131, 2.120,
                                 2.110,  2.101, 2.093, 2.086, 2.080, 2.074, 2.069, 2.064,
                                 2.060,  2.056, 2.052, 2.048, 2.045, 2.042};
  if (df < 1) return 12.706;
  if (df <= 30) return table[df - 1];
  if (df <= 40) return 2.021;
  if (df <= 60) return 2.000;
  if (df <= 120) return 1.980;
  return 1.960;
}

/**
 Exact stationary distribution for small totals: enumerates the state space,
 builds the one-step kernel from the pattern enumeration, and solves
 pi*P = pi with the normalization row by dense Gaussian elimination with
 partial pivoting.  States appear in canonical enumeration order.
 */
struct ExactStationary {
  std::vector<Partition> states;
  std::vector<double> probs;
  double residual = 0.0;

  double prob(const Partition& s) const {
    const auto it = std::lower_bound(states.begin(), states.end(), s, std::greater<>{});
    if (it == states.end() || *it != s) return 0.0;
    return probs[static_cast<std::size_t>(it - states.begin())];
  }

  double mass(const std::function<bool(const Partition&)>& pred) const {
    double total = 0.0;
    for (std::size_t i = 0; i < states.size(); ++i)
      if (pred(states[i])) total += probs[i];
    return total;
  }
};

inline ExactStationary exact_stationary(i64 n, double p) {
  if (n < 1) throw std::invalid_argument("exact_stationary: n must be positive");
  if (n > 20) throw guard_error("exact_stationary: n > 20 (state space too large)");
  if (!(p > 0.0) || !(p < 1.0))
    throw std::invalid_argument("exact_stationary: p must lie in (0, 1)");

  ExactStationary out;
  out.states = enumerate_partitions(n);
  const std::size_t m = out.states.size();
  std::map<Partition, std::size_t> index;
  for (std::size_t i = 0; i < m; ++i) index.emplace(out.states[i], i);

  std::vector<std::vector<double>> kernel(m, std::vector<double>(m, 0.0));
  for (std::size_t i = 0; i < m; ++i) {
    for (const auto& [next, prob] : qp_transition_distribution(out.states[i], p))
      kernel[i][index.at(next)] += prob;
  }

  // (P^T - I) pi = 0 with the last equation replaced by sum(pi) = 1.
  std::vector<std::vector<double>> a(m, std::vector<double>(m + 1, 0.0));
  for (std::size_t r = 0; r + 1 < m; ++r) {
    for (std::size_t c = 0; c < m; ++c) a[r][c] = kernel[c][r] - (r == c ? 1.0 : 0.0);
    a[r][m] = 0.0;
  }
  for (std::size_t c = 0; c < m; ++c) a[m - 1][c] = 1.0;
  a[m - 1][m] = 1.0;

  for (std::size_t col = 0; col < m; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < m; ++r)
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    if (std::abs(a[pivot][col]) < 1e-14)
      throw guard_error("exact_stationary: singular balance system");
    std::swap(a[col], a[pivot]);
    for (std::size_t r = col + 1; r < m; ++r) {
      const double f = a[r][col] / a[col][col];
      if (f == 0.0) continue;
      for (std::size_t c = col; c <= m; ++c) a[r][c] -= f * a[col][c];
    }
  }
  out.probs.assign(m, 0.0);
  for (std::size_t col = m; col-- > 0;) {
    double v = a[col][m];
    for (std::size_t c = col + 1; c < m; ++c) v -= a[col][c] * out.probs[c];
    out.probs[col] = v / a[col][col];
  }

  double total = 0.0;
  for (double& v : out.probs) {
    if (v < 0.0 && v > -1e-12) v = 0.0;
    total += v;
  }
  for (double& v : out.probs) v /= total;

  out.residual = 0.0;
  for (std::size_t c = 0; c < m; ++c) {
    double flow = 0.0;
    for (std::size_t r = 0; r < m; ++r) flow += out.probs[r] * kernel[r][c];
    out.residual = std::max(out.residual, std::abs(flow - out.probs[c]));
  }
  if (out.residual > 1e-10)
    throw guard_error("exact_stationary: balance residual too large (kernel bug?)");
  return out;
}

inline Partition start_state(const EstimateConfig& cfg) {
  switch (cfg.start) {
    case StartKind::t0: return t0_config(cfg.n);
    case StartKind::worst_case: {
      // Worst staircase start padded with unit piles up to the exact total.
      const i64 k = theta(cfg.n);
      std::vector<i64> piles =
          k >= 2 ? worst_case_config(k).piles() : std::vector<i64>{1};
      i64 left = cfg.n;
      for (i64 v : piles) left -= v;
      for (i64 i = 0; i < left; ++i) piles.push_back(1);
      return ord(std::move(piles));
    }
    case StartKind::single_pile: return Partition::from_sorted({cfg.n});
    case StartKind::custom: return cfg.custom_start;
  }
  throw std::logic_error("start_state: bad kind");
}

inline std::function<bool(const Partition&)> make_predicate(const PredicateSpec& spec,
                                                            i64 n, double chain_p) {
  switch (spec.kind) {
    case PredicateSpec::Kind::always_true:
      return [](const Partition&) { return true; };
    case PredicateSpec::Kind::rough_triangle: {
      const double target_p = spec.p > 0.0 ? spec.p : chain_p;
      const Partition profile = triangular_target(target_p, n).profile;
      const double radius = spec.eps * std::sqrt(static_cast<double>(n));
      return [profile, radius](const Partition& s) {
        return static_cast<double>(rho(s, profile)) <= radius;
      };
    }
    case PredicateSpec::Kind::reasonable: {
      const double a = spec.alpha, b = spec.beta;
      return [a, b](const Partition& s) { return in_g(s, a, b); };
    }
    case PredicateSpec::Kind::low_defect: {
      const double e = spec.eps;
      return [e](const Partition& s) { return in_v(s, e); };
    }
    case PredicateSpec::Kind::low_defect_capped: {
      const double e = spec.eps;
      return [e](const Partition& s) { return in_v_hat(s, e); };
    }
  }
  throw std::logic_error("make_predicate: bad kind");
}

namespace detail {

struct ChainAccumulator {
  double mean = 0.0;
  i64 samples = 0;
};

template <class SampleFn>
void run_chains(const EstimateConfig& cfg, int threads, SampleFn&& on_sample) {
  // on_sample(chain, sample_index, state) is called on every post-burn-in
  // thinned sample; chains run on independent derived streams.
  const i64 burn_in = cfg.resolved_burn_in();
  const i64 stride = cfg.resolved_stride();
  const Partition start = start_state(cfg);
  parallel_for_index(cfg.chains, threads, [&](i64 chain) {
    BernoulliField field(cfg.p, RngStream::derive(cfg.seed, static_cast<u64>(chain)));
    Partition s = start;
    i64 sample_index = 0;
    for (i64 move = 1; move <= cfg.moves; ++move) {
      s = qp_move(s, field);
      if (move > burn_in && (move - burn_in - 1) % stride == 0)
        on_sample(chain, sample_index++, s);
    }
  });
}

}  // namespace detail

/**
 Ergodic-average estimate of the stationary mass of a set: independent
 chains, burn-in, thinning, indicator average; the 95% interval is a
 t-interval across per-chain means (a single chain yields the trivial
 interval).  Deterministic for a fixed config.
 */
inline StationaryEstimate mc_estimate(const EstimateConfig& cfg,
                                      const std::function<bool(const Partition&)>& pred,
                                      int threads = 0) {
  cfg.validate();
  std::vector<detail::ChainAccumulator> acc(static_cast<std::size_t>(cfg.chains));
  std::vector<i64> hits(static_cast<std::size_t>(cfg.chains), 0);
  detail::run_chains(cfg, threads, [&](i64 chain, i64, const Partition& s) {
    auto& slot = acc[static_cast<std::size_t>(chain)];
    slot.samples += 1;
    if (pred(s)) hits[static_cast<std::size_t>(chain)] += 1;
  });

  StationaryEstimate est;
  est.method = "monte_carlo";
  est.burn_in = cfg.resolved_burn_in();
  est.chains = cfg.chains;
  est.seed = cfg.seed;
  i64 total_hits = 0;
  for (std::size_t c = 0; c < acc.size(); ++c) {
    est.n_samples += acc[c].samples;
    total_hits += hits[c];
    acc[c].mean = acc[c].samples > 0
                      ? static_cast<double>(hits[c]) / static_cast<double>(acc[c].samples)
                      : 0.0;
  }
  est.value = est.n_samples > 0
                  ? static_cast<double>(total_hits) / static_cast<double>(est.n_samples)
                  : 0.0;

  if (cfg.chains >= 2) {
    double mean = 0.0;
    for (const auto& a : acc) mean += a.mean;
    mean /= static_cast<double>(cfg.chains);
    double var = 0.0;
    for (const auto& a : acc) var += (a.mean - mean) * (a.mean - mean);
    var /= static_cast<double>(cfg.chains - 1);
    const double half = t_quantile_975(cfg.chains - 1) *
                        std::sqrt(var / static_cast<double>(cfg.chains));
    est.ci_low = std::max(0.0, est.value - half);
    est.ci_high = std::min(1.0, est.value + half);
  } else {
    est.ci_low = 0.0;
    est.ci_high = 1.0;
  }
  return est;
}

inline StationaryEstimate mc_estimate(const EstimateConfig& cfg, int threads = 0) {
  return mc_estimate(cfg, make_predicate(cfg.predicate, cfg.n, cfg.p), threads);
}

// Stationary mass of the reasonable set; alpha/beta <= 0 pick the proof
// defaults 5/p and 5/p + 3/2.
inline StationaryEstimate reasonableness_mass(EstimateConfig cfg, double alpha = 0.0,
                                              double beta = 0.0, int threads = 0) {
  if (alpha <= 0.0) alpha = reasonable_alpha(cfg.p);
  if (beta <= 0.0) beta = reasonable_beta(cfg.p);
  cfg.predicate = PredicateSpec::reasonable(alpha, beta);
  return mc_estimate(cfg, threads);
}

struct DeviationSummary {
  i64 n = 0;
  double p = 0.0;
  i64 n_samples = 0;
  double mean = 0.0;
  double q05 = 0.0;
  double q25 = 0.0;
  double median = 0.0;
  double q75 = 0.0;
  double q95 = 0.0;
  double max = 0.0;
};

// Distribution of the sup-distance to the triangular profile over stationary
// samples.
inline DeviationSummary deviation_profile(const EstimateConfig& cfg, int threads = 0) {
  cfg.validate();
  const Partition profile = triangular_target(cfg.p, cfg.n).profile;
  const i64 burn_in = cfg.resolved_burn_in();
  const i64 stride = cfg.resolved_stride();
  const i64 per_chain = (cfg.moves - burn_in + stride - 1) / stride;
  std::vector<std::vector<i64>> dists(static_cast<std::size_t>(cfg.chains));
  for (auto& v : dists) v.reserve(static_cast<std::size_t>(per_chain));
  detail::run_chains(cfg, threads, [&](i64 chain, i64, const Partition& s) {
    dists[static_cast<std::size_t>(chain)].push_back(rho(s, profile));
  });

  std::vector<double> all;
  for (const auto& v : dists)
    for (i64 d : v) all.push_back(static_cast<double>(d));
  std::sort(all.begin(), all.end());

  DeviationSummary out;
  out.n = cfg.n;
  out.p = cfg.p;
  out.n_samples = static_cast<i64>(all.size());
  if (all.empty()) return out;
  const auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(all.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, all.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return all[lo] * (1.0 - frac) + all[hi] * frac;
  };
  out.mean = std::accumulate(all.begin(), all.end(), 0.0) / static_cast<double>(all.size());
  out.q05 = quantile(0.05);
  out.q25 = quantile(0.25);
  out.median = quantile(0.50);
  out.q75 = quantile(0.75);
  out.q95 = quantile(0.95);
  out.max = all.back();
  return out;
}

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
};

// Least-squares line with the usual standard error of the slope.
inline SlopeFit fit_line(const std::vector<std::pair<double, double>>& xy) {
  const std::size_t n = xy.size();
  if (n < 2) throw std::invalid_argument("fit_line: need at least two points");
  double sx = 0.0, sy = 0.0;
  for (const auto& [x, y] : xy) {
    sx += x;
    sy += y;
  }
  const double mx = sx / static_cast<double>(n);
  const double my = sy / static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [x, y] : xy) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_line: degenerate abscissae");
  SlopeFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (n > 2) {
    double rss = 0.0;
    for (const auto& [x, y] : xy) {
      const double r = y - (fit.intercept + fit.slope * x);
      rss += r * r;
    }
    fit.slope_se = std::sqrt(rss / static_cast<double>(n - 2) / sxx);
  }
  return fit;
}

}  // namespace bgsol
