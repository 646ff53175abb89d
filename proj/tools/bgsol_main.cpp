// bgsol: simulation and estimation toolkit for deterministic and random
// Bulgarian solitaire.  Subcommands cover deterministic runs, cycle and
// hitting analysis, energy traces, exact and Monte Carlo stationary
// estimation, parameter sweeps, domination trials, and deviation profiles.
//
// Every artifact embeds the fully resolved run spec, so any number in an
// output file can be reproduced from the file alone.  Exit codes: 0 success,
// 2 usage error, 3 runtime guard tripped.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "bgsol/dynamics.hpp"
#include "bgsol/etienne.hpp"
#include "bgsol/io.hpp"
#include "bgsol/partition.hpp"
#include "bgsol/samplers.hpp"
#include "bgsol/stationary.hpp"

namespace {

using namespace bgsol;

void write_output(const std::string& path, const std::string& content) {
  if (path == "-") {
    std::fwrite(content.data(), 1, content.size(), stdout);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot open output path: " + path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw std::invalid_argument("failed writing output path: " + path);
}

std::vector<i64> parse_i64_grid(const std::string& text) {
  std::vector<i64> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find(',', pos);
    if (end == std::string::npos) end = text.size();
    out.push_back(std::stoll(text.substr(pos, end - pos)));
    pos = end + (end < text.size() ? 1 : 0);
  }
  if (out.empty()) throw std::invalid_argument("empty grid");
  return out;
}

std::vector<double> parse_double_grid(const std::string& text) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find(',', pos);
    if (end == std::string::npos) end = text.size();
    out.push_back(std::stod(text.substr(pos, end - pos)));
    pos = end + (end < text.size() ? 1 : 0);
  }
  if (out.empty()) throw std::invalid_argument("empty grid");
  return out;
}

u64 bits_of(double v) {
  u64 out;
  static_assert(sizeof(out) == sizeof(v));
  std::memcpy(&out, &v, sizeof(out));
  return out;
}

// Per-cell seed for sweeps: depends only on the master seed and the cell
// parameters, so duplicate cells produce identical rows.
u64 cell_seed(u64 master, i64 n, double p, double eps) {
  u64 state = master;
  splitmix64(state);
  state ^= static_cast<u64>(n);
  splitmix64(state);
  state ^= bits_of(p);
  splitmix64(state);
  state ^= bits_of(eps);
  return splitmix64(state);
}

std::string energy_trace_csv_header() {
  return "move_index,E2x,E_tilde,h_minus,h_plus,V_minus,V_plus\n";
}

std::string energy_trace_csv_rows(const std::vector<EnergyTracePoint>& trace) {
  std::string rows;
  for (const auto& pt : trace) {
    rows += csv_row({std::to_string(pt.move_index), std::to_string(pt.stats.e2_total()),
                     fmt_double(pt.stats.e_tilde()), std::to_string(pt.stats.h_minus),
                     std::to_string(pt.stats.h_plus), std::to_string(pt.stats.v_minus),
                     std::to_string(pt.stats.v_plus)});
  }
  return rows;
}

void append_predicate_fields(JsonWriter& w, const PredicateSpec& pred, double chain_p) {
  w.field("kind", pred.name());
  switch (pred.kind) {
    case PredicateSpec::Kind::rough_triangle:
      w.field("eps", pred.eps);
      w.field("p", pred.p > 0.0 ? pred.p : chain_p);
      break;
    case PredicateSpec::Kind::reasonable:
      w.field("alpha", pred.alpha);
      w.field("beta", pred.beta);
      break;
    case PredicateSpec::Kind::low_defect:
    case PredicateSpec::Kind::low_defect_capped:
      w.field("eps", pred.eps);
      break;
    case PredicateSpec::Kind::always_true:
      break;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bulgarian solitaire simulation and stationary-measure toolkit"};
  app.require_subcommand(1);
  app.set_config("--config", "", "plain key=value config file (flags override it)");

  // ---- det-run ----------------------------------------------------------
  auto* det = app.add_subcommand("det-run", "iterate the deterministic move");
  std::string det_start;
  i64 det_moves = 0;
  std::string det_output = "-";
  std::string det_format = "csv";
  std::string det_dump_grid, det_dump_svg;
  det->add_option("--start", det_start, "start configuration, e.g. 5,3,2,1")->required();
  det->add_option("--moves", det_moves, "number of moves")->required()
      ->check(CLI::NonNegativeNumber);
  det->add_option("-o,--output", det_output, "output path or - for stdout");
  det->add_option("--format", det_format)->check(CLI::IsMember({"csv", "json"}));
  det->add_option("--dump-grid", det_dump_grid, "write final diagram as a text grid");
  det->add_option("--dump-svg", det_dump_svg, "write final diagram as svg");

  // ---- cycle ------------------------------------------------------------
  auto* cyc = app.add_subcommand("cycle", "transient and cycle of the deterministic orbit");
  std::string cyc_start;
  i64 cyc_budget = 0;
  std::string cyc_output = "-";
  cyc->add_option("--start", cyc_start)->required();
  cyc->add_option("--max-moves", cyc_budget, "search budget, 0 = automatic");
  cyc->add_option("-o,--output", cyc_output);

  // ---- hit --------------------------------------------------------------
  auto* hit = app.add_subcommand("hit", "first entry into the rough-triangle ball");
  std::string hit_start;
  double hit_eps = 0.25;
  i64 hit_budget = 0;
  std::string hit_output = "-";
  std::string hit_trace_csv;
  hit->add_option("--start", hit_start)->required();
  hit->add_option("--eps", hit_eps, "ball radius in units of sqrt(N)");
  hit->add_option("--budget", hit_budget, "move budget, 0 = 100*sqrt(N)");
  hit->add_option("-o,--output", hit_output);
  hit->add_option("--trace-csv", hit_trace_csv, "also write the energy trace as csv");

  // ---- energy -----------------------------------------------------------
  auto* eng = app.add_subcommand("energy", "block-wise energy decay trace");
  std::string eng_start;
  i64 eng_stages = 20;
  double eng_block_c = 1.0;
  std::string eng_output = "-";
  eng->add_option("--start", eng_start)->required();
  eng->add_option("--stages", eng_stages)->check(CLI::NonNegativeNumber);
  eng->add_option("--block-c", eng_block_c, "block length constant");
  eng->add_option("-o,--output", eng_output);

  // ---- estimate ---------------------------------------------------------
  auto* est = app.add_subcommand("estimate", "Monte Carlo stationary mass of a set");
  i64 est_n = 0;
  double est_p = 0.5;
  std::string est_pred = "rough-triangle";
  double est_eps = 0.25, est_pred_p = 0.0, est_alpha = 0.0, est_beta = 0.0;
  int est_chains = 8;
  i64 est_moves = 0, est_burn_in = -1, est_stride = -1;
  u64 est_seed = 0;
  std::string est_start = "t0", est_start_state;
  std::string est_output = "-";
  int est_threads = 0;
  est->add_option("--n", est_n, "total cards")->required();
  est->add_option("--p", est_p, "per-pile removal probability");
  est->add_option("--predicate", est_pred)
      ->check(CLI::IsMember({"always", "rough-triangle", "g", "v", "vhat"}));
  est->add_option("--eps", est_eps);
  est->add_option("--pred-p", est_pred_p, "target profile p, 0 = chain p");
  est->add_option("--alpha", est_alpha, "0 = default 5/p");
  est->add_option("--beta", est_beta, "0 = default 5/p + 3/2");
  est->add_option("--chains", est_chains);
  est->add_option("--moves", est_moves, "moves per chain, 0 = automatic");
  est->add_option("--burn-in", est_burn_in, "-1 = default 20*n");
  est->add_option("--stride", est_stride, "-1 = default ceil(sqrt(n))");
  est->add_option("--seed", est_seed)->envname("BGSOL_SEED");
  est->add_option("--start", est_start)
      ->check(CLI::IsMember({"t0", "worst", "single", "custom"}));
  est->add_option("--start-state", est_start_state, "custom start configuration");
  est->add_option("-o,--output", est_output);
  est->add_option("--threads", est_threads, "worker cap, 0 = all cores");

  // ---- exact ------------------------------------------------------------
  auto* exa = app.add_subcommand("exact", "exact stationary distribution (small n)");
  i64 exa_n = 0;
  double exa_p = 0.5;
  std::string exa_output = "-";
  exa->add_option("--n", exa_n)->required();
  exa->add_option("--p", exa_p);
  exa->add_option("-o,--output", exa_output);

  // ---- sweep ------------------------------------------------------------
  auto* swp = app.add_subcommand("sweep", "estimate over a grid of (n, p, eps)");
  std::string swp_n_grid, swp_p_grid = "0.5", swp_eps_grid = "0.25";
  int swp_chains = 8;
  i64 swp_moves = 0, swp_burn_in = -1, swp_stride = -1;
  u64 swp_seed = 0;
  std::string swp_output = "-";
  std::string swp_format = "csv";
  int swp_threads = 0;
  swp->add_option("--n-grid", swp_n_grid, "comma-separated totals")->required();
  swp->add_option("--p-grid", swp_p_grid, "comma-separated probabilities");
  swp->add_option("--eps-grid", swp_eps_grid, "comma-separated radii");
  swp->add_option("--chains", swp_chains);
  swp->add_option("--moves", swp_moves, "moves per chain, 0 = automatic");
  swp->add_option("--burn-in", swp_burn_in);
  swp->add_option("--stride", swp_stride);
  swp->add_option("--seed", swp_seed)->envname("BGSOL_SEED");
  swp->add_option("-o,--output", swp_output);
  swp->add_option("--format", swp_format)->check(CLI::IsMember({"csv", "json"}));
  swp->add_option("--threads", swp_threads);

  // ---- dominate ---------------------------------------------------------
  auto* dom = app.add_subcommand("dominate", "random chain vs deterministic immigration");
  i64 dom_n = 0;
  std::string dom_start;
  double dom_p = 0.5, dom_delta0 = 0.1;
  i64 dom_horizon = 0, dom_trials = 200;
  u64 dom_seed = 0;
  std::string dom_output = "-";
  int dom_threads = 0;
  dom->add_option("--n", dom_n, "start from the near-triangular configuration of n cards");
  dom->add_option("--start", dom_start, "explicit start configuration");
  dom->add_option("--p", dom_p);
  dom->add_option("--delta0", dom_delta0);
  dom->add_option("--horizon", dom_horizon, "0 = ceil(sqrt(n))");
  dom->add_option("--trials", dom_trials);
  dom->add_option("--seed", dom_seed)->envname("BGSOL_SEED");
  dom->add_option("-o,--output", dom_output);
  dom->add_option("--threads", dom_threads);

  // ---- deviation --------------------------------------------------------
  auto* dev = app.add_subcommand("deviation", "sup-distance profile over stationary samples");
  std::string dev_n_grid;
  double dev_p = 0.5;
  int dev_chains = 4;
  i64 dev_moves = 0, dev_burn_in = -1, dev_stride = -1;
  u64 dev_seed = 0;
  std::string dev_output = "-";
  std::string dev_format = "csv";
  int dev_threads = 0;
  dev->add_option("--n-grid", dev_n_grid)->required();
  dev->add_option("--p", dev_p);
  dev->add_option("--chains", dev_chains);
  dev->add_option("--moves", dev_moves, "moves per chain, 0 = automatic");
  dev->add_option("--burn-in", dev_burn_in);
  dev->add_option("--stride", dev_stride);
  dev->add_option("--seed", dev_seed)->envname("BGSOL_SEED");
  dev->add_option("-o,--output", dev_output);
  dev->add_option("--format", dev_format)->check(CLI::IsMember({"csv", "json"}));
  dev->add_option("--threads", dev_threads);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }

  const auto auto_moves = [](i64 n, i64 burn_in, i64 stride) {
    const i64 b = burn_in >= 0 ? burn_in : 20 * n;
    const i64 s = stride >= 1
                      ? stride
                      : static_cast<i64>(std::ceil(std::sqrt(static_cast<double>(n))));
    return b + 1000 * s;
  };

  const auto make_cfg = [&](i64 n, double p, const PredicateSpec& pred, int chains, i64 moves,
                            i64 burn_in, i64 stride, u64 seed) {
    EstimateConfig cfg;
    cfg.n = n;
    cfg.p = p;
    cfg.predicate = pred;
    cfg.chains = chains;
    cfg.moves = moves > 0 ? moves : auto_moves(n, burn_in, stride);
    cfg.burn_in = burn_in;
    cfg.stride = stride;
    cfg.seed = seed;
    return cfg;
  };

  try {
    if (*det) {
      const Partition s0 = parse_partition(det_start);
      std::string content;
      std::vector<std::string> states;
      Partition s = s0;
      for (i64 mv = 1; mv <= det_moves; ++mv) {
        s = q1_move(s);
        states.push_back(render_partition(s));
      }
      if (det_format == "csv") {
        content += "# bgsol det-run start=" + det_start + " moves=" +
                   std::to_string(det_moves) + "\n";
        content += "move,partition\n";
        for (std::size_t i = 0; i < states.size(); ++i)
          content += csv_row({std::to_string(i + 1), states[i]});
      } else {
        JsonWriter w;
        w.begin_object();
        w.field("tool", "bgsol");
        w.field("subcommand", "det-run");
        w.key("spec").begin_object();
        w.field("start", render_partition(s0));
        w.field("moves", det_moves);
        w.end_object();
        w.key("result").begin_object();
        w.key("states").begin_array();
        for (const auto& st : states) w.value(st);
        w.end_array();
        w.end_object();
        w.end_object();
        content = w.str() + "\n";
      }
      write_output(det_output, content);
      if (!det_dump_grid.empty())
        write_output(det_dump_grid, to_text_grid(EtienneDiagram::from_partition(s)));
      if (!det_dump_svg.empty())
        write_output(det_dump_svg, to_svg(EtienneDiagram::from_partition(s)));
      return 0;
    }

    if (*cyc) {
      const Partition s0 = parse_partition(cyc_start);
      const CycleReport r = detect_cycle(s0, cyc_budget);
      JsonWriter w;
      w.begin_object();
      w.field("tool", "bgsol");
      w.field("subcommand", "cycle");
      w.key("spec").begin_object();
      w.field("start", render_partition(s0));
      w.field("max_moves", cyc_budget);
      w.end_object();
      w.key("result").begin_object();
      w.field("transient_length", r.transient_length);
      w.field("cycle_length", r.cycle_length);
      w.field("reached_stable", r.reached_stable);
      w.key("cycle_states").begin_array();
      for (const auto& st : r.cycle_states) w.value(render_partition(st));
      w.end_array();
      w.end_object();
      w.end_object();
      write_output(cyc_output, w.str() + "\n");
      return 0;
    }

    if (*hit) {
      const Partition s0 = parse_partition(hit_start);
      const i64 n = s0.total();
      const i64 budget =
          hit_budget > 0
              ? hit_budget
              : 100 * static_cast<i64>(std::ceil(std::sqrt(static_cast<double>(n))));
      const HittingReport r = hitting_time(s0, hit_eps, budget);
      JsonWriter w;
      w.begin_object();
      w.field("tool", "bgsol");
      w.field("subcommand", "hit");
      w.key("spec").begin_object();
      w.field("start", render_partition(s0));
      w.field("eps", hit_eps);
      w.field("budget", budget);
      w.end_object();
      w.key("result").begin_object();
      w.key("target").begin_object();
      w.field("predicate", "rough-triangle");
      w.field("eps", hit_eps);
      w.field("p", 1.0);
      w.end_object();
      if (r.hit_time) w.field("hit_time", *r.hit_time);
      else w.field_null("hit_time");
      if (r.settle_time) w.field("settle_time", *r.settle_time);
      else w.field_null("settle_time");
      w.field("stayed", r.stayed);
      w.key("energy_trace").begin_array();
      for (const auto& pt : r.energy_trace) {
        w.begin_array();
        w.value(pt.move_index);
        w.value(pt.stats.e_tilde());
        w.end_array();
      }
      w.end_array();
      w.end_object();
      w.end_object();
      write_output(hit_output, w.str() + "\n");
      if (!hit_trace_csv.empty()) {
        std::string csv = "# bgsol hit start=" + hit_start + " eps=" + fmt_double(hit_eps) +
                          " budget=" + std::to_string(budget) + "\n";
        csv += energy_trace_csv_header();
        csv += energy_trace_csv_rows(r.energy_trace);
        write_output(hit_trace_csv, csv);
      }
      return 0;
    }

    if (*eng) {
      const Partition s0 = parse_partition(eng_start);
      const auto trace = energy_decay_experiment(s0, eng_stages, eng_block_c);
      std::string content = "# bgsol energy start=" + eng_start + " stages=" +
                            std::to_string(eng_stages) + " block_c=" +
                            fmt_double(eng_block_c) + "\n";
      content += energy_trace_csv_header();
      content += energy_trace_csv_rows(trace);
      write_output(eng_output, content);
      return 0;
    }

    if (*est) {
      PredicateSpec pred;
      if (est_pred == "always") pred = PredicateSpec::always_true();
      else if (est_pred == "rough-triangle")
        pred = PredicateSpec::rough_triangle(est_eps, est_pred_p);
      else if (est_pred == "g")
        pred = PredicateSpec::reasonable(est_alpha > 0 ? est_alpha : reasonable_alpha(est_p),
                                         est_beta > 0 ? est_beta : reasonable_beta(est_p));
      else if (est_pred == "v") pred = PredicateSpec::low_defect(est_eps);
      else pred = PredicateSpec::low_defect_capped(est_eps);

      EstimateConfig cfg = make_cfg(est_n, est_p, pred, est_chains, est_moves, est_burn_in,
                                    est_stride, est_seed);
      if (est_start == "worst") cfg.start = StartKind::worst_case;
      else if (est_start == "single") cfg.start = StartKind::single_pile;
      else if (est_start == "custom") {
        cfg.start = StartKind::custom;
        cfg.custom_start = parse_partition(est_start_state);
      }
      const StationaryEstimate result = mc_estimate(cfg, est_threads);

      JsonWriter w;
      w.begin_object();
      w.field("tool", "bgsol");
      w.field("subcommand", "estimate");
      w.key("spec").begin_object();
      w.field("n", cfg.n);
      w.field("p", cfg.p);
      w.key("predicate").begin_object();
      append_predicate_fields(w, pred, cfg.p);
      w.end_object();
      w.field("chains", cfg.chains);
      w.field("moves", cfg.moves);
      w.field("burn_in", cfg.resolved_burn_in());
      w.field("stride", cfg.resolved_stride());
      w.field("seed", cfg.seed);
      w.field("start", start_kind_name(cfg.start));
      if (cfg.start == StartKind::custom)
        w.field("start_state", render_partition(cfg.custom_start));
      w.end_object();
      w.key("result").begin_object();
      w.field("method", result.method);
      w.field("value", result.value);
      w.field("ci_low", result.ci_low);
      w.field("ci_high", result.ci_high);
      w.field("n_samples", result.n_samples);
      w.end_object();
      w.end_object();
      write_output(est_output, w.str() + "\n");
      return 0;
    }

    if (*exa) {
      const ExactStationary ex = exact_stationary(exa_n, exa_p);
      std::string content = "# bgsol exact n=" + std::to_string(exa_n) + " p=" +
                            fmt_double(exa_p) + " residual=" + fmt_double(ex.residual) + "\n";
      content += "partition,probability\n";
      for (std::size_t i = 0; i < ex.states.size(); ++i)
        content += csv_row({render_partition(ex.states[i]), fmt_double(ex.probs[i])});
      write_output(exa_output, content);
      return 0;
    }

    if (*swp) {
      const std::vector<i64> ns = parse_i64_grid(swp_n_grid);
      const std::vector<double> ps = parse_double_grid(swp_p_grid);
      const std::vector<double> epss = parse_double_grid(swp_eps_grid);

      struct Row {
        i64 n = 0;
        double p = 0.0, eps = 0.0;
        u64 seed = 0;
        EstimateConfig cfg;
        std::optional<StationaryEstimate> est;
        std::string error;
      };
      std::vector<Row> rows;
      for (i64 n : ns)
        for (double p : ps)
          for (double eps : epss) {
            Row row;
            row.n = n;
            row.p = p;
            row.eps = eps;
            row.seed = cell_seed(swp_seed, n, p, eps);
            try {
              row.cfg = make_cfg(n, p, PredicateSpec::rough_triangle(eps), swp_chains,
                                 swp_moves, swp_burn_in, swp_stride, row.seed);
              row.est = mc_estimate(row.cfg, swp_threads);
            } catch (const std::exception& e) {
              row.error = e.what();
            }
            rows.push_back(std::move(row));
          }

      std::string content;
      if (swp_format == "csv") {
        content += "# bgsol sweep seed=" + std::to_string(swp_seed) + " chains=" +
                   std::to_string(swp_chains) + " moves=" + std::to_string(swp_moves) +
                   " burn_in=" + std::to_string(swp_burn_in) + " stride=" +
                   std::to_string(swp_stride) + "\n";
        content +=
            "n,p,eps,value,ci_low,ci_high,n_samples,chains,moves,burn_in,stride,cell_seed,status\n";
        for (const auto& row : rows) {
          if (row.est) {
            content += csv_row(
                {std::to_string(row.n), fmt_double(row.p), fmt_double(row.eps),
                 fmt_double(row.est->value), fmt_double(row.est->ci_low),
                 fmt_double(row.est->ci_high), std::to_string(row.est->n_samples),
                 std::to_string(row.cfg.chains), std::to_string(row.cfg.moves),
                 std::to_string(row.cfg.resolved_burn_in()),
                 std::to_string(row.cfg.resolved_stride()), std::to_string(row.seed), "ok"});
          } else {
            content += csv_row({std::to_string(row.n), fmt_double(row.p), fmt_double(row.eps),
                                "", "", "", "", "", "", "", "", std::to_string(row.seed),
                                "error: " + row.error});
          }
        }
      } else {
        JsonWriter w;
        w.begin_object();
        w.field("tool", "bgsol");
        w.field("subcommand", "sweep");
        w.key("spec").begin_object();
        w.field("seed", swp_seed);
        w.field("chains", swp_chains);
        w.field("moves", swp_moves);
        w.field("burn_in", swp_burn_in);
        w.field("stride", swp_stride);
        w.end_object();
        w.key("rows").begin_array();
        for (const auto& row : rows) {
          w.begin_object();
          w.field("n", row.n);
          w.field("p", row.p);
          w.field("eps", row.eps);
          w.field("cell_seed", row.seed);
          if (row.est) {
            w.field("value", row.est->value);
            w.field("ci_low", row.est->ci_low);
            w.field("ci_high", row.est->ci_high);
            w.field("n_samples", row.est->n_samples);
            w.field("moves", row.cfg.moves);
            w.field("burn_in", row.cfg.resolved_burn_in());
            w.field("stride", row.cfg.resolved_stride());
            w.field("status", "ok");
          } else {
            w.field("status", "error: " + row.error);
          }
          w.end_object();
        }
        w.end_array();
        w.end_object();
        content = w.str() + "\n";
      }
      write_output(swp_output, content);
      return 0;
    }

    if (*dom) {
      Partition s0;
      if (!dom_start.empty()) s0 = parse_partition(dom_start);
      else if (dom_n >= 1) s0 = t0_config(dom_n);
      else throw std::invalid_argument("dominate: provide --n or --start");
      const i64 n = s0.total();
      const i64 horizon =
          dom_horizon > 0 ? dom_horizon
                          : static_cast<i64>(std::ceil(std::sqrt(static_cast<double>(n))));
      const double fraction = domination_experiment(s0, dom_p, dom_delta0, horizon, dom_trials,
                                                    dom_seed, dom_threads);
      JsonWriter w;
      w.begin_object();
      w.field("tool", "bgsol");
      w.field("subcommand", "dominate");
      w.key("spec").begin_object();
      w.field("start", render_partition(s0));
      w.field("n", n);
      w.field("p", dom_p);
      w.field("delta0", dom_delta0);
      w.field("horizon", horizon);
      w.field("trials", dom_trials);
      w.field("seed", dom_seed);
      w.field("kappa", immigration_kappa(n, dom_delta0));
      w.end_object();
      w.key("result").begin_object();
      w.field("fraction", fraction);
      w.end_object();
      w.end_object();
      write_output(dom_output, w.str() + "\n");
      return 0;
    }

    if (*dev) {
      const std::vector<i64> ns = parse_i64_grid(dev_n_grid);
      std::vector<DeviationSummary> rows;
      for (i64 n : ns) {
        EstimateConfig cfg = make_cfg(n, dev_p, PredicateSpec::always_true(), dev_chains,
                                      dev_moves, dev_burn_in, dev_stride, dev_seed);
        rows.push_back(deviation_profile(cfg, dev_threads));
      }
      std::optional<SlopeFit> fit;
      if (rows.size() >= 2) {
        std::vector<std::pair<double, double>> logs;
        for (const auto& r : rows)
          logs.emplace_back(std::log(static_cast<double>(r.n)),
                            std::log(std::max(r.median, 0.5)));
        fit = fit_line(logs);
      }

      std::string content;
      if (dev_format == "csv") {
        content += "# bgsol deviation p=" + fmt_double(dev_p) + " chains=" +
                   std::to_string(dev_chains) + " seed=" + std::to_string(dev_seed) + "\n";
        if (fit)
          content += "# loglog_slope=" + fmt_double(fit->slope) + " slope_se=" +
                     fmt_double(fit->slope_se) + "\n";
        content += "n,p,n_samples,mean,q05,q25,median,q75,q95,max\n";
        for (const auto& r : rows)
          content += csv_row({std::to_string(r.n), fmt_double(r.p), std::to_string(r.n_samples),
                              fmt_double(r.mean), fmt_double(r.q05), fmt_double(r.q25),
                              fmt_double(r.median), fmt_double(r.q75), fmt_double(r.q95),
                              fmt_double(r.max)});
      } else {
        JsonWriter w;
        w.begin_object();
        w.field("tool", "bgsol");
        w.field("subcommand", "deviation");
        w.key("spec").begin_object();
        w.field("p", dev_p);
        w.field("chains", dev_chains);
        w.field("moves", dev_moves);
        w.field("burn_in", dev_burn_in);
        w.field("stride", dev_stride);
        w.field("seed", dev_seed);
        w.end_object();
        w.key("grid").begin_array();
        for (const auto& r : rows) {
          w.begin_object();
          w.field("n", r.n);
          w.field("p", r.p);
          w.field("n_samples", r.n_samples);
          w.field("mean", r.mean);
          w.field("q05", r.q05);
          w.field("q25", r.q25);
          w.field("median", r.median);
          w.field("q75", r.q75);
          w.field("q95", r.q95);
          w.field("max", r.max);
          w.end_object();
        }
        w.end_array();
        if (fit) {
          w.key("loglog_fit").begin_object();
          w.field("slope", fit->slope);
          w.field("slope_se", fit->slope_se);
          w.field("intercept", fit->intercept);
          w.end_object();
        }
        w.end_object();
        content = w.str() + "\n";
      }
      write_output(dev_output, content);
      return 0;
    }
  } catch (const guard_error& e) {
    std::cerr << "guard: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
