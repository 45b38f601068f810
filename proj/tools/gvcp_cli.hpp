#pragma once

// Command-line front end. Exit codes:
//   0 success, 1 verify hit rate below threshold, 2 usage / input error,
//   3 instance too large for the exact solver, 4 internal job failure,
//   5 bench outputs diverged across worker counts.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gvcp/bench.hpp"
#include "gvcp/exact_solver.hpp"
#include "gvcp/ga_mr.hpp"
#include "gvcp/instance.hpp"
#include "gvcp/report.hpp"

namespace gvcp::cli {

enum ExitCode : int {
  kOk = 0,
  kVerifyFailed = 1,
  kUsage = 2,
  kTooLarge = 3,
  kInternal = 4,
  kDivergence = 5,
};

namespace detail {

struct GaFlags {
  GaConfig cfg;
  std::optional<double> frozen_rate;
  std::optional<double> normal_rate;
  std::string cut_range = "inclusive";

  GaConfig resolve() const {
    GaConfig out = cfg;
    out.mutation_rate_frozen = frozen_rate;
    out.mutation_rate_normal = normal_rate;
    if (cut_range == "inclusive")
      out.cut_range = CutRange::Inclusive;
    else if (cut_range == "interior")
      out.cut_range = CutRange::Interior;
    else
      throw Error(ErrorCode::InvalidParameter, "--cut-range must be inclusive or interior");
    return out;
  }
};

inline void add_ga_flags(CLI::App* app, GaFlags& f, bool with_seed) {
  app->add_option("--pop", f.cfg.population_size, "population size Z")->capture_default_str();
  app->add_option("--elite", f.cfg.elite_count, "elite count E")->capture_default_str();
  app->add_option("--tsize", f.cfg.tournament_size, "average tournament size")->capture_default_str();
  app->add_option("--pcross", f.cfg.p_cross, "crossover probability")->capture_default_str();
  app->add_option("--gens", f.cfg.max_generations, "maximum generations")->capture_default_str();
  app->add_option("--stall", f.cfg.stall_generations, "stop after this many generations without improvement (0 = off)")
      ->capture_default_str();
  if (with_seed) app->add_option("--seed", f.cfg.master_seed, "master seed")->capture_default_str();
  app->add_option("--workers", f.cfg.worker_count, "reduce partitions and worker threads")->capture_default_str();
  app->add_option("--pmut-frozen", f.frozen_rate, "mutation rate of frozen genes (default 1.0/n)");
  app->add_option("--pmut-normal", f.normal_rate, "mutation rate of other genes (default 0.4/n)");
  app->add_option("--cut-range", f.cut_range, "crossover cut range: inclusive [0,n] or interior [1,n-1]")
      ->capture_default_str();
}

inline std::vector<std::size_t> one_based(const VertexSubset& s) {
  std::vector<std::size_t> out;
  for (auto v : s.members()) out.push_back(v + 1);
  return out;
}

inline std::string join(const std::vector<std::size_t>& xs, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += sep;
    out += std::to_string(xs[i]);
  }
  return out;
}

inline std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');)
    if (!item.empty()) out.push_back(item);
  return out;
}

inline double elapsed_ms(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

// --- gen -------------------------------------------------------------------

struct GenFlags {
  std::size_t n = 0;
  double p = 0.5;
  std::uint64_t cost_max = 100;
  std::uint64_t seed = 1;
  std::string out;
};

inline int cmd_gen(const GenFlags& f, std::ostream& out) {
  const GvcpInstance inst = generate_instance(f.n, f.p, f.cost_max, f.seed);
  write_text_file(f.out, write_instance(inst));
  out << "n=" << inst.n() << " m=" << inst.m() << '\n';
  return kOk;
}

// --- solve -----------------------------------------------------------------

struct SolveFlags {
  std::string algo = "ga";
  std::string in;
  std::string out;
  std::string format = "json";
  std::size_t max_exact_n = 26;
  GaFlags ga;
};

inline std::string render(const RunReport& report, const std::string& format) {
  if (format == "csv")
    return "# best_cost " + gvcp::detail::format_cost(report.best_cost) + "\n# vertices " +
           join(report.best_vertices, " ") + "\n" + history_csv(report.history);
  return to_json(report).dump(2) + "\n";
}

inline int cmd_solve(const SolveFlags& f, std::ostream& out) {
  if (f.format != "json" && f.format != "csv") throw Error(ErrorCode::InvalidParameter, "--format must be json or csv");
  const std::string text = read_text_file(f.in);
  const GvcpInstance inst = parse_instance(text);

  RunReport report;
  report.instance_path = f.in;
  report.instance_hash = content_hash(text);
  report.algorithm = f.algo;
  const auto t0 = std::chrono::steady_clock::now();
  if (f.algo == "exact") {
    const ExactOptions opts{f.max_exact_n, f.ga.cfg.worker_count};
    const ExactResult r = solve_exact(inst, opts);
    report.wall_time_ms = elapsed_ms(t0);
    report.config = {{"max_vertices", opts.max_vertices}, {"workers", opts.workers}};
    report.best_cost = r.best_cost;
    report.best_vertices = one_based(r.best_subset);
    report.best_bitstring = encode(r.best_subset).bits();
    report.workers = opts.workers;
  } else if (f.algo == "ga") {
    const GaConfig cfg = f.ga.resolve();
    const EvolveResult r = evolve(inst, cfg);
    report.wall_time_ms = elapsed_ms(t0);
    report.config = config_to_json(cfg, inst.n());
    report.best_cost = r.best_cost;
    report.best_vertices = one_based(decode(r.best_chromosome));
    report.best_bitstring = r.best_chromosome.bits();
    report.generations_run = r.generations_run;
    report.history = r.history;
    report.workers = cfg.worker_count;
    report.master_seed = cfg.master_seed;
  } else {
    throw Error(ErrorCode::InvalidParameter, "--algo must be ga or exact");
  }

  const std::string rendered = render(report, f.format);
  out << rendered;
  if (!f.out.empty()) write_text_file(f.out, rendered);
  return kOk;
}

// --- verify ----------------------------------------------------------------

struct VerifyFlags {
  std::size_t count = 100;
  std::size_t n_min = 6;
  std::size_t n_max = 14;
  std::uint64_t seed = 7;
  std::string p_list = "0.3,0.6";
  std::uint64_t cost_max = 100;
  double min_hit_rate = 0.95;
  GaFlags ga;
};

struct VerifyRow {
  std::size_t index;
  std::size_t n;
  std::size_t m;
  double p;
  double optimum;
  double ga_best;
};

inline std::vector<VerifyRow> run_verify(const VerifyFlags& f) {
  if (f.count < 1) throw Error(ErrorCode::InvalidParameter, "--count must be >= 1");
  if (f.n_min < 1 || f.n_min > f.n_max) throw Error(ErrorCode::InvalidParameter, "need 1 <= --n-min <= --n-max");
  std::vector<double> probs;
  for (const auto& tok : split_list(f.p_list)) probs.push_back(std::stod(tok));
  if (probs.empty()) throw Error(ErrorCode::InvalidParameter, "--p-list is empty");

  GaConfig cfg = f.ga.resolve();
  RngStream pick = derive_rng_stream(f.seed, 0, StreamRole::Init, 0x766572);
  std::vector<VerifyRow> rows;
  for (std::size_t i = 0; i < f.count; ++i) {
    const std::size_t n = f.n_min + static_cast<std::size_t>(uniform_below(pick, f.n_max - f.n_min + 1));
    const double p = probs[i % probs.size()];
    const GvcpInstance inst = generate_instance(n, p, f.cost_max, gvcp::detail::mix64(f.seed) + i);
    cfg.master_seed = f.seed * 1000003 + i;
    const ExactResult exact = solve_exact(inst);
    const EvolveResult ga = evolve(inst, cfg);
    rows.push_back({i, n, inst.m(), p, exact.best_cost, ga.best_cost});
  }
  return rows;
}

inline bool is_hit(const VerifyRow& r) {
  return std::abs(r.ga_best - r.optimum) <= 1e-9 * std::max(1.0, std::abs(r.optimum));
}

inline int cmd_verify(const VerifyFlags& f, std::ostream& out, std::ostream& err) {
  const auto rows = run_verify(f);
  std::size_t hits = 0;
  bool negative_gap = false;
  out << "instance\tn\tm\tp\toptimum\tga_best\tgap\thit\n";
  for (const auto& r : rows) {
    const double gap = r.ga_best - r.optimum;
    const bool hit = is_hit(r);
    if (!hit && gap < 0) negative_gap = true;
    hits += hit;
    out << r.index << '\t' << r.n << '\t' << r.m << '\t' << r.p << '\t' << r.optimum << '\t' << r.ga_best << '\t'
        << gap << '\t' << (hit ? 1 : 0) << '\n';
  }
  const double rate = static_cast<double>(hits) / static_cast<double>(rows.size());
  out << "hit_rate\t" << rate << '\t' << hits << '/' << rows.size() << '\n';
  if (negative_gap) {
    err << "error: GA reported a cost below the exact optimum\n";
    return kInternal;
  }
  return rate >= f.min_hit_rate ? kOk : kVerifyFailed;
}

// --- bench -----------------------------------------------------------------

struct BenchFlags {
  std::string in;
  std::size_t n = 2000;
  double p = 0.01;
  std::uint64_t cost_max = 100;
  std::string workers_list = "1,2,4,8";
  std::string trace;
  std::optional<std::size_t> inject_divergence;
  GaFlags ga;
};

inline int cmd_bench(const BenchFlags& f, std::ostream& out, std::ostream& err) {
  const GvcpInstance inst =
      f.in.empty() ? generate_instance(f.n, f.p, f.cost_max, f.ga.cfg.master_seed) : parse_instance(read_text_file(f.in));
  std::vector<std::size_t> workers;
  for (const auto& tok : split_list(f.workers_list)) workers.push_back(std::stoul(tok));

  std::unique_ptr<std::ofstream> trace;
  if (!f.trace.empty()) {
    trace = std::make_unique<std::ofstream>(f.trace);
    if (!*trace) throw Error(ErrorCode::InvalidParameter, "cannot write '" + f.trace + "'");
    *trace << "# phase\trecords_in\trecords_out\tpartition_sizes\twall_us\n";
  }
  const BenchOutcome outcome = run_bench(inst, f.ga.resolve(), workers, trace.get(), f.inject_divergence);
  if (!outcome.identical) {
    err << "error: output divergence across workers: " << outcome.divergence << '\n';
    return kDivergence;
  }
  const double base = outcome.rows.front().per_generation_ms;
  out << "workers\ttotal_ms\tper_generation_ms\tratio_vs_first\tbest_cost\n";
  out << std::fixed << std::setprecision(3);
  for (const auto& row : outcome.rows)
    out << row.workers << '\t' << row.total_ms << '\t' << row.per_generation_ms << '\t'
        << (base > 0 ? row.per_generation_ms / base : 0.0) << '\t' << row.result.best_cost << '\n';
  return kOk;
}

}  // namespace detail

/// Parses argv and dispatches to a subcommand; returns the process exit code.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Generalized vertex cover: instance tooling, exact and genetic solvers"};
  app.require_subcommand(1);

  detail::GenFlags gen;
  auto* gen_cmd = app.add_subcommand("gen", "generate a random instance");
  gen_cmd->add_option("--n", gen.n, "vertex count")->required();
  gen_cmd->add_option("--p", gen.p, "edge probability")->capture_default_str();
  gen_cmd->add_option("--cost-max", gen.cost_max, "largest cost value")->capture_default_str();
  gen_cmd->add_option("--seed", gen.seed, "generator seed")->capture_default_str();
  gen_cmd->add_option("--out", gen.out, "output path")->required();

  detail::SolveFlags solve;
  auto* solve_cmd = app.add_subcommand("solve", "solve an instance");
  solve_cmd->add_option("--algo", solve.algo, "ga or exact")->capture_default_str();
  solve_cmd->add_option("--in", solve.in, "instance file")->required();
  solve_cmd->add_option("--out", solve.out, "write the report here");
  solve_cmd->add_option("--format", solve.format, "json or csv")->capture_default_str();
  solve_cmd->add_option("--max-exact-n", solve.max_exact_n, "vertex cap for the exact solver")->capture_default_str();
  detail::add_ga_flags(solve_cmd, solve.ga, true);

  detail::VerifyFlags verify;
  auto* verify_cmd = app.add_subcommand("verify", "compare GA against the exact optimum on random instances");
  verify_cmd->add_option("--count", verify.count, "number of instances")->capture_default_str();
  verify_cmd->add_option("--n-min", verify.n_min)->capture_default_str();
  verify_cmd->add_option("--n-max", verify.n_max)->capture_default_str();
  verify_cmd->add_option("--seed", verify.seed, "instance and GA seed base")->capture_default_str();
  verify_cmd->add_option("--p-list", verify.p_list, "edge probabilities, cycled")->capture_default_str();
  verify_cmd->add_option("--cost-max", verify.cost_max)->capture_default_str();
  verify_cmd->add_option("--min-hit-rate", verify.min_hit_rate)->capture_default_str();
  detail::add_ga_flags(verify_cmd, verify.ga, false);

  detail::BenchFlags bench;
  bench.ga.cfg.population_size = 512;
  bench.ga.cfg.max_generations = 20;
  bench.ga.cfg.stall_generations = 0;
  auto* bench_cmd = app.add_subcommand("bench", "time evolve across worker counts");
  bench_cmd->add_option("--in", bench.in, "instance file (otherwise generated)");
  bench_cmd->add_option("--n", bench.n, "generated instance size")->capture_default_str();
  bench_cmd->add_option("--p", bench.p, "generated edge probability")->capture_default_str();
  bench_cmd->add_option("--cost-max", bench.cost_max)->capture_default_str();
  bench_cmd->add_option("--workers-list", bench.workers_list)->capture_default_str();
  bench_cmd->add_option("--trace", bench.trace, "write the engine phase log here");
  bench_cmd->add_option("--inject-divergence", bench.inject_divergence)->group("");
  detail::add_ga_flags(bench_cmd, bench.ga, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (gen_cmd->parsed()) return detail::cmd_gen(gen, out);
    if (solve_cmd->parsed()) return detail::cmd_solve(solve, out);
    if (verify_cmd->parsed()) return detail::cmd_verify(verify, out, err);
    if (bench_cmd->parsed()) return detail::cmd_bench(bench, out, err);
  } catch (const mr::JobError& e) {
    err << "error: " << e.what() << '\n';
    return kInternal;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    if (e.code() == ErrorCode::InstanceTooLarge) return kTooLarge;
    if (e.code() == ErrorCode::JobFailure) return kInternal;
    return kUsage;
  } catch (const std::invalid_argument& e) {
    err << "error: bad number: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kInternal;
  }
  return kUsage;
}

}  // namespace gvcp::cli
