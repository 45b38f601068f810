#pragma once

#include <chrono>
#include <cstddef>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "gvcp/ga_mr.hpp"

namespace gvcp {

struct BenchRow {
  std::size_t workers = 1;
  double total_ms = 0;
  double per_generation_ms = 0;
  EvolveResult result;
};

struct BenchOutcome {
  std::vector<BenchRow> rows;
  bool identical = true;
  std::string divergence;  // first mismatch, when not identical
};

/// The parts of an evolve run that must not depend on the worker count.
inline bool same_outcome(const EvolveResult& a, const EvolveResult& b, std::string* why = nullptr) {
  auto fail = [&](const std::string& what) {
    if (why) *why = what;
    return false;
  };
  if (a.best_chromosome != b.best_chromosome || a.best_cost != b.best_cost) return fail("best individual");
  if (a.generations_run != b.generations_run) return fail("generations run");
  if (a.final_population != b.final_population) return fail("final population");
  for (std::size_t g = 0; g < a.history.size(); ++g) {
    const auto& x = a.history[g];
    const auto& y = b.history[g];
    if (x.best_cost != y.best_cost || x.mean_cost != y.mean_cost || x.frozen_count != y.frozen_count)
      return fail("history row " + std::to_string(x.generation));
  }
  return true;
}

/// Runs evolve once per worker count with an otherwise identical config and
/// checks that every run matches the first. `inject_divergence_at` perturbs
/// the result for one worker count, to exercise the guard.
inline BenchOutcome run_bench(const GvcpInstance& inst, GaConfig cfg, const std::vector<std::size_t>& workers_list,
                              std::ostream* trace = nullptr,
                              std::optional<std::size_t> inject_divergence_at = std::nullopt) {
  using Clock = std::chrono::steady_clock;
  if (workers_list.empty()) throw Error(ErrorCode::InvalidParameter, "workers list is empty");
  BenchOutcome outcome;
  for (std::size_t w : workers_list) {
    if (w < 1) throw Error(ErrorCode::InvalidParameter, "worker counts must be >= 1");
    cfg.worker_count = w;
    if (trace) *trace << "# workers=" << w << '\n';
    const auto t0 = Clock::now();
    BenchRow row;
    row.workers = w;
    row.result = evolve(inst, cfg, EvolveOptions{trace});
    row.total_ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
    const double gens = static_cast<double>(std::max<std::size_t>(row.result.generations_run, 1));
    row.per_generation_ms = row.total_ms / gens;
    if (inject_divergence_at && *inject_divergence_at == w && !row.result.final_population.empty())
      row.result.final_population.front().fitness -= 1;
    outcome.rows.push_back(std::move(row));
  }
  const auto& first = outcome.rows.front();
  for (std::size_t i = 1; i < outcome.rows.size() && outcome.identical; ++i) {
    std::string why;
    if (!same_outcome(first.result, outcome.rows[i].result, &why)) {
      outcome.identical = false;
      outcome.divergence = "workers=" + std::to_string(outcome.rows[i].workers) + " differs from workers=" +
                           std::to_string(first.workers) + " in " + why;
    }
  }
  return outcome;
}

}  // namespace gvcp
