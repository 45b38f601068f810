#pragma once

#include <cstdint>
#include <cstdio>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "gvcp/ga_core.hpp"
#include "gvcp/ga_mr.hpp"

namespace gvcp {

/// 64-bit FNV-1a of the instance file bytes, as 16 hex digits.
inline std::string content_hash(std::string_view bytes) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(mr::detail::fnv1a(bytes)));
  return buf;
}

/// Everything needed to reproduce a solver run.
struct RunReport {
  std::string instance_path;
  std::string instance_hash;
  std::string algorithm;  // "ga" or "exact"
  nlohmann::json config = nlohmann::json::object();
  double best_cost = 0;
  std::vector<std::size_t> best_vertices;  // 1-based
  std::string best_bitstring;
  std::size_t generations_run = 0;
  double wall_time_ms = 0;
  std::vector<GenerationStats> history;
  std::size_t workers = 1;
  std::uint64_t master_seed = 0;
};

inline nlohmann::json config_to_json(const GaConfig& cfg, std::size_t n) {
  const MutationRates rates = cfg.rates_for(n);
  return {{"population_size", cfg.population_size},
          {"elite_count", cfg.elite_count},
          {"tournament_size", cfg.tournament_size},
          {"p_cross", cfg.p_cross},
          {"mutation_rate_frozen", rates.frozen},
          {"mutation_rate_normal", rates.normal},
          {"max_generations", cfg.max_generations},
          {"stall_generations", cfg.stall_generations},
          {"master_seed", cfg.master_seed},
          {"worker_count", cfg.worker_count},
          {"cut_range", cfg.cut_range == CutRange::Inclusive ? "inclusive" : "interior"}};
}

inline nlohmann::json to_json(const RunReport& r) {
  nlohmann::json history = nlohmann::json::array();
  for (const auto& h : r.history)
    history.push_back({{"generation", h.generation},
                       {"best_cost", h.best_cost},
                       {"mean_cost", h.mean_cost},
                       {"frozen_count", h.frozen_count},
                       {"elapsed_ms", h.elapsed_ms}});
  return {{"instance_path", r.instance_path},
          {"instance_hash", r.instance_hash},
          {"algorithm", r.algorithm},
          {"config", r.config},
          {"best_cost", r.best_cost},
          {"best_vertices", r.best_vertices},
          {"best_bitstring", r.best_bitstring},
          {"generations_run", r.generations_run},
          {"wall_time_ms", r.wall_time_ms},
          {"history", history},
          {"workers", r.workers},
          {"master_seed", r.master_seed}};
}

inline std::string history_csv(const std::vector<GenerationStats>& history) {
  std::ostringstream out;
  out << "generation,best_cost,mean_cost,frozen_count,elapsed_ms\n";
  for (const auto& h : history)
    out << h.generation << ',' << h.best_cost << ',' << h.mean_cost << ',' << h.frozen_count << ',' << h.elapsed_ms
        << '\n';
  return out.str();
}

}  // namespace gvcp
