#pragma once

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "gvcp/error.hpp"
#include "gvcp/ga_core.hpp"
#include "gvcp/instance.hpp"
#include "gvcp/mr_engine.hpp"
#include "gvcp/rng.hpp"

namespace gvcp {

/// Shuffle unit. pair_id is unique within a generation; an absent parent2
/// marks an elite that passes through the reducer untouched.
struct PairRecord {
  std::uint64_t pair_id = 0;
  Chromosome parent1;
  std::optional<Chromosome> parent2;

  bool is_elite() const { return !parent2.has_value(); }
  friend bool operator==(const PairRecord&, const PairRecord&) = default;
};

inline constexpr const char* kFrozenMaskKey = "gvcp.frozen_mask";
inline constexpr const char* kGenerationKey = "gvcp.generation";

struct MapOutput {
  std::vector<PairRecord> pairs;
  FrozenMask frozen;
  ScoredIndividual best;  // after local search
};

/// Map phase over one buffered generation: sort, improve the best by local
/// search, emit E elite passthroughs and (Z-E)/2 tournament-selected parent
/// pairs, and compute the frozen mask the reducers mutate with.
template <typename Rng>
MapOutput gvcp_map(const GvcpInstance& inst, std::span<const ScoredIndividual> population, const GaConfig& cfg,
                   Rng& rng) {
  cfg.validate();
  if (population.size() != cfg.population_size)
    throw Error(ErrorCode::WrongPopulationSize, "mapper buffered " + std::to_string(population.size()) +
                                                    " individuals, expected " + std::to_string(cfg.population_size));
  Population sorted(population.begin(), population.end());
  sort_population(sorted);
  sorted[0] = score(inst, local_search(inst, sorted[0].chromosome));

  MapOutput out;
  out.frozen = compute_frozen_mask(std::span<const ScoredIndividual>(sorted));
  out.best = sorted[0];
  out.pairs.reserve(cfg.elite_count + cfg.pair_count());
  std::uint64_t pair_id = 0;
  for (std::size_t i = 0; i < cfg.elite_count; ++i) out.pairs.push_back({pair_id++, sorted[i].chromosome, std::nullopt});
  const std::span<const ScoredIndividual> pool(sorted);
  for (std::size_t j = 0; j < cfg.pair_count(); ++j) {
    Chromosome first = fgts_select(pool, cfg.tournament_size, rng);
    Chromosome second = fgts_select(pool, cfg.tournament_size, rng);
    out.pairs.push_back({pair_id++, std::move(first), std::move(second)});
  }
  return out;
}

/// Reduce phase for one pair: elites are re-emitted with their fitness;
/// parent pairs are crossed with probability p_cross, both children mutated
/// against the published frozen mask, then scored.
template <typename Rng>
std::vector<ScoredIndividual> gvcp_reduce(const GvcpInstance& inst, const PairRecord& pair, const mr::JobConfig& config,
                                          const GaConfig& cfg, Rng& rng) {
  if (pair.is_elite()) return {score(inst, pair.parent1)};

  const auto it = config.find(kFrozenMaskKey);
  if (it == config.end()) throw Error(ErrorCode::MissingJobConfig, "job config lacks the frozen mask");
  const FrozenMask mask = FrozenMask::parse(it->second);
  const std::size_t n = pair.parent1.size();
  if (pair.parent2->size() != n) throw Error(ErrorCode::LengthMismatch, "parents differ in length");

  Chromosome c1 = pair.parent1;
  Chromosome c2 = *pair.parent2;
  if (bernoulli(rng, cfg.p_cross)) std::tie(c1, c2) = one_point_crossover(c1, c2, draw_cut(n, cfg.cut_range, rng));
  const MutationRates rates = cfg.rates_for(n);
  c1 = mutate(std::move(c1), mask, rates, rng);
  c2 = mutate(std::move(c2), mask, rates, rng);
  return {score(inst, std::move(c1)), score(inst, std::move(c2))};
}

/// Output key: children of pair p get keys 2p and 2p+1, so sorting by key
/// restores the serial generation order.
using OffspringRecord = mr::Record<std::uint64_t, ScoredIndividual>;
using GenerationJob = mr::JobSpec<ScoredIndividual, std::uint64_t, PairRecord, OffspringRecord>;

inline std::uint64_t parse_generation(const mr::JobConfig& config) {
  const auto it = config.find(kGenerationKey);
  if (it == config.end()) throw Error(ErrorCode::MissingJobConfig, "job config lacks the generation index");
  std::uint64_t g = 0;
  const auto& s = it->second;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), g);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw Error(ErrorCode::MissingJobConfig, "malformed generation index '" + s + "'");
  return g;
}

/// Builds the job for generation `generation` -> `generation + 1`. One mapper
/// buffers all Z inputs; partitions are pair_id mod R.
inline GenerationJob make_generation_job(const GvcpInstance& inst, const GaConfig& cfg, std::uint64_t generation) {
  auto buffer = std::make_shared<Population>();
  buffer->reserve(cfg.population_size);

  GenerationJob job;
  job.partition_count = cfg.worker_count;
  job.partitioner = [r = cfg.worker_count](const std::uint64_t& pair_id) {
    return static_cast<std::size_t>(pair_id % r);
  };
  job.config[kGenerationKey] = std::to_string(generation);

  job.map = [&inst, cfg, generation, buffer](const ScoredIndividual& rec, GenerationJob::Context& ctx) {
    buffer->push_back(rec);
    if (buffer->size() < cfg.population_size) return;
    RngStream rng = derive_rng_stream(cfg.master_seed, generation, StreamRole::Map, 0);
    MapOutput out = gvcp_map(inst, std::span<const ScoredIndividual>(*buffer), cfg, rng);
    buffer->clear();
    ctx.publish(kFrozenMaskKey, out.frozen.str());
    for (auto& p : out.pairs) {
      const std::uint64_t key = p.pair_id;
      ctx.emit(key, std::move(p));
    }
  };
  job.map_finish = [cfg, buffer](GenerationJob::Context&) {
    if (!buffer->empty())
      throw Error(ErrorCode::WrongPopulationSize, "input ended with " + std::to_string(buffer->size()) +
                                                      " buffered individuals; expected multiples of " +
                                                      std::to_string(cfg.population_size));
  };
  job.reduce = [&inst, cfg](const std::uint64_t& pair_id, std::span<const PairRecord> values,
                            const mr::JobConfig& config, std::vector<OffspringRecord>& out) {
    if (values.size() != 1)
      throw Error(ErrorCode::JobFailure, "pair id " + std::to_string(pair_id) + " grouped " +
                                             std::to_string(values.size()) + " records");
    RngStream rng = derive_rng_stream(cfg.master_seed, parse_generation(config), StreamRole::Reduce, pair_id);
    auto children = gvcp_reduce(inst, values[0], config, cfg, rng);
    for (std::size_t c = 0; c < children.size(); ++c) out.push_back({2 * pair_id + c, std::move(children[c])});
  };
  return job;
}

/// One generation through the map-reduce engine, returned in canonical order.
inline Population generation_step_mr(const GvcpInstance& inst, const Population& population, const GaConfig& cfg,
                                     std::uint64_t generation, std::ostream* trace = nullptr) {
  cfg.validate();
  const GenerationJob job = make_generation_job(inst, cfg, generation);
  auto records = mr::run_job(job, population, mr::RunOptions{cfg.worker_count, trace});
  std::sort(records.begin(), records.end(),
            [](const OffspringRecord& a, const OffspringRecord& b) { return a.key < b.key; });
  Population next;
  next.reserve(records.size());
  for (auto& r : records) next.push_back(std::move(r.value));
  if (next.size() != cfg.population_size)
    throw Error(ErrorCode::WrongPopulationSize, "generation produced " + std::to_string(next.size()) + " individuals");
  return next;
}

struct GenerationStats {
  std::size_t generation = 0;
  double best_cost = 0;
  double mean_cost = 0;
  std::size_t frozen_count = 0;
  double elapsed_ms = 0;
};

struct EvolveResult {
  Chromosome best_chromosome;
  double best_cost = 0;
  std::size_t generations_run = 0;
  std::vector<GenerationStats> history;
  Population final_population;
};

struct EvolveOptions {
  std::ostream* trace = nullptr;
};

inline const ScoredIndividual& best_of(const Population& pop) {
  return *std::min_element(pop.begin(), pop.end(), ranks_before);
}

/// Iterated generation jobs until max_generations, or until the best cost has
/// not improved for stall_generations consecutive generations (0 disables
/// the stall rule). Returns the best individual ever seen.
inline EvolveResult evolve(const GvcpInstance& inst, const GaConfig& cfg, const EvolveOptions& opts = {}) {
  using Clock = std::chrono::steady_clock;
  cfg.validate();
  Population pop = initial_population(inst, cfg);
  ScoredIndividual best = best_of(pop);
  std::size_t stall = 0;

  EvolveResult result;
  for (std::size_t g = 0; g < cfg.max_generations; ++g) {
    const auto t0 = Clock::now();
    pop = generation_step_mr(inst, pop, cfg, g, opts.trace);
    const double ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();

    const ScoredIndividual& gen_best = best_of(pop);
    const double fitness_sum = std::accumulate(pop.begin(), pop.end(), 0.0,
                                               [](double acc, const ScoredIndividual& s) { return acc + s.fitness; });
    result.history.push_back({g + 1, -gen_best.fitness, -fitness_sum / static_cast<double>(pop.size()),
                              compute_frozen_mask(std::span<const ScoredIndividual>(pop)).count(), ms});
    ++result.generations_run;

    if (gen_best.fitness > best.fitness) {
      best = gen_best;
      stall = 0;
    } else if (++stall >= cfg.stall_generations && cfg.stall_generations > 0) {
      break;
    }
  }
  result.best_chromosome = best.chromosome;
  result.best_cost = -best.fitness;
  result.final_population = std::move(pop);
  return result;
}

/// Runs the serial reference and the map-reduce path side by side from the
/// same initial population; true iff every generation matches exactly.
/// `serial_seed_offset` perturbs the serial path's seed (sensitivity checks).
inline bool serial_parallel_equivalence(const GvcpInstance& inst, const GaConfig& cfg, std::size_t generations,
                                        std::uint64_t serial_seed_offset = 0) {
  GaConfig serial_cfg = cfg;
  serial_cfg.master_seed += serial_seed_offset;
  Population mr_pop = initial_population(inst, cfg);
  Population serial_pop = mr_pop;
  for (std::size_t g = 0; g < generations; ++g) {
    mr_pop = generation_step_mr(inst, mr_pop, cfg, g);
    serial_pop = generation_step_serial(inst, serial_pop, serial_cfg, g);
    if (mr_pop != serial_pop) return false;
  }
  return true;
}

}  // namespace gvcp
