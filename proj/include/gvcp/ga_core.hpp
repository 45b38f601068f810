#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "gvcp/error.hpp"
#include "gvcp/instance.hpp"
#include "gvcp/rng.hpp"

namespace gvcp {

/// Binary encoding of a vertex subset: character k is '1' iff vertex k+1
/// (1-based) is selected.
class Chromosome {
 public:
  Chromosome() = default;

  explicit Chromosome(std::string bits) : bits_(std::move(bits)) {
    if (bits_.find_first_not_of("01") != std::string::npos)
      throw Error(ErrorCode::InvalidParameter, "chromosome alphabet is {0,1}: '" + bits_ + "'");
  }

  static Chromosome filled(std::size_t n, bool value) { return Chromosome(std::string(n, value ? '1' : '0'), Trusted{}); }

  const std::string& bits() const { return bits_; }
  std::size_t size() const { return bits_.size(); }
  bool operator[](std::size_t i) const { return bits_[i] == '1'; }
  void flip(std::size_t i) { bits_[i] = bits_[i] == '1' ? '0' : '1'; }

  auto operator<=>(const Chromosome&) const = default;

 private:
  struct Trusted {};
  Chromosome(std::string bits, Trusted) : bits_(std::move(bits)) {}

  std::string bits_;
};

struct ScoredIndividual {
  Chromosome chromosome;
  double fitness = 0;

  friend bool operator==(const ScoredIndividual&, const ScoredIndividual&) = default;
};

using Population = std::vector<ScoredIndividual>;

enum class CutRange {
  Inclusive,  // cut in [0, n]; boundary cuts copy the parents
  Interior,   // cut in [1, n-1]
};

struct MutationRates {
  double frozen;
  double normal;
};

struct GaConfig {
  std::size_t population_size = 150;
  std::size_t elite_count = 50;
  double tournament_size = 5.4;
  double p_cross = 0.85;
  std::optional<double> mutation_rate_frozen;  // 1.0 / n when unset
  std::optional<double> mutation_rate_normal;  // 0.4 / n when unset
  std::size_t max_generations = 500;
  std::size_t stall_generations = 100;
  std::uint64_t master_seed = 1;
  std::size_t worker_count = 4;
  CutRange cut_range = CutRange::Inclusive;

  std::size_t pair_count() const { return (population_size - elite_count) / 2; }

  MutationRates rates_for(std::size_t n) const {
    const double len = static_cast<double>(std::max<std::size_t>(n, 1));
    return {mutation_rate_frozen.value_or(1.0 / len), mutation_rate_normal.value_or(0.4 / len)};
  }

  void validate() const {
    auto fail = [](const std::string& what) { throw Error(ErrorCode::ConfigInvariantViolation, what); };
    if (population_size < 4) fail("population size must be >= 4");
    if (elite_count < 1 || elite_count >= population_size) fail("elite count must satisfy 1 <= E < Z");
    if ((population_size - elite_count) % 2 != 0) fail("Z - E must be even");
    if (!(tournament_size >= 1) || !std::isfinite(tournament_size)) fail("tournament size must be >= 1");
    if (!(p_cross >= 0 && p_cross <= 1)) fail("crossover probability must lie in [0, 1]");
    for (auto rate : {mutation_rate_frozen, mutation_rate_normal})
      if (rate && !(*rate >= 0 && *rate <= 1)) fail("mutation rates must lie in [0, 1]");
    if (worker_count < 1) fail("worker count must be >= 1");
  }
};

inline VertexSubset decode(const Chromosome& c) {
  VertexSubset s(c.size());
  for (std::size_t k = 0; k < c.size(); ++k) s.set(k, c[k]);
  return s;
}

inline Chromosome encode(const VertexSubset& s) {
  std::string bits(s.size(), '0');
  for (std::size_t k = 0; k < s.size(); ++k)
    if (s.contains(k)) bits[k] = '1';
  return Chromosome(std::move(bits));
}

/// Higher is better: the negated objective.
inline double fitness(const GvcpInstance& inst, const Chromosome& c) { return -evaluate(inst, decode(c)); }

inline ScoredIndividual score(const GvcpInstance& inst, Chromosome c) {
  const double f = fitness(inst, c);
  return {std::move(c), f};
}

/// Total order used for sorting and tournaments: fitness descending, then
/// lexicographically smallest bitstring.
inline bool ranks_before(const ScoredIndividual& a, const ScoredIndividual& b) {
  if (a.fitness != b.fitness) return a.fitness > b.fitness;
  return a.chromosome < b.chromosome;
}

/// Stable, so equal individuals keep their original relative order.
inline void sort_population(Population& pop) { std::stable_sort(pop.begin(), pop.end(), ranks_before); }

/// First-improvement add/remove search: scan positions in order, apply every
/// strictly improving flip immediately, repeat until a full pass changes nothing.
inline Chromosome local_search(const GvcpInstance& inst, const Chromosome& start) {
  VertexSubset s = decode(start);
  require_length(inst, s);
  auto in_set = [&](std::size_t x) { return s.contains(x); };
  for (bool improved = true; improved;) {
    improved = false;
    for (std::size_t v = 0; v < inst.n(); ++v) {
      if (flip_delta_unchecked(inst, in_set, v) < 0) {
        s.flip(v);
        improved = true;
      }
    }
  }
  return encode(s);
}

/// Z chromosomes: all-zeros, all-ones, their local optima, then Z-4 uniform
/// random bitstrings.
template <typename Rng>
std::vector<Chromosome> init_population(const GvcpInstance& inst, const GaConfig& cfg, Rng& rng) {
  if (cfg.population_size < 4)
    throw Error(ErrorCode::PopulationTooSmall, "population must hold the four special individuals");
  const std::size_t n = inst.n();
  std::vector<Chromosome> pop;
  pop.reserve(cfg.population_size);
  pop.push_back(Chromosome::filled(n, false));
  pop.push_back(Chromosome::filled(n, true));
  pop.push_back(local_search(inst, pop[0]));
  pop.push_back(local_search(inst, pop[1]));
  std::string bits(n, '0');
  while (pop.size() < cfg.population_size) {
    for (auto& b : bits) b = (rng() >> 63) ? '1' : '0';
    pop.emplace_back(bits);
  }
  return pop;
}

inline Population score_all(const GvcpInstance& inst, const std::vector<Chromosome>& chromosomes) {
  Population out;
  out.reserve(chromosomes.size());
  for (const auto& c : chromosomes) out.push_back(score(inst, c));
  return out;
}

/// Initial scored population for a run, drawn from the run's init stream.
inline Population initial_population(const GvcpInstance& inst, const GaConfig& cfg) {
  RngStream rng = derive_rng_stream(cfg.master_seed, 0, StreamRole::Init, 0);
  return score_all(inst, init_population(inst, cfg, rng));
}

struct TournamentResult {
  std::size_t winner;
  std::size_t size;
};

/// One fine-grained tournament: size floor(tSize) or ceil(tSize), the latter
/// with probability frac(tSize); distinct contestants; best contestant wins.
template <typename Rng>
TournamentResult run_tournament(std::span<const ScoredIndividual> pop, double tournament_size, Rng& rng) {
  if (pop.empty()) throw Error(ErrorCode::EmptyPopulation, "tournament over an empty population");
  if (!(tournament_size >= 1)) throw Error(ErrorCode::InvalidParameter, "tournament size must be >= 1");
  const double whole = std::floor(tournament_size);
  std::size_t size = static_cast<std::size_t>(whole) + (bernoulli(rng, tournament_size - whole) ? 1 : 0);
  size = std::min(size, pop.size());

  // Floyd's sampling of `size` distinct indices.
  std::vector<std::size_t> picked;
  picked.reserve(size);
  for (std::size_t j = pop.size() - size; j < pop.size(); ++j) {
    const auto t = static_cast<std::size_t>(uniform_below(rng, j + 1));
    picked.push_back(std::find(picked.begin(), picked.end(), t) == picked.end() ? t : j);
  }
  std::size_t winner = picked.front();
  for (auto idx : picked)
    if (ranks_before(pop[idx], pop[winner])) winner = idx;
  return {winner, size};
}

template <typename Rng>
const Chromosome& fgts_select(std::span<const ScoredIndividual> pop, double tournament_size, Rng& rng) {
  return pop[run_tournament(pop, tournament_size, rng).winner].chromosome;
}

inline std::pair<Chromosome, Chromosome> one_point_crossover(const Chromosome& p1, const Chromosome& p2,
                                                             std::size_t cut) {
  if (p1.size() != p2.size()) throw Error(ErrorCode::LengthMismatch, "parents differ in length");
  if (cut > p1.size()) throw Error(ErrorCode::CutOutOfRange, "cut " + std::to_string(cut) + " > n");
  const auto& a = p1.bits();
  const auto& b = p2.bits();
  return {Chromosome(a.substr(0, cut) + b.substr(cut)), Chromosome(b.substr(0, cut) + a.substr(cut))};
}

template <typename Rng>
std::size_t draw_cut(std::size_t n, CutRange range, Rng& rng) {
  if (range == CutRange::Interior && n >= 2) return 1 + static_cast<std::size_t>(uniform_below(rng, n - 1));
  return static_cast<std::size_t>(uniform_below(rng, n + 1));
}

/// Positions where every individual carries the same allele.
class FrozenMask {
 public:
  FrozenMask() = default;
  explicit FrozenMask(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {}

  static FrozenMask parse(const std::string& text) {
    std::vector<std::uint8_t> bits(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
      if (text[i] != '0' && text[i] != '1') throw Error(ErrorCode::InvalidParameter, "frozen mask alphabet is {0,1}");
      bits[i] = text[i] == '1';
    }
    return FrozenMask(std::move(bits));
  }

  std::size_t size() const { return bits_.size(); }
  bool frozen(std::size_t i) const { return bits_[i] != 0; }
  std::size_t count() const { return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), 1)); }

  std::string str() const {
    std::string out(bits_.size(), '0');
    for (std::size_t i = 0; i < bits_.size(); ++i)
      if (bits_[i]) out[i] = '1';
    return out;
  }

  friend bool operator==(const FrozenMask&, const FrozenMask&) = default;

 private:
  std::vector<std::uint8_t> bits_;
};

template <typename Range, typename Project>
FrozenMask compute_frozen_mask(const Range& pop, Project chromosome_of) {
  if (std::begin(pop) == std::end(pop)) throw Error(ErrorCode::EmptyPopulation, "frozen mask of an empty population");
  const Chromosome& first = chromosome_of(*std::begin(pop));
  const std::size_t n = first.size();
  std::vector<std::uint8_t> frozen(n, 1);
  for (const auto& item : pop) {
    const Chromosome& c = chromosome_of(item);
    if (c.size() != n) throw Error(ErrorCode::LengthMismatch, "population chromosomes differ in length");
    for (std::size_t k = 0; k < n; ++k)
      if (frozen[k] && c[k] != first[k]) frozen[k] = 0;
  }
  return FrozenMask(std::move(frozen));
}

inline FrozenMask compute_frozen_mask(std::span<const Chromosome> pop) {
  return compute_frozen_mask(pop, [](const Chromosome& c) -> const Chromosome& { return c; });
}

inline FrozenMask compute_frozen_mask(std::span<const ScoredIndividual> pop) {
  return compute_frozen_mask(pop, [](const ScoredIndividual& s) -> const Chromosome& { return s.chromosome; });
}

/// One uniform draw per gene, in index order; flip when below the gene's rate.
template <typename Rng>
Chromosome mutate(Chromosome c, const FrozenMask& mask, const MutationRates& rates, Rng& rng) {
  if (mask.size() != c.size()) throw Error(ErrorCode::LengthMismatch, "mask and chromosome differ in length");
  for (std::size_t k = 0; k < c.size(); ++k) {
    const double rate = mask.frozen(k) ? rates.frozen : rates.normal;
    if (uniform01(rng) < rate) c.flip(k);
  }
  return c;
}

/// Reference single-threaded generation. Consumes exactly the streams the
/// map-reduce path does: (seed, g, Map, 0) for selection and
/// (seed, g, Reduce, pair_id) per offspring pair.
inline Population generation_step_serial(const GvcpInstance& inst, const Population& population, const GaConfig& cfg,
                                         std::uint64_t generation) {
  cfg.validate();
  if (population.size() != cfg.population_size)
    throw Error(ErrorCode::ConfigInvariantViolation, "population has " + std::to_string(population.size()) +
                                                         " individuals, config expects " +
                                                         std::to_string(cfg.population_size));
  const std::size_t n = inst.n();
  Population sorted = population;
  sort_population(sorted);
  sorted[0] = score(inst, local_search(inst, sorted[0].chromosome));
  const FrozenMask mask = compute_frozen_mask(std::span<const ScoredIndividual>(sorted));
  const MutationRates rates = cfg.rates_for(n);

  Population next(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(cfg.elite_count));
  next.reserve(cfg.population_size);

  RngStream select_rng = derive_rng_stream(cfg.master_seed, generation, StreamRole::Map, 0);
  std::vector<std::pair<Chromosome, Chromosome>> parents;
  parents.reserve(cfg.pair_count());
  for (std::size_t j = 0; j < cfg.pair_count(); ++j) {
    const Chromosome& a = fgts_select(std::span<const ScoredIndividual>(sorted), cfg.tournament_size, select_rng);
    const Chromosome& b = fgts_select(std::span<const ScoredIndividual>(sorted), cfg.tournament_size, select_rng);
    parents.emplace_back(a, b);
  }

  for (std::size_t j = 0; j < parents.size(); ++j) {
    RngStream rng = derive_rng_stream(cfg.master_seed, generation, StreamRole::Reduce, cfg.elite_count + j);
    auto [c1, c2] = parents[j];
    if (bernoulli(rng, cfg.p_cross)) std::tie(c1, c2) = one_point_crossover(c1, c2, draw_cut(n, cfg.cut_range, rng));
    c1 = mutate(std::move(c1), mask, rates, rng);
    c2 = mutate(std::move(c2), mask, rates, rng);
    next.push_back(score(inst, std::move(c1)));
    next.push_back(score(inst, std::move(c2)));
  }
  return next;
}

}  // namespace gvcp
