#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "gvcp/ga_core.hpp"
#include "oracle.hpp"

namespace gvcp {
namespace {

/// Replays a fixed value forever: 0 forces every Bernoulli draw to succeed,
/// the maximum forces every one to fail.
struct ConstantStream {
  using result_type = std::uint64_t;
  std::uint64_t value;
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() { return value; }
};

GvcpInstance example1() { return parse_instance(oracle::example1_text()); }

Chromosome random_chromosome(std::size_t n, RngStream& rng) {
  std::string bits(n, '0');
  for (auto& b : bits) b = (rng() >> 63) ? '1' : '0';
  return Chromosome(bits);
}

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  double r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

TEST(Decode, Examples) {
  EXPECT_EQ(decode(Chromosome("0001")), VertexSubset::of(4, {3}));
  EXPECT_EQ(decode(Chromosome("0000")), VertexSubset(4));
  EXPECT_EQ(decode(Chromosome("1111")), VertexSubset(4, true));
}

TEST(Decode, EncodeIsInverse) {
  RngStream rng(1);
  for (int i = 0; i < 200; ++i) {
    const auto c = random_chromosome(1 + i % 40, rng);
    EXPECT_EQ(encode(decode(c)), c);
  }
}

TEST(Chromosome, RejectsForeignCharacters) { EXPECT_THROW(Chromosome("01x"), Error); }

TEST(Fitness, Example1) {
  const auto inst = example1();
  EXPECT_EQ(fitness(inst, Chromosome("1000")), -150);
  EXPECT_EQ(fitness(inst, Chromosome("0000")), -190);
  EXPECT_EQ(fitness(inst, Chromosome("0100")), -180);
}

TEST(InitPopulation, SpecialIndividualsFirst) {
  const auto inst = example1();
  GaConfig cfg;
  RngStream rng(9);
  const auto pop = init_population(inst, cfg, rng);
  ASSERT_EQ(pop.size(), 150u);
  EXPECT_EQ(pop[0].bits(), "0000");
  EXPECT_EQ(pop[1].bits(), "1111");
  EXPECT_EQ(pop[2].bits(), "1000");
  EXPECT_EQ(pop[3].bits(), "1100");
  for (const auto& c : pop) EXPECT_EQ(c.size(), 4u);
}

TEST(InitPopulation, Deterministic) {
  const auto inst = generate_instance(20, 0.3, 50, 2);
  GaConfig cfg;
  RngStream a(5), b(5);
  EXPECT_EQ(init_population(inst, cfg, a), init_population(inst, cfg, b));
}

TEST(InitPopulation, RandomPortionIsBalanced) {
  const auto inst = generate_instance(100, 0.05, 50, 4);
  GaConfig cfg;
  RngStream rng(17);
  const auto pop = init_population(inst, cfg, rng);
  for (std::size_t k = 0; k < 100; ++k) {
    double ones = 0;
    for (std::size_t i = 4; i < pop.size(); ++i) ones += pop[i][k];
    const double freq = ones / 146.0;
    EXPECT_GE(freq, 0.35) << "position " << k;
    EXPECT_LE(freq, 0.65) << "position " << k;
  }
}

TEST(InitPopulation, TooSmall) {
  GaConfig cfg;
  cfg.population_size = 3;
  RngStream rng(1);
  try {
    init_population(example1(), cfg, rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::PopulationTooSmall);
  }
}

Population ranked_population(int size) {
  // Distinct fitness; index i has fitness -i, so rank == index.
  Population pop;
  for (int i = 0; i < size; ++i) {
    std::string bits(8, '0');
    for (int b = 0; b < 8; ++b) bits[b] = (i >> b & 1) ? '1' : '0';
    pop.push_back({Chromosome(bits), -static_cast<double>(i)});
  }
  return pop;
}

TEST(FgtsSelect, WholePopulationTournamentReturnsBest) {
  auto pop = ranked_population(12);
  std::rotate(pop.begin(), pop.begin() + 5, pop.end());
  RngStream rng(3);
  for (int i = 0; i < 200; ++i) EXPECT_EQ(fgts_select(std::span<const ScoredIndividual>(pop), 12.0, rng), pop[7].chromosome);
}

TEST(FgtsSelect, SizeOneIsUniform) {
  const auto pop = ranked_population(10);
  RngStream rng(4);
  std::vector<int> wins(10, 0);
  for (int i = 0; i < 10000; ++i) {
    const auto r = run_tournament(std::span<const ScoredIndividual>(pop), 1.0, rng);
    EXPECT_EQ(r.size, 1u);
    ++wins[r.winner];
  }
  const double sigma = std::sqrt(10000 * 0.1 * 0.9);
  for (int w : wins) EXPECT_LT(std::abs(w - 1000), 3 * sigma);
}

TEST(FgtsSelect, FractionalSizeMixAndWinRates) {
  const auto pop = ranked_population(10);
  RngStream rng(8);
  constexpr int kDraws = 100000;
  int size6 = 0;
  std::vector<int> wins(10, 0);
  for (int i = 0; i < kDraws; ++i) {
    const auto r = run_tournament(std::span<const ScoredIndividual>(pop), 5.4, rng);
    ASSERT_TRUE(r.size == 5 || r.size == 6);
    size6 += r.size == 6;
    ++wins[r.winner];
  }
  const double frac = static_cast<double>(size6) / kDraws;
  EXPECT_LT(std::abs(frac - 0.4), 3 * std::sqrt(0.4 * 0.6 / kDraws));

  // Rank r wins a size-k tournament iff it is drawn along with k-1 of the
  // 9-r worse individuals: C(9-r, k-1) / C(10, k).
  for (int r = 0; r < 10; ++r) {
    const double p = 0.6 * binomial(9 - r, 4) / binomial(10, 5) + 0.4 * binomial(9 - r, 5) / binomial(10, 6);
    const double sigma = std::sqrt(kDraws * p * (1 - p));
    EXPECT_LE(std::abs(wins[r] - kDraws * p), std::max(4 * sigma, 0.5)) << "rank " << r;
  }
  for (int r = 0; r + 1 < 6; ++r) EXPECT_GT(wins[r], wins[r + 1]);
}

TEST(FgtsSelect, WinnerIsBestContestantWithLexicographicTies) {
  Population pop{{Chromosome("110"), -5}, {Chromosome("011"), -5}, {Chromosome("000"), -9}};
  RngStream rng(2);
  EXPECT_EQ(fgts_select(std::span<const ScoredIndividual>(pop), 3.0, rng).bits(), "011");
}

TEST(FgtsSelect, DeterministicForFixedStream) {
  const auto pop = ranked_population(30);
  RngStream a(11), b(11);
  for (int i = 0; i < 500; ++i)
    EXPECT_EQ(run_tournament(std::span<const ScoredIndividual>(pop), 3.7, a).winner,
              run_tournament(std::span<const ScoredIndividual>(pop), 3.7, b).winner);
}

TEST(FgtsSelect, EmptyPopulation) {
  Population empty;
  RngStream rng(1);
  try {
    fgts_select(std::span<const ScoredIndividual>(empty), 2.0, rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyPopulation);
  }
}

TEST(OnePointCrossover, Examples) {
  const Chromosome zeros("0000"), ones("1111");
  auto [a, b] = one_point_crossover(zeros, ones, 2);
  EXPECT_EQ(a.bits(), "0011");
  EXPECT_EQ(b.bits(), "1100");
  auto [c, d] = one_point_crossover(zeros, ones, 0);
  EXPECT_EQ(c, ones);
  EXPECT_EQ(d, zeros);
  auto [e, f] = one_point_crossover(zeros, ones, 4);
  EXPECT_EQ(e, zeros);
  EXPECT_EQ(f, ones);
  const Chromosome p("0110");
  auto [g, h] = one_point_crossover(p, p, 3);
  EXPECT_EQ(g, p);
  EXPECT_EQ(h, p);
}

TEST(OnePointCrossover, Errors) {
  try {
    one_point_crossover(Chromosome("01"), Chromosome("011"), 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::LengthMismatch);
  }
  try {
    one_point_crossover(Chromosome("01"), Chromosome("10"), 3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::CutOutOfRange);
  }
}

TEST(OnePointCrossover, ConservesGenesPerPosition) {
  RngStream rng(21);
  for (int t = 0; t < 2000; ++t) {
    const std::size_t n = 1 + uniform_below(rng, 40);
    const auto p1 = random_chromosome(n, rng), p2 = random_chromosome(n, rng);
    const std::size_t cut = uniform_below(rng, n + 1);
    const auto [c1, c2] = one_point_crossover(p1, p2, cut);
    for (std::size_t i = 0; i < n; ++i) {
      EXPECT_EQ(c1[i] + c2[i], p1[i] + p2[i]);
      EXPECT_EQ(c1[i], i < cut ? p1[i] : p2[i]);
    }
  }
}

TEST(DrawCut, Ranges) {
  RngStream rng(6);
  std::vector<int> inclusive(6, 0), interior(6, 0);
  for (int i = 0; i < 6000; ++i) {
    ++inclusive[draw_cut(5, CutRange::Inclusive, rng)];
    ++interior[draw_cut(5, CutRange::Interior, rng)];
  }
  for (int c : inclusive) EXPECT_GT(c, 0);
  EXPECT_EQ(interior[0], 0);
  EXPECT_EQ(interior[5], 0);
  for (int k = 1; k < 5; ++k) EXPECT_GT(interior[k], 0);
}

TEST(FrozenMask, Examples) {
  std::vector<Chromosome> same{Chromosome("0011"), Chromosome("0011")};
  EXPECT_EQ(compute_frozen_mask(same).str(), "1111");
  std::vector<Chromosome> none{Chromosome("01"), Chromosome("10")};
  EXPECT_EQ(compute_frozen_mask(none).str(), "00");
  std::vector<Chromosome> mixed{Chromosome("110"), Chromosome("100"), Chromosome("100")};
  EXPECT_EQ(compute_frozen_mask(mixed).str(), "101");
  EXPECT_EQ(compute_frozen_mask(mixed).count(), 2u);
  EXPECT_EQ(FrozenMask::parse("101"), compute_frozen_mask(mixed));
}

TEST(FrozenMask, EmptyPopulation) {
  std::vector<Chromosome> empty;
  try {
    compute_frozen_mask(empty);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyPopulation);
  }
}

TEST(Mutate, ForcedStreams) {
  const Chromosome c("0110100");
  const auto mask = FrozenMask::parse("1100000");
  const MutationRates rates{1.0 / 7, 0.4 / 7};
  ConstantStream always{0}, never{std::numeric_limits<std::uint64_t>::max()};
  EXPECT_EQ(mutate(c, mask, rates, always).bits(), "1001011");
  EXPECT_EQ(mutate(c, mask, rates, never), c);
}

TEST(Mutate, OneDrawPerGene) {
  RngStream rng(1);
  mutate(Chromosome("010101"), FrozenMask::parse("000000"), {0.1, 0.1}, rng);
  EXPECT_EQ(rng.draws(), 6u);
}

TEST(Mutate, LengthMismatch) {
  RngStream rng(1);
  try {
    mutate(Chromosome("01"), FrozenMask::parse("0"), {0.1, 0.1}, rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::LengthMismatch);
  }
}

TEST(Mutate, EmpiricalRatesMatch) {
  const std::size_t n = 100;
  GaConfig cfg;
  const auto rates = cfg.rates_for(n);
  EXPECT_DOUBLE_EQ(rates.frozen, 0.01);
  EXPECT_DOUBLE_EQ(rates.normal, 0.004);
  const Chromosome zero = Chromosome::filled(n, false);
  for (bool frozen : {false, true}) {
    const FrozenMask mask(std::vector<std::uint8_t>(n, frozen ? 1 : 0));
    RngStream rng(frozen ? 31 : 32);
    double flips = 0;
    constexpr int kChromosomes = 10000;
    for (int i = 0; i < kChromosomes; ++i) {
      const auto m = mutate(zero, mask, rates, rng);
      flips += static_cast<double>(std::count(m.bits().begin(), m.bits().end(), '1'));
    }
    const double draws = static_cast<double>(kChromosomes * n);
    const double p = frozen ? rates.frozen : rates.normal;
    EXPECT_LT(std::abs(flips / draws - p), 3 * std::sqrt(p * (1 - p) / draws)) << "frozen=" << frozen;
  }
}

TEST(LocalSearch, Example1FromEmpty) {
  const auto inst = example1();
  EXPECT_EQ(local_search(inst, Chromosome("0000")).bits(), "1000");
  EXPECT_EQ(local_search(inst, Chromosome("1111")).bits(), "1100");
}

TEST(LocalSearch, LocalOptimumIsFixpoint) {
  const auto inst = example1();
  EXPECT_EQ(local_search(inst, Chromosome("1000")).bits(), "1000");
}

TEST(LocalSearch, RandomInstancesReachOneFlipOptimum) {
  RngStream rng(44);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto inst = generate_instance(12, 0.4, 100, seed);
    const auto raw = oracle::raw(inst);
    const auto start = random_chromosome(12, rng);
    const auto out = local_search(inst, start);
    EXPECT_LE(oracle::cost_bits(raw, out.bits()), oracle::cost_bits(raw, start.bits()));
    EXPECT_TRUE(oracle::is_one_flip_local_optimum(raw, out.bits())) << out.bits();
    EXPECT_EQ(local_search(inst, out), out);
  }
}

TEST(GaConfig, Validation) {
  auto invalid = [](auto tweak) {
    GaConfig cfg;
    tweak(cfg);
    try {
      cfg.validate();
    } catch (const Error& e) {
      return e.code() == ErrorCode::ConfigInvariantViolation;
    }
    return false;
  };
  EXPECT_NO_THROW(GaConfig{}.validate());
  EXPECT_TRUE(invalid([](GaConfig& c) { c.elite_count = 0; }));
  EXPECT_TRUE(invalid([](GaConfig& c) { c.elite_count = 150; }));
  EXPECT_TRUE(invalid([](GaConfig& c) { c.elite_count = 51; }));
  EXPECT_TRUE(invalid([](GaConfig& c) { c.tournament_size = 0.5; }));
  EXPECT_TRUE(invalid([](GaConfig& c) { c.p_cross = 1.1; }));
  EXPECT_TRUE(invalid([](GaConfig& c) { c.mutation_rate_normal = -0.1; }));
  EXPECT_TRUE(invalid([](GaConfig& c) { c.worker_count = 0; }));
}

TEST(GenerationStepSerial, Example1ReachesOptimumInOneGeneration) {
  const auto inst = example1();
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    GaConfig cfg;
    cfg.master_seed = seed;
    const auto next = generation_step_serial(inst, initial_population(inst, cfg), cfg, 0);
    EXPECT_TRUE(std::any_of(next.begin(), next.end(), [](const auto& s) { return s.fitness == -150; }));
  }
}

TEST(GenerationStepSerial, OutputSizeIsPopulationSize) {
  RngStream rng(13);
  for (int t = 0; t < 20; ++t) {
    GaConfig cfg;
    cfg.population_size = 4 + 2 * uniform_below(rng, 40);
    cfg.elite_count = 1 + 2 * uniform_below(rng, (cfg.population_size - 2) / 2);
    if ((cfg.population_size - cfg.elite_count) % 2) ++cfg.elite_count;
    cfg.tournament_size = 1 + uniform01(rng) * 4;
    cfg.master_seed = rng();
    const auto inst = generate_instance(5 + t, 0.3, 30, t);
    const auto next = generation_step_serial(inst, initial_population(inst, cfg), cfg, 0);
    EXPECT_EQ(next.size(), cfg.population_size);
    for (const auto& s : next) EXPECT_EQ(s.fitness, fitness(inst, s.chromosome));
  }
}

TEST(GenerationStepSerial, BestCostNeverWorsensAndElitesCarryOver) {
  const auto inst = generate_instance(40, 0.2, 100, 3);
  GaConfig cfg;
  cfg.population_size = 60;
  cfg.elite_count = 10;
  cfg.master_seed = 5;
  auto pop = initial_population(inst, cfg);
  double best = -std::max_element(pop.begin(), pop.end(), [](auto& a, auto& b) { return a.fitness < b.fitness; })->fitness;
  for (std::uint64_t g = 0; g < 30; ++g) {
    Population sorted = pop;
    sort_population(sorted);
    sorted[0] = score(inst, local_search(inst, sorted[0].chromosome));
    const auto next = generation_step_serial(inst, pop, cfg, g);
    for (std::size_t i = 0; i < cfg.elite_count; ++i) EXPECT_EQ(next[i], sorted[i]);
    const double gen_best =
        -std::max_element(next.begin(), next.end(), [](auto& a, auto& b) { return a.fitness < b.fitness; })->fitness;
    EXPECT_LE(gen_best, best);
    best = gen_best;
    pop = next;
  }
}

TEST(GenerationStepSerial, RejectsWrongPopulation) {
  GaConfig cfg;
  const auto inst = example1();
  auto pop = initial_population(inst, cfg);
  pop.pop_back();
  try {
    generation_step_serial(inst, pop, cfg, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ConfigInvariantViolation);
  }
}

}  // namespace
}  // namespace gvcp
