#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <exception>
#include <thread>
#include <vector>

#include "gvcp/error.hpp"
#include "gvcp/instance.hpp"

namespace gvcp {

struct ExactResult {
  VertexSubset best_subset;
  double best_cost = 0;
  std::uint64_t subsets_examined = 0;
};

struct ExactOptions {
  std::size_t max_vertices = 26;
  std::size_t workers = 1;
};

namespace detail {

// Bit-reversed mask: comparing these orders subsets by their bitstring with
// vertex 0 as the most significant character.
inline std::uint64_t lex_rank(std::uint64_t mask, std::size_t n) {
  std::uint64_t r = 0;
  for (std::size_t k = 0; k < n; ++k)
    if (mask >> k & 1) r |= std::uint64_t{1} << (n - 1 - k);
  return r;
}

struct ExactCandidate {
  double cost = 0;
  std::uint64_t mask = 0;
  bool valid = false;
};

inline bool costs_tie(double a, double b) {
  return std::abs(a - b) <= 1e-9 * std::max({1.0, std::abs(a), std::abs(b)});
}

inline bool better(const ExactCandidate& a, const ExactCandidate& b, std::size_t n) {
  if (!b.valid) return a.valid;
  if (!a.valid) return false;
  if (!costs_tie(a.cost, b.cost)) return a.cost < b.cost;
  return lex_rank(a.mask, n) < lex_rank(b.mask, n);
}

// Walks Gray-code indices [lo, hi): consecutive subsets differ in one vertex,
// so each step costs one flip_delta.
inline ExactCandidate enumerate_gray_range(const GvcpInstance& inst, std::uint64_t lo, std::uint64_t hi) {
  const std::size_t n = inst.n();
  std::uint64_t mask = lo ^ (lo >> 1);
  VertexSubset s(n);
  for (std::size_t k = 0; k < n; ++k) s.set(k, mask >> k & 1);
  double cost = evaluate(inst, s);
  ExactCandidate best{cost, mask, true};
  auto in_set = [&](std::size_t x) { return s.contains(x); };
  for (std::uint64_t i = lo + 1; i < hi; ++i) {
    const auto v = static_cast<std::size_t>(std::countr_zero(i));
    cost += flip_delta_unchecked(inst, in_set, v);
    s.flip(v);
    mask ^= std::uint64_t{1} << v;
    ExactCandidate here{cost, mask, true};
    if (better(here, best, n)) best = here;
  }
  return best;
}

}  // namespace detail

/// Exhaustive optimum over all 2^n subsets. Ties go to the lexicographically
/// smallest bitstring, so the answer does not depend on `workers`.
inline ExactResult solve_exact(const GvcpInstance& inst, const ExactOptions& opts = {}) {
  const std::size_t n = inst.n();
  if (n > opts.max_vertices || n > 62)
    throw Error(ErrorCode::InstanceTooLarge,
                "exact solver is capped at n=" + std::to_string(std::min<std::size_t>(opts.max_vertices, 62)) +
                    ", instance has n=" + std::to_string(n));
  const std::uint64_t total = std::uint64_t{1} << n;
  const std::uint64_t workers = std::clamp<std::uint64_t>(opts.workers, 1, total);

  std::vector<detail::ExactCandidate> partial(workers);
  if (workers == 1) {
    partial[0] = detail::enumerate_gray_range(inst, 0, total);
  } else {
    std::vector<std::exception_ptr> errors(workers);
    {
      std::vector<std::jthread> threads;
      for (std::uint64_t w = 0; w < workers; ++w) {
        threads.emplace_back([&, w] {
          try {
            partial[w] = detail::enumerate_gray_range(inst, total * w / workers, total * (w + 1) / workers);
          } catch (...) {
            errors[w] = std::current_exception();
          }
        });
      }
    }
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  detail::ExactCandidate best;
  for (const auto& c : partial)
    if (detail::better(c, best, n)) best = c;

  ExactResult result;
  result.best_subset = VertexSubset(n);
  for (std::size_t k = 0; k < n; ++k) result.best_subset.set(k, best.mask >> k & 1);
  result.best_cost = evaluate(inst, result.best_subset);
  result.subsets_examined = total;
  return result;
}

}  // namespace gvcp
