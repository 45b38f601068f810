#pragma once

// Test-only reference implementations. These deliberately avoid the library's
// evaluation and search code paths: costs come from explicit set membership
// and edge classification, optima from plain binary enumeration.

#include <cstdint>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include "gvcp/instance.hpp"

namespace gvcp::oracle {

struct RawEdge {
  int u, v;
  double d0, d1, d2;
};

struct RawInstance {
  std::vector<double> c;
  std::vector<RawEdge> edges;
};

inline RawInstance raw(const GvcpInstance& inst) {
  RawInstance r;
  r.c.assign(inst.vertex_costs().begin(), inst.vertex_costs().end());
  for (const auto& e : inst.edges())
    r.edges.push_back({static_cast<int>(e.u), static_cast<int>(e.v), e.d0, e.d1, e.d2});
  return r;
}

/// c(S) + d2 over E(S) + d1 over E(S,S^c) + d0 over E(S^c), with the three
/// edge classes built as explicit sets first.
inline double cost(const RawInstance& inst, const std::set<int>& s) {
  std::vector<RawEdge> inside, crossing, outside;
  for (const auto& e : inst.edges) {
    const bool a = s.count(e.u) > 0, b = s.count(e.v) > 0;
    if (a && b)
      inside.push_back(e);
    else if (a != b)
      crossing.push_back(e);
    else
      outside.push_back(e);
  }
  double total = 0;
  for (int v : s) total += inst.c[v];
  for (const auto& e : inside) total += e.d2;
  for (const auto& e : crossing) total += e.d1;
  for (const auto& e : outside) total += e.d0;
  return total;
}

inline std::set<int> set_from_bits(const std::string& bits) {
  std::set<int> s;
  for (int i = 0; i < static_cast<int>(bits.size()); ++i)
    if (bits[i] == '1') s.insert(i);
  return s;
}

inline std::set<int> set_from_mask(std::uint64_t mask, int n) {
  std::set<int> s;
  for (int i = 0; i < n; ++i)
    if (mask >> i & 1) s.insert(i);
  return s;
}

inline double cost_bits(const RawInstance& inst, const std::string& bits) { return cost(inst, set_from_bits(bits)); }

/// Minimum cost by enumerating masks 0..2^n-1.
inline double brute_force_optimum(const RawInstance& inst) {
  const int n = static_cast<int>(inst.c.size());
  double best = std::numeric_limits<double>::infinity();
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    const double c = cost(inst, set_from_mask(mask, n));
    if (c < best) best = c;
  }
  return best;
}

/// True iff no single flip strictly lowers the cost (full recomputation).
inline bool is_one_flip_local_optimum(const RawInstance& inst, const std::string& bits) {
  const double base = cost_bits(inst, bits);
  for (std::size_t i = 0; i < bits.size(); ++i) {
    std::string t = bits;
    t[i] = t[i] == '1' ? '0' : '1';
    if (cost_bits(inst, t) < base) return false;
  }
  return true;
}

inline std::string example1_text() {
  return "4 5\n"
         "10 20 30 40\n"
         "1 2 50 30 20\n"
         "1 3 40 40 30\n"
         "1 4 50 20 20\n"
         "2 3 30 20 10\n"
         "3 4 20 20 20\n";
}

}  // namespace gvcp::oracle
