#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <functional>
#include <initializer_list>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "gvcp/error.hpp"
#include "gvcp/rng.hpp"

namespace gvcp {

/// Undirected edge with its three cost levels: d0 when neither endpoint is
/// selected, d1 when exactly one is, d2 when both are.
struct Edge {
  std::size_t u = 0;
  std::size_t v = 0;
  double d0 = 0;
  double d1 = 0;
  double d2 = 0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

struct Incidence {
  std::size_t neighbor;
  std::size_t edge;
};

/// Membership bitvector over the vertices of an instance (0-based).
class VertexSubset {
 public:
  VertexSubset() = default;
  explicit VertexSubset(std::size_t n, bool all = false) : bits_(n, all ? 1 : 0) {}

  static VertexSubset of(std::size_t n, std::initializer_list<std::size_t> members) {
    VertexSubset s(n);
    for (auto v : members) s.set(v, true);
    return s;
  }

  std::size_t size() const { return bits_.size(); }
  bool contains(std::size_t v) const { return bits_[v] != 0; }
  void set(std::size_t v, bool in) { bits_[v] = in ? 1 : 0; }
  void flip(std::size_t v) { bits_[v] ^= 1; }

  std::size_t count() const { return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), 1)); }

  std::vector<std::size_t> members() const {
    std::vector<std::size_t> out;
    for (std::size_t v = 0; v < bits_.size(); ++v)
      if (bits_[v]) out.push_back(v);
    return out;
  }

  friend bool operator==(const VertexSubset&, const VertexSubset&) = default;

 private:
  std::vector<std::uint8_t> bits_;
};

namespace detail {

inline void check_vertex_cost(double c, std::optional<std::size_t> line = std::nullopt) {
  if (!std::isfinite(c) || c < 0)
    throw Error(ErrorCode::CostOrderingViolation, "vertex cost must be finite and non-negative", line);
}

inline void check_edge(const Edge& e, std::size_t n, std::optional<std::size_t> line = std::nullopt) {
  if (e.u >= n || e.v >= n)
    throw Error(ErrorCode::VertexOutOfRange,
                "edge (" + std::to_string(e.u + 1) + "," + std::to_string(e.v + 1) + ") outside 1.." + std::to_string(n),
                line);
  if (e.u == e.v) throw Error(ErrorCode::SelfLoop, "self-loop on vertex " + std::to_string(e.u + 1), line);
  for (double d : {e.d0, e.d1, e.d2})
    if (!std::isfinite(d)) throw Error(ErrorCode::CostOrderingViolation, "edge cost must be finite", line);
  if (!(e.d0 >= e.d1 && e.d1 >= e.d2 && e.d2 >= 0))
    throw Error(ErrorCode::CostOrderingViolation, "edge costs must satisfy d0 >= d1 >= d2 >= 0", line);
}

inline std::uint64_t edge_key(std::size_t u, std::size_t v) {
  if (u > v) std::swap(u, v);
  return (static_cast<std::uint64_t>(u) << 32) | static_cast<std::uint64_t>(v);
}

}  // namespace detail

/// Immutable GVCP instance. Construction validates every invariant and
/// builds the adjacency lists.
class GvcpInstance {
 public:
  GvcpInstance() = default;

  GvcpInstance(std::vector<double> vertex_costs, std::vector<Edge> edges)
      : vertex_costs_(std::move(vertex_costs)), edges_(std::move(edges)) {
    const std::size_t n = vertex_costs_.size();
    if (n == 0) throw Error(ErrorCode::InvalidParameter, "instance needs at least one vertex");
    for (double c : vertex_costs_) detail::check_vertex_cost(c);
    std::unordered_set<std::uint64_t> seen;
    seen.reserve(edges_.size() * 2);
    for (const auto& e : edges_) {
      detail::check_edge(e, n);
      if (!seen.insert(detail::edge_key(e.u, e.v)).second)
        throw Error(ErrorCode::DuplicateEdge,
                    "duplicate edge (" + std::to_string(e.u + 1) + "," + std::to_string(e.v + 1) + ")");
    }
    adjacency_.assign(n, {});
    for (std::size_t i = 0; i < edges_.size(); ++i) {
      adjacency_[edges_[i].u].push_back({edges_[i].v, i});
      adjacency_[edges_[i].v].push_back({edges_[i].u, i});
    }
  }

  std::size_t n() const { return vertex_costs_.size(); }
  std::size_t m() const { return edges_.size(); }
  double vertex_cost(std::size_t v) const { return vertex_costs_[v]; }
  std::span<const double> vertex_costs() const { return vertex_costs_; }
  std::span<const Edge> edges() const { return edges_; }
  std::span<const Incidence> adjacency(std::size_t v) const { return adjacency_[v]; }

  friend bool operator==(const GvcpInstance& a, const GvcpInstance& b) {
    return a.vertex_costs_ == b.vertex_costs_ && a.edges_ == b.edges_;
  }

 private:
  std::vector<double> vertex_costs_;
  std::vector<Edge> edges_;
  std::vector<std::vector<Incidence>> adjacency_;
};

/// Objective split into its four terms plus the edge-class sizes.
struct CostBreakdown {
  double vertex_cost = 0;    // c(S)
  double inside_cost = 0;    // d2 over E(S)
  double crossing_cost = 0;  // d1 over E(S, S^c)
  double outside_cost = 0;   // d0 over E(S^c)
  std::size_t inside_edges = 0;
  std::size_t crossing_edges = 0;
  std::size_t outside_edges = 0;

  double total() const { return vertex_cost + inside_cost + crossing_cost + outside_cost; }
};

inline void require_length(const GvcpInstance& inst, const VertexSubset& s) {
  if (s.size() != inst.n())
    throw Error(ErrorCode::LengthMismatch,
                "subset has length " + std::to_string(s.size()) + ", instance has " + std::to_string(inst.n()));
}

inline CostBreakdown cost_breakdown(const GvcpInstance& inst, const VertexSubset& s) {
  require_length(inst, s);
  CostBreakdown b;
  for (std::size_t v = 0; v < inst.n(); ++v)
    if (s.contains(v)) b.vertex_cost += inst.vertex_cost(v);
  for (const auto& e : inst.edges()) {
    switch (int(s.contains(e.u)) + int(s.contains(e.v))) {
      case 2: b.inside_cost += e.d2; ++b.inside_edges; break;
      case 1: b.crossing_cost += e.d1; ++b.crossing_edges; break;
      default: b.outside_cost += e.d0; ++b.outside_edges; break;
    }
  }
  return b;
}

/// c(S) + d2(S) + d1(S, S^c) + d0(S^c).
inline double evaluate(const GvcpInstance& inst, const VertexSubset& s) {
  require_length(inst, s);
  double cost = 0;
  for (std::size_t v = 0; v < inst.n(); ++v)
    if (s.contains(v)) cost += inst.vertex_cost(v);
  for (const auto& e : inst.edges()) {
    const int covered = int(s.contains(e.u)) + int(s.contains(e.v));
    cost += covered == 2 ? e.d2 : covered == 1 ? e.d1 : e.d0;
  }
  return cost;
}

/// evaluate(s with v toggled) - evaluate(s), in O(deg(v)). Unchecked variant
/// for hot loops; `Membership` is any callable vertex -> bool.
template <typename Membership>
double flip_delta_unchecked(const GvcpInstance& inst, const Membership& in_set, std::size_t v) {
  double delta = 0;
  if (in_set(v)) {
    delta -= inst.vertex_cost(v);
    for (const auto& inc : inst.adjacency(v)) {
      const Edge& e = inst.edges()[inc.edge];
      delta += in_set(inc.neighbor) ? e.d1 - e.d2 : e.d0 - e.d1;
    }
  } else {
    delta += inst.vertex_cost(v);
    for (const auto& inc : inst.adjacency(v)) {
      const Edge& e = inst.edges()[inc.edge];
      delta += in_set(inc.neighbor) ? e.d2 - e.d1 : e.d1 - e.d0;
    }
  }
  return delta;
}

inline double flip_delta(const GvcpInstance& inst, const VertexSubset& s, std::size_t v) {
  require_length(inst, s);
  if (v >= inst.n())
    throw Error(ErrorCode::VertexOutOfRange, "vertex " + std::to_string(v) + " >= n=" + std::to_string(inst.n()));
  return flip_delta_unchecked(inst, [&](std::size_t x) { return s.contains(x); }, v);
}

// ---------------------------------------------------------------------------
// Text format

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

inline std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

template <typename T>
T parse_number(std::string_view tok, std::size_t line, const char* what) {
  T value{};
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc() || ptr != tok.data() + tok.size())
    throw Error(ErrorCode::MalformedLine, "bad " + std::string(what) + " '" + std::string(tok) + "'", line);
  return value;
}

inline std::string format_cost(double x) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), ptr);
}

}  // namespace detail

inline GvcpInstance parse_instance(std::string_view text) {
  // Content lines (comments and blanks stripped) paired with 1-based line numbers.
  std::vector<std::pair<std::string_view, std::size_t>> lines;
  std::size_t line_no = 0;
  for (std::size_t pos = 0; pos <= text.size();) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    ++line_no;
    auto line = text.substr(pos, nl - pos);
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (!line.empty()) lines.emplace_back(line, line_no);
    pos = nl + 1;
  }

  if (lines.empty()) throw Error(ErrorCode::MalformedLine, "missing header 'n m'", line_no);
  auto header = detail::split_ws(lines[0].first);
  if (header.size() != 2) throw Error(ErrorCode::MalformedLine, "header must be 'n m'", lines[0].second);
  const auto n = detail::parse_number<std::size_t>(header[0], lines[0].second, "vertex count");
  const auto m = detail::parse_number<std::size_t>(header[1], lines[0].second, "edge count");
  if (n == 0) throw Error(ErrorCode::MalformedLine, "vertex count must be positive", lines[0].second);

  if (lines.size() < 2) throw Error(ErrorCode::MalformedLine, "missing vertex cost line", line_no);
  auto cost_tokens = detail::split_ws(lines[1].first);
  if (cost_tokens.size() != n)
    throw Error(ErrorCode::MalformedLine,
                "expected " + std::to_string(n) + " vertex costs, got " + std::to_string(cost_tokens.size()),
                lines[1].second);
  std::vector<double> costs;
  costs.reserve(n);
  for (auto tok : cost_tokens) {
    costs.push_back(detail::parse_number<double>(tok, lines[1].second, "vertex cost"));
    detail::check_vertex_cost(costs.back(), lines[1].second);
  }

  if (lines.size() != 2 + m) {
    const std::size_t at = lines.size() < 2 + m ? line_no : lines[2 + m].second;
    throw Error(ErrorCode::MalformedLine,
                "expected " + std::to_string(m) + " edge lines, got " + std::to_string(lines.size() - 2), at);
  }

  std::vector<Edge> edges;
  edges.reserve(m);
  std::unordered_set<std::uint64_t> seen;
  for (std::size_t i = 0; i < m; ++i) {
    const auto [content, ln] = lines[2 + i];
    auto tok = detail::split_ws(content);
    if (tok.size() != 5) throw Error(ErrorCode::MalformedLine, "edge line must be 'u v d0 d1 d2'", ln);
    const auto u = detail::parse_number<std::size_t>(tok[0], ln, "vertex id");
    const auto v = detail::parse_number<std::size_t>(tok[1], ln, "vertex id");
    if (u < 1 || v < 1 || u > n || v > n)
      throw Error(ErrorCode::VertexOutOfRange, "vertex ids must lie in 1.." + std::to_string(n), ln);
    Edge e{u - 1, v - 1, detail::parse_number<double>(tok[2], ln, "d0"), detail::parse_number<double>(tok[3], ln, "d1"),
           detail::parse_number<double>(tok[4], ln, "d2")};
    detail::check_edge(e, n, ln);
    if (!seen.insert(detail::edge_key(e.u, e.v)).second)
      throw Error(ErrorCode::DuplicateEdge, "duplicate edge (" + std::to_string(u) + "," + std::to_string(v) + ")", ln);
    edges.push_back(e);
  }
  return GvcpInstance(std::move(costs), std::move(edges));
}

/// Canonical text form; parse_instance(write_instance(x)) == x.
inline std::string write_instance(const GvcpInstance& inst) {
  std::string out = std::to_string(inst.n()) + " " + std::to_string(inst.m()) + "\n";
  for (std::size_t v = 0; v < inst.n(); ++v) {
    if (v) out += ' ';
    out += detail::format_cost(inst.vertex_cost(v));
  }
  out += '\n';
  for (const auto& e : inst.edges()) {
    out += std::to_string(e.u + 1) + ' ' + std::to_string(e.v + 1) + ' ' + detail::format_cost(e.d0) + ' ' +
           detail::format_cost(e.d1) + ' ' + detail::format_cost(e.d2) + '\n';
  }
  return out;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::InvalidParameter, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::InvalidParameter, "cannot write '" + path + "'");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error(ErrorCode::InvalidParameter, "write failed for '" + path + "'");
}

/// Random instance: each pair {u,v} is an edge with probability `edge_prob`;
/// all costs are integers in [0, cost_max], edge triples sorted descending.
inline GvcpInstance generate_instance(std::size_t n, double edge_prob, std::uint64_t cost_max, std::uint64_t seed) {
  if (n < 1) throw Error(ErrorCode::InvalidParameter, "n must be >= 1");
  if (!(edge_prob > 0 && edge_prob <= 1)) throw Error(ErrorCode::InvalidParameter, "edge probability must be in (0, 1]");
  if (cost_max < 1) throw Error(ErrorCode::InvalidParameter, "cost_max must be positive");

  RngStream rng = derive_rng_stream(seed, 0, StreamRole::Init, 0x67656e);
  auto draw_cost = [&] { return static_cast<double>(uniform_below(rng, cost_max + 1)); };

  std::vector<double> costs(n);
  for (auto& c : costs) c = draw_cost();
  std::vector<Edge> edges;
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = u + 1; v < n; ++v) {
      if (!bernoulli(rng, edge_prob)) continue;
      std::array<double, 3> d{draw_cost(), draw_cost(), draw_cost()};
      std::sort(d.begin(), d.end(), std::greater<>());
      edges.push_back({u, v, d[0], d[1], d[2]});
    }
  }
  return GvcpInstance(std::move(costs), std::move(edges));
}

}  // namespace gvcp
