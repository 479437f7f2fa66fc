#pragma once

#include <algorithm>
#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "bnsynth/dataset.hpp"
#include "bnsynth/error.hpp"

namespace bnsynth {

// Parent bitmask per node. Row i of the adjacency matrix: bit j set means
// X_j is a parent of X_i.
using ParentRows = std::array<VarSet, kMaxVariables>;

inline VarSet all_nodes(int d) { return d >= 32 ? ~VarSet{0} : ((VarSet{1} << d) - 1); }

// Kahn's procedure on bitmask rows; true iff every node can be removed.
inline bool rows_acyclic(std::span<const VarSet> rows) {
  const int d = static_cast<int>(rows.size());
  VarSet remaining = all_nodes(d);
  while (remaining) {
    VarSet ready = 0;
    for (VarSet r = remaining; r; r &= r - 1) {
      const int i = std::countr_zero(r);
      if ((rows[static_cast<std::size_t>(i)] & remaining) == 0) ready |= VarSet{1} << i;
    }
    if (!ready) return false;
    remaining &= ~ready;
  }
  return true;
}

// Nodes reachable from `node` along parent -> child edges (node excluded).
inline VarSet descendants(std::span<const VarSet> rows, int node) {
  const int d = static_cast<int>(rows.size());
  VarSet found = 0;
  VarSet frontier = VarSet{1} << node;
  while (frontier) {
    VarSet next = 0;
    for (int c = 0; c < d; ++c)
      if ((rows[static_cast<std::size_t>(c)] & frontier) && !contains(found, c)) next |= VarSet{1} << c;
    found |= next;
    frontier = next;
  }
  return found;
}

class Dag {
 public:
  Dag() = default;

  // Empty graph on d nodes.
  explicit Dag(int d) : d_(d) {
    if (d < 1 || d > kMaxVariables) usage_error("DAG size must be between 1 and 32");
  }

  // Validated construction from parent rows.
  static Dag from_rows(std::span<const VarSet> rows) {
    Dag g(static_cast<int>(rows.size()));
    for (int i = 0; i < g.d_; ++i) {
      const VarSet r = rows[static_cast<std::size_t>(i)];
      if (contains(r, i)) usage_error("adjacency has a self-loop at node " + std::to_string(i));
      if (r & ~all_nodes(g.d_)) usage_error("adjacency references a node out of range");
      g.rows_[static_cast<std::size_t>(i)] = r;
    }
    if (!rows_acyclic(g.rows())) usage_error("adjacency contains a directed cycle");
    return g;
  }

  // Construction from a d x d 0/1 matrix, entry (i, j) = 1 meaning j -> i.
  static Dag from_matrix(const std::vector<std::vector<int>>& m) {
    std::vector<VarSet> rows(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (m[i].size() != m.size()) usage_error("adjacency matrix must be square");
      for (std::size_t j = 0; j < m.size(); ++j)
        if (m[i][j]) rows[i] |= VarSet{1} << j;
    }
    return from_rows(rows);
  }

  // Caller guarantees the rows form a DAG on d nodes.
  static Dag trusted(int d, const ParentRows& rows) {
    Dag g;
    g.d_ = d;
    g.rows_ = rows;
    return g;
  }

  int d() const noexcept { return d_; }
  VarSet parents(int node) const noexcept { return rows_[static_cast<std::size_t>(node)]; }
  bool has_edge(int from, int to) const noexcept { return contains(parents(to), from); }
  std::span<const VarSet> rows() const noexcept { return {rows_.data(), static_cast<std::size_t>(d_)}; }
  const ParentRows& raw_rows() const noexcept { return rows_; }

  int edge_count() const {
    int e = 0;
    for (VarSet r : rows()) e += set_size(r);
    return e;
  }

  int max_in_degree() const {
    int k = 0;
    for (VarSet r : rows()) k = std::max(k, set_size(r));
    return k;
  }

  // Returns a copy with node's parent set replaced; throws if that makes a cycle.
  Dag with_parents(int node, VarSet parents) const {
    ParentRows r = rows_;
    r[static_cast<std::size_t>(node)] = parents;
    return from_rows(std::span<const VarSet>(r.data(), static_cast<std::size_t>(d_)));
  }

  friend bool operator==(const Dag& a, const Dag& b) {
    return a.d_ == b.d_ && std::equal(a.rows().begin(), a.rows().end(), b.rows().begin());
  }

 private:
  int d_ = 0;
  ParentRows rows_{};
};

struct DagHash {
  std::size_t operator()(const Dag& g) const noexcept {
    std::uint64_t h = splitmix_fold(static_cast<std::uint64_t>(g.d()));
    for (VarSet r : g.rows()) h = splitmix_fold(h ^ r);
    return static_cast<std::size_t>(h);
  }

 private:
  static std::uint64_t splitmix_fold(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
  }
};

// Acyclicity test for a d x d 0/1 matrix (entry (i, j) = 1: j is a parent of i).
inline bool is_acyclic(const std::vector<std::vector<int>>& m) {
  std::vector<VarSet> rows(m.size());
  if (m.size() > static_cast<std::size_t>(kMaxVariables)) usage_error("matrix larger than 32 nodes");
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m[i].size() != m.size()) usage_error("adjacency matrix must be square");
    if (m[i][i]) usage_error("self-loop at node " + std::to_string(i));
    for (std::size_t j = 0; j < m.size(); ++j)
      if (m[i][j]) rows[i] |= VarSet{1} << j;
  }
  return rows_acyclic(rows);
}

// Kahn order, lowest available index first.
inline std::vector<int> topological_order(const Dag& g) {
  std::vector<int> order;
  order.reserve(static_cast<std::size_t>(g.d()));
  VarSet placed = 0;
  while (static_cast<int>(order.size()) < g.d()) {
    for (int i = 0; i < g.d(); ++i) {
      if (!contains(placed, i) && (g.parents(i) & ~placed) == 0) {
        order.push_back(i);
        placed |= VarSet{1} << i;
        break;
      }
    }
  }
  return order;
}

inline constexpr int kMaxEnumerationNodes = 5;

// Visit every DAG on d nodes with at most max_parents parents per node, in
// lexicographic order of the parent-row tuple.
template <typename Visitor>
void for_each_dag(int d, int max_parents, Visitor&& visit) {
  if (d < 1) usage_error("enumerate_dags: d must be at least 1");
  if (d > kMaxEnumerationNodes)
    usage_error("enumerate_dags: d = " + std::to_string(d) +
                " exceeds the enumeration limit of 5 nodes; use the MCMC sampler instead");
  if (max_parents < 0 || max_parents > d - 1) usage_error("enumerate_dags: max_parents must lie in [0, d-1]");
  std::vector<std::vector<VarSet>> options(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) {
    const VarSet others = all_nodes(d) & ~(VarSet{1} << i);
    for (VarSet s = 0; s <= all_nodes(d); ++s)
      if ((s & ~others) == 0 && set_size(s) <= max_parents) options[static_cast<std::size_t>(i)].push_back(s);
  }
  ParentRows rows{};
  std::span<const VarSet> view(rows.data(), static_cast<std::size_t>(d));
  // Prune as soon as the rows placed so far (the rest empty) contain a cycle.
  std::function<void(int)> recurse = [&](int i) {
    if (i == d) {
      visit(Dag::trusted(d, rows));
      return;
    }
    for (VarSet s : options[static_cast<std::size_t>(i)]) {
      rows[static_cast<std::size_t>(i)] = s;
      if (rows_acyclic(view)) recurse(i + 1);
    }
    rows[static_cast<std::size_t>(i)] = 0;
  };
  recurse(0);
}

inline std::vector<Dag> enumerate_dags(int d, int max_parents) {
  std::vector<Dag> out;
  for_each_dag(d, max_parents, [&out](const Dag& g) { out.push_back(g); });
  return out;
}

using BigInt = boost::multiprecision::cpp_int;

// Number of labeled DAGs on d nodes:
//   a_0 = 1,  a_n = sum_{k=1..n} (-1)^(k+1) C(n,k) 2^(k(n-k)) a_(n-k).
inline BigInt count_dags(int d) {
  if (d < 1) usage_error("count_dags: d must be at least 1");
  std::vector<BigInt> a(static_cast<std::size_t>(d) + 1);
  a[0] = 1;
  for (int n = 1; n <= d; ++n) {
    BigInt total = 0;
    BigInt binom = 1;
    for (int k = 1; k <= n; ++k) {
      binom = binom * (n - k + 1) / k;
      BigInt term = binom * (BigInt(1) << (k * (n - k))) * a[static_cast<std::size_t>(n - k)];
      if (k % 2 == 1) total += term; else total -= term;
    }
    a[static_cast<std::size_t>(n)] = total;
  }
  return a[static_cast<std::size_t>(d)];
}

// Decimal rendering with comma thousands separators.
inline std::string with_separators(const BigInt& v) {
  std::string digits = v.str();
  std::string out;
  const std::size_t lead = digits.size() % 3 == 0 ? 3 : digits.size() % 3;
  out += digits.substr(0, lead);
  for (std::size_t i = lead; i < digits.size(); i += 3) {
    out += ',';
    out += digits.substr(i, 3);
  }
  return out;
}

// Hex encoding of the adjacency matrix: the d*d entries in row-major order
// (entry (i, j) = 1 iff j is a parent of i) are read as a bit string, most
// significant bit first, zero-padded on the right to a multiple of 4 bits and
// written as ceil(d*d / 4) lowercase hex digits.
inline std::string encode(const Dag& g) {
  const int d = g.d();
  const int bits = d * d;
  const int digits = (bits + 3) / 4;
  std::string out(static_cast<std::size_t>(digits), '0');
  for (int pos = 0; pos < bits; ++pos) {
    const int i = pos / d;
    const int j = pos % d;
    if (!g.has_edge(j, i)) continue;
    auto& ch = out[static_cast<std::size_t>(pos / 4)];
    int v = (ch <= '9') ? ch - '0' : ch - 'a' + 10;
    v |= 8 >> (pos % 4);
    ch = static_cast<char>(v < 10 ? '0' + v : 'a' + v - 10);
  }
  return out;
}

inline Dag decode(std::string_view hex, int d) {
  if (d < 1 || d > kMaxVariables) usage_error("decode: d must be between 1 and 32");
  const int bits = d * d;
  const int digits = (bits + 3) / 4;
  if (static_cast<int>(hex.size()) != digits)
    usage_error("decode: expected " + std::to_string(digits) + " hex digits for d = " + std::to_string(d) +
                ", got " + std::to_string(hex.size()));
  std::vector<VarSet> rows(static_cast<std::size_t>(d), 0);
  for (int k = 0; k < digits; ++k) {
    const char c = hex[static_cast<std::size_t>(k)];
    int v;
    if (c >= '0' && c <= '9') v = c - '0';
    else if (c >= 'a' && c <= 'f') v = c - 'a' + 10;
    else if (c >= 'A' && c <= 'F') v = c - 'A' + 10;
    else usage_error(std::string("decode: invalid hex digit '") + c + "'");
    for (int b = 0; b < 4; ++b) {
      if (!((v >> (3 - b)) & 1)) continue;
      const int pos = 4 * k + b;
      if (pos >= bits) usage_error("decode: nonzero padding bits");
      rows[static_cast<std::size_t>(pos / d)] |= VarSet{1} << (pos % d);
    }
  }
  return Dag::from_rows(rows);
}

// Markov-equivalence key: skeleton plus v-structures (a -> c <- b with a, b
// non-adjacent). Two DAGs are Markov equivalent iff their keys are equal.
struct EquivalenceKey {
  std::vector<std::pair<int, int>> skeleton;     // (a, b), a < b, sorted
  std::vector<std::array<int, 3>> v_structures;  // (a, c, b): a -> c <- b, a < b, sorted

  auto operator<=>(const EquivalenceKey&) const = default;
  bool operator==(const EquivalenceKey&) const = default;

  // "0-1,1-2|0>2<1"; either part may be empty.
  std::string to_string() const {
    std::string out;
    for (std::size_t i = 0; i < skeleton.size(); ++i) {
      if (i) out += ',';
      out += std::to_string(skeleton[i].first) + '-' + std::to_string(skeleton[i].second);
    }
    out += '|';
    for (std::size_t i = 0; i < v_structures.size(); ++i) {
      if (i) out += ',';
      const auto& v = v_structures[i];
      out += std::to_string(v[0]) + '>' + std::to_string(v[1]) + '<' + std::to_string(v[2]);
    }
    return out;
  }
};

inline EquivalenceKey equivalence_key(const Dag& g) {
  EquivalenceKey key;
  const int d = g.d();
  auto adjacent = [&g](int a, int b) { return g.has_edge(a, b) || g.has_edge(b, a); };
  for (int a = 0; a < d; ++a)
    for (int b = a + 1; b < d; ++b)
      if (adjacent(a, b)) key.skeleton.emplace_back(a, b);
  for (int c = 0; c < d; ++c) {
    const auto pa = members(g.parents(c));
    for (std::size_t x = 0; x < pa.size(); ++x)
      for (std::size_t y = x + 1; y < pa.size(); ++y)
        if (!adjacent(pa[x], pa[y])) key.v_structures.push_back({pa[x], c, pa[y]});
  }
  std::sort(key.v_structures.begin(), key.v_structures.end());
  return key;
}

// Key after relabeling node i as perm[i].
inline EquivalenceKey permute_key(const EquivalenceKey& key, std::span<const int> perm) {
  EquivalenceKey out;
  for (auto [a, b] : key.skeleton) {
    int x = perm[static_cast<std::size_t>(a)], y = perm[static_cast<std::size_t>(b)];
    out.skeleton.emplace_back(std::min(x, y), std::max(x, y));
  }
  for (const auto& v : key.v_structures) {
    int x = perm[static_cast<std::size_t>(v[0])], y = perm[static_cast<std::size_t>(v[2])];
    out.v_structures.push_back({std::min(x, y), perm[static_cast<std::size_t>(v[1])], std::max(x, y)});
  }
  std::sort(out.skeleton.begin(), out.skeleton.end());
  std::sort(out.v_structures.begin(), out.v_structures.end());
  return out;
}

// DAG after relabeling node i as perm[i].
inline Dag permute_dag(const Dag& g, std::span<const int> perm) {
  std::vector<VarSet> rows(static_cast<std::size_t>(g.d()), 0);
  for (int i = 0; i < g.d(); ++i)
    for (int j : members(g.parents(i)))
      rows[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])] |= VarSet{1} << perm[static_cast<std::size_t>(j)];
  return Dag::from_rows(rows);
}

}  // namespace bnsynth
