#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "lrcd/gaussian_lm.hpp"

namespace lrcd {

enum class Symbol { EType, EpsType };  // e^{h_k} vs eps_k factors

// A (not necessarily rectangular) two-way table of indices. Entries are
// addressed by a flat id in row-major order; each carries a symbol tag.
struct TwoWayTable {
  std::vector<std::vector<Symbol>> rows;

  static TwoWayTable lmsd(int m) {
    if (m < 1) throw std::invalid_argument("TwoWayTable::lmsd: m must be >= 1");
    TwoWayTable t;
    t.rows.assign(static_cast<std::size_t>(m), {Symbol::EType, Symbol::EpsType});
    return t;
  }

  std::size_t total_entries() const {
    std::size_t n = 0;
    for (const auto& r : rows) n += r.size();
    return n;
  }
  int entry_row(int id) const {
    int rem = id;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rem < static_cast<int>(rows[i].size())) return static_cast<int>(i);
      rem -= static_cast<int>(rows[i].size());
    }
    throw std::out_of_range("TwoWayTable::entry_row: bad id");
  }
  Symbol entry_symbol(int id) const {
    int rem = id;
    for (const auto& row : rows) {
      if (rem < static_cast<int>(row.size())) return row[static_cast<std::size_t>(rem)];
      rem -= static_cast<int>(row.size());
    }
    throw std::out_of_range("TwoWayTable::entry_symbol: bad id");
  }
  void validate() const {
    if (rows.empty()) throw std::invalid_argument("TwoWayTable: needs at least one row");
    for (const auto& r : rows)
      if (r.empty()) throw std::invalid_argument("TwoWayTable: empty row");
  }
};

// Disjoint blocks of entry ids covering the table.
struct Partition {
  std::vector<std::vector<int>> blocks;

  void validate(std::size_t n_entries) const {
    std::vector<char> seen(n_entries, 0);
    std::size_t covered = 0;
    for (const auto& b : blocks) {
      if (b.empty()) throw std::invalid_argument("Partition: empty block");
      for (int id : b) {
        if (id < 0 || static_cast<std::size_t>(id) >= n_entries || seen[static_cast<std::size_t>(id)])
          throw std::invalid_argument("Partition: blocks must be disjoint and in range");
        seen[static_cast<std::size_t>(id)] = 1;
        ++covered;
      }
    }
    if (covered != n_entries) throw std::invalid_argument("Partition: blocks must cover the table");
  }
};

// Visits every set partition of {0..n-1} via restricted-growth strings.
inline void for_each_partition(std::size_t n, const std::function<void(const std::vector<int>&)>& fn) {
  if (n == 0) return;
  std::vector<int> rgs(n, 0), maxv(n, 0);
  for (;;) {
    fn(rgs);
    std::size_t i = n;
    for (;;) {
      if (i == 1) return;
      --i;
      if (rgs[i] <= maxv[i - 1]) break;
    }
    ++rgs[i];
    maxv[i] = std::max(maxv[i - 1], rgs[i]);
    for (std::size_t j = i + 1; j < n; ++j) {
      rgs[j] = 0;
      maxv[j] = maxv[i];
    }
  }
}

inline Partition partition_from_rgs(const std::vector<int>& rgs) {
  Partition p;
  const int nb = rgs.empty() ? 0 : *std::max_element(rgs.begin(), rgs.end()) + 1;
  p.blocks.assign(static_cast<std::size_t>(nb), {});
  for (std::size_t i = 0; i < rgs.size(); ++i)
    p.blocks[static_cast<std::size_t>(rgs[i])].push_back(static_cast<int>(i));
  return p;
}

// Exhaustive enumeration; the count equals the Bell number of the entry count.
// Guarded at 12 entries (Bell(12) is ~4.2e6; beyond that exact enumeration
// stops being a lab exercise).
inline std::vector<Partition> enumerate_partitions(const TwoWayTable& table) {
  table.validate();
  const std::size_t n = table.total_entries();
  if (n > 12) throw std::invalid_argument("enumerate_partitions: more than 12 entries");
  std::vector<Partition> out;
  for_each_partition(n, [&](const std::vector<int>& rgs) { out.push_back(partition_from_rgs(rgs)); });
  return out;
}

// Two blocks hook if they contain entries from the same row; the partition is
// indecomposable when the hook graph is connected.
inline bool is_indecomposable(const Partition& partition, const TwoWayTable& table) {
  table.validate();
  const std::size_t n = table.total_entries();
  partition.validate(n);
  const std::size_t nb = partition.blocks.size();
  if (nb <= 1) return true;

  std::vector<int> parent(nb);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  };
  auto unite = [&](int a, int b) { parent[static_cast<std::size_t>(find(a))] = find(b); };

  std::vector<int> block_of(n, -1);
  for (std::size_t b = 0; b < nb; ++b)
    for (int id : partition.blocks[b]) block_of[static_cast<std::size_t>(id)] = static_cast<int>(b);

  int id = 0;
  for (const auto& row : table.rows) {
    const int first = block_of[static_cast<std::size_t>(id)];
    for (std::size_t j = 0; j < row.size(); ++j, ++id) unite(first, block_of[static_cast<std::size_t>(id)]);
  }
  const int root = find(0);
  for (std::size_t b = 1; b < nb; ++b)
    if (find(static_cast<int>(b)) != root) return false;
  return true;
}

// Indecomposable partitions of the m x 2 LMSD table with no block mixing
// e-type and eps-type entries, grouped by L = number of blocks holding e-type
// symbols.
struct AdmissibleGroups {
  int m = 0;
  std::map<int, std::vector<Partition>> by_group;  // L -> partitions

  std::size_t total() const {
    std::size_t n = 0;
    for (const auto& [L, v] : by_group) n += v.size();
    return n;
  }
};

inline AdmissibleGroups admissible_partitions(int m) {
  if (m < 2 || m > 6) throw std::invalid_argument("admissible_partitions: m must be in [2, 6]");
  const TwoWayTable table = TwoWayTable::lmsd(m);
  const std::size_t n = table.total_entries();
  AdmissibleGroups out;
  out.m = m;
  for_each_partition(n, [&](const std::vector<int>& rgs) {
    Partition p = partition_from_rgs(rgs);
    int e_blocks = 0;
    for (const auto& b : p.blocks) {
      bool has_e = false, has_eps = false;
      for (int id : b) {
        if (table.entry_symbol(id) == Symbol::EType) has_e = true;
        else has_eps = true;
      }
      if (has_e && has_eps) return;  // mixed block: the component cumulant vanishes
      if (has_e) ++e_blocks;
    }
    if (!is_indecomposable(p, table)) return;
    out.by_group[e_blocks].push_back(std::move(p));
  });
  return out;
}

// Brillinger's product-cumulant formula: the joint cumulant of the row
// products is the sum over indecomposable partitions of products of component
// cumulants supplied by the oracle.
inline double product_cumulant(const TwoWayTable& table,
                               const std::function<double(const std::vector<int>&)>& component_cumulant) {
  table.validate();
  const std::size_t n = table.total_entries();
  if (n > 12) throw std::invalid_argument("product_cumulant: more than 12 entries");
  double total = 0.0;
  for_each_partition(n, [&](const std::vector<int>& rgs) {
    Partition p = partition_from_rgs(rgs);
    if (!is_indecomposable(p, table)) return;
    double prod = 1.0;
    for (const auto& b : p.blocks) {
      prod *= component_cumulant(b);
      if (prod == 0.0) break;
    }
    total += prod;
  });
  return total;
}

// cum(e^{h_k}, e^{h_s}) = e^{sigma_h^2} (e^{r_lag} - 1).
inline double lognormal_pair_cumulant(const LongMemoryGaussianSpec& spec, long lag) {
  const double sh2 = variance_h(spec);
  return std::exp(sh2) * (std::exp(autocovariance_h(spec, lag)) - 1.0);
}

// Labeled tree on vertices 0..m-1 with exactly m-1 edges, connected.
struct TreeGraph {
  int vertices = 0;
  std::vector<std::pair<int, int>> edges;
  std::vector<int> prufer;  // optional encoding; empty when not derived

  void validate() const {
    if (vertices < 2) throw std::invalid_argument("TreeGraph: need at least 2 vertices");
    if (edges.size() != static_cast<std::size_t>(vertices - 1))
      throw std::invalid_argument("TreeGraph: a tree on m vertices has m-1 edges");
    std::vector<int> parent(static_cast<std::size_t>(vertices));
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int x) {
      while (parent[static_cast<std::size_t>(x)] != x) {
        parent[static_cast<std::size_t>(x)] =
            parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
        x = parent[static_cast<std::size_t>(x)];
      }
      return x;
    };
    for (auto [u, v] : edges) {
      if (u < 0 || v < 0 || u >= vertices || v >= vertices || u == v)
        throw std::invalid_argument("TreeGraph: bad edge");
      const int ru = find(u), rv = find(v);
      if (ru == rv) throw std::invalid_argument("TreeGraph: cycle detected");
      parent[static_cast<std::size_t>(ru)] = rv;
    }
  }
};

inline TreeGraph tree_from_prufer(const std::vector<int>& prufer, int m) {
  TreeGraph t;
  t.vertices = m;
  t.prufer = prufer;
  std::vector<int> degree(static_cast<std::size_t>(m), 1);
  for (int v : prufer) ++degree[static_cast<std::size_t>(v)];
  std::vector<char> used(static_cast<std::size_t>(m), 0);
  for (int v : prufer) {
    int leaf = -1;
    for (int u = 0; u < m; ++u)
      if (degree[static_cast<std::size_t>(u)] == 1 && !used[static_cast<std::size_t>(u)]) {
        leaf = u;
        break;
      }
    t.edges.emplace_back(leaf, v);
    used[static_cast<std::size_t>(leaf)] = 1;
    if (--degree[static_cast<std::size_t>(v)] == 1) {
      // v may become the next leaf; nothing else to do
    }
  }
  int a = -1, b = -1;
  for (int u = 0; u < m; ++u)
    if (!used[static_cast<std::size_t>(u)] && degree[static_cast<std::size_t>(u)] == 1) {
      if (a < 0) a = u;
      else b = u;
    }
  t.edges.emplace_back(a, b);
  t.validate();
  return t;
}

// All m^{m-2} labeled trees via Prufer sequences.
inline std::vector<TreeGraph> enumerate_trees(int m) {
  if (m < 2 || m > 7) throw std::invalid_argument("enumerate_trees: m must be in [2, 7]");
  std::vector<TreeGraph> out;
  if (m == 2) {
    TreeGraph t;
    t.vertices = 2;
    t.edges.emplace_back(0, 1);
    t.validate();
    out.push_back(std::move(t));
    return out;
  }
  std::vector<int> seq(static_cast<std::size_t>(m - 2), 0);
  for (;;) {
    out.push_back(tree_from_prufer(seq, m));
    int i = m - 3;
    while (i >= 0 && seq[static_cast<std::size_t>(i)] == m - 1) {
      seq[static_cast<std::size_t>(i)] = 0;
      --i;
    }
    if (i < 0) break;
    ++seq[static_cast<std::size_t>(i)];
  }
  return out;
}

namespace detail {

inline std::vector<double> edge_weights(const LongMemoryGaussianSpec& spec, std::size_t n) {
  // g(delta) = |e^{r_delta} - 1| for delta = 0..n-1
  std::vector<double> g(n);
  if (spec.d > 0.0) {
    double r = autocovariance_h(spec, 0);
    for (std::size_t s = 0; s < n; ++s) {
      g[s] = std::abs(std::exp(r) - 1.0);
      r = r * (static_cast<double>(s) + spec.d) / (static_cast<double>(s) + 1.0 - spec.d);
    }
  } else {
    for (std::size_t s = 0; s < n; ++s)
      g[s] = std::abs(std::exp(autocovariance_h(spec, static_cast<long>(s))) - 1.0);
  }
  return g;
}

}  // namespace detail

// Exact M-fold sum over k_1..k_M in [1, n] of the product of
// |e^{r_{|k_i - k_j|}} - 1| along the tree edges, evaluated by iterative leaf
// elimination: each leaf's index is summed out against its neighbor in O(n^2),
// for O(M n^2) total instead of O(n^M).
inline double tree_sum(const LongMemoryGaussianSpec& spec, const TreeGraph& tree, std::size_t n) {
  tree.validate();
  if (tree.vertices > 6) throw std::invalid_argument("tree_sum: tree size must be <= 6");
  if (n > (1u << 13)) throw std::invalid_argument("tree_sum: n must be <= 2^13");
  if (n == 0) throw std::invalid_argument("tree_sum: n must be >= 1");
  const std::vector<double> g = detail::edge_weights(spec, n);
  const int m = tree.vertices;

  std::vector<std::vector<int>> adj(static_cast<std::size_t>(m));
  for (auto [u, v] : tree.edges) {
    adj[static_cast<std::size_t>(u)].push_back(v);
    adj[static_cast<std::size_t>(v)].push_back(u);
  }
  // root at 0; children before parents via BFS order
  std::vector<int> order, parent(static_cast<std::size_t>(m), -1);
  order.reserve(static_cast<std::size_t>(m));
  order.push_back(0);
  for (std::size_t qi = 0; qi < order.size(); ++qi) {
    const int u = order[qi];
    for (int v : adj[static_cast<std::size_t>(u)])
      if (v != parent[static_cast<std::size_t>(u)]) {
        parent[static_cast<std::size_t>(v)] = u;
        order.push_back(v);
      }
  }

  // f[v][k]: product over v's eliminated subtree, as a function of v's index k
  std::vector<std::vector<double>> f(static_cast<std::size_t>(m), std::vector<double>(n, 1.0));
  for (std::size_t oi = order.size(); oi-- > 1;) {
    const int v = order[oi];
    const int p = parent[static_cast<std::size_t>(v)];
    std::vector<double> g_into_parent(n, 0.0);
    for (std::size_t kp = 0; kp < n; ++kp) {
      double acc = 0.0;
      const auto& fv = f[static_cast<std::size_t>(v)];
      for (std::size_t kv = 0; kv < n; ++kv)
        acc += g[kp >= kv ? kp - kv : kv - kp] * fv[kv];
      g_into_parent[kp] = acc;
    }
    auto& fp = f[static_cast<std::size_t>(p)];
    for (std::size_t k = 0; k < n; ++k) fp[k] *= g_into_parent[k];
  }
  double total = 0.0;
  for (std::size_t k = 0; k < n; ++k) total += f[0][k];
  return total;
}

// Reference evaluation by direct nested summation; the independent oracle for
// tree_sum on small instances.
inline double tree_sum_naive(const LongMemoryGaussianSpec& spec, const TreeGraph& tree, std::size_t n) {
  tree.validate();
  if (tree.vertices > 3) throw std::invalid_argument("tree_sum_naive: only M <= 3");
  if (n > 64) throw std::invalid_argument("tree_sum_naive: only n <= 64");
  const std::vector<double> g = detail::edge_weights(spec, n);
  const int m = tree.vertices;
  double total = 0.0;
  std::vector<std::size_t> k(static_cast<std::size_t>(m), 0);
  for (;;) {
    double prod = 1.0;
    for (auto [u, v] : tree.edges) {
      const std::size_t a = k[static_cast<std::size_t>(u)], b = k[static_cast<std::size_t>(v)];
      prod *= g[a >= b ? a - b : b - a];
    }
    total += prod;
    int i = m - 1;
    while (i >= 0 && k[static_cast<std::size_t>(i)] == n - 1) {
      k[static_cast<std::size_t>(i)] = 0;
      --i;
    }
    if (i < 0) break;
    ++k[static_cast<std::size_t>(i)];
  }
  return total;
}

struct CumulantEstimate {
  double value = 0.0;
  double se = 0.0;
  int order = 0;
  std::size_t samples = 0;
};

namespace detail {

// Joint central product moments from raw product sums over all non-empty
// column subsets (bitmask-indexed), n-normalized.
inline double central_moment(const std::vector<double>& raw_mean, unsigned mask,
                             const std::vector<double>& mu) {
  // sum over subsets T of mask: E[prod_T X] * prod_{mask\T} (-mu)
  double total = 0.0;
  unsigned t = mask;
  for (;;) {
    double term = (t == 0) ? 1.0 : raw_mean[t];
    unsigned rest = mask & ~t;
    while (rest) {
      const unsigned bit = rest & (~rest + 1);
      unsigned idx = 0, b = bit;
      while (b >>= 1) ++idx;
      term *= -mu[idx];
      rest ^= bit;
    }
    total += term;
    if (t == 0) break;
    t = (t - 1) & mask;
  }
  return total;
}

// Unbiased joint k-statistic of the given columns (order = column count) from
// subset raw means. Orders 1..4.
inline double k_statistic(const std::vector<double>& raw_mean, int order, double n) {
  std::vector<double> mu(static_cast<std::size_t>(order));
  for (int i = 0; i < order; ++i) mu[static_cast<std::size_t>(i)] = raw_mean[1u << i];
  const unsigned full = (1u << order) - 1;
  switch (order) {
    case 1:
      return mu[0];
    case 2:
      return n / (n - 1.0) * central_moment(raw_mean, full, mu);
    case 3:
      return n * n / ((n - 1.0) * (n - 2.0)) * central_moment(raw_mean, full, mu);
    case 4: {
      const double m1234 = central_moment(raw_mean, full, mu);
      const double m12 = central_moment(raw_mean, 0b0011, mu);
      const double m34 = central_moment(raw_mean, 0b1100, mu);
      const double m13 = central_moment(raw_mean, 0b0101, mu);
      const double m24 = central_moment(raw_mean, 0b1010, mu);
      const double m14 = central_moment(raw_mean, 0b1001, mu);
      const double m23 = central_moment(raw_mean, 0b0110, mu);
      const double pairs = m12 * m34 + m13 * m24 + m14 * m23;
      return n * n / ((n - 1.0) * (n - 2.0) * (n - 3.0)) * ((n + 1.0) * m1234 - (n - 1.0) * pairs);
    }
    default:
      throw std::invalid_argument("k_statistic: order must be in [1, 4]");
  }
}

}  // namespace detail

// Unbiased k-statistic estimate of a joint cumulant with a delete-batch
// jackknife SE. Pass one column for univariate cumulants of order <= 4, or
// exactly `order` columns for a joint cumulant.
inline CumulantEstimate mc_cumulant(const std::vector<std::vector<double>>& columns, int order) {
  if (order < 1 || order > 4) throw std::invalid_argument("mc_cumulant: order must be in [1, 4]");
  if (columns.empty()) throw std::invalid_argument("mc_cumulant: no columns");
  if (columns.size() != 1 && columns.size() != static_cast<std::size_t>(order))
    throw std::invalid_argument("mc_cumulant: pass 1 column or exactly `order` columns");
  const std::size_t n = columns[0].size();
  for (const auto& c : columns)
    if (c.size() != n) throw std::invalid_argument("mc_cumulant: ragged columns");
  if (n < 1000) throw std::invalid_argument("mc_cumulant: need at least 1000 samples");

  auto col = [&](int i) -> const std::vector<double>& {
    return columns.size() == 1 ? columns[0] : columns[static_cast<std::size_t>(i)];
  };

  const std::size_t batches = std::min<std::size_t>(200, n / 50);
  const unsigned full = (1u << order) - 1;
  // per-batch raw product sums for every non-empty subset of columns
  std::vector<std::vector<double>> bs(batches, std::vector<double>(full + 1, 0.0));
  std::vector<double> totals(full + 1, 0.0);
  for (std::size_t t = 0; t < n; ++t) {
    const std::size_t b = t * batches / n;
    for (unsigned mask = 1; mask <= full; ++mask) {
      double prod = 1.0;
      for (int i = 0; i < order; ++i)
        if (mask & (1u << i)) prod *= col(i)[t];
      bs[b][mask] += prod;
    }
  }
  std::vector<double> bn(batches, 0.0);
  for (std::size_t t = 0; t < n; ++t) bn[t * batches / n] += 1.0;
  for (unsigned mask = 1; mask <= full; ++mask)
    for (std::size_t b = 0; b < batches; ++b) totals[mask] += bs[b][mask];

  auto k_from = [&](const std::vector<double>& sums, double count) {
    std::vector<double> rm(full + 1, 0.0);
    for (unsigned mask = 1; mask <= full; ++mask) rm[mask] = sums[mask] / count;
    return detail::k_statistic(rm, order, count);
  };

  CumulantEstimate est;
  est.order = order;
  est.samples = n;
  est.value = k_from(totals, static_cast<double>(n));

  std::vector<double> jack(batches);
  std::vector<double> sums(full + 1);
  for (std::size_t b = 0; b < batches; ++b) {
    for (unsigned mask = 1; mask <= full; ++mask) sums[mask] = totals[mask] - bs[b][mask];
    jack[b] = k_from(sums, static_cast<double>(n) - bn[b]);
  }
  double jm = 0.0;
  for (double v : jack) jm += v;
  jm /= static_cast<double>(batches);
  double s2 = 0.0;
  for (double v : jack) s2 += (v - jm) * (v - jm);
  est.se = std::sqrt(s2 * (static_cast<double>(batches) - 1.0) / static_cast<double>(batches));
  return est;
}

}  // namespace lrcd
