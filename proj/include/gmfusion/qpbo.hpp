#ifndef GMFUSION_QPBO_HPP
#define GMFUSION_QPBO_HPP

#include <algorithm>
#include <array>
#include <cassert>
#include <cstdint>
#include <functional>
#include <limits>
#include <queue>
#include <span>
#include <vector>

#include "gmfusion/model.hpp"

namespace gmfusion {

//
// Quadratic pseudo-Boolean energy
//
//   constant + sum_i unary_i(z_i) + sum_(i,j) table_ij(z_i, z_j),
//
// with pairwise tables stored row-major as table[2 * z_i + z_j].
//
class binary_problem {
public:
  struct term {
    index i;
    index j;
    std::array<cost, 4> table{};
  };

  binary_problem() = default;
  explicit binary_problem(index num_variables) : unary_(num_variables, {0.0, 0.0}) { }

  index size() const { return unary_.size(); }

  cost constant() const { return constant_; }
  void add_constant(cost c) { constant_ += c; }

  std::span<const std::array<cost, 2>> unary() const { return unary_; }
  void add_unary(index i, int zi, cost c) { unary_[i][zi] += c; }

  std::span<const term> pairwise() const { return terms_; }

  // Returns the term index; adds to an existing term between i and j.
  index add_pairwise(index i, index j, int zi, int zj, cost c)
  {
    assert(i != j && i < size() && j < size());
    if (i > j) {
      std::swap(i, j);
      std::swap(zi, zj);
    }
    const auto key = std::make_pair(i, j);
    auto it = std::lower_bound(term_keys_.begin(), term_keys_.end(), key,
      [](const auto& entry, const auto& k) { return entry.first < k; });
    if (it == term_keys_.end() || it->first != key) {
      it = term_keys_.insert(it, {key, terms_.size()});
      terms_.push_back({i, j, {}});
    }
    terms_[it->second].table[2 * zi + zj] += c;
    return it->second;
  }

  cost evaluate(std::span<const std::uint8_t> z) const
  {
    assert(z.size() == size());
    cost result = constant_;
    for (index i = 0; i < size(); ++i)
      result += unary_[i][z[i]];
    for (const auto& t : terms_)
      result += t.table[2 * z[t.i] + z[t.j]];
    return result;
  }

  static bool is_submodular(const std::array<cost, 4>& t)
  {
    return t[0] + t[3] <= t[1] + t[2];
  }

  bool is_submodular() const
  {
    return std::all_of(terms_.begin(), terms_.end(), [](const auto& t) { return is_submodular(t.table); });
  }

  // Term indices incident to every variable.
  std::vector<std::vector<index>> incidence() const
  {
    std::vector<std::vector<index>> result(size());
    for (index k = 0; k < terms_.size(); ++k) {
      result[terms_[k].i].push_back(k);
      result[terms_[k].j].push_back(k);
    }
    return result;
  }

  // Energy change when flipping z_i, given the incidence lists.
  cost flip_delta(std::span<const std::uint8_t> z, index i, const std::vector<std::vector<index>>& incident) const
  {
    const int from = z[i], to = 1 - from;
    cost delta = unary_[i][to] - unary_[i][from];
    for (const auto k : incident[i]) {
      const auto& t = terms_[k];
      if (t.i == i)
        delta += t.table[2 * to + z[t.j]] - t.table[2 * from + z[t.j]];
      else
        delta += t.table[2 * z[t.i] + to] - t.table[2 * z[t.i] + from];
    }
    return delta;
  }

private:
  cost constant_ = 0;
  std::vector<std::array<cost, 2>> unary_;
  std::vector<term> terms_;
  std::vector<std::pair<std::pair<index, index>, index>> term_keys_;
};

//
// Dinic max-flow on double capacities. Arcs are stored in pairs (a, a ^ 1).
//
class flow_network {
public:
  explicit flow_network(index num_nodes) : out_(num_nodes) { }

  index num_nodes() const { return out_.size(); }
  index num_arcs() const { return heads_.size(); }

  index add_arc(index from, index to, cost capacity)
  {
    assert(capacity >= 0);
    const index a = heads_.size();
    heads_.push_back(to);
    residual_.push_back(capacity);
    capacity_.push_back(capacity);
    out_[from].push_back(a);
    heads_.push_back(from);
    residual_.push_back(0.0);
    capacity_.push_back(0.0);
    out_[to].push_back(a + 1);
    return a;
  }

  index head(index a) const { return heads_[a]; }
  index tail(index a) const { return heads_[a ^ 1]; }
  cost capacity(index a) const { return capacity_[a]; }
  cost residual(index a) const { return residual_[a]; }
  void set_residual(index a, cost r) { residual_[a] = r; }
  std::span<const index> out_arcs(index x) const { return out_[x]; }

  // Net flow on an original arc.
  cost flow(index a) const { return capacity_[a] - residual_[a]; }

  cost max_flow(index source, index sink, cost eps)
  {
    cost total = 0;
    level_.resize(num_nodes());
    next_.resize(num_nodes());
    while (build_levels(source, sink, eps)) {
      std::fill(next_.begin(), next_.end(), 0);
      for (;;) {
        const cost pushed = augment(source, sink, infinity, eps);
        if (pushed <= 0)
          break;
        total += pushed;
      }
    }
    return total;
  }

private:
  bool build_levels(index source, index sink, cost eps)
  {
    std::fill(level_.begin(), level_.end(), -1);
    std::queue<index> queue;
    level_[source] = 0;
    queue.push(source);
    while (!queue.empty()) {
      const auto x = queue.front();
      queue.pop();
      for (const auto a : out_[x]) {
        const auto y = heads_[a];
        if (level_[y] < 0 && residual_[a] > eps) {
          level_[y] = level_[x] + 1;
          queue.push(y);
        }
      }
    }
    return level_[sink] >= 0;
  }

  cost augment(index x, index sink, cost limit, cost eps)
  {
    if (x == sink)
      return limit;
    for (auto& k = next_[x]; k < out_[x].size(); ++k) {
      const auto a = out_[x][k];
      const auto y = heads_[a];
      if (residual_[a] <= eps || level_[y] != level_[x] + 1)
        continue;
      const cost pushed = augment(y, sink, std::min(limit, residual_[a]), eps);
      if (pushed > 0) {
        residual_[a] -= pushed;
        residual_[a ^ 1] += pushed;
        return pushed;
      }
    }
    return 0;
  }

  std::vector<index> heads_;
  std::vector<cost> residual_;
  std::vector<cost> capacity_;
  std::vector<std::vector<index>> out_;
  std::vector<int> level_;
  std::vector<index> next_;
};

struct qpbo_result {
  static constexpr std::int8_t unlabeled = -1;

  std::vector<std::int8_t> labels;  // 0, 1 or unlabeled
  cost lower_bound = -infinity;     // constant + max-flow value
  std::vector<bool> strong;         // labeled by the minimal min-cut itself

  index num_labeled() const
  {
    return std::count_if(labels.begin(), labels.end(), [](auto l) { return l != unlabeled; });
  }
};

//
// Roof duality. Variable i is represented by node i (z_i = 0 iff on the
// source side) and by its complement node n + i. Each energy term contributes
// half of its capacity to a mirror pair of arcs, so the network is symmetric
// under x <-> complement(x), source <-> sink.
//
// After max-flow, the flow is symmetrized. Nodes reachable from the source give
// the strongly persistent labels. The remaining variables are labeled from the
// strongly connected components of the residual graph in 2-SAT fashion; a
// component that contains a node and its complement leaves its variables
// unlabeled. Together this is an optimal half-integral solution of the roof
// dual, so every labeled variable is part of an optimal labeling.
//
inline qpbo_result solve_qpbo(const binary_problem& bp)
{
  const index n = bp.size();
  const index source = 2 * n, sink = 2 * n + 1;
  flow_network net(2 * n + 2);
  std::vector<index> mirror_arc;

  auto complement = [n, source, sink](index x) -> index {
    if (x == source) return sink;
    if (x == sink) return source;
    return x < n ? x + n : x - n;
  };
  auto add_mirrored = [&](index from, index to, cost capacity) {
    if (capacity <= 0)
      return;
    const auto a = net.add_arc(from, to, capacity / 2);
    const auto b = net.add_arc(complement(to), complement(from), capacity / 2);
    mirror_arc.resize(net.num_arcs());
    mirror_arc[a] = b;
    mirror_arc[b] = a;
  };

  cost constant = bp.constant();
  std::vector<std::array<cost, 2>> unary(bp.unary().begin(), bp.unary().end());

  for (const auto& t : bp.pairwise()) {
    const cost a = t.table[0], b = t.table[1], c = t.table[2], d = t.table[3];
    // a + (c - a) z_i + (d - c) z_j + (b + c - a - d) (1 - z_i) z_j
    constant += a;
    unary[t.i][1] += c - a;
    unary[t.j][1] += d - c;
    const cost lambda = b + c - a - d;
    if (lambda >= 0) {
      add_mirrored(t.i, t.j, lambda);
    } else {
      // -mu (1 - z_i) z_j = mu (1 - z_i)(1 - z_j) - mu + mu z_i
      const cost mu = -lambda;
      constant -= mu;
      unary[t.i][1] += mu;
      add_mirrored(t.i, complement(t.j), mu);
    }
  }

  for (index i = 0; i < n; ++i) {
    const auto [c0, c1] = unary[i];
    if (c1 >= c0) {
      constant += c0;
      add_mirrored(source, i, c1 - c0);
    } else {
      constant += c1;
      add_mirrored(i, sink, c0 - c1);
    }
  }

  cost max_capacity = 1.0;
  for (index a = 0; a < net.num_arcs(); ++a)
    max_capacity = std::max(max_capacity, net.capacity(a));
  const cost eps = 1e-12 * max_capacity;

  qpbo_result result;
  result.lower_bound = constant + net.max_flow(source, sink, eps);
  result.labels.assign(n, qpbo_result::unlabeled);
  result.strong.assign(n, false);

  // Symmetrize: f'(a) = (f(a) + f(mirror(a))) / 2.
  std::vector<cost> sym(net.num_arcs(), 0.0);
  for (index a = 0; a < net.num_arcs(); a += 2)
    sym[a] = (net.flow(a) + net.flow(mirror_arc[a])) / 2;
  for (index a = 0; a < net.num_arcs(); a += 2) {
    net.set_residual(a, net.capacity(a) - sym[a]);
    net.set_residual(a + 1, sym[a]);
  }

  std::vector<bool> from_source(2 * n + 2, false);
  {
    std::vector<index> stack{source};
    from_source[source] = true;
    while (!stack.empty()) {
      const auto x = stack.back();
      stack.pop_back();
      for (const auto a : net.out_arcs(x)) {
        const auto y = net.head(a);
        if (!from_source[y] && net.residual(a) > eps) {
          from_source[y] = true;
          stack.push_back(y);
        }
      }
    }
  }

  std::vector<bool> open(2 * n, false);
  for (index i = 0; i < n; ++i) {
    const bool zero = from_source[i], one = from_source[i + n];
    if (zero && !one) {
      result.labels[i] = 0;
      result.strong[i] = true;
    } else if (one && !zero) {
      result.labels[i] = 1;
      result.strong[i] = true;
    } else if (!zero && !one) {
      open[i] = open[i + n] = true;
    }
    // Both reachable would mean an augmenting path; leave unlabeled.
  }

  // Tarjan on the residual graph restricted to open nodes. Components are
  // numbered in completion order, i.e. successors before predecessors.
  constexpr index none = static_cast<index>(-1);
  std::vector<index> order(2 * n, none), low(2 * n, 0), component(2 * n, none);
  std::vector<index> stack;
  std::vector<bool> on_stack(2 * n, false);
  index counter = 0, components = 0;

  std::function<void(index)> visit = [&](index x) {
    order[x] = low[x] = counter++;
    stack.push_back(x);
    on_stack[x] = true;
    for (const auto a : net.out_arcs(x)) {
      const auto y = net.head(a);
      if (y >= 2 * n || !open[y] || net.residual(a) <= eps)
        continue;
      if (order[y] == none) {
        visit(y);
        low[x] = std::min(low[x], low[y]);
      } else if (on_stack[y]) {
        low[x] = std::min(low[x], order[y]);
      }
    }
    if (low[x] == order[x]) {
      index y;
      do {
        y = stack.back();
        stack.pop_back();
        on_stack[y] = false;
        component[y] = components;
      } while (y != x);
      ++components;
    }
  };

  for (index x = 0; x < 2 * n; ++x)
    if (open[x] && order[x] == none)
      visit(x);

  for (index i = 0; i < n; ++i) {
    if (!open[i] || component[i] == component[i + n])
      continue;
    // The earlier completed component lies downstream and may join the
    // source side without leaving it through a residual arc.
    result.labels[i] = component[i] < component[i + n] ? 0 : 1;
  }

  return result;
}

}

#endif
