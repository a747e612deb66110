#ifndef GMFUSION_TESTS_ORACLES_HPP
#define GMFUSION_TESTS_ORACLES_HPP

// Independent reference implementations for the tests: instance generators,
// exhaustive enumeration and plain re-summation of energies. Nothing here uses
// the solver internals beyond building a problem.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "gmfusion/gmfusion.hpp"

namespace oracle {

using gmfusion::assignment;
using gmfusion::cost;
using gmfusion::dummy_label;
using gmfusion::index;
using gmfusion::label;
using gmfusion::problem;

// Raw instance as plain lists, kept next to the built problem.
struct raw_instance {
  struct pairwise_entry {
    index u;
    label s;
    index v;
    label t;
    cost c;
  };

  index num_nodes = 0;
  index num_labels = 0;
  std::vector<std::vector<std::pair<label, cost>>> candidates;
  std::vector<cost> dummy_cost;
  std::vector<pairwise_entry> pairwise;

  problem build() const
  {
    gmfusion::problem_builder b(num_nodes, num_labels);
    for (index u = 0; u < num_nodes; ++u) {
      for (const auto& [s, c] : candidates[u])
        b.add_label(u, s, c);
      b.set_dummy_cost(u, dummy_cost[u]);
    }
    for (const auto& e : pairwise)
      b.add_pairwise(e.u, e.s, e.v, e.t, e.c);
    return b.build();
  }

  // Instances without dummy costs and without pairwise terms on the dummy can
  // be written as .dd files.
  gmfusion::dd_instance to_dd() const
  {
    gmfusion::dd_instance d;
    d.n_left = num_nodes;
    d.n_right = num_labels;
    std::vector<std::vector<index>> id_of(num_nodes, std::vector<index>(num_labels, 0));
    for (index u = 0; u < num_nodes; ++u) {
      for (const auto& [s, c] : candidates[u]) {
        id_of[u][s] = d.assignments.size();
        d.assignments.push_back({d.assignments.size(), u, s, c});
      }
    }
    for (const auto& e : pairwise)
      d.pairwise_terms.push_back({id_of[e.u][e.s], id_of[e.v][e.t], e.c});
    return d;
  }
};

struct generator_options {
  index min_nodes = 2;
  index max_nodes = 6;
  index min_labels = 2;
  index max_labels = 6;
  double label_probability = 0.6;
  double edge_probability = 0.5;
  double pairwise_density = 0.5;  // fraction of filled table cells
  bool integer_costs = false;
  bool dummy_costs = true;        // nonzero theta_u(#) and dummy pairwise cells
  cost unary_range = 5.0;
  cost pairwise_range = 3.0;
};

inline raw_instance random_instance(std::mt19937_64& rng, const generator_options& o = {})
{
  auto pick = [&](index lo, index hi) { return std::uniform_int_distribution<index>(lo, hi)(rng); };
  auto coin = [&](double prob) { return std::bernoulli_distribution(prob)(rng); };
  auto value = [&](cost range) {
    if (o.integer_costs)
      return static_cast<cost>(std::uniform_int_distribution<int>(-static_cast<int>(range), static_cast<int>(range))(rng));
    return std::uniform_real_distribution<cost>(-range, range)(rng);
  };

  raw_instance r;
  r.num_nodes = pick(o.min_nodes, o.max_nodes);
  r.num_labels = pick(o.min_labels, o.max_labels);
  r.candidates.resize(r.num_nodes);
  r.dummy_cost.assign(r.num_nodes, 0.0);
  for (index u = 0; u < r.num_nodes; ++u) {
    for (label s = 0; s < r.num_labels; ++s)
      if (coin(o.label_probability))
        r.candidates[u].emplace_back(s, value(o.unary_range));
    if (o.dummy_costs)
      r.dummy_cost[u] = value(o.unary_range);
  }

  for (index u = 0; u < r.num_nodes; ++u) {
    for (index v = u + 1; v < r.num_nodes; ++v) {
      if (!coin(o.edge_probability))
        continue;
      auto slots_u = r.candidates[u];
      auto slots_v = r.candidates[v];
      if (o.dummy_costs) {
        slots_u.emplace_back(dummy_label, 0.0);
        slots_v.emplace_back(dummy_label, 0.0);
      }
      for (const auto& [s, _] : slots_u)
        for (const auto& [t, __] : slots_v)
          if (coin(o.pairwise_density))
            r.pairwise.push_back({u, s, v, t, value(o.pairwise_range)});
    }
  }
  return r;
}

// Energy straight from the raw lists.
inline cost energy(const raw_instance& r, const assignment& x)
{
  cost result = 0;
  for (index u = 0; u < r.num_nodes; ++u) {
    if (x[u] == dummy_label) {
      result += r.dummy_cost[u];
      continue;
    }
    for (const auto& [s, c] : r.candidates[u])
      if (s == x[u])
        result += c;
  }
  for (const auto& e : r.pairwise)
    if (x[e.u] == e.s && x[e.v] == e.t)
      result += e.c;
  return result;
}

inline bool feasible(const assignment& x)
{
  std::vector<label> used;
  for (const auto s : x)
    if (s != dummy_label)
      used.push_back(s);
  std::sort(used.begin(), used.end());
  return std::adjacent_find(used.begin(), used.end()) == used.end();
}

// Calls f(x) for every feasible assignment with x_u in domain(u).
inline void for_each_feasible(const std::vector<std::vector<label>>& domains, const std::function<void(const assignment&)>& f)
{
  const index n = domains.size();
  assignment x(n);
  std::vector<label> in_use;
  std::function<void(index)> rec = [&](index u) {
    if (u == n) {
      f(x);
      return;
    }
    for (const auto s : domains[u]) {
      if (s != dummy_label && std::find(in_use.begin(), in_use.end(), s) != in_use.end())
        continue;
      x[u] = s;
      if (s != dummy_label)
        in_use.push_back(s);
      rec(u + 1);
      if (s != dummy_label)
        in_use.pop_back();
    }
  };
  rec(0);
}

inline std::vector<std::vector<label>> full_domains(const problem& p)
{
  std::vector<std::vector<label>> domains(p.num_nodes());
  for (index u = 0; u < p.num_nodes(); ++u) {
    domains[u].assign(p.labels(u).begin(), p.labels(u).end());
    domains[u].push_back(dummy_label);
  }
  return domains;
}

struct optimum {
  cost value = std::numeric_limits<cost>::infinity();
  assignment x;
  std::uint64_t count = 0;  // number of feasible assignments visited
};

inline optimum minimize(const raw_instance& r, const std::vector<std::vector<label>>& domains)
{
  optimum best;
  for_each_feasible(domains, [&](const assignment& x) {
    ++best.count;
    const auto e = energy(r, x);
    if (e < best.value) {
      best.value = e;
      best.x = x;
    }
  });
  return best;
}

// Global optimum by exhaustive enumeration.
inline optimum brute_force(const raw_instance& r)
{
  return minimize(r, full_domains(r.build()));
}

// Best feasible x with x_u in {x1_u, x2_u}.
inline optimum brute_force_fusion(const raw_instance& r, const assignment& x1, const assignment& x2)
{
  std::vector<std::vector<label>> domains(r.num_nodes);
  for (index u = 0; u < r.num_nodes; ++u) {
    domains[u].push_back(x1[u]);
    if (x2[u] != x1[u])
      domains[u].push_back(x2[u]);
  }
  return minimize(r, domains);
}

// Exact LAP optimum over partial injections; the dummy costs 0.
inline cost brute_force_lap(const gmfusion::lap_instance& inst)
{
  const index n = inst.candidates.size();
  cost best = std::numeric_limits<cost>::infinity();
  std::vector<bool> used(inst.num_labels, false);
  std::function<void(index, cost)> rec = [&](index u, cost acc) {
    if (u == n) {
      best = std::min(best, acc);
      return;
    }
    rec(u + 1, acc);
    for (const auto& [s, c] : inst.candidates[u]) {
      if (used[s])
        continue;
      used[s] = true;
      rec(u + 1, acc + c);
      used[s] = false;
    }
  };
  rec(0, 0.0);
  return best;
}

inline cost lap_value(const gmfusion::lap_instance& inst, const assignment& x)
{
  cost result = 0;
  for (index u = 0; u < x.size(); ++u) {
    if (x[u] == dummy_label)
      continue;
    for (const auto& [s, c] : inst.candidates[u])
      if (s == x[u])
        result += c;
  }
  return result;
}

// Minimum of a binary energy by plain enumeration.
inline std::pair<cost, std::vector<std::uint8_t>> brute_force_binary(const gmfusion::binary_problem& bp)
{
  const index n = bp.size();
  std::vector<std::uint8_t> z(n), best;
  cost best_value = std::numeric_limits<cost>::infinity();
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    for (index i = 0; i < n; ++i)
      z[i] = (mask >> i) & 1;
    const auto v = bp.evaluate(z);
    if (v < best_value) {
      best_value = v;
      best = z;
    }
  }
  return {best_value, best};
}

inline gmfusion::binary_problem random_binary(std::mt19937_64& rng, index n, double edge_probability, bool integer_costs)
{
  auto value = [&](cost range) {
    if (integer_costs)
      return static_cast<cost>(std::uniform_int_distribution<int>(-static_cast<int>(range), static_cast<int>(range))(rng));
    return std::uniform_real_distribution<cost>(-range, range)(rng);
  };
  gmfusion::binary_problem bp(n);
  bp.add_constant(value(3));
  for (index i = 0; i < n; ++i)
    for (int z = 0; z < 2; ++z)
      bp.add_unary(i, z, value(5));
  for (index i = 0; i < n; ++i)
    for (index j = i + 1; j < n; ++j)
      if (std::bernoulli_distribution(edge_probability)(rng))
        for (int zi = 0; zi < 2; ++zi)
          for (int zj = 0; zj < 2; ++zj)
            bp.add_pairwise(i, j, zi, zj, value(5));
  return bp;
}

// A uniformly random feasible assignment.
inline assignment random_feasible(const problem& p, std::mt19937_64& rng, double dummy_probability = 0.3)
{
  assignment x(p.num_nodes());
  std::vector<bool> used(p.num_labels(), false);
  std::vector<index> order(p.num_nodes());
  for (index u = 0; u < order.size(); ++u)
    order[u] = u;
  std::shuffle(order.begin(), order.end(), rng);
  for (const auto u : order) {
    if (std::bernoulli_distribution(dummy_probability)(rng))
      continue;
    std::vector<label> free;
    for (const auto s : p.labels(u))
      if (!used[s])
        free.push_back(s);
    if (free.empty())
      continue;
    const auto s = free[std::uniform_int_distribution<index>(0, free.size() - 1)(rng)];
    x[u] = s;
    used[s] = true;
  }
  return x;
}

// A random assignment that is domain-valid but may repeat labels.
inline assignment random_any(const problem& p, std::mt19937_64& rng)
{
  assignment x(p.num_nodes());
  for (index u = 0; u < p.num_nodes(); ++u) {
    const auto slot = std::uniform_int_distribution<index>(0, p.num_slots(u) - 1)(rng);
    x[u] = p.label_at(u, slot);
  }
  return x;
}

// Fills phi and lambda (except lambda_#) with random values.
inline void randomize(const problem& p, gmfusion::reparametrization& r, std::mt19937_64& rng, cost range = 3.0)
{
  std::uniform_real_distribution<cost> dist(-range, range);
  for (index e = 0; e < p.num_edges(); ++e) {
    for (auto& v : r.phi(p, e, p.get_edge(e).u))
      v = dist(rng);
    for (auto& v : r.phi(p, e, p.get_edge(e).v))
      v = dist(rng);
  }
  for (index u = 0; u < p.num_nodes(); ++u) {
    auto lam = r.lambda(u);
    for (index i = 0; i + 1 < lam.size(); ++i)
      lam[i] = dist(rng);
  }
}

}

#endif
