#ifndef GMFUSION_FUSION_HPP
#define GMFUSION_FUSION_HPP

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "gmfusion/model.hpp"
#include "gmfusion/qpbo.hpp"
#include "gmfusion/random.hpp"

namespace gmfusion {

enum class fusion_mode { qpbo_i, exact };

inline constexpr index max_exact_fusion_variables = 20;

//
// Two-label auxiliary problem of fusing an incumbent x1 with a proposal x2.
//
// Only nodes with x1_u != x2_u become variables, with z_u = 0 selecting x1_u
// and z_u = 1 selecting x2_u. Everything else is folded into the constant and
// into the unaries of neighboring variables. Two options that would use the
// same label receive big_cost on the corresponding cell (pairwise for two
// variables, unary when the other node is fixed).
//
struct fusion_problem {
  std::vector<index> variables;
  std::vector<std::array<label, 2>> ordering;
  binary_problem binary;
  cost big_cost = 0;
  assignment reference;

  index size() const { return variables.size(); }

  assignment decode(std::span<const std::uint8_t> z) const
  {
    assert(z.size() == size());
    assignment x = reference;
    for (index k = 0; k < size(); ++k)
      x[variables[k]] = ordering[k][z[k]];
    return x;
  }
};

inline cost fusion_big_cost(const problem& p)
{
  return 1.0 + p.total_absolute_cost();
}

inline fusion_problem build_fusion(const problem& p, const assignment& x1, const assignment& x2)
{
  const auto slots1 = to_slots(p, x1);
  const auto slots2 = to_slots(p, x2);
  if (!is_feasible(p, x1))
    throw contract_error("fusion incumbent must be feasible");

  constexpr index fixed = static_cast<index>(-1);
  const index n = p.num_nodes();

  fusion_problem fp;
  fp.big_cost = fusion_big_cost(p);
  fp.reference = x1;

  std::vector<index> variable_of(n, fixed);
  for (index u = 0; u < n; ++u) {
    if (x1[u] != x2[u]) {
      variable_of[u] = fp.variables.size();
      fp.variables.push_back(u);
      fp.ordering.push_back({x1[u], x2[u]});
    }
  }
  fp.binary = binary_problem(fp.variables.size());
  auto& bp = fp.binary;

  auto slot_of_option = [&](index u, int z) { return z == 0 ? slots1[u] : slots2[u]; };

  for (index u = 0; u < n; ++u) {
    const auto k = variable_of[u];
    if (k == fixed) {
      bp.add_constant(p.unary(u, slots1[u]));
    } else {
      bp.add_unary(k, 0, p.unary(u, slots1[u]));
      bp.add_unary(k, 1, p.unary(u, slots2[u]));
    }
  }

  for (index e = 0; e < p.num_edges(); ++e) {
    const auto& ed = p.get_edge(e);
    const auto ku = variable_of[ed.u], kv = variable_of[ed.v];
    if (ku == fixed && kv == fixed) {
      bp.add_constant(p.pairwise(e, slots1[ed.u], slots1[ed.v]));
    } else if (kv == fixed) {
      for (int z = 0; z < 2; ++z)
        bp.add_unary(ku, z, p.pairwise(e, slot_of_option(ed.u, z), slots1[ed.v]));
    } else if (ku == fixed) {
      for (int z = 0; z < 2; ++z)
        bp.add_unary(kv, z, p.pairwise(e, slots1[ed.u], slot_of_option(ed.v, z)));
    } else {
      for (int zu = 0; zu < 2; ++zu)
        for (int zv = 0; zv < 2; ++zv)
          bp.add_pairwise(ku, kv, zu, zv, p.pairwise(e, slot_of_option(ed.u, zu), slot_of_option(ed.v, zv)));
    }
  }

  // Uniqueness penalties, grouped per label.
  std::map<label, std::vector<std::pair<index, int>>> options_by_label;
  for (index k = 0; k < fp.size(); ++k)
    for (int z = 0; z < 2; ++z)
      if (fp.ordering[k][z] != dummy_label)
        options_by_label[fp.ordering[k][z]].emplace_back(k, z);

  std::vector<index> fixed_holder(p.num_labels(), fixed);
  for (index u = 0; u < n; ++u)
    if (variable_of[u] == fixed && x1[u] != dummy_label)
      fixed_holder[x1[u]] = u;

  for (const auto& [s, options] : options_by_label) {
    for (index a = 0; a < options.size(); ++a) {
      if (fixed_holder[s] != fixed)
        bp.add_unary(options[a].first, options[a].second, fp.big_cost);
      for (index b = a + 1; b < options.size(); ++b)
        if (options[a].first != options[b].first)
          bp.add_pairwise(options[a].first, options[b].first, options[a].second, options[b].second, fp.big_cost);
    }
  }

  return fp;
}

//
// Search-space bound for fusing a feasible x1 with x2:
// ceil(2^m (|V|/n + 1)^n), m dummies and n distinct labels in x2.
//
struct count_bound_result {
  index dummies = 0;
  index distinct_labels = 0;
  std::uint64_t value = 0;
  bool overflow = false;
};

inline count_bound_result count_bound(const problem& p, const assignment& x2)
{
  to_slots(p, x2);
  count_bound_result result;
  std::vector<label> distinct;
  for (const auto s : x2) {
    if (s == dummy_label)
      ++result.dummies;
    else
      distinct.push_back(s);
  }
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  result.distinct_labels = distinct.size();

  const long double v = p.num_nodes();
  const long double n = result.distinct_labels;
  const long double log2_bound = result.dummies + (n > 0 ? n * std::log2(v / n + 1) : 0.0L);
  if (log2_bound >= 63) {
    result.overflow = true;
    result.value = std::numeric_limits<std::uint64_t>::max();
    return result;
  }
  const long double raw = std::exp2(log2_bound);
  const long double nearest = std::round(raw);
  // Exact integers (e.g. 2^m or (|V|/n + 1) integral) must not round up.
  const long double value = std::abs(raw - nearest) <= 1e-9L * std::max(1.0L, raw) ? nearest : std::ceil(raw);
  result.value = static_cast<std::uint64_t>(value);
  return result;
}

// Number of feasible assignments x with x_u in {x1_u, x2_u} for all u.
inline std::uint64_t count_feasible_fusions(const problem& p, const assignment& x1, const assignment& x2)
{
  to_slots(p, x1);
  to_slots(p, x2);
  std::vector<index> differing;
  for (index u = 0; u < p.num_nodes(); ++u)
    if (x1[u] != x2[u])
      differing.push_back(u);
  if (differing.size() >= 63)
    throw input_error("too many differing nodes to enumerate");

  std::uint64_t count = 0;
  assignment x = x1;
  std::vector<int> used(p.num_labels(), 0);
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << differing.size()); ++mask) {
    for (index k = 0; k < differing.size(); ++k)
      x[differing[k]] = (mask >> k) & 1 ? x2[differing[k]] : x1[differing[k]];
    std::fill(used.begin(), used.end(), 0);
    bool feasible = true;
    for (const auto s : x) {
      if (s != dummy_label && used[s]++ > 0) {
        feasible = false;
        break;
      }
    }
    count += feasible;
  }
  return count;
}

namespace detail {

// Minimizer over all 2^n labelings by Gray-code enumeration.
inline std::vector<std::uint8_t> enumerate_binary(const binary_problem& bp)
{
  const index n = bp.size();
  const auto incident = bp.incidence();
  std::vector<std::uint8_t> z(n, 0), best = z;
  cost current = bp.evaluate(z), best_value = current;
  for (std::uint64_t step = 1; step < (std::uint64_t{1} << n); ++step) {
    const index i = std::countr_zero(step);
    current += bp.flip_delta(z, i, incident);
    z[i] ^= 1;
    if (current < best_value) {
      best_value = current;
      best = z;
    }
  }
  return best;
}

// Flip single variables while that strictly lowers the energy: at most
// `rounds` passes, each over a random permutation.
inline void improve_by_flips(const binary_problem& bp, std::vector<std::uint8_t>& z, random_engine& rng, int rounds = 3)
{
  const auto incident = bp.incidence();
  std::vector<index> perm(bp.size());
  std::iota(perm.begin(), perm.end(), 0);
  for (int round = 0; round < rounds; ++round) {
    shuffle(perm, rng);
    bool improved = false;
    for (const auto i : perm) {
      if (bp.flip_delta(z, i, incident) < 0) {
        z[i] ^= 1;
        improved = true;
      }
    }
    if (!improved)
      break;
  }
}

}

// Best feasible labeling of the auxiliary problem by enumeration.
inline assignment fuse_exact(const fusion_problem& fp)
{
  if (fp.size() > max_exact_fusion_variables)
    throw input_error("exact fusion supports at most " + std::to_string(max_exact_fusion_variables)
                      + " differing nodes, got " + std::to_string(fp.size()));
  return fp.decode(detail::enumerate_binary(fp.binary));
}

// QPBO followed by filling unlabeled variables from the better of the two
// proposals and a few rounds of single-flip descent.
inline assignment fuse_qpbo_i(const problem& p, const fusion_problem& fp, random_engine& rng)
{
  const auto qp = solve_qpbo(fp.binary);

  const std::vector<std::uint8_t> zeros(fp.size(), 0), ones(fp.size(), 1);
  const std::vector<std::uint8_t>* fill = &zeros;
  if (is_feasible(p, fp.decode(ones)) && fp.binary.evaluate(ones) < fp.binary.evaluate(zeros))
    fill = &ones;

  std::vector<std::uint8_t> z(fp.size());
  for (index k = 0; k < fp.size(); ++k)
    z[k] = qp.labels[k] == qpbo_result::unlabeled ? (*fill)[k] : static_cast<std::uint8_t>(qp.labels[k]);
  detail::improve_by_flips(fp.binary, z, rng);
  return fp.decode(z);
}

//
// Fusion move: returns a feasible assignment no worse than x1, and no worse
// than x2 if x2 is feasible.
//
inline assignment fuse(const problem& p, const assignment& x1, const assignment& x2, fusion_mode mode, random_engine& rng)
{
  const auto fp = build_fusion(p, x1, x2);
  if (fp.size() == 0)
    return x1;

  assignment candidate = mode == fusion_mode::exact ? fuse_exact(fp) : fuse_qpbo_i(p, fp, rng);

  assignment best = x1;
  cost best_energy = energy(p, x1);
  if (is_feasible(p, x2)) {
    const auto e2 = energy(p, x2);
    if (e2 < best_energy) {
      best = x2;
      best_energy = e2;
    }
  }
  if (is_feasible(p, candidate) && energy(p, candidate) <= best_energy)
    best = std::move(candidate);
  return best;
}

inline assignment fuse(const problem& p, const assignment& x1, const assignment& x2, fusion_mode mode, std::uint64_t seed)
{
  random_engine rng(seed);
  return fuse(p, x1, x2, mode, rng);
}

}

#endif
