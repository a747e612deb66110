#ifndef GMFUSION_LAP_HPP
#define GMFUSION_LAP_HPP

#include <algorithm>
#include <limits>
#include <utility>
#include <vector>

#include "gmfusion/model.hpp"

namespace gmfusion {

// Linear assignment with incomplete matchings: every node may take one of its
// candidate labels or stay unassigned at zero cost.
struct lap_instance {
  index num_labels = 0;
  std::vector<std::vector<std::pair<label, cost>>> candidates;
};

struct lap_solution {
  assignment x;
  cost value = 0;
};

// LAP over the LAP-side costs xi-hat^lambda_u(s) of the dual.
inline lap_instance make_lap_instance(const problem& p, const reparametrization& r)
{
  lap_instance inst;
  inst.num_labels = p.num_labels();
  inst.candidates.resize(p.num_nodes());
  for (index u = 0; u < p.num_nodes(); ++u) {
    const auto labels = p.labels(u);
    for (index i = 0; i < labels.size(); ++i)
      inst.candidates[u].emplace_back(labels[i], lap_unary_slot(p, r, u, i));
  }
  return inst;
}

namespace detail {

// Shortest augmenting path Hungarian method for a dense rows x cols matrix with
// rows <= cols. Returns the column of every row.
inline std::vector<index> hungarian(const std::vector<std::vector<cost>>& a, index rows, index cols)
{
  // 1-based potentials as in the classical formulation; column 0 is virtual.
  std::vector<cost> row_pot(rows + 1, 0.0), col_pot(cols + 1, 0.0), min_slack(cols + 1);
  std::vector<index> match(cols + 1, 0), way(cols + 1, 0);
  std::vector<bool> used(cols + 1);

  for (index i = 1; i <= rows; ++i) {
    match[0] = i;
    index j0 = 0;
    std::fill(min_slack.begin(), min_slack.end(), infinity);
    std::fill(used.begin(), used.end(), false);
    do {
      used[j0] = true;
      const index i0 = match[j0];
      cost delta = infinity;
      index j1 = 0;
      for (index j = 1; j <= cols; ++j) {
        if (used[j])
          continue;
        const cost cur = a[i0 - 1][j - 1] - row_pot[i0] - col_pot[j];
        if (cur < min_slack[j]) {
          min_slack[j] = cur;
          way[j] = j0;
        }
        if (min_slack[j] < delta) {
          delta = min_slack[j];
          j1 = j;
        }
      }
      for (index j = 0; j <= cols; ++j) {
        if (used[j]) {
          row_pot[match[j]] += delta;
          col_pot[j] -= delta;
        } else {
          min_slack[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const index j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<index> result(rows);
  for (index j = 1; j <= cols; ++j)
    if (match[j] != 0)
      result[match[j] - 1] = j - 1;
  return result;
}

}

//
// Exact minimum of sum_u c_u(x_u) with c_u(#) = 0 over all partial injections.
// Columns are the labels that occur in some candidate list followed by one
// zero-cost dummy column per node.
//
inline lap_solution solve_lap(const lap_instance& inst)
{
  const index n = inst.candidates.size();
  lap_solution result{assignment(n), 0.0};
  if (n == 0)
    return result;

  std::vector<index> column_of(inst.num_labels, static_cast<index>(-1));
  std::vector<label> label_of_column;
  cost forbidden = 1.0;
  for (const auto& row : inst.candidates) {
    for (const auto& [s, c] : row) {
      if (s >= inst.num_labels)
        throw input_error("LAP candidate label out of range");
      if (column_of[s] == static_cast<index>(-1)) {
        column_of[s] = label_of_column.size();
        label_of_column.push_back(s);
      }
      forbidden += std::abs(c);
    }
  }
  // Larger than any feasible total; never selected since dummies cost 0.
  forbidden *= 2;

  const index real_cols = label_of_column.size();
  const index cols = real_cols + n;
  std::vector<std::vector<cost>> a(n, std::vector<cost>(cols, forbidden));
  for (index u = 0; u < n; ++u) {
    for (const auto& [s, c] : inst.candidates[u])
      a[u][column_of[s]] = c;
    for (index j = real_cols; j < cols; ++j)
      a[u][j] = 0.0;
  }

  const auto cols_of_rows = detail::hungarian(a, n, cols);
  for (index u = 0; u < n; ++u) {
    const index j = cols_of_rows[u];
    if (j < real_cols) {
      result.x[u] = label_of_column[j];
      result.value += a[u][j];
    }
  }
  return result;
}

// sum_s min(0, min_{u in V(s)} xi-hat^lambda_u(s)): the LAP term with only
// label uniqueness kept, solvable per label in closed form.
inline cost label_min_term(const problem& p, const reparametrization& r)
{
  cost result = 0;
  for (label s = 0; s < p.num_labels(); ++s) {
    cost best = 0;
    for (const auto& o : p.owners(s))
      best = std::min(best, lap_unary_slot(p, r, o.node, o.slot));
    result += best;
  }
  return result;
}

}

#endif
