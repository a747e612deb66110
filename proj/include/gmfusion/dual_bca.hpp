#ifndef GMFUSION_DUAL_BCA_HPP
#define GMFUSION_DUAL_BCA_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <sstream>
#include <string_view>
#include <vector>

#include "gmfusion/lap.hpp"
#include "gmfusion/model.hpp"
#include "gmfusion/trace.hpp"

namespace gmfusion {

//
// Lower bound of the Lagrangean dual at fixed (phi, lambda):
//
//   sum_u min_s xi_u(s) + sum_uv min_st theta^phi_uv(s, t) + sum_s min(0, min_u xi-hat_u(s)).
//
inline cost dual_bound(const problem& p, const reparametrization& r)
{
  cost result = 0;
  std::vector<cost> xi;
  for (index u = 0; u < p.num_nodes(); ++u) {
    xi.resize(p.num_slots(u));
    reparametrized_unaries(p, r, u, xi);
    result += *std::min_element(xi.begin(), xi.end());
  }

  for (index e = 0; e < p.num_edges(); ++e) {
    const auto& ed = p.get_edge(e);
    const auto phi_u = r.phi(p, e, ed.u);
    const auto phi_v = r.phi(p, e, ed.v);
    const auto table = p.pairwise(e);
    const auto cols = phi_v.size();
    cost m = infinity;
    for (index i = 0; i < phi_u.size(); ++i)
      for (index j = 0; j < cols; ++j)
        m = std::min(m, table[i * cols + j] + phi_u[i] + phi_v[j]);
    result += m;
  }

  return result + label_min_term(p, r);
}

//
// Optimal block update of the messages of one edge (MPLP++): accumulate both
// endpoint unaries into the edge, then hand the min-marginals back, split
// evenly between the two endpoints.
//
inline void phi_step(const problem& p, reparametrization& r, index e)
{
  const auto& ed = p.get_edge(e);
  const auto phi_u = r.phi(p, e, ed.u);
  const auto phi_v = r.phi(p, e, ed.v);
  const auto table = p.pairwise(e);
  const index rows = phi_u.size();
  const index cols = phi_v.size();

  std::vector<cost> xi(std::max(rows, cols));
  reparametrized_unaries(p, r, ed.u, {xi.data(), rows});
  for (index i = 0; i < rows; ++i)
    phi_u[i] += xi[i];
  reparametrized_unaries(p, r, ed.v, {xi.data(), cols});
  for (index j = 0; j < cols; ++j)
    phi_v[j] += xi[j];

  auto row_min = [&](index i) {
    cost m = infinity;
    for (index j = 0; j < cols; ++j)
      m = std::min(m, table[i * cols + j] + phi_u[i] + phi_v[j]);
    return m;
  };

  for (index i = 0; i < rows; ++i)
    phi_u[i] -= row_min(i) / 2;

  for (index j = 0; j < cols; ++j) {
    cost m = infinity;
    for (index i = 0; i < rows; ++i)
      m = std::min(m, table[i * cols + j] + phi_u[i]);
    phi_v[j] = -m;
  }

  for (index i = 0; i < rows; ++i)
    phi_u[i] -= row_min(i);
}

namespace detail {

// Positions of the smallest and second smallest value; ties go to the lower
// position.
inline std::pair<index, index> two_smallest(std::span<const cost> values)
{
  assert(values.size() >= 2);
  index first = 0, second = 1;
  if (values[1] < values[0])
    std::swap(first, second);
  for (index i = 2; i < values.size(); ++i) {
    if (values[i] < values[first]) {
      second = first;
      first = i;
    } else if (values[i] < values[second]) {
      second = i;
    }
  }
  return {first, second};
}

}

//
// Moves label costs of node u to the LAP side so that xi_u(s) takes the same
// value, the midpoint of its two smallest entries, for every s in L_u. The
// dummy entry is never touched.
//
inline void lambda_step_node(const problem& p, reparametrization& r, index u)
{
  if (p.labels(u).empty())
    return;
  std::vector<cost> xi(p.num_slots(u));
  reparametrized_unaries(p, r, u, xi);
  const auto [best, second] = detail::two_smallest(xi);
  const cost level = (xi[best] + xi[second]) / 2;
  auto lambda = r.lambda(u);
  for (index i = 0; i < p.dummy_slot(u); ++i)
    lambda[i] += level - xi[i];
}

//
// Symmetric update for label s over V(s) plus the dummy node (fixed at 0):
// every xi-hat_u(s), u in V(s), becomes the midpoint of the two smallest.
//
inline void lambda_step_label(const problem& p, reparametrization& r, label s)
{
  const auto owners = p.owners(s);
  if (owners.empty())
    return;
  std::vector<cost> values(owners.size() + 1);
  for (index k = 0; k < owners.size(); ++k)
    values[k] = lap_unary_slot(p, r, owners[k].node, owners[k].slot);
  values.back() = 0.0;
  const auto [best, second] = detail::two_smallest(values);
  const cost level = (values[best] + values[second]) / 2;
  for (index k = 0; k < owners.size(); ++k)
    r.lambda(owners[k].node)[owners[k].slot] += values[k] - level;
}

struct dual_state {
  dual_state() = default;
  explicit dual_state(const problem& p)
  : r(p)
  , bound(dual_bound(p, r))
  { }

  reparametrization r;
  cost bound = -infinity;
  std::int64_t sweeps = 0;
};

// Called between the phi- and lambda-steps of a sweep; returns the incumbent
// energy after handling its proposals, if any exists.
using proposal_hook = std::function<std::optional<cost>(const problem&, const reparametrization&)>;

class bound_regression : public contract_error {
public:
  using contract_error::contract_error;
};

namespace detail {

inline void check_bound_progress(cost before, cost after, const char* where)
{
  const cost slack = 1e-7 * std::max<cost>(1.0, std::abs(before));
  if (after < before - slack) {
    std::ostringstream s;
    s.precision(17);
    s << "dual bound decreased during " << where << ": " << before << " -> " << after;
    throw bound_regression(s.str());
  }
}

}

//
// One BCA iteration: phi-steps on all edges in lexicographic order, the
// proposal hook, then lambda-steps on all nodes and all labels.
//
inline void bca_sweep(const problem& p, dual_state& st, const proposal_hook& between = {}, trace_recorder* trace = nullptr,
                      std::string_view hook_event = trace_event::greedy)
{
  const auto iteration = st.sweeps + 1;
  for (index e = 0; e < p.num_edges(); ++e)
    phi_step(p, st.r, e);
  const auto after_phi = dual_bound(p, st.r);
  detail::check_bound_progress(st.bound, after_phi, "phi-sweep");
  st.bound = after_phi;
  if (trace)
    trace->record(iteration, st.bound, trace_event::phi_sweep);

  if (between) {
    const auto best = between(p, st.r);
    if (trace) {
      if (best)
        trace->set_best(*best);
      trace->record(iteration, st.bound, hook_event);
    }
  }

  for (index u = 0; u < p.num_nodes(); ++u)
    lambda_step_node(p, st.r, u);
  for (label s = 0; s < p.num_labels(); ++s)
    lambda_step_label(p, st.r, s);
  const auto after_lambda = dual_bound(p, st.r);
  detail::check_bound_progress(st.bound, after_lambda, "lambda-sweep");
  st.bound = after_lambda;
  ++st.sweeps;
  if (trace)
    trace->record(iteration, st.bound, trace_event::lambda_sweep);
}

}

#endif
