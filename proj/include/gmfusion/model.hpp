#ifndef GMFUSION_MODEL_HPP
#define GMFUSION_MODEL_HPP

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "gmfusion/error.hpp"

namespace gmfusion {

using index = std::size_t;
using label = std::size_t;
using cost = double;

// The dummy label lives outside the range of every label set.
inline constexpr label dummy_label = std::numeric_limits<label>::max();

inline constexpr cost infinity = std::numeric_limits<cost>::infinity();

class problem_builder;

//
// Graph matching instance: nodes with candidate label sets (plus the implicit
// dummy), unary costs per node and dense pairwise cost tables per edge.
//
// Labels of a node are addressed by "slots": slot i < |L_u| is the i-th
// candidate label in ascending order, slot |L_u| is the dummy.
//
class problem {
public:
  struct edge {
    index u;  // u < v
    index v;
    std::size_t table_offset;
  };

  struct neighbor {
    index node;
    index edge;
  };

  struct owner {
    index node;
    index slot;
  };

  problem() = default;

  index num_nodes() const { return label_offsets_.size() - 1; }
  index num_labels() const { return owner_offsets_.size() - 1; }
  index num_edges() const { return edges_.size(); }

  std::span<const label> labels(index u) const
  {
    assert(u < num_nodes());
    return {labels_.data() + label_offsets_[u], label_offsets_[u + 1] - label_offsets_[u]};
  }

  index num_slots(index u) const { return labels(u).size() + 1; }
  index dummy_slot(index u) const { return labels(u).size(); }

  label label_at(index u, index slot) const
  {
    const auto ls = labels(u);
    assert(slot <= ls.size());
    return slot == ls.size() ? dummy_label : ls[slot];
  }

  std::optional<index> slot_of(index u, label s) const
  {
    const auto ls = labels(u);
    if (s == dummy_label)
      return ls.size();
    const auto it = std::lower_bound(ls.begin(), ls.end(), s);
    if (it == ls.end() || *it != s)
      return std::nullopt;
    return static_cast<index>(it - ls.begin());
  }

  std::span<const cost> unary(index u) const
  {
    return {unary_.data() + label_offsets_[u] + u, num_slots(u)};
  }

  cost unary(index u, index slot) const { return unary(u)[slot]; }

  const edge& get_edge(index e) const { return edges_[e]; }
  std::span<const edge> edges() const { return edges_; }

  // Row-major table of size num_slots(edge.u) x num_slots(edge.v).
  std::span<const cost> pairwise(index e) const
  {
    const auto& ed = edges_[e];
    return {pairwise_.data() + ed.table_offset, num_slots(ed.u) * num_slots(ed.v)};
  }

  cost pairwise(index e, index slot_u, index slot_v) const
  {
    const auto& ed = edges_[e];
    assert(slot_u < num_slots(ed.u) && slot_v < num_slots(ed.v));
    return pairwise_[ed.table_offset + slot_u * num_slots(ed.v) + slot_v];
  }

  // Pairwise cost with the slots given in the orientation (a, b), where
  // {a, b} are the endpoints of edge e in any order.
  cost pairwise_oriented(index e, index a, index slot_a, index slot_b) const
  {
    return edges_[e].u == a ? pairwise(e, slot_a, slot_b) : pairwise(e, slot_b, slot_a);
  }

  // Neighbors sorted by node index.
  std::span<const neighbor> neighbors(index u) const
  {
    return {adjacency_.data() + adjacency_offsets_[u], adjacency_offsets_[u + 1] - adjacency_offsets_[u]};
  }

  std::optional<index> find_edge(index u, index v) const
  {
    const auto ns = neighbors(u);
    const auto it = std::lower_bound(ns.begin(), ns.end(), v,
      [](const neighbor& n, index x) { return n.node < x; });
    if (it == ns.end() || it->node != v)
      return std::nullopt;
    return it->edge;
  }

  // V(s): nodes that have s among their candidates, sorted by node.
  std::span<const owner> owners(label s) const
  {
    assert(s < num_labels());
    return {owners_.data() + owner_offsets_[s], owner_offsets_[s + 1] - owner_offsets_[s]};
  }

  // Sum of absolute values of all unary and pairwise costs.
  cost total_absolute_cost() const { return total_absolute_cost_; }

private:
  std::vector<std::size_t> label_offsets_{0};
  std::vector<label> labels_;
  std::vector<cost> unary_;

  std::vector<edge> edges_;
  std::vector<cost> pairwise_;

  std::vector<std::size_t> adjacency_offsets_{0};
  std::vector<neighbor> adjacency_;

  std::vector<std::size_t> owner_offsets_{0};
  std::vector<owner> owners_;

  cost total_absolute_cost_ = 0;

  friend class problem_builder;
};

class problem_builder {
public:
  problem_builder(index num_nodes, index num_labels)
  : num_labels_(num_labels)
  , unary_(num_nodes)
  , dummy_cost_(num_nodes, 0.0)
  { }

  index num_nodes() const { return unary_.size(); }
  index num_labels() const { return num_labels_; }

  problem_builder& add_label(index u, label s, cost c)
  {
    check_node(u);
    if (s >= num_labels_)
      throw input_error("label " + std::to_string(s) + " out of range");
    check_finite(c);
    for (const auto& [t, _] : unary_[u])
      if (t == s)
        throw input_error("label " + std::to_string(s) + " added twice to node " + std::to_string(u));
    unary_[u].emplace_back(s, c);
    return *this;
  }

  problem_builder& set_dummy_cost(index u, cost c)
  {
    check_node(u);
    check_finite(c);
    dummy_cost_[u] = c;
    return *this;
  }

  // Creates the edge uv with an all-zero table if it does not exist yet.
  problem_builder& add_edge(index u, index v)
  {
    check_node(u);
    check_node(v);
    if (u == v)
      throw input_error("self-loop on node " + std::to_string(u));
    edges_.emplace_back(std::min(u, v), std::max(u, v));
    return *this;
  }

  // Accumulates c onto theta_uv(s, t); s and t may be dummy_label.
  problem_builder& add_pairwise(index u, label s, index v, label t, cost c)
  {
    add_edge(u, v);
    check_finite(c);
    if (u > v) {
      std::swap(u, v);
      std::swap(s, t);
    }
    entries_.push_back({u, s, v, t, c});
    return *this;
  }

  problem build() const
  {
    problem p;
    const auto n = num_nodes();

    for (index u = 0; u < n; ++u) {
      auto labels = unary_[u];
      std::sort(labels.begin(), labels.end());
      for (const auto& [s, c] : labels) {
        p.labels_.push_back(s);
        p.unary_.push_back(c);
      }
      p.unary_.push_back(dummy_cost_[u]);
      p.label_offsets_.push_back(p.labels_.size());
    }

    auto edges = edges_;
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    for (const auto& [u, v] : edges) {
      p.edges_.push_back({u, v, p.pairwise_.size()});
      p.pairwise_.resize(p.pairwise_.size() + p.num_slots(u) * p.num_slots(v), 0.0);
    }

    std::vector<std::vector<problem::neighbor>> adjacency(n);
    for (index e = 0; e < p.edges_.size(); ++e) {
      adjacency[p.edges_[e].u].push_back({p.edges_[e].v, e});
      adjacency[p.edges_[e].v].push_back({p.edges_[e].u, e});
    }
    for (auto& list : adjacency) {
      std::sort(list.begin(), list.end(), [](const auto& a, const auto& b) { return a.node < b.node; });
      p.adjacency_.insert(p.adjacency_.end(), list.begin(), list.end());
      p.adjacency_offsets_.push_back(p.adjacency_.size());
    }

    for (const auto& en : entries_) {
      const auto su = p.slot_of(en.u, en.s);
      const auto sv = p.slot_of(en.v, en.t);
      if (!su || !sv)
        throw input_error("pairwise cost references a label outside the candidate set");
      const auto e = *p.find_edge(en.u, en.v);
      p.pairwise_[p.edges_[e].table_offset + *su * p.num_slots(en.v) + *sv] += en.c;
    }

    std::vector<std::vector<problem::owner>> owners(num_labels_);
    for (index u = 0; u < n; ++u) {
      const auto ls = p.labels(u);
      for (index i = 0; i < ls.size(); ++i)
        owners[ls[i]].push_back({u, i});
    }
    for (const auto& list : owners) {
      p.owners_.insert(p.owners_.end(), list.begin(), list.end());
      p.owner_offsets_.push_back(p.owners_.size());
    }

    for (const auto c : p.unary_)
      p.total_absolute_cost_ += std::abs(c);
    for (const auto c : p.pairwise_)
      p.total_absolute_cost_ += std::abs(c);
    return p;
  }

private:
  struct entry {
    index u;
    label s;
    index v;
    label t;
    cost c;
  };

  void check_node(index u) const
  {
    if (u >= num_nodes())
      throw input_error("node " + std::to_string(u) + " out of range");
  }

  static void check_finite(cost c)
  {
    if (!std::isfinite(c))
      throw input_error("non-finite cost");
  }

  index num_labels_;
  std::vector<std::vector<std::pair<label, cost>>> unary_;
  std::vector<cost> dummy_cost_;
  std::vector<std::pair<index, index>> edges_;
  std::vector<entry> entries_;
};

//
// One label (or dummy_label) per node. Domain validity is checked against a
// problem by the operations that consume it; feasibility is separate.
//
class assignment {
public:
  assignment() = default;
  explicit assignment(index num_nodes, label fill = dummy_label) : labels_(num_nodes, fill) { }
  assignment(std::initializer_list<label> labels) : labels_(labels) { }
  explicit assignment(std::vector<label> labels) : labels_(std::move(labels)) { }

  index size() const { return labels_.size(); }
  label& operator[](index u) { return labels_[u]; }
  label operator[](index u) const { return labels_[u]; }

  auto begin() const { return labels_.begin(); }
  auto end() const { return labels_.end(); }

  const std::vector<label>& labels() const { return labels_; }

  friend bool operator==(const assignment&, const assignment&) = default;

private:
  std::vector<label> labels_;
};

inline bool is_domain_valid(const problem& p, const assignment& x)
{
  if (x.size() != p.num_nodes())
    return false;
  for (index u = 0; u < p.num_nodes(); ++u)
    if (!p.slot_of(u, x[u]))
      return false;
  return true;
}

// Slot of every node; throws input_error on a domain violation.
inline std::vector<index> to_slots(const problem& p, const assignment& x)
{
  if (x.size() != p.num_nodes())
    throw input_error("assignment has " + std::to_string(x.size()) + " entries, problem has "
                      + std::to_string(p.num_nodes()) + " nodes");
  std::vector<index> slots(x.size());
  for (index u = 0; u < x.size(); ++u) {
    const auto slot = p.slot_of(u, x[u]);
    if (!slot)
      throw input_error("label " + std::to_string(x[u]) + " is not a candidate of node " + std::to_string(u));
    slots[u] = *slot;
  }
  return slots;
}

inline assignment from_slots(const problem& p, std::span<const index> slots)
{
  assignment x(p.num_nodes());
  for (index u = 0; u < p.num_nodes(); ++u)
    x[u] = p.label_at(u, slots[u]);
  return x;
}

inline cost energy_of_slots(const problem& p, std::span<const index> slots)
{
  cost result = 0;
  for (index u = 0; u < p.num_nodes(); ++u)
    result += p.unary(u, slots[u]);
  for (index e = 0; e < p.num_edges(); ++e) {
    const auto& ed = p.get_edge(e);
    result += p.pairwise(e, slots[ed.u], slots[ed.v]);
  }
  return result;
}

inline cost energy(const problem& p, const assignment& x)
{
  const auto slots = to_slots(p, x);
  return energy_of_slots(p, slots);
}

// True iff no non-dummy label is used by two distinct nodes.
inline bool is_feasible(const problem& p, const assignment& x)
{
  if (!is_domain_valid(p, x))
    throw input_error("assignment is not domain-valid");
  std::vector<bool> used(p.num_labels(), false);
  for (const auto s : x) {
    if (s == dummy_label)
      continue;
    if (used[s])
      return false;
    used[s] = true;
  }
  return true;
}

//
// Dual variables: edge messages phi and label messages lambda.
//
// phi is stored per edge as two vectors: phi_{u,v}(.) over the slots of u and
// phi_{v,u}(.) over the slots of v, with u < v the edge's endpoints.
// lambda_{u,#} stays at theta_u(#)/2.
//
class reparametrization {
public:
  reparametrization() = default;

  explicit reparametrization(const problem& p)
  : phi_offsets_(p.num_edges() + 1)
  , lambda_offsets_(p.num_nodes() + 1)
  {
    std::size_t offset = 0;
    for (index e = 0; e < p.num_edges(); ++e) {
      phi_offsets_[e] = offset;
      const auto& ed = p.get_edge(e);
      offset += p.num_slots(ed.u) + p.num_slots(ed.v);
    }
    phi_offsets_.back() = offset;
    phi_.assign(offset, 0.0);

    offset = 0;
    for (index u = 0; u < p.num_nodes(); ++u) {
      lambda_offsets_[u] = offset;
      offset += p.num_slots(u);
    }
    lambda_offsets_.back() = offset;
    lambda_.assign(offset, 0.0);
    for (index u = 0; u < p.num_nodes(); ++u)
      lambda(u)[p.dummy_slot(u)] = p.unary(u, p.dummy_slot(u)) / 2;
  }

  // phi_{a,b}(.) for edge e, where a is the endpoint `from`.
  std::span<cost> phi(const problem& p, index e, index from)
  {
    const auto& ed = p.get_edge(e);
    assert(from == ed.u || from == ed.v);
    cost* base = phi_.data() + phi_offsets_[e];
    return from == ed.u ? std::span<cost>{base, p.num_slots(ed.u)}
                        : std::span<cost>{base + p.num_slots(ed.u), p.num_slots(ed.v)};
  }

  std::span<const cost> phi(const problem& p, index e, index from) const
  {
    return const_cast<reparametrization*>(this)->phi(p, e, from);
  }

  std::span<cost> lambda(index u)
  {
    return {lambda_.data() + lambda_offsets_[u], lambda_offsets_[u + 1] - lambda_offsets_[u]};
  }

  std::span<const cost> lambda(index u) const
  {
    return {lambda_.data() + lambda_offsets_[u], lambda_offsets_[u + 1] - lambda_offsets_[u]};
  }

  friend bool operator==(const reparametrization&, const reparametrization&) = default;

private:
  std::vector<std::size_t> phi_offsets_;
  std::vector<cost> phi_;
  std::vector<std::size_t> lambda_offsets_;
  std::vector<cost> lambda_;
};

// xi^{phi,lambda}_u at a slot.
inline cost reparametrized_unary_slot(const problem& p, const reparametrization& r, index u, index slot)
{
  cost result = p.unary(u, slot) / 2 + r.lambda(u)[slot];
  for (const auto& n : p.neighbors(u))
    result -= r.phi(p, n.edge, u)[slot];
  return result;
}

// All slots of xi^{phi,lambda}_u at once.
inline void reparametrized_unaries(const problem& p, const reparametrization& r, index u, std::span<cost> out)
{
  assert(out.size() == p.num_slots(u));
  const auto lam = r.lambda(u);
  for (index i = 0; i < out.size(); ++i)
    out[i] = p.unary(u, i) / 2 + lam[i];
  for (const auto& n : p.neighbors(u)) {
    const auto phi = r.phi(p, n.edge, u);
    for (index i = 0; i < out.size(); ++i)
      out[i] -= phi[i];
  }
}

// theta^phi_uv with slots in the edge's stored orientation.
inline cost reparametrized_pairwise_slot(const problem& p, const reparametrization& r, index e, index slot_u, index slot_v)
{
  const auto& ed = p.get_edge(e);
  return p.pairwise(e, slot_u, slot_v) + r.phi(p, e, ed.u)[slot_u] + r.phi(p, e, ed.v)[slot_v];
}

// LAP-side unary xi-hat^lambda_u = theta_u/2 - lambda_u.
inline cost lap_unary_slot(const problem& p, const reparametrization& r, index u, index slot)
{
  return p.unary(u, slot) / 2 - r.lambda(u)[slot];
}

inline index checked_slot(const problem& p, index u, label s)
{
  if (u >= p.num_nodes())
    throw input_error("node " + std::to_string(u) + " out of range");
  const auto slot = p.slot_of(u, s);
  if (!slot)
    throw input_error("label " + std::to_string(s) + " is not a candidate of node " + std::to_string(u));
  return *slot;
}

inline cost reparametrized_unary(const problem& p, const reparametrization& r, index u, label s)
{
  return reparametrized_unary_slot(p, r, u, checked_slot(p, u, s));
}

inline cost lap_unary(const problem& p, const reparametrization& r, index u, label s)
{
  return lap_unary_slot(p, r, u, checked_slot(p, u, s));
}

// theta^phi_uv(s, t) for the edge between u and v; s belongs to u, t to v.
inline cost reparametrized_pairwise(const problem& p, const reparametrization& r, index u, index v, label s, label t)
{
  const auto su = checked_slot(p, u, s);
  const auto sv = checked_slot(p, v, t);
  const auto e = p.find_edge(u, v);
  if (!e)
    throw input_error("no edge between nodes " + std::to_string(u) + " and " + std::to_string(v));
  return u < v ? reparametrized_pairwise_slot(p, r, *e, su, sv) : reparametrized_pairwise_slot(p, r, *e, sv, su);
}

//
// Cost views consumed by the primal heuristics: unary(u, slot) and
// pairwise(e, slot_u, slot_v) in the edge's stored orientation.
//
class original_costs {
public:
  explicit original_costs(const problem& p) : p_(&p) { }

  const problem& get_problem() const { return *p_; }
  cost unary(index u, index slot) const { return p_->unary(u, slot); }
  cost pairwise(index e, index slot_u, index slot_v) const { return p_->pairwise(e, slot_u, slot_v); }

private:
  const problem* p_;
};

class reparametrized_costs {
public:
  reparametrized_costs(const problem& p, const reparametrization& r)
  : p_(&p)
  , r_(&r)
  , offsets_(p.num_nodes() + 1, 0)
  {
    for (index u = 0; u < p.num_nodes(); ++u)
      offsets_[u + 1] = offsets_[u] + p.num_slots(u);
    unary_.resize(offsets_.back());
    for (index u = 0; u < p.num_nodes(); ++u)
      reparametrized_unaries(p, r, u, {unary_.data() + offsets_[u], p.num_slots(u)});
  }

  const problem& get_problem() const { return *p_; }
  cost unary(index u, index slot) const { return unary_[offsets_[u] + slot]; }
  cost pairwise(index e, index slot_u, index slot_v) const
  {
    return reparametrized_pairwise_slot(*p_, *r_, e, slot_u, slot_v);
  }

private:
  const problem* p_;
  const reparametrization* r_;
  std::vector<std::size_t> offsets_;
  std::vector<cost> unary_;
};

}

#endif
