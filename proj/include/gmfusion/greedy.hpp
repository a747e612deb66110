#ifndef GMFUSION_GREEDY_HPP
#define GMFUSION_GREEDY_HPP

#include <cstdint>
#include <functional>
#include <vector>

#include "gmfusion/model.hpp"
#include "gmfusion/random.hpp"

namespace gmfusion {

template<typename T>
concept cost_view = requires(const T& view, index u, index e, index slot) {
  { view.get_problem() } -> std::convertible_to<const problem&>;
  { view.unary(u, slot) } -> std::convertible_to<cost>;
  { view.pairwise(e, slot, slot) } -> std::convertible_to<cost>;
};

//
// Unassigned neighbors of the assigned node set, N(V') = (U_{u in V'} N(u)) \ V',
// kept as a vector with position lookup for O(1) insert, erase and uniform draws.
//
class greedy_frontier {
public:
  explicit greedy_frontier(index num_nodes) : position_(num_nodes, npos) { }

  bool empty() const { return nodes_.empty(); }
  index size() const { return nodes_.size(); }
  bool contains(index u) const { return position_[u] != npos; }

  void insert(index u)
  {
    if (contains(u))
      return;
    position_[u] = nodes_.size();
    nodes_.push_back(u);
  }

  void erase(index u)
  {
    if (!contains(u))
      return;
    const auto pos = position_[u];
    nodes_[pos] = nodes_.back();
    position_[nodes_[pos]] = pos;
    nodes_.pop_back();
    position_[u] = npos;
  }

  index draw(random_engine& rng) const { return nodes_[uniform_index(rng, nodes_.size())]; }

private:
  static constexpr index npos = static_cast<index>(-1);
  std::vector<index> nodes_;
  std::vector<index> position_;
};

// Observer hook for instrumented replays: (selected node, whether the frontier
// was non-empty at selection time).
using greedy_observer = std::function<void(index, bool)>;

//
// Randomized greedy: repeatedly pick a node uniformly from the frontier of the
// assigned set (or from all unassigned nodes when the frontier is empty) and
// give it the locally cheapest label that is still unused.
//
// Ties go to the lowest label; the dummy only wins when strictly cheaper.
//
template<cost_view View>
assignment greedy_assignment(const View& costs, random_engine& rng, const greedy_observer& observe = {})
{
  const problem& p = costs.get_problem();
  const auto n = p.num_nodes();

  std::vector<index> slot(n, 0);
  std::vector<bool> assigned(n, false);
  std::vector<bool> used(p.num_labels(), false);
  greedy_frontier frontier(n);
  greedy_frontier unassigned(n);
  for (index u = 0; u < n; ++u)
    unassigned.insert(u);

  std::vector<cost> score;
  for (index step = 0; step < n; ++step) {
    const bool from_frontier = !frontier.empty();
    const index u = from_frontier ? frontier.draw(rng) : unassigned.draw(rng);
    if (observe)
      observe(u, from_frontier);

    const auto slots = p.num_slots(u);
    score.resize(slots);
    for (index i = 0; i < slots; ++i)
      score[i] = costs.unary(u, i);
    for (const auto& nb : p.neighbors(u)) {
      if (!assigned[nb.node])
        continue;
      const bool u_first = p.get_edge(nb.edge).u == u;
      for (index i = 0; i < slots; ++i)
        score[i] += u_first ? costs.pairwise(nb.edge, i, slot[nb.node])
                            : costs.pairwise(nb.edge, slot[nb.node], i);
    }

    const auto labels = p.labels(u);
    index best = p.dummy_slot(u);
    cost best_score = infinity;
    for (index i = 0; i < labels.size(); ++i) {
      if (!used[labels[i]] && score[i] < best_score) {
        best = i;
        best_score = score[i];
      }
    }
    if (score[p.dummy_slot(u)] < best_score)
      best = p.dummy_slot(u);

    slot[u] = best;
    assigned[u] = true;
    if (best != p.dummy_slot(u))
      used[labels[best]] = true;

    frontier.erase(u);
    unassigned.erase(u);
    for (const auto& nb : p.neighbors(u))
      if (!assigned[nb.node])
        frontier.insert(nb.node);
  }

  return from_slots(p, slot);
}

template<cost_view View>
assignment greedy_assignment(const View& costs, std::uint64_t seed)
{
  random_engine rng(seed);
  return greedy_assignment(costs, rng);
}

inline assignment greedy_on_reparametrized(const problem& p, const reparametrization& r, random_engine& rng)
{
  return greedy_assignment(reparametrized_costs(p, r), rng);
}

inline assignment greedy_on_reparametrized(const problem& p, const reparametrization& r, std::uint64_t seed)
{
  random_engine rng(seed);
  return greedy_on_reparametrized(p, r, rng);
}

}

#endif
