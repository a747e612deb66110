#ifndef GMFUSION_SOLVER_HPP
#define GMFUSION_SOLVER_HPP

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gmfusion/dual_bca.hpp"
#include "gmfusion/fusion.hpp"
#include "gmfusion/greedy.hpp"
#include "gmfusion/lap.hpp"
#include "gmfusion/model.hpp"
#include "gmfusion/trace.hpp"

namespace gmfusion {

enum class primal_heuristic { greedy, lap };

struct solver_config {
  std::int64_t max_batches = 50000;
  std::int64_t batch_size = 1;          // BCA sweeps per batch
  std::int64_t greedy_generations = 1;  // proposals per sweep
  std::optional<double> time_budget_seconds;
  std::uint64_t seed = 0;
  fusion_mode fusion = fusion_mode::qpbo_i;
  primal_heuristic primal = primal_heuristic::greedy;
  trace_clock clock = trace_clock::wall;

  void validate() const
  {
    if (max_batches < 1)
      throw input_error("max_batches must be at least 1");
    if (batch_size < 1)
      throw input_error("batch_size must be at least 1");
    if (greedy_generations < 1)
      throw input_error("greedy_generations must be at least 1");
    if (time_budget_seconds && !(*time_budget_seconds > 0))
      throw input_error("time budget must be positive");
  }
};

struct solve_outcome {
  assignment best;
  cost best_energy = infinity;
  cost final_dual_bound = -infinity;
  cost gap = infinity;
  std::vector<trace_record> trace;
  bool proved_optimal = false;
  std::int64_t batches = 0;
  double elapsed_seconds = 0;
};

inline constexpr double optimality_tolerance = 1e-6;

inline bool gap_closed(cost best_energy, cost bound)
{
  return best_energy - bound <= optimality_tolerance * std::max<cost>(1.0, std::abs(best_energy));
}

//
// Dual BCA with proposals generated between the phi- and lambda-steps of each
// sweep and fused into the incumbent right away.
//
inline solve_outcome solve(const problem& p, const solver_config& cfg)
{
  cfg.validate();
  trace_recorder trace(cfg.clock);
  random_engine rng(cfg.seed);

  dual_state st(p);
  assignment incumbent = greedy_assignment(original_costs(p), rng);
  cost incumbent_energy = energy(p, incumbent);
  trace.set_best(incumbent_energy);
  trace.record(0, st.bound, trace_event::greedy);

  auto offer = [&](const assignment& proposal) {
    auto fused = fuse(p, incumbent, proposal, cfg.fusion, rng);
    const auto e = energy(p, fused);
    if (e < incumbent_energy) {
      incumbent = std::move(fused);
      incumbent_energy = e;
      trace.set_best(e);
      trace.record(st.sweeps + 1, st.bound, trace_event::improved);
    }
  };

  const proposal_hook between = [&](const problem& pr, const reparametrization& r) -> std::optional<cost> {
    for (std::int64_t g = 0; g < cfg.greedy_generations; ++g) {
      if (cfg.primal == primal_heuristic::lap)
        offer(solve_lap(make_lap_instance(pr, r)).x);
      else
        offer(greedy_on_reparametrized(pr, r, rng));
    }
    return incumbent_energy;
  };
  const auto hook_event = cfg.primal == primal_heuristic::lap ? trace_event::lap : trace_event::greedy;

  solve_outcome out;
  for (std::int64_t batch = 0; batch < cfg.max_batches; ++batch) {
    for (std::int64_t k = 0; k < cfg.batch_size; ++k)
      bca_sweep(p, st, between, &trace, hook_event);
    out.batches = batch + 1;
    if (gap_closed(incumbent_energy, st.bound))
      break;
    if (cfg.time_budget_seconds && trace.elapsed() >= *cfg.time_budget_seconds)
      break;
  }

  out.best = std::move(incumbent);
  out.best_energy = incumbent_energy;
  out.final_dual_bound = st.bound;
  out.gap = incumbent_energy - st.bound;
  out.proved_optimal = gap_closed(incumbent_energy, st.bound);
  out.elapsed_seconds = trace.elapsed();
  out.trace = trace.release();
  return out;
}

struct fusion_step {
  cost proposal_energy;
  cost incumbent_energy;
};

struct fuse_sequence_result {
  assignment best;
  std::vector<fusion_step> steps;
};

//
// Folds the proposals into one incumbent, seeded by the first feasible
// proposal (all-dummy if there is none).
//
inline fuse_sequence_result fuse_sequence(const problem& p, const std::vector<assignment>& proposals, fusion_mode mode, random_engine& rng)
{
  if (proposals.empty())
    throw input_error("no proposals to fuse");
  for (const auto& x : proposals)
    to_slots(p, x);

  fuse_sequence_result result;
  result.best = assignment(p.num_nodes());
  for (const auto& x : proposals) {
    if (is_feasible(p, x)) {
      result.best = x;
      break;
    }
  }

  for (const auto& x : proposals) {
    result.best = fuse(p, result.best, x, mode, rng);
    result.steps.push_back({energy(p, x), energy(p, result.best)});
  }
  return result;
}

inline fuse_sequence_result fuse_sequence(const problem& p, const std::vector<assignment>& proposals, fusion_mode mode, std::uint64_t seed)
{
  random_engine rng(seed);
  return fuse_sequence(p, proposals, mode, rng);
}

}

#endif
