#ifndef GMFUSION_TOOLS_CLI_HPP
#define GMFUSION_TOOLS_CLI_HPP

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "gmfusion/gmfusion.hpp"

namespace gmfusion::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_runtime_error = 1;
inline constexpr int exit_usage_error = 2;

namespace detail {

inline std::string g6(double v)
{
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.6g", v);
  return buffer;
}

inline problem load_problem(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
    throw io_error("cannot open instance '" + path + "'");
  try {
    return to_problem(parse_dd(in));
  } catch (const parse_error& e) {
    throw input_error(path + ": " + e.what());
  }
}

inline std::vector<assignment> load_proposals(const std::string& path, const problem& p)
{
  std::ifstream in(path);
  if (!in)
    throw io_error("cannot open proposals '" + path + "'");
  try {
    return parse_proposals(in, p);
  } catch (const parse_error& e) {
    throw input_error(path + ": " + e.what());
  }
}

inline std::ofstream open_output(const std::string& path)
{
  std::ofstream out(path);
  if (!out)
    throw io_error("cannot write '" + path + "'");
  return out;
}

struct solve_args {
  std::string input;
  solver_config cfg;
  double time_budget = 0;
  std::string trace_path;
  std::string output_path;
};

struct fuse_args {
  std::string instance;
  std::string proposals;
  std::string results;
  fusion_mode fusion = fusion_mode::qpbo_i;
  std::uint64_t seed = 0;
};

struct bound_args {
  std::string instance;
  std::string proposals;
};

inline const std::map<std::string, fusion_mode> fusion_names{
  {"qpbo-i", fusion_mode::qpbo_i}, {"exact", fusion_mode::exact}};

inline int run_solve(const solve_args& a, std::ostream& out)
{
  const auto p = load_problem(a.input);
  const auto result = solve(p, a.cfg);

  if (!a.trace_path.empty()) {
    auto file = open_output(a.trace_path);
    write_trace(file, result.trace);
  }
  if (!a.output_path.empty()) {
    auto file = open_output(a.output_path);
    write_proposal(file, result.best);
  }

  out << "energy=" << g6(result.best_energy) << " bound=" << g6(result.final_dual_bound)
      << " gap=" << g6(result.gap) << " optimal=" << (result.proved_optimal ? "true" : "false")
      << " time=" << g6(result.elapsed_seconds) << '\n';
  return exit_ok;
}

inline int run_fuse(const fuse_args& a, std::ostream& out)
{
  const auto p = load_problem(a.instance);
  const auto proposals = load_proposals(a.proposals, p);
  const auto result = fuse_sequence(p, proposals, a.fusion, a.seed);

  auto file = open_output(a.results);
  file << "step,proposal_energy,incumbent_energy\n";
  for (index k = 0; k < result.steps.size(); ++k)
    file << k + 1 << ',' << gmfusion::detail::format_exact(result.steps[k].proposal_energy) << ','
         << gmfusion::detail::format_exact(result.steps[k].incumbent_energy) << '\n';
  file.flush();
  if (!file)
    throw io_error("cannot write '" + a.results + "'");

  out << "energy=" << g6(energy(p, result.best)) << '\n';
  return exit_ok;
}

inline int run_bound(const bound_args& a, std::ostream& out)
{
  const auto p = load_problem(a.instance);
  const auto proposals = load_proposals(a.proposals, p);
  if (proposals.size() != 2)
    throw input_error("bound expects exactly two proposals (x1 feasible, x2 any), got "
                      + std::to_string(proposals.size()));
  const auto& x1 = proposals[0];
  const auto& x2 = proposals[1];
  if (!is_feasible(p, x1))
    throw contract_error("the first proposal must be a feasible assignment; the search-space bound "
                         "only holds when fusing into a feasible incumbent");

  const auto b = count_bound(p, x2);
  out << "m=" << b.dummies << " n=" << b.distinct_labels << " bound=";
  if (b.overflow)
    out << "overflow";
  else
    out << b.value;

  index differing = 0;
  for (index u = 0; u < p.num_nodes(); ++u)
    differing += x1[u] != x2[u];
  if (differing <= 20)
    out << " count=" << count_feasible_fusions(p, x1, x2);
  out << '\n';
  return exit_ok;
}

}

//
// Entry point of the command line tool; returns the process exit code.
//
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr)
{
  CLI::App app{"Graph matching by dual block-coordinate ascent and fusion moves"};
  app.require_subcommand(1);

  detail::solve_args solve_a;
  std::string trace_clock_name = "wall";
  std::string primal_name = "greedy";
  auto* solve_cmd = app.add_subcommand("solve", "Solve a .dd instance");
  solve_cmd->add_option("input", solve_a.input, "Instance in .dd format")->required();
  solve_cmd->add_option("--max-batches", solve_a.cfg.max_batches, "Maximum number of batches")
    ->check(CLI::PositiveNumber)->capture_default_str();
  solve_cmd->add_option("--batch-size", solve_a.cfg.batch_size, "Dual sweeps per batch")
    ->check(CLI::PositiveNumber)->capture_default_str();
  solve_cmd->add_option("--greedy-generations", solve_a.cfg.greedy_generations, "Proposals per sweep")
    ->check(CLI::PositiveNumber)->capture_default_str();
  auto* budget = solve_cmd->add_option("--time-budget", solve_a.time_budget, "Time budget in seconds")
    ->check(CLI::PositiveNumber);
  solve_cmd->add_option("--seed", solve_a.cfg.seed, "Random seed")->capture_default_str();
  solve_cmd->add_option("--fusion", solve_a.cfg.fusion, "Fusion solver")
    ->transform(CLI::CheckedTransformer(detail::fusion_names, CLI::ignore_case));
  solve_cmd->add_option("--primal", primal_name, "Proposal generator")
    ->check(CLI::IsMember({"greedy", "lap"}))->capture_default_str();
  solve_cmd->add_option("--trace", solve_a.trace_path, "Write the convergence trace (CSV)");
  solve_cmd->add_option("--trace-clock", trace_clock_name, "Timestamps in the trace: wall, or none for reproducible files")
    ->check(CLI::IsMember({"wall", "none"}))->capture_default_str();
  solve_cmd->add_option("--output", solve_a.output_path, "Write the best assignment (proposal format)");

  detail::fuse_args fuse_a;
  auto* fuse_cmd = app.add_subcommand("fuse", "Fuse a list of proposals one after another");
  fuse_cmd->add_option("instance", fuse_a.instance, "Instance in .dd format")->required();
  fuse_cmd->add_option("proposals", fuse_a.proposals, "Proposal file")->required();
  fuse_cmd->add_option("results", fuse_a.results, "Per-step results (CSV)")->required();
  fuse_cmd->add_option("--fusion", fuse_a.fusion, "Fusion solver")
    ->transform(CLI::CheckedTransformer(detail::fusion_names, CLI::ignore_case));
  fuse_cmd->add_option("--seed", fuse_a.seed, "Random seed")->capture_default_str();

  detail::bound_args bound_a;
  auto* bound_cmd = app.add_subcommand("bound", "Search-space size of fusing two proposals");
  bound_cmd->add_option("instance", bound_a.instance, "Instance in .dd format")->required();
  bound_cmd->add_option("proposals", bound_a.proposals, "Two proposals: a feasible x1 and any x2")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return exit_usage_error;
  }

  try {
    if (*solve_cmd) {
      if (*budget)
        solve_a.cfg.time_budget_seconds = solve_a.time_budget;
      solve_a.cfg.primal = primal_name == "lap" ? primal_heuristic::lap : primal_heuristic::greedy;
      solve_a.cfg.clock = trace_clock_name == "none" ? trace_clock::none : trace_clock::wall;
      return detail::run_solve(solve_a, out);
    }
    if (*fuse_cmd)
      return detail::run_fuse(fuse_a, out);
    return detail::run_bound(bound_a, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_runtime_error;
  }
}

}

#endif
