#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "gmfusion/model.hpp"
#include "oracles.hpp"

namespace gmfusion {
namespace {

problem two_node_problem()
{
  problem_builder b(2, 3);
  b.add_label(0, 0, 1.0).add_label(0, 2, -1.0);
  b.add_label(1, 0, 2.0).add_label(1, 1, 0.5);
  b.set_dummy_cost(1, 0.25);
  b.add_pairwise(0, 0, 1, 1, -3.0);
  b.add_pairwise(1, dummy_label, 0, 2, 4.0);
  return b.build();
}

bool pairwise_scan_feasible(const assignment& x)
{
  for (index u = 0; u < x.size(); ++u)
    for (index v = u + 1; v < x.size(); ++v)
      if (x[u] != dummy_label && x[u] == x[v])
        return false;
  return true;
}

}

TEST(model, slots_follow_sorted_labels)
{
  const auto p = two_node_problem();
  ASSERT_EQ(p.num_nodes(), 2u);
  EXPECT_EQ(p.num_slots(0), 3u);
  EXPECT_EQ(p.label_at(0, 0), 0u);
  EXPECT_EQ(p.label_at(0, 1), 2u);
  EXPECT_EQ(p.label_at(0, 2), dummy_label);
  EXPECT_EQ(p.slot_of(0, 2), 1u);
  EXPECT_FALSE(p.slot_of(0, 1).has_value());
  EXPECT_EQ(p.unary(1, p.dummy_slot(1)), 0.25);
  ASSERT_EQ(p.owners(0).size(), 2u);
  EXPECT_EQ(p.owners(0)[1].node, 1u);
  EXPECT_TRUE(p.owners(1).size() == 1 && p.owners(1)[0].node == 1);
}

TEST(model, builder_rejects_bad_input)
{
  problem_builder b(2, 2);
  b.add_label(0, 1, 0.0);
  EXPECT_THROW(b.add_label(0, 1, 1.0), input_error);
  EXPECT_THROW(b.add_label(0, 2, 1.0), input_error);
  EXPECT_THROW(b.add_label(2, 0, 1.0), input_error);
  EXPECT_THROW(b.add_edge(1, 1), input_error);
  EXPECT_THROW(b.add_label(1, 0, std::nan("")), input_error);
  b.add_pairwise(0, 0, 1, 0, 1.0);
  EXPECT_THROW(b.build(), input_error);
}

TEST(model, energy_all_dummy_with_zero_dummy_costs_is_zero)
{
  problem_builder b(3, 2);
  b.add_label(0, 0, 2.0).add_label(1, 1, -1.0).add_label(2, 0, 5.0);
  b.add_pairwise(0, 0, 1, 1, 7.0);
  b.add_edge(1, 2);
  const auto p = b.build();
  EXPECT_EQ(energy(p, assignment(3)), 0.0);
}

TEST(model, energy_single_node)
{
  problem_builder b(1, 1);
  b.add_label(0, 0, -3.5);
  const auto p = b.build();
  EXPECT_EQ(energy(p, assignment{0}), -3.5);
}

TEST(model, energy_includes_dummy_terms)
{
  const auto p = two_node_problem();
  EXPECT_DOUBLE_EQ(energy(p, assignment{0, 1}), 1.0 + 0.5 - 3.0);
  EXPECT_DOUBLE_EQ(energy(p, assignment{2, dummy_label}), -1.0 + 0.25 + 4.0);
  EXPECT_DOUBLE_EQ(energy(p, assignment{dummy_label, dummy_label}), 0.25);
}

TEST(model, energy_rejects_domain_violations)
{
  const auto p = two_node_problem();
  EXPECT_THROW(energy(p, assignment{1, 0}), input_error);
  EXPECT_THROW(energy(p, assignment{0}), input_error);
  EXPECT_THROW(is_feasible(p, assignment{0, 2}), input_error);
}

TEST(model, energy_matches_resummation_on_random_integer_instances)
{
  std::mt19937_64 rng(11);
  oracle::generator_options o;
  o.min_nodes = o.max_nodes = 4;
  o.min_labels = o.max_labels = 3;
  o.integer_costs = true;
  for (int trial = 0; trial < 200; ++trial) {
    const auto raw = oracle::random_instance(rng, o);
    const auto p = raw.build();
    const auto x = oracle::random_any(p, rng);
    EXPECT_EQ(energy(p, x), oracle::energy(raw, x));
  }
}

TEST(model, feasibility)
{
  const auto p = two_node_problem();
  EXPECT_TRUE(is_feasible(p, assignment(2)));
  EXPECT_FALSE(is_feasible(p, assignment{0, 0}));
  EXPECT_TRUE(is_feasible(p, assignment{0, 1}));
}

TEST(model, feasibility_matches_pairwise_scan)
{
  std::mt19937_64 rng(12);
  oracle::generator_options o;
  o.min_nodes = o.max_nodes = 5;
  o.label_probability = 0.8;
  for (int trial = 0; trial < 300; ++trial) {
    const auto p = oracle::random_instance(rng, o).build();
    const auto x = oracle::random_any(p, rng);
    EXPECT_EQ(is_feasible(p, x), pairwise_scan_feasible(x));
  }
}

TEST(model, removing_an_edge_removes_exactly_its_term)
{
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 100; ++trial) {
    auto raw = oracle::random_instance(rng);
    if (raw.pairwise.empty())
      continue;
    const auto p = raw.build();
    const auto x = oracle::random_any(p, rng);
    const auto e = raw.pairwise.back();
    raw.pairwise.pop_back();
    const auto q = raw.build();
    const cost term = x[e.u] == e.s && x[e.v] == e.t ? e.c : 0.0;
    EXPECT_NEAR(energy(p, x) - energy(q, x), term, 1e-12);
  }
}

TEST(model, reparametrized_unary_examples)
{
  problem_builder b(2, 1);
  b.add_label(0, 0, 4.0).add_label(1, 0, 0.0);
  b.add_edge(0, 1);
  const auto p = b.build();
  reparametrization r(p);
  EXPECT_EQ(reparametrized_unary(p, r, 0, 0), 2.0);

  problem_builder b2(2, 1);
  b2.add_label(0, 0, 0.0).add_label(1, 0, 0.0);
  b2.add_edge(0, 1);
  const auto p2 = b2.build();
  reparametrization r2(p2);
  r2.lambda(0)[0] = 1.0;
  r2.phi(p2, 0, 0)[0] = 0.5;
  EXPECT_EQ(reparametrized_unary(p2, r2, 0, 0), 0.5);
  EXPECT_THROW(reparametrized_unary(p2, r2, 0, 3), input_error);
}

TEST(model, reparametrized_pairwise_examples)
{
  const auto p = two_node_problem();
  reparametrization r(p);
  EXPECT_EQ(reparametrized_pairwise(p, r, 0, 1, 0, 1), -3.0);
  EXPECT_EQ(reparametrized_pairwise(p, r, 1, 0, dummy_label, 2), 4.0);

  r.phi(p, 0, 0)[0] = 1.0;
  r.phi(p, 0, 1)[0] = 2.0;
  EXPECT_EQ(reparametrized_pairwise(p, r, 0, 1, 0, 0), 3.0);
  EXPECT_EQ(reparametrized_pairwise(p, r, 1, 0, 0, 0), 3.0);
  EXPECT_THROW(reparametrized_pairwise(p, r, 0, 1, 1, 0), input_error);
}

TEST(model, initial_lambda_pins_dummy_to_half_cost)
{
  const auto p = two_node_problem();
  reparametrization r(p);
  EXPECT_EQ(r.lambda(1)[p.dummy_slot(1)], 0.125);
  EXPECT_EQ(lap_unary(p, r, 1, dummy_label), 0.0);
}

TEST(model, reparametrization_invariance)
{
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 300; ++trial) {
    const auto raw = oracle::random_instance(rng);
    const auto p = raw.build();
    reparametrization r(p);
    oracle::randomize(p, r, rng);
    const auto x = oracle::random_any(p, rng);

    cost sum = 0;
    for (index u = 0; u < p.num_nodes(); ++u)
      sum += reparametrized_unary(p, r, u, x[u]) + lap_unary(p, r, u, x[u]);
    for (const auto& ed : p.edges())
      sum += reparametrized_pairwise(p, r, ed.u, ed.v, x[ed.u], x[ed.v]);
    const auto e = oracle::energy(raw, x);
    EXPECT_NEAR(sum, e, 1e-9 * std::max(1.0, std::abs(e)));
  }
}

TEST(model, cost_views_agree_with_free_functions)
{
  std::mt19937_64 rng(15);
  const auto p = oracle::random_instance(rng).build();
  reparametrization r(p);
  oracle::randomize(p, r, rng);
  reparametrized_costs view(p, r);
  for (index u = 0; u < p.num_nodes(); ++u)
    for (index i = 0; i < p.num_slots(u); ++i)
      EXPECT_DOUBLE_EQ(view.unary(u, i), reparametrized_unary_slot(p, r, u, i));
}

}
