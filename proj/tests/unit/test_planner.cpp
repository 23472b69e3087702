#include <doctest.h>

#include <cmath>

#include "mps2nn/contraction_planner.hpp"

using namespace mps2nn;

TEST_CASE("sequential rounds grow with sites, parallel rounds with log") {
  for (int n : {2, 3, 5, 8, 16}) {
    Mps mps = random_mps(n, 2, 3, 7);
    CHECK(plan_sequential(mps).round_depth() == n);
    int expect = 1 + (int)std::ceil(std::log2((double)n));
    CHECK(plan_parallel(mps).round_depth() == expect);
  }
}

TEST_CASE("parallel halves the operand queue each round") {
  Mps mps = random_mps(8, 2, 2, 7);
  CostReport cost = plan_cost(plan_parallel(mps));
  CHECK(cost.per_round_steps == std::vector<int>{8, 4, 2, 1});

  Mps odd = random_mps(5, 2, 2, 7);
  CostReport codd = plan_cost(plan_parallel(odd));
  // the odd operand is carried, not paired twice
  CHECK(codd.per_round_steps == std::vector<int>{5, 2, 1, 1});
}

TEST_CASE("plan cost matches the contraction counter") {
  Mps mps = random_mps(6, 3, 3, 21);
  int64_t counted = 0;
  contract_exact(mps, BasisState(6, 1), &counted);
  CHECK(plan_cost(plan_sequential(mps)).multiply_count == counted);
}

TEST_CASE("chain without bonds costs N*d + N-1 multiplies") {
  Mps mps = random_mps(7, 2, 1, 3);
  CHECK(plan_cost(plan_sequential(mps)).multiply_count == 7 * 2 + 6);
}

TEST_CASE("executor reproduces exact contraction under both schemes") {
  Mps mps = random_mps(5, 3, 3, 17);
  ContractionPlan seq = plan_sequential(mps);
  ContractionPlan par = plan_parallel(mps);
  for (const auto& s : enumerate_states(mps, 1 << 10)) {
    cplx ref = contract_exact(mps, s);
    ExecResult a = execute_plan(mps, seq, s);
    ExecResult b = execute_plan(mps, par, s);
    double scale = std::max(1e-300, std::abs(ref));
    CHECK(std::abs(a.value - ref) <= 1e-12 * scale);
    CHECK(std::abs(b.value - ref) <= 1e-12 * scale);
  }
}

TEST_CASE("executed cost equals planned cost for both schemes") {
  Mps mps = random_mps(6, 2, 4, 9);
  BasisState s(6, 0);
  for (auto plan : {plan_sequential(mps), plan_parallel(mps)}) {
    CostReport planned = plan_cost(plan);
    ExecResult run = execute_plan(mps, plan, s);
    CHECK(run.cost.multiply_count == planned.multiply_count);
    CHECK(run.cost.per_round == planned.per_round);
  }
}

TEST_CASE("per-round multiplies sum to the total") {
  Mps mps = random_mps(9, 2, 3, 5);
  for (auto plan : {plan_sequential(mps), plan_parallel(mps)}) {
    CostReport c = plan_cost(plan);
    int64_t sum = 0;
    for (int64_t r : c.per_round) sum += r;
    CHECK(sum == c.multiply_count);
    CHECK(c.round_depth == plan.round_depth());
  }
}

TEST_CASE("plan json round trip is faithful") {
  Mps mps = random_mps(6, 2, 3, 33);
  ContractionPlan plan = plan_parallel(mps);
  ContractionPlan back = plan_from_json(plan_to_json(plan));
  CHECK(back.scheme == plan.scheme);
  CHECK(back.root == plan.root);
  REQUIRE(back.steps.size() == plan.steps.size());
  BasisState s(6, 1);
  CHECK(execute_plan(mps, back, s).value == execute_plan(mps, plan, s).value);
}

TEST_CASE("executor rejects a plan for mismatched shapes") {
  Mps mps = random_mps(5, 2, 3, 1);
  ContractionPlan plan = plan_sequential(mps);
  Mps other = random_mps(5, 2, 4, 1);
  CHECK_THROWS_AS((void)execute_plan(other, plan, BasisState(5, 0)),
                  std::invalid_argument);
}
