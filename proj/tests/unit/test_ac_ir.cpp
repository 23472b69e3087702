#include <doctest.h>

#include <cmath>

#include "mps2nn/ac_ir.hpp"

using namespace mps2nn;

namespace {

int count_kind(const ArithmeticCircuit& ac, AcNode::Kind k) {
  int c = 0;
  for (const auto& nd : ac.nodes) c += nd.kind == k;
  return c;
}

void check_all_states_match(const Mps& mps, const ArithmeticCircuit& ac,
                            const ContractionPlan& plan) {
  for (const auto& s : enumerate_states(mps, 1 << 12)) {
    cplx ref = execute_plan(mps, plan, s).value;
    cplx got = eval_ac(ac, s);
    CHECK(std::abs(got - ref) <= 1e-12 * std::max(1.0, std::abs(ref)));
  }
}

}  // namespace

TEST_CASE("three-site chi=2 sequential lowering: frozen size signature") {
  // hand count: 6 indicators; embeds (1x2, 2x2, 2x1) give 2+4+2 sums of 2
  // edges each; first pair 2 entries of 2 products + a 2-term sum; second
  // pair 1 entry of 2 products + a 2-term sum. Totals below.
  Mps mps = random_mps(3, 2, 2, 42);
  ArithmeticCircuit ac = lower_to_ac(mps, plan_sequential(mps));
  AcStats st = ac_stats(ac);
  CHECK(st.n == 23);
  CHECK(st.m == 34);
  CHECK(st.l == 5);
  CHECK(count_kind(ac, AcNode::Kind::Indicator) == 6);
  CHECK(count_kind(ac, AcNode::Kind::Product) == 6);
  CHECK(count_kind(ac, AcNode::Kind::Wsum) == 11);
}

TEST_CASE("four-site chi=2 parallel lowering: matrix pair costs 4P+2W") {
  // each round-1 pair is a (2x2)-by-vector product: per output entry two
  // binary products and one 2-term sum; hand totals for the whole DAG:
  Mps mps = random_mps(4, 2, 2, 42);
  ArithmeticCircuit ac = lower_to_ac(mps, plan_parallel(mps));
  AcStats st = ac_stats(ac);
  CHECK(count_kind(ac, AcNode::Kind::Indicator) == 8);
  CHECK(count_kind(ac, AcNode::Kind::Product) == 10);
  CHECK(count_kind(ac, AcNode::Kind::Wsum) == 17);
  CHECK(st.n == 35);
  CHECK(st.m == 54);
  CHECK(st.l == 5);
}

TEST_CASE("bondless chain folds into a single product of per-site sums") {
  const int n = 6, d = 2;
  Mps mps = random_mps(n, d, 1, 9);
  ArithmeticCircuit ac = lower_to_ac(mps, plan_sequential(mps));
  AcStats st = ac_stats(ac);
  CHECK(st.n == n * (d + 1) + 1);
  CHECK(st.m == n * d + n);
  CHECK(count_kind(ac, AcNode::Kind::Product) == 1);
  check_all_states_match(mps, ac, plan_sequential(mps));
}

TEST_CASE("lowered circuit evaluates to the planned contraction") {
  Mps mps = random_mps(5, 2, 3, 27);
  for (auto plan : {plan_sequential(mps), plan_parallel(mps)}) {
    ArithmeticCircuit ac = lower_to_ac(mps, plan);
    ac.validate();
    check_all_states_match(mps, ac, plan);
  }
}

TEST_CASE("binary normalization preserves values and caps product arity") {
  Mps mps = random_mps(6, 2, 1, 14);  // folding makes a 6-ary product
  ContractionPlan plan = plan_sequential(mps);
  ArithmeticCircuit ac = lower_to_ac(mps, plan);
  ArithmeticCircuit bin = normalize_binary(ac);
  bin.validate();
  for (const auto& nd : bin.nodes)
    if (nd.kind == AcNode::Kind::Product) CHECK(nd.inputs.size() == 2);
  check_all_states_match(mps, bin, plan);
}

TEST_CASE("log_value_bound dominates every reachable value") {
  for (uint64_t seed : {1u, 2u, 3u}) {
    Mps mps = random_mps(4, 2, 3, seed);
    ArithmeticCircuit ac = lower_to_ac(mps, plan_parallel(mps));
    double bound = log_value_bound(ac);
    CHECK(std::isfinite(bound));
    for (const auto& s : enumerate_states(mps, 64)) {
      double mag = std::abs(eval_ac(ac, s));
      if (mag > 0) CHECK(std::log(mag) <= bound + 1e-12);
    }
  }
}

TEST_CASE("gauge-transformed chains contract to the same amplitudes") {
  Mps mps = random_mps(4, 2, 2, 77);
  // insert G, G^-1 on the bond between sites 1 and 2:
  // A'[a,k,b] = sum_c A[a,k,c] G[c,b]; B'[a,k,b] = sum_c Ginv[a,c] B[c,k,b]
  Mps gauged = mps;
  const double g[2][2] = {{2.0, 1.0}, {0.5, 1.5}};
  const double det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
  const double gi[2][2] = {{g[1][1] / det, -g[0][1] / det},
                           {-g[1][0] / det, g[0][0] / det}};
  DenseTensor& a = gauged.sites[1];
  DenseTensor olda = mps.sites[1];
  for (int x = 0; x < a.shape[0]; ++x)
    for (int k = 0; k < a.shape[1]; ++k)
      for (int b = 0; b < 2; ++b) {
        cplx acc = 0;
        for (int c = 0; c < 2; ++c) acc += olda.at3(x, k, c) * g[c][b];
        a.at3(x, k, b) = acc;
      }
  DenseTensor& bt = gauged.sites[2];
  DenseTensor oldb = mps.sites[2];
  for (int x = 0; x < 2; ++x)
    for (int k = 0; k < bt.shape[1]; ++k)
      for (int b = 0; b < bt.shape[2]; ++b) {
        cplx acc = 0;
        for (int c = 0; c < 2; ++c) acc += gi[x][c] * oldb.at3(c, k, b);
        bt.at3(x, k, b) = acc;
      }
  ArithmeticCircuit ac1 = lower_to_ac(mps, plan_parallel(mps));
  ArithmeticCircuit ac2 = lower_to_ac(gauged, plan_parallel(gauged));
  for (const auto& s : enumerate_states(mps, 16)) {
    cplx v1 = eval_ac(ac1, s), v2 = eval_ac(ac2, s);
    CHECK(std::abs(v1 - v2) <= 1e-10 * std::max(1.0, std::abs(v1)));
  }
}

TEST_CASE("circuit json round trip preserves evaluation and stats") {
  Mps mps = random_mps(4, 3, 2, 8);
  ArithmeticCircuit ac = lower_to_ac(mps, plan_parallel(mps));
  ArithmeticCircuit back = ac_from_json(ac_to_json(ac));
  back.validate();
  AcStats sa = ac_stats(ac), sb = ac_stats(back);
  CHECK(sa.n == sb.n);
  CHECK(sa.m == sb.m);
  CHECK(sa.l == sb.l);
  CHECK(sa.w_max == sb.w_max);
  BasisState s{2, 0, 1, 2};
  CHECK(eval_ac(back, s) == eval_ac(ac, s));
}

TEST_CASE("validate flags structural breakage") {
  Mps mps = random_mps(3, 2, 2, 4);
  ArithmeticCircuit ac = lower_to_ac(mps, plan_sequential(mps));

  ArithmeticCircuit forward = ac;
  // point some product at a later node: topological order broken
  for (auto& nd : forward.nodes)
    if (nd.kind == AcNode::Kind::Product) {
      nd.inputs[0] = (int)forward.nodes.size() - 1;
      break;
    }
  CHECK_THROWS_AS(forward.validate(), std::logic_error);

  ArithmeticCircuit dup = ac;
  for (int i = 0; i < (int)dup.nodes.size(); ++i)
    if (dup.nodes[i].kind == AcNode::Kind::Indicator && i > 0) {
      dup.nodes[i].site = dup.nodes[0].site;
      dup.nodes[i].value = dup.nodes[0].value;
      break;
    }
  CHECK_THROWS_AS(dup.validate(), std::logic_error);
}
