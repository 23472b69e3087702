#include "mps2nn/contraction_planner.hpp"

#include <algorithm>
#include <stdexcept>

namespace mps2nn {

int ContractionPlan::round_depth() const {
  int r = 0;
  for (const auto& st : steps) r = std::max(r, st.round);
  return r + 1;  // rounds are 0-based, depth counts the embed round too
}

static std::vector<PlanStep> embed_steps(const Mps& mps) {
  std::vector<PlanStep> steps;
  steps.reserve(static_cast<size_t>(mps.n()));
  for (int i = 0; i < mps.n(); ++i) {
    PlanStep st;
    st.kind = PlanStep::Kind::Embed;
    st.site = i;
    st.phys = mps.phys_dim(i);
    st.round = 0;
    st.lo = st.hi = i;
    st.left = mps.left_bond(i);
    st.right = mps.right_bond(i);
    steps.push_back(st);
  }
  return steps;
}

static PlanStep pair_step(const std::vector<PlanStep>& steps, int lhs, int rhs,
                          int round) {
  const PlanStep& a = steps[static_cast<size_t>(lhs)];
  const PlanStep& b = steps[static_cast<size_t>(rhs)];
  if (a.hi + 1 != b.lo || a.right != b.left)
    throw std::logic_error("pair of non-adjacent operands");
  PlanStep st;
  st.kind = PlanStep::Kind::Pair;
  st.lhs = lhs;
  st.rhs = rhs;
  st.round = round;
  st.lo = a.lo;
  st.hi = b.hi;
  st.left = a.left;
  st.right = b.right;
  return st;
}

ContractionPlan plan_sequential(const Mps& mps) {
  mps.validate();
  ContractionPlan plan;
  plan.scheme = "sequential";
  plan.steps = embed_steps(mps);
  int acc = 0;  // running left-to-right product
  for (int i = 1; i < mps.n(); ++i) {
    plan.steps.push_back(pair_step(plan.steps, acc, i, i));
    acc = static_cast<int>(plan.steps.size()) - 1;
  }
  plan.root = acc;
  return plan;
}

ContractionPlan plan_parallel(const Mps& mps) {
  mps.validate();
  ContractionPlan plan;
  plan.scheme = "parallel";
  plan.steps = embed_steps(mps);
  std::vector<int> live(static_cast<size_t>(mps.n()));
  for (int i = 0; i < mps.n(); ++i) live[static_cast<size_t>(i)] = i;
  int round = 1;
  while (live.size() > 1) {
    std::vector<int> next;
    for (size_t i = 0; i + 1 < live.size(); i += 2) {
      plan.steps.push_back(pair_step(plan.steps, live[i], live[i + 1], round));
      next.push_back(static_cast<int>(plan.steps.size()) - 1);
    }
    if (live.size() % 2 == 1) next.push_back(live.back());  // carry odd operand
    live.swap(next);
    ++round;
  }
  plan.root = live[0];
  return plan;
}

static int64_t step_cost(const ContractionPlan& plan, const PlanStep& st) {
  if (st.kind == PlanStep::Kind::Embed)
    return static_cast<int64_t>(st.phys) * st.left * st.right;
  const PlanStep& a = plan.steps[static_cast<size_t>(st.lhs)];
  return static_cast<int64_t>(a.left) * a.right * st.right;
}

CostReport plan_cost(const ContractionPlan& plan) {
  CostReport rep;
  rep.round_depth = plan.round_depth();
  rep.per_round.assign(static_cast<size_t>(rep.round_depth), 0);
  rep.per_round_steps.assign(static_cast<size_t>(rep.round_depth), 0);
  for (const auto& st : plan.steps) {
    int64_t c = step_cost(plan, st);
    rep.multiply_count += c;
    rep.per_round[static_cast<size_t>(st.round)] += c;
    rep.per_round_steps[static_cast<size_t>(st.round)] += 1;
  }
  return rep;
}

ExecResult execute_plan(const Mps& mps, const ContractionPlan& plan,
                        const BasisState& s) {
  if (static_cast<int>(s.size()) != mps.n())
    throw std::invalid_argument("basis state length does not match MPS");
  // row-major left x right matrix per executed step
  std::vector<std::vector<cplx>> out(plan.steps.size());
  for (size_t idx = 0; idx < plan.steps.size(); ++idx) {
    const PlanStep& st = plan.steps[idx];
    if (st.kind == PlanStep::Kind::Embed) {
      if (st.site < 0 || st.site >= mps.n())
        throw std::invalid_argument("plan references missing site");
      const DenseTensor& a = mps.sites[static_cast<size_t>(st.site)];
      if (a.shape[0] != st.left || a.shape[1] != st.phys ||
          a.shape[2] != st.right)
        throw std::invalid_argument("plan does not match MPS shapes");
      int k = s[static_cast<size_t>(st.site)];
      if (k < 0 || k >= st.phys)
        throw std::invalid_argument("basis index out of range");
      std::vector<cplx> m(static_cast<size_t>(st.left) * st.right);
      for (int l = 0; l < st.left; ++l)
        for (int r = 0; r < st.right; ++r)
          m[static_cast<size_t>(l) * st.right + r] = a.at3(l, k, r);
      out[idx] = std::move(m);
    } else {
      const PlanStep& a = plan.steps[static_cast<size_t>(st.lhs)];
      const PlanStep& b = plan.steps[static_cast<size_t>(st.rhs)];
      const auto& ma = out[static_cast<size_t>(st.lhs)];
      const auto& mb = out[static_cast<size_t>(st.rhs)];
      std::vector<cplx> m(static_cast<size_t>(st.left) * st.right);
      for (int l = 0; l < a.left; ++l)
        for (int r = 0; r < b.right; ++r) {
          cplx acc = 0.0;
          for (int k = 0; k < a.right; ++k)
            acc += ma[static_cast<size_t>(l) * a.right + k] *
                   mb[static_cast<size_t>(k) * b.right + r];
          m[static_cast<size_t>(l) * b.right + r] = acc;
        }
      out[idx] = std::move(m);
    }
  }
  ExecResult res;
  res.value = out[static_cast<size_t>(plan.root)][0];
  res.cost = plan_cost(plan);
  return res;
}

nlohmann::json plan_to_json(const ContractionPlan& plan) {
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& st : plan.steps) {
    nlohmann::json j;
    if (st.kind == PlanStep::Kind::Embed) {
      j["kind"] = "embed";
      j["site"] = st.site;
      j["phys"] = st.phys;
    } else {
      j["kind"] = "pair";
      j["lhs"] = st.lhs;
      j["rhs"] = st.rhs;
    }
    j["round"] = st.round;
    j["lo"] = st.lo;
    j["hi"] = st.hi;
    j["left"] = st.left;
    j["right"] = st.right;
    steps.push_back(j);
  }
  return nlohmann::json{
      {"scheme", plan.scheme}, {"steps", steps}, {"root", plan.root}};
}

ContractionPlan plan_from_json(const nlohmann::json& j) {
  ContractionPlan plan;
  plan.scheme = j.at("scheme").get<std::string>();
  plan.root = j.at("root").get<int>();
  for (const auto& js : j.at("steps")) {
    PlanStep st;
    if (js.at("kind") == "embed") {
      st.kind = PlanStep::Kind::Embed;
      st.site = js.at("site").get<int>();
      st.phys = js.at("phys").get<int>();
    } else {
      st.kind = PlanStep::Kind::Pair;
      st.lhs = js.at("lhs").get<int>();
      st.rhs = js.at("rhs").get<int>();
    }
    st.round = js.at("round").get<int>();
    st.lo = js.at("lo").get<int>();
    st.hi = js.at("hi").get<int>();
    st.left = js.at("left").get<int>();
    st.right = js.at("right").get<int>();
    plan.steps.push_back(st);
  }
  return plan;
}

}  // namespace mps2nn
