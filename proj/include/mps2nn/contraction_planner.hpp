#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "mps2nn/tensor_core.hpp"

namespace mps2nn {

// One schedule step. Embed selects the matrix A^{(site)}[s_site]; Pair
// multiplies two earlier operands. Operand ids are step indices. Dims of the
// produced operand (left, right) and the covered site range are recorded so
// that cost accounting and the AC lowering never re-derive shapes.
struct PlanStep {
  enum class Kind { Embed, Pair };
  Kind kind = Kind::Embed;
  int site = -1;            // Embed only
  int phys = 0;             // Embed only: local dimension d_site
  int lhs = -1, rhs = -1;   // Pair only
  int round = 0;            // 0 = embed round, contraction rounds start at 1
  int lo = 0, hi = 0;       // covered site range [lo, hi]
  int left = 1, right = 1;  // bond dims of the produced operand
};

struct ContractionPlan {
  std::string scheme;  // "sequential" | "parallel"
  std::vector<PlanStep> steps;
  int root = -1;  // step producing the final 1x1 operand

  // embed round + contraction rounds; sequential gives N, parallel
  // 1 + ceil(log2 N)
  int round_depth() const;
};

struct CostReport {
  int64_t multiply_count = 0;
  int round_depth = 0;
  std::vector<int64_t> per_round;     // multiplies per round; sums to total
  std::vector<int> per_round_steps;   // step count per round
};

ContractionPlan plan_sequential(const Mps& mps);
ContractionPlan plan_parallel(const Mps& mps);

// Cost model shared with contract_exact's counter and the AC lowering:
// an embed costs d*l*r (one-hot weighted sum per entry), a pair l*m*r.
CostReport plan_cost(const ContractionPlan& plan);

struct ExecResult {
  cplx value;
  CostReport cost;
};

// Numeric reference executor. Throws std::invalid_argument when the plan's
// recorded shapes do not match the MPS.
ExecResult execute_plan(const Mps& mps, const ContractionPlan& plan,
                        const BasisState& s);

nlohmann::json plan_to_json(const ContractionPlan& plan);
ContractionPlan plan_from_json(const nlohmann::json& j);

}  // namespace mps2nn
