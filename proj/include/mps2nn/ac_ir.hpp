#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "mps2nn/contraction_planner.hpp"
#include "mps2nn/tensor_core.hpp"

namespace mps2nn {

struct AcNode {
  enum class Kind { Indicator, Product, Wsum };
  Kind kind = Kind::Indicator;
  int site = -1, value = -1;   // Indicator
  std::vector<int> inputs;     // Product / Wsum
  std::vector<cplx> weights;   // Wsum, parallel to inputs
};

// DAG in topological order (every input id precedes its consumer). Indicators
// are the only inputs; at most one Indicator per (site, value).
struct ArithmeticCircuit {
  std::vector<AcNode> nodes;
  std::vector<int> roots;
  std::vector<int> phys_dims;  // local dimension per site, defines the
                               // indicator input space

  void validate() const;  // throws std::logic_error on structural breakage
};

struct AcStats {
  int64_t n = 0;       // node count, indicators included
  int64_t m = 0;       // edge count
  int l = 0;           // depth: longest indicator-to-root path, in edges
  double w_max = 1.0;  // max{1, max |W_e|}; complex weights enter via modulus
                       // since the value only feeds magnitude bounds
};

// Lowers a plan to a circuit whose evaluation reproduces execute_plan's
// value with the same multiplication structure. Embeds become weighted sums
// of indicators (weights = tensor entries, zeros kept); each pair entry
// becomes unit-weight sums of binary products. Single-term sums and chains
// of single-use products are collapsed, so a chi=1 MPS lowers to one product
// over N per-site sums.
ArithmeticCircuit lower_to_ac(const Mps& mps, const ContractionPlan& plan);

// Values of all roots for basis state s (indicators one-hot from s).
std::vector<cplx> eval_ac_roots(const ArithmeticCircuit& ac,
                                const BasisState& s);
// Single-root convenience.
cplx eval_ac(const ArithmeticCircuit& ac, const BasisState& s);

AcStats ac_stats(const ArithmeticCircuit& ac);

// Rewrites every k-ary product (k > 2) as a balanced tree of binary
// products; evaluation is unchanged up to reassociation.
ArithmeticCircuit normalize_binary(const ArithmeticCircuit& ac);

// Upper bound on ln(max over indicator assignments of |node value|), taken
// over the roots: indicators contribute 0, products add bounds, weighted
// sums log-sum-exp over ln|w| + bound. -inf when a root is identically 0.
double log_value_bound(const ArithmeticCircuit& ac);

nlohmann::json ac_to_json(const ArithmeticCircuit& ac);
ArithmeticCircuit ac_from_json(const nlohmann::json& j);

}  // namespace mps2nn
