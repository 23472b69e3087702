#pragma once

#include <array>
#include <vector>

#include <json.hpp>

#include "mps2nn/ac_ir.hpp"

namespace mps2nn {

// Redundant four-part form of a complex circuit: value = (re+ - re-) +
// i(im+ - im-) with every part non-negative. The four parts live in one
// shared master circuit with four roots (streams of a node are mutually
// recursive, so separate circuits would quadruple the indicator layer and
// nothing else); `provenance` maps an original node id to its four stream
// ids in the master.
struct QuadAc {
  ArithmeticCircuit master;  // roots = {re+, re-, im+, im-}
  std::vector<std::array<int, 4>> provenance;
};

// Requires binary products (throws std::invalid_argument naming
// normalize_binary otherwise). All master weights are real and >= 0;
// zero-weight edges are kept so the log compiler's bookkeeping sees them.
QuadAc split_complex(const ArithmeticCircuit& ac);

// The four part values; throws std::logic_error if a part comes out
// negative or non-real (construction bug, not input error).
std::array<double, 4> eval_quad(const QuadAc& quad, const BasisState& s);

// (re+ - re-) + i(im+ - im-)
cplx recombine(const std::array<double, 4>& parts);

// Largest part magnitude divided by |recombined value|; +inf when the value
// is exactly 0. Large ratios mean double precision lost the difference.
double cancellation_ratio(const std::array<double, 4>& parts);

// Four single-root circuit documents (sharing the master node list) plus
// the provenance map.
nlohmann::json quad_to_json(const QuadAc& quad);

}  // namespace mps2nn
