#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "mps2nn/ac_ir.hpp"
#include "mps2nn/complex_split.hpp"
#include "mps2nn/contraction_planner.hpp"
#include "mps2nn/head_builder.hpp"
#include "mps2nn/log_compiler.hpp"
#include "mps2nn/nn_ir.hpp"
#include "mps2nn/tensor_core.hpp"

namespace mps2nn {

struct CompileSettings {
  std::string scheme = "parallel";  // or "sequential"
  double epsilon = 1e-2;
  double f_min = 0.0;            // used when empirical_f_min is false
  bool empirical_f_min = false;  // scan all states (refuses above 2^20)
  bool strict_softplus = false;
  bool paranoid = false;  // audit every pass boundary on sampled states
  double delta_identity = 1e12;
  double log_zero = -1e4;
};

// everything produced before head parameters are known
struct MasterBuild {
  ContractionPlan plan;
  CostReport cost;
  ArithmeticCircuit lowered;  // complex, pre-normalization
  QuadAc quad;                // binary master with the four sign-part roots
  AcStats master_stats;
  double circuit_ln_bound = 0.0;  // max over the four roots
};

MasterBuild build_master(const Mps& mps, const std::string& scheme);

// entrywise |Re a| + |Im a|: contracting this real nonnegative chain gives
// exactly the sum of the four sign parts (the split is multiplicative over
// products and each sum edge contributes |Re w| + |Im w| of its input), so
// it serves as a part oracle and as an upper bound on |psi|
Mps part_sum_mps(const Mps& mps);

struct CompileResult {
  MasterBuild master;
  HeadParams params;
  NeuralNet nn;  // roots: g1, g2, ln re+, ln re-, ln im+, ln im-
  double f_min_used = 0.0;
  nlohmann::json timings;  // seconds per pass
};

CompileResult compile_full(const Mps& mps, const CompileSettings& settings);

// the two halves of compile_full, split so a sweep can share one parameter
// set across instances
double resolve_f_min(const Mps& mps, const MasterBuild& mb,
                     const CompileSettings& settings,
                     double* empirical_ln_bound = nullptr);
CompileResult finish_compile(MasterBuild mb, const HeadParams& params,
                             const CompileSettings& settings);

struct StateRecord {
  BasisState state;
  double g1_nn = 0, g2_nn = 0, g1_ref = 0, g2_ref = 0;
  double err = 0;
  double part_rel_err = 0;  // -1 when no part oracle was available
  bool excluded = false;
  std::string reason;  // "positivity" or "cancellation" when excluded
};

struct VerifyOptions {
  bool exhaustive = false;
  int64_t sample = 256;
  uint64_t seed = 1234;
  double epsilon = 0.0;  // 0: take the compile-time target from nn meta
  double cancellation_threshold = 1e12;
  int64_t max_records = 4096;  // per-state records kept in the report
};

struct VerifyReport {
  bool pass = false;
  double epsilon = 0.0;
  int64_t states_total = 0;
  int64_t tested = 0;
  int64_t included = 0;
  int64_t excluded_positivity = 0;
  int64_t excluded_cancellation = 0;
  double max_err = 0.0;  // over included states; nan if none
  double mean_err = 0.0;
  double max_part_rel_err = -1.0;  // -1 when no part oracle given
  double empirical_f_min = 0.0;    // over tested, 0 if untestable
  double wall_seconds = 0.0;
  NnStats nn;                 // size of the network under test
  AcStats ac;                 // master-circuit stats when a build was given
  CostReport cost;            // plan cost likewise
  bool have_master = false;
  nlohmann::json timings;  // seconds spent in oracle / nn eval / total
  std::vector<StateRecord> records;   // capped at max_records
  std::vector<StateRecord> excluded;  // capped likewise
};

nlohmann::json verify_report_to_json(const VerifyReport& r);

// master, when given, adds the exp(part root) vs exact-part relative check
// and switches the cancellation monitor to max part / |recombined value|;
// without it the part-sum chain over |recombined| stands in (an upper bound,
// so it can only exclude more states, never fewer)
VerifyReport verify(const Mps& mps, const NeuralNet& nn,
                    const VerifyOptions& opts,
                    const MasterBuild* master = nullptr);

struct ScalingRow {
  int n = 0;
  int nn_depth = 0;
  int64_t nn_edges = 0;
  int64_t ac_edges = 0;
  int ac_depth = 0;
  int64_t plan_multiplies = 0;
  double compile_seconds = 0.0;
  double verify_max_err = 0.0;
};

struct ScalingReport {
  std::vector<ScalingRow> rows;
  HeadParams shared_params;  // one parameter set for the whole sweep
  std::string csv;
};

// fixed d, chi, epsilon across n_list; one head-parameter set derived from
// the worst bound in the sweep so head size is n-independent. f_min is the
// sweep-wide assumed floor; per-instance seeds are base_seed + n.
ScalingReport scaling_report(int d, int chi, double epsilon,
                             const std::vector<int>& n_list,
                             const std::string& scheme, double f_min = 1e-3,
                             uint64_t base_seed = 42, int64_t sample = 256);

std::string scaling_csv(const ScalingReport& r);

}  // namespace mps2nn
