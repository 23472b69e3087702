#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <utility>

#include <json.hpp>

#include "mps2nn/ac_ir.hpp"
#include "mps2nn/nn_ir.hpp"

namespace mps2nn {

// Every constant the output heads depend on. All fields are derived in
// derive_params; nothing here is ever hand-set.
struct HeadParams {
  double epsilon = 0.0;  // end-to-end target |g1 + i g2 - log f| < epsilon
  double f_min = 0.0;    // lower bound on min(|re f|, |im f|)
  int64_t m_edges = 0;   // circuit edge count entering the output bound
  double w_max = 1.0;

  // budget split. Each component log-magnitude carries at most
  // eps_spinv*(1+1/8); g1 combines them convexly, so g1 errs by <= 3eps/8.
  // The phase sees half the sum of component errors through arctan's
  // derivative plus its own fragment and two bounded multiplications:
  // g2 errs by <= eps/2 + (2+pi) eps/48 ~= 0.61 eps. The 2-norm of the
  // pair stays under 0.72 eps, leaving real margin while keeping the
  // realized error within one order of magnitude of the target.
  double eps_spinv = 0.0;     // epsilon / 3
  double eps_arctan = 0.0;    // epsilon / 8
  double eps_mul_sign = 0.0;  // epsilon / 48

  // output-magnitude bound ln Z: the generic (m W_max)^m form, kept in log
  // space, intersected with a per-circuit interval bound when the caller
  // supplies one (the generic form is hopeless for m beyond ~100: its delta
  // underflows while actual circuit values stay modest)
  double ln_bound_formula = 0.0;  // m ln(m W_max)
  double ln_bound = 0.0;          // min(formula, circuit bound)

  double y_star_min = 0.0;  // ln f_min - ln Z
  double y_star_max = 0.0;  // = x_large
  double x_large = 0.0;     // -ln(1 - e^-eps_spinv): above it, x inverts to
                            // itself within eps_spinv
  double x_cap = 0.0;       // x_large + 1; inverse inputs are clamped here
  double x_min = 0.0;       // ln(1 + e^y_star_min), smallest in-regime input
  double ln_x_min = 0.0;    // kept separately: x_min itself may underflow
  double ln_lipschitz = 0.0;  // ln of sup of (softplus^-1)' on [x_min, inf)
  double delta = 0.0;         // Heaviside sharpness: eps_spinv / (16 L)
  int t_steps = 0;            // bisection stages: ceil(log2(range/eps_spinv))
  double eps_tilde = 0.0;     // per-multiplication budget eps_spinv / (8 T)
  double m_bisect = 0.0;      // |y| bound inside bisection multiplications
  double m_blend = 0.0;       // |y| bound of the regime-blend multiplication
  int s_bisect = 0;           // sawtooth levels per bisection multiplication
  int s_blend = 0;
  int s_sign = 0;             // sawtooth levels in the two phase muls (M = 2)
  int segments = 0;           // tangent-line intervals per side of arctan-exp
  double x_min_arctan = 0.0;  // ln(eps_arctan): arctan-exp is 0 below this

  // delta below ~1e-12 cannot be realized by double-precision comparators
  // (the clamp cascade's rounding noise swamps the ramp); construction still
  // succeeds, evaluation quality is then unspecified
  bool comparator_resolvable = true;
};

// Throws std::invalid_argument on bad preconditions and std::domain_error
// ("range overflow ...") when f_min is so small against the output bound
// that delta underflows double even in log-space bookkeeping.
HeadParams derive_params(
    double epsilon, double f_min, const AcStats& stats,
    double circuit_ln_bound = std::numeric_limits<double>::infinity());

nlohmann::json params_to_json(const HeadParams& p);

int sawtooth_levels(double operand_bound, double eps);

// --- graph emitters (append to an existing builder, return output ids) ---

// Clamp cascade realizing max(v/2d + 1/2, 0) - max(v/2d - 1/2, 0) float-
// safely for |v| far beyond 1/(2d): exact 0 below -d, exact ramp inside,
// 1 up to final rounding above +d. Requires d <= 1/8 (outer clamp at +-1).
int emit_heaviside(NnBuilder& b, int v, double delta);

// x*y for x in [0,1], y in [-M, M], absolute error <= 1.5 M 4^-levels.
// Inputs are hard-clamped into range first, so out-of-range operands give
// bounded garbage, never overflow.
int emit_mul(NnBuilder& b, int x, int y, double operand_bound, int levels);

struct SpinvOut {
  int out = -1;  // softplus^-1(xc) to within ~eps_spinv on [x_min, inf)
  int xc = -1;   // min(x, x_cap), shared with the magnitude combination
};
SpinvOut emit_softplus_inv(NnBuilder& b, int x, const HeadParams& p);

// arctan(exp(x)) on the whole line: max of tangent lines on [x_min_t, 0],
// reflected through t(x) + t(-x) = pi/2.
int emit_arctan_exp(NnBuilder& b, int x, const HeadParams& p);

struct HeadOut {
  int g1 = -1, g2 = -1;
  int ln_re = -1, ln_im = -1;  // intermediates, exposed for audits
};
// part_logs = node ids of (ln re+, ln re-, ln im+, ln im-).
HeadOut build_heads(NnBuilder& b, const std::array<int, 4>& part_logs,
                    const HeadParams& p);

// --- standalone fragments with raw inputs, for certification sweeps ---

NeuralNet heaviside_net(double delta);
NeuralNet mul_net(double operand_bound, double eps);
NeuralNet softplus_inv_net(const HeadParams& p);
NeuralNet arctan_exp_net(const HeadParams& p);
NeuralNet heads_net(const HeadParams& p);  // inputs: the four part logs

// --- semantic twins: same arithmetic, no graph; used to tell graph bugs
// from construction bugs. Never used by the verification path. ---

double sem_heaviside(double v, double delta);
double sem_mul(double x, double y, double operand_bound, int levels);
double sem_softplus_inv(double x, const HeadParams& p);
double sem_arctan_exp(double x, const HeadParams& p);
std::pair<double, double> sem_heads(const std::array<double, 4>& part_logs,
                                    const HeadParams& p);

}  // namespace mps2nn
