#pragma once

#include <vector>

#include "mps2nn/ac_ir.hpp"
#include "mps2nn/nn_ir.hpp"

namespace mps2nn {

struct CompileOptions {
  bool strict_softplus = false;  // replace ReLU/identity by softplus pairs
  double delta_identity = 1e12;  // scale for the softplus emulation
  double log_zero = -1e4;        // finite stand-in for log 0
};

// Compile a non-negative-real-weight circuit (any number of roots) into a
// log-space network: the k-th NN root computes ln(value of the k-th circuit
// root) given log-indicator inputs. Exact up to float roundoff — products
// become identity sums of logs, each sum edge becomes a bias neuron
// (weight 1, bias ln w; ln 0 stands in as log_zero), and k-ary sums become
// balanced trees of softplus log-adds. Throws std::invalid_argument on a
// negative or non-real weight.
//
// Strictification is a separate pass (strictify_softplus) so heads built on
// top of this network get rewritten together with the body.
NeuralNet compile_nonneg(const ArithmeticCircuit& ac,
                         const CompileOptions& opts);

// Ids of the compiled log-value node per circuit root, in root order (the
// same values as nn.roots right after compile_nonneg).
// Reference semantics for tests: exact log-space evaluation of the circuit
// with ordinary double log-sum-exp, one value per root.
std::vector<double> log_eval_reference(const ArithmeticCircuit& ac,
                                       const BasisState& s, double log_zero);

// Standalone two-neuron fragment computing log(e^a + e^b) from raw inputs
// a, b.
NeuralNet logadd_pair_net();

// Standalone fragment computing (softplus(dx) - softplus(-dx))/d, the
// softplus emulation of the identity; |out - x| <= 2 ln2 / d.
NeuralNet emulate_identity_net(double delta);

// Rewrite every ReLU as softplus(d*z)/d and every non-root identity as the
// two-softplus emulation. Root identities stay (outputs are linear reads).
// Adds at most 2 ln2 / d per rewritten node on any path through it.
NeuralNet strictify_softplus(const NeuralNet& nn, double delta);

}  // namespace mps2nn
