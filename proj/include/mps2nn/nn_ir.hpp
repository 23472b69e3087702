#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mps2nn/tensor_core.hpp"

namespace mps2nn {

enum class Act { Softplus, Relu, Identity };

struct NnNode {
  Act act = Act::Identity;
  double bias = 0.0;
  std::vector<std::pair<int, double>> in;  // (source id, weight)
};

struct InputDecl {
  enum class Role { LogIndicator, Constant, Raw };
  Role role = Role::Raw;
  int site = -1, value = -1;  // LogIndicator channel
  double constant = 0.0;      // Constant
  std::string name;           // Raw (test fragments)
};

// Feed-forward DAG. Ids 0..inputs.size()-1 are the declared inputs; node j
// of `nodes` has id inputs.size() + j. Edges may only point backwards.
struct NeuralNet {
  std::vector<InputDecl> inputs;
  std::vector<NnNode> nodes;
  std::vector<int> roots;
  nlohmann::json meta;  // pipeline provenance (epsilon, f_min, scheme, ...)

  int id_of_node(int node_index) const {
    return static_cast<int>(inputs.size()) + node_index;
  }
  void validate() const;  // throws std::logic_error
};

struct NnStats {
  int64_t nodes = 0;  // inputs + neurons
  int64_t edges = 0;
  int depth = 0;  // longest input-to-root path, in edges
};

// softplus in the stable form max(x,0) + log1p(exp(-|x|))
double stable_softplus(double x);

std::vector<double> eval_nn(const NeuralNet& nn,
                            const std::vector<double>& input_values);

NnStats nn_stats(const NeuralNet& nn);

// Binding for the log-space input encoding: indicator channel (i,k) gets 0
// when s_i = k and log_zero otherwise; constants get their declared value.
std::vector<double> encode_input(const NeuralNet& nn, const BasisState& s,
                                 double log_zero);

nlohmann::json nn_to_json(const NeuralNet& nn);
NeuralNet nn_from_json(const nlohmann::json& j);

// Append-only construction helper used by the compiler and the head
// builders. Returns global ids usable as edge sources.
class NnBuilder {
 public:
  explicit NnBuilder(NeuralNet& nn) : nn_(nn) {}

  int input(InputDecl decl);
  int log_indicator_input(int site, int value);
  int raw_input(const std::string& name);

  int add(Act act, double bias, std::vector<std::pair<int, double>> in);
  int identity(std::vector<std::pair<int, double>> in, double bias = 0.0) {
    return add(Act::Identity, bias, std::move(in));
  }
  int relu(std::vector<std::pair<int, double>> in, double bias = 0.0) {
    return add(Act::Relu, bias, std::move(in));
  }
  int softplus(std::vector<std::pair<int, double>> in, double bias = 0.0) {
    return add(Act::Softplus, bias, std::move(in));
  }
  int constant(double value) { return add(Act::Identity, value, {}); }

  // log(e^a + e^b) as one softplus plus one identity
  int logadd(int a, int b);

  NeuralNet& net() { return nn_; }

 private:
  NeuralNet& nn_;
};

}  // namespace mps2nn
