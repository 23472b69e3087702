#include "mps2nn/nn_ir.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mps2nn {

void NeuralNet::validate() const {
  const int n_in = static_cast<int>(inputs.size());
  for (size_t j = 0; j < nodes.size(); ++j) {
    const NnNode& nd = nodes[j];
    if (!std::isfinite(nd.bias))
      throw std::logic_error("non-finite bias");
    for (const auto& [src, w] : nd.in) {
      if (src < 0 || src >= n_in + static_cast<int>(j))
        throw std::logic_error("edge source does not precede node");
      if (!std::isfinite(w)) throw std::logic_error("non-finite weight");
    }
  }
  if (roots.empty()) throw std::logic_error("network without roots");
  for (int r : roots)
    if (r < 0 || r >= n_in + static_cast<int>(nodes.size()))
      throw std::logic_error("root id out of range");
}

double stable_softplus(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

std::vector<double> eval_nn(const NeuralNet& nn,
                            const std::vector<double>& input_values) {
  if (input_values.size() != nn.inputs.size())
    throw std::invalid_argument("input binding length mismatch");
  std::vector<double> val(nn.inputs.size() + nn.nodes.size());
  std::copy(input_values.begin(), input_values.end(), val.begin());
  size_t base = nn.inputs.size();
  for (size_t j = 0; j < nn.nodes.size(); ++j) {
    const NnNode& nd = nn.nodes[j];
    double z = nd.bias;
    for (const auto& [src, w] : nd.in) z += w * val[static_cast<size_t>(src)];
    switch (nd.act) {
      case Act::Softplus:
        z = stable_softplus(z);
        break;
      case Act::Relu:
        z = std::max(z, 0.0);
        break;
      case Act::Identity:
        break;
    }
    val[base + j] = z;
  }
  std::vector<double> out;
  out.reserve(nn.roots.size());
  for (int r : nn.roots) out.push_back(val[static_cast<size_t>(r)]);
  return out;
}

NnStats nn_stats(const NeuralNet& nn) {
  NnStats st;
  st.nodes = static_cast<int64_t>(nn.inputs.size() + nn.nodes.size());
  std::vector<int> depth(nn.inputs.size() + nn.nodes.size(), 0);
  size_t base = nn.inputs.size();
  for (size_t j = 0; j < nn.nodes.size(); ++j) {
    const NnNode& nd = nn.nodes[j];
    st.edges += static_cast<int64_t>(nd.in.size());
    int d = 0;
    for (const auto& [src, w] : nd.in) {
      (void)w;
      d = std::max(d, depth[static_cast<size_t>(src)] + 1);
    }
    depth[base + j] = d;
  }
  for (int r : nn.roots) st.depth = std::max(st.depth, depth[static_cast<size_t>(r)]);
  return st;
}

std::vector<double> encode_input(const NeuralNet& nn, const BasisState& s,
                                 double log_zero) {
  std::vector<double> vals;
  vals.reserve(nn.inputs.size());
  for (const InputDecl& decl : nn.inputs) {
    switch (decl.role) {
      case InputDecl::Role::LogIndicator: {
        if (decl.site < 0 || decl.site >= static_cast<int>(s.size()))
          throw std::invalid_argument("state too short for indicator input");
        vals.push_back(s[static_cast<size_t>(decl.site)] == decl.value
                           ? 0.0
                           : log_zero);
        break;
      }
      case InputDecl::Role::Constant:
        vals.push_back(decl.constant);
        break;
      case InputDecl::Role::Raw:
        throw std::invalid_argument(
            "raw input cannot be bound from a basis state: " + decl.name);
    }
  }
  return vals;
}

static std::string act_name(Act a) {
  switch (a) {
    case Act::Softplus: return "softplus";
    case Act::Relu: return "relu";
    case Act::Identity: return "identity";
  }
  return "identity";
}

static Act act_from(const std::string& s) {
  if (s == "softplus") return Act::Softplus;
  if (s == "relu") return Act::Relu;
  if (s == "identity") return Act::Identity;
  throw std::invalid_argument("unknown activation: " + s);
}

nlohmann::json nn_to_json(const NeuralNet& nn) {
  nlohmann::json inputs = nlohmann::json::array();
  for (const InputDecl& d : nn.inputs) {
    switch (d.role) {
      case InputDecl::Role::LogIndicator:
        inputs.push_back({{"role", "log_indicator"},
                          {"site", d.site},
                          {"value", d.value}});
        break;
      case InputDecl::Role::Constant:
        inputs.push_back({{"role", "constant"}, {"value", d.constant}});
        break;
      case InputDecl::Role::Raw:
        inputs.push_back({{"role", "raw"}, {"name", d.name}});
        break;
    }
  }
  nlohmann::json nodes = nlohmann::json::array();
  for (const NnNode& nd : nn.nodes) {
    nlohmann::json in = nlohmann::json::array();
    for (const auto& [src, w] : nd.in) in.push_back({src, w});
    nodes.push_back(
        {{"act", act_name(nd.act)}, {"bias", nd.bias}, {"in", in}});
  }
  nlohmann::json j{{"nodes", nodes}, {"inputs", inputs}, {"roots", nn.roots}};
  if (!nn.meta.is_null() && !nn.meta.empty()) j["meta"] = nn.meta;
  return j;
}

NeuralNet nn_from_json(const nlohmann::json& j) {
  NeuralNet nn;
  for (const auto& ji : j.at("inputs")) {
    InputDecl d;
    const std::string role = ji.at("role").get<std::string>();
    if (role == "log_indicator") {
      d.role = InputDecl::Role::LogIndicator;
      d.site = ji.at("site").get<int>();
      d.value = ji.at("value").get<int>();
    } else if (role == "constant") {
      d.role = InputDecl::Role::Constant;
      d.constant = ji.at("value").get<double>();
    } else if (role == "raw") {
      d.role = InputDecl::Role::Raw;
      d.name = ji.at("name").get<std::string>();
    } else {
      throw std::invalid_argument("unknown input role: " + role);
    }
    nn.inputs.push_back(std::move(d));
  }
  for (const auto& jn : j.at("nodes")) {
    NnNode nd;
    nd.act = act_from(jn.at("act").get<std::string>());
    nd.bias = jn.at("bias").get<double>();
    for (const auto& je : jn.at("in"))
      nd.in.emplace_back(je.at(0).get<int>(), je.at(1).get<double>());
    nn.nodes.push_back(std::move(nd));
  }
  nn.roots = j.at("roots").get<std::vector<int>>();
  if (j.contains("meta")) nn.meta = j.at("meta");
  nn.validate();
  return nn;
}

int NnBuilder::input(InputDecl decl) {
  if (!nn_.nodes.empty())
    throw std::logic_error("inputs must be declared before any node");
  nn_.inputs.push_back(std::move(decl));
  return static_cast<int>(nn_.inputs.size()) - 1;
}

int NnBuilder::log_indicator_input(int site, int value) {
  InputDecl d;
  d.role = InputDecl::Role::LogIndicator;
  d.site = site;
  d.value = value;
  return input(std::move(d));
}

int NnBuilder::raw_input(const std::string& name) {
  InputDecl d;
  d.role = InputDecl::Role::Raw;
  d.name = name;
  return input(std::move(d));
}

int NnBuilder::add(Act act, double bias,
                   std::vector<std::pair<int, double>> in) {
  NnNode nd;
  nd.act = act;
  nd.bias = bias;
  nd.in = std::move(in);
  const int id = static_cast<int>(nn_.inputs.size() + nn_.nodes.size());
  for (const auto& [src, w] : nd.in) {
    (void)w;
    if (src < 0 || src >= id)
      throw std::logic_error("edge source does not precede node");
  }
  nn_.nodes.push_back(std::move(nd));
  return id;
}

int NnBuilder::logadd(int a, int b) {
  int t = softplus({{b, 1.0}, {a, -1.0}});
  return identity({{a, 1.0}, {t, 1.0}});
}

}  // namespace mps2nn
