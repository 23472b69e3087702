#include "mps2nn/log_compiler.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mps2nn {

namespace {

// balanced fold of ids[lo, hi) with the two-neuron log-add
int logadd_tree(NnBuilder& b, const std::vector<int>& ids, size_t lo,
                size_t hi) {
  if (hi - lo == 1) return ids[lo];
  size_t mid = lo + (hi - lo + 1) / 2;
  int a = logadd_tree(b, ids, lo, mid);
  int c = logadd_tree(b, ids, mid, hi);
  return b.logadd(a, c);
}

}  // namespace

NeuralNet compile_nonneg(const ArithmeticCircuit& ac,
                         const CompileOptions& opts) {
  ac.validate();
  for (const AcNode& nd : ac.nodes)
    for (const cplx& w : nd.weights)
      if (w.imag() != 0.0 || w.real() < 0.0)
        throw std::invalid_argument(
            "log compilation requires non-negative real weights");

  NeuralNet nn;
  NnBuilder b(nn);
  std::vector<int> map(ac.nodes.size(), -1);
  // inputs must all exist before the first neuron
  for (size_t i = 0; i < ac.nodes.size(); ++i)
    if (ac.nodes[i].kind == AcNode::Kind::Indicator)
      map[i] = b.log_indicator_input(ac.nodes[i].site, ac.nodes[i].value);

  int log_zero_const = -1;
  auto zero_const = [&]() {
    if (log_zero_const < 0) log_zero_const = b.constant(opts.log_zero);
    return log_zero_const;
  };

  for (size_t i = 0; i < ac.nodes.size(); ++i) {
    const AcNode& nd = ac.nodes[i];
    switch (nd.kind) {
      case AcNode::Kind::Indicator:
        break;  // already an input
      case AcNode::Kind::Product: {
        std::vector<std::pair<int, double>> in;
        for (int c : nd.inputs)
          in.emplace_back(map[static_cast<size_t>(c)], 1.0);
        map[i] = b.identity(std::move(in));  // log of a product is the sum
        break;
      }
      case AcNode::Kind::Wsum: {
        if (nd.inputs.empty()) {
          map[i] = zero_const();
          break;
        }
        std::vector<int> terms;
        for (size_t t = 0; t < nd.inputs.size(); ++t) {
          const double w = nd.weights[t].real();
          const double lw = (w == 0.0) ? opts.log_zero : std::log(w);
          terms.push_back(b.identity(
              {{map[static_cast<size_t>(nd.inputs[t])], 1.0}}, lw));
        }
        map[i] = logadd_tree(b, terms, 0, terms.size());
        break;
      }
    }
  }
  for (int r : ac.roots) nn.roots.push_back(map[static_cast<size_t>(r)]);
  nn.validate();
  return nn;
}

std::vector<double> log_eval_reference(const ArithmeticCircuit& ac,
                                       const BasisState& s, double log_zero) {
  std::vector<double> val(ac.nodes.size(), 0.0);
  for (size_t i = 0; i < ac.nodes.size(); ++i) {
    const AcNode& nd = ac.nodes[i];
    switch (nd.kind) {
      case AcNode::Kind::Indicator:
        val[i] =
            (s[static_cast<size_t>(nd.site)] == nd.value) ? 0.0 : log_zero;
        break;
      case AcNode::Kind::Product: {
        double acc = 0.0;
        for (int c : nd.inputs) acc += val[static_cast<size_t>(c)];
        val[i] = acc;
        break;
      }
      case AcNode::Kind::Wsum: {
        if (nd.inputs.empty()) {
          val[i] = log_zero;
          break;
        }
        std::vector<double> terms;
        for (size_t t = 0; t < nd.inputs.size(); ++t) {
          const double w = nd.weights[t].real();
          terms.push_back((w == 0.0 ? log_zero : std::log(w)) +
                          val[static_cast<size_t>(nd.inputs[t])]);
        }
        double mx = *std::max_element(terms.begin(), terms.end());
        double acc = 0.0;
        for (double t : terms) acc += std::exp(t - mx);
        val[i] = mx + std::log(acc);
        break;
      }
    }
  }
  std::vector<double> out;
  for (int r : ac.roots) out.push_back(val[static_cast<size_t>(r)]);
  return out;
}

NeuralNet logadd_pair_net() {
  NeuralNet nn;
  NnBuilder b(nn);
  int a = b.raw_input("a");
  int c = b.raw_input("b");
  nn.roots = {b.logadd(a, c)};
  return nn;
}

NeuralNet emulate_identity_net(double delta) {
  if (delta <= 0.0) throw std::invalid_argument("delta must be positive");
  NeuralNet nn;
  NnBuilder b(nn);
  int x = b.raw_input("x");
  int sp = b.softplus({{x, delta}});
  int sn = b.softplus({{x, -delta}});
  nn.roots = {b.identity({{sp, 1.0 / delta}, {sn, -1.0 / delta}})};
  return nn;
}

NeuralNet strictify_softplus(const NeuralNet& nn, double delta) {
  if (delta <= 0.0) throw std::invalid_argument("delta must be positive");
  NeuralNet out;
  out.inputs = nn.inputs;
  out.meta = nn.meta;
  NnBuilder b(out);

  const int n_in = static_cast<int>(nn.inputs.size());
  std::vector<char> is_root(nn.nodes.size(), 0);
  for (int r : nn.roots)
    if (r >= n_in) is_root[static_cast<size_t>(r - n_in)] = 1;

  // each old id maps to one or two (new id, read scale) pairs
  std::vector<std::vector<std::pair<int, double>>> map(
      nn.inputs.size() + nn.nodes.size());
  for (int i = 0; i < n_in; ++i) map[static_cast<size_t>(i)] = {{i, 1.0}};

  auto expand = [&](const std::vector<std::pair<int, double>>& in,
                    double scale) {
    std::vector<std::pair<int, double>> res;
    for (const auto& [src, w] : in)
      for (const auto& [nid, sc] : map[static_cast<size_t>(src)])
        res.emplace_back(nid, scale * w * sc);
    return res;
  };

  for (size_t j = 0; j < nn.nodes.size(); ++j) {
    const NnNode& nd = nn.nodes[j];
    const size_t id = nn.inputs.size() + j;
    switch (nd.act) {
      case Act::Softplus:
        map[id] = {{b.softplus(expand(nd.in, 1.0), nd.bias), 1.0}};
        break;
      case Act::Relu: {
        // relu(z) ~ softplus(d z)/d, off by at most ln2/d
        int sp = b.softplus(expand(nd.in, delta), delta * nd.bias);
        map[id] = {{sp, 1.0 / delta}};
        break;
      }
      case Act::Identity: {
        if (is_root[j]) {  // linear output reads stay identity
          map[id] = {{b.identity(expand(nd.in, 1.0), nd.bias), 1.0}};
          break;
        }
        int sp = b.softplus(expand(nd.in, delta), delta * nd.bias);
        int sn = b.softplus(expand(nd.in, -delta), -delta * nd.bias);
        map[id] = {{sp, 1.0 / delta}, {sn, -1.0 / delta}};
        break;
      }
    }
  }
  for (int r : nn.roots) {
    const auto& reads = map[static_cast<size_t>(r)];
    if (reads.size() == 1 && reads[0].second == 1.0) {
      out.roots.push_back(reads[0].first);
    } else {
      out.roots.push_back(b.identity(expand({{r, 1.0}}, 1.0)));
    }
  }
  out.validate();
  return out;
}

}  // namespace mps2nn
