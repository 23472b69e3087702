#include "mps2nn/ac_ir.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

namespace mps2nn {

void ArithmeticCircuit::validate() const {
  std::set<std::pair<int, int>> seen_ind;
  for (size_t i = 0; i < nodes.size(); ++i) {
    const AcNode& nd = nodes[i];
    switch (nd.kind) {
      case AcNode::Kind::Indicator: {
        if (nd.site < 0 || nd.site >= static_cast<int>(phys_dims.size()) ||
            nd.value < 0 || nd.value >= phys_dims[static_cast<size_t>(nd.site)])
          throw std::logic_error("indicator outside declared input space");
        if (!seen_ind.insert({nd.site, nd.value}).second)
          throw std::logic_error("duplicate indicator node");
        if (!nd.inputs.empty())
          throw std::logic_error("indicator with inputs");
        break;
      }
      case AcNode::Kind::Product:
        if (nd.inputs.size() < 2)
          throw std::logic_error("product with fewer than 2 inputs");
        break;
      case AcNode::Kind::Wsum:
        if (nd.inputs.size() != nd.weights.size())
          throw std::logic_error("wsum weight/input length mismatch");
        break;
    }
    for (int in : nd.inputs)
      if (in < 0 || in >= static_cast<int>(i))
        throw std::logic_error("node input does not precede it");
  }
  if (roots.empty()) throw std::logic_error("circuit without roots");
  for (int r : roots)
    if (r < 0 || r >= static_cast<int>(nodes.size()))
      throw std::logic_error("root id out of range");
}

namespace {

struct Lowering {
  ArithmeticCircuit ac;

  int add(AcNode nd) {
    ac.nodes.push_back(std::move(nd));
    return static_cast<int>(ac.nodes.size()) - 1;
  }

  int product(std::vector<int> children) {
    AcNode nd;
    nd.kind = AcNode::Kind::Product;
    nd.inputs = std::move(children);
    return add(std::move(nd));
  }

  int wsum(std::vector<int> children, std::vector<cplx> w) {
    AcNode nd;
    nd.kind = AcNode::Kind::Wsum;
    nd.inputs = std::move(children);
    nd.weights = std::move(w);
    return add(std::move(nd));
  }
};

// keep only nodes reachable from the roots, preserving order
ArithmeticCircuit sweep(const ArithmeticCircuit& ac) {
  std::vector<char> live(ac.nodes.size(), 0);
  std::vector<int> stack(ac.roots.begin(), ac.roots.end());
  while (!stack.empty()) {
    int id = stack.back();
    stack.pop_back();
    if (live[static_cast<size_t>(id)]) continue;
    live[static_cast<size_t>(id)] = 1;
    for (int in : ac.nodes[static_cast<size_t>(id)].inputs) stack.push_back(in);
  }
  ArithmeticCircuit out;
  out.phys_dims = ac.phys_dims;
  std::vector<int> remap(ac.nodes.size(), -1);
  for (size_t i = 0; i < ac.nodes.size(); ++i) {
    if (!live[i]) continue;
    AcNode nd = ac.nodes[i];
    for (int& in : nd.inputs) in = remap[static_cast<size_t>(in)];
    remap[i] = static_cast<int>(out.nodes.size());
    out.nodes.push_back(std::move(nd));
  }
  for (int r : ac.roots) out.roots.push_back(remap[static_cast<size_t>(r)]);
  return out;
}

}  // namespace

ArithmeticCircuit lower_to_ac(const Mps& mps, const ContractionPlan& plan) {
  Lowering lw;
  for (int i = 0; i < mps.n(); ++i)
    lw.ac.phys_dims.push_back(mps.phys_dim(i));
  // all indicators up front: fixed ids, one per (site, value)
  std::vector<std::vector<int>> ind(static_cast<size_t>(mps.n()));
  for (int i = 0; i < mps.n(); ++i)
    for (int k = 0; k < mps.phys_dim(i); ++k) {
      AcNode nd;
      nd.kind = AcNode::Kind::Indicator;
      nd.site = i;
      nd.value = k;
      ind[static_cast<size_t>(i)].push_back(lw.add(std::move(nd)));
    }

  // per executed step, the node id of each (left, right) operand entry
  std::vector<std::vector<int>> entries(plan.steps.size());
  for (size_t idx = 0; idx < plan.steps.size(); ++idx) {
    const PlanStep& st = plan.steps[idx];
    std::vector<int> e(static_cast<size_t>(st.left) * st.right);
    if (st.kind == PlanStep::Kind::Embed) {
      const DenseTensor& a = mps.sites[static_cast<size_t>(st.site)];
      for (int l = 0; l < st.left; ++l)
        for (int r = 0; r < st.right; ++r) {
          std::vector<cplx> w(static_cast<size_t>(st.phys));
          for (int k = 0; k < st.phys; ++k) w[static_cast<size_t>(k)] = a.at3(l, k, r);
          e[static_cast<size_t>(l) * st.right + r] =
              lw.wsum(ind[static_cast<size_t>(st.site)], std::move(w));
        }
    } else {
      const PlanStep& pa = plan.steps[static_cast<size_t>(st.lhs)];
      const auto& ea = entries[static_cast<size_t>(st.lhs)];
      const auto& eb = entries[static_cast<size_t>(st.rhs)];
      const int l = pa.left, m = pa.right, r = st.right;
      for (int i = 0; i < l; ++i)
        for (int j = 0; j < r; ++j) {
          std::vector<int> terms;
          for (int k = 0; k < m; ++k) {
            int u = ea[static_cast<size_t>(i) * m + k];
            int v = eb[static_cast<size_t>(k) * r + j];
            std::vector<int> children;
            // a lhs entry is consumed r times, a rhs entry l times; a
            // single-use product child can be folded into the new product
            if (r == 1 && lw.ac.nodes[static_cast<size_t>(u)].kind ==
                              AcNode::Kind::Product)
              children = lw.ac.nodes[static_cast<size_t>(u)].inputs;
            else
              children.push_back(u);
            if (l == 1 && lw.ac.nodes[static_cast<size_t>(v)].kind ==
                              AcNode::Kind::Product)
              for (int c : lw.ac.nodes[static_cast<size_t>(v)].inputs)
                children.push_back(c);
            else
              children.push_back(v);
            terms.push_back(lw.product(std::move(children)));
          }
          // unit-weight sum over the m pairwise products; m = 1 keeps the
          // bare product
          int id = (m == 1) ? terms[0]
                            : lw.wsum(std::move(terms),
                                      std::vector<cplx>(static_cast<size_t>(m),
                                                        cplx(1.0, 0.0)));
          e[static_cast<size_t>(i) * r + j] = id;
        }
    }
    entries[idx] = std::move(e);
  }
  lw.ac.roots = {entries[static_cast<size_t>(plan.root)][0]};
  ArithmeticCircuit out = sweep(lw.ac);  // folding orphans intermediates
  out.validate();
  return out;
}

std::vector<cplx> eval_ac_roots(const ArithmeticCircuit& ac,
                                const BasisState& s) {
  if (s.size() != ac.phys_dims.size())
    throw std::invalid_argument("basis state length does not match circuit");
  for (size_t i = 0; i < s.size(); ++i)
    if (s[i] < 0 || s[i] >= ac.phys_dims[i])
      throw std::invalid_argument("basis index out of range");
  std::vector<cplx> val(ac.nodes.size());
  for (size_t i = 0; i < ac.nodes.size(); ++i) {
    const AcNode& nd = ac.nodes[i];
    switch (nd.kind) {
      case AcNode::Kind::Indicator:
        val[i] = (s[static_cast<size_t>(nd.site)] == nd.value) ? 1.0 : 0.0;
        break;
      case AcNode::Kind::Product: {
        cplx p = 1.0;
        for (int in : nd.inputs) p *= val[static_cast<size_t>(in)];
        val[i] = p;
        break;
      }
      case AcNode::Kind::Wsum: {
        cplx acc = 0.0;
        for (size_t t = 0; t < nd.inputs.size(); ++t)
          acc += nd.weights[t] * val[static_cast<size_t>(nd.inputs[t])];
        val[i] = acc;
        break;
      }
    }
  }
  std::vector<cplx> out;
  out.reserve(ac.roots.size());
  for (int r : ac.roots) out.push_back(val[static_cast<size_t>(r)]);
  return out;
}

cplx eval_ac(const ArithmeticCircuit& ac, const BasisState& s) {
  return eval_ac_roots(ac, s)[0];
}

AcStats ac_stats(const ArithmeticCircuit& ac) {
  AcStats st;
  st.n = static_cast<int64_t>(ac.nodes.size());
  std::vector<int> depth(ac.nodes.size(), 0);
  for (size_t i = 0; i < ac.nodes.size(); ++i) {
    const AcNode& nd = ac.nodes[i];
    st.m += static_cast<int64_t>(nd.inputs.size());
    int d = 0;
    for (int in : nd.inputs)
      d = std::max(d, depth[static_cast<size_t>(in)] + 1);
    depth[i] = d;
    for (const cplx& w : nd.weights) st.w_max = std::max(st.w_max, std::abs(w));
  }
  for (int r : ac.roots) st.l = std::max(st.l, depth[static_cast<size_t>(r)]);
  return st;
}

ArithmeticCircuit normalize_binary(const ArithmeticCircuit& ac) {
  ArithmeticCircuit out;
  out.phys_dims = ac.phys_dims;
  std::vector<int> remap(ac.nodes.size(), -1);
  // balanced binary split of an already-remapped child list
  auto tree = [&out](auto&& self, const std::vector<int>& c, size_t lo,
                     size_t hi) -> int {
    if (hi - lo == 1) return c[lo];
    size_t mid = lo + (hi - lo + 1) / 2;
    AcNode nd;
    nd.kind = AcNode::Kind::Product;
    nd.inputs = {self(self, c, lo, mid), self(self, c, mid, hi)};
    out.nodes.push_back(std::move(nd));
    return static_cast<int>(out.nodes.size()) - 1;
  };
  for (size_t i = 0; i < ac.nodes.size(); ++i) {
    AcNode nd = ac.nodes[i];
    for (int& in : nd.inputs) in = remap[static_cast<size_t>(in)];
    if (nd.kind == AcNode::Kind::Product && nd.inputs.size() > 2) {
      remap[i] = tree(tree, nd.inputs, 0, nd.inputs.size());
    } else {
      out.nodes.push_back(std::move(nd));
      remap[i] = static_cast<int>(out.nodes.size()) - 1;
    }
  }
  for (int r : ac.roots) out.roots.push_back(remap[static_cast<size_t>(r)]);
  out.validate();
  return out;
}

double log_value_bound(const ArithmeticCircuit& ac) {
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  std::vector<double> bound(ac.nodes.size(), kNegInf);
  for (size_t i = 0; i < ac.nodes.size(); ++i) {
    const AcNode& nd = ac.nodes[i];
    switch (nd.kind) {
      case AcNode::Kind::Indicator:
        bound[i] = 0.0;
        break;
      case AcNode::Kind::Product: {
        double b = 0.0;
        for (int in : nd.inputs) b += bound[static_cast<size_t>(in)];
        bound[i] = b;
        break;
      }
      case AcNode::Kind::Wsum: {
        std::vector<double> terms;
        for (size_t t = 0; t < nd.inputs.size(); ++t) {
          double lw = std::log(std::abs(nd.weights[t]));
          double b = bound[static_cast<size_t>(nd.inputs[t])];
          if (std::isfinite(lw) && b > kNegInf) terms.push_back(lw + b);
        }
        if (terms.empty()) {
          bound[i] = kNegInf;
        } else {
          double mx = *std::max_element(terms.begin(), terms.end());
          double acc = 0.0;
          for (double t : terms) acc += std::exp(t - mx);
          bound[i] = mx + std::log(acc);
        }
        break;
      }
    }
  }
  double out = kNegInf;
  for (int r : ac.roots) out = std::max(out, bound[static_cast<size_t>(r)]);
  return out;
}

nlohmann::json ac_to_json(const ArithmeticCircuit& ac) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const AcNode& nd : ac.nodes) {
    nlohmann::json j;
    switch (nd.kind) {
      case AcNode::Kind::Indicator:
        j["kind"] = "indicator";
        j["site"] = nd.site;
        j["value"] = nd.value;
        break;
      case AcNode::Kind::Product:
        j["kind"] = "product";
        j["inputs"] = nd.inputs;
        break;
      case AcNode::Kind::Wsum: {
        j["kind"] = "wsum";
        j["inputs"] = nd.inputs;
        std::vector<double> re, im;
        for (const cplx& w : nd.weights) {
          re.push_back(w.real());
          im.push_back(w.imag());
        }
        j["w_re"] = re;
        j["w_im"] = im;
        break;
      }
    }
    nodes.push_back(j);
  }
  return nlohmann::json{
      {"nodes", nodes}, {"roots", ac.roots}, {"phys_dims", ac.phys_dims}};
}

ArithmeticCircuit ac_from_json(const nlohmann::json& j) {
  ArithmeticCircuit ac;
  ac.phys_dims = j.at("phys_dims").get<std::vector<int>>();
  ac.roots = j.at("roots").get<std::vector<int>>();
  for (const auto& jn : j.at("nodes")) {
    AcNode nd;
    const std::string kind = jn.at("kind").get<std::string>();
    if (kind == "indicator") {
      nd.kind = AcNode::Kind::Indicator;
      nd.site = jn.at("site").get<int>();
      nd.value = jn.at("value").get<int>();
    } else if (kind == "product") {
      nd.kind = AcNode::Kind::Product;
      nd.inputs = jn.at("inputs").get<std::vector<int>>();
    } else if (kind == "wsum") {
      nd.kind = AcNode::Kind::Wsum;
      nd.inputs = jn.at("inputs").get<std::vector<int>>();
      auto re = jn.at("w_re").get<std::vector<double>>();
      auto im = jn.at("w_im").get<std::vector<double>>();
      if (re.size() != nd.inputs.size() || im.size() != nd.inputs.size())
        throw std::invalid_argument("wsum weight arrays malformed");
      for (size_t t = 0; t < re.size(); ++t) nd.weights.emplace_back(re[t], im[t]);
    } else {
      throw std::invalid_argument("unknown node kind: " + kind);
    }
    ac.nodes.push_back(std::move(nd));
  }
  ac.validate();
  return ac;
}

}  // namespace mps2nn
