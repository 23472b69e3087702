#include "mps2nn/complex_split.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mps2nn {

namespace {

struct SplitBuilder {
  ArithmeticCircuit master;
  int zero = -1;  // shared empty sum, value 0

  int add(AcNode nd) {
    master.nodes.push_back(std::move(nd));
    return static_cast<int>(master.nodes.size()) - 1;
  }

  int zero_node() {
    if (zero < 0) {
      AcNode nd;
      nd.kind = AcNode::Kind::Wsum;  // no terms: evaluates to 0
      zero = add(std::move(nd));
    }
    return zero;
  }

  int product(int a, int b) {
    AcNode nd;
    nd.kind = AcNode::Kind::Product;
    nd.inputs = {a, b};
    return add(std::move(nd));
  }

  int wsum(std::vector<int> in, std::vector<cplx> w) {
    AcNode nd;
    nd.kind = AcNode::Kind::Wsum;
    nd.inputs = std::move(in);
    nd.weights = std::move(w);
    return add(std::move(nd));
  }
};

}  // namespace

QuadAc split_complex(const ArithmeticCircuit& ac) {
  ac.validate();
  QuadAc quad;
  SplitBuilder sb;
  sb.master.phys_dims = ac.phys_dims;
  quad.provenance.assign(ac.nodes.size(), {-1, -1, -1, -1});

  for (size_t i = 0; i < ac.nodes.size(); ++i) {
    const AcNode& nd = ac.nodes[i];
    std::array<int, 4>& out = quad.provenance[i];
    switch (nd.kind) {
      case AcNode::Kind::Indicator: {
        AcNode ind;
        ind.kind = AcNode::Kind::Indicator;
        ind.site = nd.site;
        ind.value = nd.value;
        int id = sb.add(std::move(ind));
        int z = sb.zero_node();
        out = {id, z, z, z};  // an indicator is real and non-negative
        break;
      }
      case AcNode::Kind::Product: {
        if (nd.inputs.size() != 2)
          throw std::invalid_argument(
              "split requires binary products; run normalize_binary first");
        const auto& u = quad.provenance[static_cast<size_t>(nd.inputs[0])];
        const auto& v = quad.provenance[static_cast<size_t>(nd.inputs[1])];
        const int urp = u[0], urn = u[1], uip = u[2], uin = u[3];
        const int vrp = v[0], vrn = v[1], vip = v[2], vin = v[3];
        // (ur+ - ur- + i(ui+ - ui-)) * (vr+ - ...): expand and collect the
        // sign of each of the 16 cross terms
        const std::array<std::array<std::pair<int, int>, 4>, 4> streams = {{
            // re+ = ur+vr+ + ur-vr- + ui+vi- + ui-vi+
            {{{urp, vrp}, {urn, vrn}, {uip, vin}, {uin, vip}}},
            // re- = ur+vr- + ur-vr+ + ui+vi+ + ui-vi-
            {{{urp, vrn}, {urn, vrp}, {uip, vip}, {uin, vin}}},
            // im+ = ur+vi+ + ur-vi- + ui+vr+ + ui-vr-
            {{{urp, vip}, {urn, vin}, {uip, vrp}, {uin, vrn}}},
            // im- = ur+vi- + ur-vi+ + ui+vr- + ui-vr+
            {{{urp, vin}, {urn, vip}, {uip, vrn}, {uin, vrp}}},
        }};
        for (int p = 0; p < 4; ++p) {
          std::vector<int> terms;
          for (const auto& [a, b] : streams[static_cast<size_t>(p)])
            terms.push_back(sb.product(a, b));
          out[static_cast<size_t>(p)] = sb.wsum(
              std::move(terms), std::vector<cplx>(4, cplx(1.0, 0.0)));
        }
        break;
      }
      case AcNode::Kind::Wsum: {
        // w = (a+ - a-) + i(b+ - b-), child = (rp - rn) + i(ip - in):
        // re+ of w*child picks a+rp + a-rn + b+in + b-ip, and so on. Zero
        // components stay as explicit zero-weight edges.
        std::array<std::vector<int>, 4> in;
        std::array<std::vector<cplx>, 4> w;
        for (size_t t = 0; t < nd.inputs.size(); ++t) {
          const auto& c = quad.provenance[static_cast<size_t>(nd.inputs[t])];
          const double ap = std::max(nd.weights[t].real(), 0.0);
          const double an = std::max(-nd.weights[t].real(), 0.0);
          const double bp = std::max(nd.weights[t].imag(), 0.0);
          const double bn = std::max(-nd.weights[t].imag(), 0.0);
          const int rp = c[0], rn = c[1], ip = c[2], inn = c[3];
          auto push = [&](int part, int src, double weight) {
            in[static_cast<size_t>(part)].push_back(src);
            w[static_cast<size_t>(part)].push_back(cplx(weight, 0.0));
          };
          push(0, rp, ap); push(0, rn, an); push(0, inn, bp); push(0, ip, bn);
          push(1, rn, ap); push(1, rp, an); push(1, ip, bp); push(1, inn, bn);
          push(2, ip, ap); push(2, inn, an); push(2, rp, bp); push(2, rn, bn);
          push(3, inn, ap); push(3, ip, an); push(3, rn, bp); push(3, rp, bn);
        }
        for (int p = 0; p < 4; ++p)
          out[static_cast<size_t>(p)] =
              sb.wsum(std::move(in[static_cast<size_t>(p)]),
                      std::move(w[static_cast<size_t>(p)]));
        break;
      }
    }
  }
  if (ac.roots.size() != 1)
    throw std::invalid_argument("split expects a single-root circuit");
  const auto& r = quad.provenance[static_cast<size_t>(ac.roots[0])];
  quad.master = std::move(sb.master);
  quad.master.roots = {r[0], r[1], r[2], r[3]};
  quad.master.validate();
  return quad;
}

std::array<double, 4> eval_quad(const QuadAc& quad, const BasisState& s) {
  std::vector<cplx> roots = eval_ac_roots(quad.master, s);
  std::array<double, 4> parts{};
  for (int p = 0; p < 4; ++p) {
    const cplx v = roots[static_cast<size_t>(p)];
    if (v.imag() != 0.0 || v.real() < 0.0)
      throw std::logic_error("split part left the non-negative reals");
    parts[static_cast<size_t>(p)] = v.real();
  }
  return parts;
}

cplx recombine(const std::array<double, 4>& parts) {
  return cplx(parts[0] - parts[1], parts[2] - parts[3]);
}

double cancellation_ratio(const std::array<double, 4>& parts) {
  double mx = 0.0;
  for (double p : parts) mx = std::max(mx, p);
  double mag = std::abs(recombine(parts));
  if (mag == 0.0)
    return mx == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
  return mx / mag;
}

nlohmann::json quad_to_json(const QuadAc& quad) {
  static const char* part_names[4] = {"re_pos", "re_neg", "im_pos", "im_neg"};
  nlohmann::json j;
  for (int p = 0; p < 4; ++p) {
    ArithmeticCircuit part = quad.master;
    part.roots = {quad.master.roots[static_cast<size_t>(p)]};
    j[part_names[p]] = ac_to_json(part);
  }
  nlohmann::json prov = nlohmann::json::array();
  for (const auto& q : quad.provenance)
    prov.push_back({q[0], q[1], q[2], q[3]});
  j["provenance"] = prov;
  return j;
}

}  // namespace mps2nn
