#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "mps2nn/pipeline.hpp"

namespace py = pybind11;
using namespace mps2nn;

// The module speaks JSON strings at the boundary: the on-disk formats are
// already JSON, so python callers get dict-compatible data without a second
// schema to maintain.

namespace {

std::string gen_mps_json(int n, int d, int chi, uint64_t seed, double scale) {
  return mps_to_json(random_mps(n, d, chi, seed, scale)).dump();
}

std::string compile_json(const std::string& mps_json, const std::string& scheme,
                         double epsilon, double f_min, bool empirical_f_min,
                         bool strict_softplus) {
  Mps mps = mps_from_json(nlohmann::json::parse(mps_json));
  CompileSettings cs;
  cs.scheme = scheme;
  cs.epsilon = epsilon;
  cs.f_min = f_min;
  cs.empirical_f_min = empirical_f_min;
  cs.strict_softplus = strict_softplus;
  return nn_to_json(compile_full(mps, cs).nn).dump();
}

std::string verify_json(const std::string& mps_json, const std::string& nn_json,
                        bool exhaustive, int64_t sample, uint64_t seed,
                        double epsilon) {
  Mps mps = mps_from_json(nlohmann::json::parse(mps_json));
  NeuralNet nn = nn_from_json(nlohmann::json::parse(nn_json));
  VerifyOptions vo;
  vo.exhaustive = exhaustive;
  vo.sample = sample;
  vo.seed = seed;
  vo.epsilon = epsilon;
  const MasterBuild* mb_ptr = nullptr;
  MasterBuild mb;
  if (nn.meta.contains("scheme")) {
    mb = build_master(mps, nn.meta["scheme"].get<std::string>());
    mb_ptr = &mb;
  }
  return verify_report_to_json(verify(mps, nn, vo, mb_ptr)).dump();
}

std::pair<double, double> eval_nn_json(const std::string& nn_json,
                                       const std::vector<int>& state) {
  NeuralNet nn = nn_from_json(nlohmann::json::parse(nn_json));
  double log_zero = nn.meta.contains("log_zero")
                        ? nn.meta["log_zero"].get<double>()
                        : -1e4;
  std::vector<double> outs = eval_nn(nn, encode_input(nn, state, log_zero));
  if (outs.size() < 2)
    throw std::runtime_error("network has fewer than two outputs");
  return {outs[0], outs[1]};
}

std::pair<double, double> log_amplitude_json(const std::string& mps_json,
                                             const std::vector<int>& state) {
  Mps mps = mps_from_json(nlohmann::json::parse(mps_json));
  return log_amplitude(mps, state);
}

std::string scaling_csv_json(int d, int chi, double epsilon,
                             const std::vector<int>& n_list,
                             const std::string& scheme, double f_min,
                             uint64_t seed, int64_t sample) {
  return scaling_report(d, chi, epsilon, n_list, scheme, f_min, seed, sample)
      .csv;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "tensor-network contraction to softplus-network compiler";
  m.def("gen_mps_json", &gen_mps_json, py::arg("n"), py::arg("d"),
        py::arg("chi"), py::arg("seed") = 42, py::arg("scale") = 0.0);
  m.def("compile_json", &compile_json, py::arg("mps_json"),
        py::arg("scheme") = "parallel", py::arg("epsilon") = 1e-2,
        py::arg("f_min") = 0.0, py::arg("empirical_f_min") = false,
        py::arg("strict_softplus") = false);
  m.def("verify_json", &verify_json, py::arg("mps_json"), py::arg("nn_json"),
        py::arg("exhaustive") = false, py::arg("sample") = 256,
        py::arg("seed") = 1234, py::arg("epsilon") = 0.0);
  m.def("eval_nn_json", &eval_nn_json, py::arg("nn_json"), py::arg("state"));
  m.def("log_amplitude_json", &log_amplitude_json, py::arg("mps_json"),
        py::arg("state"));
  m.def("scaling_csv", &scaling_csv_json, py::arg("d"), py::arg("chi"),
        py::arg("epsilon"), py::arg("n_list"), py::arg("scheme") = "parallel",
        py::arg("f_min") = 1e-3, py::arg("seed") = 42,
        py::arg("sample") = 256);
}
