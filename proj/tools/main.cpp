#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mps2nn/pipeline.hpp"

namespace {

using namespace mps2nn;

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f << text;
}

NeuralNet load_nn(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open: " + path);
  nlohmann::json j;
  f >> j;
  return nn_from_json(j);
}

void add_compile_flags(CLI::App* cmd, std::string& mps_path,
                       CompileSettings& cs) {
  cmd->add_option("--mps", mps_path, "input tensor JSON")->required();
  cmd->add_option("--scheme", cs.scheme, "sequential or parallel")
      ->check(CLI::IsMember({"sequential", "parallel"}));
  cmd->add_option("--epsilon", cs.epsilon, "target accuracy")->required();
  auto* fm = cmd->add_option("--f-min", cs.f_min,
                             "assumed floor on min(|re|,|im|) of amplitudes");
  cmd->add_flag("--empirical-f-min", cs.empirical_f_min,
                "scan all basis states for the floor (refused above 2^20)")
      ->excludes(fm);
  cmd->add_flag("--strict-softplus", cs.strict_softplus,
                "emulate interior identity/relu nodes with softplus pairs");
  cmd->add_flag("--paranoid", cs.paranoid,
                "assert pass-boundary equivalences on sampled states");
}

int cmd_gen_mps(int n, int d, int chi, uint64_t seed, double scale,
                const std::string& out) {
  Mps mps = random_mps(n, d, chi, seed, scale);
  write_text(out, mps_to_json(mps).dump(2) + "\n");
  std::cout << "wrote " << out << " (n=" << n << " d=" << d << " chi=" << chi
            << ")\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tensor-network contraction to softplus-network compiler"};
  app.require_subcommand(1);

  // gen-mps
  auto* gen = app.add_subcommand("gen-mps", "sample a random tensor chain");
  int g_n = 8, g_d = 2, g_chi = 4;
  uint64_t g_seed = 42;
  double g_scale = 0.0;
  std::string g_out = "mps.json";
  gen->add_option("--n", g_n, "number of sites")->required();
  gen->add_option("--d", g_d, "physical dimension");
  gen->add_option("--chi", g_chi, "bond dimension");
  gen->add_option("--seed", g_seed, "rng seed");
  gen->add_option("--scale", g_scale, "entry scale (<=0: 1/sqrt(chi))");
  gen->add_option("--out", g_out, "output path")->required();

  // compile
  auto* comp = app.add_subcommand("compile", "compile to a softplus network");
  std::string c_mps, c_out = "nn.json";
  CompileSettings c_set;
  add_compile_flags(comp, c_mps, c_set);
  comp->add_option("--out", c_out, "output network JSON")->required();

  // dump-params
  auto* dump = app.add_subcommand(
      "dump-params", "derive and print head parameters without compiling");
  std::string p_mps;
  CompileSettings p_set;
  add_compile_flags(dump, p_mps, p_set);

  // verify
  auto* ver = app.add_subcommand("verify", "check a network against exact contraction");
  std::string v_mps, v_nn, v_report;
  VerifyOptions v_opts;
  double v_eps = 0.0;
  ver->add_option("--mps", v_mps, "input tensor JSON")->required();
  ver->add_option("--nn", v_nn, "compiled network JSON")->required();
  ver->add_option("--epsilon", v_eps,
                  "target accuracy (default: the compile-time target)");
  auto* vex = ver->add_flag("--exhaustive", v_opts.exhaustive,
                            "sweep every basis state (refused above 2^20)");
  ver->add_option("--sample", v_opts.sample, "number of sampled states")
      ->excludes(vex);
  ver->add_option("--seed", v_opts.seed, "sampling seed");
  ver->add_option("--report", v_report, "write a full JSON report here");

  // scaling
  auto* sca = app.add_subcommand("scaling", "size/depth sweep over chain lengths");
  int s_d = 2, s_chi = 4;
  double s_eps = 1e-2, s_fmin = 1e-3;
  uint64_t s_seed = 42;
  int64_t s_sample = 256;
  std::string s_scheme = "parallel", s_nlist = "4,8,16,32,64", s_out;
  sca->add_option("--d", s_d, "physical dimension");
  sca->add_option("--chi", s_chi, "bond dimension");
  sca->add_option("--epsilon", s_eps, "target accuracy");
  sca->add_option("--n-list", s_nlist, "comma-separated chain lengths");
  sca->add_option("--scheme", s_scheme, "sequential or parallel")
      ->check(CLI::IsMember({"sequential", "parallel"}));
  sca->add_option("--f-min", s_fmin, "sweep-wide amplitude floor");
  sca->add_option("--seed", s_seed, "base seed (per-instance: seed + n)");
  sca->add_option("--sample", s_sample, "verification sample per instance");
  sca->add_option("--out", s_out, "output CSV path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed())
      return cmd_gen_mps(g_n, g_d, g_chi, g_seed, g_scale, g_out);

    if (comp->parsed()) {
      Mps mps = load_mps(c_mps);
      CompileResult res = compile_full(mps, c_set);
      write_text(c_out, nn_to_json(res.nn).dump() + "\n");
      NnStats ns = nn_stats(res.nn);
      std::cout << "compiled " << c_mps << " -> " << c_out << "\n"
                << "  scheme " << res.master.plan.scheme << ", ac edges "
                << res.master.master_stats.m << ", nn nodes " << ns.nodes
                << ", nn edges " << ns.edges << ", depth " << ns.depth << "\n"
                << "  f_min " << res.f_min_used << ", delta "
                << res.params.delta << ", bisection steps "
                << res.params.t_steps << "\n"
                << "  timings " << res.timings.dump() << "\n";
      return 0;
    }

    if (dump->parsed()) {
      Mps mps = load_mps(p_mps);
      MasterBuild mb = build_master(mps, p_set.scheme);
      double emp = std::numeric_limits<double>::infinity();
      double f = resolve_f_min(mps, mb, p_set, &emp);
      HeadParams params =
          derive_params(p_set.epsilon, f, mb.master_stats,
                        std::min(mb.circuit_ln_bound, emp));
      std::cout << params_to_json(params).dump(2) << "\n";
      return 0;
    }

    if (ver->parsed()) {
      Mps mps = load_mps(v_mps);
      NeuralNet nn = load_nn(v_nn);
      v_opts.epsilon = v_eps;
      // rebuild the sign-part circuit so exp(part root) can be checked
      const MasterBuild* mb_ptr = nullptr;
      MasterBuild mb;
      if (nn.meta.contains("scheme")) {
        mb = build_master(mps, nn.meta["scheme"].get<std::string>());
        mb_ptr = &mb;
      }
      VerifyReport rep = verify(mps, nn, v_opts, mb_ptr);
      if (!v_report.empty())
        write_text(v_report, verify_report_to_json(rep).dump(2) + "\n");
      std::cout << (rep.pass ? "PASS" : "FAIL") << ": max err " << rep.max_err
                << " vs epsilon " << rep.epsilon << " over " << rep.included
                << " states (" << rep.excluded_positivity
                << " positivity-excluded, " << rep.excluded_cancellation
                << " cancellation-excluded)";
      if (rep.max_part_rel_err >= 0)
        std::cout << ", part rel err " << rep.max_part_rel_err;
      std::cout << "\n";
      return rep.pass ? 0 : 1;
    }

    if (sca->parsed()) {
      std::vector<int> ns;
      std::stringstream ss(s_nlist);
      for (std::string tok; std::getline(ss, tok, ',');)
        if (!tok.empty()) ns.push_back(std::stoi(tok));
      ScalingReport rep = scaling_report(s_d, s_chi, s_eps, ns, s_scheme,
                                         s_fmin, s_seed, s_sample);
      if (!rep.shared_params.comparator_resolvable)
        std::cerr << "note: sweep-wide comparator scale delta="
                  << rep.shared_params.delta
                  << " is below double resolution; the verify column "
                     "reflects uncertified evaluation\n";
      write_text(s_out, rep.csv);
      std::cout << rep.csv;
      std::cout << "wrote " << s_out << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
