#include "mps2nn/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

namespace mps2nn {

namespace {

using clock_t_ = std::chrono::steady_clock;

double seconds_since(clock_t_::time_point t0) {
  return std::chrono::duration<double>(clock_t_::now() - t0).count();
}

constexpr int64_t kEmpiricalLimit = int64_t{1} << 20;
constexpr int64_t kEmpiricalBoundLimit = 4096;

// evenly spread ranks so audits touch the whole index range cheaply
std::vector<BasisState> audit_states(const Mps& mps, int64_t want) {
  int64_t count = mps.state_count();
  if (count < 0) count = kEmpiricalLimit;
  int64_t k = std::min<int64_t>(want, count);
  std::vector<BasisState> out;
  out.reserve(k);
  for (int64_t i = 0; i < k; ++i)
    out.push_back(unrank_state(mps, i * (count / k)));
  return out;
}

void audit_close(cplx a, cplx b, const char* what) {
  double scale = std::max({std::abs(a), std::abs(b), 1e-300});
  if (std::abs(a - b) > 1e-10 * scale) {
    std::ostringstream os;
    os << "paranoid: " << what << " mismatch: " << a.real() << "+"
       << a.imag() << "i vs " << b.real() << "+" << b.imag() << "i";
    throw std::logic_error(os.str());
  }
}

// pass-boundary equivalences from planning through the sign-part split
void paranoid_audit_master(const Mps& mps, const MasterBuild& mb) {
  const CostReport& c = mb.cost;
  int64_t per_round_sum = 0;
  for (int64_t v : c.per_round) per_round_sum += v;
  if (per_round_sum != c.multiply_count)
    throw std::logic_error("paranoid: per-round costs do not sum to total");
  for (const auto& s : audit_states(mps, 32)) {
    cplx ref = contract_exact(mps, s);
    audit_close(execute_plan(mps, mb.plan, s).value, ref, "plan executor");
    audit_close(eval_ac(mb.lowered, s), ref, "lowered circuit");
    audit_close(recombine(eval_quad(mb.quad, s)), ref, "sign-part split");
  }
}

// the log network must reproduce each part exactly up to fp rounding
void paranoid_audit_net(const Mps& mps, const MasterBuild& mb,
                        const NeuralNet& nn, double log_zero) {
  if (nn.roots.size() < 6)
    throw std::logic_error("paranoid: network lacks the four part roots");
  for (const auto& s : audit_states(mps, 32)) {
    auto parts = eval_quad(mb.quad, s);
    std::vector<double> outs = eval_nn(nn, encode_input(nn, s, log_zero));
    for (int k = 0; k < 4; ++k) {
      double got = std::exp(outs[2 + k]);
      if (std::abs(got - parts[k]) > 1e-9 * std::max(parts[k], 1e-300)) {
        std::ostringstream os;
        os << "paranoid: log network part " << k << " drifted: exp(out)="
           << got << " vs " << parts[k];
        throw std::logic_error(os.str());
      }
    }
  }
}

}  // namespace

MasterBuild build_master(const Mps& mps, const std::string& scheme) {
  MasterBuild mb;
  if (scheme == "sequential")
    mb.plan = plan_sequential(mps);
  else if (scheme == "parallel")
    mb.plan = plan_parallel(mps);
  else
    throw std::invalid_argument("build_master: scheme must be sequential or parallel, got " +
                                scheme);
  mb.cost = plan_cost(mb.plan);
  mb.lowered = lower_to_ac(mps, mb.plan);
  ArithmeticCircuit binary = normalize_binary(mb.lowered);
  mb.quad = split_complex(binary);
  mb.master_stats = ac_stats(mb.quad.master);
  mb.circuit_ln_bound = log_value_bound(mb.quad.master);
  return mb;
}

Mps part_sum_mps(const Mps& mps) {
  Mps out = mps;
  for (auto& t : out.sites)
    for (auto& v : t.data)
      v = cplx(std::abs(v.real()) + std::abs(v.imag()), 0.0);
  return out;
}

double resolve_f_min(const Mps& mps, const MasterBuild& mb,
                     const CompileSettings& settings,
                     double* empirical_ln_bound) {
  if (empirical_ln_bound)
    *empirical_ln_bound = std::numeric_limits<double>::infinity();
  if (!settings.empirical_f_min) {
    if (!(settings.f_min > 0))
      throw std::invalid_argument(
          "resolve_f_min: supply a positive f_min or request empirical scan");
    return settings.f_min;
  }
  int64_t count = mps.state_count();
  if (count < 0 || count > kEmpiricalLimit) {
    std::ostringstream os;
    os << "resolve_f_min: empirical scan needs at most " << kEmpiricalLimit
       << " basis states; this space has "
       << (count < 0 ? std::string(">=2^62") : std::to_string(count))
       << ". Supply an explicit f_min.";
    throw std::invalid_argument(os.str());
  }
  bool track_bound = empirical_ln_bound && count <= kEmpiricalBoundLimit;
  double fmin = std::numeric_limits<double>::infinity();
  double max_part = 0.0;
  for (int64_t r = 0; r < count; ++r) {
    BasisState s = unrank_state(mps, r);
    cplx v = contract_exact(mps, s);
    for (double comp : {std::abs(v.real()), std::abs(v.imag())})
      if (comp > 0.0) fmin = std::min(fmin, comp);
    if (track_bound) {
      auto parts = eval_quad(mb.quad, s);
      for (double p : parts) max_part = std::max(max_part, p);
    }
  }
  if (!std::isfinite(fmin))
    throw std::domain_error(
        "resolve_f_min: every amplitude component vanishes; supply f_min");
  if (track_bound && max_part > 0.0)
    *empirical_ln_bound = std::log(max_part) + 1e-6;
  return fmin;
}

CompileResult finish_compile(MasterBuild mb, const HeadParams& params,
                             const CompileSettings& settings) {
  CompileResult res;
  res.params = params;
  res.f_min_used = params.f_min;

  CompileOptions copts;
  copts.strict_softplus = false;  // applied after the heads, below
  copts.delta_identity = settings.delta_identity;
  copts.log_zero = settings.log_zero;
  res.nn = compile_nonneg(mb.quad.master, copts);
  if (res.nn.roots.size() != 4)
    throw std::logic_error("finish_compile: master must have 4 part roots");
  std::array<int, 4> part_roots = {res.nn.roots[0], res.nn.roots[1],
                                   res.nn.roots[2], res.nn.roots[3]};
  NnBuilder b(res.nn);
  HeadOut heads = build_heads(b, part_roots, params);
  res.nn.roots = {heads.g1,      heads.g2,      part_roots[0],
                  part_roots[1], part_roots[2], part_roots[3]};
  if (settings.strict_softplus)
    res.nn = strictify_softplus(res.nn, settings.delta_identity);

  res.nn.meta = nlohmann::json{
      {"epsilon", params.epsilon},
      {"f_min", params.f_min},
      {"scheme", mb.plan.scheme},
      {"log_zero", settings.log_zero},
      {"strict_softplus", settings.strict_softplus},
      {"roots",
       {"g1", "g2", "ln_re_pos", "ln_re_neg", "ln_im_pos", "ln_im_neg"}},
      {"params", params_to_json(params)}};
  res.nn.validate();
  res.master = std::move(mb);
  return res;
}

CompileResult compile_full(const Mps& mps, const CompileSettings& settings) {
  mps.validate();
  nlohmann::json timings;

  auto t0 = clock_t_::now();
  MasterBuild mb = build_master(mps, settings.scheme);
  if (settings.paranoid) paranoid_audit_master(mps, mb);
  timings["plan_and_lower"] = seconds_since(t0);

  t0 = clock_t_::now();
  double emp_bound = std::numeric_limits<double>::infinity();
  double f = resolve_f_min(mps, mb, settings, &emp_bound);
  timings["f_min"] = seconds_since(t0);

  t0 = clock_t_::now();
  double bound = std::min(mb.circuit_ln_bound, emp_bound);
  HeadParams params =
      derive_params(settings.epsilon, f, mb.master_stats, bound);
  timings["derive_params"] = seconds_since(t0);

  t0 = clock_t_::now();
  CompileResult res = finish_compile(std::move(mb), params, settings);
  if (settings.paranoid)
    paranoid_audit_net(mps, res.master, res.nn, settings.log_zero);
  timings["emit_network"] = seconds_since(t0);
  res.timings = std::move(timings);
  return res;
}

namespace {

StateRecord make_excluded(const BasisState& s, const char* reason) {
  StateRecord r;
  r.state = s;
  r.excluded = true;
  r.reason = reason;
  return r;
}

}  // namespace

VerifyReport verify(const Mps& mps, const NeuralNet& nn,
                    const VerifyOptions& opts, const MasterBuild* master) {
  auto t0 = clock_t_::now();
  mps.validate();
  if (nn.roots.size() < 2)
    throw std::invalid_argument("verify: network must expose g1 and g2 roots");

  double epsilon = opts.epsilon;
  double f_min = 0.0;
  double log_zero = -1e4;
  if (nn.meta.contains("epsilon") && epsilon <= 0)
    epsilon = nn.meta["epsilon"].get<double>();
  if (nn.meta.contains("f_min")) f_min = nn.meta["f_min"].get<double>();
  if (nn.meta.contains("log_zero"))
    log_zero = nn.meta["log_zero"].get<double>();
  if (!(epsilon > 0))
    throw std::invalid_argument("verify: no epsilon given and none in metadata");

  VerifyReport rep;
  rep.epsilon = epsilon;
  rep.states_total = mps.state_count();
  rep.empirical_f_min = std::numeric_limits<double>::infinity();
  rep.nn = nn_stats(nn);
  if (master) {
    rep.ac = master->master_stats;
    rep.cost = master->cost;
    rep.have_master = true;
  }

  Mps psum = master ? Mps{} : part_sum_mps(mps);
  bool exhaustive =
      opts.exhaustive ||
      (rep.states_total > 0 && rep.states_total <= opts.sample);
  if (opts.exhaustive &&
      (rep.states_total < 0 || rep.states_total > kEmpiricalLimit))
    throw std::invalid_argument(
        "verify: exhaustive sweep refused beyond 2^20 states; use sampling");

  std::mt19937_64 rng(opts.seed);
  int64_t todo = exhaustive ? rep.states_total : opts.sample;

  double err_sum = 0.0;
  double max_err = 0.0;
  bool any_included = false;
  double oracle_s = 0.0, nn_s = 0.0;

  for (int64_t it = 0; it < todo; ++it) {
    BasisState s;
    if (exhaustive) {
      s = unrank_state(mps, it);
    } else {
      s.resize(mps.n());
      for (int i = 0; i < mps.n(); ++i) {
        std::uniform_int_distribution<int> dist(0, mps.phys_dim(i) - 1);
        s[i] = dist(rng);
      }
    }
    rep.tested++;

    auto ta = clock_t_::now();
    cplx ex = contract_exact(mps, s);
    for (double comp : {std::abs(ex.real()), std::abs(ex.imag())})
      if (comp > 0.0) rep.empirical_f_min = std::min(rep.empirical_f_min, comp);

    double mag = std::abs(ex);
    std::array<double, 4> parts{};
    bool cancel;
    if (master) {
      parts = eval_quad(master->quad, s);
      cancel =
          mag == 0.0 || cancellation_ratio(parts) > opts.cancellation_threshold;
    } else {
      // without the split parts, the part-sum chain bounds the largest part
      double gross = std::abs(contract_exact(psum, s));
      cancel = mag == 0.0 || gross / mag > opts.cancellation_threshold;
    }
    oracle_s += seconds_since(ta);
    bool below_floor =
        f_min > 0 &&
        std::min(std::abs(ex.real()), std::abs(ex.imag())) <
            f_min * (1.0 - 1e-12);
    if (cancel || below_floor) {
      const char* why = cancel ? "cancellation" : "positivity";
      (cancel ? rep.excluded_cancellation : rep.excluded_positivity)++;
      if ((int64_t)rep.excluded.size() < opts.max_records)
        rep.excluded.push_back(make_excluded(s, why));
      continue;
    }

    StateRecord r;
    r.state = s;
    auto [g1_ref, g2_ref] = log_amplitude(mps, s);
    r.g1_ref = g1_ref;
    r.g2_ref = g2_ref;
    auto tb = clock_t_::now();
    std::vector<double> outs = eval_nn(nn, encode_input(nn, s, log_zero));
    nn_s += seconds_since(tb);
    r.g1_nn = outs[0];
    r.g2_nn = outs[1];
    r.err = std::hypot(r.g1_nn - r.g1_ref, wrap_angle(r.g2_nn - r.g2_ref));

    if (master && nn.roots.size() >= 6) {
      double worst = 0.0;
      for (int k = 0; k < 4; ++k) {
        double nn_part = std::exp(outs[2 + k]);
        double rel =
            std::abs(nn_part - parts[k]) / std::max(parts[k], 1e-300);
        worst = std::max(worst, rel);
      }
      r.part_rel_err = worst;
      rep.max_part_rel_err = std::max(rep.max_part_rel_err, worst);
    } else {
      r.part_rel_err = -1.0;
    }

    any_included = true;
    rep.included++;
    err_sum += r.err;
    max_err = std::max(max_err, r.err);
    if ((int64_t)rep.records.size() < opts.max_records)
      rep.records.push_back(std::move(r));
  }

  if (any_included) {
    rep.max_err = max_err;
    rep.mean_err = err_sum / rep.included;
  } else {
    rep.max_err = std::numeric_limits<double>::quiet_NaN();
    rep.mean_err = std::numeric_limits<double>::quiet_NaN();
  }
  if (!std::isfinite(rep.empirical_f_min)) rep.empirical_f_min = 0.0;
  rep.pass = any_included && rep.max_err < epsilon;
  rep.wall_seconds = seconds_since(t0);
  rep.timings = nlohmann::json{
      {"oracle", oracle_s}, {"nn_eval", nn_s}, {"total", rep.wall_seconds}};
  return rep;
}

namespace {

nlohmann::json record_to_json(const StateRecord& r) {
  nlohmann::json j{{"state", r.state}, {"excluded", r.excluded}};
  if (r.excluded) {
    j["reason"] = r.reason;
  } else {
    j["err"] = r.err;
    j["g1_nn"] = r.g1_nn;
    j["g2_nn"] = r.g2_nn;
    j["g1_ref"] = r.g1_ref;
    j["g2_ref"] = r.g2_ref;
    if (r.part_rel_err >= 0) j["part_rel_err"] = r.part_rel_err;
  }
  return j;
}

}  // namespace

nlohmann::json verify_report_to_json(const VerifyReport& r) {
  nlohmann::json j{{"pass", r.pass},
                   {"epsilon", r.epsilon},
                   {"states_total", r.states_total},
                   {"tested", r.tested},
                   {"included", r.included},
                   {"excluded_positivity", r.excluded_positivity},
                   {"excluded_cancellation", r.excluded_cancellation},
                   {"empirical_f_min", r.empirical_f_min},
                   {"wall_seconds", r.wall_seconds}};
  j["max_err"] = std::isfinite(r.max_err) ? nlohmann::json(r.max_err)
                                          : nlohmann::json("nan");
  j["mean_err"] = std::isfinite(r.mean_err) ? nlohmann::json(r.mean_err)
                                            : nlohmann::json("nan");
  if (r.max_part_rel_err >= 0) j["max_part_rel_err"] = r.max_part_rel_err;
  j["nn_stats"] = {
      {"nodes", r.nn.nodes}, {"edges", r.nn.edges}, {"depth", r.nn.depth}};
  if (r.have_master) {
    j["ac_stats"] = {
        {"n", r.ac.n}, {"m", r.ac.m}, {"l", r.ac.l}, {"w_max", r.ac.w_max}};
    j["plan_cost"] = {{"multiply_count", r.cost.multiply_count},
                      {"round_depth", r.cost.round_depth}};
  }
  j["timings"] = r.timings.is_null() ? nlohmann::json::object() : r.timings;
  j["records"] = nlohmann::json::array();
  for (const auto& rec : r.records) j["records"].push_back(record_to_json(rec));
  j["excluded"] = nlohmann::json::array();
  for (const auto& rec : r.excluded)
    j["excluded"].push_back(record_to_json(rec));
  return j;
}

ScalingReport scaling_report(int d, int chi, double epsilon,
                             const std::vector<int>& n_list,
                             const std::string& scheme, double f_min,
                             uint64_t base_seed, int64_t sample) {
  if (n_list.empty())
    throw std::invalid_argument("scaling_report: empty size list");

  ScalingReport rep;
  struct Item {
    Mps mps;
    MasterBuild mb;
    double build_seconds = 0.0;
  };
  std::vector<Item> items;
  AcStats worst;
  double worst_bound = -std::numeric_limits<double>::infinity();
  for (int n : n_list) {
    Item it;
    it.mps = random_mps(n, d, chi, base_seed + (uint64_t)n);
    auto t0 = clock_t_::now();
    it.mb = build_master(it.mps, scheme);
    it.build_seconds = seconds_since(t0);
    worst.n = std::max(worst.n, it.mb.master_stats.n);
    worst.m = std::max(worst.m, it.mb.master_stats.m);
    worst.l = std::max(worst.l, it.mb.master_stats.l);
    worst.w_max = std::max(worst.w_max, it.mb.master_stats.w_max);
    worst_bound = std::max(worst_bound, it.mb.circuit_ln_bound);
    items.push_back(std::move(it));
  }
  // one parameter set valid for every instance: bound taken over the sweep
  rep.shared_params = derive_params(epsilon, f_min, worst, worst_bound);

  CompileSettings cs;
  cs.scheme = scheme;
  cs.epsilon = epsilon;
  cs.f_min = f_min;

  for (size_t i = 0; i < items.size(); ++i) {
    auto t0 = clock_t_::now();
    CompileResult cr =
        finish_compile(std::move(items[i].mb), rep.shared_params, cs);
    double emit_seconds = seconds_since(t0);

    VerifyOptions vo;
    vo.sample = sample;
    vo.seed = base_seed + (uint64_t)n_list[i];
    VerifyReport vr = verify(items[i].mps, cr.nn, vo, &cr.master);

    NnStats ns = nn_stats(cr.nn);
    ScalingRow row;
    row.n = n_list[i];
    row.nn_depth = ns.depth;
    row.nn_edges = ns.edges;
    row.ac_edges = cr.master.master_stats.m;
    row.ac_depth = cr.master.master_stats.l;
    row.plan_multiplies = cr.master.cost.multiply_count;
    row.compile_seconds = items[i].build_seconds + emit_seconds;
    // honest even when ugly: under the sweep-wide parameter set delta can
    // fall below comparator resolution (quality unspecified in doubles),
    // and long chains cancel so hard that every sampled state is excluded
    // (nan: nothing certified)
    row.verify_max_err = vr.max_err;
    rep.rows.push_back(row);
  }
  rep.csv = scaling_csv(rep);
  return rep;
}

std::string scaling_csv(const ScalingReport& r) {
  std::ostringstream os;
  os << "N,nn depth,nn edges,ac edges,ac depth,plan multiply count,"
        "compile time,verify max error\n";
  for (const auto& row : r.rows) {
    os << row.n << ',' << row.nn_depth << ',' << row.nn_edges << ','
       << row.ac_edges << ',' << row.ac_depth << ',' << row.plan_multiplies
       << ',' << row.compile_seconds << ',' << row.verify_max_err << '\n';
  }
  return os.str();
}

}  // namespace mps2nn
