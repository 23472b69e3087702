#include "mps2nn/head_builder.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace mps2nn {

namespace {

constexpr double kPi = 3.14159265358979323846;

// largest derivative of softplus^-1 on [x_min, inf) is at x_min:
// 1 / (1 - e^-x_min). Computed in log space since x_min may underflow.
double ln_lipschitz_from(double x_min, double ln_x_min) {
  if (x_min > 1e-10) return -std::log(-std::expm1(-x_min));
  // 1 - e^-x ~= x
  return -ln_x_min;
}

}  // namespace

int sawtooth_levels(double operand_bound, double eps) {
  if (!(operand_bound > 0) || !(eps > 0))
    throw std::invalid_argument("sawtooth_levels: bounds must be positive");
  double s = 0.5 * std::log2(1.5 * operand_bound / eps);
  int levels = (int)std::ceil(s);
  return std::max(1, levels);
}

HeadParams derive_params(double epsilon, double f_min, const AcStats& stats,
                         double circuit_ln_bound) {
  if (!(epsilon > 0) || !(epsilon < 1))
    throw std::invalid_argument("derive_params: epsilon must be in (0,1)");
  if (!(f_min > 0))
    throw std::invalid_argument("derive_params: f_min must be positive");
  if (stats.m <= 0)
    throw std::invalid_argument("derive_params: circuit has no edges");

  HeadParams p;
  p.epsilon = epsilon;
  p.f_min = f_min;
  p.m_edges = stats.m;
  p.w_max = std::max(1.0, stats.w_max);

  p.eps_spinv = epsilon / 3.0;
  p.eps_arctan = epsilon / 8.0;
  p.eps_mul_sign = epsilon / 48.0;

  double m = (double)stats.m;
  p.ln_bound_formula = m * std::log(m * p.w_max);
  p.ln_bound = std::min(p.ln_bound_formula, circuit_ln_bound);
  if (!std::isfinite(p.ln_bound))
    throw std::domain_error(
        "derive_params: output bound is not finite (empty circuit?)");

  p.x_large = -std::log(-std::expm1(-p.eps_spinv));
  p.x_cap = p.x_large + 1.0;
  p.y_star_max = p.x_large;
  p.y_star_min = std::log(f_min) - p.ln_bound;
  // a positive y*_min means f_min > e^ln_bound: no part value can sit both
  // above the floor and below the bound, so the instance is contradictory
  if (p.y_star_min > 0) {
    std::ostringstream os;
    os << "derive_params: f_min " << f_min
       << " exceeds the representable output range (ln bound " << p.ln_bound
       << ")";
    throw std::invalid_argument(os.str());
  }

  p.x_min = std::log1p(std::exp(p.y_star_min));
  p.ln_x_min = p.y_star_min < -40 ? p.y_star_min : std::log(p.x_min);
  p.ln_lipschitz = ln_lipschitz_from(p.x_min, p.ln_x_min);

  double ln_delta = std::log(p.eps_spinv) - std::log(16.0) - p.ln_lipschitz;
  p.delta = std::exp(ln_delta);
  // by construction delta < eps_spinv/(2L) and, since eps_spinv/16 < 1,
  // delta < x_min: the comparator is exact wherever the bisection needs it
  if (!std::isfinite(p.delta) || p.delta == 0.0) {
    std::ostringstream os;
    os << "range overflow: comparator sharpness exp(" << ln_delta
       << ") is not representable; f_min " << f_min << " against ln bound "
       << p.ln_bound << " demands more dynamic range than double precision";
    throw std::domain_error(os.str());
  }
  p.comparator_resolvable = p.delta >= 1e-12;

  double range = p.y_star_max - p.y_star_min;
  p.t_steps = std::max(1, (int)std::ceil(std::log2(range / p.eps_spinv)));
  p.eps_tilde = p.eps_spinv / (8.0 * p.t_steps);
  p.m_bisect = range / 2.0 + 1.0;
  p.m_blend = range + p.x_large + 4.0;
  p.s_bisect = sawtooth_levels(p.m_bisect, p.eps_tilde);
  p.s_blend = sawtooth_levels(p.m_blend, p.eps_tilde);
  p.s_sign = sawtooth_levels(2.0, p.eps_mul_sign);

  p.x_min_arctan = std::log(p.eps_arctan);
  // tangent-line undershoot on step h is bounded by h^2/8 * max|t''| with
  // max|t''| < 1/2, so h = 4 sqrt(eps) keeps it under eps/2
  double h = 4.0 * std::sqrt(p.eps_arctan);
  p.segments = (int)std::ceil(-p.x_min_arctan / h) + 1;

  for (double v : {p.x_large, p.x_min, p.ln_lipschitz, p.eps_tilde,
                   p.m_bisect, p.m_blend})
    if (!std::isfinite(v))
      throw std::domain_error(
          "range overflow: derived head parameter is not finite");
  return p;
}

nlohmann::json params_to_json(const HeadParams& p) {
  return nlohmann::json{{"epsilon", p.epsilon},
                        {"f_min", p.f_min},
                        {"m_edges", p.m_edges},
                        {"w_max", p.w_max},
                        {"eps_spinv", p.eps_spinv},
                        {"eps_arctan", p.eps_arctan},
                        {"eps_mul_sign", p.eps_mul_sign},
                        {"ln_bound_formula", p.ln_bound_formula},
                        {"ln_bound", p.ln_bound},
                        {"y_star_min", p.y_star_min},
                        {"y_star_max", p.y_star_max},
                        {"x_large", p.x_large},
                        {"x_cap", p.x_cap},
                        {"x_min", p.x_min},
                        {"ln_x_min", p.ln_x_min},
                        {"ln_lipschitz", p.ln_lipschitz},
                        {"delta", p.delta},
                        {"t_steps", p.t_steps},
                        {"eps_tilde", p.eps_tilde},
                        {"m_bisect", p.m_bisect},
                        {"m_blend", p.m_blend},
                        {"s_bisect", p.s_bisect},
                        {"s_blend", p.s_blend},
                        {"s_sign", p.s_sign},
                        {"segments", p.segments},
                        {"x_min_arctan", p.x_min_arctan},
                        {"comparator_resolvable", p.comparator_resolvable}};
}

int emit_heaviside(NnBuilder& b, int v, double delta) {
  if (!(delta > 0) || delta > 0.125)
    throw std::invalid_argument("emit_heaviside: delta must be in (0, 1/8]");
  // stage 1: clamp to [-1,1]. For |v| <= 1 both relus are 0 and the
  // pass-through is bitwise exact; for huge |v| the subtraction v - a1 is
  // exact by Sterbenz-style cancellation of the shared leading bits, so the
  // clamp introduces only the rounding already present in v.
  int a1 = b.relu({{v, 1.0}}, -1.0);
  int a2 = b.relu({{v, -1.0}}, -1.0);
  int vc = b.identity({{v, 1.0}, {a1, -1.0}, {a2, 1.0}});
  // stage 2: clamp to [-8d, 8d] so the ramp sees arguments it can resolve
  double theta = 8.0 * delta;
  int b1 = b.relu({{vc, 1.0}}, -theta);
  int b2 = b.relu({{vc, -1.0}}, -theta);
  int w = b.identity({{vc, 1.0}, {b1, -1.0}, {b2, 1.0}});
  // stage 3: the ramp itself
  double k = 1.0 / (2.0 * delta);
  int r1 = b.relu({{w, k}}, 0.5);
  int r2 = b.relu({{w, k}}, -0.5);
  return b.identity({{r1, 1.0}, {r2, -1.0}});
}

namespace {

int emit_clamp01(NnBuilder& b, int v) {
  int lo = b.relu({{v, -1.0}});
  int hi = b.relu({{v, 1.0}}, -1.0);
  return b.identity({{v, 1.0}, {lo, 1.0}, {hi, -1.0}});
}

// f_levels(t): piecewise-linear interpolation of t^2 at multiples of
// 2^-levels on [0,1], via the sawtooth ladder h_s = 2h_{s-1} - 4 relu(. -1/2)
int emit_square_approx(NnBuilder& b, int t, int levels) {
  std::vector<std::pair<int, double>> acc{{t, 1.0}};
  int h = t;
  double scale = 1.0;
  for (int s = 1; s <= levels; ++s) {
    int r = b.relu({{h, 1.0}}, -0.5);
    h = b.identity({{h, 2.0}, {r, -4.0}});
    scale *= 0.25;
    acc.push_back({h, -scale});
  }
  return b.identity(std::move(acc));
}

}  // namespace

int emit_mul(NnBuilder& b, int x, int y, double operand_bound, int levels) {
  if (!(operand_bound > 0))
    throw std::invalid_argument("emit_mul: operand bound must be positive");
  double M = operand_bound;
  int q = b.identity({{y, 1.0 / (2.0 * M)}}, 0.5);
  int xc = emit_clamp01(b, x);
  int qc = emit_clamp01(b, q);
  int u = b.identity({{xc, 0.5}, {qc, 0.5}});
  int fu = emit_square_approx(b, u, levels);
  int fx = emit_square_approx(b, xc, levels);
  int fq = emit_square_approx(b, qc, levels);
  // xc*qc = 2 f(u) - f(xc)/2 - f(qc)/2 up to interpolation error
  int xq = b.identity({{fu, 2.0}, {fx, -0.5}, {fq, -0.5}});
  // x*y = 2M * (x*q) - M*x
  return b.identity({{xq, 2.0 * M}, {xc, -M}});
}

SpinvOut emit_softplus_inv(NnBuilder& b, int x, const HeadParams& p) {
  SpinvOut r;
  int over = b.relu({{x, 1.0}}, -p.x_cap);
  r.xc = b.identity({{x, 1.0}, {over, -1.0}});
  int lo = b.constant(p.y_star_min);
  int hi = b.constant(p.y_star_max);
  for (int i = 0; i < p.t_steps; ++i) {
    int mid = b.identity({{lo, 0.5}, {hi, 0.5}});
    int sp = b.softplus({{mid, 1.0}});
    int v = b.identity({{sp, 1.0}, {r.xc, -1.0}});
    int c = emit_heaviside(b, v, p.delta);  // 1 iff target is below mid
    int dhi = b.identity({{mid, 1.0}, {hi, -1.0}});
    int dlo = b.identity({{lo, 1.0}, {mid, -1.0}});
    int mhi = emit_mul(b, c, dhi, p.m_bisect, p.s_bisect);
    int mlo = emit_mul(b, c, dlo, p.m_bisect, p.s_bisect);
    hi = b.identity({{hi, 1.0}, {mhi, 1.0}});
    lo = b.identity({{mid, 1.0}, {mlo, 1.0}});
  }
  int mid = b.identity({{lo, 0.5}, {hi, 0.5}});
  // above x_large the inverse is x itself within eps_spinv; blend over
  int vb = b.identity({{r.xc, 1.0}}, -p.x_large);
  int hb = emit_heaviside(b, vb, p.delta);
  int db = b.identity({{r.xc, 1.0}, {mid, -1.0}});
  int mb = emit_mul(b, hb, db, p.m_blend, p.s_blend);
  r.out = b.identity({{mid, 1.0}, {mb, 1.0}});
  return r;
}

namespace {

struct TangentLines {
  std::vector<double> slope, intercept;
};

// tangents to t(x) = arctan(e^x) at anchors on [x_min_t, 0]; t is convex
// there, so each tangent under-estimates and the max is exact at anchors
TangentLines arctan_exp_lines(const HeadParams& p) {
  TangentLines tl;
  int n = p.segments;
  for (int j = 0; j <= n; ++j) {
    double xj = p.x_min_arctan * (1.0 - (double)j / n);
    if (j == n) xj = 0.0;
    double t = std::atan(std::exp(xj));
    double s = 1.0 / (std::exp(xj) + std::exp(-xj));
    tl.slope.push_back(s);
    tl.intercept.push_back(t - s * xj);
  }
  return tl;
}

int emit_max_tree(NnBuilder& b, const std::vector<int>& ids, int lo, int hi) {
  if (hi - lo == 1) return ids[lo];
  int mid = lo + (hi - lo + 1) / 2;
  int a = emit_max_tree(b, ids, lo, mid);
  int c = emit_max_tree(b, ids, mid, hi);
  int t = b.relu({{a, 1.0}, {c, -1.0}});
  return b.identity({{c, 1.0}, {t, 1.0}});  // max(a,c) = c + relu(a-c)
}

// max(t_pl(min(sgn*x, 0)), 0) where t_pl is the tangent-line envelope;
// exactly pi/4 at 0 since the top anchor sits there. Caller combines two
// mirrored copies through the reflection identity.
int emit_half_arctan(NnBuilder& b, int x, double sgn, const TangentLines& tl) {
  int rn = b.relu({{x, -sgn}});  // = -min(sgn*x, 0)
  std::vector<int> lines;
  for (size_t j = 0; j < tl.slope.size(); ++j)
    lines.push_back(
        b.identity({{rn, -tl.slope[j]}}, tl.intercept[j]));
  int mx = emit_max_tree(b, lines, 0, (int)lines.size());
  return b.relu({{mx, 1.0}});
}

}  // namespace

int emit_arctan_exp(NnBuilder& b, int x, const HeadParams& p) {
  TangentLines tl = arctan_exp_lines(p);
  int a = emit_half_arctan(b, x, 1.0, tl);   // t_pl(min(x,0))
  int c = emit_half_arctan(b, x, -1.0, tl);  // t_pl(min(-x,0))
  // t(x) = t_pl(min(x,0)) - t_pl(min(-x,0)) + pi/4 via t(x)+t(-x) = pi/2
  return b.identity({{a, 1.0}, {c, -1.0}}, kPi / 4.0);
}

namespace {

struct LogAbsOut {
  int ln = -1;
};

// ln|p - n| from ln p and ln n assuming the gap is >= f_min:
// with o_max/o_min the ordered pair, ln|p-n| = o_max + ln(1 - e^-(o_max-o_min))
// = o_max + (softplus^-1(x) - x) at x = o_max - o_min. Anchoring at o_max
// keeps the correction bounded even when o_min is a deep artificial zero.
LogAbsOut emit_log_abs(NnBuilder& b, int lp, int ln, const HeadParams& p) {
  int t = b.relu({{lp, 1.0}, {ln, -1.0}});
  int omax = b.identity({{ln, 1.0}, {t, 1.0}});
  int x = b.identity({{lp, -1.0}, {ln, 1.0}, {t, 2.0}});  // omax - omin
  SpinvOut s = emit_softplus_inv(b, x, p);
  LogAbsOut r;
  r.ln = b.identity({{omax, 1.0}, {s.out, 1.0}, {s.xc, -1.0}});
  return r;
}

}  // namespace

HeadOut build_heads(NnBuilder& b, const std::array<int, 4>& part_logs,
                    const HeadParams& p) {
  int lrp = part_logs[0], lrn = part_logs[1];
  int lip = part_logs[2], lin = part_logs[3];
  HeadOut out;

  out.ln_re = emit_log_abs(b, lrp, lrn, p).ln;
  out.ln_im = emit_log_abs(b, lip, lin, p).ln;
  // g1 = ln_re + softplus(2 ln_im - 2 ln_re)/2 = ln sqrt(re^2 + im^2)
  int sp2 = b.softplus({{out.ln_im, 2.0}, {out.ln_re, -2.0}});
  out.g1 = b.identity({{out.ln_re, 1.0}, {sp2, 0.5}});

  // signs: +1 / 0 / -1 via paired comparators (0 when the parts tie)
  int ure = b.identity({{lrp, 1.0}, {lrn, -1.0}});
  int uren = b.identity({{lrp, -1.0}, {lrn, 1.0}});
  int sre = b.identity(
      {{emit_heaviside(b, ure, p.delta), 1.0},
       {emit_heaviside(b, uren, p.delta), -1.0}});
  int uim = b.identity({{lip, 1.0}, {lin, -1.0}});
  int uimn = b.identity({{lip, -1.0}, {lin, 1.0}});
  int sim = b.identity(
      {{emit_heaviside(b, uim, p.delta), 1.0},
       {emit_heaviside(b, uimn, p.delta), -1.0}});

  // s_ri = |s_re + s_im| - 1: +1 same sign, -1 opposite, 0 when either is 0
  int ra = b.relu({{sre, 1.0}, {sim, 1.0}});
  int rb = b.relu({{sre, -1.0}, {sim, -1.0}});
  int sri = b.identity({{ra, 1.0}, {rb, 1.0}}, -1.0);

  int dlt = b.identity({{out.ln_im, 1.0}, {out.ln_re, -1.0}});
  int tval = emit_arctan_exp(b, dlt, p);

  // g2 = s_ri * t + (1 - s_re)/2 * s_im * pi, built from [0,1]x[-M,M] muls
  int xs = b.identity({{sri, 0.5}}, 0.5);
  int hneg = b.identity({{sre, -0.5}}, 0.5);
  int m1 = emit_mul(b, xs, tval, 2.0, p.s_sign);
  int m2 = emit_mul(b, hneg, sim, 2.0, p.s_sign);
  out.g2 = b.identity({{m1, 2.0}, {tval, -1.0}, {m2, kPi}});
  return out;
}

NeuralNet heaviside_net(double delta) {
  NeuralNet nn;
  NnBuilder b(nn);
  int x = b.raw_input("x");
  nn.roots = {emit_heaviside(b, x, delta)};
  return nn;
}

NeuralNet mul_net(double operand_bound, double eps) {
  NeuralNet nn;
  NnBuilder b(nn);
  int x = b.raw_input("x");
  int y = b.raw_input("y");
  nn.roots = {emit_mul(b, x, y, operand_bound,
                       sawtooth_levels(operand_bound, eps))};
  return nn;
}

NeuralNet softplus_inv_net(const HeadParams& p) {
  NeuralNet nn;
  NnBuilder b(nn);
  int x = b.raw_input("x");
  nn.roots = {emit_softplus_inv(b, x, p).out};
  return nn;
}

NeuralNet arctan_exp_net(const HeadParams& p) {
  NeuralNet nn;
  NnBuilder b(nn);
  int x = b.raw_input("x");
  nn.roots = {emit_arctan_exp(b, x, p)};
  return nn;
}

NeuralNet heads_net(const HeadParams& p) {
  NeuralNet nn;
  NnBuilder b(nn);
  std::array<int, 4> ins = {b.raw_input("ln_re_pos"), b.raw_input("ln_re_neg"),
                            b.raw_input("ln_im_pos"), b.raw_input("ln_im_neg")};
  HeadOut h = build_heads(b, ins, p);
  nn.roots = {h.g1, h.g2};
  return nn;
}

// ---- semantic twins ----

double sem_heaviside(double v, double delta) {
  double vc = std::min(1.0, std::max(-1.0, v));
  double th = 8.0 * delta;
  double w = std::min(th, std::max(-th, vc));
  double r1 = std::max(0.0, w / (2.0 * delta) + 0.5);
  double r2 = std::max(0.0, w / (2.0 * delta) - 0.5);
  return r1 - r2;
}

namespace {
double sem_square_approx(double t, int levels) {
  double acc = t;
  double h = t;
  double scale = 1.0;
  for (int s = 1; s <= levels; ++s) {
    h = 2.0 * h - 4.0 * std::max(0.0, h - 0.5);
    scale *= 0.25;
    acc -= scale * h;
  }
  return acc;
}
double sem_clamp01(double v) { return v + std::max(0.0, -v) - std::max(0.0, v - 1.0); }
}  // namespace

double sem_mul(double x, double y, double operand_bound, int levels) {
  double M = operand_bound;
  double q = y / (2.0 * M) + 0.5;
  double xc = sem_clamp01(x), qc = sem_clamp01(q);
  double u = 0.5 * (xc + qc);
  double xq = 2.0 * sem_square_approx(u, levels) -
              0.5 * sem_square_approx(xc, levels) -
              0.5 * sem_square_approx(qc, levels);
  return 2.0 * M * xq - M * xc;
}

double sem_softplus_inv(double x, const HeadParams& p) {
  double xc = x - std::max(0.0, x - p.x_cap);
  double lo = p.y_star_min, hi = p.y_star_max;
  for (int i = 0; i < p.t_steps; ++i) {
    double mid = 0.5 * (lo + hi);
    double c = sem_heaviside(stable_softplus(mid) - xc, p.delta);
    double nhi = hi + sem_mul(c, mid - hi, p.m_bisect, p.s_bisect);
    double nlo = mid + sem_mul(c, lo - mid, p.m_bisect, p.s_bisect);
    hi = nhi;
    lo = nlo;
  }
  double mid = 0.5 * (lo + hi);
  double hb = sem_heaviside(xc - p.x_large, p.delta);
  return mid + sem_mul(hb, xc - mid, p.m_blend, p.s_blend);
}

double sem_arctan_exp(double x, const HeadParams& p) {
  TangentLines tl = arctan_exp_lines(p);
  auto half = [&](double v) {
    double u = std::min(v, 0.0);
    double mx = -std::numeric_limits<double>::infinity();
    for (size_t j = 0; j < tl.slope.size(); ++j)
      mx = std::max(mx, tl.slope[j] * u + tl.intercept[j]);
    return std::max(0.0, mx);
  };
  return half(x) - half(-x) + kPi / 4.0;
}

std::pair<double, double> sem_heads(const std::array<double, 4>& part_logs,
                                    const HeadParams& p) {
  auto log_abs = [&](double lp, double ln) {
    double t = std::max(0.0, lp - ln);
    double omax = ln + t;
    double x = 2.0 * t - lp + ln;
    double xc = x - std::max(0.0, x - p.x_cap);
    return omax + sem_softplus_inv(x, p) - xc;
  };
  double ln_re = log_abs(part_logs[0], part_logs[1]);
  double ln_im = log_abs(part_logs[2], part_logs[3]);
  double g1 = ln_re + 0.5 * stable_softplus(2.0 * ln_im - 2.0 * ln_re);

  auto sign3 = [&](double up, double un) {
    return sem_heaviside(up - un, p.delta) - sem_heaviside(un - up, p.delta);
  };
  double sre = sign3(part_logs[0], part_logs[1]);
  double sim = sign3(part_logs[2], part_logs[3]);
  double sri =
      std::max(0.0, sre + sim) + std::max(0.0, -sre - sim) - 1.0;
  double tval = sem_arctan_exp(ln_im - ln_re, p);
  double xs = 0.5 * sri + 0.5, hneg = 0.5 - 0.5 * sre;
  double m1 = sem_mul(xs, tval, 2.0, p.s_sign);
  double m2 = sem_mul(hneg, sim, 2.0, p.s_sign);
  double g2 = 2.0 * m1 - tval + kPi * m2;
  return {g1, g2};
}

}  // namespace mps2nn
