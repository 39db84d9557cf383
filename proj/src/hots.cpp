#include "linkopt/hots.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace linkopt {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double lse2(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

double lse_span(std::span<const double> v) {
  double m = kNegInf;
  for (double x : v) m = std::max(m, x);
  if (m == kNegInf) return kNegInf;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

/// Log-domain aggregates of the weighted graph at p; every later formula is
/// assembled from these, so exponents are always max-subtracted.
struct Aggregates {
  double ls_plus = 0.0;   // log sum_i e^{p_i}
  double ls_minus = 0.0;  // log sum_j e^{-p_j}
  double ls_arcs = 0.0;   // log sum_ij A_ij e^{p_i - p_j}
  std::vector<double> log_in;   // log sum_i A_il e^{p_i}
  std::vector<double> log_out;  // log sum_j A_lj e^{-p_j}
};

Aggregates aggregates(const SparseMatrix& a, std::span<const double> p) {
  const int n = a.n();
  Aggregates ag;
  {
    std::vector<double> tmp(p.begin(), p.end());
    ag.ls_plus = lse_span(tmp);
    for (double& x : tmp) x = -x;
    ag.ls_minus = lse_span(tmp);
  }
  ag.log_in.assign(n, kNegInf);
  ag.log_out.assign(n, kNegInf);

  // two-pass log-sum-exp per node and over all arcs
  std::vector<double> max_in(n, kNegInf), max_out(n, kNegInf);
  double max_arc = kNegInf;
  auto each_arc = [&](auto&& fn) {
    for (int i = 0; i < n; ++i)
      for (std::size_t k = a.row_ptr()[i]; k < a.row_ptr()[i + 1]; ++k) {
        const double val = a.values()[k];
        if (val <= 0.0) continue;
        fn(i, a.col_idx()[k], std::log(val));
      }
  };
  each_arc([&](int i, int j, double lv) {
    max_in[j] = std::max(max_in[j], lv + p[i]);
    max_out[i] = std::max(max_out[i], lv - p[j]);
    max_arc = std::max(max_arc, lv + p[i] - p[j]);
  });
  if (max_arc == kNegInf) throw std::invalid_argument("graph has no arc with positive weight");
  std::vector<double> sum_in(n, 0.0), sum_out(n, 0.0);
  double sum_arc = 0.0;
  each_arc([&](int i, int j, double lv) {
    sum_in[j] += std::exp(lv + p[i] - max_in[j]);
    sum_out[i] += std::exp(lv - p[j] - max_out[i]);
    sum_arc += std::exp(lv + p[i] - p[j] - max_arc);
  });
  for (int l = 0; l < n; ++l) {
    ag.log_in[l] = max_in[l] == kNegInf ? kNegInf : max_in[l] + std::log(sum_in[l]);
    ag.log_out[l] = max_out[l] == kNegInf ? kNegInf : max_out[l] + std::log(sum_out[l]);
  }
  ag.ls_arcs = max_arc + std::log(sum_arc);
  return ag;
}

std::vector<double> grad_from(const Aggregates& ag, std::span<const double> p, double alpha) {
  const int n = static_cast<int>(p.size());
  std::vector<double> g(n);
  for (int l = 0; l < n; ++l) {
    double v = -(1.0 - alpha) * std::exp(-p[l] - ag.ls_minus) +
               (1.0 - alpha) * std::exp(p[l] - ag.ls_plus);
    if (ag.log_in[l] != kNegInf) v -= (2.0 * alpha - 1.0) * std::exp(ag.log_in[l] - p[l] - ag.ls_arcs);
    if (ag.log_out[l] != kNegInf) v += (2.0 * alpha - 1.0) * std::exp(ag.log_out[l] + p[l] - ag.ls_arcs);
    g[l] = v;
  }
  return g;
}

std::vector<double> u_from(const Aggregates& ag, std::span<const double> p, double alpha) {
  const int n = static_cast<int>(p.size());
  const double log_c = std::log(1.0 - alpha) - std::log(2.0 * alpha - 1.0);
  std::vector<double> u(n);
  for (int l = 0; l < n; ++l) {
    const double t1 = lse2(ag.log_in[l] + ag.ls_minus, log_c + ag.ls_arcs);
    const double t2 = lse2(ag.log_out[l] + ag.ls_plus, log_c + ag.ls_arcs);
    u[l] = 0.5 * (t1 - ag.ls_minus - t2 + ag.ls_plus);
  }
  return u;
}

void renormalize(std::vector<double>& p, HotsNorm norm, std::span<const int> targets) {
  const double shift = hots_norm_value(norm, p, targets);
  for (double& x : p) x -= shift;
}

}  // namespace

void HotsConfig::check() const {
  if (!(alpha > 0.5 && alpha < 1.0))
    throw std::invalid_argument("alpha must lie strictly inside (1/2, 1)");
  if (fp_tol <= 0.0) throw std::invalid_argument("fixed-point tolerance must be positive");
  if (norm == HotsNorm::LseTargetZero && targets.empty())
    throw std::invalid_argument("target-restricted normalization needs a nonempty target set");
}

double hots_norm_value(HotsNorm norm, std::span<const double> p, std::span<const int> targets) {
  switch (norm) {
    case HotsNorm::MeanZero: {
      double s = 0.0;
      for (double v : p) s += v;
      return s / static_cast<double>(p.size());
    }
    case HotsNorm::LseZero: {
      std::vector<double> tmp(p.begin(), p.end());
      return lse_span(tmp);
    }
    case HotsNorm::LseTargetZero: {
      std::vector<double> tmp;
      tmp.reserve(targets.size());
      for (int t : targets) tmp.push_back(p[t]);
      return lse_span(tmp);
    }
  }
  return 0.0;
}

std::vector<double> hots_norm_gradient(HotsNorm norm, std::span<const double> p,
                                       std::span<const int> targets) {
  std::vector<double> g(p.size(), 0.0);
  switch (norm) {
    case HotsNorm::MeanZero:
      std::fill(g.begin(), g.end(), 1.0 / static_cast<double>(p.size()));
      break;
    case HotsNorm::LseZero: {
      std::vector<double> tmp(p.begin(), p.end());
      const double ls = lse_span(tmp);
      for (std::size_t i = 0; i < p.size(); ++i) g[i] = std::exp(p[i] - ls);
      break;
    }
    case HotsNorm::LseTargetZero: {
      std::vector<double> tmp;
      for (int t : targets) tmp.push_back(p[t]);
      const double ls = lse_span(tmp);
      for (int t : targets) g[t] = std::exp(p[t] - ls);
      break;
    }
  }
  return g;
}

double theta(const SparseMatrix& a, std::span<const double> p, const HotsConfig& cfg) {
  cfg.check();
  const double al = cfg.alpha;
  const Aggregates ag = aggregates(a, p);
  const double c_alpha =
      1.0 - 2.0 * (1.0 - al) * std::log(1.0 - al) - (2.0 * al - 1.0) * std::log(2.0 * al - 1.0);
  return c_alpha + (1.0 - al) * (ag.ls_plus + ag.ls_minus) + (2.0 * al - 1.0) * ag.ls_arcs;
}

std::vector<double> theta_grad(const SparseMatrix& a, std::span<const double> p,
                               const HotsConfig& cfg) {
  cfg.check();
  return grad_from(aggregates(a, p), p, cfg.alpha);
}

std::vector<double> d_vector(const SparseMatrix& a, std::span<const double> p,
                             const HotsConfig& cfg) {
  cfg.check();
  const Aggregates ag = aggregates(a, p);
  const double al = cfg.alpha;
  std::vector<double> d(p.size());
  for (std::size_t l = 0; l < p.size(); ++l) {
    const double log_num = p[l] + ag.ls_minus + ag.ls_arcs;
    const double log_den = lse2(std::log(2.0 * al - 1.0) + ag.log_in[l] + ag.ls_minus,
                                std::log(1.0 - al) + ag.ls_arcs);
    d[l] = std::exp(log_num - log_den);
  }
  return d;
}

std::vector<double> hots_u_explicit(const SparseMatrix& a, std::span<const double> p,
                                    const HotsConfig& cfg) {
  cfg.check();
  return u_from(aggregates(a, p), p, cfg.alpha);
}

std::vector<double> hots_fixed_point_step(const SparseMatrix& a, std::span<const double> p,
                                          const HotsConfig& cfg) {
  std::vector<double> next = hots_u_explicit(a, p, cfg);
  renormalize(next, cfg.norm, cfg.targets);
  return next;
}

HotsState hots_solve(const SparseMatrix& a, std::vector<double> p0, const HotsConfig& cfg) {
  cfg.check();
  HotsState st;
  st.p = std::move(p0);
  if (st.p.empty()) st.p.assign(a.n(), 0.0);
  if (st.p.size() != static_cast<std::size_t>(a.n()))
    throw std::invalid_argument("initial vector size mismatch");
  renormalize(st.p, cfg.norm, cfg.targets);

  for (long it = 0;; ++it) {
    const Aggregates ag = aggregates(a, st.p);
    const std::vector<double> g = grad_from(ag, st.p, cfg.alpha);
    double res = 0.0;
    for (double v : g) res = std::max(res, std::abs(v));
    st.residual = res;
    st.iterations = it;
    st.log_sum_exp_p = ag.ls_plus;
    st.log_sum_exp_neg_p = ag.ls_minus;
    st.log_arc_sum = ag.ls_arcs;
    if (res <= cfg.fp_tol) {
      st.converged = true;
      return st;
    }
    if (it >= cfg.fp_cap) return st;  // non-convergence report
    std::vector<double> next = u_from(ag, st.p, cfg.alpha);
    renormalize(next, cfg.norm, cfg.targets);
    st.p = std::move(next);
  }
}

std::vector<double> hessian_matvec(const SparseMatrix& a, std::span<const double> p,
                                   const HotsConfig& cfg, std::span<const double> y) {
  cfg.check();
  const int n = a.n();
  const double al = cfg.alpha;
  const Aggregates ag = aggregates(a, p);

  std::vector<double> out(n, 0.0);
  // log-sum-exp Hessians of phi(p) and phi(-p)
  double dot_p = 0.0, dot_m = 0.0;
  std::vector<double> pi_p(n), pi_m(n);
  for (int i = 0; i < n; ++i) {
    pi_p[i] = std::exp(p[i] - ag.ls_plus);
    pi_m[i] = std::exp(-p[i] - ag.ls_minus);
    dot_p += pi_p[i] * y[i];
    dot_m += pi_m[i] * y[i];
  }
  for (int i = 0; i < n; ++i)
    out[i] = (1.0 - al) * (pi_p[i] * y[i] - pi_p[i] * dot_p) +
             (1.0 - al) * (pi_m[i] * y[i] - pi_m[i] * dot_m);

  // arc term Z^T H_lse(Zp) Z y with arc distribution pi_e = A_ij e^{p_i-p_j}/S_A
  double dot_arc = 0.0;
  for (int i = 0; i < n; ++i)
    for (std::size_t k = a.row_ptr()[i]; k < a.row_ptr()[i + 1]; ++k) {
      const double val = a.values()[k];
      if (val <= 0.0) continue;
      const int j = a.col_idx()[k];
      const double pi_e = std::exp(std::log(val) + p[i] - p[j] - ag.ls_arcs);
      dot_arc += pi_e * (y[i] - y[j]);
    }
  for (int i = 0; i < n; ++i)
    for (std::size_t k = a.row_ptr()[i]; k < a.row_ptr()[i + 1]; ++k) {
      const double val = a.values()[k];
      if (val <= 0.0) continue;
      const int j = a.col_idx()[k];
      const double pi_e = std::exp(std::log(val) + p[i] - p[j] - ag.ls_arcs);
      const double c_e = (2.0 * al - 1.0) * pi_e * ((y[i] - y[j]) - dot_arc);
      out[i] += c_e;
      out[j] -= c_e;
    }
  return out;
}

namespace {

struct SchemeResult {
  std::vector<double> w;
  long steps = 0;
  bool converged = false;
};

/// Deflated affine fixed point w <- (-z + w M)(I - P) for M = I - (1/2) K,
/// where Kw is supplied by a callback and P projects out the known
/// eigen-direction of eigenvalue 1.
template <typename KFn, typename DeflateFn>
SchemeResult run_scheme(int n, std::span<const double> z, KFn&& k_apply, DeflateFn&& deflate,
                        std::vector<double> w0, double tol, long cap) {
  SchemeResult r;
  r.w = std::move(w0);
  if (r.w.empty()) r.w.assign(n, 0.0);
  deflate(r.w);
  std::vector<double> next(n);
  double z_scale = 1.0;
  for (double v : z) z_scale = std::max(z_scale, std::abs(v));
  for (long it = 1; it <= cap; ++it) {
    const std::vector<double> kw = k_apply(r.w);
    for (int i = 0; i < n; ++i) next[i] = -z[i] + r.w[i] - 0.5 * kw[i];
    deflate(next);
    double diff = 0.0, norm = 0.0;
    for (int i = 0; i < n; ++i) {
      diff = std::max(diff, std::abs(next[i] - r.w[i]));
      norm = std::max(norm, std::abs(next[i]));
    }
    r.w.swap(next);
    r.steps = it;
    if (diff <= tol) {
      r.converged = true;
      break;
    }
    if (!std::isfinite(norm) || norm > 1e14 * z_scale) break;  // divergence
  }
  return r;
}

}  // namespace

AuxResult hots_aux_w(const SparseMatrix& a, std::span<const double> p, const HotsConfig& cfg,
                     std::span<const double> grad_f, std::span<const double> grad_n, double tol,
                     std::span<const double> w0) {
  cfg.check();
  const int n = a.n();
  double fe = 0.0;
  for (double v : grad_f) fe += v;
  std::vector<double> z(n);  // z' = (1/2)(grad f - (grad f . e) grad N)
  for (int i = 0; i < n; ++i) z[i] = 0.5 * (grad_f[i] - fe * grad_n[i]);

  auto center = [n](std::vector<double>& v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= n;
    for (double& x : v) x -= mean;
  };

  AuxResult out;
  if (cfg.precondition) {
    const std::vector<double> d = d_vector(a, p, cfg);
    std::vector<double> q(n);  // left null vector of diag(d) d2theta
    double qe = 0.0;
    for (int i = 0; i < n; ++i) {
      q[i] = 1.0 / d[i];
      qe += q[i];
    }
    auto k_apply = [&](const std::vector<double>& w) {
      std::vector<double> dw(n);
      for (int i = 0; i < n; ++i) dw[i] = d[i] * w[i];
      return hessian_matvec(a, p, cfg, dw);
    };
    auto deflate = [&](std::vector<double>& v) {
      double s = 0.0;
      for (double x : v) s += x;
      const double c = s / qe;
      for (int i = 0; i < n; ++i) v[i] -= c * q[i];
    };
    std::vector<double> start;  // hot start maps back through the d-scaling
    if (w0.size() == static_cast<std::size_t>(n)) {
      start.resize(n);
      for (int i = 0; i < n; ++i) start[i] = w0[i] / d[i];
    }
    SchemeResult pre = run_scheme(n, z, k_apply, deflate, std::move(start), tol, cfg.w_cap);
    out.steps += pre.steps;
    if (pre.converged) {
      out.mode = AuxMode::Preconditioned;
      out.w.resize(n);
      for (int i = 0; i < n; ++i) out.w[i] = d[i] * pre.w[i];
      center(out.w);
      return out;
    }
    out.mode = AuxMode::PreconditionedFallback;  // conjectured spectrum did not hold here
  }

  auto k_apply = [&](const std::vector<double>& w) { return hessian_matvec(a, p, cfg, w); };
  std::vector<double> start(w0.begin(), w0.end());
  SchemeResult plain = run_scheme(n, z, k_apply, center, std::move(start), tol, cfg.w_cap);
  out.steps += plain.steps;
  if (!plain.converged)
    throw std::runtime_error(
        "auxiliary-vector scheme diverged in both modes: an eigenvalue of I - (1/2) d2theta "
        "appears to lie outside the unit disc");
  if (out.mode != AuxMode::PreconditionedFallback) out.mode = AuxMode::Plain;
  out.w = std::move(plain.w);
  center(out.w);
  return out;
}

double hots_threshold_b(const SparseMatrix& a, std::span<const double> p,
                        std::span<const double> w) {
  const Aggregates ag = aggregates(a, p);
  const int n = a.n();
  double b = 0.0;
  for (int i = 0; i < n; ++i)
    for (std::size_t k = a.row_ptr()[i]; k < a.row_ptr()[i + 1]; ++k) {
      const double val = a.values()[k];
      if (val <= 0.0) continue;
      const int j = a.col_idx()[k];
      const double pi_e = std::exp(std::log(val) + p[i] - p[j] - ag.ls_arcs);
      b += pi_e * (w[j] - w[i]);
    }
  return b;
}

LowRankGradient hots_gradient(const SparseMatrix& a, std::span<const double> p,
                              const HotsConfig& cfg, std::span<const double> w) {
  cfg.check();
  const Aggregates ag = aggregates(a, p);
  const int n = a.n();
  const double b = hots_threshold_b(a, p, w);
  const double kappa = (2.0 * cfg.alpha - 1.0) * std::exp(-ag.ls_arcs);

  std::vector<double> ep(n), em(n), wep(n), wem(n);
  for (int i = 0; i < n; ++i) {
    ep[i] = std::exp(p[i]);
    em[i] = std::exp(-p[i]);
    wep[i] = w[i] * ep[i];
    wem[i] = w[i] * em[i];
  }
  // g_ij = kappa e^{p_i - p_j} (w_i - w_j + B)
  LowRankGradient g;
  g.terms.push_back({kappa, wep, em});
  g.terms.push_back({-kappa, ep, wem});
  g.terms.push_back({kappa * b, std::move(ep), std::move(em)});
  return g;
}

HotsThresholdReport hots_threshold_report(const LinkGraph& g, const SparseMatrix& a,
                                          std::span<const double> p, const HotsConfig& cfg,
                                          std::span<const double> w, double tol) {
  HotsThresholdReport rep;
  const double b = hots_threshold_b(a, p, w);
  // Orientation: score s = -w makes "bigger s, better target"; an arc (i,j)
  // is activated exactly when s_j > s_i + B_s with B_s = -B.
  rep.score.assign(w.size(), 0.0);
  for (std::size_t i = 0; i < w.size(); ++i) rep.score[i] = -w[i];
  rep.b = -b;

  const LowRankGradient lr = hots_gradient(a, p, cfg, w);
  rep.arc_gradient = lr.extract(g.facultative);
  rep.arc_class.reserve(g.facultative.size());
  for (double grad : rep.arc_gradient) {
    if (grad > tol)
      rep.arc_class.push_back(ArcClass::Activate);
    else if (grad < -tol)
      rep.arc_class.push_back(ArcClass::Deactivate);
    else
      rep.arc_class.push_back(ArcClass::Indifferent);
  }
  return rep;
}

PrimalFlow primal_flow(const SparseMatrix& a, std::span<const double> p, const HotsConfig& cfg) {
  cfg.check();
  const int n = a.n();
  const double al = cfg.alpha;
  const Aggregates ag = aggregates(a, p);

  PrimalFlow f;
  f.mu = std::log(2.0 * al - 1.0) - ag.ls_arcs;
  f.a_last = std::log(1.0 - al) - ag.ls_minus - f.mu;
  f.b_last = -(std::log(1.0 - al) - ag.ls_plus - f.mu);

  f.rho_arcs.assign(a.nnz(), 0.0);
  f.rho_to_virtual.resize(n);
  f.rho_from_virtual.resize(n);
  std::vector<double> out_flow(n, 0.0), in_flow(n, 0.0);
  for (int i = 0; i < n; ++i)
    for (std::size_t k = a.row_ptr()[i]; k < a.row_ptr()[i + 1]; ++k) {
      const double val = a.values()[k];
      if (val <= 0.0) continue;
      const int j = a.col_idx()[k];
      const double rho = std::exp(std::log(val) + p[i] - p[j] + f.mu);
      f.rho_arcs[k] = rho;
      out_flow[i] += rho;
      in_flow[j] += rho;
    }
  double to_virtual = 0.0, from_virtual = 0.0, mass = 0.0;
  for (int i = 0; i < n; ++i) {
    f.rho_to_virtual[i] = std::exp(-f.b_last + p[i] + f.mu);
    f.rho_from_virtual[i] = std::exp(f.a_last - p[i] + f.mu);
    out_flow[i] += f.rho_to_virtual[i];
    in_flow[i] += f.rho_from_virtual[i];
    to_virtual += f.rho_to_virtual[i];
    from_virtual += f.rho_from_virtual[i];
    mass += out_flow[i];
  }
  mass += from_virtual;

  f.conservation_residual.resize(n);
  for (int i = 0; i < n; ++i) f.conservation_residual[i] = std::abs(out_flow[i] - in_flow[i]);
  f.virtual_conservation_residual = std::abs(from_virtual - to_virtual);
  f.mass_residual = std::abs(mass - 1.0);
  f.out_virtual_residual = std::abs(from_virtual - (1.0 - al));
  f.in_virtual_residual = std::abs(to_virtual - (1.0 - al));
  return f;
}

HotsAdapter::HotsAdapter(LinkGraph g, HotsConfig cfg, ObjectiveSpec objective, bool maximize)
    : graph_(std::move(g)), cfg_(std::move(cfg)), objective_(std::move(objective)),
      maximize_(maximize) {
  graph_.validate();
  cfg_.check();
}

Evaluation HotsAdapter::evaluate(std::span<const double> x, double delta) {
  WeightVector wv;
  wv.x.assign(x.begin(), x.end());
  last_a_ = assemble(graph_, wv);
  ++assemblies_;

  HotsConfig level_cfg = cfg_;
  level_cfg.fp_tol = delta;  // the level precision drives both inner tolerances
  if (!hot_valid_) {
    p_.assign(graph_.n, 0.0);
    w_.clear();
    hot_valid_ = true;
  }
  HotsState st = hots_solve(last_a_, std::move(p_), level_cfg);
  p_ = std::move(st.p);
  inner_total_ += st.iterations;
  if (!st.converged)
    throw InnerNonConvergence("temperature fixed point did not reach level precision");

  const std::vector<double> gf = objective_.grad(p_);
  const std::vector<double> gn = hots_norm_gradient(cfg_.norm, p_, cfg_.targets);
  AuxResult ar = hots_aux_w(last_a_, p_, level_cfg, gf, gn, delta, w_);
  w_ = std::move(ar.w);
  inner_total_ += ar.steps;

  const LowRankGradient lr = hots_gradient(last_a_, p_, cfg_, w_);
  Evaluation ev;
  ev.inner_steps = st.iterations + ar.steps;
  const double sign = maximize_ ? -1.0 : 1.0;
  ev.J = sign * objective_.value(p_);
  ev.grad = lr.extract(graph_.facultative);
  if (maximize_)
    for (double& v : ev.grad) v = -v;
  return ev;
}

double HotsAdapter::objective_value(const WeightVector& x, double delta) {
  Evaluation ev = evaluate(x.x, delta);
  return maximize_ ? -ev.J : ev.J;
}

}  // namespace linkopt
