#include "linkopt/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace linkopt {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double inf_diff(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s = std::max(s, std::abs(a[i] - b[i]));
  return s;
}

}  // namespace

PowerResult power_iterate(const LinearOperator& M, const NormalizationSpec& N, double tol,
                          long max_iter) {
  const int n = M.dim();
  PowerResult r;
  r.u.assign(n, 1.0);
  const double n0 = N.value(r.u);
  if (n0 <= 0.0) throw std::invalid_argument("normalization not positive at e");
  for (double& x : r.u) x /= n0;
  r.v.assign(n, 1.0);
  const double vu = dot(r.v, r.u);
  for (double& x : r.v) x /= vu;

  std::vector<double> mu(n), vm(n);
  for (long it = 0; it < max_iter; ++it) {
    M.apply(r.u, mu);
    const double rho = N.value(mu);
    if (rho <= 0.0) throw std::runtime_error("power iteration hit the zero vector (zero matrix?)");
    double resid = 0.0;
    for (int i = 0; i < n; ++i) resid = std::max(resid, std::abs(mu[i] - rho * r.u[i]));
    r.rho = rho;
    r.residual = resid / rho;
    r.iterations = it;
    if (resid <= tol * rho) {
      r.converged = true;
      return r;
    }
    for (int i = 0; i < n; ++i) r.u[i] = mu[i] / rho;
    M.apply_transpose(r.v, vm);
    const double scale = dot(vm, r.u);
    if (std::abs(scale) < 1e-300) throw std::runtime_error("degenerate left vector (v^T M u = 0)");
    for (int i = 0; i < n; ++i) r.v[i] = vm[i] / scale;
  }
  r.converged = false;
  return r;
}

PerronState initial_state(int dim, const NormalizationSpec& N) {
  PerronState s;
  s.u.assign(dim, 1.0);
  const double n0 = N.value(s.u);
  if (n0 <= 0.0) throw std::invalid_argument("normalization not positive at e");
  for (double& x : s.u) x /= n0;
  s.v.assign(dim, 1.0);
  const double vu = dot(s.v, s.u);
  for (double& x : s.v) x /= vu;
  s.w_tilde.assign(dim, 0.0);
  s.rho = 0.0;
  s.l = 0;
  return s;
}

PerronState power_derivative_step(const LinearOperator& M, const ObjectiveSpec& f,
                                  const NormalizationSpec& N, PerronState s) {
  const int n = M.dim();
  std::vector<double> grad_f(n), grad_n(n);
  f.gradient(s.u, grad_f);
  N.gradient(s.u, grad_n);
  const double fu = dot(grad_f, s.u);

  // u+ = Mu / N(Mu)
  std::vector<double> mu(n);
  M.apply(s.u, mu);
  const double rho = N.value(mu);
  if (rho <= 0.0) throw std::runtime_error("power iteration hit the zero vector (zero matrix?)");
  std::vector<double> u_next(n);
  for (int i = 0; i < n; ++i) u_next[i] = mu[i] / rho;

  // v+^T = v^T M / (v^T M u+)
  std::vector<double> vm(n);
  M.apply_transpose(s.v, vm);
  const double scale = dot(vm, u_next);
  if (std::abs(scale) < 1e-300) throw std::runtime_error("degenerate left vector (v^T M u = 0)");
  std::vector<double> v_next(n);
  for (int i = 0; i < n; ++i) v_next[i] = vm[i] / scale;

  // w+^T = (1/rho)(grad f^T - fu grad N^T + w^T M)(I - u+ v+^T)
  std::vector<double> wm(n);
  M.apply_transpose(s.w_tilde, wm);
  std::vector<double> raw(n);
  for (int i = 0; i < n; ++i) raw[i] = (grad_f[i] - fu * grad_n[i] + wm[i]) / rho;
  const double ru = dot(raw, u_next);
  std::vector<double> w_next(n);
  for (int i = 0; i < n; ++i) w_next[i] = raw[i] - ru * v_next[i];

  PerronState out;
  out.u = std::move(u_next);
  out.v = std::move(v_next);
  out.w_tilde = std::move(w_next);
  out.rho = rho;
  out.l = s.l + 1;
  return out;
}

LevelResult iterate_to_level(const LinearOperator& M, const ObjectiveSpec& f,
                             const NormalizationSpec& N, PerronState s0, double delta, long cap) {
  if (delta <= 0.0) throw std::invalid_argument("delta must be positive");
  LevelResult r;
  PerronState cur = std::move(s0);
  for (long k = 0; k < cap; ++k) {
    PerronState next = power_derivative_step(M, f, N, cur);
    const double d = std::max({inf_diff(next.u, cur.u), inf_diff(next.v, cur.v),
                               inf_diff(next.w_tilde, cur.w_tilde)});
    cur = std::move(next);
    r.steps = k + 1;
    r.last_diff = d;
    if (d <= delta) {
      r.converged = true;
      break;
    }
  }
  r.state = std::move(cur);
  return r;
}

LowRankGradient root_gradient(std::span<const double> u, std::span<const double> v) {
  LowRankGradient g;
  g.terms.push_back({1.0, {v.begin(), v.end()}, {u.begin(), u.end()}});
  return g;
}

ChainRule identity_chain() {
  return [](const std::vector<double>& w, const std::vector<double>& u) {
    LowRankGradient g;
    g.terms.push_back({1.0, w, u});
    return g;
  };
}

ObjectiveGradient assemble_J_g(const PerronState& s, const ObjectiveSpec& f,
                               const ChainRule& chain) {
  ObjectiveGradient out;
  out.J = f.value(s.u);
  out.g = chain(s.w_tilde, s.u);
  return out;
}

PerronAdapter::PerronAdapter(LinkGraph g, ObjectiveSpec objective, NormalizationSpec norm,
                             bool maximize)
    : graph_(std::move(g)), objective_(std::move(objective)), norm_(std::move(norm)),
      maximize_(maximize) {
  graph_.validate();
}

Evaluation PerronAdapter::evaluate(std::span<const double> x, double delta) {
  WeightVector wv;
  wv.x.assign(x.begin(), x.end());
  last_a_ = assemble(graph_, wv);
  ++assemblies_;

  CsrOperator op(last_a_);
  if (!hot_valid_) {
    hot_ = initial_state(graph_.n, norm_);
    hot_valid_ = true;
  }
  const long cap = inner_cap > 0 ? inner_cap : 10L * graph_.n + 1000;
  LevelResult lr = iterate_to_level(op, objective_, norm_, std::move(hot_), delta, cap);
  hot_ = std::move(lr.state);
  inner_total_ += lr.steps;
  if (!lr.converged)
    throw InnerNonConvergence("inner power/derivative iteration did not reach level precision");

  ObjectiveGradient jg = assemble_J_g(hot_, objective_, identity_chain());
  Evaluation ev;
  ev.inner_steps = lr.steps;
  ev.inner_converged = lr.converged;
  const double sign = maximize_ ? -1.0 : 1.0;
  ev.J = sign * jg.J;
  ev.grad = jg.g.extract(graph_.facultative);
  if (maximize_)
    for (double& v : ev.grad) v = -v;
  return ev;
}

double PerronAdapter::objective_value(const WeightVector& x, double delta) {
  Evaluation ev = evaluate(x.x, delta);
  return maximize_ ? -ev.J : ev.J;
}

}  // namespace linkopt
