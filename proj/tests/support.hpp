#pragma once

// Shared test helpers: deterministic instance generators and the
// finite-difference / dense oracles the test suites check against.
// Everything here is independent of the iterative code paths under test.

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <vector>

#include "linkopt/dense.hpp"
#include "linkopt/graph.hpp"
#include "linkopt/hots.hpp"
#include "linkopt/normalization.hpp"
#include "linkopt/objective.hpp"

namespace testsupport {

using linkopt::Arc;
using linkopt::LinkGraph;
using linkopt::SparseMatrix;
using linkopt::WeightVector;

using Rng = std::mt19937_64;

/// Strongly connected instance: a Hamiltonian ring of obligatory arcs plus
/// random extra obligatory arcs, plus n_fac facultative arcs out of a few
/// controlled pages.  The first targets.size() nodes form the target set.
inline LinkGraph random_instance(Rng& rng, int n, int extra_obligatory, int n_fac,
                                 int n_controlled = 3, int n_targets = 3) {
  LinkGraph g;
  g.n = n;
  std::uniform_int_distribution<int> node(0, n - 1);
  std::set<std::pair<int, int>> arcs;
  for (int i = 0; i < n; ++i) {
    arcs.insert({i, (i + 1) % n});
    g.obligatory.push_back({i, (i + 1) % n});
  }
  while (static_cast<int>(arcs.size()) < n + extra_obligatory) {
    int i = node(rng), j = node(rng);
    if (i == j || arcs.count({i, j})) continue;
    arcs.insert({i, j});
    g.obligatory.push_back({i, j});
  }
  std::uniform_int_distribution<int> ctrl(0, n_controlled - 1);
  while (static_cast<int>(g.facultative.size()) <
         std::min(n_fac, n_controlled * (n - 1) - static_cast<int>(arcs.size()))) {
    int i = ctrl(rng), j = node(rng);
    if (i == j || arcs.count({i, j})) continue;
    arcs.insert({i, j});
    g.facultative.push_back({i, j});
  }
  std::sort(g.facultative.begin(), g.facultative.end());
  for (int t = 0; t < n_targets; ++t) g.target_set.push_back(t);
  g.validate();
  return g;
}

/// Degree-heterogeneous instance by preferential attachment (web-graph-like):
/// every node after the seed clique links to m_out targets drawn with
/// probability proportional to in-degree; facultative arcs leave the first
/// n_controlled nodes, which also form the target set.
inline LinkGraph scale_free_instance(Rng& rng, int n, int m_out, int n_fac,
                                     int n_controlled = 10) {
  LinkGraph g;
  g.n = n;
  std::vector<int> pool;  // one entry per in-degree unit
  pool.reserve(static_cast<std::size_t>(n) * (m_out + 1));
  std::set<std::pair<int, int>> arcs;
  const int seed = std::min(4, n);
  for (int v = 0; v < seed; ++v)
    for (int u = 0; u < seed; ++u)
      if (u != v) {
        arcs.insert({v, u});
        g.obligatory.push_back({v, u});
        pool.push_back(u);
      }
  for (int v = seed; v < n; ++v) {
    for (int k = 0; k < m_out; ++k) {
      std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
      const int t = pool[pick(rng)];
      if (t == v || arcs.count({v, t})) continue;
      arcs.insert({v, t});
      g.obligatory.push_back({v, t});
      pool.push_back(t);
    }
    pool.push_back(v);
  }
  std::uniform_int_distribution<int> ctrl(0, n_controlled - 1), node(0, n - 1);
  while (static_cast<int>(g.facultative.size()) < n_fac) {
    const int i = ctrl(rng), j = node(rng);
    if (i == j || arcs.count({i, j})) continue;
    arcs.insert({i, j});
    g.facultative.push_back({i, j});
  }
  std::sort(g.facultative.begin(), g.facultative.end());
  for (int t = 0; t < n_controlled; ++t) g.target_set.push_back(t);
  g.validate();
  return g;
}

/// Benchmark instance shaped like the web-site optimization experiments: two
/// preferential-attachment communities joined by a few weak cross arcs (slow
/// mixing), a controlled site of early-joiner pages, and a facultative set
/// holding every internal site pair plus external arcs to random targets.
inline LinkGraph benchmark_instance(Rng& rng, int half, int m_out, int n_fac, int n_ctrl,
                                    int cross) {
  LinkGraph a = scale_free_instance(rng, half, m_out, 0, 1);
  LinkGraph b = scale_free_instance(rng, half, m_out, 0, 1);
  LinkGraph g;
  g.n = 2 * half;
  g.obligatory = a.obligatory;
  for (const Arc& arc : b.obligatory) g.obligatory.push_back({arc.src + half, arc.dst + half});
  std::set<std::pair<int, int>> arcs;
  for (const Arc& arc : g.obligatory) arcs.insert({arc.src, arc.dst});
  std::uniform_int_distribution<int> na(0, half - 1);
  for (int k = 0; k < cross; ++k) {
    int i = na(rng), j = na(rng) + half;
    if (arcs.insert({i, j}).second) g.obligatory.push_back({i, j});
    i = na(rng) + half;
    j = na(rng);
    if (arcs.insert({i, j}).second) g.obligatory.push_back({i, j});
  }
  std::vector<int> ctrl;
  for (int k = 0; k < n_ctrl; ++k) ctrl.push_back(4 + 7 * k);
  for (int i : ctrl)
    for (int j : ctrl)
      if (i != j && !arcs.count({i, j})) {
        arcs.insert({i, j});
        g.facultative.push_back({i, j});
      }
  std::uniform_int_distribution<std::size_t> pc(0, ctrl.size() - 1);
  std::uniform_int_distribution<int> node(0, g.n - 1);
  while (static_cast<int>(g.facultative.size()) < n_fac) {
    const int i = ctrl[pc(rng)], j = node(rng);
    if (i == j || arcs.count({i, j})) continue;
    arcs.insert({i, j});
    g.facultative.push_back({i, j});
  }
  std::sort(g.facultative.begin(), g.facultative.end());
  g.target_set = ctrl;
  std::sort(g.target_set.begin(), g.target_set.end());
  g.validate();
  return g;
}

inline double ascent_displacement_unit(std::span<const double> x, std::span<const double> grad) {
  double s = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double xn = std::min(1.0, std::max(0.0, x[k] + grad[k]));
    s = std::max(s, std::abs(x[k] - xn));
  }
  return s;
}

inline WeightVector random_weights(Rng& rng, std::size_t m, double lo = 0.1, double hi = 0.9) {
  std::uniform_real_distribution<double> uni(lo, hi);
  WeightVector x;
  x.x.resize(m);
  for (double& v : x.x) v = uni(rng);
  return x;
}

inline Eigen::MatrixXd random_positive_matrix(Rng& rng, int n, double lo = 0.2, double hi = 1.2) {
  std::uniform_real_distribution<double> uni(lo, hi);
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = uni(rng);
  return m;
}

/// Nonnegative matrix with spectrum {rho, lambda2, ..., lambda2}:
/// (rho - lambda2) u v^T + lambda2 I with positive u, v, v^T u = 1.
inline Eigen::MatrixXd known_spectrum_matrix(Rng& rng, int n, double rho, double lambda2) {
  std::uniform_real_distribution<double> uni(0.5, 1.5);
  Eigen::VectorXd u(n), v(n);
  for (int i = 0; i < n; ++i) {
    u[i] = uni(rng);
    v[i] = uni(rng);
  }
  v /= v.dot(u);
  return (rho - lambda2) * u * v.transpose() + lambda2 * Eigen::MatrixXd::Identity(n, n);
}

inline SparseMatrix dense_to_sparse(const Eigen::MatrixXd& m) {
  std::vector<int> rows, cols;
  std::vector<double> vals;
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j)
      if (m(i, j) != 0.0) {
        rows.push_back(i);
        cols.push_back(j);
        vals.push_back(m(i, j));
      }
  return SparseMatrix::from_triplets(static_cast<int>(m.rows()), rows, cols, vals);
}

inline Eigen::MatrixXd hits_dense(const Eigen::MatrixXd& a, double xi) {
  return a.transpose() * a + xi * Eigen::MatrixXd::Ones(a.rows(), a.cols());
}

/// Exact objective J(x) = f(u(h(A(x)))) through the dense eigendecomposition;
/// the oracle route shares nothing with the iterative scheme under test.
inline double hits_J_dense(const LinkGraph& g, std::span<const double> x, double xi,
                           const linkopt::ObjectiveSpec& f, const linkopt::NormalizationSpec& N) {
  WeightVector w;
  w.x.assign(x.begin(), x.end());
  // weights may poke outside the box during finite differencing
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(g.n, g.n);
  for (const Arc& arc : g.obligatory) a(arc.src, arc.dst) = 1.0;
  for (std::size_t k = 0; k < g.facultative.size(); ++k)
    a(g.facultative[k].src, g.facultative[k].dst) = w.x[k];
  linkopt::dense::DensePerron dp = linkopt::dense::dense_perron(hits_dense(a, xi), N);
  return f.value(dp.u);
}

/// Central finite differences of the dense objective, one-sided at the box
/// boundary.
inline std::vector<double> hits_grad_fd(const LinkGraph& g, std::span<const double> x, double xi,
                                        const linkopt::ObjectiveSpec& f,
                                        const linkopt::NormalizationSpec& N, double h = 1e-6) {
  std::vector<double> grad(x.size());
  std::vector<double> xp(x.begin(), x.end());
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double save = xp[k];
    const double hi = std::min(save + h, 1.0);
    const double lo = std::max(save - h, 0.0);
    xp[k] = hi;
    const double fp = hits_J_dense(g, xp, xi, f, N);
    xp[k] = lo;
    const double fm = hits_J_dense(g, xp, xi, f, N);
    xp[k] = save;
    grad[k] = (fp - fm) / (hi - lo);
  }
  return grad;
}

inline double max_rel_err(std::span<const double> got, std::span<const double> want) {
  double gmax = 0.0;
  for (double v : want) gmax = std::max(gmax, std::abs(v));
  double worst = 0.0;
  for (std::size_t i = 0; i < got.size(); ++i) {
    const double denom = std::max(std::abs(want[i]), 1e-7 * (1.0 + gmax));
    worst = std::max(worst, std::abs(got[i] - want[i]) / denom);
  }
  return worst;
}

inline double inf_diff(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s = std::max(s, std::abs(a[i] - b[i]));
  return s;
}

/// HOTS objective J(x) = f(p(A(x))) via the fixed-point solver followed by a
/// few dense Newton polish steps, pushing p to machine precision so central
/// differences of J stay meaningful down to tiny gradient coordinates.  The
/// gradient path under test goes through the auxiliary-vector machinery; this
/// oracle never touches it.
inline double hots_J_resolved(const LinkGraph& g, std::span<const double> x,
                              const linkopt::HotsConfig& cfg, const linkopt::ObjectiveSpec& f,
                              std::vector<double> p_hot = {}) {
  Eigen::MatrixXd ad = Eigen::MatrixXd::Zero(g.n, g.n);
  for (const Arc& arc : g.obligatory) ad(arc.src, arc.dst) = 1.0;
  for (std::size_t k = 0; k < g.facultative.size(); ++k)
    ad(g.facultative[k].src, g.facultative[k].dst) = x[k];
  SparseMatrix a = dense_to_sparse(ad);
  linkopt::HotsConfig solve_cfg = cfg;
  solve_cfg.fp_tol = 1e-11;
  linkopt::HotsState st = linkopt::hots_solve(a, std::move(p_hot), solve_cfg);

  const int n = g.n;
  std::vector<double> p = st.p;
  for (int polish = 0; polish < 4; ++polish) {
    const std::vector<double> grad = linkopt::theta_grad(a, p, solve_cfg);
    Eigen::MatrixXd h(n, n);
    std::vector<double> e(n, 0.0);
    for (int i = 0; i < n; ++i) {
      e[i] = 1.0;
      const std::vector<double> col = linkopt::hessian_matvec(a, p, solve_cfg, e);
      e[i] = 0.0;
      for (int r = 0; r < n; ++r) h(r, i) = col[r];
    }
    const Eigen::MatrixXd pn = Eigen::MatrixXd::Constant(n, n, 1.0 / n);
    Eigen::Map<const Eigen::VectorXd> gv(grad.data(), n);
    const Eigen::VectorXd step = (h + pn).ldlt().solve(gv);
    for (int i = 0; i < n; ++i) p[i] -= step[i];
    const double shift = linkopt::hots_norm_value(solve_cfg.norm, p, solve_cfg.targets);
    for (double& v : p) v -= shift;
  }
  return f.value(p);
}

inline std::vector<double> hots_grad_fd(const LinkGraph& g, std::span<const double> x,
                                        const linkopt::HotsConfig& cfg,
                                        const linkopt::ObjectiveSpec& f,
                                        const std::vector<double>& p_hot, double h = 1e-6) {
  std::vector<double> grad(x.size());
  std::vector<double> xp(x.begin(), x.end());
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double save = xp[k];
    const double hi = std::min(save + h, 1.0);
    const double lo = std::max(save - h, 0.0);
    xp[k] = hi;
    const double fp = hots_J_resolved(g, xp, cfg, f, p_hot);
    xp[k] = lo;
    const double fm = hots_J_resolved(g, xp, cfg, f, p_hot);
    xp[k] = save;
    grad[k] = (fp - fm) / (hi - lo);
  }
  return grad;
}

}  // namespace testsupport
