#pragma once

#include <span>
#include <string>
#include <vector>

#include "linkopt/graph.hpp"
#include "linkopt/low_rank.hpp"
#include "linkopt/objective.hpp"
#include "linkopt/optimizer.hpp"

namespace linkopt {

/// Additive normalizations for temperature vectors: N(p + c e) = N(p) + c,
/// hence grad N^T e = 1.
enum class HotsNorm { MeanZero, LseZero, LseTargetZero };

struct HotsConfig {
  double alpha = 0.9;          // entropy mixing parameter, strictly inside (1/2, 1)
  double fp_tol = 1e-10;       // fixed-point tolerance on ||grad theta||_inf
  long fp_cap = 200000;
  HotsNorm norm = HotsNorm::LseZero;
  std::vector<int> targets;    // needed for LseTargetZero (and by target objectives)
  bool precondition = false;   // opt-in diag(d) preconditioner for the auxiliary vector
  long w_cap = 500000;

  void check() const;  // throws on alpha outside (1/2, 1) etc.
};

double hots_norm_value(HotsNorm norm, std::span<const double> p, std::span<const int> targets);
std::vector<double> hots_norm_gradient(HotsNorm norm, std::span<const double> p,
                                       std::span<const int> targets);

/// Dual objective of the entropy flow problem, as a function of the
/// temperature exponents p only:
///   theta(p) = C(alpha) + phi(-p) + phi(p) + (2 alpha - 1) log(sum_ij A_ij e^{p_i - p_j})
/// with phi(p) = (1 - alpha) log(sum_i e^{p_i}).  All exponential aggregates
/// are evaluated in max-subtracted (log-sum-exp) form.
double theta(const SparseMatrix& a, std::span<const double> p, const HotsConfig& cfg);

/// Gradient of theta; each of its four terms is a difference of two
/// probability distributions, so the coordinates always sum to zero.
std::vector<double> theta_grad(const SparseMatrix& a, std::span<const double> p,
                               const HotsConfig& cfg);

/// The strictly positive scaling vector d with
///   u_l(p) = p_l - (1/2) log(1 + d_l dtheta/dp_l(p)).
std::vector<double> d_vector(const SparseMatrix& a, std::span<const double> p,
                             const HotsConfig& cfg);

/// One step of the dual fixed-point iteration p' = u(p), re-normalized to
/// N(p') = 0.  Applying u repeatedly is a descent method for theta.
std::vector<double> hots_fixed_point_step(const SparseMatrix& a, std::span<const double> p,
                                          const HotsConfig& cfg);

/// The explicit log form of u(p); equal to the d-vector form to round-off.
std::vector<double> hots_u_explicit(const SparseMatrix& a, std::span<const double> p,
                                    const HotsConfig& cfg);

struct HotsState {
  std::vector<double> p;       // N(p) = 0
  double residual = 0.0;       // ||grad theta||_inf at p
  long iterations = 0;
  bool converged = false;
  // cached exponential aggregates in log form, consistent with p:
  double log_sum_exp_p = 0.0;        // log sum_i e^{p_i}
  double log_sum_exp_neg_p = 0.0;    // log sum_j e^{-p_j}
  double log_arc_sum = 0.0;          // log sum_ij A_ij e^{p_i - p_j}
};

HotsState hots_solve(const SparseMatrix& a, std::vector<double> p0, const HotsConfig& cfg);

/// Exact Hessian-vector product of theta in O(nnz), composed from the
/// log-sum-exp Hessians of the three smooth terms; never forms the matrix.
std::vector<double> hessian_matvec(const SparseMatrix& a, std::span<const double> p,
                                   const HotsConfig& cfg, std::span<const double> y);

enum class AuxMode { Plain, Preconditioned, PreconditionedFallback };

struct AuxResult {
  std::vector<double> w;  // centered: w^T e = 0
  AuxMode mode = AuxMode::Plain;
  long steps = 0;
};

/// Auxiliary vector w = (-grad f^T + (grad f^T e) grad N^T)(d2 theta/dp2)^#,
/// computed by the deflated fixed-point scheme on M = I - (1/2) d2theta (all
/// nonunit eigenvalues lie inside the unit disc since ||d2theta|| < 4).  The
/// opt-in preconditioned variant runs on M = I - (1/2) diag(d) d2theta,
/// validates its own convergence, and falls back to the plain scheme.
AuxResult hots_aux_w(const SparseMatrix& a, std::span<const double> p, const HotsConfig& cfg,
                     std::span<const double> grad_f, std::span<const double> grad_n, double tol,
                     std::span<const double> w0 = {});

/// Scalar B of the threshold property: with g the derivative of the objective,
/// g_ij = (2 alpha - 1) / S_A * e^{p_i - p_j} (w_i - w_j + B).
double hots_threshold_b(const SparseMatrix& a, std::span<const double> p,
                        std::span<const double> w);

/// Rank-3 derivative of the objective with respect to the matrix entries,
/// sign-matched to finite differences of f(p(A)).
LowRankGradient hots_gradient(const SparseMatrix& a, std::span<const double> p,
                              const HotsConfig& cfg, std::span<const double> w);

/// Threshold report; the reported preference score s = -w is oriented so that
/// a facultative arc (i,j) is activated exactly when s_j > s_i + B_s, and
/// larger s means a more desirable target.
struct HotsThresholdReport {
  std::vector<double> score;          // preference score per node
  double b = 0.0;                     // cutoff in the score orientation
  std::vector<ArcClass> arc_class;
  std::vector<double> arc_gradient;   // objective derivative per facultative arc
};

HotsThresholdReport hots_threshold_report(const LinkGraph& g, const SparseMatrix& a,
                                          std::span<const double> p, const HotsConfig& cfg,
                                          std::span<const double> w, double tol);

/// Primal flow recovered from the dual solution: rho_ij = A_ij e^{p_i-p_j+mu}
/// on graph arcs plus the virtual-node arcs, with the multipliers mu, a, b in
/// closed form.  Residuals (flow conservation per node, total mass 1, the two
/// (1-alpha) virtual-node constraints) are reported, never silently dropped.
struct PrimalFlow {
  double mu = 0.0, a_last = 0.0, b_last = 0.0;
  std::vector<double> rho_arcs;          // per structural arc of A, row-major CSR order
  std::vector<double> rho_to_virtual;    // rho_{i, n+1}
  std::vector<double> rho_from_virtual;  // rho_{n+1, j}
  std::vector<double> conservation_residual;  // per graph node
  double virtual_conservation_residual = 0.0;
  double mass_residual = 0.0;
  double out_virtual_residual = 0.0;  // |sum_j rho_{n+1,j} - (1-alpha)|
  double in_virtual_residual = 0.0;   // |sum_i rho_{i,n+1} - (1-alpha)|
};

PrimalFlow primal_flow(const SparseMatrix& a, std::span<const double> p, const HotsConfig& cfg);

/// ProblemAdapter for relaxed HOTS optimization (objective maximized).  The
/// level precision maps to both the fixed-point residual tolerance and the
/// auxiliary-vector tolerance; there is no certified error bound here, so
/// these runs are heuristic.
class HotsAdapter final : public ProblemAdapter {
 public:
  HotsAdapter(LinkGraph g, HotsConfig cfg, ObjectiveSpec objective, bool maximize = true);

  std::size_t dim() const override { return graph_.facultative.size(); }
  Evaluation evaluate(std::span<const double> x, double delta) override;
  void reset_hot_start() override { hot_valid_ = false; }
  bool maximizing() const override { return maximize_; }

  double objective_value(const WeightVector& x, double delta);

  const std::vector<double>& last_p() const { return p_; }
  const std::vector<double>& last_w() const { return w_; }
  const SparseMatrix& last_matrix() const { return last_a_; }
  const HotsConfig& config() const { return cfg_; }

 private:
  LinkGraph graph_;
  HotsConfig cfg_;
  ObjectiveSpec objective_;
  bool maximize_;
  std::vector<double> p_, w_;
  bool hot_valid_ = false;
  SparseMatrix last_a_;
};

}  // namespace linkopt
