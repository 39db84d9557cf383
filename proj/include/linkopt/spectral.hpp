#pragma once

#include <functional>
#include <span>
#include <vector>

#include "linkopt/low_rank.hpp"
#include "linkopt/normalization.hpp"
#include "linkopt/objective.hpp"
#include "linkopt/optimizer.hpp"
#include "linkopt/sparse.hpp"

namespace linkopt {

struct PowerResult {
  bool converged = false;
  double rho = 0.0;
  std::vector<double> u, v;
  long iterations = 0;
  double residual = 0.0;  // ||Mu - rho u||_inf / rho at exit
};

/// Power iteration for the Perron pair of a nonnegative operator:
///   u <- Mu / N(Mu),  v^T <- v^T M / (v^T M u).
/// Non-convergence within max_iter (periodicity, tiny spectral gap) is
/// reported through the converged flag, not an exception.
PowerResult power_iterate(const LinearOperator& M, const NormalizationSpec& N, double tol,
                          long max_iter);

/// Iterate of the coupled power/derivative scheme.  The auxiliary row vector
/// w_tilde converges to (-grad f + (grad f . u) grad N)^T (M - rho I)^#, whose
/// outer product with u is the derivative of f(u(M)) with respect to the
/// matrix entries.
struct PerronState {
  std::vector<double> u, v, w_tilde;
  double rho = 0.0;
  long l = 0;  // iteration count
};

/// Deterministic start: u0 = e / N(e), v0 = e scaled so v0^T u0 = 1, w0 = 0.
PerronState initial_state(int dim, const NormalizationSpec& N);

/// One step of the three coupled recurrences:
///   u+ = Mu / N(Mu)
///   v+^T = v^T M / (v^T M u+)
///   w+^T = (1/rho)(grad f^T - (grad f . u) grad N^T + w^T M)(I - u+ v+^T)
/// with rho = N(Mu) and f, N evaluated at the current u.  Exactly three
/// matvec-class products; the rank-1 deflation is applied without ever
/// forming I - u v^T.
PerronState power_derivative_step(const LinearOperator& M, const ObjectiveSpec& f,
                                  const NormalizationSpec& N, PerronState s);

struct LevelResult {
  PerronState state;
  long steps = 0;
  bool converged = false;
  double last_diff = 0.0;  // inf-norm over the concatenated (u,v,w) difference
};

/// Runs power_derivative_step from s0 until the successive-iterate distance
/// (inf-norm over the concatenated triple) drops to delta; hot starts are the
/// intended use.  Returns the freshest state and the number of steps taken.
LevelResult iterate_to_level(const LinearOperator& M, const ObjectiveSpec& f,
                             const NormalizationSpec& N, PerronState s0, double delta, long cap);

/// Derivative of the Perron root: d rho / d M_ij = v_i u_j (v^T u = 1).
LowRankGradient root_gradient(std::span<const double> u, std::span<const double> v);

/// Maps the auxiliary vector through the problem's chain rule; identity for
/// the pure Perron problem.
using ChainRule = std::function<LowRankGradient(const std::vector<double>& w,
                                                const std::vector<double>& u)>;
ChainRule identity_chain();

/// Level-n objective and gradient: J = f(u), g = chain(w, u).
struct ObjectiveGradient {
  double J = 0.0;
  LowRankGradient g;
};
ObjectiveGradient assemble_J_g(const PerronState& s, const ObjectiveSpec& f,
                               const ChainRule& chain);

/// ProblemAdapter for the plain Perron vector problem, h = identity: the
/// objective is a function of the Perron vector of A(x) itself.
class PerronAdapter final : public ProblemAdapter {
 public:
  PerronAdapter(LinkGraph g, ObjectiveSpec objective, NormalizationSpec norm, bool maximize);

  std::size_t dim() const override { return graph_.facultative.size(); }
  Evaluation evaluate(std::span<const double> x, double delta) override;
  void reset_hot_start() override { hot_valid_ = false; }
  bool maximizing() const override { return maximize_; }

  double objective_value(const WeightVector& x, double delta);
  const PerronState& last_state() const { return hot_; }
  const SparseMatrix& last_matrix() const { return last_a_; }

  long inner_cap = 0;  // 0: use 10 n + 1000

 private:
  LinkGraph graph_;
  ObjectiveSpec objective_;
  NormalizationSpec norm_;
  bool maximize_;
  PerronState hot_;
  bool hot_valid_ = false;
  SparseMatrix last_a_;
};

}  // namespace linkopt
