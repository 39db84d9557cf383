#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "linkopt/graph.hpp"
#include "linkopt/normalization.hpp"
#include "linkopt/objective.hpp"
#include "linkopt/optimizer.hpp"
#include "linkopt/spectral.hpp"

namespace linkopt {

/// h(A) = A^T A + xi e e^T as an implicit symmetric operator; products cost
/// O(nnz(A)) and A^T A is never materialized.
class HitsOperator final : public LinearOperator {
 public:
  HitsOperator(const SparseMatrix& a, double xi) : a_(&a), xi_(xi), tmp_(a.n()) {}
  int dim() const override { return a_->n(); }
  void apply(std::span<const double> x, std::span<double> y) const override;
  void apply_transpose(std::span<const double> x, std::span<double> y) const override {
    apply(x, y);  // h(A) is symmetric
  }

 private:
  const SparseMatrix* a_;
  double xi_;
  mutable std::vector<double> tmp_;
};

std::vector<double> hits_matvec(const SparseMatrix& a, double xi, std::span<const double> x);

struct HitsProblem {
  double xi = 1e-4;
  ObjectiveSpec objective;                           // over authority scores
  NormalizationSpec normalization = NormalizationSpec::l2();
};

/// Chain rule through h(A) = A^T A + xi e e^T: the derivative of the objective
/// with respect to the weighted adjacency matrix is (Aw)u^T + (Au)w^T, where
/// w is the converged auxiliary vector of the triple iteration on h(A).
/// The result is the plain derivative of the objective (ascent direction for
/// maximization problems), verified against finite differences in the tests.
LowRankGradient hits_chain_gradient(const SparseMatrix& a, const std::vector<double>& u,
                                    const std::vector<double>& w);

ChainRule hits_chain(const SparseMatrix& a);

/// Threshold analysis at a stationary point: each controlled page i carries a
/// cutoff b_i = -(Aw)_i / (Au)_i (absent when the page has no outlink), each
/// candidate target j a score w_j / u_j, and a facultative arc (i,j) is
/// activated exactly when w_j / u_j > b_i.  The per-arc classification follows
/// the sign of the objective derivative, so at a converged local maximum it
/// matches the actual weights.
struct ThresholdReport {
  struct Source {
    int page = 0;
    bool has_outlink = false;
    double b = 0.0;
  };
  std::vector<Source> sources;            // one per controlled page
  std::vector<double> target_score;       // w_j / u_j per node
  std::vector<ArcClass> arc_class;        // per facultative arc
  std::vector<double> arc_gradient;       // objective derivative per facultative arc
};

ThresholdReport threshold_report(const LinkGraph& g, const SparseMatrix& a,
                                 const std::vector<double>& u, const std::vector<double>& w,
                                 double tol);

/// Threshold-rounding sweep: phi(t) = objective value of the binary vector
/// activating every facultative weight >= t, evaluated at each distinct
/// weight in x_star plus 0+ and 1.  Returns the best binary vector found.
struct RoundResult {
  WeightVector x_binary;
  double J_binary = 0.0;
  struct Entry {
    double t = 0.0;
    double J = 0.0;
  };
  std::vector<Entry> sweep;
};

RoundResult round_heuristic(const LinkGraph& g, const WeightVector& x_star,
                            const std::function<double(const WeightVector&)>& objective_value);

/// ProblemAdapter for the relaxed authority optimization problem (objective
/// maximized; the internal sign is flipped for the minimizing loop).
class HitsAdapter final : public ProblemAdapter {
 public:
  HitsAdapter(LinkGraph g, HitsProblem prob, bool maximize = true);

  std::size_t dim() const override { return graph_.facultative.size(); }
  Evaluation evaluate(std::span<const double> x, double delta) override;
  void reset_hot_start() override { hot_valid_ = false; }
  bool maximizing() const override { return maximize_; }

  /// Objective in the user's (maximization) framing at precision delta.
  double objective_value(const WeightVector& x, double delta);

  /// State of the last evaluation, for threshold reports and rounding.
  const PerronState& last_state() const { return hot_; }
  const SparseMatrix& last_matrix() const { return last_a_; }

  long inner_cap = 0;  // 0: use 10 n + 1000

 private:
  LinkGraph graph_;
  HitsProblem prob_;
  bool maximize_;
  PerronState hot_;
  bool hot_valid_ = false;
  SparseMatrix last_a_;
};

}  // namespace linkopt
