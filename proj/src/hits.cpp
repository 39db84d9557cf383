#include "linkopt/hits.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace linkopt {

void HitsOperator::apply(std::span<const double> x, std::span<double> y) const {
  a_->matvec(x, tmp_);
  a_->tmatvec(tmp_, y);
  double s = 0.0;
  for (double v : x) s += v;
  const double shift = xi_ * s;
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += shift;
}

std::vector<double> hits_matvec(const SparseMatrix& a, double xi, std::span<const double> x) {
  std::vector<double> y(a.n());
  HitsOperator(a, xi).apply(x, y);
  return y;
}

LowRankGradient hits_chain_gradient(const SparseMatrix& a, const std::vector<double>& u,
                                    const std::vector<double>& w) {
  std::vector<double> aw(a.n()), au(a.n());
  a.matvec(w, aw);
  a.matvec(u, au);
  LowRankGradient g;
  g.terms.push_back({1.0, std::move(aw), u});
  g.terms.push_back({1.0, std::move(au), w});
  return g;
}

ChainRule hits_chain(const SparseMatrix& a) {
  return [&a](const std::vector<double>& w, const std::vector<double>& u) {
    return hits_chain_gradient(a, u, w);
  };
}

ThresholdReport threshold_report(const LinkGraph& g, const SparseMatrix& a,
                                 const std::vector<double>& u, const std::vector<double>& w,
                                 double tol) {
  ThresholdReport rep;
  std::vector<double> aw(a.n()), au(a.n());
  a.matvec(w, aw);
  a.matvec(u, au);

  for (int page : g.controlled_pages()) {
    ThresholdReport::Source s;
    s.page = page;
    s.has_outlink = au[page] > 0.0;
    if (s.has_outlink) s.b = -aw[page] / au[page];
    rep.sources.push_back(s);
  }

  rep.target_score.resize(a.n());
  for (int j = 0; j < a.n(); ++j) rep.target_score[j] = w[j] / u[j];

  rep.arc_class.reserve(g.facultative.size());
  rep.arc_gradient.reserve(g.facultative.size());
  for (const Arc& arc : g.facultative) {
    const double grad = aw[arc.src] * u[arc.dst] + au[arc.src] * w[arc.dst];
    rep.arc_gradient.push_back(grad);
    if (grad > tol)
      rep.arc_class.push_back(ArcClass::Activate);
    else if (grad < -tol)
      rep.arc_class.push_back(ArcClass::Deactivate);
    else
      rep.arc_class.push_back(ArcClass::Indifferent);
  }
  return rep;
}

RoundResult round_heuristic(const LinkGraph& g, const WeightVector& x_star,
                            const std::function<double(const WeightVector&)>& objective_value) {
  if (x_star.size() != g.facultative.size())
    throw std::invalid_argument("weight vector length does not match facultative list");
  std::set<double> thresholds(x_star.x.begin(), x_star.x.end());
  thresholds.insert(std::nextafter(0.0, 1.0));  // "just above zero": every positive weight
  thresholds.insert(1.0);
  thresholds.erase(0.0);  // t = 0 would activate prohibited-by-choice zero weights

  RoundResult out;
  bool first = true;
  for (double t : thresholds) {
    WeightVector xb;
    xb.x.resize(x_star.size());
    for (std::size_t k = 0; k < x_star.size(); ++k) xb.x[k] = x_star[k] >= t ? 1.0 : 0.0;
    const double J = objective_value(xb);
    out.sweep.push_back({t, J});
    if (first || J >= out.J_binary) {  // ties resolve to the larger threshold (fewer links)
      out.J_binary = J;
      out.x_binary = std::move(xb);
      first = false;
    }
  }
  return out;
}

HitsAdapter::HitsAdapter(LinkGraph g, HitsProblem prob, bool maximize)
    : graph_(std::move(g)), prob_(std::move(prob)), maximize_(maximize) {
  graph_.validate();
}

Evaluation HitsAdapter::evaluate(std::span<const double> x, double delta) {
  WeightVector wv;
  wv.x.assign(x.begin(), x.end());
  last_a_ = assemble(graph_, wv);
  ++assemblies_;

  HitsOperator op(last_a_, prob_.xi);
  if (!hot_valid_) {
    hot_ = initial_state(graph_.n, prob_.normalization);
    hot_valid_ = true;
  }
  const long cap = inner_cap > 0 ? inner_cap : 10L * graph_.n + 1000;
  LevelResult lr =
      iterate_to_level(op, prob_.objective, prob_.normalization, std::move(hot_), delta, cap);
  hot_ = std::move(lr.state);
  inner_total_ += lr.steps;
  if (!lr.converged)
    throw InnerNonConvergence("inner power/derivative iteration did not reach level precision");

  ObjectiveGradient jg = assemble_J_g(hot_, prob_.objective, hits_chain(last_a_));
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

double HitsAdapter::objective_value(const WeightVector& x, double delta) {
  Evaluation ev = evaluate(x.x, delta);
  return maximize_ ? -ev.J : ev.J;
}

}  // namespace linkopt
