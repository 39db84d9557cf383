#pragma once

#include <functional>
#include <span>
#include <vector>

namespace linkopt {

class NormalizationSpec;

/// Scalar utility of a positive score vector together with its gradient.
struct ObjectiveSpec {
  std::function<double(std::span<const double>)> value;
  std::function<void(std::span<const double>, std::span<double>)> gradient;

  std::vector<double> grad(std::span<const double> u) const {
    std::vector<double> g(u.size());
    gradient(u, g);
    return g;
  }
};

namespace objectives {

/// f(u) = sum_{i in targets} u_i^2
ObjectiveSpec target_sum_squares(std::vector<int> targets);

/// f(u) = sum_{i in targets} u_i
ObjectiveSpec target_sum(std::vector<int> targets);

/// f(u) = u_i
ObjectiveSpec coordinate(int i);

/// f(p) = sum_{i in targets} exp(p_i); the usual choice for temperature vectors.
ObjectiveSpec target_sum_exp(std::vector<int> targets);

/// f = N; constant on the normalization manifold, so its eigenvector gradient
/// vanishes identically.  Degenerate test objective.
ObjectiveSpec from_normalization(const NormalizationSpec& n);

}  // namespace objectives

/// Central-difference consistency check of obj.gradient against obj.value:
/// returns the maximum relative error over the coordinates at point u.
double check_gradient(const ObjectiveSpec& obj, std::span<const double> u, double h = 1e-6);

}  // namespace linkopt
