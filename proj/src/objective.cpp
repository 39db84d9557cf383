#include "linkopt/objective.hpp"
#include <memory>

#include <algorithm>
#include <cmath>

#include "linkopt/normalization.hpp"

namespace linkopt {
namespace objectives {

ObjectiveSpec target_sum_squares(std::vector<int> targets) {
  auto t = std::make_shared<std::vector<int>>(std::move(targets));
  return {
      [t](std::span<const double> u) {
        double s = 0.0;
        for (int i : *t) s += u[i] * u[i];
        return s;
      },
      [t](std::span<const double> u, std::span<double> g) {
        std::fill(g.begin(), g.end(), 0.0);
        for (int i : *t) g[i] = 2.0 * u[i];
      }};
}

ObjectiveSpec target_sum(std::vector<int> targets) {
  auto t = std::make_shared<std::vector<int>>(std::move(targets));
  return {
      [t](std::span<const double> u) {
        double s = 0.0;
        for (int i : *t) s += u[i];
        return s;
      },
      [t](std::span<const double>, std::span<double> g) {
        std::fill(g.begin(), g.end(), 0.0);
        for (int i : *t) g[i] = 1.0;
      }};
}

ObjectiveSpec coordinate(int i) {
  return {[i](std::span<const double> u) { return u[i]; },
          [i](std::span<const double>, std::span<double> g) {
            std::fill(g.begin(), g.end(), 0.0);
            g[i] = 1.0;
          }};
}

ObjectiveSpec target_sum_exp(std::vector<int> targets) {
  auto t = std::make_shared<std::vector<int>>(std::move(targets));
  return {
      [t](std::span<const double> p) {
        double s = 0.0;
        for (int i : *t) s += std::exp(p[i]);
        return s;
      },
      [t](std::span<const double> p, std::span<double> g) {
        std::fill(g.begin(), g.end(), 0.0);
        for (int i : *t) g[i] = std::exp(p[i]);
      }};
}

ObjectiveSpec from_normalization(const NormalizationSpec& n) {
  auto copy = std::make_shared<NormalizationSpec>(n);
  return {[copy](std::span<const double> u) { return copy->value(u); },
          [copy](std::span<const double> u, std::span<double> g) { copy->gradient(u, g); }};
}

}  // namespace objectives

double check_gradient(const ObjectiveSpec& obj, std::span<const double> u, double h) {
  std::vector<double> g(u.size());
  obj.gradient(u, g);
  std::vector<double> up(u.begin(), u.end());
  double gmax = 0.0;
  for (double v : g) gmax = std::max(gmax, std::abs(v));
  double worst = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double save = up[i];
    up[i] = save + h;
    const double fp = obj.value(up);
    up[i] = save - h;
    const double fm = obj.value(up);
    up[i] = save;
    const double fd = (fp - fm) / (2.0 * h);
    const double denom = std::max(std::abs(fd), 1e-7 * (1.0 + gmax));
    worst = std::max(worst, std::abs(fd - g[i]) / denom);
  }
  return worst;
}

}  // namespace linkopt
