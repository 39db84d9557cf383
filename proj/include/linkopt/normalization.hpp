#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace linkopt {

/// Degree-1 homogeneous normalization N for Perron vectors: N(au) = a N(u)
/// for a >= 0, hence grad N(u) . u = N(u), and grad N >= 0 on positive u.
class NormalizationSpec {
 public:
  enum class Kind { L1, L2, Coordinate, WeightedL2 };

  static NormalizationSpec l1() { return NormalizationSpec(Kind::L1, 0, {}); }
  static NormalizationSpec l2() { return NormalizationSpec(Kind::L2, 0, {}); }
  static NormalizationSpec coordinate(int i) { return NormalizationSpec(Kind::Coordinate, i, {}); }
  static NormalizationSpec weighted_l2(std::vector<double> r) {
    return NormalizationSpec(Kind::WeightedL2, 0, std::move(r));
  }

  Kind kind() const { return kind_; }
  double value(std::span<const double> u) const;
  void gradient(std::span<const double> u, std::span<double> out) const;
  std::vector<double> gradient(std::span<const double> u) const;

 private:
  NormalizationSpec(Kind k, int i, std::vector<double> r) : kind_(k), index_(i), r_(std::move(r)) {}
  Kind kind_;
  int index_;
  std::vector<double> r_;
};

}  // namespace linkopt
