#pragma once

#include <span>
#include <vector>

#include "linkopt/graph.hpp"

namespace linkopt {

/// Derivative of a scalar objective with respect to the matrix entries,
/// stored as a short sum of scaled outer products:
///   entry(i,j) = sum_t scale_t * left_t[i] * right_t[j].
/// One term for pure Perron problems, two for HITS, three for HOTS.
struct LowRankGradient {
  struct Term {
    double scale;
    std::vector<double> left;
    std::vector<double> right;
  };
  std::vector<Term> terms;

  std::size_t rank_bound() const { return terms.size(); }
  double entry(int i, int j) const;

  /// Gradient restricted to the listed arc coordinates.
  std::vector<double> extract(std::span<const Arc> coords) const;
};

}  // namespace linkopt
