#include "linkopt/low_rank.hpp"

namespace linkopt {

double LowRankGradient::entry(int i, int j) const {
  double s = 0.0;
  for (const Term& t : terms) s += t.scale * t.left[i] * t.right[j];
  return s;
}

std::vector<double> LowRankGradient::extract(std::span<const Arc> coords) const {
  std::vector<double> g(coords.size(), 0.0);
  for (std::size_t k = 0; k < coords.size(); ++k) g[k] = entry(coords[k].src, coords[k].dst);
  return g;
}

}  // namespace linkopt
