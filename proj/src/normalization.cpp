#include "linkopt/normalization.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace linkopt {

double NormalizationSpec::value(std::span<const double> u) const {
  switch (kind_) {
    case Kind::L1: {
      double s = 0.0;
      for (double v : u) s += v;
      return s;
    }
    case Kind::L2: {
      double s = 0.0;
      for (double v : u) s += v * v;
      return std::sqrt(s);
    }
    case Kind::Coordinate:
      if (index_ < 0 || static_cast<std::size_t>(index_) >= u.size())
        throw std::invalid_argument("normalization coordinate out of range");
      return u[index_];
    case Kind::WeightedL2: {
      if (r_.size() != u.size()) throw std::invalid_argument("weight vector size mismatch");
      double s = 0.0;
      for (std::size_t i = 0; i < u.size(); ++i) s += r_[i] * u[i] * u[i];
      return std::sqrt(s);
    }
  }
  return 0.0;
}

void NormalizationSpec::gradient(std::span<const double> u, std::span<double> out) const {
  switch (kind_) {
    case Kind::L1:
      std::fill(out.begin(), out.end(), 1.0);
      return;
    case Kind::L2: {
      const double nv = value(u);
      for (std::size_t i = 0; i < u.size(); ++i) out[i] = u[i] / nv;
      return;
    }
    case Kind::Coordinate:
      std::fill(out.begin(), out.end(), 0.0);
      out[index_] = 1.0;
      return;
    case Kind::WeightedL2: {
      const double nv = value(u);
      for (std::size_t i = 0; i < u.size(); ++i) out[i] = r_[i] * u[i] / nv;
      return;
    }
  }
}

std::vector<double> NormalizationSpec::gradient(std::span<const double> u) const {
  std::vector<double> g(u.size());
  gradient(u, g);
  return g;
}

}  // namespace linkopt
