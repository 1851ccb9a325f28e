#include "svx/vec.hpp"

#include <cmath>

namespace svx::vec {

double sum(std::span<const double> x) {
  return pairwise(x.size(), [&](std::size_t k) { return x[k]; });
}

double dot(std::span<const double> a, std::span<const double> b) {
  return pairwise(a.size(), [&](std::size_t k) { return a[k] * b[k]; });
}

double norm(std::span<const double> x) { return std::sqrt(dot(x, x)); }

double max_abs(std::span<const double> x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  return m;
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
  for (std::size_t k = 0; k < x.size(); ++k) y[k] += a * x[k];
}

} // namespace svx::vec
