#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace svx::vec {

/// Sum of term(0..n-1) by pairwise reduction with a fixed split topology,
/// so results depend only on n and the terms.
template <class Term>
double pairwise(std::size_t begin, std::size_t end, const Term& term) {
  constexpr std::size_t block = 64;
  if (end - begin <= block) {
    double s = 0.0;
    for (std::size_t k = begin; k < end; ++k) s += term(k);
    return s;
  }
  const std::size_t mid = begin + (end - begin) / 2;
  return pairwise(begin, mid, term) + pairwise(mid, end, term);
}

template <class Term>
double pairwise(std::size_t n, const Term& term) {
  return pairwise(std::size_t{0}, n, term);
}

double sum(std::span<const double> x);
double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> x);
double max_abs(std::span<const double> x);
/// y += a x
void axpy(double a, std::span<const double> x, std::span<double> y);

} // namespace svx::vec
