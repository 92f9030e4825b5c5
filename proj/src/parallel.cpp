#include "twofirm/parallel.hpp"

#include <omp.h>

namespace twofirm {

double pairwise_sum(std::span<const double> xs) {
  if (xs.size() <= 16) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s;
  }
  const std::size_t half = xs.size() / 2;
  return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

int max_threads() { return omp_get_max_threads(); }

}  // namespace twofirm
