#pragma once

#include <array>

namespace twofirm {

template <class F>
double integrate(F&& f, double a, double b, int panels) {
  static constexpr std::array<double, 5> x{0.0, -0.5384693101056831, 0.5384693101056831,
                                           -0.9061798459386640, 0.9061798459386640};
  static constexpr std::array<double, 5> w{0.5688888888888889, 0.4786286704993665,
                                           0.4786286704993665, 0.2369268850561891,
                                           0.2369268850561891};
  if (b == a) return 0.0;
  const double h = (b - a) / panels;
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * h;
    double s = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) s += w[k] * f(mid + 0.5 * h * x[k]);
    total += 0.5 * h * s;
  }
  return total;
}

}  // namespace twofirm
