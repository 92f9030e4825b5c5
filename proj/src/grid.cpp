#include "twofirm/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace twofirm {

UniformGrid UniformGrid::centered(double center, double halfwidth, std::size_t n) {
  return span(center - halfwidth, center + halfwidth, n);
}

UniformGrid UniformGrid::span(double a, double b, std::size_t n) {
  if (n < 2) throw std::invalid_argument("grid needs at least two nodes");
  return {a, (b - a) / static_cast<double>(n - 1), n};
}

double interp_linear(std::span<const double> v, const UniformGrid& g, double x) {
  const double s = (x - g.lo) / g.step;
  const auto last = static_cast<double>(g.n - 2);
  const double cell = std::clamp(std::floor(s), 0.0, last);
  const auto j = static_cast<std::size_t>(cell);
  const double w = s - cell;
  return v[j] + w * (v[j + 1] - v[j]);
}

void first_derivative(std::span<const double> v, double h, std::span<double> out) {
  const std::size_t n = v.size();
  out[0] = (v[1] - v[0]) / h;
  out[n - 1] = (v[n - 1] - v[n - 2]) / h;
  for (std::size_t j = 1; j + 1 < n; ++j) out[j] = (v[j + 1] - v[j - 1]) / (2.0 * h);
}

void solve_tridiagonal(std::span<const double> a, std::span<const double> b,
                       std::span<const double> c, std::span<double> d) {
  const std::size_t n = b.size();
  std::vector<double> cp(n);
  double denom = b[0];
  cp[0] = c[0] / denom;
  d[0] /= denom;
  for (std::size_t i = 1; i < n; ++i) {
    denom = b[i] - a[i] * cp[i - 1];
    cp[i] = i + 1 < n ? c[i] / denom : 0.0;
    d[i] = (d[i] - a[i] * d[i - 1]) / denom;
  }
  for (std::size_t i = n - 1; i-- > 0;) d[i] -= cp[i] * d[i + 1];
}

void ImplicitStepper::solve(double dt, double h, std::span<const double> conv,
                            std::span<const double> diff,
                            std::span<const double> react, std::span<double> rhs) {
  const std::size_t n = rhs.size();
  const double h2 = h * h;
  for (std::size_t j = 1; j + 1 < n; ++j) {
    const double cm = diff[j] / h2 - conv[j] / (2.0 * h);
    const double cp = diff[j] / h2 + conv[j] / (2.0 * h);
    lo_[j] = -dt * cm;
    up_[j] = -dt * cp;
    di_[j] = 1.0 + dt * (cm + cp + react[j]);
  }
  // Ends: D2 = 0, one-sided D1.
  lo_[0] = 0.0;
  di_[0] = 1.0 + dt * (conv[0] / h + react[0]);
  up_[0] = -dt * conv[0] / h;
  lo_[n - 1] = dt * conv[n - 1] / h;
  di_[n - 1] = 1.0 + dt * (-conv[n - 1] / h + react[n - 1]);
  up_[n - 1] = 0.0;
  solve_tridiagonal(lo_, di_, up_, rhs);
}

}  // namespace twofirm
