#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace twofirm {

struct UniformGrid {
  double lo = 0.0;
  double step = 1.0;
  std::size_t n = 1;

  double at(std::size_t j) const { return lo + step * static_cast<double>(j); }
  double hi() const { return at(n - 1); }
  static UniformGrid centered(double center, double halfwidth, std::size_t n);
  static UniformGrid span(double a, double b, std::size_t n);
};

// Linear interpolation, extrapolating linearly from the end cells.
double interp_linear(std::span<const double> values, const UniformGrid& g, double x);

// Central differences inside, one-sided at the two ends.
void first_derivative(std::span<const double> values, double step,
                      std::span<double> out);

// Thomas algorithm; rhs is overwritten with the solution. Sizes equal n;
// lower[0] and upper[n-1] are ignored.
void solve_tridiagonal(std::span<const double> lower, std::span<const double> diag,
                       std::span<const double> upper, std::span<double> rhs);

// Assembles and solves (I - dt*(conv*D1 + diff*D2 - react)) w = rhs on a
// uniform grid with zero second derivative and one-sided first derivative
// at both ends. Coefficient arrays are per node.
class ImplicitStepper {
 public:
  explicit ImplicitStepper(std::size_t n) : lo_(n), di_(n), up_(n) {}
  void solve(double dt, double h, std::span<const double> conv,
             std::span<const double> diff, std::span<const double> react,
             std::span<double> rhs);

 private:
  std::vector<double> lo_, di_, up_;
};

}  // namespace twofirm
