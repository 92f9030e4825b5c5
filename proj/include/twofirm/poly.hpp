#pragma once

#include <vector>

namespace twofirm {

// Polynomial in time with ascending coefficients c0 + c1 t + c2 t^2 + ...
class Poly {
 public:
  Poly() = default;
  Poly(double c) : coeffs_{c} {}  // NOLINT(google-explicit-constructor)
  explicit Poly(std::vector<double> coeffs);

  double operator()(double t) const;
  // Integral over [a, b].
  double integral(double a, double b) const;

  bool is_constant() const { return coeffs_.size() <= 1; }
  bool is_zero() const;
  const std::vector<double>& coeffs() const { return coeffs_; }

  friend bool operator==(const Poly&, const Poly&) = default;

 private:
  std::vector<double> coeffs_{0.0};
};

}  // namespace twofirm
