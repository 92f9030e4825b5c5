#include "twofirm/poly.hpp"

#include <algorithm>

namespace twofirm {

Poly::Poly(std::vector<double> coeffs) : coeffs_{std::move(coeffs)} {
  while (coeffs_.size() > 1 && coeffs_.back() == 0.0) coeffs_.pop_back();
  if (coeffs_.empty()) coeffs_.push_back(0.0);
}

double Poly::operator()(double t) const {
  double acc = 0.0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * t + *it;
  return acc;
}

double Poly::integral(double a, double b) const {
  // Antiderivative by Horner on c_k/(k+1).
  auto prim = [&](double t) {
    double acc = 0.0;
    for (std::size_t k = coeffs_.size(); k-- > 0;)
      acc = acc * t + coeffs_[k] / static_cast<double>(k + 1);
    return acc * t;
  };
  return prim(b) - prim(a);
}

bool Poly::is_zero() const {
  return std::all_of(coeffs_.begin(), coeffs_.end(),
                     [](double c) { return c == 0.0; });
}

}  // namespace twofirm
