#pragma once

#include <limits>
#include <string>

#include "twofirm/model.hpp"

namespace twofirm {

enum class PayoffKind { constant, capped_affine, capped_call, capped_put };

std::string to_string(PayoffKind k);
PayoffKind payoff_kind_from_string(const std::string& s);

// Bounded payoff of a spot value. Every kind carries an additive offset so
// cash shifts stay inside the family.
struct PayoffFunction {
  PayoffKind kind = PayoffKind::constant;
  double value = 0.0;      // constant
  double intercept = 0.0;  // capped_affine: clamp(intercept + slope*x)
  double slope = 0.0;
  double strike = 0.0;     // capped_call / capped_put
  double floor = -std::numeric_limits<double>::infinity();
  double cap = std::numeric_limits<double>::infinity();
  double offset = 0.0;
  double bound = 0.0;  // declared M with |f| <= M

  double operator()(double x) const;
  // sup over x > 0 of |f(x)|, computed from the parameters.
  double sup_abs() const;
  void validate(const std::string& name) const;

  static PayoffFunction constant(double k);
  static PayoffFunction capped_affine(double intercept, double slope,
                                      double floor, double cap);
  static PayoffFunction capped_call(double strike, double cap);
  static PayoffFunction capped_put(double strike, double cap);

  PayoffFunction shifted(double k) const;
  friend bool operator==(const PayoffFunction&, const PayoffFunction&) = default;
};

struct DefaultableClaim {
  PayoffFunction XA, XB, ZA, ZB;
  bool restricted = true;

  // XA = 0, XB = g, ZA = 0, ZB = f.
  static DefaultableClaim restricted_form(PayoffFunction g, PayoffFunction f);
  static DefaultableClaim general(PayoffFunction XA, PayoffFunction XB,
                                  PayoffFunction ZA, PayoffFunction ZB);
  static DefaultableClaim zero();
  static DefaultableClaim constant(double k);

  const PayoffFunction& g() const { return XB; }
  const PayoffFunction& f() const { return ZB; }
  void validate() const;
  double bound() const;
  // Restricted-form claim plus cash K.
  DefaultableClaim shifted(double k) const;
  friend bool operator==(const DefaultableClaim&, const DefaultableClaim&) = default;
};

double claim_payoff(const DefaultableClaim& claim, const MarketPath& path,
                    double horizon);

}  // namespace twofirm
