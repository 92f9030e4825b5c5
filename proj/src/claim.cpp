#include "twofirm/claim.hpp"

#include <algorithm>
#include <cmath>

namespace twofirm {

std::string to_string(PayoffKind k) {
  switch (k) {
    case PayoffKind::constant: return "constant";
    case PayoffKind::capped_affine: return "capped_affine";
    case PayoffKind::capped_call: return "capped_call";
    case PayoffKind::capped_put: return "capped_put";
  }
  return "unknown";
}

PayoffKind payoff_kind_from_string(const std::string& s) {
  if (s == "constant") return PayoffKind::constant;
  if (s == "capped_affine") return PayoffKind::capped_affine;
  if (s == "capped_call") return PayoffKind::capped_call;
  if (s == "capped_put") return PayoffKind::capped_put;
  throw ValidationError("unknown payoff type '" + s + "'");
}

namespace {

double clamp_to(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }

}  // namespace

double PayoffFunction::operator()(double x) const {
  double v = 0.0;
  switch (kind) {
    case PayoffKind::constant: v = value; break;
    case PayoffKind::capped_affine: v = clamp_to(intercept + slope * x, floor, cap); break;
    case PayoffKind::capped_call: v = std::min(std::max(x - strike, 0.0), cap); break;
    case PayoffKind::capped_put: v = std::min(std::max(strike - x, 0.0), cap); break;
  }
  return v + offset;
}

double PayoffFunction::sup_abs() const {
  const double inf = std::numeric_limits<double>::infinity();
  double lo = 0.0, hi = 0.0;
  switch (kind) {
    case PayoffKind::constant: lo = hi = value; break;
    case PayoffKind::capped_affine: {
      double vlo = intercept, vhi = intercept;
      if (slope > 0.0) vhi = inf;
      if (slope < 0.0) vlo = -inf;
      lo = clamp_to(vlo, floor, cap);
      hi = clamp_to(vhi, floor, cap);
      break;
    }
    case PayoffKind::capped_call:
      lo = std::min(std::max(-strike, 0.0), cap);
      hi = cap;
      break;
    case PayoffKind::capped_put:
      lo = 0.0;
      hi = std::min(std::max(strike, 0.0), cap);
      break;
  }
  return std::max(std::abs(lo + offset), std::abs(hi + offset));
}

void PayoffFunction::validate(const std::string& name) const {
  const double s = sup_abs();
  if (!std::isfinite(s))
    throw ValidationError("payoff " + name + " is unbounded");
  if (!std::isfinite(bound) || bound < s * (1.0 - 1e-12))
    throw ValidationError("payoff " + name + " exceeds its declared bound M");
}

PayoffFunction PayoffFunction::constant(double k) {
  PayoffFunction p;
  p.kind = PayoffKind::constant;
  p.value = k;
  p.bound = std::abs(k);
  return p;
}

PayoffFunction PayoffFunction::capped_affine(double intercept, double slope,
                                             double floor, double cap) {
  PayoffFunction p;
  p.kind = PayoffKind::capped_affine;
  p.intercept = intercept;
  p.slope = slope;
  p.floor = floor;
  p.cap = cap;
  p.bound = p.sup_abs();
  return p;
}

PayoffFunction PayoffFunction::capped_call(double strike, double cap) {
  PayoffFunction p;
  p.kind = PayoffKind::capped_call;
  p.strike = strike;
  p.cap = cap;
  p.bound = p.sup_abs();
  return p;
}

PayoffFunction PayoffFunction::capped_put(double strike, double cap) {
  PayoffFunction p;
  p.kind = PayoffKind::capped_put;
  p.strike = strike;
  p.cap = cap;
  p.bound = p.sup_abs();
  return p;
}

PayoffFunction PayoffFunction::shifted(double k) const {
  PayoffFunction p = *this;
  p.offset += k;
  p.bound = bound + std::abs(k);
  return p;
}

DefaultableClaim DefaultableClaim::restricted_form(PayoffFunction g, PayoffFunction f) {
  return {PayoffFunction::constant(0.0), std::move(g), PayoffFunction::constant(0.0),
          std::move(f), true};
}

DefaultableClaim DefaultableClaim::general(PayoffFunction XA, PayoffFunction XB,
                                           PayoffFunction ZA, PayoffFunction ZB) {
  return {std::move(XA), std::move(XB), std::move(ZA), std::move(ZB), false};
}

DefaultableClaim DefaultableClaim::zero() {
  return restricted_form(PayoffFunction::constant(0.0), PayoffFunction::constant(0.0));
}

DefaultableClaim DefaultableClaim::constant(double k) {
  return restricted_form(PayoffFunction::constant(k), PayoffFunction::constant(k));
}

void DefaultableClaim::validate() const {
  XA.validate("XA");
  XB.validate(restricted ? "g" : "XB");
  ZA.validate("ZA");
  ZB.validate(restricted ? "f" : "ZB");
  if (restricted && (XA.sup_abs() != 0.0 || ZA.sup_abs() != 0.0))
    throw ValidationError("restricted claim must have XA = ZA = 0");
}

double DefaultableClaim::bound() const {
  return XA.bound + XB.bound + ZA.bound + ZB.bound;
}

DefaultableClaim DefaultableClaim::shifted(double k) const {
  DefaultableClaim c = *this;
  c.XB = XB.shifted(k);
  c.ZB = ZB.shifted(k);
  return c;
}

double claim_payoff(const DefaultableClaim& claim, const MarketPath& path,
                    double horizon) {
  const double dT = path.bond.back();
  double v = 0.0;
  if (path.tauA > horizon) v += claim.XA(dT); else v += claim.ZA(path.bond_before_tauA);
  if (path.tauB > horizon) v += claim.XB(dT); else v += claim.ZB(path.bond_before_tauB);
  return v;
}

}  // namespace twofirm
