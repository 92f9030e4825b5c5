#pragma once

#include "twofirm/claim.hpp"
#include "twofirm/model.hpp"

namespace twofirm::testing {

// Ordered chain 00 -> 10 -> 11; the unreachable state copies 00 without intensities.
inline ModelParams ordered3(StateCoeffs r0, StateCoeffs r1, StateCoeffs r2, double T = 1.0) {
  ModelParams p;
  p.horizon = T;
  p.ordered_defaults = true;
  StateCoeffs u = r0;
  u.lambdaA = 0.0;
  u.lambdaB = 0.0;
  p[DefaultState{0, 0}] = r0;
  p[DefaultState{1, 0}] = r1;
  p[DefaultState{1, 1}] = r2;
  p[DefaultState{0, 1}] = u;
  return validate_params(p);
}

// Three ordered two-default instances with distinct signs and a time-dependent one.
inline ModelParams generic_instance(int which) {
  StateCoeffs r0, r1, r2;
  if (which == 0) {
    r0.mu = 0.08; r0.sigma = 0.2; r0.sigmaA = -0.3; r0.lambdaA = 0.3;
    r1.mu = 0.06; r1.sigma = 0.25; r1.sigmaB = -0.2; r1.lambdaB = 0.2;
    r2.mu = 0.04; r2.sigma = 0.2;
  } else if (which == 1) {
    r0.mu = Poly{std::vector<double>{0.05, 0.02}}; r0.sigma = 0.3; r0.sigmaA = -0.5;
    r0.lambdaA = Poly{std::vector<double>{0.2, 0.1}};
    r1.mu = 0.1; r1.sigma = 0.2; r1.sigmaB = 0.3; r1.lambdaB = 0.4;
    r2.mu = -0.02; r2.sigma = 0.15;
  } else {
    r0.mu = 0.12; r0.sigma = 0.15; r0.sigmaA = 0.2; r0.lambdaA = 0.5;
    r1.mu = 0.03; r1.sigma = 0.3; r1.sigmaB = -0.4; r1.lambdaB = 0.3;
    r2.mu = 0.07; r2.sigma = 0.25;
  }
  return ordered3(r0, r1, r2);
}

inline DefaultableClaim generic_claim() {
  return DefaultableClaim::restricted_form(PayoffFunction::capped_call(1.0, 0.5),
                                           PayoffFunction::constant(0.3));
}

inline ModelParams constant_params(const NodeCoeffs& c, bool ordered = false) {
  return validate_params(constant_model(c, 1.0, ordered));
}

}  // namespace twofirm::testing
