#pragma once

#include "twofirm/model.hpp"

namespace twofirm {

// Girsanov controls: jump controls rhoA, rhoB in (-1, inf) and the Brownian
// control rho.
struct DualControl {
  double rhoA = 0.0;
  double rhoB = 0.0;
  double rho = 0.0;
};

// Controls as a feedback of (t, pre-jump spot, state).
class ControlField {
 public:
  virtual ~ControlField() = default;
  virtual DualControl at(double t, double spot, DefaultState h) const = 0;
};

class ZeroControls final : public ControlField {
 public:
  DualControl at(double, double, DefaultState) const override { return {}; }
};

// Residual of the bond martingale constraint
// mu + rho*sigma + rhoA*sigmaA*lambdaA + rhoB*sigmaB*lambdaB.
inline double martingale_residual(const DualControl& q, const NodeCoeffs& c) {
  return c.mu + q.rho * c.sigma + q.rhoA * c.sigmaA * c.lambdaA +
         q.rhoB * c.sigmaB * c.lambdaB;
}

}  // namespace twofirm
