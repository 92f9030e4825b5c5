#pragma once

#include <array>
#include <utility>

#include "twofirm/controls.hpp"
#include "twofirm/model.hpp"
#include "twofirm/mvh.hpp"
#include "twofirm/poly.hpp"

namespace twofirm {

class SignedMeasureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One-default instance with an explicit quadratic-weight solution.
struct OneDefaultParams {
  double mu0 = 0, sigma0 = 0, kappa = 0, lambda = 0, mu1 = 0, sigma1 = 0, T = 1;

  // Throws ValidationError unless mu0*kappa = sigma0^2 + kappa^2*lambda.
  void validate() const;
  // Ordered model: regime 0 carries (mu0, sigma0, kappa, lambda), regime 1
  // carries (mu1, sigma1) and firm B never defaults.
  ModelParams model() const;
};

// (pre-default, post-default) values at time t.
std::pair<double, double> theta_one_default(const OneDefaultParams& p, double t);

// exp(-int_t^T (mu/sigma)^2 ds).
double theta_complete_brownian(const Poly& mu, const Poly& sigma, double T, double t);

// Pure-jump market with one default: reciprocal of the conditional second
// moment of the density with rhoA = -mu/(lambdaA*sigmaA), alive at t.
double theta_complete_jump(const Poly& mu, const Poly& sigmaA, const Poly& lambdaA,
                           double T, double t);

// Candidate variance-optimal controls at a node. The unused channel of the
// regime should carry zero intensity in c.
DualControl vom_controls(const FirstNode& node, const NodeCoeffs& c);

// (rho-beta)^2 + sum (rho^i-theta^i)^2 lambda^i/(1+theta^i) + g1; zero at the
// candidate controls.
double vom_j_expression(const DualControl& q, const FirstNode& node, const NodeCoeffs& c);

// Residuals of the three cross-channel identities that would settle the
// variance-optimal identification with two defaults.
std::array<double, 3> vom_identity_residuals(const DualControl& q, const FirstNode& node,
                                             const NodeCoeffs& c);

// Controls read off a first-BSDE solution along a path.
class VomControlField final : public ControlField {
 public:
  VomControlField(const BsdeFirstSolution& first, const ModelParams& params)
      : first_{&first}, params_{&params} {}
  DualControl at(double t, double spot, DefaultState h) const override;

 private:
  const BsdeFirstSolution* first_;
  const ModelParams* params_;
};

// Gauss-Legendre composite quadrature on [a, b].
template <class F>
double integrate(F&& f, double a, double b, int panels = 64);

}  // namespace twofirm

#include "twofirm/detail/quadrature.hpp"
