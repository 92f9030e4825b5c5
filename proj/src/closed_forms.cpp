#include "twofirm/closed_forms.hpp"

#include <cmath>

namespace twofirm {

void OneDefaultParams::validate() const {
  const double lhs = mu0 * kappa;
  const double rhs = sigma0 * sigma0 + kappa * kappa * lambda;
  if (std::abs(lhs - rhs) > 1e-12 * std::max({std::abs(lhs), std::abs(rhs), 1e-300}))
    throw ValidationError(
        "closed-form constraint violated: mu0*kappa != sigma0^2 + kappa^2*lambda");
  if (!(sigma1 > 0.0)) throw ValidationError("closed form requires sigma1 > 0");
  if (kappa == 0.0) throw ValidationError("closed form requires kappa != 0");
  if (!(T > 0.0)) throw ValidationError("horizon must be positive");
}

ModelParams OneDefaultParams::model() const {
  ModelParams p;
  p.horizon = T;
  p.ordered_defaults = true;
  StateCoeffs pre;
  pre.mu = mu0;
  pre.sigma = sigma0;
  pre.sigmaA = kappa;
  pre.lambdaA = lambda;
  StateCoeffs post;
  post.mu = mu1;
  post.sigma = sigma1;
  p[DefaultState{0, 0}] = pre;
  p[DefaultState{1, 0}] = post;
  p[DefaultState{1, 1}] = post;
  StateCoeffs unreachable = pre;
  unreachable.lambdaA = 0.0;
  p[DefaultState{0, 1}] = unreachable;
  return p;
}

std::pair<double, double> theta_one_default(const OneDefaultParams& p, double t) {
  p.validate();
  const double tau = p.T - t;
  const double r = p.mu1 / p.sigma1;
  return {std::exp(-(p.mu0 / p.kappa) * tau), std::exp(-r * r * tau)};
}

double theta_complete_brownian(const Poly& mu, const Poly& sigma, double T, double t) {
  if (mu.is_constant() && sigma.is_constant()) {
    if (mu(0.0) == 0.0) return 1.0;
    const double r = mu(0.0) / sigma(0.0);
    if (!(sigma(0.0) > 0.0)) throw ValidationError("complete Brownian case requires sigma > 0");
    return std::exp(-r * r * (T - t));
  }
  const double I = integrate(
      [&](double s) {
        const double m = mu(s), v = sigma(s);
        if (m == 0.0) return 0.0;
        if (!(v > 0.0)) throw ValidationError("complete Brownian case requires sigma > 0");
        return (m / v) * (m / v);
      },
      t, T, 256);
  return std::exp(-I);
}

double theta_complete_jump(const Poly& mu, const Poly& sigmaA, const Poly& lambdaA, double T,
                           double t) {
  auto rho = [&](double s) {
    const double m = mu(s);
    if (m == 0.0) return 0.0;
    const double d = lambdaA(s) * sigmaA(s);
    if (d == 0.0) throw ArbitrageError("drift without tradeable risk in the pure-jump market");
    return -m / d;
  };
  for (std::size_t k = 0; k < kInvariantSamples; ++k) {
    const double s = t + (T - t) * static_cast<double>(k) /
                             static_cast<double>(kInvariantSamples - 1);
    if (!(1.0 + rho(s) > 0.0))
      throw SignedMeasureError("signed density; VOM only as signed measure");
  }
  if (t >= T) return 1.0;
  if (mu.is_constant() && sigmaA.is_constant() && lambdaA.is_constant()) {
    const double r = rho(t), l = lambdaA(t), tau = T - t;
    const double k = l * (1.0 + 2.0 * r);
    const double E = k == 0.0 ? 1.0 + (1.0 + r) * (1.0 + r) * l * tau
                              : std::exp(-k * tau) + (1.0 + r) * (1.0 + r) * (l / k) *
                                                         (1.0 - std::exp(-k * tau));
    return 1.0 / E;
  }
  auto k = [&](double s) { return lambdaA(s) * (1.0 + 2.0 * rho(s)); };
  const double survive = std::exp(-integrate(k, t, T, 128));
  const double jumped = integrate(
      [&](double s) {
        const double r = rho(s);
        return lambdaA(s) * (1.0 + r) * (1.0 + r) * std::exp(-integrate(k, t, s, 16));
      },
      t, T, 128);
  return 1.0 / (survive + jumped);
}

namespace {

struct AB {
  double a, b, ba;
};

AB weights(const FirstNode& n, const NodeCoeffs& c) {
  const double a = c.sigma * c.sigma + c.sigmaA * c.sigmaA * (1.0 + n.theta.A) * c.lambdaA +
                   c.sigmaB * c.sigmaB * (1.0 + n.theta.B) * c.lambdaB;
  const double b = c.mu + c.sigma * n.beta + c.sigmaA * n.theta.A * c.lambdaA +
                   c.sigmaB * n.theta.B * c.lambdaB;
  if (a > 0.0) return {a, b, b / a};
  if (b == 0.0) return {a, b, 0.0};
  throw ArbitrageError("drift without tradeable risk: a = 0 but b != 0");
}

}  // namespace

DualControl vom_controls(const FirstNode& n, const NodeCoeffs& c) {
  if (!(1.0 + n.theta.A > 0.0 && 1.0 + n.theta.B > 0.0))
    throw DomainError("jump integrand violates 1+theta > 0");
  const AB w = weights(n, c);
  DualControl q;
  q.rho = n.beta - c.sigma * w.ba;
  if (c.lambdaA > 0.0) q.rhoA = n.theta.A - (1.0 + n.theta.A) * c.sigmaA * w.ba;
  if (c.lambdaB > 0.0) q.rhoB = n.theta.B - (1.0 + n.theta.B) * c.sigmaB * w.ba;
  return q;
}

double vom_j_expression(const DualControl& q, const FirstNode& n, const NodeCoeffs& c) {
  const AB w = weights(n, c);
  double j = (q.rho - n.beta) * (q.rho - n.beta) - w.b * w.ba;
  if (c.lambdaA > 0.0)
    j += (q.rhoA - n.theta.A) * (q.rhoA - n.theta.A) * c.lambdaA / (1.0 + n.theta.A);
  if (c.lambdaB > 0.0)
    j += (q.rhoB - n.theta.B) * (q.rhoB - n.theta.B) * c.lambdaB / (1.0 + n.theta.B);
  return j;
}

std::array<double, 3> vom_identity_residuals(const DualControl& q, const FirstNode& n,
                                             const NodeCoeffs& c) {
  const double dA = (q.rhoA - n.theta.A) / (1.0 + n.theta.A);
  const double dB = (q.rhoB - n.theta.B) / (1.0 + n.theta.B);
  const double d = q.rho - n.beta;
  return {c.sigmaB * d - c.sigma * dB, c.sigmaA * dB - c.sigmaB * dA,
          c.sigmaA * d - c.sigma * dA};
}

DualControl VomControlField::at(double t, double spot, DefaultState h) const {
  const int k = regime_of(h);
  return vom_controls(first_->at(k, t, std::log(spot)), params_->at(t, h));
}

}  // namespace twofirm
