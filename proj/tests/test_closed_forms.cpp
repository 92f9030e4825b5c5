#include <cmath>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "twofirm/closed_forms.hpp"
#include "twofirm/mvh.hpp"

using namespace twofirm;
using twofirm::testing::ordered3;

namespace {

// E[Zbar_T^2] for constant intensity, jump control r, horizon T, by a
// trapezoid rule over the default time. Zbar_T = (1+r)^{H_T} exp(-r lambda (T ^ tau)).
double jump_second_moment_quadrature(double r, double lambda, double T) {
  const int n = 200000;
  const double h = T / n;
  double acc = 0.0;
  for (int k = 0; k <= n; ++k) {
    const double s = h * k;
    const double w = (k == 0 || k == n) ? 0.5 : 1.0;
    acc += w * (1 + r) * (1 + r) * std::exp(-2 * r * lambda * s) * lambda * std::exp(-lambda * s);
  }
  return acc * h + std::exp(-2 * r * lambda * T) * std::exp(-lambda * T);
}

}  // namespace

TEST_CASE("complete Brownian second moment") {
  CHECK(theta_complete_brownian(0.0, 0.2, 1.0, 0.0) == 1.0);
  CHECK(theta_complete_brownian(0.1, 0.2, 1.0, 0.0) == doctest::Approx(std::exp(-0.25)).epsilon(1e-12));
  CHECK(theta_complete_brownian(0.1, 0.2, 1.0, 1.0) == 1.0);
  // mu = 0.1 t, sigma = 0.2: int_0^1 (t/2)^2 dt = 1/12.
  CHECK(theta_complete_brownian(Poly{std::vector<double>{0.0, 0.1}}, 0.2, 1.0, 0.0) ==
        doctest::Approx(std::exp(-1.0 / 12.0)).epsilon(1e-10));
}

TEST_CASE("complete Brownian second moment against simulation") {
  // Zbar = exp(-(mu/sigma) W_T - (mu/sigma)^2 T / 2).
  const double q = 0.1 / 0.2;
  std::mt19937_64 eng{2024};
  std::normal_distribution<double> n01;
  const int n = 200000;
  double s = 0, s2 = 0;
  for (int i = 0; i < n; ++i) {
    const double z = std::exp(-q * n01(eng) - 0.5 * q * q);
    s += z * z;
    s2 += z * z * z * z;
  }
  const double mean = s / n, se = std::sqrt((s2 / n - mean * mean) / n);
  CHECK(std::abs(1.0 / theta_complete_brownian(0.1, 0.2, 1.0, 0.0) - mean) < 3 * se);
}

TEST_CASE("complete jump oracle against quadrature and simulation") {
  const double mu = 0.002, sA = 0.4, lA = 0.1;
  const double r = -mu / (lA * sA);
  CHECK(r == doctest::Approx(-0.05));
  const double theta0 = theta_complete_jump(mu, sA, lA, 1.0, 0.0);
  CHECK(1.0 / theta0 == doctest::Approx(jump_second_moment_quadrature(r, lA, 1.0)).epsilon(1e-9));

  std::mt19937_64 eng{77};
  std::exponential_distribution<double> expo{lA};
  const int n = 200000;
  double s = 0, s2 = 0;
  for (int i = 0; i < n; ++i) {
    const double tau = expo(eng);
    const double z = tau <= 1.0 ? (1 + r) * std::exp(-r * lA * tau) : std::exp(-r * lA);
    s += z * z;
    s2 += z * z * z * z;
  }
  const double mean = s / n, se = std::sqrt((s2 / n - mean * mean) / n);
  CHECK(std::abs(1.0 / theta0 - mean) < 3 * se);
}

TEST_CASE("complete jump trivial cases") {
  CHECK(theta_complete_jump(0.0, 0.4, 0.1, 1.0, 0.0) == 1.0);
  CHECK(theta_complete_jump(0.002, 0.4, 0.1, 1.0, 1.0) == 1.0);
  CHECK_THROWS_AS(theta_complete_jump(0.1, 0.4, 0.1, 1.0, 0.0), SignedMeasureError);
}

TEST_CASE("complete jump oracle matches the split solver") {
  StateCoeffs r0;
  r0.mu = 0.06; r0.sigmaA = -0.4; r0.lambdaA = 0.3;
  StateCoeffs r1;
  r1.sigma = 0.2;
  MvhGridSpec s;
  s.n_time = 200;
  s.n_space = 51;
  const BsdeFirstSolution f = solve_theta_split(ordered3(r0, r1, r1), 1.0, s);
  CHECK(f.at(0, 0.0, 0.0).Theta ==
        doctest::Approx(theta_complete_jump(0.06, -0.4, 0.3, 1.0, 0.0)).epsilon(1e-6));
}

TEST_CASE("VOM controls satisfy the martingale constraint and zero the j expression") {
  const NodeCoeffs c{0.06, 0.2, -0.3, 0.25, 0.3, 0.2};
  for (double thA : {-0.4, 0.0, 0.3})
    for (double beta : {-0.1, 0.0, 0.2}) {
      FirstNode node;
      node.Theta = 0.8;
      node.beta = beta;
      node.theta = {thA, -0.5 * thA};
      const DualControl q = vom_controls(node, c);
      CHECK(std::abs(martingale_residual(q, c)) < 1e-12);
      CHECK(std::abs(vom_j_expression(q, node, c)) < 1e-12);
      const auto id = vom_identity_residuals(q, node, c);
      for (double x : id) CHECK(std::abs(x) < 1e-12);
      // Any other admissible control gives a non-negative value.
      for (double dA : {-0.2, 0.1}) {
        DualControl other = q;
        other.rhoA += dA;
        other.rho = solve_rho(c, other.rhoA, other.rhoB);
        CHECK(vom_j_expression(other, node, c) >= -1e-14);
      }
    }
}

TEST_CASE("VOM controls vanish with zero drift and zero first-BSDE integrands") {
  const DualControl q = vom_controls(FirstNode{}, {0.0, 0.2, -0.3, 0.2, 0.3, 0.2});
  CHECK(q.rho == 0.0);
  CHECK(q.rhoA == 0.0);
  CHECK(q.rhoB == 0.0);
}

TEST_CASE("composite Gauss-Legendre quadrature") {
  CHECK(integrate([](double x) { return x * x; }, 0.0, 3.0) == doctest::Approx(9.0).epsilon(1e-14));
  CHECK(integrate([](double x) { return std::exp(x); }, 0.0, 1.0) ==
        doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-14));
}
