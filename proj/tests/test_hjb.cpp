#include <cmath>
#include <numbers>

#include "doctest.h"
#include "helpers.hpp"
#include "twofirm/hjb.hpp"

using namespace twofirm;
using twofirm::testing::constant_params;

namespace {

const NodeCoeffs kGeneric{0.05, 0.2, -0.4, -0.3, 0.3, 0.2};

HjbGridSpec small_grid() {
  HjbGridSpec s;
  s.n_time = 50;
  s.n_space = 101;
  return s;
}

DefaultableClaim call_claim() {
  return DefaultableClaim::restricted_form(PayoffFunction::capped_call(1.0, 0.5),
                                           PayoffFunction::constant(0.3));
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("risk aversion must be positive") {
  CHECK_THROWS_AS(RiskAversion{0.0}, ValidationError);
  CHECK_THROWS_AS(RiskAversion{-1.0}, ValidationError);
  CHECK(RiskAversion{2.0}.delta == 2.0);
}

TEST_CASE("running cost examples") {
  const RiskAversion one{1.0};
  CHECK(running_cost_j({}, {0.0, 0.2, -0.4, 0.0, 0.1, 0.0}, 5.0, one) == 0.0);
  CHECK(running_cost_j({}, {0.0, 0.2, -0.4, -0.3, 0.1, 0.05}, 2.0, one) == doctest::Approx(-0.1));
  const DualControl q{std::numbers::e - 1.0, 0.0, 0.0};
  CHECK(running_cost_j(q, {0.0, 0.3, 0.0, 0.0, 0.1, 0.0}, 0.0, one) == doctest::Approx(0.1));
  CHECK_THROWS_AS(running_cost_j({-1.0, 0.0, 0.0}, kGeneric, 0.0, one), DomainError);
}

TEST_CASE("zero drift, zero claim: the zero control is optimal") {
  HjbNode node;
  node.c = {0.0, 0.2, -0.4, -0.3, 0.3, 0.2};
  const ControlResult r = minimize_controls(node, RiskAversion{1.0});
  CHECK(std::abs(r.control.rhoA) < 1e-12);
  CHECK(std::abs(r.control.rhoB) < 1e-12);
  CHECK(std::abs(r.control.rho) < 1e-12);
  CHECK(std::abs(r.cost) < 1e-14);
}

TEST_CASE("pointwise minimization solves the first-order conditions") {
  const RiskAversion delta{1.5};
  for (const double dV : {-0.3, 0.0, 0.2, 0.7}) {
    HjbNode node;
    node.c = kGeneric;
    node.dV_A = dV;
    node.dV_B = -0.5 * dV;
    node.V_y = 0.1 * dV;
    node.f_value = 0.4;
    const ControlResult r = minimize_controls(node, delta);
    CHECK(r.residual <= 1e-10);
    CHECK(std::abs(martingale_residual(r.control, node.c)) < 1e-12);
    const double best = hjb_objective(node, r.control.rhoA, r.control.rhoB, delta);
    CHECK(best == doctest::Approx(r.cost).epsilon(1e-12));
    for (const double h : {-0.05, 0.05})
      for (int axis = 0; axis < 2; ++axis) {
        const double a = r.control.rhoA + (axis == 0 ? h : 0.0);
        const double b = r.control.rhoB + (axis == 1 ? h : 0.0);
        CHECK(hjb_objective(node, a, b, delta) >= best - 1e-14);
      }
  }
}

TEST_CASE("hjb_foc is the gradient of hjb_objective") {
  const RiskAversion delta{0.8};
  HjbNode node;
  node.c = kGeneric;
  node.dV_A = 0.2;
  node.dV_B = -0.1;
  node.V_y = 0.05;
  node.f_value = 0.3;
  const double a = 0.1, b = -0.2, h = 1e-6;
  const auto g = hjb_foc(node, a, b, delta);
  const double ga = (hjb_objective(node, a + h, b, delta) - hjb_objective(node, a - h, b, delta)) / (2 * h);
  const double gb = (hjb_objective(node, a, b + h, delta) - hjb_objective(node, a, b - h, delta)) / (2 * h);
  CHECK(g[0] == doctest::Approx(ga).epsilon(1e-6));
  CHECK(g[1] == doctest::Approx(gb).epsilon(1e-6));
}

TEST_CASE("zero drift and zero claim give V identically zero") {
  const ModelParams p = constant_params({0.0, 0.2, -0.4, -0.3, 0.3, 0.2});
  const HjbSolution s = solve_hjb(p, DefaultableClaim::zero(), RiskAversion{1.0}, 1.0, small_grid());
  for (const auto& V : s.surface.V)
    for (double v : V) CHECK(std::abs(v) < 1e-13);
  const HjbStrategy pi = optimal_strategy_hjb(s);
  for (DefaultState h : kAllStates)
    CHECK(std::abs(pi.position({0.3, 1.1, 0.0, h, 1.0})) < 1e-12);
}

TEST_CASE("constant claim shifts V by -delta K and leaves the strategy alone") {
  const ModelParams p = constant_params(kGeneric);
  const RiskAversion delta{1.3};
  const double K = 0.25;
  const HjbSolution base = solve_hjb(p, DefaultableClaim::zero(), delta, 1.0, small_grid());
  const HjbSolution cash = solve_hjb(p, DefaultableClaim::constant(K), delta, 1.0, small_grid());
  CHECK(cash.value0() == doctest::Approx(base.value0() - delta.delta * K).epsilon(1e-10));
  for (int k = 0; k < 4; ++k) {
    // Once B has defaulted the recovery has been paid, so no shift remains.
    const double shift = DefaultState::from_index(k).hB == 0 ? delta.delta * K : 0.0;
    std::vector<double> shifted = base.surface.V[k];
    for (double& v : shifted) v -= shift;
    CHECK(max_abs_diff(shifted, cash.surface.V[k]) < 1e-10);
    CHECK(max_abs_diff(base.surface.pi[k], cash.surface.pi[k]) < 1e-9);
  }
}

TEST_CASE("terminal slice is -delta g on survival of B") {
  const ModelParams p = constant_params(kGeneric);
  const RiskAversion delta{1.0};
  const DefaultableClaim claim = call_claim();
  const HjbSolution s = solve_hjb(p, claim, delta, 1.0, small_grid());
  const ValueSurface& v = s.surface;
  const std::size_t last = v.n_levels() - 1;
  for (std::size_t j = 0; j < v.log_spot.n; ++j) {
    const double x = std::exp(v.log_spot.at(j));
    CHECK(v.V[DefaultState{0, 0}.index()][v.idx(last, j)] == doctest::Approx(-claim.g()(x)));
    CHECK(v.V[DefaultState{1, 1}.index()][v.idx(last, j)] == 0.0);
  }
}

TEST_CASE("solver residuals stay below tolerance") {
  const ModelParams p = constant_params(kGeneric);
  const HjbSolution s = solve_hjb(p, call_claim(), RiskAversion{1.0}, 1.0, small_grid());
  CHECK(s.max_foc_residual <= 1e-8);
  CHECK(s.max_constraint_residual <= 1e-10);
  CHECK(std::isfinite(s.value0()));
}

TEST_CASE("indifference price: zero, cash, monotone") {
  const ModelParams p = constant_params(kGeneric);
  const RiskAversion delta{1.0};
  const auto spec = small_grid();
  CHECK(indifference_price(p, DefaultableClaim::zero(), delta, 1.0, spec).price == 0.0);
  CHECK(indifference_price(p, DefaultableClaim::constant(0.4), delta, 1.0, spec).price ==
        doctest::Approx(0.4).epsilon(1e-10));
  const DefaultableClaim c = call_claim();
  const double base = indifference_price(p, c, delta, 1.0, spec).price;
  const double shifted = indifference_price(p, c.shifted(0.25), delta, 1.0, spec).price;
  CHECK(std::abs(shifted - (base + 0.25)) <= 1e-6 * std::abs(base + 0.25));
  double prev = -1.0;
  for (double cap : {0.1, 0.2, 0.4}) {
    const auto claim = DefaultableClaim::restricted_form(PayoffFunction::capped_call(1.0, cap),
                                                         PayoffFunction::constant(0.0));
    const double price = indifference_price(p, claim, delta, 1.0, spec).price;
    CHECK(price > prev);
    prev = price;
  }
}

TEST_CASE("indifference price reports grid convergence when asked") {
  const ModelParams p = constant_params(kGeneric);
  const auto r = indifference_price(p, call_claim(), RiskAversion{1.0}, 1.0, small_grid(), true);
  REQUIRE(r.grid_convergence_delta.has_value());
  CHECK(std::abs(*r.grid_convergence_delta) < 1e-2);
}

TEST_CASE("coarse grids are refused") {
  const ModelParams p = constant_params({0.05, 0.2, -0.4, -0.3, 30.0, 20.0});
  HjbGridSpec s = small_grid();
  s.n_time = 2;
  CHECK_THROWS_AS(solve_hjb(p, call_claim(), RiskAversion{1.0}, 1.0, s), ValidationError);
}

TEST_CASE("zero volatility is refused") {
  const ModelParams p = constant_params({0.0, 0.0, -0.4, 0.0, 0.1, 0.0});
  CHECK_THROWS_AS(solve_hjb(p, DefaultableClaim::zero(), RiskAversion{1.0}, 1.0, small_grid()),
                  ValidationError);
}

TEST_CASE("serial and parallel HJB sweeps are bit-identical") {
  const ModelParams p = constant_params(kGeneric);
  HjbGridSpec a = small_grid(), b = small_grid();
  a.policy = ExecPolicy::serial;
  b.policy = ExecPolicy::parallel;
  const HjbSolution sa = solve_hjb(p, call_claim(), RiskAversion{1.0}, 1.0, a);
  const HjbSolution sb = solve_hjb(p, call_claim(), RiskAversion{1.0}, 1.0, b);
  for (int k = 0; k < 4; ++k) {
    CHECK(sa.surface.V[k] == sb.surface.V[k]);
    CHECK(sa.surface.pi[k] == sb.surface.pi[k]);
  }
}

TEST_CASE("Gauss-Hermite rule integrates normal moments") {
  const GaussHermite gh = gauss_hermite_normal(7);
  double m0 = 0, m2 = 0, m4 = 0;
  for (std::size_t i = 0; i < gh.nodes.size(); ++i) {
    const double x = gh.nodes[i], w = gh.weights[i];
    m0 += w;
    m2 += w * x * x;
    m4 += w * x * x * x * x;
  }
  CHECK(m0 == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(m2 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(m4 == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("tree oracle trivial cases") {
  const RiskAversion delta{1.0};
  const ModelParams zero_drift = constant_params({0.0, 0.2, -0.4, -0.3, 0.3, 0.2});
  CHECK(std::abs(dual_value_bruteforce(zero_drift, DefaultableClaim::zero(), delta, 1.0, 2, 5)) < 1e-10);

  const ModelParams p = constant_params(kGeneric);
  const double base = dual_value_bruteforce(p, DefaultableClaim::zero(), delta, 1.0, 2, 5);
  const double cash = dual_value_bruteforce(p, DefaultableClaim::constant(0.3), delta, 1.0, 2, 5);
  CHECK(cash == doctest::Approx(base - 0.3).epsilon(1e-8));
}

TEST_CASE("tree value approaches the HJB value as periods grow") {
  const ModelParams p = constant_params(kGeneric);
  const RiskAversion delta{1.0};
  const DefaultableClaim claim = call_claim();
  HjbGridSpec spec;
  spec.n_time = 100;
  spec.n_space = 201;
  const double hjb = solve_hjb(p, claim, delta, 1.0, spec).value0();
  const double t1 = dual_value_bruteforce(p, claim, delta, 1.0, 1, 7);
  const double t3 = dual_value_bruteforce(p, claim, delta, 1.0, 3, 7);
  CHECK(std::abs(t3 - hjb) < std::abs(t1 - hjb));
}
