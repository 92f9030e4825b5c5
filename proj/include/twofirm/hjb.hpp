#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <vector>

#include "twofirm/claim.hpp"
#include "twofirm/controls.hpp"
#include "twofirm/grid.hpp"
#include "twofirm/model.hpp"

namespace twofirm {

struct RiskAversion {
  double delta = 1.0;
  explicit RiskAversion(double d);
};

// Entropy rate of the measure change plus the recovery payment term.
double running_cost_j(const DualControl& q, const NodeCoeffs& c, double f_value,
                      RiskAversion delta);

// Local data needed for the pointwise minimization at one grid node.
struct HjbNode {
  NodeCoeffs c;
  DefaultState state;
  double dV_A = 0.0;  // V(post-A default) - V
  double dV_B = 0.0;
  double V_y = 0.0;   // derivative in log-spot
  double f_value = 0.0;
};

struct ControlOptions {
  double foc_tol = 1e-10;
  int max_iter = 100;
};

struct ControlResult {
  DualControl control;
  double cost = 0.0;      // minimized jump terms plus j
  double residual = 0.0;  // max FOC residual
  int iterations = 0;
};

// Objective minimized at a node, as a function of the jump controls.
double hjb_objective(const HjbNode& node, double rhoA, double rhoB,
                     RiskAversion delta);
// Gradient of hjb_objective; vanishes at the optimum.
std::array<double, 2> hjb_foc(const HjbNode& node, double rhoA, double rhoB,
                              RiskAversion delta);

ControlResult minimize_controls(const HjbNode& node, RiskAversion delta,
                                const ControlOptions& opt = {},
                                const DualControl* warm = nullptr);

struct HjbGridSpec {
  std::size_t n_time = 100;
  std::size_t n_space = 201;
  double halfwidth_sd = 6.0;  // in terminal log-spot standard deviations
  ControlOptions control{};
  ExecPolicy policy = ExecPolicy::parallel;
};

// Per-state surfaces indexed [level * n_space + node].
struct ValueSurface {
  UniformGrid log_spot;
  std::vector<double> times;
  std::array<std::vector<double>, 4> V, dVdy, rhoA, rhoB, rho, pi;

  std::size_t n_levels() const { return times.size(); }
  std::size_t idx(std::size_t level, std::size_t j) const {
    return level * log_spot.n + j;
  }
  // Level whose controls apply on [t_level, t_level+1).
  std::size_t level_of(double t) const;
  double value(DefaultState h, std::size_t level, double y) const;
  double field(const std::array<std::vector<double>, 4>& f, DefaultState h,
               std::size_t level, double y) const;
};

struct HjbSolution {
  ValueSurface surface;
  double delta = 1.0;
  double d0 = 1.0;
  double max_foc_residual = 0.0;
  double max_constraint_residual = 0.0;
  // Value at (0, d0, (0,0)).
  double value0() const;
};

HjbSolution solve_hjb(const ModelParams& params, const DefaultableClaim& claim,
                      RiskAversion delta, double d0, const HjbGridSpec& spec);

// Money amount: -(V_y + rho/sigma)/delta, piecewise constant in time and
// linear in log-spot.
class HjbStrategy final : public Strategy {
 public:
  explicit HjbStrategy(const HjbSolution& sol) : sol_{&sol} {}
  double position(const HedgeInput& in) const override;

 private:
  const HjbSolution* sol_;
};

HjbStrategy optimal_strategy_hjb(const HjbSolution& sol);

// Stored optimal jump controls, with rho recomputed from the constraint.
class HjbControlField final : public ControlField {
 public:
  HjbControlField(const HjbSolution& sol, const ModelParams& params)
      : sol_{&sol}, params_{&params} {}
  DualControl at(double t, double spot, DefaultState h) const override;

 private:
  const HjbSolution* sol_;
  const ModelParams* params_;
};

struct IndifferenceResult {
  double price = 0.0;
  double V0_with = 0.0;
  double V0_without = 0.0;
  std::optional<double> grid_convergence_delta;
};

IndifferenceResult indifference_price(const ModelParams& params,
                                      const DefaultableClaim& claim,
                                      RiskAversion delta, double d0,
                                      const HjbGridSpec& spec,
                                      bool with_convergence = false);

HjbGridSpec halved(const HjbGridSpec& spec);

// Exhaustive dual minimization on a small discrete tree. Brownian moves use
// n_space Gauss-Hermite nodes; at most one default per period.
struct TreeOptions {
  int control_points = 41;
  int refine_rounds = 4;
  std::size_t max_nodes = 2'000'000;
};

double dual_value_bruteforce(const ModelParams& params, const DefaultableClaim& claim,
                             RiskAversion delta, double d0, int n_periods,
                             int n_space, const TreeOptions& opt = {});

// Gauss-Hermite rule for the standard normal law.
struct GaussHermite {
  std::vector<double> nodes, weights;
};
GaussHermite gauss_hermite_normal(int n);

}  // namespace twofirm
