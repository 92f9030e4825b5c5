#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "twofirm/claim.hpp"
#include "twofirm/controls.hpp"
#include "twofirm/model.hpp"
#include "twofirm/mvh.hpp"

namespace twofirm {

struct McEstimate {
  double mean = 0.0;
  double stderr = 0.0;
  std::size_t n_paths = 0;
  std::uint64_t seed = 0;
};

// Sample mean and standard error with fixed-order summation.
McEstimate summarize(std::span<const double> samples, std::uint64_t seed);

// Evaluates fn(path_id, path) -> double for every path of the family and
// returns the per-path values in path order.
template <class Fn>
std::vector<double> per_path(const PathSimulator& sim, std::size_t n_paths, ExecPolicy policy,
                             Fn&& fn) {
  std::vector<double> out(n_paths);
  for_each_index<MarketPath>(n_paths, policy, [&](std::size_t i, MarketPath& path) {
    sim.generate(i, path);
    out[i] = fn(i, path);
  });
  return out;
}

struct McSetup {
  PathSimulator sim;
  std::size_t n_paths = 10000;
  ExecPolicy policy = ExecPolicy::parallel;

  std::uint64_t seed() const { return sim.spec().seed; }
};

McEstimate estimate_hedge_error(const McSetup& mc, const DefaultableClaim& claim,
                                const Strategy& strategy, double x0);

// Stochastic exponential of the controls along one path.
double density_weight(const ModelParams& params, const MarketPath& path,
                      const ControlField& controls);
std::vector<double> density_weights(const McSetup& mc, const ControlField& controls);

McEstimate weight_mean(const McSetup& mc, const ControlField& controls);
// E[w * D_T]; equals d0 for a martingale measure.
McEstimate reweighted_terminal_bond(const McSetup& mc, const ControlField& controls);
// E[w * psi].
McEstimate measure_changed_expectation(const McSetup& mc, const ControlField& controls,
                                       const DefaultableClaim& claim);
// E[w (ln w - delta psi)].
McEstimate entropy_dual_estimate(const McSetup& mc, const ControlField& controls,
                                 const DefaultableClaim& claim, double delta);

struct VomReport {
  double theta0 = 1.0;
  McEstimate second_moment;  // E[Zbar_T^2]
  double product = 1.0;      // theta0 * E[Zbar_T^2]
  double product_stderr = 0.0;
  bool pass = false;
};

VomReport vom_moment_check(const BsdeFirstSolution& first, const McSetup& mc);

// Path average of int Theta (v - c^2/a) dt, the tracking-error integral.
McEstimate xi_integral_estimate(const McSetup& mc, const MvhSolution& sol);

enum class HedgeObjective { squared_error, exponential_utility };

// Loss minimized by the optimal strategy: (X-psi)^2 or exp(-delta (X-psi)).
double hedge_loss(HedgeObjective obj, double delta, double terminal_wealth, double payoff);

// base + scale * eta(t, log spot) with eta a random smooth bump.
class BumpedStrategy final : public Strategy {
 public:
  BumpedStrategy(const Strategy& base, double scale, std::uint64_t bump_seed,
                 std::size_t bump_id, double horizon, double log_spot_center);
  double position(const HedgeInput& in) const override;
  double eta(double t, double y) const;

 private:
  const Strategy* base_;
  double scale_, horizon_, y0_;
  double c0_, c1_, c2_, w1_, w2_, p1_, p2_;
};

// factor * base + offset.
class AffineStrategy final : public Strategy {
 public:
  AffineStrategy(const Strategy& base, double factor, double offset)
      : base_{&base}, factor_{factor}, offset_{offset} {}
  double position(const HedgeInput& in) const override {
    return factor_ * base_->position(in) + offset_;
  }

 private:
  const Strategy* base_;
  double factor_, offset_;
};

struct PerturbationRow {
  std::size_t bump_id = 0;
  McEstimate cost;
  double diff_mean = 0.0;      // bumped minus base
  double diff_stderr = 0.0;    // paired
  double combined_stderr = 0.0;
  bool violation = false;
};

struct PerturbationTable {
  McEstimate base;
  std::vector<PerturbationRow> rows;
  std::size_t n_violations = 0;
};

struct PerturbationSpec {
  std::size_t n_bumps = 10;
  double bump_scale = 0.1;
  std::uint64_t bump_seed = 7;
  HedgeObjective objective = HedgeObjective::squared_error;
  double delta = 1.0;
};

PerturbationTable perturbation_test(const McSetup& mc, const DefaultableClaim& claim,
                                    const Strategy& base, double x0,
                                    const PerturbationSpec& spec);

struct CostProcessReport {
  double J0 = 0.0;
  std::vector<double> times;
  std::vector<McEstimate> J;
  double max_abs_dev = 0.0;        // max_t |E J_t - J0|
  double max_dev_over_stderr = 0.0;
  McEstimate terminal;             // E[J_T]
};

CostProcessReport cost_process_check(const McSetup& mc, const MvhSolution& sol,
                                     const Strategy& strategy, double x0,
                                     std::size_t monitor_stride = 10);

struct MonteCarloPrice {
  double price = 0.0;
  double stderr = 0.0;
  int bisection_steps = 0;
};

// Root p of E[U(x + p + G_psi - psi)] = E[U(x + G_0)] for exponential U, by
// bisection on the simulated sample.
MonteCarloPrice mc_indifference_price(const McSetup& mc, const DefaultableClaim& claim,
                                      const Strategy& with_claim,
                                      const Strategy& without_claim, double x0,
                                      double delta);

}  // namespace twofirm
