#include "twofirm/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "twofirm/closed_forms.hpp"
#include "twofirm/rng.hpp"

namespace twofirm {

McEstimate summarize(std::span<const double> xs, std::uint64_t seed) {
  McEstimate e;
  e.n_paths = xs.size();
  e.seed = seed;
  if (xs.empty()) return e;
  e.mean = pairwise_sum(xs) / static_cast<double>(xs.size());
  if (xs.size() < 2) return e;
  std::vector<double> sq(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) sq[i] = (xs[i] - e.mean) * (xs[i] - e.mean);
  const double var = pairwise_sum(sq) / static_cast<double>(xs.size() - 1);
  e.stderr = std::sqrt(var / static_cast<double>(xs.size()));
  return e;
}

McEstimate estimate_hedge_error(const McSetup& mc, const DefaultableClaim& claim,
                                const Strategy& strategy, double x0) {
  const ModelParams& p = mc.sim.params();
  const auto xs = per_path(mc.sim, mc.n_paths, mc.policy, [&](std::size_t, const MarketPath& path) {
    const double e = terminal_wealth(p, path, strategy, x0) - claim_payoff(claim, path, p.horizon);
    return e * e;
  });
  return summarize(xs, mc.seed());
}

double density_weight(const ModelParams& params, const MarketPath& path,
                      const ControlField& controls) {
  double logw = 0.0, factor = 1.0;
  for (std::size_t j = 1; j < path.size(); ++j) {
    const DefaultState h = path.regime_index[j - 1];
    const double t0 = path.time_grid[j - 1];
    const double dt = path.time_grid[j] - t0;
    const NodeCoeffs c = params.at(t0, h);
    const DualControl q = controls.at(t0, path.bond[j - 1], h);
    logw += q.rho * path.brownian_increments[j] - 0.5 * q.rho * q.rho * dt;
    if (h.alive(Firm::A)) logw -= q.rhoA * c.lambdaA * dt;
    if (h.alive(Firm::B)) logw -= q.rhoB * c.lambdaB * dt;
    const DefaultState h1 = path.regime_index[j];
    if (h1 != h) {
      const Firm f = h1.hA != h.hA ? Firm::A : Firm::B;
      const double tj = path.time_grid[j];
      const double spot = f == Firm::A ? path.bond_before_tauA : path.bond_before_tauB;
      const DualControl qj = controls.at(tj, spot, h);
      const double jump = 1.0 + (f == Firm::A ? qj.rhoA : qj.rhoB);
      if (!(jump > 0.0)) throw SignedMeasureError("signed density; VOM only as signed measure");
      factor *= jump;
    }
  }
  return factor * std::exp(logw);
}

std::vector<double> density_weights(const McSetup& mc, const ControlField& controls) {
  const ModelParams& p = mc.sim.params();
  return per_path(mc.sim, mc.n_paths, mc.policy, [&](std::size_t, const MarketPath& path) {
    return density_weight(p, path, controls);
  });
}

McEstimate weight_mean(const McSetup& mc, const ControlField& controls) {
  return summarize(density_weights(mc, controls), mc.seed());
}

McEstimate reweighted_terminal_bond(const McSetup& mc, const ControlField& controls) {
  const ModelParams& p = mc.sim.params();
  const auto xs = per_path(mc.sim, mc.n_paths, mc.policy, [&](std::size_t, const MarketPath& path) {
    return density_weight(p, path, controls) * path.bond.back();
  });
  return summarize(xs, mc.seed());
}

McEstimate measure_changed_expectation(const McSetup& mc, const ControlField& controls,
                                       const DefaultableClaim& claim) {
  const ModelParams& p = mc.sim.params();
  const auto xs = per_path(mc.sim, mc.n_paths, mc.policy, [&](std::size_t, const MarketPath& path) {
    return density_weight(p, path, controls) * claim_payoff(claim, path, p.horizon);
  });
  return summarize(xs, mc.seed());
}

McEstimate entropy_dual_estimate(const McSetup& mc, const ControlField& controls,
                                 const DefaultableClaim& claim, double delta) {
  const ModelParams& p = mc.sim.params();
  const auto xs = per_path(mc.sim, mc.n_paths, mc.policy, [&](std::size_t, const MarketPath& path) {
    const double w = density_weight(p, path, controls);
    return w * (std::log(w) - delta * claim_payoff(claim, path, p.horizon));
  });
  return summarize(xs, mc.seed());
}

VomReport vom_moment_check(const BsdeFirstSolution& first, const McSetup& mc) {
  const ModelParams& p = mc.sim.params();
  const VomControlField field{first, p};
  const auto xs = per_path(mc.sim, mc.n_paths, mc.policy, [&](std::size_t, const MarketPath& path) {
    const double w = density_weight(p, path, field);
    return w * w;
  });
  VomReport r;
  r.theta0 = first.at(0, 0.0, std::log(mc.sim.spec().d0)).Theta;
  r.second_moment = summarize(xs, mc.seed());
  r.product = r.theta0 * r.second_moment.mean;
  r.product_stderr = r.theta0 * r.second_moment.stderr;
  r.pass = std::abs(r.product - 1.0) <= 3.0 * r.product_stderr + 1e-12;
  return r;
}

McEstimate xi_integral_estimate(const McSetup& mc, const MvhSolution& sol) {
  const MvhGrid& g = sol.first.grid;
  const auto xs = per_path(mc.sim, mc.n_paths, mc.policy, [&](std::size_t, const MarketPath& path) {
    double acc = 0.0;
    for (std::size_t j = 1; j < path.size(); ++j) {
      const DefaultState h = path.regime_index[j - 1];
      const int k = regime_of(h);
      if (k == 2) continue;
      const double t0 = path.time_grid[j - 1];
      const double dt = path.time_grid[j] - t0;
      const std::size_t n = std::min(g.level_of(t0), g.n_levels() - 2);
      const double y = std::log(path.bond[j - 1]);
      const double s = g.log_spot.step;
      // Interpolate the node-wise source linearly in log-spot.
      const double pos = std::clamp((y - g.log_spot.lo) / s, 0.0,
                                    static_cast<double>(g.log_spot.n - 1) - 1e-12);
      const auto j0 = static_cast<std::size_t>(pos);
      const double w = pos - static_cast<double>(j0);
      auto src = [&](std::size_t jj) {
        const MvhCoefficients m = sol.coefficients(k, n, jj);
        const double th = sol.first.Theta[k][g.idx(n, jj)];
        return th * (m.v - (m.a > 0.0 ? m.c * m.c / m.a : 0.0));
      };
      acc += ((1.0 - w) * src(j0) + w * src(j0 + 1)) * dt;
    }
    return acc;
  });
  return summarize(xs, mc.seed());
}

double hedge_loss(HedgeObjective obj, double delta, double x, double psi) {
  if (obj == HedgeObjective::squared_error) return (x - psi) * (x - psi);
  return std::exp(-delta * (x - psi));
}

BumpedStrategy::BumpedStrategy(const Strategy& base, double scale, std::uint64_t bump_seed,
                               std::size_t bump_id, double horizon, double log_spot_center)
    : base_{&base}, scale_{scale}, horizon_{horizon}, y0_{log_spot_center} {
  std::mt19937_64 eng{splitmix64(splitmix64(bump_seed) ^ splitmix64(bump_id + 1))};
  std::normal_distribution<double> n{0.0, 1.0};
  std::uniform_real_distribution<double> u{0.0, 2.0 * std::numbers::pi};
  c0_ = n(eng);
  c1_ = n(eng);
  c2_ = n(eng);
  w1_ = 1.0 + 2.0 * std::uniform_real_distribution<double>{0.0, 1.0}(eng);
  w2_ = 1.0 + 4.0 * std::uniform_real_distribution<double>{0.0, 1.0}(eng);
  p1_ = u(eng);
  p2_ = u(eng);
}

double BumpedStrategy::eta(double t, double y) const {
  return c0_ + c1_ * std::sin(w1_ * std::numbers::pi * t / horizon_ + p1_) +
         c2_ * std::cos(w2_ * (y - y0_) + p2_);
}

double BumpedStrategy::position(const HedgeInput& in) const {
  return base_->position(in) + scale_ * eta(in.t, std::log(in.spot));
}

PerturbationTable perturbation_test(const McSetup& mc, const DefaultableClaim& claim,
                                    const Strategy& base, double x0,
                                    const PerturbationSpec& spec) {
  const ModelParams& p = mc.sim.params();
  const double y0 = std::log(mc.sim.spec().d0);
  std::vector<BumpedStrategy> bumps;
  bumps.reserve(spec.n_bumps);
  for (std::size_t b = 0; b < spec.n_bumps; ++b)
    bumps.emplace_back(base, spec.bump_scale, spec.bump_seed, b, p.horizon, y0);

  const std::size_t S = spec.n_bumps + 1;
  std::vector<double> losses(mc.n_paths * S);
  for_each_index<MarketPath>(mc.n_paths, mc.policy, [&](std::size_t i, MarketPath& path) {
    mc.sim.generate(i, path);
    const double psi = claim_payoff(claim, path, p.horizon);
    for (std::size_t s = 0; s < S; ++s) {
      const Strategy& st = s == 0 ? base : static_cast<const Strategy&>(bumps[s - 1]);
      losses[i * S + s] = hedge_loss(spec.objective, spec.delta, terminal_wealth(p, path, st, x0), psi);
    }
  });

  auto column = [&](std::size_t s) {
    std::vector<double> v(mc.n_paths);
    for (std::size_t i = 0; i < mc.n_paths; ++i) v[i] = losses[i * S + s];
    return v;
  };
  PerturbationTable t;
  const auto base_col = column(0);
  t.base = summarize(base_col, mc.seed());
  for (std::size_t b = 0; b < spec.n_bumps; ++b) {
    const auto col = column(b + 1);
    std::vector<double> diff(mc.n_paths);
    for (std::size_t i = 0; i < mc.n_paths; ++i) diff[i] = col[i] - base_col[i];
    PerturbationRow r;
    r.bump_id = b;
    r.cost = summarize(col, mc.seed());
    const McEstimate d = summarize(diff, mc.seed());
    r.diff_mean = d.mean;
    r.diff_stderr = d.stderr;
    r.combined_stderr = std::hypot(r.cost.stderr, t.base.stderr);
    r.violation = r.cost.mean < t.base.mean - 3.0 * r.combined_stderr;
    t.n_violations += r.violation;
    t.rows.push_back(r);
  }
  return t;
}

CostProcessReport cost_process_check(const McSetup& mc, const MvhSolution& sol,
                                     const Strategy& strategy, double x0,
                                     std::size_t stride) {
  const ModelParams& p = mc.sim.params();
  const std::size_t steps = mc.sim.spec().n_steps;
  stride = std::max<std::size_t>(stride, 1);
  std::vector<std::size_t> marks;
  for (std::size_t k = stride; k < steps; k += stride) marks.push_back(k);
  marks.push_back(steps);
  const double dt_grid = p.horizon / static_cast<double>(steps);
  auto grid_time = [&](std::size_t k) { return k == steps ? p.horizon : dt_grid * static_cast<double>(k); };

  const std::size_t M = marks.size();
  std::vector<double> J(mc.n_paths * M);
  for_each_index<MarketPath>(mc.n_paths, mc.policy, [&](std::size_t i, MarketPath& path) {
    mc.sim.generate(i, path);
    const auto X = simulate_wealth(p, path, strategy, x0);
    std::size_t m = 0;
    for (std::size_t j = 1; j < path.size() && m < M; ++j) {
      const double tm = grid_time(marks[m]);
      if (path.time_grid[j] != tm) continue;
      const DefaultState h = path.regime_index[j];
      const double preB = h.hB ? path.bond_before_tauB : 0.0;
      J[i * M + m] = marks[m] == steps
                         ? (X[j] - claim_payoff(sol.claim, path, p.horizon)) *
                               (X[j] - claim_payoff(sol.claim, path, p.horizon))
                         : sol.J(tm, path.bond[j], X[j], h, preB);
      ++m;
    }
  });

  CostProcessReport r;
  r.J0 = sol.J(0.0, mc.sim.spec().d0, x0, DefaultState{}, 0.0);
  for (std::size_t m = 0; m < M; ++m) {
    std::vector<double> col(mc.n_paths);
    for (std::size_t i = 0; i < mc.n_paths; ++i) col[i] = J[i * M + m];
    const McEstimate e = summarize(col, mc.seed());
    r.times.push_back(grid_time(marks[m]));
    r.J.push_back(e);
    const double dev = std::abs(e.mean - r.J0);
    r.max_abs_dev = std::max(r.max_abs_dev, dev);
    if (e.stderr > 0.0) r.max_dev_over_stderr = std::max(r.max_dev_over_stderr, dev / e.stderr);
    else if (dev > 1e-12) r.max_dev_over_stderr = std::numeric_limits<double>::infinity();
  }
  r.terminal = r.J.back();
  return r;
}

MonteCarloPrice mc_indifference_price(const McSetup& mc, const DefaultableClaim& claim,
                                      const Strategy& with_claim,
                                      const Strategy& without_claim, double x0,
                                      double delta) {
  const ModelParams& p = mc.sim.params();
  std::vector<double> a(mc.n_paths), b(mc.n_paths);
  for_each_index<MarketPath>(mc.n_paths, mc.policy, [&](std::size_t i, MarketPath& path) {
    mc.sim.generate(i, path);
    const double psi = claim_payoff(claim, path, p.horizon);
    a[i] = std::exp(-delta * (terminal_wealth(p, path, with_claim, x0) - x0 - psi));
    b[i] = std::exp(-delta * (terminal_wealth(p, path, without_claim, x0) - x0));
  });
  const McEstimate A = summarize(a, mc.seed()), B = summarize(b, mc.seed());
  // Expected utility gap as a function of the premium; increasing in p.
  auto gap = [&](double prem) { return -std::exp(-delta * prem) * A.mean + B.mean; };
  double lo = -1.0, hi = 1.0;
  while (gap(lo) > 0.0) lo *= 2.0;
  while (gap(hi) < 0.0) hi *= 2.0;
  MonteCarloPrice r;
  for (; r.bisection_steps < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++r.bisection_steps) {
    const double mid = 0.5 * (lo + hi);
    if (gap(mid) < 0.0) lo = mid; else hi = mid;
  }
  r.price = 0.5 * (lo + hi);
  // Delta method on p = (ln A - ln B)/delta.
  std::vector<double> lin(mc.n_paths);
  for (std::size_t i = 0; i < mc.n_paths; ++i) lin[i] = a[i] / A.mean - b[i] / B.mean;
  r.stderr = summarize(lin, mc.seed()).stderr / delta;
  return r;
}

}  // namespace twofirm
