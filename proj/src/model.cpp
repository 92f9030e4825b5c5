#include "twofirm/model.hpp"

#include <cmath>
#include <sstream>

#include "twofirm/rng.hpp"

namespace twofirm {

std::string DefaultState::label() const {
  return "(" + std::to_string(hA) + "," + std::to_string(hB) + ")";
}

bool StateCoeffs::is_constant() const {
  return mu.is_constant() && sigma.is_constant() && sigmaA.is_constant() &&
         sigmaB.is_constant() && lambdaA.is_constant() && lambdaB.is_constant();
}

bool ModelParams::constant_per_state() const {
  for (const auto& s : states)
    if (!s.is_constant()) return false;
  return true;
}

ModelParams constant_model(const NodeCoeffs& c, double horizon, bool ordered) {
  ModelParams p;
  p.horizon = horizon;
  p.ordered_defaults = ordered;
  for (DefaultState h : kAllStates) {
    StateCoeffs& s = p[h];
    s.mu = c.mu;
    s.sigma = c.sigma;
    s.sigmaA = c.sigmaA;
    s.sigmaB = c.sigmaB;
    s.lambdaA = h.hA ? 0.0 : c.lambdaA;
    s.lambdaB = h.hB ? 0.0 : c.lambdaB;
  }
  if (ordered) p[DefaultState{0, 0}].lambdaB = 0.0;
  return p;
}

namespace {

std::string at_state(DefaultState h, double t) {
  std::ostringstream os;
  os << " in state " << h.label() << " at t=" << t;
  return os.str();
}

}  // namespace

ModelParams validate_params(ModelParams p) {
  if (!(std::isfinite(p.horizon) && p.horizon > 0.0))
    throw ValidationError("horizon must be positive and finite");

  for (DefaultState h : kAllStates) {
    const StateCoeffs& s = p[h];
    for (std::size_t k = 0; k < kInvariantSamples; ++k) {
      const double t = p.horizon * static_cast<double>(k) /
                       static_cast<double>(kInvariantSamples - 1);
      const NodeCoeffs c = s.at(t);
      for (double v : {c.mu, c.sigma, c.sigmaA, c.sigmaB, c.lambdaA, c.lambdaB})
        if (!std::isfinite(v))
          throw ValidationError("non-finite coefficient" + at_state(h, t));
      if (c.sigma < 0.0)
        throw ValidationError("negative volatility: sigma < 0" + at_state(h, t));
      if (1.0 + c.sigmaA <= 0.0)
        throw ValidationError("bond positivity violated: 1+sigmaA <= 0" +
                              at_state(h, t));
      if (1.0 + c.sigmaB <= 0.0)
        throw ValidationError("bond positivity violated: 1+sigmaB <= 0" +
                              at_state(h, t));
      if (c.lambdaA < 0.0)
        throw ValidationError("negative intensity: lambdaA < 0" + at_state(h, t));
      if (c.lambdaB < 0.0)
        throw ValidationError("negative intensity: lambdaB < 0" + at_state(h, t));
      if (h.hA == 1 && c.lambdaA != 0.0)
        throw ValidationError("firm A defaults once: lambdaA must vanish" +
                              at_state(h, t));
      if (h.hB == 1 && c.lambdaB != 0.0)
        throw ValidationError("firm B defaults once: lambdaB must vanish" +
                              at_state(h, t));
      if (p.ordered_defaults && h == DefaultState{0, 0} && c.lambdaB != 0.0)
        throw ValidationError(
            "ordered mode requires lambdaB=0 before tauA" + at_state(h, t));
    }
  }
  if (p.ordered_defaults) p[DefaultState{0, 0}].lambdaB = Poly{0.0};
  return p;
}

void require_positive_sigma(const ModelParams& p) {
  for (DefaultState h : kAllStates) {
    if (p.ordered_defaults && h == DefaultState{0, 1}) continue;
    for (std::size_t k = 0; k < kInvariantSamples; ++k) {
      const double t = p.horizon * static_cast<double>(k) /
                       static_cast<double>(kInvariantSamples - 1);
      if (!(p.at(t, h).sigma > 0.0))
        throw ValidationError(
            "complete-jump case not supported in HJB module; see closed_forms" +
            at_state(h, t));
    }
  }
}

void MarketPath::clear() {
  time_grid.clear();
  brownian_increments.clear();
  bond.clear();
  regime_index.clear();
  tauA = tauB = kNoDefault;
  bond_before_tauA = bond_before_tauB = 0.0;
  overflow = false;
}

PathSimulator::PathSimulator(const ModelParams& validated, SimulationSpec spec)
    : params_{validated}, spec_{spec} {
  if (spec_.n_steps < 1) throw ValidationError("n_steps must be at least 1");
  if (!(spec_.d0 > 0.0 && std::isfinite(spec_.d0)))
    throw ValidationError("d0 must be positive");
}

namespace {

// Smallest s in (t0, T] with integral of lambda over [t0, s] equal to e, or
// +inf when the clock does not ring before T.
double ring_time(const Poly& lambda, double t0, double horizon, double e) {
  if (lambda.is_constant()) {
    const double l = lambda(t0);
    if (l <= 0.0) return kNoDefault;
    const double s = t0 + e / l;
    return s <= horizon ? s : kNoDefault;
  }
  if (lambda.integral(t0, horizon) < e) return kNoDefault;
  double lo = t0, hi = horizon;
  for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (lambda.integral(t0, mid) < e) lo = mid; else hi = mid;
  }
  return hi;
}

}  // namespace

void PathSimulator::generate(std::size_t path_id, MarketPath& path) const {
  path.clear();
  const double T = params_.horizon;
  const std::size_t n = spec_.n_steps;
  const double dt_grid = T / static_cast<double>(n);
  auto eng = path_engine(spec_.seed, path_id);
  std::normal_distribution<double> normal{0.0, 1.0};
  std::exponential_distribution<double> expo{1.0};

  path.time_grid.reserve(n + 3);
  path.brownian_increments.reserve(n + 3);
  path.bond.reserve(n + 3);
  path.regime_index.reserve(n + 3);

  DefaultState h{};
  double t = 0.0;
  double y = std::log(spec_.d0);
  path.time_grid.push_back(0.0);
  path.brownian_increments.push_back(0.0);
  path.bond.push_back(spec_.d0);
  path.regime_index.push_back(h);

  std::size_t next_grid = 1;
  while (true) {
    // Fresh clocks for the firms alive in this regime.
    double tau_next = kNoDefault;
    Firm who = Firm::A;
    for (Firm f : {Firm::A, Firm::B}) {
      if (!h.alive(f)) continue;
      const Poly& lam = f == Firm::A ? params_[h].lambdaA : params_[h].lambdaB;
      if (lam.is_zero()) continue;
      double s = ring_time(lam, t, T, expo(eng));
      if (s <= t) s = std::nextafter(t, kNoDefault);
      if (s < tau_next) {
        tau_next = s;
        who = f;
      }
    }

    auto step_to = [&](double t_end) {
      const double dt = t_end - t;
      const NodeCoeffs c = params_.at(t, h);
      const double dW = std::sqrt(dt) * normal(eng);
      y += (c.compensated_drift() - 0.5 * c.sigma * c.sigma) * dt + c.sigma * dW;
      t = t_end;
      const double d = std::exp(y);
      if (!std::isfinite(y) || !(d > 0.0) || !std::isfinite(d)) path.overflow = true;
      path.time_grid.push_back(t);
      path.brownian_increments.push_back(dW);
      path.bond.push_back(d);
      path.regime_index.push_back(h);
    };

    // Grid nodes strictly before the default time.
    while (next_grid <= n) {
      const double tg = next_grid == n ? T : dt_grid * static_cast<double>(next_grid);
      if (tg >= tau_next) break;
      step_to(tg);
      ++next_grid;
      if (path.overflow) return;
    }
    if (tau_next == kNoDefault) return;

    // Default node: reuse the grid node when the times coincide.
    const double tg = next_grid == n ? T : dt_grid * static_cast<double>(next_grid);
    step_to(tau_next);
    if (tau_next == tg) ++next_grid;
    if (path.overflow) return;

    const double pre = path.bond.back();
    const double jump = params_.at(tau_next, h).jump(who);
    y += std::log1p(jump);
    if (who == Firm::A) {
      path.tauA = tau_next;
      path.bond_before_tauA = pre;
    } else {
      path.tauB = tau_next;
      path.bond_before_tauB = pre;
    }
    h = h.after(who);
    path.bond.back() = std::exp(y);
    path.regime_index.back() = h;
    if (next_grid > n) return;
  }
}

MarketPath PathSimulator::generate(std::size_t path_id) const {
  MarketPath p;
  generate(path_id, p);
  return p;
}

std::vector<MarketPath> simulate_paths(const ModelParams& params,
                                       std::size_t n_steps, std::size_t n_paths,
                                       double d0, std::uint64_t seed,
                                       ExecPolicy policy) {
  const PathSimulator sim{params, SimulationSpec{n_steps, d0, seed}};
  std::vector<MarketPath> out(n_paths);
  for_each_index(n_paths, policy, [&](std::size_t i) { sim.generate(i, out[i]); });
  return out;
}

namespace {

template <class Sink>
double run_wealth(const ModelParams& params, const MarketPath& path,
                  const Strategy& strategy, double x0, Sink&& sink) {
  double X = x0;
  sink(X);
  auto preB = [&](DefaultState h) { return h.hB ? path.bond_before_tauB : 0.0; };
  for (std::size_t j = 1; j < path.size(); ++j) {
    const DefaultState h = path.regime_index[j - 1];
    const double t0 = path.time_grid[j - 1];
    const double dt = path.time_grid[j] - t0;
    const NodeCoeffs c = params.at(t0, h);
    const double pi =
        strategy.position(HedgeInput{t0, path.bond[j - 1], X, h, preB(h)});
    X += pi * (c.compensated_drift() * dt + c.sigma * path.brownian_increments[j]);
    const DefaultState h1 = path.regime_index[j];
    if (h1 != h) {
      const Firm f = h1.hA != h.hA ? Firm::A : Firm::B;
      const double tj = path.time_grid[j];
      const double spot = f == Firm::A ? path.bond_before_tauA : path.bond_before_tauB;
      const double pj = strategy.position(HedgeInput{tj, spot, X, h, preB(h)});
      X += pj * params.at(tj, h).jump(f);
    }
    sink(X);
  }
  return X;
}

}  // namespace

std::vector<double> simulate_wealth(const ModelParams& params,
                                    const MarketPath& path,
                                    const Strategy& strategy, double x0) {
  std::vector<double> out;
  out.reserve(path.size());
  run_wealth(params, path, strategy, x0, [&](double x) { out.push_back(x); });
  return out;
}

double terminal_wealth(const ModelParams& params, const MarketPath& path,
                       const Strategy& strategy, double x0) {
  return run_wealth(params, path, strategy, x0, [](double) {});
}

double solve_rho(const NodeCoeffs& c, double rhoA, double rhoB) {
  if (!(c.sigma > 0.0))
    throw DomainError(
        "complete-jump case not supported in HJB module; see closed_forms");
  if (!(rhoA > -1.0 && rhoB > -1.0))
    throw DomainError("jump controls must exceed -1");
  return -(c.mu + rhoA * c.sigmaA * c.lambdaA + rhoB * c.sigmaB * c.lambdaB) /
         c.sigma;
}

}  // namespace twofirm
