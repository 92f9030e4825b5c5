#include "twofirm/hjb.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

namespace twofirm {

RiskAversion::RiskAversion(double d) : delta{d} {
  if (!(d > 0.0) || !std::isfinite(d))
    throw ValidationError("risk aversion delta must be positive");
}

namespace {

constexpr double kRhoFloor = -1.0 + 1e-6;

double entropy_term(double rho_i) {
  const double x = 1.0 + rho_i;
  return x * std::log(x) - rho_i;
}

bool active(const HjbNode& n, Firm f) {
  return n.state.alive(f) && n.c.intensity(f) > 0.0;
}

}  // namespace

double running_cost_j(const DualControl& q, const NodeCoeffs& c, double f_value,
                      RiskAversion delta) {
  if (!(q.rhoA > -1.0 && q.rhoB > -1.0))
    throw DomainError("running cost undefined: 1+rho^i <= 0");
  return c.lambdaA * entropy_term(q.rhoA) + c.lambdaB * entropy_term(q.rhoB) -
         delta.delta * (1.0 + q.rhoB) * c.lambdaB * f_value + 0.5 * q.rho * q.rho;
}

double hjb_objective(const HjbNode& n, double rhoA, double rhoB, RiskAversion delta) {
  const DualControl q{rhoA, rhoB, solve_rho(n.c, rhoA, rhoB)};
  double jumps = 0.0;
  if (active(n, Firm::A))
    jumps += (1.0 + rhoA) * n.c.lambdaA * (n.dV_A - n.c.sigmaA * n.V_y);
  if (active(n, Firm::B))
    jumps += (1.0 + rhoB) * n.c.lambdaB * (n.dV_B - n.c.sigmaB * n.V_y);
  const double f = active(n, Firm::B) ? n.f_value : 0.0;
  return jumps + running_cost_j(q, n.c, f, delta);
}

std::array<double, 2> hjb_foc(const HjbNode& n, double rhoA, double rhoB,
                              RiskAversion delta) {
  const double rho = solve_rho(n.c, rhoA, rhoB);
  std::array<double, 2> g{0.0, 0.0};
  if (active(n, Firm::A)) {
    const double e = -n.c.sigmaA * n.c.lambdaA / n.c.sigma;
    g[0] = n.c.lambdaA * (n.dV_A - n.c.sigmaA * n.V_y) +
           n.c.lambdaA * std::log1p(rhoA) + rho * e;
  }
  if (active(n, Firm::B)) {
    const double e = -n.c.sigmaB * n.c.lambdaB / n.c.sigma;
    g[1] = n.c.lambdaB * (n.dV_B - n.c.sigmaB * n.V_y - delta.delta * n.f_value) +
           n.c.lambdaB * std::log1p(rhoB) + rho * e;
  }
  return g;
}

namespace {

double norm_inf(const std::array<double, 2>& g) {
  return std::max(std::abs(g[0]), std::abs(g[1]));
}

// Golden-section on one coordinate in log(1+rho) over a wide bracket.
double golden_coordinate(const std::function<double(double)>& f) {
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = std::log1p(kRhoFloor), b = 6.0;
  double c = b - phi * (b - a), d = a + phi * (b - a);
  double fc = f(std::expm1(c)), fd = f(std::expm1(d));
  for (int it = 0; it < 200 && b - a > 1e-12; ++it) {
    if (fc < fd) {
      b = d; d = c; fd = fc;
      c = b - phi * (b - a); fc = f(std::expm1(c));
    } else {
      a = c; c = d; fc = fd;
      d = a + phi * (b - a); fd = f(std::expm1(d));
    }
  }
  return std::expm1(0.5 * (a + b));
}

bool newton(const HjbNode& n, RiskAversion delta, const ControlOptions& opt,
            double& rA, double& rB, int& iters, double& residual) {
  const bool aA = active(n, Firm::A), aB = active(n, Firm::B);
  const double eA = aA ? -n.c.sigmaA * n.c.lambdaA / n.c.sigma : 0.0;
  const double eB = aB ? -n.c.sigmaB * n.c.lambdaB / n.c.sigma : 0.0;
  auto g = hjb_foc(n, rA, rB, delta);
  double F = hjb_objective(n, rA, rB, delta);
  for (; iters < opt.max_iter; ++iters) {
    residual = norm_inf(g);
    if (residual < opt.foc_tol) return true;
    double hAA = aA ? n.c.lambdaA / (1.0 + rA) + eA * eA : 1.0;
    double hBB = aB ? n.c.lambdaB / (1.0 + rB) + eB * eB : 1.0;
    double hAB = aA && aB ? eA * eB : 0.0;
    const double det = hAA * hBB - hAB * hAB;
    double dA = aA ? -(hBB * g[0] - hAB * g[1]) / det : 0.0;
    double dB = aB ? -(hAA * g[1] - hAB * g[0]) / det : 0.0;
    double step = 1.0;
    while ((rA + step * dA < kRhoFloor) || (rB + step * dB < kRhoFloor)) step *= 0.5;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      const double nA = rA + step * dA, nB = rB + step * dB;
      const double Fn = hjb_objective(n, nA, nB, delta);
      const auto gn = hjb_foc(n, nA, nB, delta);
      if (Fn <= F + 1e-4 * step * (g[0] * dA + g[1] * dB) || norm_inf(gn) < norm_inf(g)) {
        rA = nA; rB = nB; F = Fn; g = gn;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
  }
  residual = norm_inf(g);
  return residual < opt.foc_tol;
}

}  // namespace

ControlResult minimize_controls(const HjbNode& n, RiskAversion delta,
                                const ControlOptions& opt, const DualControl* warm) {
  const bool aA = active(n, Firm::A), aB = active(n, Firm::B);
  double rA = aA && warm ? std::max(warm->rhoA, kRhoFloor) : 0.0;
  double rB = aB && warm ? std::max(warm->rhoB, kRhoFloor) : 0.0;
  int iters = 0;
  double residual = 0.0;
  bool ok = newton(n, delta, opt, rA, rB, iters, residual);
  if (!ok) {
    // Coordinate sweeps to reach the basin, then polish.
    for (int sweep = 0; sweep < 20; ++sweep) {
      if (aA) rA = golden_coordinate([&](double x) { return hjb_objective(n, x, rB, delta); });
      if (aB) rB = golden_coordinate([&](double x) { return hjb_objective(n, rA, x, delta); });
    }
    iters = 0;
    ok = newton(n, delta, opt, rA, rB, iters, residual);
  }
  if (!ok) {
    std::ostringstream os;
    os.precision(17);
    os << "control minimization did not converge: last iterate rhoA=" << rA
       << " rhoB=" << rB << " residual=" << residual;
    throw ConvergenceError(os.str());
  }
  ControlResult r;
  r.control = {rA, rB, solve_rho(n.c, rA, rB)};
  r.cost = hjb_objective(n, rA, rB, delta);
  r.residual = residual;
  r.iterations = iters;
  return r;
}

std::size_t ValueSurface::level_of(double t) const {
  const std::size_t last = n_levels() - 1;
  const double dt = times.back() / static_cast<double>(last);
  const double s = std::floor(t / dt + 1e-9);
  if (s <= 0.0) return 0;
  return std::min(static_cast<std::size_t>(s), last - 1);
}

double ValueSurface::field(const std::array<std::vector<double>, 4>& f,
                           DefaultState h, std::size_t level, double y) const {
  const auto& v = f[h.index()];
  return interp_linear(std::span<const double>(v).subspan(level * log_spot.n, log_spot.n),
                       log_spot, y);
}

double ValueSurface::value(DefaultState h, std::size_t level, double y) const {
  return field(V, h, level, y);
}

double HjbSolution::value0() const {
  return surface.value(DefaultState{0, 0}, 0, std::log(d0));
}

namespace {

struct Extents {
  double sigma_max = 0.0;
  double jump_span = 0.0;
};

Extents extents(const ModelParams& p) {
  Extents e;
  double jA = 0.0, jB = 0.0;
  for (DefaultState h : kAllStates) {
    for (std::size_t k = 0; k < kInvariantSamples; ++k) {
      const double t = p.horizon * static_cast<double>(k) /
                       static_cast<double>(kInvariantSamples - 1);
      const NodeCoeffs c = p.at(t, h);
      e.sigma_max = std::max(e.sigma_max, c.sigma);
      jA = std::max(jA, std::abs(std::log1p(c.sigmaA)));
      jB = std::max(jB, std::abs(std::log1p(c.sigmaB)));
    }
  }
  e.jump_span = jA + jB;
  return e;
}

}  // namespace

HjbSolution solve_hjb(const ModelParams& params, const DefaultableClaim& claim,
                      RiskAversion delta, double d0, const HjbGridSpec& spec) {
  require_positive_sigma(params);
  claim.validate();
  if (!claim.restricted)
    throw ValidationError("HJB tier requires the restricted claim form");
  if (spec.n_time < 1 || spec.n_space < 3)
    throw ValidationError("HJB grid needs n_time >= 1 and n_space >= 3");
  if (!(d0 > 0.0)) throw ValidationError("d0 must be positive");

  const double T = params.horizon;
  const Extents ext = extents(params);
  const double half =
      spec.halfwidth_sd * ext.sigma_max * std::sqrt(T) + ext.jump_span;
  const std::size_t N = spec.n_time, J = spec.n_space;
  const double dt = T / static_cast<double>(N);

  HjbSolution sol;
  sol.delta = delta.delta;
  sol.d0 = d0;
  ValueSurface& S = sol.surface;
  S.log_spot = UniformGrid::centered(std::log(d0), half, J);
  S.times.resize(N + 1);
  for (std::size_t n = 0; n <= N; ++n) S.times[n] = n == N ? T : dt * static_cast<double>(n);
  for (auto* arr : {&S.V, &S.dVdy, &S.rhoA, &S.rhoB, &S.rho, &S.pi})
    for (auto& v : *arr) v.assign((N + 1) * J, 0.0);

  const double dy = S.log_spot.step;
  for (DefaultState h : kAllStates)
    for (std::size_t j = 0; j < J; ++j)
      S.V[h.index()][S.idx(N, j)] =
          -delta.delta * claim.g()(std::exp(S.log_spot.at(j))) * (1 - h.hB);

  std::array<std::vector<double>, 4> cost;
  for (auto& c : cost) c.assign(J, 0.0);
  std::vector<double> residual(J), constraint(J), cfl(J);
  std::vector<double> conv(J), diff(J), react(J, 0.0);
  ImplicitStepper stepper(J);
  constexpr std::array<int, 4> order{3, 1, 2, 0};

  for (std::size_t n = N + 1; n-- > 0;) {
    const double t = S.times[n];
    for (DefaultState h : kAllStates) {
      const int k = h.index();
      first_derivative(std::span<const double>(S.V[k]).subspan(n * J, J), dy,
                       std::span<double>(S.dVdy[k]).subspan(n * J, J));
    }
    for (int k : order) {
      const DefaultState h = DefaultState::from_index(k);
      const NodeCoeffs c = params.at(t, h);
      const double sA = std::log1p(c.sigmaA), sB = std::log1p(c.sigmaB);
      for_each_index(J, spec.policy, [&](std::size_t j) {
        const std::size_t id = S.idx(n, j);
        const double y = S.log_spot.at(j);
        HjbNode node;
        node.c = c;
        node.state = h;
        node.V_y = S.dVdy[k][id];
        if (h.alive(Firm::A))
          node.dV_A = S.value(h.after(Firm::A), n, y + sA) - S.V[k][id];
        if (h.alive(Firm::B)) {
          node.dV_B = S.value(h.after(Firm::B), n, y + sB) - S.V[k][id];
          node.f_value = claim.f()(std::exp(y));
        }
        DualControl warm;
        const DualControl* wp = nullptr;
        if (n < N) {
          const std::size_t prev = S.idx(n + 1, j);
          warm = {S.rhoA[k][prev], S.rhoB[k][prev], 0.0};
          wp = &warm;
        }
        const ControlResult r = minimize_controls(node, delta, spec.control, wp);
        S.rhoA[k][id] = r.control.rhoA;
        S.rhoB[k][id] = r.control.rhoB;
        S.rho[k][id] = r.control.rho;
        S.pi[k][id] = -(node.V_y + r.control.rho / c.sigma) / delta.delta;
        cost[k][j] = r.cost;
        residual[j] = r.residual;
        constraint[j] = std::abs(martingale_residual(r.control, c));
        const double intens = (1.0 + r.control.rhoA) * c.lambdaA * h.alive(Firm::A) +
                              (1.0 + r.control.rhoB) * c.lambdaB * h.alive(Firm::B);
        const double drift = (1.0 + r.control.rhoA) * c.lambdaA * c.sigmaA * h.alive(Firm::A) +
                             (1.0 + r.control.rhoB) * c.lambdaB * c.sigmaB * h.alive(Firm::B);
        cfl[j] = std::max(dt * intens, dt * std::abs(drift) / dy);
      });
      for (std::size_t j = 0; j < J; ++j) {
        sol.max_foc_residual = std::max(sol.max_foc_residual, residual[j]);
        sol.max_constraint_residual = std::max(sol.max_constraint_residual, constraint[j]);
        if (cfl[j] > 1.0) {
          std::ostringstream os;
          os << "grid too coarse for stability: explicit jump step number "
             << cfl[j] << " > 1 in state " << h.label() << " at t=" << t
             << "; increase n_time";
          throw ValidationError(os.str());
        }
      }
    }
    if (n == 0) break;

    const double t_prev = S.times[n - 1];
    for (int k : order) {
      const DefaultState h = DefaultState::from_index(k);
      const double sig = params.at(t_prev, h).sigma;
      std::fill(conv.begin(), conv.end(), -0.5 * sig * sig);
      std::fill(diff.begin(), diff.end(), 0.5 * sig * sig);
      std::span<double> out = std::span<double>(S.V[k]).subspan((n - 1) * J, J);
      for (std::size_t j = 0; j < J; ++j) out[j] = S.V[k][S.idx(n, j)] + dt * cost[k][j];
      stepper.solve(dt, dy, conv, diff, react, out);
    }
  }
  return sol;
}

double HjbStrategy::position(const HedgeInput& in) const {
  const ValueSurface& S = sol_->surface;
  return S.field(S.pi, in.state, S.level_of(in.t), std::log(in.spot));
}

HjbStrategy optimal_strategy_hjb(const HjbSolution& sol) { return HjbStrategy{sol}; }

DualControl HjbControlField::at(double t, double spot, DefaultState h) const {
  const ValueSurface& S = sol_->surface;
  const std::size_t n = S.level_of(t);
  const double y = std::log(spot);
  DualControl q;
  const NodeCoeffs c = params_->at(t, h);
  if (h.alive(Firm::A) && c.lambdaA > 0.0) q.rhoA = S.field(S.rhoA, h, n, y);
  if (h.alive(Firm::B) && c.lambdaB > 0.0) q.rhoB = S.field(S.rhoB, h, n, y);
  q.rho = solve_rho(c, q.rhoA, q.rhoB);
  return q;
}

HjbGridSpec halved(const HjbGridSpec& spec) {
  HjbGridSpec s = spec;
  s.n_time = 2 * spec.n_time;
  s.n_space = 2 * spec.n_space - 1;
  return s;
}

IndifferenceResult indifference_price(const ModelParams& params,
                                      const DefaultableClaim& claim,
                                      RiskAversion delta, double d0,
                                      const HjbGridSpec& spec, bool with_convergence) {
  auto price_on = [&](const HjbGridSpec& s) {
    IndifferenceResult r;
    r.V0_with = solve_hjb(params, claim, delta, d0, s).value0();
    r.V0_without = solve_hjb(params, DefaultableClaim::zero(), delta, d0, s).value0();
    r.price = (r.V0_without - r.V0_with) / delta.delta;
    return r;
  };
  IndifferenceResult r = price_on(spec);
  if (with_convergence) r.grid_convergence_delta = std::abs(price_on(halved(spec)).price - r.price);
  return r;
}

}  // namespace twofirm
