#include "twofirm/mvh.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace twofirm {

int regime_of(DefaultState h) {
  if (h == DefaultState{0, 0}) return 0;
  if (h == DefaultState{1, 0}) return 1;
  if (h == DefaultState{1, 1}) return 2;
  throw DomainError("state (0,1) is unreachable in ordered mode");
}

DefaultState state_of_regime(int k) {
  static constexpr std::array<DefaultState, 3> s{DefaultState{0, 0}, DefaultState{1, 0},
                                                 DefaultState{1, 1}};
  return s.at(static_cast<std::size_t>(k));
}

Firm exit_channel(int k) { return k == 0 ? Firm::A : Firm::B; }

namespace {

void require_positive_jumps(const JumpPair& theta) {
  if (!(1.0 + theta.A > 0.0 && 1.0 + theta.B > 0.0))
    throw DomainError("jump integrand violates 1+theta > 0");
}

// b/a with the no-tradeable-risk convention a = b = 0.
double ratio(double b, double a) {
  if (a > 0.0) return b / a;
  if (a == 0.0 && b == 0.0) return 0.0;
  if (a == 0.0) throw ArbitrageError("drift without tradeable risk: a = 0 but b != 0");
  throw DomainError("quadratic weight a is negative");
}

}  // namespace

MvhCoefficients coeffs(const JumpPair& th, double beta, const JumpPair& U, double Z,
                       const NodeCoeffs& c) {
  require_positive_jumps(th);
  MvhCoefficients k;
  k.a = c.sigma * c.sigma + c.sigmaA * c.sigmaA * (1.0 + th.A) * c.lambdaA +
        c.sigmaB * c.sigmaB * (1.0 + th.B) * c.lambdaB;
  k.b = c.mu + c.sigma * beta + c.sigmaA * th.A * c.lambdaA + c.sigmaB * th.B * c.lambdaB;
  k.c = -c.sigma * Z - c.sigmaA * U.A * (1.0 + th.A) * c.lambdaA -
        c.sigmaB * U.B * (1.0 + th.B) * c.lambdaB;
  k.v = Z * Z + U.A * U.A * (1.0 + th.A) * c.lambdaA + U.B * U.B * (1.0 + th.B) * c.lambdaB;
  k.u = beta * Z + U.A * th.A * c.lambdaA + U.B * th.B * c.lambdaB;
  return k;
}

double driver_g1(const JumpPair& theta, double beta, const NodeCoeffs& c) {
  const MvhCoefficients k = coeffs(theta, beta, {}, 0.0, c);
  return -k.b * ratio(k.b, k.a);
}

double driver_g2(const JumpPair& U, double Z, const JumpPair& theta, double beta,
                 const NodeCoeffs& c) {
  const MvhCoefficients k = coeffs(theta, beta, U, Z, c);
  return k.u + k.c * ratio(k.b, k.a);
}

double driver_g3(const JumpPair& U, double Z, const JumpPair& theta, double Theta,
                 const NodeCoeffs& c) {
  const MvhCoefficients k = coeffs(theta, 0.0, U, Z, c);
  return Theta * (k.v - (k.a > 0.0 ? k.c * k.c / k.a : 0.0));
}

MvhGridSpec halved(const MvhGridSpec& spec) {
  MvhGridSpec s = spec;
  s.n_time = 2 * spec.n_time;
  s.n_space = 2 * spec.n_space - 1;
  return s;
}

std::size_t MvhGrid::level_of(double t) const {
  const std::size_t last = n_levels() - 1;
  const double dt = times.back() / static_cast<double>(last);
  const double s = std::floor(t / dt + 1e-9);
  if (s <= 0.0) return 0;
  return std::min(static_cast<std::size_t>(s), last);
}

double MvhGrid::interp(const std::vector<double>& f, std::size_t level, double y) const {
  return interp_linear(std::span<const double>(f).subspan(level * log_spot.n, log_spot.n),
                       log_spot, y);
}

FirstNode BsdeFirstSolution::node(int k, std::size_t level, std::size_t j) const {
  const std::size_t id = grid.idx(level, j);
  return {Theta[k][id], beta[k][id], {thetaA[k][id], thetaB[k][id]},
          {thetaBarA[k][id], thetaBarB[k][id]}};
}

FirstNode BsdeFirstSolution::at(int k, double t, double y) const {
  const std::size_t n = grid.level_of(t);
  return {grid.interp(Theta[k], n, y), grid.interp(beta[k], n, y),
          {grid.interp(thetaA[k], n, y), grid.interp(thetaB[k], n, y)},
          {grid.interp(thetaBarA[k], n, y), grid.interp(thetaBarB[k], n, y)}};
}

namespace {

MvhGrid make_grid(const ModelParams& p, double d0, const MvhGridSpec& spec) {
  if (spec.n_time < 1 || spec.n_space < 3)
    throw ValidationError("MVH grid needs n_time >= 1 and n_space >= 3");
  if (!(d0 > 0.0)) throw ValidationError("d0 must be positive");
  double smax = 0.0, jA = 0.0, jB = 0.0;
  for (int k = 0; k < kRegimes; ++k)
    for (std::size_t s = 0; s < kInvariantSamples; ++s) {
      const double t = p.horizon * static_cast<double>(s) /
                       static_cast<double>(kInvariantSamples - 1);
      const NodeCoeffs c = p.at(t, state_of_regime(k));
      smax = std::max(smax, c.sigma);
      jA = std::max(jA, std::abs(std::log1p(c.sigmaA)));
      jB = std::max(jB, std::abs(std::log1p(c.sigmaB)));
    }
  const double half = std::max(spec.halfwidth_sd * smax * std::sqrt(p.horizon) + jA + jB, 0.1);
  MvhGrid g;
  g.log_spot = UniformGrid::centered(std::log(d0), half, spec.n_space);
  const double dt = p.horizon / static_cast<double>(spec.n_time);
  g.times.resize(spec.n_time + 1);
  for (std::size_t n = 0; n <= spec.n_time; ++n)
    g.times[n] = n == spec.n_time ? p.horizon : dt * static_cast<double>(n);
  return g;
}

void require_ordered(const ModelParams& p) {
  if (!p.ordered_defaults)
    throw ValidationError("mean-variance hedging requires ordered_defaults = true");
}

// Regime-k channel data at time t.
struct Channel {
  NodeCoeffs c;
  double lambda = 0.0;  // intensity of the exit channel
  double s = 0.0;       // relative jump of the exit channel
  double shift = 0.0;   // log(1+s)
};

Channel channel(const ModelParams& p, int k, double t) {
  Channel ch;
  ch.c = p.at(t, state_of_regime(k));
  if (k < 2) {
    const Firm f = exit_channel(k);
    ch.lambda = ch.c.intensity(f);
    ch.s = ch.c.jump(f);
    ch.shift = std::log1p(ch.s);
  }
  return ch;
}

// Absolute-form driver u*g1 with jump target `next`.
double abs_driver(const Channel& ch, double u, double next, double beta_bar) {
  const double num = ch.c.mu * u + (next - u) * ch.s * ch.lambda + ch.c.sigma * beta_bar;
  const double den = ch.c.sigma * ch.c.sigma * u + next * ch.s * ch.s * ch.lambda;
  if (den > 0.0) return -num * num / den;
  if (num == 0.0) return 0.0;
  throw ArbitrageError("drift without tradeable risk in the quadratic driver");
}

void store_first(BsdeFirstSolution& F, int k, std::size_t id, double u, double next,
                 double beta_bar) {
  F.Theta[k][id] = u;
  F.beta[k][id] = beta_bar / u;
  const double tb = k < 2 ? next - u : 0.0;
  if (k == 0) {
    F.thetaBarA[k][id] = tb;
    F.thetaA[k][id] = tb / u;
  } else if (k == 1) {
    F.thetaBarB[k][id] = tb;
    F.thetaB[k][id] = tb / u;
  }
}

void theta_ode(const ModelParams& p, const MvhGridSpec& spec, BsdeFirstSolution& F) {
  const std::size_t N = spec.n_time, J = F.grid.log_spot.n;
  const std::size_t sub = std::max<std::size_t>(spec.ode_substeps, 1);
  using Vec = std::array<double, 3>;
  auto rhs = [&](double t, const Vec& u) {
    Vec d{};
    for (int k = 0; k < 3; ++k) {
      const Channel ch = channel(p, k, t);
      const double next = k < 2 ? u[k + 1] : u[k];
      d[k] = -(abs_driver(ch, u[k], next, 0.0) + ch.lambda * (next - u[k]));
    }
    return d;
  };
  auto record = [&](std::size_t n, const Vec& u) {
    for (int k = 0; k < 3; ++k)
      for (std::size_t j = 0; j < J; ++j)
        store_first(F, k, F.grid.idx(n, j), u[k], k < 2 ? u[k + 1] : u[k], 0.0);
  };
  Vec u{1.0, 1.0, 1.0};
  record(N, u);
  const double h = p.horizon / static_cast<double>(N * sub);
  for (std::size_t n = N; n-- > 0;) {
    for (std::size_t s = 0; s < sub; ++s) {
      const double t = F.grid.times[n + 1] - h * static_cast<double>(s);
      auto axpy = [](const Vec& a, double w, const Vec& b) {
        return Vec{a[0] + w * b[0], a[1] + w * b[1], a[2] + w * b[2]};
      };
      // Backward in time: step of -h.
      const Vec k1 = rhs(t, u);
      const Vec k2 = rhs(t - 0.5 * h, axpy(u, -0.5 * h, k1));
      const Vec k3 = rhs(t - 0.5 * h, axpy(u, -0.5 * h, k2));
      const Vec k4 = rhs(t - h, axpy(u, -h, k3));
      for (int k = 0; k < 3; ++k) u[k] -= h / 6.0 * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]);
    }
    record(n, u);
  }
}

void theta_pde(const ModelParams& p, const MvhGridSpec& spec, BsdeFirstSolution& F) {
  const std::size_t N = spec.n_time, J = F.grid.log_spot.n;
  const double dy = F.grid.log_spot.step;
  const double dt = p.horizon / static_cast<double>(N);
  std::vector<double> next(J), it(J), prev(J), uy(J), rhs(J), conv(J), diff(J), react(J),
      g(J);
  ImplicitStepper stepper(J);
  for (int k = 2; k >= 0; --k) {
    for (std::size_t j = 0; j < J; ++j) store_first(F, k, F.grid.idx(N, j), 1.0, 1.0, 0.0);
    for (std::size_t n = N; n-- > 0;) {
      const double t = F.grid.times[n];
      const Channel ch = channel(p, k, t);
      for (std::size_t j = 0; j < J; ++j) {
        const double y = F.grid.log_spot.at(j);
        next[j] = k < 2 ? F.grid.interp(F.Theta[k + 1], n, y + ch.shift) : 0.0;
        prev[j] = F.Theta[k][F.grid.idx(n + 1, j)];
      }
      const double sig = ch.c.sigma;
      std::fill(conv.begin(), conv.end(), ch.c.compensated_drift() - 0.5 * sig * sig);
      std::fill(diff.begin(), diff.end(), 0.5 * sig * sig);
      std::fill(react.begin(), react.end(), ch.lambda);
      it = prev;
      int iter = 0;
      for (;; ++iter) {
        if (iter >= spec.picard_max) {
          std::ostringstream os;
          os << "Picard iteration did not converge in regime " << k << " at t=" << t;
          throw ConvergenceError(os.str());
        }
        first_derivative(it, dy, uy);
        for_each_index(J, spec.policy, [&](std::size_t j) {
          const double tgt = k < 2 ? next[j] : it[j];
          g[j] = abs_driver(ch, it[j], tgt, sig * uy[j]);
          rhs[j] = prev[j] + dt * (ch.lambda * next[j] + g[j]);
        });
        stepper.solve(dt, dy, conv, diff, react, rhs);
        double upd = 0.0;
        for (std::size_t j = 0; j < J; ++j) upd = std::max(upd, std::abs(rhs[j] - it[j]));
        it = rhs;
        if (upd < spec.picard_tol) break;
      }
      F.max_picard_iterations = std::max(F.max_picard_iterations, iter + 1);
      first_derivative(it, dy, uy);
      for (std::size_t j = 0; j < J; ++j)
        store_first(F, k, F.grid.idx(n, j), it[j], k < 2 ? next[j] : it[j], sig * uy[j]);
    }
  }
}

}  // namespace

BsdeFirstSolution solve_theta_split(const ModelParams& params, double d0,
                                    const MvhGridSpec& spec) {
  require_ordered(params);
  BsdeFirstSolution F;
  F.grid = make_grid(params, d0, spec);
  F.tier = spec.tier;
  const std::size_t total = F.grid.n_levels() * F.grid.log_spot.n;
  for (auto* s : {&F.Theta, &F.beta, &F.thetaA, &F.thetaB, &F.thetaBarA, &F.thetaBarB})
    for (auto& v : *s) v.assign(total, 0.0);
  if (spec.tier == ThetaTier::ode) theta_ode(params, spec, F); else theta_pde(params, spec, F);

  F.delta_min = 1.0;
  for (const auto& s : F.Theta)
    for (double v : s) F.delta_min = std::min(F.delta_min, v);
  if (!(F.delta_min >= spec.theta_floor)) {
    std::ostringstream os;
    os << "Theta fell below the floor " << spec.theta_floor << " (min " << F.delta_min << ")";
    throw ConvergenceError(os.str());
  }
  return F;
}

namespace {

struct LinearCoeffs {
  double a, b, ba;  // ba = b/a
};

LinearCoeffs linear_coeffs(const Channel& ch, const FirstNode& fn, int k) {
  const double th = k == 0 ? fn.theta.A : (k == 1 ? fn.theta.B : 0.0);
  if (!(1.0 + th > 0.0)) throw DomainError("jump integrand violates 1+theta > 0");
  const double a = ch.c.sigma * ch.c.sigma + ch.s * ch.s * (1.0 + th) * ch.lambda;
  const double b = ch.c.mu + ch.c.sigma * fn.beta + ch.s * th * ch.lambda;
  return {a, b, ratio(b, a)};
}

}  // namespace

BsdeSecondSolution solve_Y_split(const ModelParams& params, const DefaultableClaim& claim,
                                 const BsdeFirstSolution& first, const MvhGridSpec& spec) {
  require_ordered(params);
  claim.validate();
  if (!claim.restricted)
    throw ValidationError("mean-variance tier requires the restricted claim form");
  BsdeSecondSolution S;
  S.grid = first.grid;
  S.f = claim.f();
  const std::size_t N = S.grid.n_levels() - 1, J = S.grid.log_spot.n;
  const double dy = S.grid.log_spot.step;
  const double dt = params.horizon / static_cast<double>(N);
  for (auto* s : {&S.Y, &S.Z, &S.UA, &S.UB})
    for (auto& v : *s) v.assign((N + 1) * J, 0.0);
  for (std::size_t n = 0; n <= N; ++n)
    for (std::size_t j = 0; j < J; ++j)
      S.Y[2][S.grid.idx(n, j)] = claim.f()(std::exp(S.grid.log_spot.at(j)));

  std::vector<double> target(J), conv(J), diff(J), react(J), w(J), wy(J);
  ImplicitStepper stepper(J);
  for (int k = 1; k >= 0; --k) {
    auto& Yk = S.Y[k];
    auto& Uk = k == 0 ? S.UA[k] : S.UB[k];
    auto fill_target = [&](std::size_t n, const Channel& ch) {
      for (std::size_t j = 0; j < J; ++j) {
        const double y = S.grid.log_spot.at(j);
        target[j] = k == 1 ? claim.f()(std::exp(y)) : S.grid.interp(S.Y[1], n, y + ch.shift);
      }
    };
    auto finish_level = [&](std::size_t n, double sigma) {
      auto wl = std::span<double>(Yk).subspan(n * J, J);
      first_derivative(wl, dy, wy);
      for (std::size_t j = 0; j < J; ++j) {
        S.Z[k][S.grid.idx(n, j)] = sigma * wy[j];
        Uk[S.grid.idx(n, j)] = target[j] - wl[j];
      }
    };
    for (std::size_t j = 0; j < J; ++j)
      Yk[S.grid.idx(N, j)] = claim.g()(std::exp(S.grid.log_spot.at(j)));
    fill_target(N, channel(params, k, params.horizon));
    finish_level(N, channel(params, k, params.horizon).c.sigma);

    for (std::size_t n = N; n-- > 0;) {
      const Channel ch = channel(params, k, S.grid.times[n]);
      fill_target(n, ch);
      const double sig = ch.c.sigma;
      for_each_index(J, spec.policy, [&](std::size_t j) {
        const FirstNode fn = first.node(k, n, j);
        const LinearCoeffs lc = linear_coeffs(ch, fn, k);
        const double th = k == 0 ? fn.theta.A : fn.theta.B;
        conv[j] = ch.c.compensated_drift() - 0.5 * sig * sig + sig * fn.beta - lc.ba * sig * sig;
        diff[j] = 0.5 * sig * sig;
        react[j] = ch.lambda * (1.0 + th) * (1.0 - lc.ba * ch.s);
        w[j] = Yk[S.grid.idx(n + 1, j)] + dt * react[j] * target[j];
      });
      stepper.solve(dt, dy, conv, diff, react, w);
      std::copy(w.begin(), w.end(), Yk.begin() + static_cast<std::ptrdiff_t>(n * J));
      finish_level(n, sig);
    }
  }
  return S;
}

MvhCoefficients MvhSolution::coefficients(int k, std::size_t level, std::size_t j) const {
  const FirstNode fn = first.node(k, level, j);
  const std::size_t id = first.grid.idx(level, j);
  const NodeCoeffs c = params.at(first.grid.times[level], state_of_regime(k));
  JumpPair th{k == 0 ? fn.theta.A : 0.0, k == 1 ? fn.theta.B : 0.0};
  JumpPair U{k == 0 ? second.UA[0][id] : 0.0, k == 1 ? second.UB[1][id] : 0.0};
  const double Z = k < 2 ? second.Z[k][id] : 0.0;
  // Intensities of defaulted firms vanish; zero the unused channel.
  NodeCoeffs cc = c;
  if (k != 0) cc.lambdaA = 0.0;
  if (k != 1) cc.lambdaB = 0.0;
  return twofirm::coeffs(th, fn.beta, U, Z, cc);
}

BsdeThirdSolution solve_xi(const ModelParams& params, const BsdeFirstSolution& first,
                           const BsdeSecondSolution& second, const MvhGridSpec& spec) {
  BsdeThirdSolution X;
  X.grid = first.grid;
  const std::size_t N = X.grid.n_levels() - 1, J = X.grid.log_spot.n;
  const double dy = X.grid.log_spot.step;
  const double dt = params.horizon / static_cast<double>(N);
  for (auto& v : X.xi) v.assign((N + 1) * J, 0.0);

  std::vector<double> target(J), conv(J), diff(J), react(J), q(J);
  ImplicitStepper stepper(J);
  for (int k = 1; k >= 0; --k) {
    for (std::size_t n = N; n-- > 0;) {
      const Channel ch = channel(params, k, X.grid.times[n]);
      const double sig = ch.c.sigma;
      std::fill(conv.begin(), conv.end(), ch.c.compensated_drift() - 0.5 * sig * sig);
      std::fill(diff.begin(), diff.end(), 0.5 * sig * sig);
      std::fill(react.begin(), react.end(), ch.lambda);
      for_each_index(J, spec.policy, [&](std::size_t j) {
        const std::size_t id = X.grid.idx(n, j);
        const FirstNode fn = first.node(k, n, j);
        const double y = X.grid.log_spot.at(j);
        target[j] = k == 0 ? X.grid.interp(X.xi[1], n, y + ch.shift) : 0.0;
        JumpPair th{k == 0 ? fn.theta.A : 0.0, k == 1 ? fn.theta.B : 0.0};
        JumpPair U{k == 0 ? second.UA[0][id] : 0.0, k == 1 ? second.UB[1][id] : 0.0};
        NodeCoeffs cc = ch.c;
        if (k != 0) cc.lambdaA = 0.0;
        if (k != 1) cc.lambdaB = 0.0;
        const double src = driver_g3(U, second.Z[k][id], th, fn.Theta, cc);
        q[j] = X.xi[k][X.grid.idx(n + 1, j)] + dt * (ch.lambda * target[j] + src);
      });
      stepper.solve(dt, dy, conv, diff, react, q);
      std::copy(q.begin(), q.end(), X.xi[k].begin() + static_cast<std::ptrdiff_t>(n * J));
    }
  }
  return X;
}

double mvh_value(double x0, const BsdeFirstSolution& first,
                 const BsdeSecondSolution& second, const BsdeThirdSolution& third) {
  const double y = first.grid.log_spot.lo + first.grid.log_spot.step *
                                                static_cast<double>(first.grid.log_spot.n - 1) / 2.0;
  const double th = first.grid.interp(first.Theta[0], 0, y);
  const double Y0 = second.grid.interp(second.Y[0], 0, y);
  const double xi = third.grid.interp(third.xi[0], 0, y);
  return th * (x0 - Y0) * (x0 - Y0) + xi;
}

double MvhSolution::theta0() const { return Theta(0.0, d0, DefaultState{}); }
double MvhSolution::y0() const { return Y(0.0, d0, DefaultState{}, 0.0); }
double MvhSolution::xi0() const { return xi(0.0, d0, DefaultState{}); }

double MvhSolution::Theta(double t, double spot, DefaultState h) const {
  return first.grid.interp(first.Theta[regime_of(h)], first.grid.level_of(t), std::log(spot));
}

double MvhSolution::Y(double t, double spot, DefaultState h, double spot_before_tauB) const {
  const int k = regime_of(h);
  if (k == 2) return second.f(spot_before_tauB);
  return second.grid.interp(second.Y[k], second.grid.level_of(t), std::log(spot));
}

double MvhSolution::xi(double t, double spot, DefaultState h) const {
  const int k = regime_of(h);
  if (k == 2) return 0.0;
  return third.grid.interp(third.xi[k], third.grid.level_of(t), std::log(spot));
}

double MvhSolution::J(double t, double spot, double wealth, DefaultState h,
                      double spot_before_tauB) const {
  const double d = wealth - Y(t, spot, h, spot_before_tauB);
  return Theta(t, spot, h) * d * d + xi(t, spot, h);
}

MvhSolution solve_mvh(const ModelParams& params, const DefaultableClaim& claim, double d0,
                      const MvhGridSpec& spec) {
  MvhSolution s;
  s.params = params;
  s.claim = claim;
  s.d0 = d0;
  s.first = solve_theta_split(params, d0, spec);
  s.second = solve_Y_split(params, claim, s.first, spec);
  s.third = solve_xi(params, s.first, s.second, spec);
  return s;
}

MvhStrategy::MvhStrategy(const BsdeFirstSolution& first, const BsdeSecondSolution& second,
                         const ModelParams& params)
    : first_{&first}, params_{&params}, f_{second.f} {
  const MvhGrid& g = first.grid;
  const std::size_t L = g.n_levels(), J = g.log_spot.n;
  for (int k = 0; k < 2; ++k) {
    slope_[k].assign(L * J, 0.0);
    intercept_[k].assign(L * J, 0.0);
    for (std::size_t n = 0; n < L; ++n) {
      const Channel ch = channel(params, k, g.times[n]);
      for (std::size_t j = 0; j < J; ++j) {
        const std::size_t id = g.idx(n, j);
        const FirstNode fn = first.node(k, n, j);
        const double th = k == 0 ? fn.theta.A : fn.theta.B;
        const double U = k == 0 ? second.UA[0][id] : second.UB[1][id];
        const LinearCoeffs lc = linear_coeffs(ch, fn, k);
        const double c = -ch.c.sigma * second.Z[k][id] - ch.s * U * (1.0 + th) * ch.lambda;
        if (lc.a > 0.0) {
          slope_[k][id] = -lc.ba;
          intercept_[k][id] = (lc.b * second.Y[k][id] - c) / lc.a;
        }
      }
    }
  }
}

double MvhStrategy::position(const HedgeInput& in) const {
  const int k = regime_of(in.state);
  const MvhGrid& g = first_->grid;
  const std::size_t n = std::min(g.level_of(in.t), g.n_levels() - 2);
  const double y = std::log(in.spot);
  if (k == 2) {
    const NodeCoeffs c = params_->at(in.t, in.state);
    const double a = c.sigma * c.sigma;
    if (!(a > 0.0)) return 0.0;
    const double b = c.mu + c.sigma * g.interp(first_->beta[2], n, y);
    return -(b / a) * (in.wealth - f_(in.spot_before_tauB));
  }
  return g.interp(slope_[k], n, y) * in.wealth + g.interp(intercept_[k], n, y);
}

MvhStrategy optimal_strategy_mvh(const BsdeFirstSolution& first,
                                 const BsdeSecondSolution& second, const ModelParams& params) {
  return MvhStrategy{first, second, params};
}

MvhDiagnostics diagnose(const MvhSolution& sol) {
  MvhDiagnostics d;
  const MvhGrid& g = sol.first.grid;
  const std::size_t L = g.n_levels(), J = g.log_spot.n, N = L - 1;
  d.theta_min = d.theta_max = sol.first.Theta[0][0];
  d.min_a = std::numeric_limits<double>::infinity();
  d.min_v_minus_c2_over_a = std::numeric_limits<double>::infinity();
  d.min_xi = std::numeric_limits<double>::infinity();
  d.min_one_plus_theta = std::numeric_limits<double>::infinity();
  for (int k = 0; k < kRegimes; ++k) {
    for (std::size_t n = 0; n < L; ++n) {
      const Channel ch = channel(sol.params, k, g.times[n]);
      for (std::size_t j = 0; j < J; ++j) {
        const std::size_t id = g.idx(n, j);
        const double th = sol.first.Theta[k][id];
        d.theta_min = std::min(d.theta_min, th);
        d.theta_max = std::max(d.theta_max, th);
        if (n == N) d.theta_terminal_dev = std::max(d.theta_terminal_dev, std::abs(th - 1.0));
        d.min_one_plus_theta = std::min({d.min_one_plus_theta, 1.0 + sol.first.thetaA[k][id],
                                         1.0 + sol.first.thetaB[k][id]});
        const MvhCoefficients m = sol.coefficients(k, n, j);
        d.min_a = std::min(d.min_a, m.a);
        const double gap = m.v - (m.a > 0.0 ? m.c * m.c / m.a : 0.0);
        d.min_v_minus_c2_over_a = std::min(d.min_v_minus_c2_over_a, gap);
        const double xi = k < 2 ? sol.third.xi[k][id] : 0.0;
        d.min_xi = std::min(d.min_xi, xi);
        if (n == N) d.xi_terminal_max = std::max(d.xi_terminal_max, std::abs(xi));
        if (k < 2) d.max_abs_Y = std::max(d.max_abs_Y, std::abs(sol.second.Y[k][id]));
        if (k < 2) {
          const double y = g.log_spot.at(j);
          const double jump = g.interp(sol.first.Theta[k + 1], n, y + ch.shift) - th;
          const double stored = k == 0 ? sol.first.thetaBarA[k][id] : sol.first.thetaBarB[k][id];
          double& r = k == 0 ? d.recombination_A : d.recombination_B;
          r = std::max(r, std::abs(stored - jump));
          const double rel = k == 0 ? sol.first.thetaA[k][id] : sol.first.thetaB[k][id];
          r = std::max(r, std::abs(stored - th * rel));
        }
      }
    }
  }
  return d;
}

}  // namespace twofirm
