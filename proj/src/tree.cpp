#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "twofirm/hjb.hpp"

namespace twofirm {

GaussHermite gauss_hermite_normal(int n) {
  if (n < 1 || n > 40) throw ValidationError("Gauss-Hermite order must be in [1,40]");
  // Probabilists' Hermite polynomials He_n and He_{n-1}.
  auto he = [n](double x) {
    double p0 = 1.0, p1 = x;
    if (n == 0) return std::pair{p0, 0.0};
    for (int k = 1; k < n; ++k) {
      const double p2 = x * p1 - k * p0;
      p0 = p1;
      p1 = p2;
    }
    return std::pair{p1, p0};
  };
  GaussHermite gh;
  const double R = 2.0 * std::sqrt(static_cast<double>(n)) + 2.0;
  const int scan = 4000 * n;
  double a = -R, fa = he(a).first;
  for (int s = 1; s <= scan; ++s) {
    const double b = -R + 2.0 * R * s / scan;
    const double fb = he(b).first;
    if (fa == 0.0 || fa * fb < 0.0) {
      double lo = a, hi = b;
      for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        if ((he(lo).first < 0.0) == (he(mid).first < 0.0)) lo = mid; else hi = mid;
      }
      gh.nodes.push_back(fa == 0.0 ? a : 0.5 * (lo + hi));
    }
    a = b;
    fa = fb;
  }
  if (static_cast<int>(gh.nodes.size()) != n)
    throw ConvergenceError("Gauss-Hermite root search failed");
  double fact = 1.0;
  for (int k = 2; k <= n; ++k) fact *= k;
  double total = 0.0;
  for (double x : gh.nodes) {
    const double pm1 = he(x).second;
    gh.weights.push_back(n == 1 ? 1.0 : fact / (static_cast<double>(n) * n * pm1 * pm1));
    total += gh.weights.back();
  }
  for (double& w : gh.weights) w /= total;
  return gh;
}

namespace {

struct Event {
  int firm = -1;  // -1 none, 0 A, 1 B
  double jump = 1.0;
};

class Tree {
 public:
  Tree(const ModelParams& p, const DefaultableClaim& claim, double delta,
       int n_periods, const GaussHermite& gh, const TreeOptions& opt)
      : p_{p}, claim_{claim}, delta_{delta}, n_{n_periods}, gh_{gh}, opt_{opt},
        dt_{p.horizon / n_periods} {}

  double value(int k, double y, DefaultState h) const {
    if (k == n_) return -delta_ * claim_.g()(std::exp(y)) * (1 - h.hB);
    const NodeCoeffs c = p_.at(k * dt_, h);
    const std::size_t M = gh_.nodes.size();

    std::vector<Event> events{{-1, 1.0}};
    bool actA = h.alive(Firm::A) && c.lambdaA > 0.0;
    bool actB = h.alive(Firm::B) && c.lambdaB > 0.0;
    if (actA) events.push_back({0, 1.0 + c.sigmaA});
    if (actB) events.push_back({1, 1.0 + c.sigmaB});

    auto probs = [&](double qA, double qB, std::vector<double>& out) {
      const double L = qA * c.lambdaA * actA + qB * c.lambdaB * actB;
      const double stay = std::exp(-L * dt_);
      out.assign(events.size(), stay);
      for (std::size_t e = 1; e < events.size(); ++e) {
        const double li = events[e].firm == 0 ? qA * c.lambdaA : qB * c.lambdaB;
        out[e] = L > 0.0 ? li / L * (1.0 - stay) : 0.0;
      }
    };
    std::vector<double> pP;
    probs(1.0, 1.0, pP);

    // Drift chosen so the one-period mean growth under P is exp(mu dt) on
    // the tree itself.
    const double vol = c.sigma * std::sqrt(dt_);
    double mean_diffusive = 0.0, mean_jump = 0.0;
    for (std::size_t m = 0; m < M; ++m) mean_diffusive += gh_.weights[m] * std::exp(vol * gh_.nodes[m]);
    for (std::size_t e = 0; e < events.size(); ++e) mean_jump += pP[e] * events[e].jump;
    const double drift = c.mu * dt_ - std::log(mean_diffusive) - std::log(mean_jump);
    std::vector<double> C(M), child(events.size() * M);
    for (std::size_t m = 0; m < M; ++m) C[m] = std::exp(drift + vol * gh_.nodes[m]);
    for (std::size_t e = 0; e < events.size(); ++e) {
      for (std::size_t m = 0; m < M; ++m) {
        const double yc = y + drift + vol * gh_.nodes[m];
        double v;
        if (events[e].firm < 0) {
          v = value(k + 1, yc, h);
        } else {
          const Firm f = events[e].firm == 0 ? Firm::A : Firm::B;
          v = value(k + 1, yc + std::log(events[e].jump), h.after(f));
          if (f == Firm::B) v -= delta_ * claim_.f()(std::exp(yc));
        }
        child[e * M + m] = v;
      }
    }

    std::vector<double> q, w(M);
    auto objective = [&](double sA, double sB) {
      probs(std::exp(sA), std::exp(sB), q);
      double mj = 0.0, kl = 0.0;
      for (std::size_t e = 0; e < events.size(); ++e) {
        mj += q[e] * events[e].jump;
        if (q[e] > 0.0) kl += q[e] * std::log(q[e] / pP[e]);
      }
      double eta = 0.0;
      if (!tilt(C, 1.0 / mj, eta)) return std::numeric_limits<double>::infinity();
      double zsum = 0.0, ez = 0.0;
      for (std::size_t m = 0; m < M; ++m) {
        w[m] = gh_.weights[m] * std::exp(eta * gh_.nodes[m]);
        zsum += w[m];
      }
      for (std::size_t m = 0; m < M; ++m) {
        w[m] /= zsum;
        ez += w[m] * gh_.nodes[m];
      }
      kl += eta * ez - std::log(zsum);
      double ev = 0.0;
      for (std::size_t e = 0; e < events.size(); ++e) {
        double inner = 0.0;
        for (std::size_t m = 0; m < M; ++m) inner += w[m] * child[e * M + m];
        ev += q[e] * inner;
      }
      return kl + ev;
    };
    return search(objective, actA, actB);
  }

 private:
  // Finds eta with sum w_m(eta) C_m = target where w is the tilted rule.
  bool tilt(const std::vector<double>& C, double target, double& eta) const {
    const std::size_t M = C.size();
    const auto [cmin, cmax] = std::minmax_element(C.begin(), C.end());
    if (!(target > *cmin && target < *cmax)) return M > 0 && *cmin == *cmax && *cmin == target;
    auto phi = [&](double e, double& d) {
      double s0 = 0.0, s1 = 0.0, sz = 0.0, s1z = 0.0;
      for (std::size_t m = 0; m < M; ++m) {
        const double x = gh_.weights[m] * std::exp(e * gh_.nodes[m]);
        s0 += x;
        s1 += x * C[m];
        sz += x * gh_.nodes[m];
        s1z += x * C[m] * gh_.nodes[m];
      }
      d = s1z / s1 - sz / s0;
      return std::log(s1 / s0) - std::log(target);
    };
    double lo = -60.0, hi = 60.0, d = 0.0;
    double e = 0.0;
    for (int it = 0; it < 200; ++it) {
      const double f = phi(e, d);
      if (std::abs(f) < 1e-15) break;
      if (f > 0.0) hi = e; else lo = e;
      double next = e - f / d;
      if (!(next > lo && next < hi) || !std::isfinite(next)) next = 0.5 * (lo + hi);
      if (next == e) break;
      e = next;
    }
    eta = e;
    return true;
  }

  template <class F>
  double search(F& objective, bool actA, bool actB) const {
    if (!actA && !actB) return objective(0.0, 0.0);
    const int P = opt_.control_points;
    double cA = 0.0, cB = 0.0, half = 4.0;
    double best = std::numeric_limits<double>::infinity();
    for (int round = 0; round <= opt_.refine_rounds; ++round) {
      const double step = 2.0 * half / (P - 1);
      double bA = cA, bB = cB;
      for (int i = 0; i < (actA ? P : 1); ++i) {
        const double sA = actA ? cA - half + i * step : 0.0;
        for (int k = 0; k < (actB ? P : 1); ++k) {
          const double sB = actB ? cB - half + k * step : 0.0;
          const double v = objective(sA, sB);
          if (v < best) {
            best = v;
            bA = sA;
            bB = sB;
          }
        }
      }
      cA = bA;
      cB = bB;
      half = 2.0 * step;
    }
    return best;
  }

  const ModelParams& p_;
  const DefaultableClaim& claim_;
  double delta_;
  int n_;
  const GaussHermite& gh_;
  TreeOptions opt_;
  double dt_;
};

}  // namespace

double dual_value_bruteforce(const ModelParams& params, const DefaultableClaim& claim,
                             RiskAversion delta, double d0, int n_periods,
                             int n_space, const TreeOptions& opt) {
  if (n_periods < 1 || n_periods > 3)
    throw ValidationError("tree size guard exceeded: n_periods must be in [1,3]");
  if (!params.constant_per_state())
    throw ValidationError("tree oracle requires constant coefficients per state");
  require_positive_sigma(params);
  claim.validate();
  if (!claim.restricted) throw ValidationError("tree oracle requires the restricted claim form");
  double nodes = 0.0, layer = 1.0;
  for (int k = 0; k < n_periods; ++k) {
    nodes += layer;
    layer *= 3.0 * n_space;
  }
  if (nodes > static_cast<double>(opt.max_nodes))
    throw ValidationError("tree size guard exceeded");
  const GaussHermite gh = gauss_hermite_normal(n_space);
  const Tree tree{params, claim, delta.delta, n_periods, gh, opt};
  return tree.value(0, std::log(d0), DefaultState{});
}

}  // namespace twofirm
