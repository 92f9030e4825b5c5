// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "../helpers.hpp"
#include "twofirm/closed_forms.hpp"
#include "twofirm/config.hpp"
#include "twofirm/hjb.hpp"
#include "twofirm/montecarlo.hpp"
#include "twofirm/mvh.hpp"
#include "twofirm/verify.hpp"

using namespace twofirm;
using twofirm::testing::generic_claim;
using twofirm::testing::generic_instance;
using twofirm::testing::ordered3;
namespace fs = std::filesystem;

namespace {

constexpr std::size_t kPaths = 100000;
const fs::path kConfigs{TWOFIRM_CONFIG_DIR};

class Clock {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!detail.empty()) detail += "; ";
    detail += (ok ? "" : "FAILED ") + what;
    pass = pass && ok;
  }
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double z(double estimate, double target, double stderr) {
  return stderr > 0.0 ? (estimate - target) / stderr : (estimate == target ? 0.0 : INFINITY);
}

McSetup mc_for(const ModelParams& p, std::size_t n_steps, std::uint64_t seed) {
  return McSetup{PathSimulator(p, {n_steps, 1.0, seed}), kPaths, ExecPolicy::parallel};
}

// 801 log-spot nodes: at 201 the cost-process check resolves the spatial
// error in J0 (about 3e-5 against early-time stderr near 5e-6).
MvhGridSpec mvh_grid(std::size_t n_time) {
  MvhGridSpec s;
  s.n_time = n_time;
  s.n_space = 801;
  return s;
}

constexpr double kX0 = 0.2;
constexpr std::size_t kMvhSteps = 400;

Outcome criterion1() {
  Outcome o;
  const OneDefaultParams pp{0.14, 0.2, 0.4, 0.1, 0.1, 0.2, 1.0};
  pp.validate();
  const ModelParams m = validate_params(pp.model());
  const double want0 = std::exp(-0.35), want1 = std::exp(-0.25);
  for (const auto& [tier, tol, label] : {std::tuple{ThetaTier::ode, 1e-6, "ode"},
                                         std::tuple{ThetaTier::pde, 1e-3, "pde"}}) {
    MvhGridSpec s = mvh_grid(400);
    s.tier = tier;
    const Clock clock;
    const BsdeFirstSolution f = solve_theta_split(m, 1.0, s);
    const double secs = clock.seconds();
    const double e0 = std::abs(f.at(0, 0.0, 0.0).Theta - want0);
    const double e1 = std::abs(f.at(1, 0.0, 0.0).Theta - want1);
    o.require(e0 < tol && e1 < tol && secs < 10.0,
              fmt("%s err %.1e/%.1e (tol %.0e) %.2fs", label, e0, e1, tol, secs));
  }
  return o;
}

Outcome criterion2() {
  Outcome o;
  for (int which = 0; which < 3; ++which) {
    const Clock clock;
    const ModelParams p = generic_instance(which);
    const MvhSolution sol = solve_mvh(p, generic_claim(), 1.0, mvh_grid(kMvhSteps));
    const MvhStrategy pi = optimal_strategy_mvh(sol.first, sol.second, p);
    const McEstimate e = estimate_hedge_error(mc_for(p, kMvhSteps, 1), generic_claim(), pi, kX0);
    const double secs = clock.seconds();
    const double zz = z(e.mean, sol.value(kX0), e.stderr);
    o.require(std::abs(zz) < 3.0 && secs < 120.0,
              fmt("instance %d value %.6f mc %.6f+-%.6f z %.2f %.1fs", which, sol.value(kX0), e.mean,
                  e.stderr, zz, secs));
  }
  return o;
}

Outcome criterion3() {
  Outcome o;
  for (int which = 0; which < 3; ++which) {
    const ModelParams p = generic_instance(which);
    const MvhSolution sol = solve_mvh(p, generic_claim(), 1.0, mvh_grid(kMvhSteps));
    const MvhStrategy pi = optimal_strategy_mvh(sol.first, sol.second, p);
    const McSetup mc = mc_for(p, kMvhSteps, 2);
    PerturbationSpec ps;
    ps.n_bumps = 10;
    const PerturbationTable tab = perturbation_test(mc, generic_claim(), pi, kX0, ps);
    o.require(tab.n_violations == 0 && tab.rows.size() == 10,
              fmt("instance %d: %zu/10 bump violations", which, tab.n_violations));

    const CostProcessReport cp = cost_process_check(mc, sol, pi, kX0);
    o.require(cp.max_dev_over_stderr < 3.0,
              fmt("instance %d: max |E J_t - J0|/se %.2f", which, cp.max_dev_over_stderr));

    const ConstantStrategy zero{0.0};
    const AffineStrategy s1{pi, 0.5, 0.0}, s2{pi, 1.5, 0.0}, s3{pi, 1.0, 0.1}, s4{pi, 1.0, -0.1};
    int ok = 0;
    for (const Strategy* s : std::initializer_list<const Strategy*>{&zero, &s1, &s2, &s3, &s4}) {
      const CostProcessReport c = cost_process_check(mc, sol, *s, kX0);
      ok += c.terminal.mean >= c.J0 - 3.0 * c.terminal.stderr;
    }
    o.require(ok == 5, fmt("instance %d: %d/5 suboptimal strategies with E J_T >= J0 - 3se", which, ok));
  }
  return o;
}

Outcome criterion4() {
  Outcome o;
  for (const char* name : {"hjb_small", "generic_mvh", "one_default"}) {
    const RunConfig cfg = load_config(kConfigs / (std::string{name} + ".json"));
    const RiskAversion delta{cfg.risk_aversion};
    const TreeComparison t = compare_hjb_tree(cfg.model, cfg.claim, delta, cfg.d0, cfg.hjb_spec());
    o.require(t.pass, fmt("%s tree |%.5f - %.5f| = %.1e tol %.1e", name, t.hjb, t.tree2,
                          std::abs(t.hjb - t.tree2), t.tolerance));
  }
  for (const char* name : {"hjb_small", "generic_mvh", "one_default"}) {
    const RunConfig cfg = load_config(kConfigs / (std::string{name} + ".json"));
    const RiskAversion delta{cfg.risk_aversion};
    HjbGridSpec spec = cfg.hjb_spec();
    spec.n_time = 200;
    spec.n_space = 401;
    const HjbSolution sol = solve_hjb(cfg.model, cfg.claim, delta, cfg.d0, spec);
    const double grid_tol =
        std::abs(sol.value0() - solve_hjb(cfg.model, cfg.claim, delta, cfg.d0, halved(spec)).value0());
    const HjbControlField field{sol, cfg.model};
    const McSetup mc{PathSimulator(cfg.model, {spec.n_time, cfg.d0, 5}), kPaths, ExecPolicy::parallel};
    const McEstimate e = entropy_dual_estimate(mc, field, cfg.claim, delta.delta);
    const double miss = std::abs(e.mean - sol.value0());
    o.require(miss <= 3.0 * e.stderr + grid_tol,
              fmt("%s entropy %.5f+-%.5f vs V0 %.5f (grid %.1e)", name, e.mean, e.stderr, sol.value0(),
                  grid_tol));
  }
  return o;
}

Outcome criterion5() {
  Outcome o;
  const RunConfig cfg = load_config(kConfigs / "hjb_small.json");
  const RiskAversion delta{cfg.risk_aversion};
  const HjbGridSpec spec = cfg.hjb_spec();
  const double zero = indifference_price(cfg.model, DefaultableClaim::zero(), delta, cfg.d0, spec).price;
  o.require(zero == 0.0, fmt("price(0) = %g", zero));

  const double K = 0.25;
  const double base = indifference_price(cfg.model, cfg.claim, delta, cfg.d0, spec).price;
  const double shifted = indifference_price(cfg.model, cfg.claim.shifted(K), delta, cfg.d0, spec).price;
  const double rel = std::abs(shifted - (base + K)) / std::abs(base + K);
  o.require(rel <= 1e-6, fmt("cash shift rel err %.1e", rel));

  std::vector<double> chain;
  for (double cap : {0.1, 0.2, 0.4}) {
    const auto claim = DefaultableClaim::restricted_form(PayoffFunction::capped_call(cfg.d0, cap),
                                                         PayoffFunction::constant(0.0));
    chain.push_back(indifference_price(cfg.model, claim, delta, cfg.d0, spec).price);
  }
  o.require(chain[0] <= chain[1] && chain[1] <= chain[2],
            fmt("chain %.5f <= %.5f <= %.5f", chain[0], chain[1], chain[2]));
  return o;
}

Outcome criterion6() {
  Outcome o;
  StateCoeffs brown;
  brown.mu = 0.08;
  brown.sigma = 0.2;
  StateCoeffs jump0, jump1;
  jump0.mu = 0.06; jump0.sigmaA = -0.4; jump0.lambdaA = 0.3;
  jump1.sigma = 0.2;
  StateCoeffs fh0, fh1;
  fh0.mu = 0.1; fh0.sigma = 0.2; fh0.sigmaA = -0.3; fh0.lambdaA = 0.2;
  fh1.mu = 0.05; fh1.sigma = 0.25;
  const std::vector<std::pair<const char*, ModelParams>> cases{
      {"complete-brownian", ordered3(brown, brown, brown)},
      {"complete-jump", ordered3(jump0, jump1, jump1)},
      {"F+HA", ordered3(fh0, fh1, fh1)},
      {"ordered-general", generic_instance(0)},
  };
  for (const auto& [name, p] : cases) {
    const BsdeFirstSolution first = solve_theta_split(p, 1.0, mvh_grid(200));
    const McSetup mc = mc_for(p, 200, 3);
    const VomReport r = vom_moment_check(first, mc);
    const VomControlField field{first, p};
    const McEstimate w = weight_mean(mc, field);
    const McEstimate b = reweighted_terminal_bond(mc, field);
    const double zp = z(r.product, 1.0, r.product_stderr);
    const double zw = z(w.mean, 1.0, w.stderr);
    const double zb = z(b.mean, 1.0, b.stderr);
    o.require(std::abs(zp) < 3.0 && std::abs(zw) < 3.0 && std::abs(zb) < 3.0,
              fmt("%s z(product) %.2f z(weight) %.2f z(bond) %.2f", name, zp, zw, zb));
  }
  return o;
}

Outcome criterion7() {
  Outcome o;
  for (const auto& entry : fs::directory_iterator(kConfigs)) {
    if (entry.path().extension() != ".json") continue;
    const RunConfig cfg = load_config(entry.path());
    VerifyOptions opt;
    opt.monte_carlo = false;
    const SuiteReport rep = run_verify(cfg, opt);
    std::string failed;
    for (const auto& c : rep.checks)
      if (c.status == CheckStatus::fail) failed += " " + c.name;
    o.require(rep.all_pass(), entry.path().stem().string() + (failed.empty() ? " green" : ":" + failed));
  }
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"1 closed-form Theta oracle", criterion1},
      {"2 MVH self-consistency", criterion2},
      {"3 optimality", criterion3},
      {"4 HJB duality", criterion4},
      {"5 indifference price properties", criterion5},
      {"6 VOM checks", criterion6},
      {"7 invariant suites", criterion7},
  };
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    const Clock clock;
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string{"exception: "} + e.what();
    }
    failures += !o.pass;
    std::printf("%s criterion %s (%.1fs): %s\n", o.pass ? "PASS" : "FAIL", name, clock.seconds(),
                o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
