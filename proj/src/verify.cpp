#include "twofirm/verify.hpp"

#include <cmath>
#include <functional>

#include "twofirm/montecarlo.hpp"

namespace twofirm {

using nlohmann::json;

std::string to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::pass: return "pass";
    case CheckStatus::fail: return "fail";
    case CheckStatus::skipped: return "skipped";
    case CheckStatus::report: return "report";
  }
  return "unknown";
}

bool SuiteReport::all_pass() const {
  for (const auto& c : checks)
    if (c.status == CheckStatus::fail) return false;
  return true;
}

json SuiteReport::to_json() const {
  json arr = json::array();
  std::size_t failed = 0;
  for (const auto& c : checks) {
    arr.push_back({{"name", c.name}, {"status", to_string(c.status)}, {"detail", c.detail},
                   {"values", c.values}});
    failed += c.status == CheckStatus::fail;
  }
  return {{"all_pass", all_pass()}, {"n_checks", checks.size()}, {"n_failed", failed},
          {"checks", arr}};
}

namespace {

bool sigma_positive(const ModelParams& p) {
  try {
    require_positive_sigma(p);
    return true;
  } catch (const ValidationError&) {
    return false;
  }
}

CheckResult bounded(std::string name, double value, double limit, bool below = true) {
  CheckResult r{std::move(name)};
  r.values = {{"value", value}, {"limit", limit}};
  r.status = (below ? value <= limit : value >= limit) ? CheckStatus::pass : CheckStatus::fail;
  return r;
}

CheckResult within_stderr(std::string name, double estimate, double stderr, double target,
                          double extra = 0.0) {
  CheckResult r{std::move(name)};
  const double band = 3.0 * stderr + extra;
  r.values = {{"estimate", estimate}, {"stderr", stderr}, {"target", target}, {"band", band}};
  r.status = std::abs(estimate - target) <= band ? CheckStatus::pass : CheckStatus::fail;
  return r;
}

// Runs fn and turns a thrown error into a failed (or skipped) check.
void guarded(SuiteReport& rep, const std::string& name, const std::function<void()>& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    CheckResult r{name, CheckStatus::fail, e.what()};
    rep.checks.push_back(r);
  }
}

void hjb_checks(SuiteReport& rep, const RunConfig& cfg, const VerifyOptions& opt) {
  const RiskAversion delta{cfg.risk_aversion};
  const HjbGridSpec spec = cfg.hjb_spec();
  guarded(rep, "hjb_solve", [&] {
    const HjbSolution sol = solve_hjb(cfg.model, cfg.claim, delta, cfg.d0, spec);
    rep.checks.push_back(bounded("hjb_foc_residual", sol.max_foc_residual, 1e-8));
    rep.checks.push_back(bounded("hjb_constraint_residual", sol.max_constraint_residual, 1e-10));

    const ValueSurface& S = sol.surface;
    const std::size_t N = S.n_levels() - 1;
    double term = 0.0, finite_ok = 1.0;
    for (DefaultState h : kAllStates) {
      for (std::size_t j = 0; j < S.log_spot.n; ++j) {
        const double want = -delta.delta * cfg.claim.g()(std::exp(S.log_spot.at(j))) * (1 - h.hB);
        term = std::max(term, std::abs(S.V[h.index()][S.idx(N, j)] - want));
      }
      for (double v : S.V[h.index()])
        if (!std::isfinite(v)) finite_ok = 0.0;
    }
    rep.checks.push_back(bounded("hjb_terminal_slice", term, 0.0));
    rep.checks.push_back(bounded("hjb_values_finite", finite_ok, 1.0, false));

    const HjbSolution fine = solve_hjb(cfg.model, cfg.claim, delta, cfg.d0, halved(spec));
    const double change = std::abs(fine.value0() - sol.value0());
    CheckResult conv = bounded("hjb_grid_halving", change,
                               cfg.tolerances.convergence * std::max(1.0, std::abs(sol.value0())));
    conv.values["V0"] = sol.value0();
    conv.values["V0_halved"] = fine.value0();
    rep.checks.push_back(conv);

    if (cfg.model.constant_per_state()) {
      guarded(rep, "hjb_tree_oracle", [&] {
        const TreeComparison t = compare_hjb_tree(cfg.model, cfg.claim, delta, cfg.d0, spec);
        CheckResult r{"hjb_tree_oracle", t.pass ? CheckStatus::pass : CheckStatus::fail};
        r.values = {{"hjb", t.hjb},     {"hjb_halved", t.hjb_halved}, {"tree_1", t.tree1},
                    {"tree_2", t.tree2}, {"tree_3", t.tree3}, {"tree_2_fine", t.tree2_fine},
                    {"tolerance", t.tolerance}};
        rep.checks.push_back(r);
      });
    } else {
      rep.checks.push_back({"hjb_tree_oracle", CheckStatus::skipped,
                            "tree oracle needs constant coefficients per state"});
    }

    if (opt.monte_carlo) {
      const McSetup mc{PathSimulator(cfg.model, {spec.n_time, cfg.d0, cfg.mc.seed}),
                       cfg.mc.n_paths, ExecPolicy::parallel};
      const HjbControlField field{sol, cfg.model};
      const McEstimate e = entropy_dual_estimate(mc, field, cfg.claim, delta.delta);
      rep.checks.push_back(within_stderr("hjb_entropy_dual", e.mean, e.stderr, sol.value0(), change));
      const McEstimate w = weight_mean(mc, field);
      rep.checks.push_back(within_stderr("hjb_density_mean", w.mean, w.stderr, 1.0));
      const McEstimate b = reweighted_terminal_bond(mc, field);
      rep.checks.push_back(within_stderr("hjb_reweighted_bond", b.mean, b.stderr, cfg.d0));
    }
  });

  guarded(rep, "price_zero_claim", [&] {
    const double p = indifference_price(cfg.model, DefaultableClaim::zero(), delta, cfg.d0, spec).price;
    CheckResult r{"price_zero_claim", p == 0.0 ? CheckStatus::pass : CheckStatus::fail};
    r.values = {{"price", p}};
    rep.checks.push_back(r);
  });
  guarded(rep, "price_cash_shift", [&] {
    const double K = 0.25;
    const double p0 = indifference_price(cfg.model, cfg.claim, delta, cfg.d0, spec).price;
    const double p1 = indifference_price(cfg.model, cfg.claim.shifted(K), delta, cfg.d0, spec).price;
    const double err = std::abs(p1 - (p0 + K));
    CheckResult r = bounded("price_cash_shift", err, 1e-6 * std::max(1.0, std::abs(p0 + K)));
    r.values["price"] = p0;
    r.values["price_shifted"] = p1;
    r.values["K"] = K;
    rep.checks.push_back(r);
  });
  guarded(rep, "price_monotone_chain", [&] {
    json prices = json::array();
    bool ok = true;
    double prev = -std::numeric_limits<double>::infinity();
    for (double cap : {0.1, 0.2, 0.4}) {
      const DefaultableClaim c = DefaultableClaim::restricted_form(
          PayoffFunction::capped_call(cfg.d0, cap), PayoffFunction::constant(0.0));
      const double p = indifference_price(cfg.model, c, delta, cfg.d0, spec).price;
      ok = ok && p >= prev;
      prev = p;
      prices.push_back(p);
    }
    CheckResult r{"price_monotone_chain", ok ? CheckStatus::pass : CheckStatus::fail};
    r.values = {{"prices", prices}};
    rep.checks.push_back(r);
  });
}

// Closed forms that apply to the configured model, if any.
std::vector<std::pair<std::string, std::function<double()>>> theta_oracles(const ModelParams& p) {
  std::vector<std::pair<std::string, std::function<double()>>> out;
  const StateCoeffs& r0 = p[DefaultState{0, 0}];
  const StateCoeffs& r1 = p[DefaultState{1, 0}];
  if (r0.lambdaA.is_zero())
    out.emplace_back("theta_complete_brownian", [&p, r0] {
      return theta_complete_brownian(r0.mu, r0.sigma, p.horizon, 0.0);
    });
  if (r0.sigma.is_zero() && r1.mu.is_zero() && r1.lambdaB.is_zero() && !r0.lambdaA.is_zero())
    out.emplace_back("theta_complete_jump", [&p, r0] {
      return theta_complete_jump(r0.mu, r0.sigmaA, r0.lambdaA, p.horizon, 0.0);
    });
  return out;
}

void mvh_checks(SuiteReport& rep, const RunConfig& cfg, const VerifyOptions& opt) {
  const MvhGridSpec spec = cfg.mvh_spec();
  guarded(rep, "mvh_solve", [&] {
    const MvhSolution sol = solve_mvh(cfg.model, cfg.claim, cfg.d0, spec);
    const MvhDiagnostics d = diagnose(sol);
    rep.checks.push_back(bounded("theta_positive", d.theta_min, 0.0 + 1e-300, false));
    rep.checks.push_back(bounded("theta_at_most_one", d.theta_max, 1.0 + 1e-12));
    rep.checks.push_back(bounded("theta_terminal", d.theta_terminal_dev, 1e-12));
    rep.checks.push_back(bounded("one_plus_theta_positive", d.min_one_plus_theta, 1e-300, false));
    rep.checks.push_back(bounded("a_positive", d.min_a, 1e-300, false));
    rep.checks.push_back(bounded("v_minus_c2_over_a_nonnegative", d.min_v_minus_c2_over_a, -1e-12, false));
    rep.checks.push_back(bounded("xi_nonnegative", d.min_xi, -1e-12, false));
    rep.checks.push_back(bounded("xi_terminal", d.xi_terminal_max, 1e-12));
    rep.checks.push_back(bounded("y_bounded_by_claim", d.max_abs_Y, cfg.claim.bound() * (1 + 1e-9) + 1e-12));
    rep.checks.push_back(bounded("recombination_A", d.recombination_A, 1e-10));
    rep.checks.push_back(bounded("recombination_B", d.recombination_B, 1e-10));

    const MvhSolution fine = solve_mvh(cfg.model, cfg.claim, cfg.d0, halved(spec));
    const double v = sol.value(cfg.x0), vf = fine.value(cfg.x0);
    CheckResult conv = bounded("mvh_grid_halving", std::abs(vf - v),
                               cfg.tolerances.convergence * std::max(std::abs(v), 1e-3));
    conv.values["value"] = v;
    conv.values["value_halved"] = vf;
    rep.checks.push_back(conv);

    if (const auto od = match_one_default(cfg.model)) {
      try {
        od->validate();
        const auto [th0, th1] = theta_one_default(*od, 0.0);
        const double tol = spec.tier == ThetaTier::ode ? 1e-6 : 1e-3;
        const double e0 = std::abs(sol.first.at(0, 0.0, std::log(cfg.d0)).Theta - th0);
        const double e1 = std::abs(sol.first.at(1, 0.0, std::log(cfg.d0)).Theta - th1);
        CheckResult r = bounded("one_default_oracle", std::max(e0, e1), tol);
        r.values["theta0_exact"] = th0;
        r.values["theta1_exact"] = th1;
        rep.checks.push_back(r);
      } catch (const ValidationError& e) {
        rep.checks.push_back({"one_default_oracle", CheckStatus::skipped, e.what()});
      }
    } else {
      rep.checks.push_back({"one_default_oracle", CheckStatus::skipped,
                            "model is not an ordered one-default instance"});
    }
    for (const auto& [name, exact] : theta_oracles(cfg.model)) {
      guarded(rep, name, [&] {
        const double want = exact();
        const double err = std::abs(sol.theta0() - want);
        CheckResult r = bounded(name, err, spec.tier == ThetaTier::ode ? 1e-6 : 1e-3);
        r.values["exact"] = want;
        r.values["theta0"] = sol.theta0();
        rep.checks.push_back(r);
      });
    }

    // Identities that would identify the VOM in the full filtration; reported only.
    double id_max = 0.0;
    const MvhGrid& g = sol.first.grid;
    for (int k = 0; k < kRegimes; ++k)
      for (std::size_t n = 0; n < g.n_levels(); ++n)
        for (std::size_t j = 0; j < g.log_spot.n; ++j) {
          const FirstNode fn = sol.first.node(k, n, j);
          const NodeCoeffs c = cfg.model.at(g.times[n], state_of_regime(k));
          try {
            const auto res = vom_identity_residuals(vom_controls(fn, c), fn, c);
            for (double x : res) id_max = std::max(id_max, std::abs(x));
          } catch (const ArbitrageError&) {
          }
        }
    CheckResult ids{"vom_identities", CheckStatus::report,
                    "reported only; the VOM is not claimed in the full filtration"};
    ids.values = {{"max_abs_residual", id_max}};
    rep.checks.push_back(ids);

    if (!opt.monte_carlo) return;
    const McSetup mc{PathSimulator(cfg.model, cfg.simulation_spec()), cfg.mc.n_paths,
                     ExecPolicy::parallel};
    const MvhStrategy pi = optimal_strategy_mvh(sol.first, sol.second, cfg.model);
    const McEstimate err = estimate_hedge_error(mc, cfg.claim, pi, cfg.x0);
    rep.checks.push_back(within_stderr("mvh_self_consistency", err.mean, err.stderr, v));

    try {
      const VomReport vr = vom_moment_check(sol.first, mc);
      rep.checks.push_back(within_stderr("vom_moment", vr.product, vr.product_stderr, 1.0));
      const VomControlField field{sol.first, cfg.model};
      const McEstimate w = weight_mean(mc, field);
      rep.checks.push_back(within_stderr("vom_density_mean", w.mean, w.stderr, 1.0));
      const McEstimate b = reweighted_terminal_bond(mc, field);
      rep.checks.push_back(within_stderr("vom_reweighted_bond", b.mean, b.stderr, cfg.d0));
    } catch (const SignedMeasureError& e) {
      rep.checks.push_back({"vom_moment", CheckStatus::skipped, e.what()});
    }

    PerturbationSpec ps;
    ps.n_bumps = cfg.verify.n_bumps;
    ps.bump_scale = cfg.verify.bump_scale;
    ps.bump_seed = cfg.verify.bump_seed;
    const PerturbationTable tab = perturbation_test(mc, cfg.claim, pi, cfg.x0, ps);
    CheckResult pr{"perturbation", tab.n_violations == 0 ? CheckStatus::pass : CheckStatus::fail};
    pr.values = {{"base", tab.base.mean}, {"base_stderr", tab.base.stderr},
                 {"n_bumps", tab.rows.size()}, {"n_violations", tab.n_violations}};
    rep.checks.push_back(pr);

    const CostProcessReport cp = cost_process_check(mc, sol, pi, cfg.x0);
    CheckResult cr{"cost_martingale", cp.max_dev_over_stderr < 3.0 ? CheckStatus::pass : CheckStatus::fail};
    cr.values = {{"J0", cp.J0}, {"max_abs_dev", cp.max_abs_dev},
                 {"max_dev_over_stderr", cp.max_dev_over_stderr}};
    rep.checks.push_back(cr);

    const ConstantStrategy zero{0.0};
    const AffineStrategy s1{pi, 0.5, 0.0}, s2{pi, 1.5, 0.0}, s3{pi, 1.0, 0.1}, s4{pi, 1.0, -0.1};
    json sub = json::array();
    bool ok = true;
    for (const Strategy* s : {static_cast<const Strategy*>(&zero), static_cast<const Strategy*>(&s1),
                              static_cast<const Strategy*>(&s2), static_cast<const Strategy*>(&s3),
                              static_cast<const Strategy*>(&s4)}) {
      const CostProcessReport c = cost_process_check(mc, sol, *s, cfg.x0);
      ok = ok && c.terminal.mean >= c.J0 - 3.0 * c.terminal.stderr;
      sub.push_back({{"E_JT", c.terminal.mean}, {"stderr", c.terminal.stderr}});
    }
    CheckResult cs{"cost_submartingale", ok ? CheckStatus::pass : CheckStatus::fail};
    cs.values = {{"J0", cp.J0}, {"suboptimal", sub}};
    rep.checks.push_back(cs);
  });
}

}  // namespace

bool hjb_applicable(const ModelParams& p, const DefaultableClaim& claim) {
  return claim.restricted && sigma_positive(p);
}

bool mvh_applicable(const ModelParams& p, const DefaultableClaim& claim) {
  return claim.restricted && p.ordered_defaults;
}

std::optional<OneDefaultParams> match_one_default(const ModelParams& p) {
  if (!p.ordered_defaults) return std::nullopt;
  const StateCoeffs& r0 = p[DefaultState{0, 0}];
  const StateCoeffs& r1 = p[DefaultState{1, 0}];
  if (!r0.is_constant() || !r1.is_constant()) return std::nullopt;
  if (r0.lambdaA.is_zero() || !r1.lambdaB.is_zero()) return std::nullopt;
  OneDefaultParams q;
  q.mu0 = r0.mu(0.0);
  q.sigma0 = r0.sigma(0.0);
  q.kappa = r0.sigmaA(0.0);
  q.lambda = r0.lambdaA(0.0);
  q.mu1 = r1.mu(0.0);
  q.sigma1 = r1.sigma(0.0);
  q.T = p.horizon;
  return q;
}

TreeComparison compare_hjb_tree(const ModelParams& p, const DefaultableClaim& claim,
                                RiskAversion delta, double d0, const HjbGridSpec& spec) {
  TreeComparison t;
  t.hjb = solve_hjb(p, claim, delta, d0, spec).value0();
  t.hjb_halved = solve_hjb(p, claim, delta, d0, halved(spec)).value0();
  t.tree1 = dual_value_bruteforce(p, claim, delta, d0, 1, 7);
  t.tree2 = dual_value_bruteforce(p, claim, delta, d0, 2, 7);
  t.tree3 = dual_value_bruteforce(p, claim, delta, d0, 3, 7);
  t.tree2_fine = dual_value_bruteforce(p, claim, delta, d0, 2, 11);
  t.tolerance = std::max(std::abs(t.tree2 - t.tree1), 3.0 * std::abs(t.tree3 - t.tree2)) +
                std::abs(t.tree2 - t.tree2_fine) + std::abs(t.hjb - t.hjb_halved);
  t.pass = std::abs(t.hjb - t.tree2) <= t.tolerance;
  return t;
}

SuiteReport run_verify(const RunConfig& cfg, const VerifyOptions& opt) {
  SuiteReport rep;
  rep.checks.push_back({"config_valid", CheckStatus::pass, ""});
  if (hjb_applicable(cfg.model, cfg.claim))
    hjb_checks(rep, cfg, opt);
  else
    rep.checks.push_back({"hjb", CheckStatus::skipped,
                          "HJB tier needs sigma > 0 on reachable states and a restricted claim"});
  if (mvh_applicable(cfg.model, cfg.claim))
    mvh_checks(rep, cfg, opt);
  else
    rep.checks.push_back({"mvh", CheckStatus::skipped,
                          "mean-variance tier needs ordered defaults and a restricted claim"});
  return rep;
}

json oracle_report(const RunConfig& cfg) {
  json out = json::object();
  if (const auto od = match_one_default(cfg.model)) {
    try {
      od->validate();
      const auto [th0, th1] = theta_one_default(*od, 0.0);
      MvhGridSpec ode = cfg.mvh_spec(), pde = cfg.mvh_spec();
      ode.tier = ThetaTier::ode;
      pde.tier = ThetaTier::pde;
      const auto a = solve_theta_split(cfg.model, cfg.d0, ode);
      const auto b = solve_theta_split(cfg.model, cfg.d0, pde);
      const double y = std::log(cfg.d0);
      out["one_default"] = {{"theta0_exact", th0},
                       {"theta1_exact", th1},
                       {"theta0_ode", a.at(0, 0.0, y).Theta},
                       {"theta1_ode", a.at(1, 0.0, y).Theta},
                       {"theta0_pde", b.at(0, 0.0, y).Theta},
                       {"theta1_pde", b.at(1, 0.0, y).Theta}};
    } catch (const ValidationError& e) {
      out["one_default"] = {{"skipped", e.what()}};
    }
  }
  if (cfg.model.ordered_defaults) {
    for (const auto& [name, exact] : theta_oracles(cfg.model)) {
      try {
        const auto f = solve_theta_split(cfg.model, cfg.d0, cfg.mvh_spec());
        out[name] = {{"exact", exact()}, {"solver", f.at(0, 0.0, std::log(cfg.d0)).Theta}};
      } catch (const std::exception& e) {
        out[name] = {{"skipped", e.what()}};
      }
    }
  }
  if (hjb_applicable(cfg.model, cfg.claim) && cfg.model.constant_per_state()) {
    try {
      const TreeComparison t = compare_hjb_tree(cfg.model, cfg.claim, RiskAversion{cfg.risk_aversion},
                                                cfg.d0, cfg.hjb_spec());
      out["hjb_tree"] = {{"hjb", t.hjb},       {"hjb_halved", t.hjb_halved}, {"tree_1", t.tree1},
                         {"tree_2", t.tree2},   {"tree_3", t.tree3}, {"tree_2_fine", t.tree2_fine},
                         {"tolerance", t.tolerance},
                         {"pass", t.pass}};
    } catch (const std::exception& e) {
      out["hjb_tree"] = {{"skipped", e.what()}};
    }
  }
  return out;
}

}  // namespace twofirm
