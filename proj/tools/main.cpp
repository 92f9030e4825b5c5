#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "twofirm/config.hpp"
#include "twofirm/csv.hpp"
#include "twofirm/hjb.hpp"
#include "twofirm/montecarlo.hpp"
#include "twofirm/mvh.hpp"
#include "twofirm/verify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace twofirm;

namespace {

enum Exit { kOk = 0, kCheckFailed = 1, kValidation = 2, kRuntime = 3 };

struct Options {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> paths;
};

struct Outcome {
  json report;
  int exit = kOk;
};

fs::path out_dir(const Options& o) {
  fs::path d = o.out.empty() ? fs::path{"."} : fs::path{o.out};
  fs::create_directories(d);
  return d;
}

RunConfig resolve(const std::string& command, const Options& o) {
  const json raw = read_json_file(o.config);
  require_blocks(raw, command);
  RunConfig cfg = parse_config(raw);
  if (o.seed) cfg.mc.seed = *o.seed;
  if (o.paths) cfg.mc.n_paths = *o.paths;
  return cfg;
}

Outcome simulate(const RunConfig& cfg, const Options& o) {
  const PathSimulator sim{cfg.model, cfg.simulation_spec()};
  const fs::path csv = out_dir(o) / "paths.csv";
  std::ofstream os(csv);
  write_paths_csv(os, sim, cfg.mc.n_paths);
  return {{{"n_paths", cfg.mc.n_paths}, {"n_steps", cfg.mc.n_steps}, {"seed", cfg.mc.seed},
           {"paths_csv", csv.string()}}};
}

Outcome price(const RunConfig& cfg, const Options& o) {
  const RiskAversion delta{cfg.risk_aversion};
  const HjbGridSpec spec = cfg.hjb_spec();
  const IndifferenceResult r = indifference_price(cfg.model, cfg.claim, delta, cfg.d0, spec, true);
  json rep{{"price", r.price},
           {"V0_with", r.V0_with},
           {"V0_without", r.V0_without},
           {"grid_convergence_delta", r.grid_convergence_delta ? json(*r.grid_convergence_delta) : json()}};
  const HjbSolution with = solve_hjb(cfg.model, cfg.claim, delta, cfg.d0, spec);
  const fs::path csv = out_dir(o) / "value_surface.csv";
  std::ofstream os(csv);
  write_value_surface_csv(os, with.surface);
  rep["value_surface_csv"] = csv.string();
  if (cfg.mc.n_paths > 1) {
    const HjbSolution without = solve_hjb(cfg.model, DefaultableClaim::zero(), delta, cfg.d0, spec);
    const HjbStrategy pw = optimal_strategy_hjb(with), p0 = optimal_strategy_hjb(without);
    const McSetup mc{PathSimulator(cfg.model, {spec.n_time, cfg.d0, cfg.mc.seed}), cfg.mc.n_paths,
                     ExecPolicy::parallel};
    const MonteCarloPrice m = mc_indifference_price(mc, cfg.claim, pw, p0, cfg.x0, delta.delta);
    rep["mc_price"] = m.price;
    rep["mc_stderr"] = m.stderr;
    rep["n_paths"] = cfg.mc.n_paths;
    rep["seed"] = cfg.mc.seed;
  }
  return {rep};
}

Outcome hedge(const RunConfig& cfg, const Options& o) {
  const MvhSolution sol = solve_mvh(cfg.model, cfg.claim, cfg.d0, cfg.mvh_spec());
  json rep{{"theta0", sol.theta0()}, {"y0", sol.y0()}, {"xi0", sol.xi0()},
           {"value", sol.value(cfg.x0)}};
  if (cfg.mc.n_paths > 1) {
    const McSetup mc{PathSimulator(cfg.model, cfg.simulation_spec()), cfg.mc.n_paths,
                     ExecPolicy::parallel};
    const MvhStrategy pi = optimal_strategy_mvh(sol.first, sol.second, cfg.model);
    const McEstimate e = estimate_hedge_error(mc, cfg.claim, pi, cfg.x0);
    rep["mc_value"] = e.mean;
    rep["mc_stderr"] = e.stderr;
  } else {
    rep["mc_value"] = json();
    rep["mc_stderr"] = json();
  }
  rep["n_paths"] = cfg.mc.n_paths;
  rep["seed"] = cfg.mc.seed;
  const fs::path csv = out_dir(o) / "mvh_surface.csv";
  std::ofstream os(csv);
  write_mvh_csv(os, sol);
  rep["mvh_surface_csv"] = csv.string();
  return {rep};
}

Outcome verify(const RunConfig& cfg, const Options&) {
  VerifyOptions opt;
  opt.monte_carlo = cfg.verify.monte_carlo && cfg.mc.n_paths > 1;
  const SuiteReport s = run_verify(cfg, opt);
  return {s.to_json(), s.all_pass() ? kOk : kCheckFailed};
}

Outcome oracles(const RunConfig& cfg, const Options&) { return {oracle_report(cfg)}; }

int run(const std::string& command, const Options& o, Outcome (*fn)(const RunConfig&, const Options&)) {
  json out{{"command", command}};
  int code = kOk;
  try {
    const RunConfig cfg = resolve(command, o);
    out["config"] = to_json(cfg);
    Outcome r = fn(cfg, o);
    out["report"] = std::move(r.report);
    code = r.exit;
    out["status"] = code == kOk ? "ok" : "check failure";
  } catch (const ValidationError& e) {
    out["status"] = "validation failure";
    out["message"] = e.what();
    code = kValidation;
  } catch (const std::exception& e) {
    out["status"] = "error";
    out["message"] = e.what();
    code = kRuntime;
  }
  const std::string text = out.dump(2);
  std::cout << text << '\n';
  if (!o.out.empty()) {
    std::error_code ec;
    fs::create_directories(o.out, ec);
    std::ofstream(fs::path{o.out} / "report.json") << text << '\n';
  }
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-firm default pricing and hedging"};
  app.require_subcommand(1);
  Options o;
  struct Cmd {
    const char* name;
    const char* help;
    Outcome (*fn)(const RunConfig&, const Options&);
  };
  const Cmd cmds[] = {
      {"simulate", "Simulate market paths to CSV", simulate},
      {"price-indifference", "Exponential-utility indifference price", price},
      {"hedge-mvh", "Mean-variance hedge and value", hedge},
      {"verify", "Run every applicable check", verify},
      {"oracles", "Closed-form and tree oracle values", oracles},
  };
  std::vector<std::pair<CLI::App*, const Cmd*>> subs;
  for (const Cmd& c : cmds) {
    CLI::App* s = app.add_subcommand(c.name, c.help);
    s->add_option("--config", o.config, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
    s->add_option("--out", o.out, "Output directory");
    s->add_option("--seed", o.seed, "Override mc.seed");
    s->add_option("--paths", o.paths, "Override mc.n_paths");
    subs.emplace_back(s, &c);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  for (const auto& [s, c] : subs)
    if (s->parsed()) return run(c->name, o, c->fn);
  return kValidation;
}
