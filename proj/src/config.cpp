#include "twofirm/config.hpp"

#include <cmath>
#include <fstream>

namespace twofirm {

using nlohmann::json;

namespace {

const char* state_key(DefaultState h) {
  switch (h.index()) {
    case 0: return "00";
    case 1: return "10";
    case 2: return "01";
    default: return "11";
  }
}

const json& require(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key))
    throw ValidationError("config: missing field '" + where + key + "'");
  return j.at(key);
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) throw ValidationError("config: '" + where + "' must be a number");
  return j.get<double>();
}

std::size_t count(const json& j, const std::string& where) {
  if (!j.is_number_integer() || j.get<long long>() < 0)
    throw ValidationError("config: '" + where + "' must be a non-negative integer");
  return j.get<std::size_t>();
}

template <class T, class Read>
void optional(const json& j, const char* key, T& out, Read read, const std::string& where) {
  if (j.is_object() && j.contains(key)) out = read(j.at(key), where + key);
}

json poly_json(const Poly& p) {
  if (p.is_constant()) return p(0.0);
  return p.coeffs();
}

Poly poly_from(const json& j, const std::string& where) {
  if (j.is_number()) return Poly{j.get<double>()};
  if (j.is_array()) {
    std::vector<double> c;
    for (const auto& v : j) c.push_back(number(v, where));
    if (c.empty()) throw ValidationError("config: '" + where + "' is an empty polynomial");
    return Poly{c};
  }
  throw ValidationError("config: '" + where + "' must be a number or coefficient array");
}

}  // namespace

json to_json(const ModelParams& p) {
  json states = json::object();
  for (DefaultState h : kAllStates) {
    const StateCoeffs& s = p[h];
    states[state_key(h)] = {{"mu", poly_json(s.mu)},           {"sigma", poly_json(s.sigma)},
                            {"sigmaA", poly_json(s.sigmaA)},   {"sigmaB", poly_json(s.sigmaB)},
                            {"lambdaA", poly_json(s.lambdaA)}, {"lambdaB", poly_json(s.lambdaB)}};
  }
  return {{"horizon", p.horizon}, {"ordered_defaults", p.ordered_defaults}, {"states", states}};
}

ModelParams model_from_json(const json& j) {
  ModelParams p;
  p.horizon = number(require(j, "horizon", "model."), "model.horizon");
  if (j.contains("ordered_defaults")) {
    if (!j.at("ordered_defaults").is_boolean())
      throw ValidationError("config: 'model.ordered_defaults' must be a boolean");
    p.ordered_defaults = j.at("ordered_defaults").get<bool>();
  }
  const json& states = require(j, "states", "model.");
  for (DefaultState h : kAllStates) {
    const std::string key = state_key(h);
    if (!states.contains(key)) {
      // The state (0,1) is never visited in ordered mode.
      if (p.ordered_defaults && h == DefaultState{0, 1}) {
        p[h] = p[DefaultState{0, 0}];
        p[h].lambdaA = 0.0;
        p[h].lambdaB = 0.0;
        continue;
      }
      throw ValidationError("config: missing field 'model.states." + key + "'");
    }
    const json& s = states.at(key);
    const std::string where = "model.states." + key + ".";
    StateCoeffs& c = p[h];
    for (auto [name, poly] : {std::pair{"mu", &c.mu}, {"sigma", &c.sigma}, {"sigmaA", &c.sigmaA},
                              {"sigmaB", &c.sigmaB}, {"lambdaA", &c.lambdaA},
                              {"lambdaB", &c.lambdaB}})
      if (s.contains(name)) *poly = poly_from(s.at(name), where + name);
  }
  return validate_params(p);
}

json to_json(const PayoffFunction& f) {
  json j{{"kind", to_string(f.kind)}};
  switch (f.kind) {
    case PayoffKind::constant: j["value"] = f.value; break;
    case PayoffKind::capped_affine:
      j["intercept"] = f.intercept;
      j["slope"] = f.slope;
      if (std::isfinite(f.floor)) j["floor"] = f.floor;
      if (std::isfinite(f.cap)) j["cap"] = f.cap;
      break;
    case PayoffKind::capped_call:
    case PayoffKind::capped_put:
      j["strike"] = f.strike;
      if (std::isfinite(f.cap)) j["cap"] = f.cap;
      break;
  }
  if (f.offset != 0.0) j["offset"] = f.offset;
  j["bound"] = f.bound;
  return j;
}

PayoffFunction payoff_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("config: payoff must be an object");
  const json& k = require(j, "kind", "payoff.");
  if (!k.is_string()) throw ValidationError("config: 'payoff.kind' must be a string");
  const PayoffKind kind = payoff_kind_from_string(k.get<std::string>());
  const double inf = std::numeric_limits<double>::infinity();
  auto get = [&](const char* key, double dflt) {
    return j.contains(key) ? number(j.at(key), std::string("payoff.") + key) : dflt;
  };
  PayoffFunction f;
  switch (kind) {
    case PayoffKind::constant: f = PayoffFunction::constant(get("value", 0.0)); break;
    case PayoffKind::capped_affine:
      f = PayoffFunction::capped_affine(get("intercept", 0.0), get("slope", 0.0),
                                        get("floor", -inf), get("cap", inf));
      break;
    case PayoffKind::capped_call:
      f = PayoffFunction::capped_call(get("strike", 0.0), get("cap", inf));
      break;
    case PayoffKind::capped_put:
      f = PayoffFunction::capped_put(get("strike", 0.0), get("cap", inf));
      break;
  }
  f.offset = get("offset", 0.0);
  f.bound = get("bound", f.sup_abs());
  return f;
}

json to_json(const DefaultableClaim& c) {
  if (c.restricted) return {{"form", "restricted"}, {"g", to_json(c.XB)}, {"f", to_json(c.ZB)}};
  return {{"form", "general"},     {"XA", to_json(c.XA)}, {"XB", to_json(c.XB)},
          {"ZA", to_json(c.ZA)},   {"ZB", to_json(c.ZB)}};
}

DefaultableClaim claim_from_json(const json& j) {
  const std::string form = j.is_object() && j.contains("form") && j.at("form").is_string()
                               ? j.at("form").get<std::string>()
                               : "restricted";
  DefaultableClaim c;
  if (form == "restricted") {
    c = DefaultableClaim::restricted_form(payoff_from_json(require(j, "g", "claim.")),
                                          payoff_from_json(require(j, "f", "claim.")));
  } else if (form == "general") {
    c = DefaultableClaim::general(
        payoff_from_json(require(j, "XA", "claim.")), payoff_from_json(require(j, "XB", "claim.")),
        payoff_from_json(require(j, "ZA", "claim.")), payoff_from_json(require(j, "ZB", "claim.")));
  } else {
    throw ValidationError("config: unknown claim form '" + form + "'");
  }
  c.validate();
  return c;
}

RunConfig parse_config(const json& j) {
  if (!j.is_object()) throw ValidationError("config: top level must be an object");
  RunConfig c;
  const json& v = require(j, "schema_version", "");
  if (!v.is_number_integer() || v.get<int>() != kSchemaVersion)
    throw ValidationError("config: unsupported schema_version (expected " +
                          std::to_string(kSchemaVersion) + ")");
  if (j.contains("name") && j.at("name").is_string()) c.name = j.at("name").get<std::string>();
  c.model = model_from_json(require(j, "model", ""));
  optional(j.at("model"), "d0", c.d0, number, "model.");
  if (!(c.d0 > 0.0 && std::isfinite(c.d0))) throw ValidationError("config: 'model.d0' must be positive");
  if (j.contains("claim")) c.claim = claim_from_json(j.at("claim"));
  optional(j, "risk_aversion", c.risk_aversion, number, "");
  c.risk_aversion = RiskAversion{c.risk_aversion}.delta;
  optional(j, "x0", c.x0, number, "");

  if (j.contains("grids")) {
    const json& g = j.at("grids");
    optional(g, "n_time", c.grids.n_time, count, "grids.");
    optional(g, "n_space", c.grids.n_space, count, "grids.");
    optional(g, "log_spot_halfwidth", c.grids.log_spot_halfwidth, number, "grids.");
    optional(g, "l1_grid", c.grids.l1_grid, count, "grids.");
    if (g.contains("theta_tier")) {
      const std::string t = g.at("theta_tier").is_string() ? g.at("theta_tier").get<std::string>() : "";
      if (t == "ode") c.grids.theta_tier = ThetaTier::ode;
      else if (t == "pde") c.grids.theta_tier = ThetaTier::pde;
      else throw ValidationError("config: 'grids.theta_tier' must be \"ode\" or \"pde\"");
    }
  }
  if (c.grids.n_time < 1) throw ValidationError("config: 'grids.n_time' must be at least 1");
  if (c.grids.n_space < 5) throw ValidationError("config: 'grids.n_space' must be at least 5");
  if (!(c.grids.log_spot_halfwidth > 0.0))
    throw ValidationError("config: 'grids.log_spot_halfwidth' must be positive");

  if (j.contains("mc")) {
    const json& m = j.at("mc");
    optional(m, "n_paths", c.mc.n_paths, count, "mc.");
    optional(m, "n_steps", c.mc.n_steps, count, "mc.");
    if (m.contains("seed")) {
      if (!m.at("seed").is_number_unsigned() && !(m.at("seed").is_number_integer() && m.at("seed").get<long long>() >= 0))
        throw ValidationError("config: 'mc.seed' must be a non-negative integer");
      c.mc.seed = m.at("seed").get<std::uint64_t>();
    }
  }
  if (c.mc.n_steps < 1) throw ValidationError("config: 'mc.n_steps' must be at least 1");

  if (j.contains("tolerances")) {
    const json& t = j.at("tolerances");
    optional(t, "foc", c.tolerances.foc, number, "tolerances.");
    optional(t, "picard", c.tolerances.picard, number, "tolerances.");
    optional(t, "convergence", c.tolerances.convergence, number, "tolerances.");
  }
  for (auto [name, val] : {std::pair{"foc", c.tolerances.foc}, {"picard", c.tolerances.picard},
                           {"convergence", c.tolerances.convergence}})
    if (!(val > 0.0)) throw ValidationError(std::string("config: tolerance '") + name + "' must be positive");

  if (j.contains("verify")) {
    const json& t = j.at("verify");
    optional(t, "n_bumps", c.verify.n_bumps, count, "verify.");
    optional(t, "bump_scale", c.verify.bump_scale, number, "verify.");
    if (t.contains("bump_seed")) c.verify.bump_seed = t.at("bump_seed").get<std::uint64_t>();
    if (t.contains("monte_carlo")) c.verify.monte_carlo = t.at("monte_carlo").get<bool>();
  }
  return c;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("config: cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("config: malformed JSON: ") + e.what());
  }
}

RunConfig load_config(const std::filesystem::path& path) { return parse_config(read_json_file(path)); }

void require_blocks(const json& j, const std::string& command) {
  std::vector<const char*> need{"schema_version", "model"};
  if (command == "simulate") need.push_back("mc");
  if (command == "price-indifference") need.insert(need.end(), {"claim", "risk_aversion", "grids"});
  if (command == "hedge-mvh") need.insert(need.end(), {"claim", "grids", "mc"});
  if (command == "verify") need.insert(need.end(), {"claim", "grids"});
  for (const char* k : need)
    if (!j.is_object() || !j.contains(k))
      throw ValidationError("config: command '" + command + "' needs block '" + k + "'");
}

json to_json(const RunConfig& c) {
  json j{{"schema_version", c.schema_version},
         {"name", c.name},
         {"model", to_json(c.model)},
         {"claim", to_json(c.claim)},
         {"risk_aversion", c.risk_aversion},
         {"x0", c.x0}};
  j["model"]["d0"] = c.d0;
  j["grids"] = {{"n_time", c.grids.n_time},
                {"n_space", c.grids.n_space},
                {"log_spot_halfwidth", c.grids.log_spot_halfwidth},
                {"l1_grid", c.grids.l1_grid},
                {"theta_tier", c.grids.theta_tier == ThetaTier::ode ? "ode" : "pde"}};
  j["mc"] = {{"n_paths", c.mc.n_paths}, {"seed", c.mc.seed}, {"n_steps", c.mc.n_steps}};
  j["tolerances"] = {{"foc", c.tolerances.foc},
                     {"picard", c.tolerances.picard},
                     {"convergence", c.tolerances.convergence}};
  j["verify"] = {{"n_bumps", c.verify.n_bumps},
                 {"bump_scale", c.verify.bump_scale},
                 {"bump_seed", c.verify.bump_seed},
                 {"monte_carlo", c.verify.monte_carlo}};
  return j;
}

HjbGridSpec RunConfig::hjb_spec() const {
  HjbGridSpec s;
  s.n_time = grids.n_time;
  s.n_space = grids.n_space;
  s.halfwidth_sd = grids.log_spot_halfwidth;
  s.control.foc_tol = tolerances.foc;
  return s;
}

MvhGridSpec RunConfig::mvh_spec() const {
  MvhGridSpec s;
  s.n_time = grids.n_time;
  s.n_space = grids.n_space;
  s.halfwidth_sd = grids.log_spot_halfwidth;
  s.tier = grids.theta_tier;
  s.picard_tol = tolerances.picard;
  return s;
}

SimulationSpec RunConfig::simulation_spec() const { return {mc.n_steps, d0, mc.seed}; }

}  // namespace twofirm
