#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "json.hpp"
#include "twofirm/claim.hpp"
#include "twofirm/hjb.hpp"
#include "twofirm/model.hpp"
#include "twofirm/mvh.hpp"

namespace twofirm {

inline constexpr int kSchemaVersion = 1;

struct GridConfig {
  std::size_t n_time = 200;
  std::size_t n_space = 201;
  double log_spot_halfwidth = 6.0;  // in terminal log-spot standard deviations
  std::size_t l1_grid = 0;          // accepted, unused: regime 1 does not depend on tauA
  ThetaTier theta_tier = ThetaTier::ode;

  friend bool operator==(const GridConfig&, const GridConfig&) = default;
};

struct McConfig {
  std::size_t n_paths = 10000;
  std::uint64_t seed = 1;
  std::size_t n_steps = 200;

  friend bool operator==(const McConfig&, const McConfig&) = default;
};

struct Tolerances {
  double foc = 1e-10;
  double picard = 1e-8;
  double convergence = 1e-2;  // relative change allowed under grid halving

  friend bool operator==(const Tolerances&, const Tolerances&) = default;
};

struct VerifyConfig {
  std::size_t n_bumps = 10;
  double bump_scale = 0.1;
  std::uint64_t bump_seed = 7;
  bool monte_carlo = true;

  friend bool operator==(const VerifyConfig&, const VerifyConfig&) = default;
};

struct RunConfig {
  int schema_version = kSchemaVersion;
  std::string name;
  ModelParams model;
  double d0 = 1.0;
  DefaultableClaim claim = DefaultableClaim::zero();
  double risk_aversion = 1.0;
  double x0 = 0.0;
  GridConfig grids;
  McConfig mc;
  Tolerances tolerances;
  VerifyConfig verify;

  HjbGridSpec hjb_spec() const;
  MvhGridSpec mvh_spec() const;
  SimulationSpec simulation_spec() const;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

// Throws ValidationError naming the offending field or invariant.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::filesystem::path& path);
nlohmann::json read_json_file(const std::filesystem::path& path);
// Throws ValidationError unless every block the command reads is present.
void require_blocks(const nlohmann::json& j, const std::string& command);
nlohmann::json to_json(const RunConfig& c);

nlohmann::json to_json(const ModelParams& p);
ModelParams model_from_json(const nlohmann::json& j);
nlohmann::json to_json(const PayoffFunction& f);
PayoffFunction payoff_from_json(const nlohmann::json& j);
nlohmann::json to_json(const DefaultableClaim& c);
DefaultableClaim claim_from_json(const nlohmann::json& j);

}  // namespace twofirm
