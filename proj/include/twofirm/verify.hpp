#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "twofirm/closed_forms.hpp"
#include "twofirm/config.hpp"
#include "twofirm/hjb.hpp"

namespace twofirm {

enum class CheckStatus { pass, fail, skipped, report };
std::string to_string(CheckStatus s);

struct CheckResult {
  CheckResult(std::string n, CheckStatus s = CheckStatus::pass, std::string d = {})
      : name{std::move(n)}, status{s}, detail{std::move(d)} {}

  std::string name;
  CheckStatus status = CheckStatus::pass;
  std::string detail;
  nlohmann::json values = nlohmann::json::object();
};

struct SuiteReport {
  std::vector<CheckResult> checks;

  bool all_pass() const;
  nlohmann::json to_json() const;
};

struct VerifyOptions {
  bool monte_carlo = true;
};

// Every check applicable to the configured model and claim.
SuiteReport run_verify(const RunConfig& cfg, const VerifyOptions& opt = {});

// Closed-form and brute-force oracle values next to the solver values.
nlohmann::json oracle_report(const RunConfig& cfg);

// OneDefaultParams read off an ordered one-default model, if it has that shape.
// The returned parameters may still violate the closed-form constraint.
std::optional<OneDefaultParams> match_one_default(const ModelParams& p);

bool hjb_applicable(const ModelParams& p, const DefaultableClaim& claim);
bool mvh_applicable(const ModelParams& p, const DefaultableClaim& claim);

struct TreeComparison {
  double hjb = 0.0;
  double hjb_halved = 0.0;
  double tree1 = 0.0;
  double tree2 = 0.0;
  double tree3 = 0.0;
  double tree2_fine = 0.0;  // 2 periods, 11 Gauss-Hermite nodes
  // max(|tree2 - tree1|, 3 |tree3 - tree2|) + |tree2 - tree2_fine| + |hjb - hjb_halved|.
  // The first term is the larger of two first-order estimates of the
  // 2-period time-step error.
  double tolerance = 0.0;
  bool pass = false;
};

// HJB value at t=0 against the 2-period tree. Needs constant coefficients.
TreeComparison compare_hjb_tree(const ModelParams& p, const DefaultableClaim& claim,
                                RiskAversion delta, double d0, const HjbGridSpec& spec);

}  // namespace twofirm
