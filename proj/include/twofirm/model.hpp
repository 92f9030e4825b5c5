#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "twofirm/parallel.hpp"
#include "twofirm/poly.hpp"

namespace twofirm {

class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Firm { A, B };

struct DefaultState {
  int hA = 0;
  int hB = 0;

  constexpr int index() const { return hA + 2 * hB; }
  static constexpr DefaultState from_index(int k) { return {k & 1, (k >> 1) & 1}; }
  constexpr bool alive(Firm f) const { return f == Firm::A ? hA == 0 : hB == 0; }
  constexpr DefaultState after(Firm f) const {
    return f == Firm::A ? DefaultState{1, hB} : DefaultState{hA, 1};
  }
  // "(0,0)" style label.
  std::string label() const;

  friend constexpr bool operator==(DefaultState, DefaultState) = default;
};

inline constexpr std::array<DefaultState, 4> kAllStates{
    DefaultState{0, 0}, DefaultState{1, 0}, DefaultState{0, 1},
    DefaultState{1, 1}};

// Coefficient values at one (t, h).
struct NodeCoeffs {
  double mu = 0, sigma = 0, sigmaA = 0, sigmaB = 0, lambdaA = 0, lambdaB = 0;

  double jump(Firm f) const { return f == Firm::A ? sigmaA : sigmaB; }
  double intensity(Firm f) const { return f == Firm::A ? lambdaA : lambdaB; }
  // Drift of the bond between defaults, net of compensators.
  double compensated_drift() const {
    return mu - sigmaA * lambdaA - sigmaB * lambdaB;
  }
};

struct StateCoeffs {
  Poly mu, sigma, sigmaA, sigmaB, lambdaA, lambdaB;

  NodeCoeffs at(double t) const {
    return {mu(t), sigma(t), sigmaA(t), sigmaB(t), lambdaA(t), lambdaB(t)};
  }
  bool is_constant() const;
  friend bool operator==(const StateCoeffs&, const StateCoeffs&) = default;
};

struct ModelParams {
  std::array<StateCoeffs, 4> states{};
  double horizon = 1.0;
  bool ordered_defaults = false;

  const StateCoeffs& operator[](DefaultState h) const { return states[h.index()]; }
  StateCoeffs& operator[](DefaultState h) { return states[h.index()]; }
  NodeCoeffs at(double t, DefaultState h) const { return (*this)[h].at(t); }
  bool constant_per_state() const;

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

// Convenience: the same constant coefficients in every state, with
// intensities switched off where a firm has already defaulted.
ModelParams constant_model(const NodeCoeffs& c, double horizon,
                           bool ordered = false);

// Number of sample times used when checking polynomial invariants on [0,T].
inline constexpr std::size_t kInvariantSamples = 257;

ModelParams validate_params(ModelParams raw);

// Throws ValidationError if sigma vanishes anywhere on a reachable state.
void require_positive_sigma(const ModelParams& p);

constexpr double kNoDefault = std::numeric_limits<double>::infinity();

struct MarketPath {
  std::vector<double> time_grid;
  std::vector<double> brownian_increments;  // dW ending at each node, 0 at t=0
  std::vector<double> bond;                 // post-jump value at each node
  std::vector<DefaultState> regime_index;   // state in force after each node
  double tauA = kNoDefault;
  double tauB = kNoDefault;
  double bond_before_tauA = 0.0;
  double bond_before_tauB = 0.0;
  bool overflow = false;

  std::size_t size() const { return time_grid.size(); }
  void clear();
};

struct SimulationSpec {
  std::size_t n_steps = 100;
  double d0 = 1.0;
  std::uint64_t seed = 0;
};

// Generates path i of a reproducible family. Cheap to copy.
class PathSimulator {
 public:
  PathSimulator(const ModelParams& validated, SimulationSpec spec);

  void generate(std::size_t path_id, MarketPath& out) const;
  MarketPath generate(std::size_t path_id) const;

  const ModelParams& params() const { return params_; }
  const SimulationSpec& spec() const { return spec_; }

 private:
  ModelParams params_;
  SimulationSpec spec_;
};

std::vector<MarketPath> simulate_paths(const ModelParams& params,
                                       std::size_t n_steps, std::size_t n_paths,
                                       double d0, std::uint64_t seed,
                                       ExecPolicy policy = ExecPolicy::parallel);

// Everything a feedback strategy may observe just before trading.
struct HedgeInput {
  double t = 0;
  double spot = 0;  // D_{t-}
  double wealth = 0;
  DefaultState state{};
  double spot_before_tauB = 0;  // meaningful only once B has defaulted
};

class Strategy {
 public:
  virtual ~Strategy() = default;
  // Money amount held in the bond.
  virtual double position(const HedgeInput& in) const = 0;
};

class ConstantStrategy final : public Strategy {
 public:
  explicit ConstantStrategy(double amount) : amount_{amount} {}
  double position(const HedgeInput&) const override { return amount_; }

 private:
  double amount_;
};

// Returns the wealth at every node of the path.
std::vector<double> simulate_wealth(const ModelParams& params,
                                    const MarketPath& path,
                                    const Strategy& strategy, double x0);
// Same recursion, terminal value only.
double terminal_wealth(const ModelParams& params, const MarketPath& path,
                       const Strategy& strategy, double x0);

// Brownian control implied by the martingale constraint on the bond.
double solve_rho(const NodeCoeffs& c, double rhoA, double rhoB);

}  // namespace twofirm
