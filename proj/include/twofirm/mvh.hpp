#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "twofirm/claim.hpp"
#include "twofirm/controls.hpp"
#include "twofirm/grid.hpp"
#include "twofirm/model.hpp"

namespace twofirm {

// Regimes of the ordered chain (0,0) -> (1,0) -> (1,1).
inline constexpr int kRegimes = 3;
int regime_of(DefaultState h);
DefaultState state_of_regime(int k);
// Default channel that leaves regime k (k = 0, 1).
Firm exit_channel(int k);

struct JumpPair {
  double A = 0.0;
  double B = 0.0;
};

struct MvhCoefficients {
  double a = 0.0, b = 0.0, c = 0.0, u = 0.0, v = 0.0;
};

class ArbitrageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

MvhCoefficients coeffs(const JumpPair& theta, double beta, const JumpPair& U,
                       double Z, const NodeCoeffs& c);
double driver_g1(const JumpPair& theta, double beta, const NodeCoeffs& c);
double driver_g2(const JumpPair& U, double Z, const JumpPair& theta, double beta,
                 const NodeCoeffs& c);
double driver_g3(const JumpPair& U, double Z, const JumpPair& theta, double Theta,
                 const NodeCoeffs& c);

enum class ThetaTier { ode, pde };

struct MvhGridSpec {
  std::size_t n_time = 200;
  std::size_t n_space = 201;
  double halfwidth_sd = 6.0;
  ThetaTier tier = ThetaTier::ode;
  std::size_t ode_substeps = 20;
  double picard_tol = 1e-8;
  int picard_max = 50;
  double theta_floor = 1e-12;
  ExecPolicy policy = ExecPolicy::parallel;
};

MvhGridSpec halved(const MvhGridSpec& spec);

// First-BSDE quantities at one node.
struct FirstNode {
  double Theta = 1.0;
  double beta = 0.0;
  JumpPair theta;     // relative jumps
  JumpPair thetaBar;  // absolute jumps
};

// Surfaces indexed [regime][level * n_space + node].
struct MvhGrid {
  UniformGrid log_spot;
  std::vector<double> times;

  std::size_t n_levels() const { return times.size(); }
  std::size_t idx(std::size_t level, std::size_t j) const { return level * log_spot.n + j; }
  std::size_t level_of(double t) const;
  double interp(const std::vector<double>& f, std::size_t level, double y) const;
};

using RegimeSurfaces = std::array<std::vector<double>, kRegimes>;

struct BsdeFirstSolution {
  MvhGrid grid;
  ThetaTier tier = ThetaTier::ode;
  RegimeSurfaces Theta, beta, thetaA, thetaB, thetaBarA, thetaBarB;
  double delta_min = 1.0;
  int max_picard_iterations = 0;

  FirstNode node(int regime, std::size_t level, std::size_t j) const;
  FirstNode at(int regime, double t, double y) const;
};

// Regime 2 carries no surface: Y is f(D before tauB) there.
struct BsdeSecondSolution {
  MvhGrid grid;
  RegimeSurfaces Y, Z, UA, UB;
  PayoffFunction f;
};

struct BsdeThirdSolution {
  MvhGrid grid;
  RegimeSurfaces xi;
};

BsdeFirstSolution solve_theta_split(const ModelParams& params, double d0,
                                    const MvhGridSpec& spec);
BsdeSecondSolution solve_Y_split(const ModelParams& params, const DefaultableClaim& claim,
                                 const BsdeFirstSolution& first, const MvhGridSpec& spec);
BsdeThirdSolution solve_xi(const ModelParams& params, const BsdeFirstSolution& first,
                           const BsdeSecondSolution& second, const MvhGridSpec& spec);

double mvh_value(double x0, const BsdeFirstSolution& first,
                 const BsdeSecondSolution& second, const BsdeThirdSolution& third);

struct MvhSolution {
  ModelParams params;
  DefaultableClaim claim;
  double d0 = 1.0;
  BsdeFirstSolution first;
  BsdeSecondSolution second;
  BsdeThirdSolution third;

  double theta0() const;
  double y0() const;
  double xi0() const;
  double value(double x0) const { return mvh_value(x0, first, second, third); }

  // Quantities along a path; spot is the current (post-jump) bond value.
  double Theta(double t, double spot, DefaultState h) const;
  double Y(double t, double spot, DefaultState h, double spot_before_tauB) const;
  double xi(double t, double spot, DefaultState h) const;
  double J(double t, double spot, double wealth, DefaultState h,
           double spot_before_tauB) const;
  // Coefficients (a, b, c, u, v) at a node.
  MvhCoefficients coefficients(int regime, std::size_t level, std::size_t j) const;
};

MvhSolution solve_mvh(const ModelParams& params, const DefaultableClaim& claim, double d0,
                      const MvhGridSpec& spec);

// pi = -(b (X - Y) + c) / a with surfaces precomputed per node.
class MvhStrategy final : public Strategy {
 public:
  MvhStrategy(const BsdeFirstSolution& first, const BsdeSecondSolution& second,
              const ModelParams& params);
  double position(const HedgeInput& in) const override;

 private:
  const BsdeFirstSolution* first_;
  const ModelParams* params_;
  PayoffFunction f_;
  RegimeSurfaces slope_, intercept_;
};

MvhStrategy optimal_strategy_mvh(const BsdeFirstSolution& first,
                                 const BsdeSecondSolution& second,
                                 const ModelParams& params);

// Invariant diagnostics over every grid node.
struct MvhDiagnostics {
  double theta_min = 1.0, theta_max = 1.0;
  double theta_terminal_dev = 0.0;  // max |Theta(T) - 1|
  double min_one_plus_theta = 1.0;
  double min_a = 0.0;
  double min_v_minus_c2_over_a = 0.0;
  double min_xi = 0.0;
  double xi_terminal_max = 0.0;
  double max_abs_Y = 0.0;
  double recombination_A = 0.0;  // max |thetaBarA - (Theta1(shift) - Theta0)|
  double recombination_B = 0.0;
};

MvhDiagnostics diagnose(const MvhSolution& sol);

}  // namespace twofirm
