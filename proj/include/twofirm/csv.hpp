#pragma once

#include <ostream>
#include <span>
#include <string>

#include "twofirm/hjb.hpp"
#include "twofirm/model.hpp"
#include "twofirm/mvh.hpp"

namespace twofirm {

// Shortest round-trip decimal, independent of the stream locale.
std::string format_double(double v);

// path_id, step, t, dW, bond, hA, hB
void write_paths_csv(std::ostream& os, std::span<const MarketPath> paths);
// Streams n_paths generated paths without holding them in memory.
void write_paths_csv(std::ostream& os, const PathSimulator& sim, std::size_t n_paths);

// state, t, x, V, dVdx, rhoA_opt, rhoB_opt, rho_opt, pi_star with x the log-spot.
void write_value_surface_csv(std::ostream& os, const ValueSurface& s);

// regime, l1, t, x, Theta, beta, thetaA, thetaB, Y, Z, UA, UB, xi; l1 is blank.
void write_mvh_csv(std::ostream& os, const MvhSolution& sol);

}  // namespace twofirm
