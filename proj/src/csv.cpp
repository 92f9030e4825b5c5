#include "twofirm/csv.hpp"

#include <charconv>

namespace twofirm {

std::string format_double(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

namespace {

void write_path(std::ostream& os, std::size_t id, const MarketPath& p) {
  for (std::size_t k = 0; k < p.size(); ++k) {
    os << id << ',' << k << ',' << format_double(p.time_grid[k]) << ','
       << format_double(p.brownian_increments[k]) << ',' << format_double(p.bond[k]) << ','
       << p.regime_index[k].hA << ',' << p.regime_index[k].hB << '\n';
  }
}

double at_or_zero(const std::vector<double>& v, std::size_t i) { return i < v.size() ? v[i] : 0.0; }

}  // namespace

void write_paths_csv(std::ostream& os, std::span<const MarketPath> paths) {
  os << "path_id,step,t,dW,bond,hA,hB\n";
  for (std::size_t i = 0; i < paths.size(); ++i) write_path(os, i, paths[i]);
}

void write_paths_csv(std::ostream& os, const PathSimulator& sim, std::size_t n_paths) {
  os << "path_id,step,t,dW,bond,hA,hB\n";
  MarketPath p;
  for (std::size_t i = 0; i < n_paths; ++i) {
    sim.generate(i, p);
    write_path(os, i, p);
  }
}

void write_value_surface_csv(std::ostream& os, const ValueSurface& s) {
  os << "state,t,x,V,dVdx,rhoA_opt,rhoB_opt,rho_opt,pi_star\n";
  for (DefaultState h : kAllStates) {
    const int k = h.index();
    for (std::size_t n = 0; n < s.n_levels(); ++n) {
      for (std::size_t j = 0; j < s.log_spot.n; ++j) {
        const std::size_t id = s.idx(n, j);
        os << h.hA << h.hB << ',' << format_double(s.times[n]) << ','
           << format_double(s.log_spot.at(j)) << ',' << format_double(s.V[k][id]) << ','
           << format_double(s.dVdy[k][id]) << ',' << format_double(at_or_zero(s.rhoA[k], id))
           << ',' << format_double(at_or_zero(s.rhoB[k], id)) << ','
           << format_double(at_or_zero(s.rho[k], id)) << ','
           << format_double(at_or_zero(s.pi[k], id)) << '\n';
      }
    }
  }
}

void write_mvh_csv(std::ostream& os, const MvhSolution& sol) {
  os << "regime,l1,t,x,Theta,beta,thetaA,thetaB,Y,Z,UA,UB,xi\n";
  const BsdeFirstSolution& f = sol.first;
  const BsdeSecondSolution& s = sol.second;
  const MvhGrid& g = f.grid;
  for (int k = 0; k < kRegimes; ++k) {
    for (std::size_t n = 0; n < g.n_levels(); ++n) {
      for (std::size_t j = 0; j < g.log_spot.n; ++j) {
        const std::size_t id = g.idx(n, j);
        os << k << ",," << format_double(g.times[n]) << ',' << format_double(g.log_spot.at(j))
           << ',' << format_double(at_or_zero(f.Theta[k], id)) << ','
           << format_double(at_or_zero(f.beta[k], id)) << ','
           << format_double(at_or_zero(f.thetaA[k], id)) << ','
           << format_double(at_or_zero(f.thetaB[k], id)) << ','
           << format_double(at_or_zero(s.Y[k], id)) << ',' << format_double(at_or_zero(s.Z[k], id))
           << ',' << format_double(at_or_zero(s.UA[k], id)) << ','
           << format_double(at_or_zero(s.UB[k], id)) << ','
           << format_double(at_or_zero(sol.third.xi[k], id)) << '\n';
      }
    }
  }
}

}  // namespace twofirm
