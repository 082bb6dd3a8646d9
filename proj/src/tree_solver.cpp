#include "mcsim/tree_solver.hpp"

#include <cmath>

#include "mcsim/units.hpp"

namespace mcsim {

double nernst(double temperature_K, int z, double conc_out, double conc_in) {
  if (z == 0) throw std::domain_error("nernst: charge number must be nonzero");
  if (!(conc_out > 0) || !(conc_in > 0))
    throw std::domain_error("nernst: concentrations must be positive");
  return units::gas_constant * temperature_K / (z * units::faraday) *
         std::log(conc_out / conc_in);
}

TreeSolver::TreeSolver(const CompartmentGrid& grid) : grid_(&grid) {}

std::vector<double> TreeSolver::axial_conductance_uS(double r_l) const {
  const auto& g = *grid_;
  std::vector<double> a(g.size(), 0.0);
  for (int i = 1; i < g.size(); ++i) {
    const int p = g.parent[i];
    // two half-cylinders in series; result in uS (um^2 / (Ohm*m * um))
    const double r = r_l * (0.5 * g.length_um[i] / g.cross_section_um2[i] +
                            0.5 * g.length_um[p] / g.cross_section_um2[p]);
    a[i] = 1.0 / r;
  }
  return a;
}

std::vector<double> TreeSolver::diffusive_coupling(double diffusivity_si) const {
  const auto& g = *grid_;
  std::vector<double> b(g.size(), 0.0);
  if (diffusivity_si <= 0) return b;
  const double d = units::diff_um2_per_ms(diffusivity_si);
  for (int i = 1; i < g.size(); ++i) {
    const int p = g.parent[i];
    const double r = 0.5 * g.length_um[i] / (d * g.cross_section_um2[i]) +
                     0.5 * g.length_um[p] / (d * g.cross_section_um2[p]);
    b[i] = 1.0 / r;
  }
  return b;
}

void solve_tree(const CompartmentGrid& g,
                std::span<const double> capacity_over_dt,
                std::span<const double> g_self,
                std::span<const double> coupling, std::span<const double> rhs,
                std::span<double> v) {
  static thread_local std::vector<double> diag_, rhs_;
  const int n = g.size();
  diag_.resize(n);
  rhs_.resize(n);
  for (int i = 0; i < n; ++i) {
    diag_[i] = capacity_over_dt[i] + g_self[i];
    rhs_[i] = capacity_over_dt[i] * v[i] + rhs[i];
  }
  for (int i = 1; i < n; ++i) {
    diag_[i] += coupling[i];
    diag_[g.parent[i]] += coupling[i];
  }
  // leaves-to-root elimination (children always have larger indices)
  for (int i = n - 1; i >= 1; --i) {
    if (diag_[i] <= 0.0) throw NumericError("tree solve: singular system");
    const double f = coupling[i] / diag_[i];
    diag_[g.parent[i]] -= f * coupling[i];
    rhs_[g.parent[i]] += f * rhs_[i];
  }
  if (diag_[0] <= 0.0) throw NumericError("tree solve: singular system");
  v[0] = rhs_[0] / diag_[0];
  for (int i = 1; i < n; ++i)
    v[i] = (rhs_[i] + coupling[i] * v[g.parent[i]]) / diag_[i];
}

void cable_step(const CompartmentGrid& grid, const CableParameters& p,
                std::span<double> voltage_mV,
                std::span<const double> injected_nA, double dt_ms) {
  if (!(dt_ms > 0)) throw NumericError("cable_step: dt must be positive");
  if (static_cast<int>(voltage_mV.size()) != grid.size())
    throw NumericError("cable_step: state size mismatch");

  TreeSolver solver(grid);
  const int n = grid.size();
  std::vector<double> cap(n), gs(n, 0.0), rhs(n, 0.0);
  for (int i = 0; i < n; ++i) {
    cap[i] = units::cap_nF(p.c_m, grid.lateral_area_um2[i]) / dt_ms;
    if (!p.g_leak.empty()) {
      const double gl = units::cond_uS(p.g_leak[i], grid.lateral_area_um2[i]);
      gs[i] = gl;
      rhs[i] = gl * (p.e_leak.empty() ? 0.0 : p.e_leak[i]);
    }
    if (!injected_nA.empty()) rhs[i] += injected_nA[i];
  }
  const auto a = solver.axial_conductance_uS(p.r_l);
  solver.solve(cap, gs, a, rhs, voltage_mV);
}

void diffusion_step(const CompartmentGrid& grid, const DiffusionParameters& p,
                    std::span<double> conc,
                    std::span<const double> source_amount_per_ms,
                    double dt_ms) {
  if (!(dt_ms > 0)) throw NumericError("diffusion_step: dt must be positive");
  if (static_cast<int>(conc.size()) != grid.size())
    throw NumericError("diffusion_step: state size mismatch");

  TreeSolver solver(grid);
  const int n = grid.size();
  std::vector<double> cap(n), gs(n, 0.0), rhs(n, 0.0);
  for (int i = 0; i < n; ++i) {
    cap[i] = grid.volume_um3[i] / dt_ms;
    if (p.decay_tau_ms > 0) gs[i] = grid.volume_um3[i] / p.decay_tau_ms;
    if (!source_amount_per_ms.empty()) rhs[i] = source_amount_per_ms[i];
  }
  const auto b = solver.diffusive_coupling(p.diffusivity);
  solver.solve(cap, gs, b, rhs, conc);
}

}  // namespace mcsim
