#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "mcsim/morphology.hpp"

namespace mcsim {

struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// E_X = RT/(z F) * ln(Xo/Xi), in volts. Concentrations must be positive and
// z nonzero.
double nernst(double temperature_K, int z, double conc_out, double conc_in);

struct CableParameters {
  double c_m = 1e-2;        // membrane capacitance, F/m^2
  double r_l = 1.0;         // axial resistivity, Ohm*m
  // per-compartment channel terms; either may be empty (treated as zero)
  std::vector<double> g_leak;  // S/m^2
  std::vector<double> e_leak;  // mV
};

struct DiffusionParameters {
  double diffusivity = 0.0;           // m^2/s
  double decay_tau_ms = 0.0;          // <= 0 means no decay
};

// Implicit (backward-Euler) solve on a compartment tree: one symmetric
// elimination/back-substitution pass. Compartments are ordered parents-first,
// so the loops are a Hines solve. Scratch space is thread-local.
void solve_tree(const CompartmentGrid& grid,
                std::span<const double> capacity_over_dt,
                std::span<const double> g_self,
                std::span<const double> coupling, std::span<const double> rhs,
                std::span<double> v);

// Convenience wrapper owning the assembly helpers.
class TreeSolver {
 public:
  explicit TreeSolver(const CompartmentGrid& grid);

  const CompartmentGrid& grid() const { return *grid_; }

  // Axial conductances (uS) between each compartment and its parent, for
  // resistivity r_l (Ohm*m). Entry 0 is unused.
  std::vector<double> axial_conductance_uS(double r_l) const;

  // Diffusive couplings (um^3/ms) for diffusivity in m^2/s.
  std::vector<double> diffusive_coupling(double diffusivity_si) const;

  // Solves (c/dt + g + L) v = c/dt * v_prev + rhs, where L is the tree
  // Laplacian built from `coupling`, c is a per-compartment "capacity"
  // (nF for the cable equation, um^3 for diffusion), g a per-compartment
  // self-conductance term and rhs an explicit source. v is updated in place.
  void solve(std::span<const double> capacity_over_dt,
             std::span<const double> g_self,
             std::span<const double> coupling, std::span<const double> rhs,
             std::span<double> v) {
    solve_tree(*grid_, capacity_over_dt, g_self, coupling, rhs, v);
  }

 private:
  const CompartmentGrid* grid_;
};

// One backward-Euler step of the cable equation with sealed ends.
// `voltage_mV` is updated in place; `injected_nA` may be empty.
void cable_step(const CompartmentGrid& grid, const CableParameters& p,
                std::span<double> voltage_mV, std::span<const double> injected_nA,
                double dt_ms);

// One backward-Euler step of particle diffusion with sealed ends.
// `source_amount_per_ms` holds amount rates (concentration * um^3 / ms) and
// may be empty.
void diffusion_step(const CompartmentGrid& grid, const DiffusionParameters& p,
                    std::span<double> conc,
                    std::span<const double> source_amount_per_ms, double dt_ms);

}  // namespace mcsim
