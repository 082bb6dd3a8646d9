#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "mcsim/mechanisms.hpp"
#include "mcsim/morphology.hpp"

// Declarative network description: cell kinds (morphology + membrane +
// species + labeled synapse placements), cell instances, spike sources,
// connections, and probes. The engine materializes a Recipe into runtime
// state; recipes are immutable once built.

namespace mcsim {

// ---- membrane dynamics ----------------------------------------------------

// Leaky integrate-and-fire realized on the compartment grid: uniform
// capacitance and leak densities chosen so the whole-cell time constant and
// input resistance match tau_mem and r_mem.
struct LifMembrane {
  double tau_mem_ms = 10.0;
  double r_mem_MOhm = 10.0;
  double v_rev_mV = -65.0;
  double v_reset_mV = -70.0;
  double v_thresh_mV = -55.0;
  double t_ref_ms = 2.0;
  double r_axial_ohm_m = 1.0;
  // background current I0 + sigma * N(0,1)/sqrt(dt), injected at noise_comp
  double i_bg_nA = 0.0;
  double sigma_bg_nA_sqrt_ms = 0.0;
  // background is gated OFF inside [quiet_t0, quiet_t1), e.g. to drain
  // activity before a fast-forward entry
  double bg_quiet_t0_ms = 0.0;
  double bg_quiet_t1_ms = 0.0;
  int noise_comp = 0;
  int detector_comp = 0;
  bool exact = false;  // closed-form point update instead of the cable solve
};

// Hodgkin-Huxley soma with passive dendrites.
struct HhMembrane {
  double c_m = 1e-2;              // F/m^2
  double r_axial_ohm_m = 1.0;
  double g_leak = 3.0;            // S/m^2
  double e_leak_mV = -54.387;
  double g_na = 1200.0;           // S/m^2, soma only
  double e_na_mV = 50.0;
  double g_k = 360.0;             // S/m^2, soma only
  double e_k_mV = -77.0;
  double v_init_mV = -65.0;
  double threshold_mV = -20.0;    // detector with hysteresis
  int detector_comp = 0;
};

// Diffusion-only cells (no electrical state).
struct NoMembrane {};

using Membrane = std::variant<LifMembrane, HhMembrane, NoMembrane>;

// ---- species and synapses ---------------------------------------------------

struct SpeciesSpec {
  std::string name;
  double diffusivity = 0.0;  // m^2/s
  double decay_tau_ms = 0.0; // <= 0: none
  double init = 0.0;
};

enum class SynKind : std::uint8_t {
  static_charge,   // weight = instantaneous voltage jump (mV) after spread
  static_cond,     // weight = conductance jump (uS), exponential kernel
  static_current,  // weight = current jump (nA), exponential kernel
  stdp_cond,       // plastic conductance synapse with eligibility traces
  homeo_current,   // current synapse under spike-driven homeostasis
  stc_charge,      // two-phase plastic synapse, charge kernel
};

struct SynSpec {
  SynKind kind = SynKind::static_charge;
  double tau_syn_ms = 5.0;   // kernel time constant (cond/current kinds)
  double e_rev_mV = 0.0;     // conductance kinds
  StdpParams stdp;
  HomeostasisParams homeo;
  StcParams stc;
  double calcium_scale = 1.0;  // in vivo correction on c_pre/c_post
};

// Pre-placed (count > 0) or per-connection (count == 0) synapse group.
struct PlacementSpec {
  std::string label;
  SynSpec syn;
  int comp = 0;
  int count = 0;
};

struct PrpUnitSpec {
  bool enabled = false;
  int comp = 0;  // soma-center compartment
};

struct CellKindSpec {
  std::vector<Segment> segments;
  double target_compartment_um = 1.0;
  Membrane membrane = NoMembrane{};
  std::vector<SpeciesSpec> species;
  std::vector<PlacementSpec> placements;
  PrpUnitSpec prp;
  std::string sps_species = "SPS";  // tagging signal written by stc synapses
  std::string prp_species = "PRP";  // read by stc late phase
};

// ---- sources, connections, selection -----------------------------------------

struct PoissonWindow {
  double t0_ms = 0, t1_ms = 0;
  double rate_hz = 0;
};

struct PoissonSource {
  std::vector<PoissonWindow> windows;
};
struct RegularSource {
  double t0_ms = 0, period_ms = 0;
  std::int64_t count = 0;
};
struct ScriptedSource {
  std::vector<double> times_ms;
};

using SourceSpec = std::variant<PoissonSource, RegularSource, ScriptedSource>;

enum class SelectionPolicy : std::uint8_t { univalent, round_robin, round_robin_halt };

struct TargetingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Stateful cursor shared per (cell,label) group during connection resolution.
struct SelectionCursor {
  int cursor = 0;
};

// round_robin returns the cursor then advances; round_robin_halt returns the
// cursor without advancing; univalent requires a single-item group.
int select_target(int group_size, SelectionPolicy policy, SelectionCursor& cur);

struct ConnectionSpec {
  bool from_source = false;
  std::uint32_t src = 0;  // cell gid or source id
  std::uint32_t dst = 0;
  std::string label;
  SelectionPolicy policy = SelectionPolicy::univalent;
  double weight = 0.0;
  double delay_ms = 1.0;
};

// ---- probes -----------------------------------------------------------------

enum class ProbeWhat : std::uint8_t {
  voltage,
  species,
  syn_weight,      // effective/total weight per kind
  syn_h,
  syn_z,
  syn_c,
  syn_kernel,      // conductance or current kernel state
};

struct ProbeSpec {
  std::uint32_t gid = 0;
  ProbeWhat what = ProbeWhat::voltage;
  int comp = 0;             // voltage/species
  int species = 0;
  std::string label;        // synapse probes
  int instance = 0;
  int every_steps = 1;
};

struct Recipe {
  std::vector<CellKindSpec> kinds;
  std::vector<std::uint32_t> cell_kind;  // per gid
  std::vector<SourceSpec> sources;
  std::vector<ConnectionSpec> connections;
  std::vector<ProbeSpec> probes;
};

}  // namespace mcsim
