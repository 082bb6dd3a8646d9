#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mcsim/analysis.hpp"
#include "mcsim/csvio.hpp"
#include "mcsim/engine.hpp"
#include "mcsim/recipe.hpp"

namespace mcsim {

// ---- single neuron driven by plastic + static Poisson inputs ---------------

struct StdpPoissonConfig {
  double duration_ms = 10000;
  double dt_ms = 0.1;
  std::uint64_t seed = 0;
  double rate_exc_hz = 100;
  double rate_inh_hz = 30;
  double w_inh_uS = 1.0;
  double tau_syn_ms = 5.0;
  double e_exc_mV = 0.0;
  double e_inh_mV = -80.0;
  StdpParams stdp;
};

Recipe build_stdp_single_neuron(const StdpPoissonConfig& cfg);

struct StdpPoissonResult {
  std::size_t pre_count = 0;   // delivered excitatory input spikes
  std::size_t post_count = 0;  // output spikes
  TraceData weight;
  SpikeData spikes;
};

StdpPoissonResult run_stdp_poisson(const StdpPoissonConfig& cfg);

// ---- spike-driven homeostasis ------------------------------------------------

struct HomeostasisConfig {
  double dt_ms = 0.1;
  std::uint64_t seed = 0;
  double fixed_rate_hz = 50;
  double segment_ms = 10000;
  // varying-rate staircase; the third segment is the silent window
  std::vector<double> staircase_hz = {50, 30, 0, 70, 20, 50};
  HomeostasisParams homeo;
  bool plastic = true;
  double tau_syn_ms = 5.0;
  double tau_mem_ms = 10.0;
  double r_mem_MOhm = 13.0;
  double v_gap_mV = 15.0;  // threshold above rest
};

Recipe build_homeostasis(const HomeostasisConfig& cfg);

struct HomeostasisResult {
  std::vector<double> segment_rate_hz;
  TraceData weight;
  TraceData rate;  // rate in 1 s bins
};

HomeostasisResult run_homeostasis(const HomeostasisConfig& cfg);

// ---- four spines on a dendritic branch ---------------------------------------

struct HeteroConfig {
  HeteroParams params;
  FourSpineParams geom;
  double target_compartment_um = 1.0;
  double stim_interval_ms = 10.0;
  double stim_until_ms = 20.0;  // short train; calcium then decays through
                                // the depression band at the remote spines
  double t_end_ms = 1000.0;
  double dt_ms = 0.1;
  std::vector<int> active_spines = {0, 2};
  bool disable_decay = false;     // conservation variant (tau_C -> inf)
  bool disable_injection = false;
  double trace_every_ms = 10.0;
};

struct HeteroResult {
  std::array<double, 4> w_final{};
  double w_init = 0.5;
  std::array<TraceData, 4> calcium;  // at each spine head
  std::array<TraceData, 4> weight;
  double mass_initial = 0, mass_final = 0;  // total calcium amount
};

HeteroResult run_four_spine(const HeteroConfig& cfg);

// ---- two-neuron / one-synapse experiments with tagging and capture ------------

enum class StcProtocol { stet, wtet, slfs, wlfs, none };

const char* stc_protocol_name(StcProtocol p);
std::optional<StcProtocol> stc_protocol_from_name(const std::string& s);

struct StcSingleConfig {
  StcParams stc;
  double dt_ms = 0.2;
  std::uint64_t seed = 0;
  double t_onset_ms = 10000;
  double t_eval_ms = 5 * 3600e3;  // protocol outcome is read here
  double coarse_dt_ms = 10000;
  double trace_every_ms = 1000;
  // approximate point neuron receiving the synapse
  double tau_mem_ms = 10.0;
  double r_mem_MOhm = 10.0;
  double v_gap_mV = 10.0;
  double i_bg_nA = 0.3;
  double sigma_bg_nA_sqrt_ms = 1.5811388300841898;  // 0.05 nA sqrt(s)
};

// spike times of the classic induction protocols, relative to onset
std::vector<double> stc_protocol_times(StcProtocol p, double onset_ms);

struct StcRunResult {
  bool tag_crossed = false;
  bool prp_crossed = false;
  double h_final = 0, z_final = 0, p_final = 0;
  double max_abs_dh = 0;
  TraceData h, z, c, p;
};

StcRunResult run_stc_protocol(const StcSingleConfig& cfg, StcProtocol proto,
                              std::uint64_t trial);

struct StcLimitConfig {
  StcParams stc;            // sigma_pl set by caller
  double rate_hz = 500;
  double duration_ms = 3 * 3600e3;
  double dt_ms = 0.5;
  double trace_every_ms = 1000;
  std::uint64_t seed = 0;
};

struct StcLimitResult {
  double h_final = 0, z_final = 0;
  TraceData h;
};

StcLimitResult run_stc_limit(const StcLimitConfig& cfg);

// ---- recurrent memory consolidation network ----------------------------------

struct ConsolidationConfig {
  int n_cells = 2000;
  int n_exc = 1600;
  double p_conn = 0.1;
  int pattern = 150;
  std::uint64_t seed = 0;
  int workers = 1;
  double dt_ms = 0.5;

  bool multi_compartment = false;
  CellSize cell_size = CellSize::small_cells;
  DendriteSize dend_size = DendriteSize::small_dendrites;
  double d_p = 1e-11;    // m^2/s
  double d_sps = 1e-11;  // m^2/s

  StcParams stc;                  // calcium scaled by in_vivo_factor below
  double in_vivo_factor = 0.6;

  // point-neuron electrics and couplings (configuration defaults)
  double tau_mem_ms = 10.0, r_mem_MOhm = 10.0;
  double v_rev_mV = -65.0, v_reset_mV = -70.0, v_thresh_mV = -55.0;
  double t_ref_ms = 2.0;
  double i_bg_nA = 0.15;
  double sigma_bg_nA_sqrt_ms = 1.5811388300841898;
  // voltage-jump kernel: an excitatory spike with total weight w deposits
  // w * w_rec_scale mV after charge spread; the scale keeps the recurrent
  // gain subcritical at this connectivity
  double w_rec_scale = 0.25;
  double w_ei_mV = 2.1;      // exc -> inh
  double w_ie_mV = -8.4;     // inh -> exc
  double w_ii_mV = -8.4;     // inh -> inh
  double delay_ms = 3.0;

  // stimulation (learning at 10 s; recall 10 s or 8 h later on half the
  // pattern). A shared pool of sources projects onto every target neuron,
  // so stimulated cells receive correlated input volleys.
  int n_stim_sources = 25;
  double t_learn_ms = 10000, learn_duration_ms = 2000, learn_rate_hz = 100;
  double recall_duration_ms = 200, recall_rate_hz = 150;
  double w_stim_mV = 0.8;
  double coarse_dt_ms = 1000;

  std::optional<std::string> adjacency_file;  // 0/1 matrix, one row per source
  std::optional<std::string> checkpoint_out;   // final state container
};

struct ConsolidationBuild {
  Recipe recipe;
  std::vector<std::uint32_t> as, ans, ctrl;
  double c_morpho = 1.0;
};

ConsolidationBuild build_consolidation_network(const ConsolidationConfig& cfg,
                                               bool eight_hour);

struct ConsolidationResult {
  RecallResult recall;
  SpikeData spikes;
  std::vector<double> final_h, final_z;  // recurrent synapses, gid-major
};

ConsolidationResult run_consolidation(const ConsolidationConfig& cfg,
                                      bool eight_hour);

// deterministic directed Erdos-Renyi sample (no self-connections)
bool er_connected(std::uint64_t seed, std::uint32_t src, std::uint32_t dst,
                  std::uint32_t n, double p);

}  // namespace mcsim
