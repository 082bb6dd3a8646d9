#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "mcsim/rng.hpp"

// Plasticity and synapse dynamics. Each rule is a parameter struct plus a
// small state struct and free update functions: discrete handlers applied on
// pre-/postsynaptic spikes, and a per-step continuous update. The functions
// are engine-agnostic so tests can drive them with exact event times.

namespace mcsim {

inline bool above(double x, double threshold) { return x > threshold; }

// ---- pair-based STDP (eligibility traces, all-to-all interaction) -------

struct StdpParams {
  double tau_pre_ms = 20.0;
  double tau_post_ms = 10.0;
  double a_pre_uS = 0.01;      // > 0
  double a_post_uS = -0.0105;  // < 0
  double w0_uS = 1.0;
  double wmax_uS = 10.0;
};

struct StdpState {
  double a_pre = 0.0;
  double a_post = 0.0;
  double w = 0.0;
};

inline void stdp_decay(StdpState& s, const StdpParams& p, double dt_ms) {
  s.a_pre *= std::exp(-dt_ms / p.tau_pre_ms);
  s.a_post *= std::exp(-dt_ms / p.tau_post_ms);
}

inline void stdp_on_pre(StdpState& s, const StdpParams& p) {
  s.a_pre += p.a_pre_uS;
  s.w += s.a_post;
}

inline void stdp_on_post(StdpState& s, const StdpParams& p) {
  s.a_post += p.a_post_uS;
  s.w += s.a_pre;
}

// contribution to postsynaptic potentials, clipped to [0, wmax]
inline double stdp_effective_weight(const StdpState& s, const StdpParams& p) {
  return std::fmin(std::fmax(s.w, 0.0), p.wmax_uS);
}

// ---- spike-driven homeostasis -------------------------------------------

struct HomeostasisParams {
  double dw_plus_nA = 0.35;
  double dw_minus_nA = -0.35;
  double w_init_nA = 0.0;
  double wmax_nA = 5.0;
  double w_varying_nA = 3.5;  // static companion synapse
};

struct HomeostasisState {
  double w = 0.0;
};

inline void homeostasis_on_pre(HomeostasisState& s, const HomeostasisParams& p) {
  s.w = std::fmin(s.w + p.dw_plus_nA, p.wmax_nA);
}

inline void homeostasis_on_post(HomeostasisState& s,
                                const HomeostasisParams& p) {
  s.w = std::fmax(s.w + p.dw_minus_nA, 0.0);
}

// ---- calcium-based bistable rule (dimensionless weight) ------------------

struct GbParams {
  double tau_w_ms = 150e3;
  double w_star = 0.5;
  double gamma_p = 321.808;
  double gamma_d = 200.0;
  double theta_p = 1.3;
  double theta_d = 1.0;
  double sigma_pl = 2.8248;
  double tau_c_ms = 20.0;
  double c_pre = 1.0;
  double c_post = 2.0;
  double t_c_delay_ms = 13.7;
};

struct GbState {
  double w = 0.0;
  double c = 0.0;
};

inline void gb_calcium_decay(GbState& s, const GbParams& p, double dt_ms) {
  s.c *= std::exp(-dt_ms / p.tau_c_ms);
}

// delayed presynaptic calcium arrival (schedule at t_pre + t_c_delay)
inline void gb_on_pre_calcium(GbState& s, const GbParams& p) { s.c += p.c_pre; }
inline void gb_on_post(GbState& s, const GbParams& p) { s.c += p.c_post; }

inline double gb_drift(double w, double c, const GbParams& p) {
  double d = -w * (1.0 - w) * (p.w_star - w);
  if (above(c, p.theta_p)) d += p.gamma_p * (1.0 - w);
  if (above(c, p.theta_d)) d -= p.gamma_d * w;
  return d / p.tau_w_ms;  // per ms
}

// Euler-Maruyama step of the weight; noise is active only while a calcium
// threshold is crossed.
inline void gb_weight_step(GbState& s, const GbParams& p, double dt_ms,
                           double normal_draw) {
  const int crossings =
      int(above(s.c, p.theta_p)) + int(above(s.c, p.theta_d));
  double dw = gb_drift(s.w, s.c, p) * dt_ms;
  if (crossings > 0 && p.sigma_pl != 0.0)
    dw += p.sigma_pl * std::sqrt(double(crossings) / p.tau_w_ms) *
          std::sqrt(dt_ms) * normal_draw;
  s.w += dw;
}

// ---- heterosynaptic calcium-diffusion rule -------------------------------

struct HeteroParams {
  double gamma_p = 90.0;    // 1/s
  double gamma_d = 0.01;    // 1/s
  double theta_p = 0.11;    // umol/l
  double theta_d = 0.05;    // umol/l
  double i0_pA = 4.0;
  double tau_i_ms = 1.0;
  double tau_c_ms = 100.0;
  double diffusivity = 2.2e-10;  // m^2/s
  double ca_fraction = 0.11;     // fraction of current carried by Ca
  double w_init = 0.3;
};

struct HeteroSpineState {
  double w = 0.3;
  double inj = 0.0;  // summed exponential injection amplitude, pA
};

inline void hetero_on_pre(HeteroSpineState& s, const HeteroParams& p) {
  s.inj += p.i0_pA;
}

inline void hetero_decay_injection(HeteroSpineState& s, const HeteroParams& p,
                                   double dt_ms) {
  s.inj *= std::exp(-dt_ms / p.tau_i_ms);
}

// calcium amount rate (umol/l * um^3 per ms) delivered into the spine head;
// phi = gamma * I / (z_Ca F V) with z_Ca = 2, scaled by the current weight.
// pA -> umol/ms gives I * 1e-9 / (2F); the internal amount unit is
// umol/l * um^3 = 1e-15 umol, so the rate is gamma * I_pA * 1e6 / (2F).
inline double hetero_ca_amount_rate(const HeteroSpineState& s,
                                    const HeteroParams& p) {
  return p.ca_fraction * (s.w * s.inj) * 1e6 / (2.0 * 96485.33212);
}

inline void hetero_weight_step(HeteroSpineState& s, const HeteroParams& p,
                               double conc_at_head, double dt_ms) {
  double d = 0.0;
  if (above(conc_at_head, p.theta_p)) d += p.gamma_p * (1.0 - s.w);
  if (above(conc_at_head, p.theta_d)) d -= p.gamma_d * s.w;
  s.w += d * dt_ms * 1e-3;  // rates are per second
}

// ---- two-phase rule with tagging and capture ------------------------------

struct StcParams {
  double h0_mV = 4.20075;
  double tau_h_ms = 688.4e3;
  double tau_c_ms = 48.8;
  double gamma_p = 1645.6;
  double gamma_d = 313.1;
  double theta_p = 3.0;
  double theta_d = 1.2;
  double sigma_pl_mV = 2.90436;
  double c_pre = 1.0;      // x0.6 in networks (in vivo adjustment)
  double c_post = 0.2758;  // x0.6 in networks
  double t_c_delay_ms = 18.8;
  double tau_z_ms = 3600e3;
  double f_int = 0.1;         // l/umol
  double theta_tag_mV = 0.840149;
  // synthesis unit
  double tau_p_ms = 3600e3;
  double p_max = 10.0;        // umol/l
  double theta_pro_mV = 2.10037;
};

struct StcState {
  double h = 4.20075;
  double z = 0.0;
  double c = 0.0;
};

inline void stc_calcium_decay(StcState& s, const StcParams& p, double dt_ms) {
  s.c *= std::exp(-dt_ms / p.tau_c_ms);
}

inline void stc_on_pre_calcium(StcState& s, const StcParams& p, double scale = 1.0) {
  s.c += p.c_pre * scale;
}
inline void stc_on_post(StcState& s, const StcParams& p, double scale = 1.0) {
  s.c += p.c_post * scale;
}

inline double stc_early_drift(double h, double c, const StcParams& p) {
  double d = 0.1 * (p.h0_mV - h);
  if (above(c, p.theta_p)) d += p.gamma_p * (10.0 - h);
  if (above(c, p.theta_d)) d -= p.gamma_d * h;
  return d / p.tau_h_ms;  // mV per ms
}

inline void stc_early_step(StcState& s, const StcParams& p, double dt_ms,
                           double normal_draw) {
  const int crossings =
      int(above(s.c, p.theta_p)) + int(above(s.c, p.theta_d));
  double dh = stc_early_drift(s.h, s.c, p) * dt_ms;
  if (crossings > 0 && p.sigma_pl_mV != 0.0)
    dh += p.sigma_pl_mV * std::sqrt(double(crossings) / p.tau_h_ms) *
          std::sqrt(dt_ms) * normal_draw;
  s.h += dh;
}

inline bool stc_tagged(const StcState& s, const StcParams& p) {
  return std::fabs(s.h - p.h0_mV) > p.theta_tag_mV;
}

inline void stc_late_step(StcState& s, const StcParams& p, double prp_conc,
                          double dt_ms) {
  if (prp_conc <= 0.0) return;
  double d = 0.0;
  if (above(s.h - p.h0_mV, p.theta_tag_mV)) d += (1.0 - s.z);
  if (above(p.h0_mV - s.h, p.theta_tag_mV)) d -= (s.z + 0.5);
  s.z += prp_conc * p.f_int * d * dt_ms / p.tau_z_ms;
}

inline double stc_total_weight(const StcState& s, const StcParams& p) {
  return s.h + p.h0_mV * s.z;
}

// ---- synthesis of plasticity products at the soma -------------------------

// Production switches on while the trigger-signal concentration at the soma
// center exceeds theta_pro / V_tot, and runs at V_tot * p_max / tau_p so the
// total amount relaxes to p_max * V_tot under sustained drive.
struct PrpSynthesisParams {
  double theta_pro_star = 0.0;   // theta_pro / V_tot (concentration units)
  double rate_amount_per_ms = 0.0;  // V_tot * p_max / tau_p
};

inline PrpSynthesisParams make_prp_synthesis(const StcParams& p,
                                             double total_volume_um3) {
  return PrpSynthesisParams{p.theta_pro_mV / total_volume_um3,
                            total_volume_um3 * p.p_max / p.tau_p_ms};
}

inline double prp_production(const PrpSynthesisParams& p, double sps_conc) {
  return above(sps_conc, p.theta_pro_star) ? p.rate_amount_per_ms : 0.0;
}

// ---- protocol drivers ------------------------------------------------------

// Weight change per pair for two regular trains phase-shifted by delta_t
// (post relative to pre). Event-exact: traces decay in closed form between
// events, so the result carries no timestep error.
double stdp_window(double delta_t_ms, const StdpParams& p, int n_pairs = 60,
                   double period_ms = 1000.0);

struct GbPairingProtocol {
  int n_pairs = 60;
  double period_ms = 1000.0;   // 1 Hz
  double settle_ms = 5000.0;
  double dt_ms = 0.5;
  int trials = 400;
  std::uint64_t seed = 0;
};

struct GbCurvePoint {
  double delta_t_ms = 0;
  double mean_initial = 0;
  double mean_final = 0;
  double mean_change = 0;       // mean(w_end - w_0)
  double change_ci_half = 0;    // 95% CI half-width of the mean change
  double ratio = 0;             // mean(w_end) / mean(w_0)
};

// One pairing trial. w0 is drawn 0 or 1 from the trial key; returns final w.
double gb_pairing_trial(const GbParams& p, double delta_t_ms,
                        const GbPairingProtocol& proto, std::uint64_t trial,
                        std::uint64_t delta_index, double* w0_out = nullptr);

// Mean weight change over trials for each delta_t.
std::vector<GbCurvePoint> gb_dp_curve(const GbParams& p,
                                      const std::vector<double>& delta_ts_ms,
                                      const GbPairingProtocol& proto);

}  // namespace mcsim
