#pragma once

// Internal unit conventions, chosen so that typical model quantities are O(1)
// and the electrical units form a consistent system:
//
//   time          ms          voltage      mV
//   current       nA          conductance  uS
//   capacitance   nF          resistance   MOhm
//   charge        pC  (= nA*ms = nF*mV)
//   length        um          area         um^2       volume  um^3
//   concentration umol/l      diffusivity  um^2/ms
//
// Quantities taken from literature-style inputs (F/m^2, Ohm*m, S/m^2, m^2/s)
// are converted at assembly time by the helpers below.

namespace mcsim::units {

inline constexpr double gas_constant = 8.314462618;   // J/(mol*K)
inline constexpr double faraday = 96485.33212;        // C/mol

// capacitance of a patch: C[nF] = C_m[F/m^2] * A[um^2] * 1e-3
inline constexpr double cap_nF(double c_per_area_si, double area_um2) {
  return c_per_area_si * area_um2 * 1e-3;
}

// conductance of a patch: g[uS] = g[S/m^2] * A[um^2] * 1e-6
inline constexpr double cond_uS(double g_per_area_si, double area_um2) {
  return g_per_area_si * area_um2 * 1e-6;
}

// diffusivity: D[um^2/ms] = D[m^2/s] * 1e9
inline constexpr double diff_um2_per_ms(double d_si) { return d_si * 1e9; }

// volume in litres from um^3 (1 um^3 = 1e-15 l)
inline constexpr double litres(double vol_um3) { return vol_um3 * 1e-15; }

inline constexpr double ms_per_s = 1e3;
inline constexpr double ms_per_min = 6e4;
inline constexpr double ms_per_h = 3.6e6;

}  // namespace mcsim::units
