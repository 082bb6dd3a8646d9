// Acceptance suite: one criterion per invocation (argv[1] = 1..10), printing
// a single pass/fail line with the measured quantities. Thresholds are fixed
// here, not configurable.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "mcsim/analysis.hpp"
#include "mcsim/bench.hpp"
#include "mcsim/engine.hpp"
#include "mcsim/mechanisms.hpp"
#include "mcsim/network.hpp"
#include "mcsim/rng.hpp"
#include "mcsim/tree_solver.hpp"

using namespace mcsim;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
};

// two worker threads keep the wall clock in check on small hosts
template <typename F>
void parallel_for(int n, F&& f) {
  std::thread t([&] {
    for (int i = 1; i < n; i += 2) f(i);
  });
  for (int i = 0; i < n; i += 2) f(i);
  t.join();
}

// ---- 1. STDP window ---------------------------------------------------------

Outcome criterion1() {
  Outcome out;
  StdpParams p;  // second-column values: tau 20/10 ms, +0.01/-0.0105 uS
  double sq = 0;
  int count = 0;
  for (double dt = -50; dt <= 50; dt += 5) {
    if (dt == 0) continue;  // the analytic window is discontinuous at zero
    const double ana = dt > 0 ? p.a_pre_uS * std::exp(-dt / p.tau_pre_ms)
                              : p.a_post_uS * std::exp(dt / p.tau_post_ms);
    const double sim = stdp_window(dt, p);
    sq += (sim - ana) * (sim - ana);
    ++count;
  }
  const double rmse = std::sqrt(sq / count);
  char buf[128];
  std::snprintf(buf, sizeof buf, "rmse=%.3g uS over %d delays", rmse, count);
  out.detail = buf;
  out.require(rmse <= 0.001, "rmse above 0.001 uS");
  return out;
}

// ---- 2. homeostasis ---------------------------------------------------------

Outcome criterion2() {
  Outcome out;
  HomeostasisConfig cfg;  // staircase 50,30,0,70,20,50 Hz in 10 s segments
  const int trials = 50;
  std::vector<std::vector<double>> seg(trials);
  parallel_for(trials, [&](int t) {
    HomeostasisConfig c = cfg;
    c.seed = 1000 + t;
    seg[t] = run_homeostasis(c).segment_rate_hz;
  });
  std::string rates;
  for (std::size_t s = 0; s < cfg.staircase_hz.size(); ++s) {
    double m = 0;
    for (int t = 0; t < trials; ++t) m += seg[t][s];
    m /= trials;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s%.1f", s ? "," : "", m);
    rates += buf;
    if (cfg.staircase_hz[s] > 0)
      out.require(m >= 45.0 && m <= 55.0,
                  "segment " + std::to_string(s) + " mean rate " +
                      std::to_string(m) + " outside [45,55]");
  }

  // without plasticity the output follows the input-rate ordering
  HomeostasisConfig open = cfg;
  open.plastic = false;
  open.homeo.w_init_nA = 2.0;
  open.seed = 7;
  const auto r = run_homeostasis(open).segment_rate_hz;
  // staircase ordering: 70 > 50(a,b) > 30 > 20 > 0
  out.require(r[3] > r[0] && r[3] > r[5], "70 Hz segment not the largest");
  out.require(r[0] > r[1] && r[5] > r[1], "50 Hz segments not above 30 Hz");
  out.require(r[1] > r[4], "30 Hz segment not above 20 Hz");
  out.require(r[4] > r[2], "20 Hz segment not above the silent window");
  out.detail = "with plasticity, segment rates (Hz): " + rates;
  return out;
}

// ---- 3. pairing curve --------------------------------------------------------

Outcome criterion3() {
  Outcome out;
  GbParams p;
  const std::vector<double> deltas = {-100, -50, -30, -20, -10, -5, 0,
                                      5,    10,  20,  30,  50,  100};
  GbPairingProtocol desk;
  desk.dt_ms = 0.5;
  desk.trials = 400;
  GbPairingProtocol ref;
  ref.dt_ms = 0.05;
  ref.trials = 4000;
  ref.seed = 999;

  std::vector<GbCurvePoint> a(deltas.size()), b(deltas.size());
  parallel_for(int(deltas.size()), [&](int i) {
    a[i] = gb_dp_curve(p, {deltas[i]}, desk).front();
    b[i] = gb_dp_curve(p, {deltas[i]}, ref).front();
  });

  // depression trough at slightly negative delays, potentiation peak at
  // slightly positive delays, both significant at 95%
  double trough = 1e9, peak = -1e9;
  double trough_hi = 0, peak_lo = 0;
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    if (deltas[i] >= -50 && deltas[i] <= -5 && a[i].mean_change < trough) {
      trough = a[i].mean_change;
      trough_hi = a[i].mean_change + a[i].change_ci_half;
    }
    if (deltas[i] >= 5 && deltas[i] <= 50 && a[i].mean_change > peak) {
      peak = a[i].mean_change;
      peak_lo = a[i].mean_change - a[i].change_ci_half;
    }
  }
  out.require(trough_hi < 0, "no significant depression trough");
  out.require(peak_lo > 0, "no significant potentiation peak");

  int overlaps = 0;
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    const double lo_a = a[i].mean_change - a[i].change_ci_half;
    const double hi_a = a[i].mean_change + a[i].change_ci_half;
    const double lo_b = b[i].mean_change - b[i].change_ci_half;
    const double hi_b = b[i].mean_change + b[i].change_ci_half;
    if (lo_a <= hi_b && lo_b <= hi_a) ++overlaps;
  }
  out.require(overlaps == int(deltas.size()),
              "dt/10 reference CI disjoint at " +
                  std::to_string(int(deltas.size()) - overlaps) + " delays");
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "trough=%.3f peak=%.3f, CI overlap %d/%d vs dt/10 4000-trial",
                trough, peak, overlaps, int(deltas.size()));
  out.detail = buf;
  return out;
}

// ---- 4. four spines ----------------------------------------------------------

Outcome criterion4() {
  Outcome out;
  HeteroConfig cfg;  // defaults carry the table values
  const auto res = run_four_spine(cfg);
  char buf[160];
  std::snprintf(buf, sizeof buf, "w=[%.3f %.3f %.3f %.3f] from %.2f",
                res.w_final[0], res.w_final[1], res.w_final[2], res.w_final[3],
                res.w_init);
  out.detail = buf;
  out.require(res.w_final[0] > res.w_init + 0.01, "spine 1 not potentiated");
  out.require(res.w_final[1] > res.w_init + 0.01, "spine 2 not potentiated");
  out.require(res.w_final[2] > res.w_init + 0.01, "spine 3 not potentiated");
  out.require(res.w_final[3] < res.w_init - 1e-4, "spine 4 not depressed");

  HeteroConfig cons;
  cons.disable_injection = true;
  cons.disable_decay = true;
  cons.t_end_ms = 500.0;
  const auto mass = run_four_spine(cons);
  out.require(std::fabs(mass.mass_final - mass.mass_initial) <=
                  1e-12 * mass.mass_initial,
              "calcium mass drift above 1e-12 relative");
  return out;
}

// ---- 5. induction protocols ---------------------------------------------------

Outcome criterion5() {
  Outcome out;
  StcSingleConfig cfg;
  const int trials = 10;
  struct Agg {
    int tag = 0, pro = 0;
    double z = 0;
  };
  std::vector<StcProtocol> protos = {StcProtocol::stet, StcProtocol::wtet,
                                     StcProtocol::slfs, StcProtocol::wlfs};
  std::vector<Agg> agg(protos.size());
  for (std::size_t pi = 0; pi < protos.size(); ++pi) {
    std::vector<StcRunResult> res(trials);
    parallel_for(trials, [&](int t) {
      res[t] = run_stc_protocol(cfg, protos[pi], t);
    });
    for (const auto& r : res) {
      agg[pi].tag += r.tag_crossed;
      agg[pi].pro += r.prp_crossed;
      agg[pi].z += r.z_final / trials;
    }
  }
  char buf[240];
  std::snprintf(buf, sizeof buf,
                "tag %d/%d/%d/%d, synthesis %d/%d/%d/%d, "
                "z %.3f/%.3f/%.3f/%.3f (STET/WTET/SLFS/WLFS)",
                agg[0].tag, agg[1].tag, agg[2].tag, agg[3].tag, agg[0].pro,
                agg[1].pro, agg[2].pro, agg[3].pro, agg[0].z, agg[1].z,
                agg[2].z, agg[3].z);
  out.detail = buf;
  for (std::size_t pi = 0; pi < protos.size(); ++pi)
    out.require(agg[pi].tag >= 8, std::string(stc_protocol_name(protos[pi])) +
                                      " tag crossings below 8/10");
  out.require(agg[0].pro >= 8, "STET synthesis crossings below 8/10");
  out.require(agg[2].pro >= 8, "SLFS synthesis crossings below 8/10");
  out.require(agg[1].pro <= 2, "WTET crosses the synthesis threshold");
  out.require(agg[3].pro <= 2, "WLFS crosses the synthesis threshold");
  out.require(agg[0].z > 0.1, "STET late phase did not grow");
  out.require(agg[2].z < -0.1, "SLFS late phase did not depress");
  out.require(std::fabs(agg[1].z) < 0.05, "WTET late phase moved");
  out.require(std::fabs(agg[3].z) < 0.05, "WLFS late phase moved");
  return out;
}

// ---- 6. saturation limit -------------------------------------------------------

Outcome criterion6() {
  Outcome out;
  StcLimitConfig cfg;
  cfg.stc.sigma_pl_mV = 0.0;
  cfg.duration_ms = 3 * 3600e3;
  const auto res = run_stc_limit(cfg);
  const StcParams& p = cfg.stc;
  const double h_star =
      (0.1 * p.h0_mV + 10.0 * p.gamma_p) / (0.1 + p.gamma_p + p.gamma_d);
  char buf[160];
  std::snprintf(buf, sizeof buf, "h=%.4f (fix %.4f), z=%.3f, late/early=%.3f",
                res.h_final, h_star, res.z_final,
                p.h0_mV * res.z_final / (res.h_final - p.h0_mV));
  out.detail = buf;
  out.require(std::fabs(res.h_final - h_star) < 0.01 * h_star,
              "early phase off its drift fixed point");
  out.require(res.z_final > 0.8, "late phase below 0.8");
  out.require(std::fabs(p.h0_mV * res.z_final - (res.h_final - p.h0_mV)) <
                  0.25 * (res.h_final - p.h0_mV),
              "late phase does not approach the early-phase plateau");

  // refinement oracle on the first 100 s
  StcLimitConfig a = cfg, b = cfg;
  a.duration_ms = 100e3;
  a.dt_ms = 0.25;
  a.trace_every_ms = 1000;
  b = a;
  b.dt_ms = 0.025;
  const auto ra = run_stc_limit(a);
  const auto rb = run_stc_limit(b);
  double max_rel = 0;
  const std::size_t n = std::min(ra.h.value.size(), rb.h.value.size());
  for (std::size_t i = 0; i < n; ++i)
    max_rel = std::max(max_rel,
                       std::fabs(ra.h.value[i] - rb.h.value[i]) / h_star);
  std::snprintf(buf, sizeof buf, "; dt-refinement max rel diff %.2e", max_rel);
  out.detail += buf;
  out.require(max_rel < 1e-3, "dt refinement above 1e-3 relative");
  return out;
}

// ---- 7. consolidation network at desk scale ------------------------------------

ConsolidationConfig desk_config(int pattern, std::uint64_t seed) {
  ConsolidationConfig cfg;
  cfg.n_cells = 500;
  cfg.n_exc = 400;
  cfg.pattern = pattern;
  cfg.seed = seed;
  return cfg;
}

Outcome criterion7() {
  Outcome out;
  const std::vector<int> sizes = {25, 37, 50, 62};
  const int reals = 24;
  std::string detail;
  for (int size : sizes) {
    std::vector<double> qs(reals);
    parallel_for(reals, [&](int r) {
      qs[r] = run_consolidation(desk_config(size, 500 + r), false).recall.q;
    });
    const auto ci = mean_ci(qs);
    char buf[64];
    std::snprintf(buf, sizeof buf, "Q10(%d)=%.3f+-%.3f ", size, ci.mean,
                  ci.half_width);
    detail += buf;
    if (size >= 50)
      out.require(ci.mean > 0 && ci.mean - ci.half_width > 0,
                  "10s-recall CI at pattern " + std::to_string(size) +
                      " does not exclude zero");
  }

  // 8h-recall: product-diffusivity ordering on the multi-compartment kind
  const std::vector<double> dps = {1e-11, 1e-15, 1e-19};
  std::vector<double> q8(dps.size());
  for (std::size_t di = 0; di < dps.size(); ++di) {
    const int r8 = 8;
    std::vector<double> qs(r8);
    parallel_for(r8, [&](int r) {
      ConsolidationConfig cfg = desk_config(62, 700 + r);
      cfg.multi_compartment = true;
      cfg.d_p = dps[di];
      qs[r] = run_consolidation(cfg, true).recall.q;
    });
    q8[di] = mean_ci(qs).mean;
  }
  char buf[96];
  std::snprintf(buf, sizeof buf, "| Q8h(D_p 1e-11,1e-15,1e-19)=%.3f,%.3f,%.3f",
                q8[0], q8[1], q8[2]);
  detail += buf;
  out.detail = detail;
  out.require(q8[0] >= q8[1] - 0.02, "Q(1e-11) not >= Q(1e-15)");
  out.require(q8[1] > q8[2] + 0.02, "Q(1e-15) not well above Q(1e-19)");
  out.require(std::fabs(q8[2]) < 0.05, "Q(1e-19) not near zero");
  return out;
}

// ---- 8. determinism across workers ---------------------------------------------

Outcome criterion8() {
  Outcome out;
  auto run = [&](int workers) {
    ConsolidationConfig cfg = desk_config(62, 42);
    cfg.workers = workers;
    return run_consolidation(cfg, false);
  };
  const auto a = run(1);
  const auto b = run(8);
  bool spikes_equal = a.spikes.t_s.size() == b.spikes.t_s.size();
  if (spikes_equal) {
    auto order = [](const SpikeData& s) {
      std::vector<std::pair<double, std::uint32_t>> v;
      for (std::size_t i = 0; i < s.t_s.size(); ++i)
        v.emplace_back(s.t_s[i], s.gid[i]);
      std::sort(v.begin(), v.end());
      return v;
    };
    spikes_equal = order(a.spikes) == order(b.spikes);
  }
  bool weights_equal = a.final_h.size() == b.final_h.size();
  if (weights_equal)
    for (std::size_t i = 0; i < a.final_h.size(); ++i)
      if (a.final_h[i] != b.final_h[i] || a.final_z[i] != b.final_z[i])
        weights_equal = false;
  char buf[96];
  std::snprintf(buf, sizeof buf, "%zu spikes, %zu plastic synapses",
                a.spikes.t_s.size(), a.final_h.size());
  out.detail = buf;
  out.require(spikes_equal, "spike rasters differ between 1 and 8 workers");
  out.require(weights_equal, "final weights differ between 1 and 8 workers");
  return out;
}

// ---- 9. busyring ---------------------------------------------------------------

Outcome criterion9() {
  Outcome out;
  BusyringSpec spec = default_busyring();  // 1024 cells, k=4, depth 2, 200 ms

  const auto counts = busyring_spike_counts(spec);
  std::size_t wrong = 0;
  for (auto c : counts)
    if (c != 10) ++wrong;
  out.require(wrong == 0, std::to_string(wrong) + " cells off 10 spikes");

  // zero-weight connections leave the voltage traces bitwise unchanged
  BusyringSpec none = spec;
  none.random_per_cell = 0;
  std::vector<double> v_load, v_none;
  busyring_spike_counts(spec, &v_load);
  busyring_spike_counts(none, &v_none);
  bool bitwise = v_load.size() == v_none.size();
  if (bitwise)
    for (std::size_t i = 0; i < v_load.size(); ++i)
      if (v_load[i] != v_none[i]) bitwise = false;
  out.require(bitwise, "zero-weight load changed a voltage trace");

  const auto stats = run_bench(spec, 10);
  BusyringSpec stdp = spec;
  stdp.stdp_on_random = true;
  const auto stats_stdp = run_bench(stdp, 3);
  double plain_prop = 0, stdp_prop = 0;
  for (const auto& t : stats.trials) plain_prop += t.propagation_s;
  plain_prop /= stats.trials.size();
  for (const auto& t : stats_stdp.trials) stdp_prop += t.propagation_s;
  stdp_prop /= stats_stdp.trials.size();

  char buf[160];
  std::snprintf(buf, sizeof buf,
                "propagation plain %.2fs vs stdp %.2fs, runtime cv %.4f",
                plain_prop, stdp_prop, stats.cv_total);
  out.detail = buf;
  out.require(stdp_prop > plain_prop, "stdp workload not slower than plain");
  out.require(stats.cv_total < 0.06, "runtime cv at or above 0.06");
  return out;
}

// ---- 10. numerics -----------------------------------------------------------

Outcome criterion10() {
  Outcome out;

  // diffusion mass conservation at 1e-12 relative
  std::vector<Segment> segs;
  segs.push_back({std::nullopt, 10.0, 1.0, Region::generic, 1.0});
  segs.push_back({0u, 6.0, 0.5, Region::generic, 1.0});
  const auto g = discretize(segs, 1.0);
  DiffusionParameters dp;
  dp.diffusivity = 1e-9;
  std::vector<double> x(g.size(), 0.0);
  x[2] = 3.0;
  double mass0 = 0;
  for (int i = 0; i < g.size(); ++i) mass0 += x[i] * g.volume_um3[i];
  double worst = 0;
  for (int s = 0; s < 5000; ++s) {
    diffusion_step(g, dp, x, {}, 0.05);
    double mass = 0;
    for (int i = 0; i < g.size(); ++i) mass += x[i] * g.volume_um3[i];
    worst = std::max(worst, std::fabs(mass - mass0) / mass0);
  }
  out.require(worst <= 1e-12, "diffusion mass drift above 1e-12 relative");

  // Box-Muller closed-form case
  const auto [z0, z1] = normal_pair(0.5, 0.25);
  out.require(std::fabs(z0) < 1e-5 && std::fabs(z1 - 1.17741) < 1e-5,
              "box-muller closed form off");

  // statelessness and moments
  const RngKey key = make_key(1, 2, 3, 4);
  RngCounter ctr;
  ctr.w[0] = 7;
  out.require(cbprng_uniform4(key, ctr) == cbprng_uniform4(key, ctr),
              "generator not stateless");
  double sum = 0, sq = 0;
  const int n = 1'000'000;
  for (int i = 0; i < n / 4; ++i) {
    RngCounter c;
    c.w[0] = i;
    for (double u : cbprng_uniform4(key, c)) {
      sum += u;
      sq += u * u;
    }
  }
  const double mean = sum / n;
  const double var = sq / n - mean * mean;
  out.require(mean > 0.499 && mean < 0.501, "uniform mean outside bounds");
  out.require(var > 0.0825 && var < 0.0842, "uniform variance outside bounds");
  std::set<std::array<std::uint64_t, 4>> seen;
  bool distinct = true;
  for (std::uint64_t k = 0; k < 10'000; ++k)
    distinct = distinct && seen.insert(threefry4x64(make_key(0, k, 0, 0), ctr)).second;
  out.require(distinct, "key collision in distinctness scan");

  // two-compartment relaxation against the closed form
  std::vector<Segment> two = {{std::nullopt, 2.0, 1.0, Region::generic, 1.0}};
  const auto g2 = discretize(two, 1.0);
  CableParameters cp;
  std::vector<double> v = {-40.0, -80.0};
  TreeSolver solver(g2);
  const double a = solver.axial_conductance_uS(cp.r_l)[1];
  const double cap = 1e-3 * cp.c_m * g2.lateral_area_um2[0] / 0.025;
  const double shrink = cap / (cap + 2 * a);
  double d = v[0] - v[1];
  bool ok2 = true;
  for (int s = 0; s < 50; ++s) {
    const double mean_before = 0.5 * (v[0] + v[1]);
    cable_step(g2, cp, v, {}, 0.025);
    d *= shrink;
    ok2 = ok2 && std::fabs(0.5 * (v[0] + v[1]) - mean_before) <
                     1e-12 * std::fabs(mean_before);
    if (std::fabs(d) > 1e-4)  // closed form until cancellation dominates
      ok2 = ok2 && std::fabs((v[0] - v[1]) - d) < 1e-9 * std::fabs(d);
  }
  out.require(ok2, "two-compartment oracle mismatch");

  // local truncation order via step halving
  std::vector<Segment> one = {{std::nullopt, 10.0, 2.0, Region::generic, 1.0}};
  const auto g1 = discretize(one, 10.0);
  CableParameters lp;
  lp.g_leak = {5.0};
  lp.e_leak = {-70.0};
  const double cap1 = 1e-3 * lp.c_m * g1.lateral_area_um2[0];
  const double gl = 1e-6 * lp.g_leak[0] * g1.lateral_area_um2[0];
  auto err = [&](double dt) {
    std::vector<double> vv = {-50.0};
    cable_step(g1, lp, vv, {}, dt);
    return std::fabs(vv[0] - (-70.0 + 20.0 * std::exp(-dt * gl / cap1)));
  };
  const double ratio = err(0.2) / err(0.1);
  out.require(ratio > 3.3 && ratio < 4.6,
              "local error ratio " + std::to_string(ratio) + " not ~4");

  char buf[96];
  std::snprintf(buf, sizeof buf,
                "mass drift %.1e, uniform mean %.4f var %.5f, order ratio %.2f",
                worst, mean, var, ratio);
  out.detail = buf + (out.detail.empty() ? "" : "; " + out.detail);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: acceptance <criterion 1..10>\n");
    return 2;
  }
  const int which = std::atoi(argv[1]);
  Outcome (*fns[])() = {criterion1, criterion2, criterion3, criterion4,
                        criterion5, criterion6, criterion7, criterion8,
                        criterion9, criterion10};
  if (which < 1 || which > 10) {
    std::fprintf(stderr, "criterion must be 1..10\n");
    return 2;
  }
  Outcome out;
  try {
    out = fns[which - 1]();
  } catch (const std::exception& e) {
    out.pass = false;
    out.detail = std::string("exception: ") + e.what();
  }
  std::printf("criterion %d: %s (%s)\n", which, out.pass ? "PASS" : "FAIL",
              out.detail.c_str());
  return out.pass ? 0 : 1;
}
