#include "mcsim/mechanisms.hpp"

#include <algorithm>

#include "mcsim/analysis.hpp"

namespace mcsim {

double stdp_window(double delta_t_ms, const StdpParams& p, int n_pairs,
                   double period_ms) {
  // exact event-driven evaluation of the trace equations
  struct Ev {
    double t;
    bool pre;
  };
  std::vector<Ev> events;
  events.reserve(2 * n_pairs);
  const double t0 = std::max(0.0, -delta_t_ms);
  for (int k = 0; k < n_pairs; ++k) {
    events.push_back({t0 + k * period_ms, true});
    events.push_back({t0 + k * period_ms + delta_t_ms, false});
  }
  std::stable_sort(events.begin(), events.end(),
                   [](const Ev& a, const Ev& b) { return a.t < b.t; });

  StdpState s;
  s.w = p.w0_uS;
  double t_last = 0.0;
  for (const auto& ev : events) {
    stdp_decay(s, p, ev.t - t_last);
    t_last = ev.t;
    if (ev.pre)
      stdp_on_pre(s, p);
    else
      stdp_on_post(s, p);
  }
  return (s.w - p.w0_uS) / n_pairs;
}

double gb_pairing_trial(const GbParams& p, double delta_t_ms,
                        const GbPairingProtocol& proto, std::uint64_t trial,
                        std::uint64_t delta_index, double* w0_out) {
  const double dt = proto.dt_ms;
  const auto step_of = [dt](double t) {
    return static_cast<std::int64_t>(std::ceil(t / dt - 1e-9));
  };

  // calcium jump schedule: presynaptic contributions arrive delayed
  std::vector<std::pair<std::int64_t, double>> jumps;
  jumps.reserve(2 * proto.n_pairs);
  const double t0 = 100.0 + std::max(0.0, -delta_t_ms);
  for (int k = 0; k < proto.n_pairs; ++k) {
    const double t_pre = t0 + k * proto.period_ms;
    jumps.emplace_back(step_of(t_pre + p.t_c_delay_ms), p.c_pre);
    jumps.emplace_back(step_of(t_pre + delta_t_ms), p.c_post);
  }
  std::sort(jumps.begin(), jumps.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  const std::int64_t n_steps =
      step_of(t0 + proto.n_pairs * proto.period_ms + proto.settle_ms);

  const RngKey init_key = make_key(proto.seed, trial, delta_index, 0);
  const RngKey noise_key = make_key(proto.seed, trial, delta_index, 1);

  GbState s;
  s.w = uniform_for(init_key, 0) < 0.5 ? 0.0 : 1.0;
  if (w0_out) *w0_out = s.w;

  const double cdecay = std::exp(-dt / p.tau_c_ms);
  std::size_t jp = 0;
  for (std::int64_t step = 0; step < n_steps; ++step) {
    while (jp < jumps.size() && jumps[jp].first <= step) {
      s.c += jumps[jp].second;
      ++jp;
    }
    const bool hi = above(s.c, p.theta_p);
    const bool lo = above(s.c, p.theta_d);
    double dw = gb_drift(s.w, s.c, p) * dt;
    if ((hi || lo) && p.sigma_pl != 0.0) {
      const double nrm =
          normal_for(noise_key, static_cast<std::uint64_t>(step));
      dw += p.sigma_pl * std::sqrt(double(int(hi) + int(lo)) / p.tau_w_ms) *
            std::sqrt(dt) * nrm;
    }
    s.w += dw;
    s.c *= cdecay;
  }
  return s.w;
}

std::vector<GbCurvePoint> gb_dp_curve(const GbParams& p,
                                      const std::vector<double>& delta_ts_ms,
                                      const GbPairingProtocol& proto) {
  std::vector<GbCurvePoint> curve;
  curve.reserve(delta_ts_ms.size());
  for (std::size_t di = 0; di < delta_ts_ms.size(); ++di) {
    std::vector<double> change(proto.trials);
    double sum_w0 = 0, sum_wf = 0;
    for (int tr = 0; tr < proto.trials; ++tr) {
      double w0 = 0;
      const double wf =
          gb_pairing_trial(p, delta_ts_ms[di], proto, tr, di, &w0);
      change[tr] = wf - w0;
      sum_w0 += w0;
      sum_wf += wf;
    }
    const auto ci = mean_ci(change);
    GbCurvePoint pt;
    pt.delta_t_ms = delta_ts_ms[di];
    pt.mean_initial = sum_w0 / proto.trials;
    pt.mean_final = sum_wf / proto.trials;
    pt.mean_change = ci.mean;
    pt.change_ci_half = ci.half_width;
    pt.ratio = pt.mean_initial != 0 ? pt.mean_final / pt.mean_initial : 0.0;
    curve.push_back(pt);
  }
  return curve;
}

}  // namespace mcsim
