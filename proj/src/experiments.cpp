#include "mcsim/experiments.hpp"

#include <sys/stat.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "mcsim/analysis.hpp"
#include "mcsim/bench.hpp"
#include "mcsim/csvio.hpp"
#include "mcsim/mechanisms.hpp"
#include "mcsim/network.hpp"

namespace mcsim {

void ensure_dir(const std::string& path) {
  ::mkdir(path.c_str(), 0755);
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write " + path);
  f << text;
}

namespace {

std::vector<ParamDesc> common_params() {
  return {
      {"experiment", Unit::text, "stdp-window"},
      {"seed", Unit::count, "0"},
  };
}

void append(std::vector<ParamDesc>& v, std::vector<ParamDesc> more) {
  for (auto& d : more) v.push_back(std::move(d));
}

std::vector<ParamDesc> stdp_params(const std::string& prefix) {
  return {
      {prefix + ".tau_pre", Unit::time, "20 ms"},
      {prefix + ".tau_post", Unit::time, "10 ms"},
      {prefix + ".a_pre", Unit::conductance, "0.01 uS"},
      {prefix + ".a_post", Unit::conductance, "-0.0105 uS"},
      {prefix + ".w0", Unit::conductance, "1 uS"},
      {prefix + ".wmax", Unit::conductance, "10 uS"},
  };
}

StdpParams read_stdp(const Config& c, const std::string& prefix) {
  StdpParams p;
  p.tau_pre_ms = c.get(prefix + ".tau_pre");
  p.tau_post_ms = c.get(prefix + ".tau_post");
  p.a_pre_uS = c.get(prefix + ".a_pre");
  p.a_post_uS = c.get(prefix + ".a_post");
  p.w0_uS = c.get(prefix + ".w0");
  p.wmax_uS = c.get(prefix + ".wmax");
  return p;
}

std::vector<ParamDesc> stc_param_descs() {
  return {
      {"stc.h0", Unit::voltage, "4.20075 mV"},
      {"stc.tau_h", Unit::time, "688.4 s"},
      {"stc.tau_c", Unit::time, "0.0488 s"},
      {"stc.gamma_p", Unit::dimensionless, "1645.6"},
      {"stc.gamma_d", Unit::dimensionless, "313.1"},
      {"stc.theta_p", Unit::dimensionless, "3.0"},
      {"stc.theta_d", Unit::dimensionless, "1.2"},
      {"stc.sigma_pl", Unit::voltage, "2.90436 mV"},
      {"stc.c_pre", Unit::dimensionless, "1.0"},
      {"stc.c_post", Unit::dimensionless, "0.2758"},
      {"stc.t_c_delay", Unit::time, "0.0188 s"},
      {"stc.tau_z", Unit::time, "60 min"},
      {"stc.f_int", Unit::per_concentration, "0.1 l/umol"},
      {"stc.theta_tag", Unit::voltage, "0.840149 mV"},
      {"stc.tau_p", Unit::time, "60 min"},
      {"stc.p_max", Unit::concentration, "10 umol/l"},
      {"stc.theta_pro", Unit::voltage, "2.10037 mV"},
  };
}

StcParams read_stc(const Config& c) {
  StcParams p;
  p.h0_mV = c.get("stc.h0");
  p.tau_h_ms = c.get("stc.tau_h");
  p.tau_c_ms = c.get("stc.tau_c");
  p.gamma_p = c.get("stc.gamma_p");
  p.gamma_d = c.get("stc.gamma_d");
  p.theta_p = c.get("stc.theta_p");
  p.theta_d = c.get("stc.theta_d");
  p.sigma_pl_mV = c.get("stc.sigma_pl");
  p.c_pre = c.get("stc.c_pre");
  p.c_post = c.get("stc.c_post");
  p.t_c_delay_ms = c.get("stc.t_c_delay");
  p.tau_z_ms = c.get("stc.tau_z");
  p.f_int = c.get("stc.f_int");
  p.theta_tag_mV = c.get("stc.theta_tag");
  p.tau_p_ms = c.get("stc.tau_p");
  p.p_max = c.get("stc.p_max");
  p.theta_pro_mV = c.get("stc.theta_pro");
  return p;
}

// ---- individual experiments -------------------------------------------------

std::string exp_stdp_window(const Config& c, const std::string& out) {
  const StdpParams p = read_stdp(c, "stdp");
  const int n_pairs = int(c.get_int("window.n_pairs"));
  const double period = c.get("window.period");
  const auto deltas =
      parse_quantity_list(c.get_text("window.delta_ts"), Unit::time);

  std::vector<std::vector<double>> rows;
  double sq = 0;
  for (double dt : deltas) {
    const double dw = stdp_window(dt, p, n_pairs, period);
    const double ana = dt > 0 ? p.a_pre_uS * std::exp(-dt / p.tau_pre_ms)
                              : p.a_post_uS * std::exp(dt / p.tau_post_ms);
    sq += (dw - ana) * (dw - ana);
    rows.push_back({dt, dw, ana});
  }
  const double rmse = std::sqrt(sq / double(deltas.size()));
  write_table_csv(out + "/window.csv", {"delta_t_ms", "dw_uS", "analytic_uS"},
                  rows);
  std::ostringstream s;
  s << "stdp-window: " << deltas.size() << " delays\n";
  s << "rmse_vs_analytic_uS = " << format_double(rmse) << "\n";
  return s.str();
}

std::string exp_stdp_poisson(const Config& c, const std::string& out) {
  StdpPoissonConfig cfg;
  cfg.duration_ms = c.get("duration");
  cfg.dt_ms = c.get("dt");
  cfg.seed = c.get_u64("seed");
  cfg.rate_exc_hz = c.get("input.rate_exc");
  cfg.rate_inh_hz = c.get("input.rate_inh");
  cfg.w_inh_uS = c.get("input.w_inh");
  cfg.stdp = read_stdp(c, "stdp");
  const auto res = run_stdp_poisson(cfg);
  write_trace_csv(out + "/weight.csv", res.weight);
  write_spikes_csv(out + "/spikes.csv", res.spikes);
  std::ostringstream s;
  s << "stdp-poisson: pre_spikes = " << res.pre_count
    << ", post_spikes = " << res.post_count << "\n";
  return s.str();
}

std::string exp_homeostasis(const Config& c, const std::string& out) {
  HomeostasisConfig cfg;
  cfg.dt_ms = c.get("dt");
  cfg.seed = c.get_u64("seed");
  cfg.fixed_rate_hz = c.get("input.fixed_rate");
  cfg.staircase_hz = parse_quantity_list(c.get_text("input.staircase"),
                                         Unit::rate);
  cfg.segment_ms = c.get("input.segment");
  cfg.homeo.dw_plus_nA = c.get("homeostasis.dw_plus");
  cfg.homeo.dw_minus_nA = c.get("homeostasis.dw_minus");
  cfg.homeo.w_init_nA = c.get("homeostasis.w_init");
  cfg.homeo.wmax_nA = c.get("homeostasis.wmax");
  cfg.homeo.w_varying_nA = c.get("homeostasis.w_varying");
  cfg.plastic = c.get_bool("homeostasis.enabled");
  const auto res = run_homeostasis(cfg);
  write_trace_csv(out + "/weight.csv", res.weight);
  write_trace_csv(out + "/rate.csv", res.rate);
  std::ostringstream s;
  s << "homeostasis: segment rates (Hz):";
  for (double r : res.segment_rate_hz) s << ' ' << format_double(r);
  s << "\n";
  return s.str();
}

std::string exp_gb_curve(const Config& c, const std::string& out) {
  GbParams p;
  p.tau_w_ms = c.get("gb.tau_w");
  p.w_star = c.get("gb.w_star");
  p.gamma_p = c.get("gb.gamma_p");
  p.gamma_d = c.get("gb.gamma_d");
  p.theta_p = c.get("gb.theta_p");
  p.theta_d = c.get("gb.theta_d");
  p.sigma_pl = c.get("gb.sigma_pl");
  p.tau_c_ms = c.get("gb.tau_c");
  p.c_pre = c.get("gb.c_pre");
  p.c_post = c.get("gb.c_post");
  p.t_c_delay_ms = c.get("gb.t_c_delay");
  GbPairingProtocol proto;
  proto.n_pairs = int(c.get_int("curve.n_pairs"));
  proto.period_ms = c.get("curve.period");
  proto.dt_ms = c.get("dt");
  proto.trials = int(c.get_int("curve.trials"));
  proto.seed = c.get_u64("seed");
  const auto deltas =
      parse_quantity_list(c.get_text("curve.delta_ts"), Unit::time);
  const auto curve = gb_dp_curve(p, deltas, proto);
  std::vector<std::vector<double>> rows;
  for (const auto& pt : curve)
    rows.push_back({pt.delta_t_ms, pt.mean_change, pt.change_ci_half,
                    pt.ratio, pt.mean_initial, pt.mean_final});
  write_table_csv(out + "/curve.csv",
                  {"delta_t_ms", "mean_change", "ci95_half", "ratio",
                   "mean_initial", "mean_final"},
                  rows);
  std::ostringstream s;
  s << "gb-dp-curve: " << deltas.size() << " delays x " << proto.trials
    << " trials\n";
  return s.str();
}

std::string exp_hetero(const Config& c, const std::string& out) {
  HeteroConfig cfg;
  cfg.dt_ms = c.get("dt");
  cfg.t_end_ms = c.get("duration");
  cfg.stim_interval_ms = c.get("input.interval");
  cfg.stim_until_ms = c.get("input.stim_until");
  cfg.params.gamma_p = c.get("hetero.gamma_p");
  cfg.params.gamma_d = c.get("hetero.gamma_d");
  cfg.params.theta_p = c.get("hetero.theta_p");
  cfg.params.theta_d = c.get("hetero.theta_d");
  cfg.params.i0_pA = c.get("hetero.i0");
  cfg.params.tau_i_ms = c.get("hetero.tau_i");
  cfg.params.tau_c_ms = c.get("hetero.tau_c");
  cfg.params.diffusivity = c.get("hetero.diffusivity");
  cfg.params.ca_fraction = c.get("hetero.ca_fraction");
  cfg.params.w_init = c.get("hetero.w_init");
  const auto res = run_four_spine(cfg);
  for (int i = 0; i < 4; ++i) {
    write_trace_csv(out + "/calcium_spine" + std::to_string(i + 1) + ".csv",
                    res.calcium[i]);
    write_trace_csv(out + "/weight_spine" + std::to_string(i + 1) + ".csv",
                    res.weight[i]);
  }
  std::ostringstream s;
  s << "hetero-spines: final weights =";
  for (double w : res.w_final) s << ' ' << format_double(w);
  s << " (initial " << format_double(res.w_init) << ")\n";
  return s.str();
}

std::string exp_stc_single(const Config& c, const std::string& out) {
  StcSingleConfig cfg;
  cfg.stc = read_stc(c);
  cfg.dt_ms = c.get("dt");
  cfg.seed = c.get_u64("seed");
  const auto proto = stc_protocol_from_name(c.get_text("protocol"));
  if (!proto) throw ConfigError("unknown protocol " + c.get_text("protocol"));
  const auto res = run_stc_protocol(cfg, *proto, 0);
  write_trace_csv(out + "/h.csv", res.h);
  write_trace_csv(out + "/z.csv", res.z);
  write_trace_csv(out + "/calcium.csv", res.c);
  write_trace_csv(out + "/prp.csv", res.p);
  std::ostringstream s;
  s << "stc-single " << c.get_text("protocol") << ": tag_crossed = "
    << (res.tag_crossed ? "yes" : "no")
    << ", synthesis_crossed = " << (res.prp_crossed ? "yes" : "no")
    << ", z_final = " << format_double(res.z_final)
    << ", h_final_mV = " << format_double(res.h_final) << "\n";
  return s.str();
}

std::string exp_stc_protocols(const Config& c, const std::string& out) {
  StcSingleConfig cfg;
  cfg.stc = read_stc(c);
  cfg.dt_ms = c.get("dt");
  cfg.seed = c.get_u64("seed");
  const int trials = int(c.get_int("trials"));
  std::ostringstream s;
  s << "stc-protocols (" << trials << " trials each)\n";
  std::vector<std::vector<double>> rows;
  for (StcProtocol p : {StcProtocol::stet, StcProtocol::wtet,
                        StcProtocol::slfs, StcProtocol::wlfs}) {
    int tag = 0, pro = 0;
    double zsum = 0;
    for (int t = 0; t < trials; ++t) {
      const auto res = run_stc_protocol(cfg, p, t);
      tag += res.tag_crossed;
      pro += res.prp_crossed;
      zsum += res.z_final;
    }
    s << stc_protocol_name(p) << ": tag " << tag << "/" << trials
      << ", synthesis " << pro << "/" << trials
      << ", mean z = " << format_double(zsum / trials) << "\n";
    rows.push_back({double(tag) / trials, double(pro) / trials,
                    zsum / trials});
  }
  write_table_csv(out + "/protocols.csv",
                  {"tag_fraction", "synthesis_fraction", "mean_z"}, rows);
  return s.str();
}

std::string exp_consolidation(const Config& c, const std::string& out,
                              int workers) {
  ConsolidationConfig cfg;
  cfg.stc = read_stc(c);
  cfg.n_cells = int(c.get_int("net.n_cells"));
  cfg.n_exc = int(c.get_int("net.n_exc"));
  cfg.p_conn = c.get("net.p");
  cfg.pattern = int(c.get_int("net.pattern"));
  cfg.seed = c.get_u64("seed");
  cfg.dt_ms = c.get("dt");
  cfg.workers = workers;
  cfg.multi_compartment = c.get_bool("net.multi_compartment");
  cfg.cell_size = c.get_text("net.cell_size") == "large"
                      ? CellSize::large_cells
                      : CellSize::small_cells;
  cfg.dend_size = c.get_text("net.dendrite_size") == "large"
                      ? DendriteSize::large_dendrites
                      : DendriteSize::small_dendrites;
  cfg.d_p = c.get("net.d_p");
  cfg.d_sps = c.get("net.d_sps");
  cfg.in_vivo_factor = c.get("net.in_vivo_factor");
  cfg.w_rec_scale = c.get("net.w_rec_scale");
  cfg.w_ei_mV = c.get("net.w_ei");
  cfg.w_ie_mV = c.get("net.w_ie");
  cfg.w_ii_mV = c.get("net.w_ii");
  cfg.w_stim_mV = c.get("stim.weight");
  cfg.learn_rate_hz = c.get("stim.learn_rate");
  cfg.learn_duration_ms = c.get("stim.learn_duration");
  cfg.recall_rate_hz = c.get("stim.recall_rate");
  cfg.recall_duration_ms = c.get("stim.recall_duration");
  if (c.has("adjacency_file") && !c.get_text("adjacency_file").empty())
    cfg.adjacency_file = c.get_text("adjacency_file");
  if (!c.get_text("checkpoint_out").empty())
    cfg.checkpoint_out = out + "/" + c.get_text("checkpoint_out");
  const bool eight = c.get_text("recall") == "8h";
  const auto res = run_consolidation(cfg, eight);
  write_spikes_csv(out + "/spikes.csv", res.spikes);
  std::ostringstream s;
  s << "consolidation: N = " << cfg.n_cells << ", pattern = " << cfg.pattern
    << ", recall = " << (eight ? "8h" : "10s") << "\n";
  s << (eight ? "Q_8h" : "Q_10s") << " = " << format_double(res.recall.q)
    << " (nu_as = " << format_double(res.recall.nu_as)
    << ", nu_ans = " << format_double(res.recall.nu_ans)
    << ", nu_ctrl = " << format_double(res.recall.nu_ctrl) << ")\n";
  return s.str();
}

std::string exp_busyring(const Config& c, const std::string& out,
                         int workers) {
  BusyringSpec spec = default_busyring();
  spec.n_cells = int(c.get_int("ring.n_cells"));
  spec.ring_size = int(c.get_int("ring.k"));
  spec.random_per_cell = int(c.get_int("ring.random_per_cell"));
  spec.delay_ms = c.get("ring.delay");
  spec.tau_syn_ms = c.get("ring.tau_syn");
  spec.tree_depth = int(c.get_int("ring.tree_depth"));
  spec.stdp_on_random = c.get_bool("ring.stdp");
  spec.duration_ms = c.get("duration");
  spec.dt_ms = c.get("dt");
  spec.seed = c.get_u64("seed");
  spec.workers = workers;
  const int repeats = int(c.get_int("repeats"));
  const auto stats = run_bench(spec, repeats);
  std::vector<std::vector<double>> rows;
  for (const auto& t : stats.trials)
    rows.push_back({t.setup_s, t.propagation_s, t.total_s,
                    double(t.peak_rss_bytes), double(t.spike_count)});
  write_table_csv(out + "/bench.csv",
                  {"setup_s", "propagation_s", "total_s", "peak_rss_bytes",
                   "spikes"},
                  rows);
  std::ostringstream s;
  s << "busyring: cells = " << spec.n_cells << ", depth = " << spec.tree_depth
    << ", stdp = " << (spec.stdp_on_random ? "on" : "off") << "\n";
  s << "mean_total_s = " << format_double(stats.mean_total_s)
    << ", cv = " << format_double(stats.cv_total)
    << ", spikes = " << stats.trials.front().spike_count << "\n";
  return s.str();
}

}  // namespace

std::vector<std::string> experiment_names() {
  return {"stdp-window", "stdp-poisson", "homeostasis",
          "gb-dp-curve", "hetero-spines", "stc-single",
          "stc-protocols", "consolidation", "busyring"};
}

std::vector<ParamDesc> experiment_registry(const std::string& name) {
  std::vector<ParamDesc> v = common_params();
  if (name == "stdp-window") {
    append(v, stdp_params("stdp"));
    append(v, {{"window.n_pairs", Unit::count, "60"},
               {"window.period", Unit::time, "1 s"},
               {"window.delta_ts", Unit::text,
                "-50 ms;-45 ms;-40 ms;-35 ms;-30 ms;-25 ms;-20 ms;-15 ms;"
                "-10 ms;-5 ms;5 ms;10 ms;15 ms;20 ms;25 ms;30 ms;35 ms;"
                "40 ms;45 ms;50 ms"}});
  } else if (name == "stdp-poisson") {
    // first-column parameter set: strong drift regime
    append(v, {{"stdp.tau_pre", Unit::time, "20 ms"},
               {"stdp.tau_post", Unit::time, "10 ms"},
               {"stdp.a_pre", Unit::conductance, "0.3 uS"},
               {"stdp.a_post", Unit::conductance, "-0.2 uS"},
               {"stdp.w0", Unit::conductance, "1 uS"},
               {"stdp.wmax", Unit::conductance, "10 uS"}});
    append(v, {{"duration", Unit::time, "10 s"},
               {"dt", Unit::time, "0.1 ms"},
               {"input.rate_exc", Unit::rate, "100 Hz"},
               {"input.rate_inh", Unit::rate, "30 Hz"},
               {"input.w_inh", Unit::conductance, "1 uS"}});
  } else if (name == "homeostasis") {
    append(v, {{"dt", Unit::time, "0.1 ms"},
               {"input.fixed_rate", Unit::rate, "50 Hz"},
               {"input.segment", Unit::time, "10 s"},
               {"input.staircase", Unit::text,
                "50 Hz;30 Hz;0 Hz;70 Hz;20 Hz;50 Hz"},
               {"homeostasis.enabled", Unit::boolean, "true"},
               {"homeostasis.dw_plus", Unit::current, "0.35 nA"},
               {"homeostasis.dw_minus", Unit::current, "-0.35 nA"},
               {"homeostasis.w_init", Unit::current, "0 nA"},
               {"homeostasis.wmax", Unit::current, "5 nA"},
               {"homeostasis.w_varying", Unit::current, "3.5 nA"}});
  } else if (name == "gb-dp-curve") {
    append(v, {{"dt", Unit::time, "0.5 ms"},
               {"gb.tau_w", Unit::time, "150 s"},
               {"gb.w_star", Unit::dimensionless, "0.5"},
               {"gb.gamma_p", Unit::dimensionless, "321.808"},
               {"gb.gamma_d", Unit::dimensionless, "200"},
               {"gb.theta_p", Unit::dimensionless, "1.3"},
               {"gb.theta_d", Unit::dimensionless, "1.0"},
               {"gb.sigma_pl", Unit::dimensionless, "2.8248"},
               {"gb.tau_c", Unit::time, "20 ms"},
               {"gb.c_pre", Unit::dimensionless, "1"},
               {"gb.c_post", Unit::dimensionless, "2"},
               {"gb.t_c_delay", Unit::time, "13.7 ms"},
               {"curve.n_pairs", Unit::count, "60"},
               {"curve.period", Unit::time, "1 s"},
               {"curve.trials", Unit::count, "400"},
               {"curve.delta_ts", Unit::text,
                "-100 ms;-50 ms;-30 ms;-20 ms;-10 ms;-5 ms;0 ms;5 ms;10 ms;"
                "20 ms;30 ms;50 ms;100 ms"}});
  } else if (name == "hetero-spines") {
    append(v, {{"dt", Unit::time, "0.1 ms"},
               {"duration", Unit::time, "1 s"},
               {"input.interval", Unit::time, "10 ms"},
               {"input.stim_until", Unit::time, "20 ms"},
               {"hetero.gamma_p", Unit::dimensionless, "90"},
               {"hetero.gamma_d", Unit::dimensionless, "0.01"},
               {"hetero.theta_p", Unit::concentration, "0.11 umol/l"},
               {"hetero.theta_d", Unit::concentration, "0.05 umol/l"},
               {"hetero.i0", Unit::current, "4 pA"},
               {"hetero.tau_i", Unit::time, "1 ms"},
               {"hetero.tau_c", Unit::time, "100 ms"},
               {"hetero.diffusivity", Unit::diffusivity, "2.2e-10 m2/s"},
               {"hetero.ca_fraction", Unit::dimensionless, "0.11"},
               {"hetero.w_init", Unit::dimensionless, "0.3"}});
  } else if (name == "stc-single" || name == "stc-protocols") {
    append(v, stc_param_descs());
    append(v, {{"dt", Unit::time, "0.2 ms"}});
    if (name == "stc-single")
      v.push_back({"protocol", Unit::text, "STET"});
    else
      v.push_back({"trials", Unit::count, "10"});
  } else if (name == "consolidation") {
    append(v, stc_param_descs());
    append(v, {{"dt", Unit::time, "0.5 ms"},
               {"recall", Unit::text, "10s"},
               {"net.n_cells", Unit::count, "2000"},
               {"net.n_exc", Unit::count, "1600"},
               {"net.p", Unit::dimensionless, "0.1"},
               {"net.pattern", Unit::count, "150"},
               {"net.multi_compartment", Unit::boolean, "false"},
               {"net.cell_size", Unit::text, "small"},
               {"net.dendrite_size", Unit::text, "small"},
               {"net.d_p", Unit::diffusivity, "1e-11 m2/s"},
               {"net.d_sps", Unit::diffusivity, "1e-11 m2/s"},
               {"net.in_vivo_factor", Unit::dimensionless, "0.6"},
               {"net.w_rec_scale", Unit::dimensionless, "0.25"},
               {"net.w_ei", Unit::voltage, "2.1 mV"},
               {"net.w_ie", Unit::voltage, "-8.4 mV"},
               {"net.w_ii", Unit::voltage, "-8.4 mV"},
               {"stim.weight", Unit::voltage, "0.8 mV"},
               {"stim.learn_rate", Unit::rate, "100 Hz"},
               {"stim.learn_duration", Unit::time, "2 s"},
               {"stim.recall_rate", Unit::rate, "150 Hz"},
               {"stim.recall_duration", Unit::time, "200 ms"},
               {"adjacency_file", Unit::text, ""},
               {"checkpoint_out", Unit::text, ""}});
  } else if (name == "busyring") {
    append(v, {{"dt", Unit::time, "0.025 ms"},
               {"duration", Unit::time, "200 ms"},
               {"repeats", Unit::count, "1"},
               {"ring.n_cells", Unit::count, "1024"},
               {"ring.k", Unit::count, "4"},
               {"ring.random_per_cell", Unit::count, "1000"},
               {"ring.delay", Unit::time, "5 ms"},
               {"ring.tau_syn", Unit::time, "2 ms"},
               {"ring.tree_depth", Unit::count, "2"},
               {"ring.stdp", Unit::boolean, "false"}});
  } else {
    throw ConfigError("unknown experiment '" + name + "'");
  }
  return v;
}

std::string run_experiment(const std::string& name, const Config& cfg,
                           const std::string& outdir, int workers) {
  ensure_dir(outdir);
  write_text(outdir + "/manifest.txt", cfg.manifest());
  std::string summary;
  if (name == "stdp-window")
    summary = exp_stdp_window(cfg, outdir);
  else if (name == "stdp-poisson")
    summary = exp_stdp_poisson(cfg, outdir);
  else if (name == "homeostasis")
    summary = exp_homeostasis(cfg, outdir);
  else if (name == "gb-dp-curve")
    summary = exp_gb_curve(cfg, outdir);
  else if (name == "hetero-spines")
    summary = exp_hetero(cfg, outdir);
  else if (name == "stc-single")
    summary = exp_stc_single(cfg, outdir);
  else if (name == "stc-protocols")
    summary = exp_stc_protocols(cfg, outdir);
  else if (name == "consolidation")
    summary = exp_consolidation(cfg, outdir, workers);
  else if (name == "busyring")
    summary = exp_busyring(cfg, outdir, workers);
  else
    throw ConfigError("unknown experiment '" + name + "'");
  write_text(outdir + "/summary.txt", summary);
  return summary;
}

}  // namespace mcsim
