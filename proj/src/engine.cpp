#include "mcsim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <condition_variable>
#include <cstring>
#include <fstream>
#include <mutex>
#include <thread>

#include "mcsim/units.hpp"

namespace mcsim {

namespace {

constexpr std::uint64_t kStreamMembrane = 1;
constexpr std::uint64_t kStreamSynNoise = 2;
constexpr std::uint64_t kStreamSource = 3;

inline std::int64_t ceil_steps(double t_ms, double dt_ms) {
  return static_cast<std::int64_t>(std::ceil(t_ms / dt_ms - 1e-9));
}

struct EventOrder {
  bool operator()(const EventRec& a, const EventRec& b) const {
    if (a.step != b.step) return a.step < b.step;
    if (a.src != b.src) return a.src < b.src;
    return a.seq < b.seq;
  }
};

// heap comparator: earliest (step, seq) on top
struct InternalOrder {
  bool operator()(const EventRec& a, const EventRec& b) const {
    if (a.step != b.step) return a.step > b.step;
    return a.seq > b.seq;
  }
};

double hh_alpha_m(double v) {
  const double x = v + 40.0;
  if (std::fabs(x) < 1e-7) return 1.0;
  return 0.1 * x / (1.0 - std::exp(-x / 10.0));
}
double hh_beta_m(double v) { return 4.0 * std::exp(-(v + 65.0) / 18.0); }
double hh_alpha_h(double v) { return 0.07 * std::exp(-(v + 65.0) / 20.0); }
double hh_beta_h(double v) { return 1.0 / (1.0 + std::exp(-(v + 35.0) / 10.0)); }
double hh_alpha_n(double v) {
  const double x = v + 55.0;
  if (std::fabs(x) < 1e-7) return 0.1;
  return 0.01 * x / (1.0 - std::exp(-x / 10.0));
}
double hh_beta_n(double v) { return 0.125 * std::exp(-(v + 65.0) / 80.0); }

}  // namespace

int select_target(int group_size, SelectionPolicy policy, SelectionCursor& cur) {
  if (group_size <= 0) throw TargetingError("select_target: empty group");
  switch (policy) {
    case SelectionPolicy::univalent:
      if (group_size != 1)
        throw TargetingError("select_target: univalent needs a single item");
      return 0;
    case SelectionPolicy::round_robin: {
      const int i = cur.cursor % group_size;
      cur.cursor = (i + 1) % group_size;
      return i;
    }
    case SelectionPolicy::round_robin_halt:
      return cur.cursor % group_size;
  }
  throw TargetingError("select_target: unknown policy");
}

std::vector<std::pair<int, double>> detect_spikes(
    std::span<const double> before, std::span<const double> after,
    std::span<const ThresholdDetector> detectors, double t_ms, double dt_ms) {
  std::vector<std::pair<int, double>> out;
  for (std::size_t i = 0; i < detectors.size(); ++i) {
    const auto& d = detectors[i];
    const double v0 = before[d.comp], v1 = after[d.comp];
    if (v0 < d.threshold_mV && v1 >= d.threshold_mV) {
      double f = (v1 > v0) ? (d.threshold_mV - v0) / (v1 - v0) : 1.0;
      f = std::clamp(f, 0.0, 1.0);
      out.emplace_back(static_cast<int>(i), t_ms + f * dt_ms);
    }
  }
  return out;
}

int CellRT::find_group(const std::string& label) const {
  for (std::size_t i = 0; i < groups.size(); ++i)
    if (groups[i].label == label) return static_cast<int>(i);
  return -1;
}

// ---- runtime cell kind ------------------------------------------------------

struct SpeciesRT {
  double decay_tau_ms = 0;
  std::vector<double> coupling;  // um^3/ms to parent
  double init = 0;
};

struct CellKindRT {
  CellKindSpec spec;
  CompartmentGrid grid;

  enum class Dyn { none, lif, lif_exact, hh } dyn = Dyn::none;
  LifMembrane lif;
  HhMembrane hh;

  std::vector<double> cap_nF;
  std::vector<double> g_leak_uS;
  std::vector<double> g_leak_rhs;  // g * E
  std::vector<double> axial_uS;
  std::vector<double> g_na_uS, g_k_uS;  // zero off soma
  std::vector<double> charge_factor;    // c_tot / c_comp
  double c_tot_nF = 0;
  std::int64_t ref_steps = 0;
  int detector_comp = 0;
  double threshold_mV = 0;
  bool has_detector = false;
  bool has_bg = false;

  std::vector<SpeciesRT> species;
  int sps_idx = -1, prp_idx = -1;
  PrpSynthesisParams prp;
  bool prp_enabled = false;
  int prp_comp = 0;

  std::vector<std::int64_t> stc_ca_delay_steps;  // per placement
};

// ---- engine implementation ----------------------------------------------------

struct SourceRT {
  SourceSpec spec;
  std::vector<OutEdge> edges;
  RngKey key;
};

struct ProbeRT {
  ProbeSpec spec;
  int group = -1;
};

struct Engine::Impl {
  Engine* self;
  EngineOptions opt;
  std::vector<CellKindRT> kinds;
  std::vector<std::vector<OutEdge>> cell_edges;
  std::vector<SourceRT> sources;
  std::vector<ProbeRT> probes;
  std::int64_t min_delay_steps = -1;  // -1: no cell-to-cell connections
  std::vector<char> inbox_dirty;

  // worker pool (main thread acts as worker 0)
  int workers = 1;
  std::vector<std::thread> threads;
  std::mutex mu;
  std::condition_variable cv_start, cv_done;
  std::int64_t epoch_s0 = 0, epoch_s1 = 0;
  std::uint64_t generation = 0;
  int pending = 0;
  bool stopping = false;

  explicit Impl(Engine* s) : self(s) {}
  ~Impl() { stop_pool(); }

  void build(const Recipe& r);
  void start_pool();
  void stop_pool();
  void worker_loop(int w);
  void run_cell(CellRT& cell, std::int64_t s0, std::int64_t s1);
  void step_cell(CellRT& cell, std::int64_t s);
  void apply_event(CellRT& cell, const EventRec& ev, bool refractory,
                   std::int64_t s);
  void post_event(CellRT& cell, std::int64_t s);
  void generate_source_events(std::int64_t s0, std::int64_t s1);
  void exchange();
  void sample_probes(CellRT& cell, std::int64_t s, bool force);
  double probe_value(const CellRT& cell, const ProbeRT& p) const;
};

namespace {

void build_kind(CellKindRT& k, const CellKindSpec& spec, double dt_ms) {
  k.spec = spec;
  k.grid = discretize(spec.segments, spec.target_compartment_um);
  const int n = k.grid.size();
  TreeSolver solver(k.grid);

  if (std::holds_alternative<LifMembrane>(spec.membrane)) {
    k.lif = std::get<LifMembrane>(spec.membrane);
    k.dyn = k.lif.exact ? CellKindRT::Dyn::lif_exact : CellKindRT::Dyn::lif;
    if (k.lif.exact && n != 1)
      throw EngineError("exact LIF requires a single compartment");
    double area_tot = 0;
    for (int i = 0; i < n; ++i) area_tot += k.grid.lateral_area_um2[i];
    k.c_tot_nF = k.lif.tau_mem_ms / k.lif.r_mem_MOhm;
    k.cap_nF.resize(n);
    k.g_leak_uS.resize(n);
    k.g_leak_rhs.resize(n);
    for (int i = 0; i < n; ++i) {
      const double share = k.grid.lateral_area_um2[i] / area_tot;
      k.cap_nF[i] = k.c_tot_nF * share;
      k.g_leak_uS[i] = share / k.lif.r_mem_MOhm;
      k.g_leak_rhs[i] = k.g_leak_uS[i] * k.lif.v_rev_mV;
    }
    k.axial_uS = solver.axial_conductance_uS(k.lif.r_axial_ohm_m);
    k.ref_steps = ceil_steps(k.lif.t_ref_ms, dt_ms);
    k.detector_comp = k.lif.detector_comp;
    k.threshold_mV = k.lif.v_thresh_mV;
    k.has_detector = true;
    k.has_bg = k.lif.i_bg_nA != 0.0 || k.lif.sigma_bg_nA_sqrt_ms != 0.0;
  } else if (std::holds_alternative<HhMembrane>(spec.membrane)) {
    k.hh = std::get<HhMembrane>(spec.membrane);
    k.dyn = CellKindRT::Dyn::hh;
    k.cap_nF.resize(n);
    k.g_leak_uS.resize(n);
    k.g_leak_rhs.resize(n);
    k.g_na_uS.assign(n, 0.0);
    k.g_k_uS.assign(n, 0.0);
    for (int i = 0; i < n; ++i) {
      const double a = k.grid.lateral_area_um2[i];
      k.cap_nF[i] = units::cap_nF(k.hh.c_m, a);
      k.c_tot_nF += k.cap_nF[i];
      k.g_leak_uS[i] = units::cond_uS(k.hh.g_leak, a);
      k.g_leak_rhs[i] = k.g_leak_uS[i] * k.hh.e_leak_mV;
      if (k.grid.tag[i] == Region::soma) {
        k.g_na_uS[i] = units::cond_uS(k.hh.g_na, a);
        k.g_k_uS[i] = units::cond_uS(k.hh.g_k, a);
      }
    }
    k.axial_uS = solver.axial_conductance_uS(k.hh.r_axial_ohm_m);
    k.detector_comp = k.hh.detector_comp;
    k.threshold_mV = k.hh.threshold_mV;
    k.has_detector = true;
  }

  if (k.dyn != CellKindRT::Dyn::none) {
    k.charge_factor.resize(n);
    for (int i = 0; i < n; ++i) k.charge_factor[i] = k.c_tot_nF / k.cap_nF[i];
  }

  for (const auto& sp : spec.species) {
    SpeciesRT srt;
    srt.decay_tau_ms = sp.decay_tau_ms;
    srt.coupling = solver.diffusive_coupling(sp.diffusivity);
    srt.init = sp.init;
    if (sp.name == spec.sps_species) k.sps_idx = int(k.species.size());
    if (sp.name == spec.prp_species) k.prp_idx = int(k.species.size());
    k.species.push_back(std::move(srt));
  }

  for (const auto& pl : spec.placements) {
    std::int64_t d = 0;
    if (pl.syn.kind == SynKind::stc_charge) {
      d = ceil_steps(pl.syn.stc.t_c_delay_ms, dt_ms);
      if (spec.prp.enabled)
        k.prp = make_prp_synthesis(pl.syn.stc, k.grid.total_volume_um3);
    }
    if (k.dyn == CellKindRT::Dyn::lif_exact &&
        (pl.syn.kind == SynKind::static_cond ||
         pl.syn.kind == SynKind::stdp_cond))
      throw EngineError("exact LIF supports only current/charge synapses");
    k.stc_ca_delay_steps.push_back(d);
  }

  if (spec.prp.enabled) {
    k.prp_enabled = true;
    k.prp_comp = spec.prp.comp;
    if (k.sps_idx < 0 || k.prp_idx < 0)
      throw EngineError("synthesis unit needs SPS and PRP species");
  }
}

void append_instance(SynGroupRT& g, int comp, double weight) {
  g.comp.push_back(comp);
  g.weight.push_back(weight);
  g.kernel.push_back(0.0);
  switch (g.spec.kind) {
    case SynKind::stdp_cond: {
      StdpState s;
      s.w = weight;
      g.stdp.push_back(s);
      g.stdp_last_step.push_back(0);
      break;
    }
    case SynKind::homeo_current: {
      HomeostasisState s;
      s.w = g.spec.homeo.w_init_nA;
      g.homeo.push_back(s);
      break;
    }
    case SynKind::stc_charge: {
      StcState s;
      s.h = g.spec.stc.h0_mV;
      g.stc.push_back(s);
      g.sps_abs.push_back(0.0);
      break;
    }
    default:
      break;
  }
}

}  // namespace

void Engine::Impl::build(const Recipe& r) {
  kinds.resize(r.kinds.size());
  for (std::size_t i = 0; i < r.kinds.size(); ++i)
    build_kind(kinds[i], r.kinds[i], opt.dt_ms);

  auto& cells = self->cells_;
  cells.resize(r.cell_kind.size());
  for (std::uint32_t gid = 0; gid < cells.size(); ++gid) {
    auto& c = cells[gid];
    const auto kid = r.cell_kind[gid];
    if (kid >= kinds.size()) throw EngineError("cell kind out of range");
    c.kind = &kinds[kid];
    c.gid = gid;
    const int n = c.kind->grid.size();
    if (c.kind->dyn == CellKindRT::Dyn::lif ||
        c.kind->dyn == CellKindRT::Dyn::lif_exact) {
      c.v_mV.assign(n, c.kind->lif.v_rev_mV);
      c.detector_prev_v = c.kind->lif.v_rev_mV;
    } else if (c.kind->dyn == CellKindRT::Dyn::hh) {
      c.v_mV.assign(n, c.kind->hh.v_init_mV);
      c.detector_prev_v = c.kind->hh.v_init_mV;
      const double v = c.kind->hh.v_init_mV;
      c.hh_m.assign(n, hh_alpha_m(v) / (hh_alpha_m(v) + hh_beta_m(v)));
      c.hh_h.assign(n, hh_alpha_h(v) / (hh_alpha_h(v) + hh_beta_h(v)));
      c.hh_n.assign(n, hh_alpha_n(v) / (hh_alpha_n(v) + hh_beta_n(v)));
    }
    for (const auto& sp : c.kind->species)
      c.species.push_back(std::vector<double>(n, sp.init));
    for (const auto& pl : c.kind->spec.placements) {
      SynGroupRT g;
      g.label = pl.label;
      g.spec = pl.syn;
      for (int i = 0; i < pl.count; ++i) append_instance(g, pl.comp, 0.0);
      c.groups.push_back(std::move(g));
    }
    c.rhs_current.assign(std::max(n, 1), 0.0);
  }

  cell_edges.resize(cells.size());
  sources.resize(r.sources.size());
  for (std::size_t i = 0; i < r.sources.size(); ++i) {
    sources[i].spec = r.sources[i];
    sources[i].key = make_key(opt.seed, 0x100000000ull + i, kStreamSource, 0);
  }

  std::map<std::pair<std::uint32_t, std::string>, SelectionCursor> cursors;
  std::uint32_t seq = 0;
  for (const auto& conn : r.connections) {
    if (conn.dst >= cells.size())
      throw EngineError("connection dst out of range");
    auto& dst = cells[conn.dst];
    const int gi = dst.find_group(conn.label);
    if (gi < 0)
      throw EngineError("connection label '" + conn.label + "' not found");
    auto& g = dst.groups[gi];
    const auto& pl = dst.kind->spec.placements[gi];
    std::uint32_t instance;
    if (pl.count == 0) {
      append_instance(g, pl.comp, conn.weight);
      instance = g.size() - 1;
    } else {
      auto& cur = cursors[{conn.dst, conn.label}];
      instance = select_target(g.size(), conn.policy, cur);
    }
    const std::int64_t d = ceil_steps(conn.delay_ms, opt.dt_ms);
    OutEdge e{conn.dst, static_cast<std::uint16_t>(gi), instance, conn.weight,
              d, seq++};
    if (conn.from_source) {
      if (conn.src >= sources.size())
        throw EngineError("connection source out of range");
      sources[conn.src].edges.push_back(e);
    } else {
      if (conn.src >= cells.size())
        throw EngineError("connection src out of range");
      if (conn.delay_ms < opt.dt_ms * (1.0 - 1e-12))
        throw EngineError("configuration: dt exceeds a connection delay");
      if (min_delay_steps < 0 || d < min_delay_steps) min_delay_steps = d;
      cell_edges[conn.src].push_back(e);
    }
  }

  probes.resize(r.probes.size());
  self->traces_.resize(r.probes.size());
  for (std::size_t i = 0; i < r.probes.size(); ++i) {
    probes[i].spec = r.probes[i];
    if (probes[i].spec.every_steps < 1) probes[i].spec.every_steps = 1;
    if (!r.probes[i].label.empty()) {
      const auto& cell = cells[r.probes[i].gid];
      probes[i].group = cell.find_group(r.probes[i].label);
      if (probes[i].group < 0) throw EngineError("probe label not found");
    }
  }

  inbox_dirty.assign(cells.size(), 0);
  workers = std::max(1, opt.workers);
  if (workers > 1) start_pool();
}

void Engine::Impl::start_pool() {
  for (int w = 1; w < workers; ++w)
    threads.emplace_back([this, w] { worker_loop(w); });
}

void Engine::Impl::stop_pool() {
  {
    std::lock_guard<std::mutex> lk(mu);
    stopping = true;
  }
  cv_start.notify_all();
  for (auto& t : threads) t.join();
  threads.clear();
}

void Engine::Impl::worker_loop(int w) {
  std::uint64_t seen = 0;
  for (;;) {
    std::int64_t s0, s1;
    {
      std::unique_lock<std::mutex> lk(mu);
      cv_start.wait(lk, [&] { return stopping || generation != seen; });
      if (stopping) return;
      seen = generation;
      s0 = epoch_s0;
      s1 = epoch_s1;
    }
    auto& cells = self->cells_;
    for (std::size_t gid = w; gid < cells.size(); gid += workers)
      run_cell(cells[gid], s0, s1);
    {
      std::lock_guard<std::mutex> lk(mu);
      --pending;
    }
    cv_done.notify_one();
  }
}

void Engine::Impl::run_cell(CellRT& cell, std::int64_t s0, std::int64_t s1) {
  for (std::int64_t s = s0; s < s1; ++s) step_cell(cell, s);
}

void Engine::Impl::apply_event(CellRT& cell, const EventRec& ev,
                               bool refractory, std::int64_t s) {
  auto& g = cell.groups[ev.group];
  switch (g.spec.kind) {
    case SynKind::static_charge:
      if (!refractory && ev.weight != 0.0) {
        const int comp = g.comp[ev.instance];
        cell.v_mV[comp] += ev.weight * cell.kind->charge_factor[comp];
      }
      break;
    case SynKind::static_cond:
    case SynKind::static_current:
      if (ev.weight != 0.0) {
        if (g.kernel[ev.instance] == 0.0) g.active.push_back(ev.instance);
        g.kernel[ev.instance] += ev.weight;
      }
      break;
    case SynKind::stdp_cond: {
      auto& st = g.stdp[ev.instance];
      const double gap = double(s - g.stdp_last_step[ev.instance]) * opt.dt_ms;
      if (gap > 0) stdp_decay(st, g.spec.stdp, gap);
      g.stdp_last_step[ev.instance] = s;
      stdp_on_pre(st, g.spec.stdp);
      const double w = stdp_effective_weight(st, g.spec.stdp);
      if (w != 0.0) {
        if (g.kernel[ev.instance] == 0.0) g.active.push_back(ev.instance);
        g.kernel[ev.instance] += w;
      }
      break;
    }
    case SynKind::homeo_current: {
      auto& st = g.homeo[ev.instance];
      homeostasis_on_pre(st, g.spec.homeo);
      if (st.w != 0.0) {
        if (g.kernel[ev.instance] == 0.0) g.active.push_back(ev.instance);
        g.kernel[ev.instance] += st.w;
      }
      break;
    }
    case SynKind::stc_charge: {
      auto& st = g.stc[ev.instance];
      if (ev.etype == 1) {
        stc_on_pre_calcium(st, g.spec.stc, g.spec.calcium_scale);
      } else {
        // calcium arrives with a fixed lag; schedule it as an internal event
        EventRec ca = ev;
        ca.etype = 1;
        ca.step = s + cell.kind->stc_ca_delay_steps[ev.group];
        ca.seq = cell.internal_seq++;
        cell.internal.push_back(ca);
        std::push_heap(cell.internal.begin(), cell.internal.end(),
                       InternalOrder{});
        if (!refractory) {
          const int comp = g.comp[ev.instance];
          cell.v_mV[comp] += stc_total_weight(st, g.spec.stc) * ev.weight *
                             cell.kind->charge_factor[comp];
        }
      }
      break;
    }
  }
}

void Engine::Impl::post_event(CellRT& cell, std::int64_t s) {
  for (auto& g : cell.groups) {
    switch (g.spec.kind) {
      case SynKind::stdp_cond:
        for (int i = 0; i < g.size(); ++i) {
          const double gap =
              double(s + 1 - g.stdp_last_step[i]) * opt.dt_ms;
          if (gap > 0) stdp_decay(g.stdp[i], g.spec.stdp, gap);
          g.stdp_last_step[i] = s + 1;
          stdp_on_post(g.stdp[i], g.spec.stdp);
        }
        break;
      case SynKind::homeo_current:
        for (int i = 0; i < g.size(); ++i)
          homeostasis_on_post(g.homeo[i], g.spec.homeo);
        break;
      case SynKind::stc_charge:
        for (int i = 0; i < g.size(); ++i)
          stc_on_post(g.stc[i], g.spec.stc, g.spec.calcium_scale);
        break;
      default:
        break;
    }
  }
}

void Engine::Impl::step_cell(CellRT& cell, std::int64_t s) {
  const double dt = opt.dt_ms;
  const auto& k = *cell.kind;
  const int n = k.grid.size();
  const bool is_lif =
      k.dyn == CellKindRT::Dyn::lif || k.dyn == CellKindRT::Dyn::lif_exact;
  const bool refractory = is_lif && s < cell.refractory_until;

  // 1. deliver due events (network inbox first, then cell-internal)
  while (cell.inbox_cursor < cell.inbox.size() &&
         cell.inbox[cell.inbox_cursor].step <= s) {
    apply_event(cell, cell.inbox[cell.inbox_cursor], refractory, s);
    ++cell.inbox_cursor;
  }
  while (!cell.internal.empty() && cell.internal.front().step <= s) {
    std::pop_heap(cell.internal.begin(), cell.internal.end(), InternalOrder{});
    const EventRec ev = cell.internal.back();
    cell.internal.pop_back();
    apply_event(cell, ev, refractory, s);
  }

  // 2. mechanism dynamics, synaptic kernels, species sources
  static thread_local std::vector<double> gsyn_buf, gsyn_rhs_buf;
  bool has_gsyn = false, has_current = false;
  std::fill(cell.rhs_current.begin(), cell.rhs_current.end(), 0.0);

  auto ensure_gsyn = [&] {
    if (!has_gsyn) {
      gsyn_buf.assign(n, 0.0);
      gsyn_rhs_buf.assign(n, 0.0);
      has_gsyn = true;
    }
  };

  for (std::size_t gi = 0; gi < cell.groups.size(); ++gi) {
    auto& g = cell.groups[gi];
    switch (g.spec.kind) {
      case SynKind::static_cond:
      case SynKind::stdp_cond: {
        if (g.active.empty()) break;
        ensure_gsyn();
        const double f = std::exp(-dt / g.spec.tau_syn_ms);
        std::size_t out = 0;
        for (std::size_t a = 0; a < g.active.size(); ++a) {
          const int i = g.active[a];
          double kv = g.kernel[i] * f;
          if (kv < 1e-30) kv = 0.0;
          g.kernel[i] = kv;
          if (kv != 0.0) {
            g.active[out++] = i;
            gsyn_buf[g.comp[i]] += kv;
            gsyn_rhs_buf[g.comp[i]] += kv * g.spec.e_rev_mV;
          }
        }
        g.active.resize(out);
        break;
      }
      case SynKind::static_current:
      case SynKind::homeo_current: {
        if (g.active.empty()) break;
        const double f = std::exp(-dt / g.spec.tau_syn_ms);
        std::size_t out = 0;
        for (std::size_t a = 0; a < g.active.size(); ++a) {
          const int i = g.active[a];
          double kv = g.kernel[i] * f;
          if (std::fabs(kv) < 1e-30) kv = 0.0;
          g.kernel[i] = kv;
          if (kv != 0.0) {
            g.active[out++] = i;
            cell.rhs_current[g.comp[i]] += kv;
            has_current = true;
          }
        }
        g.active.resize(out);
        break;
      }
      case SynKind::stc_charge: {
        const auto& p = g.spec.stc;
        const double cf = std::exp(-dt / p.tau_c_ms);
        const std::vector<double>* prp =
            (k.prp_idx >= 0) ? &cell.species[k.prp_idx] : nullptr;
        std::vector<double>* sps =
            (k.sps_idx >= 0) ? &cell.species[k.sps_idx] : nullptr;
        for (int i = 0; i < g.size(); ++i) {
          auto& st = g.stc[i];
          double nrm = 0.0;
          if (p.sigma_pl_mV != 0.0 &&
              (above(st.c, p.theta_p) || above(st.c, p.theta_d))) {
            nrm = normal_for(
                make_key(opt.seed, cell.gid, (kStreamSynNoise << 32) | gi, i),
                static_cast<std::uint64_t>(s));
          }
          stc_early_step(st, p, dt, nrm);
          const double na = std::fabs(st.h - p.h0_mV);
          if (na != g.sps_abs[i]) {
            if (sps) {
              const int comp = g.comp[i];
              (*sps)[comp] += (na - g.sps_abs[i]) / k.grid.volume_um3[comp];
            }
            g.sps_abs[i] = na;
          }
          if (prp) stc_late_step(st, p, (*prp)[g.comp[i]], dt);
          st.c *= cf;
        }
        break;
      }
      default:
        break;
    }
  }

  const bool bg_gated =
      k.lif.bg_quiet_t1_ms > k.lif.bg_quiet_t0_ms &&
      double(s) * dt >= k.lif.bg_quiet_t0_ms &&
      double(s) * dt < k.lif.bg_quiet_t1_ms;
  if (is_lif && k.has_bg && !bg_gated) {
    double ib = k.lif.i_bg_nA;
    if (k.lif.sigma_bg_nA_sqrt_ms != 0.0)
      ib += k.lif.sigma_bg_nA_sqrt_ms / std::sqrt(dt) *
            normal_for(make_key(opt.seed, cell.gid, kStreamMembrane, 0),
                       static_cast<std::uint64_t>(s));
    cell.rhs_current[k.lif.noise_comp] += ib;
    has_current = true;
  }

  // 3. continuous state update
  if (k.dyn == CellKindRT::Dyn::lif_exact) {
    if (!refractory) {
      const double vinf =
          k.lif.v_rev_mV + k.lif.r_mem_MOhm * cell.rhs_current[0];
      const double f = std::exp(-dt / k.lif.tau_mem_ms);
      cell.v_mV[0] = vinf + (cell.v_mV[0] - vinf) * f;
    }
  } else if (k.dyn == CellKindRT::Dyn::lif) {
    if (!refractory) {
      static thread_local std::vector<double> cap, gs, rhs;
      cap.resize(n);
      gs.resize(n);
      rhs.resize(n);
      for (int i = 0; i < n; ++i) {
        cap[i] = k.cap_nF[i] / dt;
        gs[i] = k.g_leak_uS[i] + (has_gsyn ? gsyn_buf[i] : 0.0);
        rhs[i] = k.g_leak_rhs[i] + (has_gsyn ? gsyn_rhs_buf[i] : 0.0) +
                 (has_current ? cell.rhs_current[i] : 0.0);
      }
      solve_tree(k.grid, cap, gs, k.axial_uS, rhs, cell.v_mV);
    }
  } else if (k.dyn == CellKindRT::Dyn::hh) {
    static thread_local std::vector<double> cap, gs, rhs;
    cap.resize(n);
    gs.resize(n);
    rhs.resize(n);
    for (int i = 0; i < n; ++i) {
      const double v = cell.v_mV[i];
      double gsum = k.g_leak_uS[i];
      double grhs = k.g_leak_rhs[i];
      if (k.g_na_uS[i] != 0.0) {
        // gating advances by exponential Euler at the pre-step voltage
        const double am = hh_alpha_m(v), bm = hh_beta_m(v);
        const double ah = hh_alpha_h(v), bh = hh_beta_h(v);
        const double an = hh_alpha_n(v), bn = hh_beta_n(v);
        double& m = cell.hh_m[i];
        double& h = cell.hh_h[i];
        double& nn = cell.hh_n[i];
        m += (am / (am + bm) - m) * (1.0 - std::exp(-dt * (am + bm)));
        h += (ah / (ah + bh) - h) * (1.0 - std::exp(-dt * (ah + bh)));
        nn += (an / (an + bn) - nn) * (1.0 - std::exp(-dt * (an + bn)));
        const double gna = k.g_na_uS[i] * m * m * m * h;
        const double gk = k.g_k_uS[i] * nn * nn * nn * nn;
        gsum += gna + gk;
        grhs += gna * k.hh.e_na_mV + gk * k.hh.e_k_mV;
      }
      cap[i] = k.cap_nF[i] / dt;
      gs[i] = gsum + (has_gsyn ? gsyn_buf[i] : 0.0);
      rhs[i] = grhs + (has_gsyn ? gsyn_rhs_buf[i] : 0.0) +
               (has_current ? cell.rhs_current[i] : 0.0);
    }
    solve_tree(k.grid, cap, gs, k.axial_uS, rhs, cell.v_mV);
  }

  // species: synthesis source, then implicit diffusion/decay
  if (!k.species.empty()) {
    double prod = 0.0;
    if (k.prp_enabled)
      prod = prp_production(k.prp, cell.species[k.sps_idx][k.prp_comp]);
    for (std::size_t sp = 0; sp < k.species.size(); ++sp) {
      const auto& srt = k.species[sp];
      auto& conc = cell.species[sp];
      const bool is_prp = (int(sp) == k.prp_idx);
      if (n == 1) {
        const double vol = k.grid.volume_um3[0];
        const double cap0 = vol / dt;
        const double gse = srt.decay_tau_ms > 0 ? vol / srt.decay_tau_ms : 0.0;
        const double r = cap0 * conc[0] + (is_prp ? prod : 0.0);
        conc[0] = r / (cap0 + gse);
        continue;
      }
      static thread_local std::vector<double> cap, gs, rhs;
      cap.resize(n);
      gs.resize(n);
      rhs.resize(n);
      for (int i = 0; i < n; ++i) {
        cap[i] = k.grid.volume_um3[i] / dt;
        gs[i] = srt.decay_tau_ms > 0 ? k.grid.volume_um3[i] / srt.decay_tau_ms
                                     : 0.0;
        rhs[i] = 0.0;
      }
      if (is_prp && prod != 0.0) rhs[k.prp_comp] = prod;
      solve_tree(k.grid, cap, gs, srt.coupling, rhs, conc);
    }
  }

  // 4. spike detection, post-event hook, reset
  if (k.has_detector && !refractory) {
    const double v_after = cell.v_mV[k.detector_comp];
    const double v_before = cell.detector_prev_v;
    bool fired = false;
    double t_spike = 0;
    if (cell.detector_armed && v_before < k.threshold_mV &&
        v_after >= k.threshold_mV) {
      double f = (v_after > v_before)
                     ? (k.threshold_mV - v_before) / (v_after - v_before)
                     : 1.0;
      t_spike = (double(s) + std::clamp(f, 0.0, 1.0)) * dt;
      fired = true;
    }
    if (fired) {
      cell.emitted.push_back({s, t_spike});
      post_event(cell, s);
      if (is_lif) {
        std::fill(cell.v_mV.begin(), cell.v_mV.end(), k.lif.v_reset_mV);
        cell.refractory_until = s + 1 + k.ref_steps;
      } else {
        cell.detector_armed = false;
      }
    } else if (!cell.detector_armed && v_after < k.threshold_mV) {
      cell.detector_armed = true;
    }
    cell.detector_prev_v = cell.v_mV[k.detector_comp];
  }

  sample_probes(cell, s, false);
}

void Engine::Impl::sample_probes(CellRT& cell, std::int64_t s, bool force) {
  for (std::size_t i = 0; i < probes.size(); ++i) {
    const auto& p = probes[i];
    if (p.spec.gid != cell.gid) continue;
    if (!force && (s + 1) % p.spec.every_steps != 0) continue;
    self->traces_[i].emplace_back((double(s) + 1.0) * opt.dt_ms,
                                  probe_value(cell, p));
  }
}

double Engine::Impl::probe_value(const CellRT& cell, const ProbeRT& p) const {
  switch (p.spec.what) {
    case ProbeWhat::voltage:
      return cell.v_mV.empty() ? 0.0 : cell.v_mV[p.spec.comp];
    case ProbeWhat::species:
      return cell.species[p.spec.species][p.spec.comp];
    default:
      break;
  }
  const auto& g = cell.groups[p.group];
  const int i = p.spec.instance;
  switch (p.spec.what) {
    case ProbeWhat::syn_weight:
      switch (g.spec.kind) {
        case SynKind::stdp_cond:
          return g.stdp[i].w;
        case SynKind::homeo_current:
          return g.homeo[i].w;
        case SynKind::stc_charge:
          return stc_total_weight(g.stc[i], g.spec.stc);
        default:
          return g.weight[i];
      }
    case ProbeWhat::syn_h:
      return g.stc[i].h;
    case ProbeWhat::syn_z:
      return g.stc[i].z;
    case ProbeWhat::syn_c:
      return g.stc[i].c;
    case ProbeWhat::syn_kernel:
      return g.kernel[i];
    default:
      return 0.0;
  }
}

void Engine::Impl::generate_source_events(std::int64_t s0, std::int64_t s1) {
  const double dt = opt.dt_ms;
  auto& cells = self->cells_;
  auto emit_at = [&](const SourceRT& src, std::int64_t st) {
    for (const auto& e : src.edges) {
      cells[e.dst].inbox.push_back(EventRec{st + e.delay_steps, 0xFFFFFFFFu,
                                            e.seq, e.group, 0, e.instance,
                                            e.weight});
      inbox_dirty[e.dst] = 1;
    }
  };
  for (auto& src : sources) {
    if (src.edges.empty()) continue;
    if (std::holds_alternative<ScriptedSource>(src.spec)) {
      for (double t : std::get<ScriptedSource>(src.spec).times_ms) {
        const std::int64_t st = ceil_steps(t, dt);
        if (st >= s0 && st < s1) emit_at(src, st);
      }
    } else if (std::holds_alternative<RegularSource>(src.spec)) {
      const auto& rs = std::get<RegularSource>(src.spec);
      if (rs.period_ms <= 0) continue;
      const std::int64_t k0 = std::max<std::int64_t>(
          0, static_cast<std::int64_t>(std::ceil(
                 (double(s0) * dt - rs.t0_ms) / rs.period_ms - 1e-9)));
      for (std::int64_t kk = k0; kk < rs.count; ++kk) {
        const std::int64_t st = ceil_steps(rs.t0_ms + double(kk) * rs.period_ms, dt);
        if (st >= s1) break;
        if (st >= s0) emit_at(src, st);
      }
    } else {
      const auto& ps = std::get<PoissonSource>(src.spec);
      for (const auto& w : ps.windows) {
        const std::int64_t a = std::max(s0, ceil_steps(w.t0_ms, dt));
        const std::int64_t b = std::min(s1, ceil_steps(w.t1_ms, dt));
        const double prob = w.rate_hz * dt * 1e-3;
        for (std::int64_t s = a; s < b; ++s) {
          if (uniform_for(src.key, static_cast<std::uint64_t>(s)) < prob)
            emit_at(src, s);
        }
      }
    }
  }
}

void Engine::Impl::exchange() {
  auto& cells = self->cells_;
  for (auto& c : cells) {
    for (const auto& em : c.emitted) {
      self->spikes_.push_back({em.t_ms, c.gid});
      for (const auto& e : cell_edges[c.gid]) {
        cells[e.dst].inbox.push_back(EventRec{em.step + 1 + e.delay_steps,
                                              c.gid, e.seq, e.group, 0,
                                              e.instance, e.weight});
        inbox_dirty[e.dst] = 1;
      }
    }
    c.emitted.clear();
  }
}

// ---- engine public API --------------------------------------------------------

Engine::Engine(const Recipe& recipe, const EngineOptions& opt)
    : impl_(std::make_unique<Impl>(this)) {
  dt_ = opt.dt_ms;
  if (!(dt_ > 0)) throw EngineError("dt must be positive");
  impl_->opt = opt;
  impl_->build(recipe);
}

Engine::~Engine() = default;

double Engine::time_ms() const { return double(step_) * dt_; }

const CompartmentGrid& Engine::grid_of(std::uint32_t gid) const {
  return cells_[gid].kind->grid;
}

void Engine::advance_to(double t_ms) {
  const std::int64_t target = ceil_steps(t_ms, dt_);
  auto& im = *impl_;
  while (step_ < target) {
    const std::int64_t epoch =
        im.min_delay_steps > 0 ? im.min_delay_steps : (target - step_);
    const std::int64_t s1 = std::min(target, step_ + epoch);
    im.generate_source_events(step_, s1);
    for (std::uint32_t g = 0; g < cells_.size(); ++g) {
      if (!im.inbox_dirty[g]) continue;
      auto& c = cells_[g];
      c.inbox.erase(c.inbox.begin(),
                    c.inbox.begin() + static_cast<std::ptrdiff_t>(c.inbox_cursor));
      c.inbox_cursor = 0;
      std::sort(c.inbox.begin(), c.inbox.end(), EventOrder{});
      im.inbox_dirty[g] = 0;
    }
    if (im.workers > 1) {
      {
        std::lock_guard<std::mutex> lk(im.mu);
        im.epoch_s0 = step_;
        im.epoch_s1 = s1;
        im.pending = im.workers - 1;
        ++im.generation;
      }
      im.cv_start.notify_all();
      for (std::size_t gid = 0; gid < cells_.size(); gid += im.workers)
        im.run_cell(cells_[gid], step_, s1);
      std::unique_lock<std::mutex> lk(im.mu);
      im.cv_done.wait(lk, [&] { return im.pending == 0; });
    } else {
      for (auto& c : cells_) im.run_cell(c, step_, s1);
    }
    im.exchange();
    step_ = s1;
  }
}

void Engine::fast_forward_to(double t_ms, double coarse_dt_ms) {
  auto& im = *impl_;
  const std::int64_t per =
      static_cast<std::int64_t>(std::llround(coarse_dt_ms / dt_));
  if (per < 1 ||
      std::fabs(double(per) * dt_ - coarse_dt_ms) > 1e-9 * coarse_dt_ms)
    throw EngineError("fast-forward: coarse dt must be a multiple of dt");
  const std::int64_t target = ceil_steps(t_ms, dt_);
  if ((target - step_) % per != 0)
    throw EngineError("fast-forward: span must be a multiple of coarse dt");

  for (auto& c : cells_) {
    if (c.inbox_cursor < c.inbox.size() || !c.internal.empty())
      throw EngineError("fast-forward: pending undelivered spikes");
    for (auto& g : c.groups) {
      for (auto& st : g.stc) st.c = 0.0;
      for (auto& st : g.stdp) {
        st.a_pre = 0.0;
        st.a_post = 0.0;
      }
      for (auto& kv : g.kernel) kv = 0.0;
      g.active.clear();
    }
  }

  const double dtc = coarse_dt_ms;
  while (step_ < target) {
    for (auto& cell : cells_) {
      const auto& k = *cell.kind;
      const int n = k.grid.size();
      for (auto& g : cell.groups) {
        if (g.spec.kind != SynKind::stc_charge) continue;
        const auto& p = g.spec.stc;
        const double fh = std::exp(-0.1 * dtc / p.tau_h_ms);
        const std::vector<double>* prp =
            (k.prp_idx >= 0) ? &cell.species[k.prp_idx] : nullptr;
        std::vector<double>* sps =
            (k.sps_idx >= 0) ? &cell.species[k.sps_idx] : nullptr;
        for (int i = 0; i < g.size(); ++i) {
          auto& st = g.stc[i];
          st.h = p.h0_mV + (st.h - p.h0_mV) * fh;
          const double na = std::fabs(st.h - p.h0_mV);
          if (na != g.sps_abs[i]) {
            if (sps) {
              const int comp = g.comp[i];
              (*sps)[comp] += (na - g.sps_abs[i]) / k.grid.volume_um3[comp];
            }
            g.sps_abs[i] = na;
          }
          if (prp) stc_late_step(st, p, (*prp)[g.comp[i]], dtc);
        }
      }
      if (!k.species.empty()) {
        double prod = 0.0;
        if (k.prp_enabled)
          prod = prp_production(k.prp, cell.species[k.sps_idx][k.prp_comp]);
        for (std::size_t sp = 0; sp < k.species.size(); ++sp) {
          const auto& srt = k.species[sp];
          auto& conc = cell.species[sp];
          const bool is_prp = (int(sp) == k.prp_idx);
          if (n == 1) {
            const double vol = k.grid.volume_um3[0];
            const double cap0 = vol / dtc;
            const double gse =
                srt.decay_tau_ms > 0 ? vol / srt.decay_tau_ms : 0.0;
            conc[0] = (cap0 * conc[0] + (is_prp ? prod : 0.0)) / (cap0 + gse);
            continue;
          }
          static thread_local std::vector<double> cap, gs, rhs;
          cap.resize(n);
          gs.resize(n);
          rhs.resize(n);
          for (int i = 0; i < n; ++i) {
            cap[i] = k.grid.volume_um3[i] / dtc;
            gs[i] = srt.decay_tau_ms > 0
                        ? k.grid.volume_um3[i] / srt.decay_tau_ms
                        : 0.0;
            rhs[i] = 0.0;
          }
          if (is_prp && prod != 0.0) rhs[k.prp_comp] = prod;
          solve_tree(k.grid, cap, gs, srt.coupling, rhs, conc);
        }
      }
    }
    step_ += per;
    for (auto& cell : cells_) im.sample_probes(cell, step_ - 1, true);
  }
}

// ---- checkpointing -----------------------------------------------------------

namespace {

void put_u32(std::vector<std::uint8_t>& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back((v >> (8 * i)) & 0xFF);
}
void put_u64(std::vector<std::uint8_t>& b, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) b.push_back((v >> (8 * i)) & 0xFF);
}

struct ByteReader {
  std::span<const std::uint8_t> d;
  std::size_t pos = 0;
  std::uint32_t u32() {
    if (pos + 4 > d.size()) throw EngineError("checkpoint: truncated");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t(d[pos + i]) << (8 * i);
    pos += 4;
    return v;
  }
  std::uint64_t u64() {
    if (pos + 8 > d.size()) throw EngineError("checkpoint: truncated");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t(d[pos + i]) << (8 * i);
    pos += 8;
    return v;
  }
};

constexpr char kMagic[8] = {'M', 'C', 'S', 'C', 'K', 'P', 'T', '1'};

}  // namespace

std::vector<std::uint8_t> Checkpoint::serialize() const {
  std::vector<std::uint8_t> b;
  b.insert(b.end(), kMagic, kMagic + 8);
  put_u32(b, 1);           // version
  put_u32(b, 0x01020304);  // endianness probe
  auto put_name = [&](const std::string& n) {
    put_u32(b, static_cast<std::uint32_t>(n.size()));
    b.insert(b.end(), n.begin(), n.end());
  };
  for (const auto& [name, arr] : f64) {
    put_name(name);
    b.push_back(0);
    put_u64(b, arr.size());
    for (double v : arr) {
      std::uint64_t u;
      std::memcpy(&u, &v, 8);
      put_u64(b, u);
    }
  }
  for (const auto& [name, arr] : u64) {
    put_name(name);
    b.push_back(1);
    put_u64(b, arr.size());
    for (std::uint64_t v : arr) put_u64(b, v);
  }
  return b;
}

Checkpoint Checkpoint::deserialize(std::span<const std::uint8_t> bytes) {
  Checkpoint c;
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kMagic, 8) != 0)
    throw EngineError("checkpoint: bad magic");
  ByteReader r{bytes, 8};
  if (r.u32() != 1) throw EngineError("checkpoint: version mismatch");
  if (r.u32() != 0x01020304)
    throw EngineError("checkpoint: endianness mismatch");
  while (r.pos < bytes.size()) {
    const std::uint32_t nlen = r.u32();
    if (r.pos + nlen > bytes.size()) throw EngineError("checkpoint: truncated");
    std::string name(reinterpret_cast<const char*>(bytes.data() + r.pos), nlen);
    r.pos += nlen;
    if (r.pos >= bytes.size()) throw EngineError("checkpoint: truncated");
    const std::uint8_t type = bytes[r.pos++];
    const std::uint64_t count = r.u64();
    if (count > (bytes.size() - r.pos) / 8)
      throw EngineError("checkpoint: corrupted length header");
    if (type == 0) {
      std::vector<double> arr(count);
      for (auto& v : arr) {
        const std::uint64_t u = r.u64();
        std::memcpy(&v, &u, 8);
      }
      c.f64.emplace(std::move(name), std::move(arr));
    } else if (type == 1) {
      std::vector<std::uint64_t> arr(count);
      for (auto& v : arr) v = r.u64();
      c.u64.emplace(std::move(name), std::move(arr));
    } else {
      throw EngineError("checkpoint: unknown record type");
    }
  }
  return c;
}

void Checkpoint::save(const std::string& path) const {
  const auto bytes = serialize();
  std::ofstream f(path, std::ios::binary);
  if (!f) throw EngineError("checkpoint: cannot open " + path);
  f.write(reinterpret_cast<const char*>(bytes.data()),
          static_cast<std::streamsize>(bytes.size()));
}

Checkpoint Checkpoint::load(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw EngineError("checkpoint: cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                                  std::istreambuf_iterator<char>());
  return deserialize(bytes);
}

Checkpoint Engine::make_checkpoint() const {
  Checkpoint c;
  c.u64["meta/step"] = {static_cast<std::uint64_t>(step_)};
  c.f64["meta/dt_ms"] = {dt_};
  for (const auto& cell : cells_) {
    const std::string pre = "cell/" + std::to_string(cell.gid) + "/";
    if (!cell.v_mV.empty()) c.f64[pre + "v"] = cell.v_mV;
    c.f64[pre + "det"] = {cell.detector_prev_v};
    c.u64[pre + "flags"] = {static_cast<std::uint64_t>(cell.refractory_until),
                            cell.detector_armed ? 1ull : 0ull,
                            cell.internal_seq};
    for (std::size_t sp = 0; sp < cell.species.size(); ++sp)
      c.f64[pre + "species/" + std::to_string(sp)] = cell.species[sp];
    if (!cell.hh_m.empty()) {
      c.f64[pre + "hh_m"] = cell.hh_m;
      c.f64[pre + "hh_h"] = cell.hh_h;
      c.f64[pre + "hh_n"] = cell.hh_n;
    }
    for (std::size_t gi = 0; gi < cell.groups.size(); ++gi) {
      const auto& g = cell.groups[gi];
      const std::string gp = pre + "g" + std::to_string(gi) + "/";
      c.f64[gp + "kernel"] = g.kernel;
      c.f64[gp + "weight"] = g.weight;
      if (!g.stdp.empty()) {
        std::vector<double> a, b, w;
        std::vector<std::uint64_t> ls;
        for (std::size_t i = 0; i < g.stdp.size(); ++i) {
          a.push_back(g.stdp[i].a_pre);
          b.push_back(g.stdp[i].a_post);
          w.push_back(g.stdp[i].w);
          ls.push_back(static_cast<std::uint64_t>(g.stdp_last_step[i]));
        }
        c.f64[gp + "stdp_a_pre"] = a;
        c.f64[gp + "stdp_a_post"] = b;
        c.f64[gp + "stdp_w"] = w;
        c.u64[gp + "stdp_last"] = ls;
      }
      if (!g.homeo.empty()) {
        std::vector<double> w;
        for (const auto& s : g.homeo) w.push_back(s.w);
        c.f64[gp + "homeo_w"] = w;
      }
      if (!g.stc.empty()) {
        std::vector<double> h, z, cc;
        for (const auto& s : g.stc) {
          h.push_back(s.h);
          z.push_back(s.z);
          cc.push_back(s.c);
        }
        c.f64[gp + "stc_h"] = h;
        c.f64[gp + "stc_z"] = z;
        c.f64[gp + "stc_c"] = cc;
        c.f64[gp + "stc_sps"] = g.sps_abs;
      }
    }
    std::vector<EventRec> pend(cell.inbox.begin() + cell.inbox_cursor,
                               cell.inbox.end());
    std::vector<EventRec> internal_sorted = cell.internal;
    std::sort(internal_sorted.begin(), internal_sorted.end(),
              [](const EventRec& a, const EventRec& b) {
                if (a.step != b.step) return a.step < b.step;
                return a.seq < b.seq;
              });
    auto pack = [&](const std::vector<EventRec>& evs, const std::string& name) {
      std::vector<std::uint64_t> meta;
      std::vector<double> w;
      for (const auto& e : evs) {
        meta.push_back(static_cast<std::uint64_t>(e.step));
        meta.push_back(e.src);
        meta.push_back((std::uint64_t(e.group) << 48) |
                       (std::uint64_t(e.etype) << 40) | e.instance);
        meta.push_back(e.seq);
        w.push_back(e.weight);
      }
      c.u64[pre + name + "_meta"] = meta;
      c.f64[pre + name + "_w"] = w;
    };
    pack(pend, "inbox");
    pack(internal_sorted, "internal");
  }
  return c;
}

void Engine::restore(const Checkpoint& c) {
  auto getf = [&](const std::string& n) -> const std::vector<double>& {
    auto it = c.f64.find(n);
    if (it == c.f64.end()) throw EngineError("checkpoint: missing " + n);
    return it->second;
  };
  auto getu = [&](const std::string& n) -> const std::vector<std::uint64_t>& {
    auto it = c.u64.find(n);
    if (it == c.u64.end()) throw EngineError("checkpoint: missing " + n);
    return it->second;
  };
  if (std::fabs(getf("meta/dt_ms")[0] - dt_) > 1e-15)
    throw EngineError("checkpoint: dt mismatch");
  step_ = static_cast<std::int64_t>(getu("meta/step")[0]);
  for (auto& cell : cells_) {
    const std::string pre = "cell/" + std::to_string(cell.gid) + "/";
    if (!cell.v_mV.empty()) {
      const auto& v = getf(pre + "v");
      if (v.size() != cell.v_mV.size())
        throw EngineError("checkpoint: state size mismatch");
      cell.v_mV = v;
    }
    cell.detector_prev_v = getf(pre + "det")[0];
    const auto& fl = getu(pre + "flags");
    cell.refractory_until = static_cast<std::int64_t>(fl[0]);
    cell.detector_armed = fl[1] != 0;
    cell.internal_seq = static_cast<std::uint32_t>(fl[2]);
    for (std::size_t sp = 0; sp < cell.species.size(); ++sp)
      cell.species[sp] = getf(pre + "species/" + std::to_string(sp));
    if (!cell.hh_m.empty()) {
      cell.hh_m = getf(pre + "hh_m");
      cell.hh_h = getf(pre + "hh_h");
      cell.hh_n = getf(pre + "hh_n");
    }
    for (std::size_t gi = 0; gi < cell.groups.size(); ++gi) {
      auto& g = cell.groups[gi];
      const std::string gp = pre + "g" + std::to_string(gi) + "/";
      g.kernel = getf(gp + "kernel");
      g.weight = getf(gp + "weight");
      g.active.clear();
      for (int i = 0; i < g.size(); ++i)
        if (g.kernel[i] != 0.0) g.active.push_back(i);
      if (!g.stdp.empty()) {
        const auto& a = getf(gp + "stdp_a_pre");
        const auto& b = getf(gp + "stdp_a_post");
        const auto& w = getf(gp + "stdp_w");
        const auto& ls = getu(gp + "stdp_last");
        for (std::size_t i = 0; i < g.stdp.size(); ++i) {
          g.stdp[i] = {a[i], b[i], w[i]};
          g.stdp_last_step[i] = static_cast<std::int64_t>(ls[i]);
        }
      }
      if (!g.homeo.empty()) {
        const auto& w = getf(gp + "homeo_w");
        for (std::size_t i = 0; i < g.homeo.size(); ++i) g.homeo[i].w = w[i];
      }
      if (!g.stc.empty()) {
        const auto& h = getf(gp + "stc_h");
        const auto& z = getf(gp + "stc_z");
        const auto& cc = getf(gp + "stc_c");
        const auto& sa = getf(gp + "stc_sps");
        for (std::size_t i = 0; i < g.stc.size(); ++i) {
          g.stc[i] = {h[i], z[i], cc[i]};
          g.sps_abs[i] = sa[i];
        }
      }
    }
    auto unpack = [&](const std::string& name, std::vector<EventRec>& out) {
      const auto& meta = getu(pre + name + "_meta");
      const auto& w = getf(pre + name + "_w");
      if (meta.size() != w.size() * 4)
        throw EngineError("checkpoint: corrupted event block");
      out.clear();
      for (std::size_t i = 0; i < w.size(); ++i) {
        EventRec e;
        e.step = static_cast<std::int64_t>(meta[4 * i]);
        e.src = static_cast<std::uint32_t>(meta[4 * i + 1]);
        const std::uint64_t packed = meta[4 * i + 2];
        e.group = static_cast<std::uint16_t>(packed >> 48);
        e.etype = static_cast<std::uint8_t>((packed >> 40) & 0xFF);
        e.instance = static_cast<std::uint32_t>(packed & 0xFFFFFFFFull);
        e.seq = static_cast<std::uint32_t>(meta[4 * i + 3]);
        e.weight = w[i];
        out.push_back(e);
      }
    };
    unpack("inbox", cell.inbox);
    cell.inbox_cursor = 0;
    unpack("internal", cell.internal);
    std::make_heap(cell.internal.begin(), cell.internal.end(), InternalOrder{});
    cell.emitted.clear();
  }
}

}  // namespace mcsim
