#include "mcsim/bench.hpp"

#include <sys/resource.h>

#include <chrono>
#include <cmath>

#include "mcsim/engine.hpp"

namespace mcsim {

namespace {

constexpr std::uint64_t kStreamTree = 23;
constexpr std::uint64_t kStreamWiring = 29;

double now_s() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

std::size_t peak_rss_bytes() {
  rusage u{};
  getrusage(RUSAGE_SELF, &u);
  return static_cast<std::size_t>(u.ru_maxrss) * 1024;
}

}  // namespace

BusyringSpec default_busyring() {
  BusyringSpec s;
  s.stdp.tau_pre_ms = 10.0;
  s.stdp.tau_post_ms = 10.0;
  s.stdp.a_pre_uS = 0.01;
  s.stdp.a_post_uS = -0.01;
  s.stdp.wmax_uS = 10.0;
  s.stdp.w0_uS = 0.0;
  return s;
}

std::vector<Segment> busyring_cell_segments(int depth, std::uint64_t seed,
                                            std::uint32_t gid) {
  std::vector<Segment> segs;
  segs.push_back(Segment{std::nullopt, 12.6, 6.3, Region::soma, 1.0});
  if (depth <= 0) return segs;
  const RngKey key = make_key(seed, gid, kStreamTree, 0);
  std::uint64_t draw = 0;
  std::vector<std::uint32_t> frontier = {0};
  for (int level = 1; level <= depth; ++level) {
    std::vector<std::uint32_t> next;
    for (std::uint32_t parent : frontier) {
      for (int child = 0; child < 2; ++child) {
        const double u = uniform_for(key, draw++);
        Segment s;
        s.parent = parent;
        s.length_um = 10.0 + 10.0 * u;
        s.radius_um = 0.6;
        s.tag = Region::generic;
        s.parent_pos = 1.0;
        segs.push_back(s);
        next.push_back(static_cast<std::uint32_t>(segs.size() - 1));
      }
    }
    frontier = std::move(next);
  }
  return segs;
}

namespace {

CellKindSpec busyring_kind(const BusyringSpec& spec, std::uint32_t gid,
                           double ring_weight) {
  CellKindSpec kind;
  kind.segments = busyring_cell_segments(spec.tree_depth, spec.seed, gid);
  kind.target_compartment_um = spec.tree_depth <= 0 ? 20.0 : 2.0;
  HhMembrane m;
  kind.membrane = m;

  PlacementSpec ring;
  ring.label = "ring";
  ring.comp = 0;
  ring.count = 0;
  ring.syn.kind = SynKind::static_cond;
  ring.syn.tau_syn_ms = spec.tau_syn_ms;
  ring.syn.e_rev_mV = 0.0;
  kind.placements.push_back(ring);

  PlacementSpec load;
  load.label = "load";
  load.comp = 0;
  load.count = 0;
  load.syn.kind =
      spec.stdp_on_random ? SynKind::stdp_cond : SynKind::static_cond;
  load.syn.tau_syn_ms = spec.tau_syn_ms;
  load.syn.e_rev_mV = 0.0;
  load.syn.stdp = spec.stdp;
  kind.placements.push_back(load);
  (void)ring_weight;
  return kind;
}

}  // namespace

double calibrate_ring_weight(const BusyringSpec& spec, double latency_ms) {
  // smallest weight whose EPSP fires a sample cell within latency_ms of
  // delivery, maximized over a few sample morphologies
  double needed = 0.0;
  for (std::uint32_t sample = 0; sample < 3; ++sample) {
    double lo = 1e-5, hi = 2.0;
    for (int iter = 0; iter < 30; ++iter) {
      const double w = 0.5 * (lo + hi);
      Recipe r;
      r.kinds.push_back(busyring_kind(spec, sample, 0.0));
      r.cell_kind = {0};
      r.sources.push_back(ScriptedSource{{5.0}});
      r.connections.push_back(ConnectionSpec{
          true, 0, 0, "ring", SelectionPolicy::univalent, w, spec.dt_ms});
      Engine eng(r, EngineOptions{spec.dt_ms, spec.seed, 1});
      eng.advance_to(5.0 + std::max(2.0, 4 * latency_ms));
      bool ok = false;
      for (const auto& s : eng.spikes())
        if (s.t_ms <= 5.0 + spec.dt_ms + latency_ms) ok = true;
      if (ok)
        hi = w;
      else
        lo = w;
    }
    needed = std::max(needed, hi);
  }
  return 1.5 * needed;
}

Recipe build_busyring(const BusyringSpec& spec) {
  if (spec.ring_size <= 0 || spec.n_cells % spec.ring_size != 0)
    throw BenchError("busyring: n_cells must be a multiple of the ring size");
  const double w_ring = spec.ring_weight_uS > 0 ? spec.ring_weight_uS
                                                : calibrate_ring_weight(spec);
  Recipe r;
  const auto n = static_cast<std::uint32_t>(spec.n_cells);
  r.kinds.reserve(n);
  r.cell_kind.resize(n);
  for (std::uint32_t g = 0; g < n; ++g) {
    r.kinds.push_back(busyring_kind(spec, g, w_ring));
    r.cell_kind[g] = g;
  }

  const auto k = static_cast<std::uint32_t>(spec.ring_size);
  for (std::uint32_t g = 0; g < n; ++g) {
    const std::uint32_t ring_base = g - g % k;
    const std::uint32_t next = ring_base + (g + 1 - ring_base) % k;
    r.connections.push_back(ConnectionSpec{
        false, g, next, "ring", SelectionPolicy::univalent, w_ring,
        spec.delay_ms});
  }

  // random zero-weight connections exercising event delivery only
  const RngKey wiring = make_key(spec.seed, 0, kStreamWiring, 0);
  std::uint64_t draw = 0;
  for (std::uint32_t g = 0; g < n; ++g) {
    for (int sidx = 0; sidx < spec.random_per_cell; ++sidx) {
      const auto dst = static_cast<std::uint32_t>(
          uniform_for(wiring, draw++) * double(n));
      r.connections.push_back(ConnectionSpec{
          false, g, std::min(dst, n - 1), "load", SelectionPolicy::univalent,
          0.0, spec.delay_ms});
    }
  }

  // one stimulus spike per ring
  for (std::uint32_t base = 0; base < n; base += k) {
    r.sources.push_back(ScriptedSource{{0.0}});
    r.connections.push_back(ConnectionSpec{
        true, static_cast<std::uint32_t>(r.sources.size() - 1), base, "ring",
        SelectionPolicy::univalent, w_ring, spec.dt_ms});
  }
  return r;
}

BenchReport run_bench_once(const BusyringSpec& spec) {
  BenchReport rep;
  const double t0 = now_s();
  const Recipe r = build_busyring(spec);
  Engine eng(r, EngineOptions{spec.dt_ms, spec.seed, spec.workers});
  const double t1 = now_s();
  eng.advance_to(spec.duration_ms);
  const double t2 = now_s();
  rep.setup_s = t1 - t0;
  rep.propagation_s = t2 - t1;
  rep.total_s = t2 - t0;
  rep.peak_rss_bytes = peak_rss_bytes();
  rep.spike_count = eng.spikes().size();
  return rep;
}

BenchStats run_bench(const BusyringSpec& spec, int repeats) {
  if (repeats < 1) throw BenchError("run_bench: repeats must be >= 1");
  BenchStats st;
  for (int i = 0; i < repeats; ++i) st.trials.push_back(run_bench_once(spec));
  double sum = 0;
  for (const auto& t : st.trials) sum += t.total_s;
  st.mean_total_s = sum / repeats;
  double var = 0;
  for (const auto& t : st.trials)
    var += (t.total_s - st.mean_total_s) * (t.total_s - st.mean_total_s);
  var /= repeats;
  st.cv_total = st.mean_total_s > 0 ? std::sqrt(var) / st.mean_total_s : 0.0;
  return st;
}

std::vector<std::size_t> busyring_spike_counts(const BusyringSpec& spec,
                                               std::vector<double>* v_trace0) {
  Recipe r = build_busyring(spec);
  if (v_trace0)
    r.probes.push_back(ProbeSpec{0, ProbeWhat::voltage, 0, 0, "", 0, 1});
  Engine eng(r, EngineOptions{spec.dt_ms, spec.seed, spec.workers});
  eng.advance_to(spec.duration_ms);
  std::vector<std::size_t> counts(spec.n_cells, 0);
  for (const auto& s : eng.spikes()) ++counts[s.gid];
  if (v_trace0) {
    v_trace0->clear();
    for (const auto& [t, v] : eng.traces()[0]) v_trace0->push_back(v);
  }
  return counts;
}

std::map<int, ScalingEfficiency> scaling_efficiency(
    const std::map<int, double>& wallclock_s, int n0) {
  const auto ref = wallclock_s.find(n0);
  if (ref == wallclock_s.end())
    throw BenchError("scaling_efficiency: reference node count missing");
  std::map<int, ScalingEfficiency> out;
  for (const auto& [n, t] : wallclock_s) {
    ScalingEfficiency e;
    e.as_printed = ref->second / (t * n);
    e.normalized = ref->second * n0 / (t * n);
    out[n] = e;
  }
  return out;
}

}  // namespace mcsim
