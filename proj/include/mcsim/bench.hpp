#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "mcsim/recipe.hpp"

namespace mcsim {

struct BenchError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Rings of spike-propagating cells plus zero-weight random connections that
// load the event system. Cells are random trees with active soma dynamics
// and passive dendrites; each ring is started by one external stimulus spike.
struct BusyringSpec {
  int n_cells = 1024;
  int ring_size = 4;
  int random_per_cell = 1000;
  double delay_ms = 5.0;
  double ring_weight_uS = 0.0;  // 0: calibrate from the cell model
  double tau_syn_ms = 2.0;
  int tree_depth = 2;
  bool stdp_on_random = false;
  StdpParams stdp;  // tau 10/10, +-0.01, wmax 10 by default for this workload
  double duration_ms = 200.0;
  double dt_ms = 0.025;
  std::uint64_t seed = 0;
  int workers = 1;
};

BusyringSpec default_busyring();

// random tree morphology for one cell (deterministic in seed and gid)
std::vector<Segment> busyring_cell_segments(int depth, std::uint64_t seed,
                                            std::uint32_t gid);

// smallest conductance jump that fires a sample cell within latency_ms,
// scaled by a safety margin
double calibrate_ring_weight(const BusyringSpec& spec,
                             double latency_ms = 0.3);

Recipe build_busyring(const BusyringSpec& spec);

struct BenchReport {
  double setup_s = 0;
  double propagation_s = 0;
  double total_s = 0;
  std::size_t peak_rss_bytes = 0;
  std::size_t spike_count = 0;
};

BenchReport run_bench_once(const BusyringSpec& spec);

struct BenchStats {
  std::vector<BenchReport> trials;
  double mean_total_s = 0;
  double cv_total = 0;  // std/mean of the total wallclock over trials
};

BenchStats run_bench(const BusyringSpec& spec, int repeats);

// spike counts per cell, for the ring-exactness checks
std::vector<std::size_t> busyring_spike_counts(const BusyringSpec& spec,
                                               std::vector<double>* v_trace0 =
                                                   nullptr);

struct ScalingEfficiency {
  double as_printed = 0;   // T(n0) / (T(n) * n)
  double normalized = 0;   // T(n0) * n0 / (T(n) * n)
};

// Throws when n0 is not a key of T.
std::map<int, ScalingEfficiency> scaling_efficiency(
    const std::map<int, double>& wallclock_s, int n0);

}  // namespace mcsim
