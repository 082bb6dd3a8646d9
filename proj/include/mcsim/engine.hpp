#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "mcsim/recipe.hpp"
#include "mcsim/rng.hpp"
#include "mcsim/tree_solver.hpp"

namespace mcsim {

struct EngineError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SpikeRecord {
  double t_ms;
  std::uint32_t gid;
};

struct ThresholdDetector {
  int comp = 0;
  double threshold_mV = 0.0;
};

// Upward threshold crossings with linearly interpolated crossing times.
// Returns (detector index, t_spike) for every detector whose voltage moved
// from below to at-or-above threshold across the step.
std::vector<std::pair<int, double>> detect_spikes(
    std::span<const double> before, std::span<const double> after,
    std::span<const ThresholdDetector> detectors, double t_ms, double dt_ms);

struct EngineOptions {
  double dt_ms = 0.025;
  std::uint64_t seed = 0;
  int workers = 1;
};

// Serialized simulator state: named arrays of 64-bit values in a
// self-describing little-endian container.
struct Checkpoint {
  std::map<std::string, std::vector<double>> f64;
  std::map<std::string, std::vector<std::uint64_t>> u64;

  std::vector<std::uint8_t> serialize() const;
  static Checkpoint deserialize(std::span<const std::uint8_t> bytes);
  void save(const std::string& path) const;
  static Checkpoint load(const std::string& path);
};

struct EventRec {
  std::int64_t step;
  std::uint32_t src;
  std::uint32_t seq;
  std::uint16_t group;
  std::uint8_t etype;  // 0 = pre delivery, 1 = delayed calcium
  std::uint32_t instance;
  double weight;
};

struct EmittedSpike {
  std::int64_t step;  // detection step
  double t_ms;        // interpolated crossing time
};

// Runtime synapse group (struct-of-arrays over instances of one placement).
struct SynGroupRT {
  std::string label;
  SynSpec spec;
  std::vector<int> comp;
  std::vector<double> weight;
  std::vector<double> kernel;  // conductance (uS) or current (nA) state
  std::vector<int> active;     // instances with nonzero kernel
  std::vector<StdpState> stdp;
  std::vector<std::int64_t> stdp_last_step;  // lazy trace decay
  std::vector<HomeostasisState> homeo;
  std::vector<StcState> stc;
  std::vector<double> sps_abs;  // |h-h0| mirrored into the SPS field

  int size() const { return static_cast<int>(comp.size()); }
};

struct CellKindRT;

struct CellRT {
  const CellKindRT* kind = nullptr;
  std::uint32_t gid = 0;
  std::vector<double> v_mV;
  std::vector<std::vector<double>> species;      // per species, per comp
  std::vector<double> hh_m, hh_h, hh_n;
  std::vector<SynGroupRT> groups;
  double detector_prev_v = 0.0;
  bool detector_armed = true;
  std::int64_t refractory_until = 0;
  double lif_exact_v = 0.0;

  // event delivery
  std::vector<EventRec> inbox;       // sorted at epoch boundaries
  std::size_t inbox_cursor = 0;
  std::vector<EventRec> internal;    // binary heap keyed by (step, seq)
  std::uint32_t internal_seq = 0;

  // per-epoch emissions
  std::vector<EmittedSpike> emitted;

  // scratch
  std::vector<double> rhs_current;   // nA per comp, cleared each step
  std::vector<double> species_src;   // amount/ms, per comp (active species)

  int find_group(const std::string& label) const;
};

struct OutEdge {
  std::uint32_t dst;
  std::uint16_t group;
  std::uint32_t instance;
  double weight;
  std::int64_t delay_steps;
  std::uint32_t seq;  // global edge ordinal, stable tiebreak
};

class Engine {
 public:
  Engine(const Recipe& recipe, const EngineOptions& opt);
  ~Engine();

  double time_ms() const;
  double dt_ms() const { return dt_; }
  std::int64_t step() const { return step_; }

  void advance_to(double t_ms);
  // Coarse integration of the slow subsystem (early/late weights, trigger
  // signal, synthesis, species diffusion) over stimulus-free spans. Errors if
  // spikes are still pending. coarse_dt must be a multiple of dt.
  void fast_forward_to(double t_ms, double coarse_dt_ms);

  Checkpoint make_checkpoint() const;
  void restore(const Checkpoint& c);

  const std::vector<SpikeRecord>& spikes() const { return spikes_; }
  void clear_spikes() { spikes_.clear(); }

  int num_cells() const { return static_cast<int>(cells_.size()); }
  CellRT& cell(std::uint32_t gid) { return cells_[gid]; }
  const CellRT& cell(std::uint32_t gid) const { return cells_[gid]; }
  const CompartmentGrid& grid_of(std::uint32_t gid) const;

  // probe traces in recipe order: (t_ms, value)
  const std::vector<std::vector<std::pair<double, double>>>& traces() const {
    return traces_;
  }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  friend struct Impl;

  double dt_ = 0.025;
  std::int64_t step_ = 0;
  std::vector<CellRT> cells_;
  std::vector<SpikeRecord> spikes_;
  std::vector<std::vector<std::pair<double, double>>> traces_;
};

}  // namespace mcsim
