#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mcsim {

enum class Region : std::uint8_t {
  soma,
  apical_dendrite,
  basal_dendrite,
  spine_neck,
  spine_head,
  generic,
};

const char* region_name(Region r);
std::optional<Region> region_from_name(const std::string& s);

// One cylindrical section of a neuron. `parent_pos` is the fractional arc
// position along the parent where this segment attaches (1.0 = distal end).
struct Segment {
  std::optional<std::uint32_t> parent;
  double length_um = 0;
  double radius_um = 0;
  Region tag = Region::generic;
  double parent_pos = 1.0;
};

// Discretized morphology: per-compartment cylinder metrics plus tree
// adjacency with parents ordered before children (index 0 is the root).
struct CompartmentGrid {
  std::vector<double> length_um;
  std::vector<double> lateral_area_um2;
  std::vector<double> cross_section_um2;
  std::vector<double> volume_um3;
  std::vector<std::int32_t> parent;     // -1 at the root
  std::vector<Region> tag;
  std::vector<std::uint32_t> segment_of;
  double total_volume_um3 = 0;

  int size() const { return static_cast<int>(length_um.size()); }

  // compartment holding fractional position `pos` of segment `seg`
  // (nearest compartment center; ties resolve to the proximal side)
  int compartment_at(std::uint32_t seg, double pos) const;

  std::vector<std::vector<std::int32_t>> children() const;
};

struct MorphologyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Splits every segment into ceil(length/target) equal compartments and
// computes cylinder areas/volumes. Throws MorphologyError on cyclic parent
// references, multiple roots, or non-positive geometry.
CompartmentGrid discretize(const std::vector<Segment>& segments,
                           double target_length_um);

// ---- builders ----------------------------------------------------------

struct FourSpineParams {
  double dendrite_length_um = 80.0;
  double dendrite_radius_um = 1.0;
  double head_length_um = 1.0;
  double head_radius_um = 1.0;
  // positions relative to the dendrite midpoint
  std::vector<double> spine_x_um = {-1.0, 0.0, 1.0, 3.0};
};

// Straight dendrite with spine heads attached at the requested x positions
// (x measured from the dendrite midpoint). Segment 0 is the dendrite,
// segments 1..n the spines in input order.
std::vector<Segment> build_four_spine_branch(const FourSpineParams& p = {});

enum class CellSize { small_cells, large_cells };
enum class DendriteSize { small_dendrites, large_dendrites };

struct ConsolidationCellParams {
  bool single_compartment = true;
  CellSize cell = CellSize::small_cells;
  DendriteSize dendrites = DendriteSize::small_dendrites;
  double delta_l_um = 1.0;
  // Defaults reproduce the 31/48-compartment layouts for either cell size;
  // the soma is always split as half + synthesis compartment + half.
  double soma_length_um = 12.0;
  double synthesis_compartment_um = 1.0;
};

struct ConsolidationCell {
  std::vector<Segment> segments;
  // segment indices (valid for the multi-compartment kinds)
  std::uint32_t soma_center_seg = 0;
  std::uint32_t apical_seg = 0;
  std::uint32_t basal_seg = 0;
};

// Single-compartment kind: one tiny cylinder. Multi-compartment kinds:
// soma half + synthesis compartment + soma half, apical and basal branches
// at the two soma ends.
ConsolidationCell build_consolidation_cell(const ConsolidationCellParams& p);

double consolidation_radius_um(CellSize c);
double apical_length_um(DendriteSize d);
double basal_length_um(DendriteSize d);
double morpho_correction(DendriteSize d);

// ---- text format -------------------------------------------------------
// One line per segment: `id parent length_um radius_um tag [pos]`,
// parent -1 for the root, tag one of the region names.
std::vector<Segment> read_segments(std::istream& in);
void write_segments(std::ostream& out, const std::vector<Segment>& segs);

}  // namespace mcsim
