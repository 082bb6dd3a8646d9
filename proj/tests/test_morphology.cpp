#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "mcsim/morphology.hpp"

using namespace mcsim;

TEST_CASE("single tiny cylinder discretizes to one compartment") {
  std::vector<Segment> segs = {{std::nullopt, 2e-3, 1e-3, Region::soma, 1.0}};
  const auto g = discretize(segs, 2e-3);
  CHECK(g.size() == 1);
  CHECK(g.volume_um3[0] ==
        doctest::Approx(std::numbers::pi * 1e-6 * 2e-3).epsilon(1e-12));
}

TEST_CASE("80 um dendrite at 1 um target gives 80 equal compartments") {
  std::vector<Segment> segs = {{std::nullopt, 80.0, 1.0, Region::generic, 1.0}};
  const auto g = discretize(segs, 1.0);
  CHECK(g.size() == 80);
  for (int i = 0; i < g.size(); ++i)
    CHECK(g.length_um[i] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("target larger than the segment gives one compartment") {
  std::vector<Segment> segs = {{std::nullopt, 3.0, 1.0, Region::generic, 1.0}};
  CHECK(discretize(segs, 10.0).size() == 1);
}

TEST_CASE("volume additivity and refinement") {
  std::vector<Segment> segs;
  segs.push_back({std::nullopt, 12.0, 2.0, Region::soma, 1.0});
  segs.push_back({0u, 25.0, 1.0, Region::apical_dendrite, 1.0});
  segs.push_back({0u, 7.3, 0.7, Region::basal_dendrite, 0.0});
  double expect = 0;
  for (const auto& s : segs)
    expect += std::numbers::pi * s.radius_um * s.radius_um * s.length_um;

  const auto g1 = discretize(segs, 1.0);
  CHECK(g1.total_volume_um3 == doctest::Approx(expect).epsilon(1e-12));

  const auto g2 = discretize(segs, 0.5);
  CHECK(g2.total_volume_um3 == doctest::Approx(expect).epsilon(1e-12));
  // halving the target doubles per-segment counts (up to ceiling effects)
  CHECK(g2.size() >= 2 * g1.size() - 3);
}

TEST_CASE("tree structure has one root and parents precede children") {
  std::vector<Segment> segs;
  segs.push_back({std::nullopt, 10.0, 1.0, Region::soma, 1.0});
  segs.push_back({0u, 5.0, 0.5, Region::generic, 1.0});
  segs.push_back({1u, 5.0, 0.5, Region::generic, 1.0});
  const auto g = discretize(segs, 1.0);
  int roots = 0;
  for (int i = 0; i < g.size(); ++i) {
    if (g.parent[i] < 0)
      ++roots;
    else
      CHECK(g.parent[i] < i);
  }
  CHECK(roots == 1);
}

TEST_CASE("cyclic parents and bad geometry are rejected") {
  std::vector<Segment> cyc;
  cyc.push_back({1u, 1.0, 1.0, Region::generic, 1.0});
  cyc.push_back({0u, 1.0, 1.0, Region::generic, 1.0});
  CHECK_THROWS_AS(discretize(cyc, 1.0), MorphologyError);

  std::vector<Segment> bad = {{std::nullopt, -1.0, 1.0, Region::generic, 1.0}};
  CHECK_THROWS_AS(discretize(bad, 1.0), MorphologyError);
  std::vector<Segment> ok = {{std::nullopt, 1.0, 1.0, Region::generic, 1.0}};
  CHECK_THROWS_AS(discretize(ok, 0.0), MorphologyError);
}

TEST_CASE("four-spine branch attaches heads at the stated positions") {
  const auto segs = build_four_spine_branch();
  REQUIRE(segs.size() == 5);
  const auto g = discretize(segs, 1.0);
  CHECK(g.size() == 84);  // 80 shaft + 4 heads

  // spine x positions -1, 0, 1, 3 from the midpoint of the 80 um dendrite;
  // ties at compartment boundaries resolve to the proximal side
  CHECK(g.parent[80] == 38);  // x = -1 -> boundary tie -> compartment 38
  CHECK(g.parent[81] == 39);  // x = 0  -> tie -> 39
  CHECK(g.parent[82] == 40);  // x = +1 -> tie -> 40
  CHECK(g.parent[83] == 42);  // x = +3 -> tie -> 42

  // heads carry the spine-head tag
  for (int spine = 0; spine < 4; ++spine)
    CHECK(g.tag[80 + spine] == Region::spine_head);
}

TEST_CASE("generalized builder with zero spines gives a bare dendrite") {
  FourSpineParams p;
  p.spine_x_um = {};
  const auto segs = build_four_spine_branch(p);
  CHECK(segs.size() == 1);
  CHECK(discretize(segs, 1.0).size() == 80);
}

TEST_CASE("consolidation cell compartment counts") {
  ConsolidationCellParams p;
  p.single_compartment = false;

  p.cell = CellSize::small_cells;
  p.dendrites = DendriteSize::small_dendrites;
  CHECK(discretize(build_consolidation_cell(p).segments, 1.0).size() == 31);

  p.dendrites = DendriteSize::large_dendrites;
  CHECK(discretize(build_consolidation_cell(p).segments, 1.0).size() == 48);

  p.cell = CellSize::large_cells;
  CHECK(discretize(build_consolidation_cell(p).segments, 1.0).size() == 48);

  p.dendrites = DendriteSize::small_dendrites;
  CHECK(discretize(build_consolidation_cell(p).segments, 1.0).size() == 31);

  ConsolidationCellParams sc;
  sc.single_compartment = true;
  CHECK(discretize(build_consolidation_cell(sc).segments, 1.0).size() == 1);
}

TEST_CASE("consolidation cell soma center is a tagged single compartment") {
  ConsolidationCellParams p;
  p.single_compartment = false;
  const auto cell = build_consolidation_cell(p);
  const auto g = discretize(cell.segments, 1.0);
  const int center = g.compartment_at(cell.soma_center_seg, 0.5);
  CHECK(g.tag[center] == Region::soma);
  CHECK(g.segment_of[center] == cell.soma_center_seg);
  int count = 0;
  for (int i = 0; i < g.size(); ++i)
    if (g.segment_of[i] == cell.soma_center_seg) ++count;
  CHECK(count == 1);
}

TEST_CASE("segment text format round-trips") {
  const auto segs = build_four_spine_branch();
  std::stringstream ss;
  write_segments(ss, segs);
  const auto back = read_segments(ss);
  REQUIRE(back.size() == segs.size());
  for (std::size_t i = 0; i < segs.size(); ++i) {
    CHECK(back[i].parent == segs[i].parent);
    CHECK(back[i].length_um == doctest::Approx(segs[i].length_um));
    CHECK(back[i].radius_um == doctest::Approx(segs[i].radius_um));
    CHECK(back[i].tag == segs[i].tag);
    CHECK(back[i].parent_pos == doctest::Approx(segs[i].parent_pos));
  }
}
