#include "mcsim/morphology.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

namespace mcsim {

namespace {
constexpr double pi = std::numbers::pi;

struct SegRange {
  int first = 0;   // index of the segment's first compartment
  int count = 0;
  double dl = 0;   // compartment length
};
}  // namespace

const char* region_name(Region r) {
  switch (r) {
    case Region::soma: return "soma";
    case Region::apical_dendrite: return "apical-dendrite";
    case Region::basal_dendrite: return "basal-dendrite";
    case Region::spine_neck: return "spine-neck";
    case Region::spine_head: return "spine-head";
    case Region::generic: return "generic";
  }
  return "generic";
}

std::optional<Region> region_from_name(const std::string& s) {
  for (Region r : {Region::soma, Region::apical_dendrite,
                   Region::basal_dendrite, Region::spine_neck,
                   Region::spine_head, Region::generic}) {
    if (s == region_name(r)) return r;
  }
  return std::nullopt;
}

int CompartmentGrid::compartment_at(std::uint32_t seg, double pos) const {
  int first = -1, count = 0;
  for (int i = 0; i < size(); ++i) {
    if (segment_of[i] == seg) {
      if (first < 0) first = i;
      ++count;
    }
  }
  if (first < 0) throw MorphologyError("compartment_at: unknown segment");
  pos = std::clamp(pos, 0.0, 1.0);
  // nearest compartment center; exact boundary positions go proximal
  const double kf = pos * count - 0.5;
  int k = static_cast<int>(std::ceil(kf - 0.5));
  k = std::clamp(k, 0, count - 1);
  return first + k;
}

std::vector<std::vector<std::int32_t>> CompartmentGrid::children() const {
  std::vector<std::vector<std::int32_t>> ch(size());
  for (int i = 0; i < size(); ++i)
    if (parent[i] >= 0) ch[parent[i]].push_back(i);
  return ch;
}

CompartmentGrid discretize(const std::vector<Segment>& segments,
                           double target_length_um) {
  const int n = static_cast<int>(segments.size());
  if (n == 0) throw MorphologyError("discretize: empty segment list");
  if (!(target_length_um > 0))
    throw MorphologyError("discretize: target length must be positive");

  int root = -1;
  for (int s = 0; s < n; ++s) {
    const auto& seg = segments[s];
    if (!(seg.length_um > 0) || !(seg.radius_um > 0))
      throw MorphologyError("discretize: non-positive segment geometry");
    if (seg.parent_pos < 0 || seg.parent_pos > 1)
      throw MorphologyError("discretize: parent_pos outside [0,1]");
    if (!seg.parent) {
      if (root >= 0) throw MorphologyError("discretize: multiple roots");
      root = s;
    } else if (*seg.parent >= segments.size()) {
      throw MorphologyError("discretize: parent index out of range");
    }
  }
  if (root < 0) throw MorphologyError("discretize: no root segment");

  // topological order; a leftover segment means a parent cycle
  std::vector<int> order;
  order.reserve(n);
  std::vector<char> placed(n, 0);
  order.push_back(root);
  placed[root] = 1;
  for (std::size_t head = 0; head < order.size(); ++head) {
    for (int s = 0; s < n; ++s) {
      if (!placed[s] && segments[s].parent &&
          static_cast<int>(*segments[s].parent) == order[head]) {
        order.push_back(s);
        placed[s] = 1;
      }
    }
  }
  if (static_cast<int>(order.size()) != n)
    throw MorphologyError("discretize: cyclic parent references");

  std::vector<SegRange> ranges(n);
  CompartmentGrid g;
  for (int idx : order) {
    const auto& seg = segments[idx];
    const int count =
        std::max(1, static_cast<int>(std::ceil(seg.length_um / target_length_um -
                                               1e-12)));
    const double dl = seg.length_um / count;
    const double area_xs = pi * seg.radius_um * seg.radius_um;
    ranges[idx] = {g.size(), count, dl};

    for (int k = 0; k < count; ++k) {
      int parent_comp;
      if (k > 0) {
        parent_comp = ranges[idx].first + k - 1;
      } else if (!seg.parent) {
        parent_comp = -1;
      } else {
        const auto& pr = ranges[*seg.parent];
        const double kf = seg.parent_pos * pr.count - 0.5;
        int kk = static_cast<int>(std::ceil(kf - 0.5));
        kk = std::clamp(kk, 0, pr.count - 1);
        parent_comp = pr.first + kk;
      }
      g.length_um.push_back(dl);
      g.lateral_area_um2.push_back(2 * pi * seg.radius_um * dl);
      g.cross_section_um2.push_back(area_xs);
      g.volume_um3.push_back(area_xs * dl);
      g.parent.push_back(parent_comp);
      g.tag.push_back(seg.tag);
      g.segment_of.push_back(static_cast<std::uint32_t>(idx));
    }
  }
  for (double v : g.volume_um3) g.total_volume_um3 += v;
  return g;
}

std::vector<Segment> build_four_spine_branch(const FourSpineParams& p) {
  std::vector<Segment> segs;
  segs.push_back(Segment{std::nullopt, p.dendrite_length_um,
                         p.dendrite_radius_um, Region::generic, 1.0});
  for (double x : p.spine_x_um) {
    const double pos = (x + 0.5 * p.dendrite_length_um) / p.dendrite_length_um;
    if (pos <= 0.0 || pos >= 1.0)
      throw MorphologyError("spine position outside the dendrite");
    segs.push_back(
        Segment{0u, p.head_length_um, p.head_radius_um, Region::spine_head, pos});
  }
  return segs;
}

double consolidation_radius_um(CellSize c) {
  return c == CellSize::small_cells ? 6.0 : 12.0;
}
double apical_length_um(DendriteSize d) {
  return d == DendriteSize::small_dendrites ? 12.5 : 25.0;
}
double basal_length_um(DendriteSize d) {
  return d == DendriteSize::small_dendrites ? 5.0 : 10.0;
}
double morpho_correction(DendriteSize d) {
  return d == DendriteSize::small_dendrites ? 1.035 : 1.020;
}

ConsolidationCell build_consolidation_cell(const ConsolidationCellParams& p) {
  ConsolidationCell cell;
  if (p.single_compartment) {
    cell.segments.push_back(
        Segment{std::nullopt, 2e-3, 1e-3, Region::soma, 1.0});
    return cell;
  }
  const double r = consolidation_radius_um(p.cell);
  const double half = 0.5 * (p.soma_length_um - p.synthesis_compartment_um);
  if (half <= 0)
    throw MorphologyError("consolidation cell: soma shorter than synthesis compartment");

  // center synthesis compartment is the root; soma halves extend either way
  cell.segments.push_back(
      Segment{std::nullopt, p.synthesis_compartment_um, r, Region::soma, 1.0});
  cell.soma_center_seg = 0;
  cell.segments.push_back(Segment{0u, half, r, Region::soma, 1.0});  // apical half
  cell.segments.push_back(Segment{0u, half, r, Region::soma, 0.0});  // basal half
  cell.segments.push_back(Segment{1u, apical_length_um(p.dendrites), r,
                                  Region::apical_dendrite, 1.0});
  cell.apical_seg = 3;
  cell.segments.push_back(Segment{2u, basal_length_um(p.dendrites), r,
                                  Region::basal_dendrite, 1.0});
  cell.basal_seg = 4;
  return cell;
}

std::vector<Segment> read_segments(std::istream& in) {
  std::vector<Segment> segs;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    long id, parent;
    double length, radius, pos = 1.0;
    std::string tag;
    if (!(ls >> id)) continue;  // blank line
    if (!(ls >> parent >> length >> radius >> tag))
      throw MorphologyError("segment file: malformed line " +
                            std::to_string(lineno));
    ls >> pos;
    if (id != static_cast<long>(segs.size()))
      throw MorphologyError("segment file: ids must be consecutive from 0");
    const auto reg = region_from_name(tag);
    if (!reg)
      throw MorphologyError("segment file: unknown tag '" + tag + "'");
    Segment s;
    if (parent >= 0) s.parent = static_cast<std::uint32_t>(parent);
    s.length_um = length;
    s.radius_um = radius;
    s.tag = *reg;
    s.parent_pos = pos;
    segs.push_back(s);
  }
  return segs;
}

void write_segments(std::ostream& out, const std::vector<Segment>& segs) {
  for (std::size_t i = 0; i < segs.size(); ++i) {
    const auto& s = segs[i];
    out << i << ' ' << (s.parent ? static_cast<long>(*s.parent) : -1) << ' '
        << s.length_um << ' ' << s.radius_um << ' ' << region_name(s.tag)
        << ' ' << s.parent_pos << '\n';
  }
}

}  // namespace mcsim
