#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace mcsim {

// Two-column trace files (`time_s,value`) and spike rasters
// (`time_s,cell_id`). Floats are printed with 17 significant digits so a
// round-trip through text is exact.

struct TraceData {
  std::vector<double> t_s;
  std::vector<double> value;
};

struct SpikeData {
  std::vector<double> t_s;
  std::vector<std::uint32_t> gid;
};

std::string format_double(double v);

void write_trace_csv(const std::string& path, const TraceData& t);
TraceData read_trace_csv(const std::string& path);

void write_spikes_csv(const std::string& path, SpikeData spikes);  // sorts
SpikeData read_spikes_csv(const std::string& path);

// generic table with a header row
void write_table_csv(const std::string& path,
                     const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& rows);

}  // namespace mcsim
