#include "mcsim/csvio.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace mcsim {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::ifstream open_in(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  return f;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  return f;
}

}  // namespace

void write_trace_csv(const std::string& path, const TraceData& t) {
  auto f = open_out(path);
  f << "time_s,value\n";
  for (std::size_t i = 0; i < t.t_s.size(); ++i)
    f << format_double(t.t_s[i]) << ',' << format_double(t.value[i]) << '\n';
}

TraceData read_trace_csv(const std::string& path) {
  auto f = open_in(path);
  std::string line;
  if (!std::getline(f, line) || line.rfind("time_s,value", 0) != 0)
    throw std::runtime_error(path + ": expected 'time_s,value' header");
  TraceData t;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw std::runtime_error(path + ": malformed row");
    t.t_s.push_back(std::stod(line.substr(0, comma)));
    t.value.push_back(std::stod(line.substr(comma + 1)));
  }
  return t;
}

void write_spikes_csv(const std::string& path, SpikeData spikes) {
  std::vector<std::size_t> idx(spikes.t_s.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (spikes.t_s[a] != spikes.t_s[b]) return spikes.t_s[a] < spikes.t_s[b];
    return spikes.gid[a] < spikes.gid[b];
  });
  auto f = open_out(path);
  f << "time_s,cell_id\n";
  for (std::size_t i : idx)
    f << format_double(spikes.t_s[i]) << ',' << spikes.gid[i] << '\n';
}

SpikeData read_spikes_csv(const std::string& path) {
  auto f = open_in(path);
  std::string line;
  if (!std::getline(f, line) || line.rfind("time_s,cell_id", 0) != 0)
    throw std::runtime_error(path + ": expected 'time_s,cell_id' header");
  SpikeData s;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw std::runtime_error(path + ": malformed row");
    s.t_s.push_back(std::stod(line.substr(0, comma)));
    s.gid.push_back(static_cast<std::uint32_t>(
        std::stoul(line.substr(comma + 1))));
  }
  return s;
}

void write_table_csv(const std::string& path,
                     const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& rows) {
  auto f = open_out(path);
  for (std::size_t i = 0; i < header.size(); ++i)
    f << header[i] << (i + 1 < header.size() ? ',' : '\n');
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i)
      f << format_double(row[i]) << (i + 1 < row.size() ? ',' : '\n');
  }
}

}  // namespace mcsim
