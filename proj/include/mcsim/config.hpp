#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace mcsim {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Unit classes for config values. Internally times are ms, voltages mV,
// currents nA, conductances uS, lengths um; diffusivities stay in m^2/s and
// rates in Hz.
enum class Unit {
  time,
  voltage,
  current,
  conductance,
  rate,
  length,
  diffusivity,
  concentration,
  per_concentration,
  dimensionless,
  count,
  text,
  boolean,
};

struct ParamDesc {
  std::string key;
  Unit unit = Unit::dimensionless;
  std::string default_value;  // in config syntax, e.g. "20 ms"
};

// Flat `key = value` configuration with units in values. Unknown keys and
// unit mismatches are rejected with line-precise messages. A serialized
// manifest parses back to an identical configuration.
class Config {
 public:
  static Config from_defaults(const std::vector<ParamDesc>& registry);
  static Config load(const std::string& path,
                     const std::vector<ParamDesc>& registry);
  // parses config text; `source` appears in error messages
  static Config parse(const std::string& text,
                      const std::vector<ParamDesc>& registry,
                      const std::string& source);

  void set(const std::string& key, const std::string& value_text);

  double get(const std::string& key) const;        // converted numeric value
  std::int64_t get_int(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  const std::string& get_text(const std::string& key) const;
  bool has(const std::string& key) const;

  // resolved configuration, sorted, one `key = value` per line
  std::string manifest() const;

  const std::vector<ParamDesc>& registry() const { return registry_; }

 private:
  std::vector<ParamDesc> registry_;
  std::map<std::string, std::string> raw_;     // canonical value text
  std::map<std::string, double> numeric_;      // converted values
  const ParamDesc* find(const std::string& key) const;
};

// value conversion used by Config; exposed for tests
double parse_quantity(const std::string& text, Unit unit);
std::string canonical_unit_suffix(Unit unit);

// semicolon- or comma-separated list of quantities
std::vector<double> parse_quantity_list(const std::string& text, Unit unit);

}  // namespace mcsim
