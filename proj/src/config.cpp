#include "mcsim/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "mcsim/csvio.hpp"

namespace mcsim {

namespace {

struct UnitFactor {
  const char* name;
  double factor;
};

// factors map onto the internal canonical unit of each class
const std::vector<UnitFactor>& unit_table(Unit u) {
  static const std::vector<UnitFactor> time = {
      {"ms", 1.0}, {"s", 1e3}, {"min", 6e4}, {"h", 3.6e6}, {"us", 1e-3}};
  static const std::vector<UnitFactor> voltage = {{"mV", 1.0}, {"V", 1e3},
                                                  {"uV", 1e-3}};
  static const std::vector<UnitFactor> current = {
      {"nA", 1.0}, {"pA", 1e-3}, {"uA", 1e3}, {"mA", 1e6}};
  static const std::vector<UnitFactor> conductance = {
      {"uS", 1.0}, {"nS", 1e-3}, {"mS", 1e3}, {"S", 1e6}};
  static const std::vector<UnitFactor> rate = {{"Hz", 1.0}, {"kHz", 1e3}};
  static const std::vector<UnitFactor> length = {
      {"um", 1.0}, {"mm", 1e3}, {"nm", 1e-3}};
  static const std::vector<UnitFactor> diffusivity = {{"m2/s", 1.0},
                                                      {"um2/ms", 1e-9}};
  static const std::vector<UnitFactor> conc = {{"umol/l", 1.0},
                                               {"mmol/l", 1e3}};
  static const std::vector<UnitFactor> per_conc = {{"l/umol", 1.0}};
  static const std::vector<UnitFactor> none = {};
  switch (u) {
    case Unit::time: return time;
    case Unit::voltage: return voltage;
    case Unit::current: return current;
    case Unit::conductance: return conductance;
    case Unit::rate: return rate;
    case Unit::length: return length;
    case Unit::diffusivity: return diffusivity;
    case Unit::concentration: return conc;
    case Unit::per_concentration: return per_conc;
    default: return none;
  }
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

bool is_numeric_unit(Unit u) {
  return u != Unit::text && u != Unit::boolean;
}

}  // namespace

std::string canonical_unit_suffix(Unit unit) {
  const auto& tbl = unit_table(unit);
  return tbl.empty() ? "" : tbl.front().name;
}

double parse_quantity(const std::string& text, Unit unit) {
  const std::string t = trim(text);
  if (t.empty()) throw ConfigError("empty value");
  std::size_t pos = 0;
  double v;
  try {
    v = std::stod(t, &pos);
  } catch (const std::exception&) {
    throw ConfigError("not a number: '" + t + "'");
  }
  const std::string suffix = trim(t.substr(pos));
  const auto& tbl = unit_table(unit);
  if (tbl.empty()) {
    if (!suffix.empty())
      throw ConfigError("no unit expected, got '" + suffix + "'");
    if (unit == Unit::count && v != std::floor(v))
      throw ConfigError("expected an integer, got '" + t + "'");
    return v;
  }
  if (suffix.empty())
    throw ConfigError("missing unit (expected e.g. '" +
                      std::string(tbl.front().name) + "')");
  for (const auto& uf : tbl)
    if (suffix == uf.name) return v * uf.factor;
  throw ConfigError("unit '" + suffix + "' not valid here");
}

std::vector<double> parse_quantity_list(const std::string& text, Unit unit) {
  std::vector<double> out;
  std::string item;
  std::stringstream ss(text);
  while (std::getline(ss, item, ';')) {
    std::stringstream ss2(item);
    std::string sub;
    while (std::getline(ss2, sub, ',')) {
      const std::string tt = trim(sub);
      if (!tt.empty()) out.push_back(parse_quantity(tt, unit));
    }
  }
  return out;
}

const ParamDesc* Config::find(const std::string& key) const {
  for (const auto& d : registry_)
    if (d.key == key) return &d;
  return nullptr;
}

Config Config::from_defaults(const std::vector<ParamDesc>& registry) {
  Config c;
  c.registry_ = registry;
  for (const auto& d : registry) c.set(d.key, d.default_value);
  return c;
}

Config Config::parse(const std::string& text,
                     const std::vector<ParamDesc>& registry,
                     const std::string& source) {
  Config c = from_defaults(registry);
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(source + ":" + std::to_string(lineno) +
                        ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      c.set(key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(source + ":" + std::to_string(lineno) + ": " +
                        e.what());
    }
  }
  return c;
}

Config Config::load(const std::string& path,
                    const std::vector<ParamDesc>& registry) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse(ss.str(), registry, path);
}

void Config::set(const std::string& key, const std::string& value_text) {
  const ParamDesc* d = find(key);
  if (!d) throw ConfigError("unknown key '" + key + "'");
  if (is_numeric_unit(d->unit)) {
    const double v = parse_quantity(value_text, d->unit);
    numeric_[key] = v;
    const std::string suffix = canonical_unit_suffix(d->unit);
    raw_[key] = format_double(v) + (suffix.empty() ? "" : " " + suffix);
  } else if (d->unit == Unit::boolean) {
    const std::string t = trim(value_text);
    if (t != "true" && t != "false")
      throw ConfigError("expected true/false for '" + key + "'");
    numeric_[key] = t == "true" ? 1.0 : 0.0;
    raw_[key] = t;
  } else {
    raw_[key] = trim(value_text);
  }
}

double Config::get(const std::string& key) const {
  const auto it = numeric_.find(key);
  if (it == numeric_.end()) throw ConfigError("no numeric value for " + key);
  return it->second;
}

std::int64_t Config::get_int(const std::string& key) const {
  return static_cast<std::int64_t>(std::llround(get(key)));
}

std::uint64_t Config::get_u64(const std::string& key) const {
  return static_cast<std::uint64_t>(std::llround(get(key)));
}

bool Config::get_bool(const std::string& key) const { return get(key) != 0.0; }

const std::string& Config::get_text(const std::string& key) const {
  const auto it = raw_.find(key);
  if (it == raw_.end()) throw ConfigError("no value for " + key);
  return it->second;
}

bool Config::has(const std::string& key) const { return raw_.count(key) > 0; }

std::string Config::manifest() const {
  std::string out;
  for (const auto& [k, v] : raw_) out += k + " = " + v + "\n";
  return out;
}

}  // namespace mcsim
