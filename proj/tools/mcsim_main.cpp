#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "mcsim/analysis.hpp"
#include "mcsim/bench.hpp"
#include "mcsim/config.hpp"
#include "mcsim/csvio.hpp"
#include "mcsim/engine.hpp"
#include "mcsim/experiments.hpp"

using namespace mcsim;

namespace {

std::string default_outdir(const std::string& experiment,
                           const std::string& flag_value) {
  if (!flag_value.empty()) return flag_value;
  if (const char* env = std::getenv("MCSIM_OUT")) return env;
  return "out-" + experiment;
}

std::string experiment_of(const std::string& config_path) {
  // peek at the experiment key with a minimal registry
  const std::vector<ParamDesc> probe = {{"experiment", Unit::text, ""}};
  std::ifstream f(config_path);
  if (!f) throw ConfigError("cannot open config file " + config_path);
  std::string line, name;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string key = line.substr(0, eq);
    key.erase(0, key.find_first_not_of(" \t"));
    key.erase(key.find_last_not_of(" \t") + 1);
    if (key == "experiment") {
      name = line.substr(eq + 1);
      name.erase(0, name.find_first_not_of(" \t"));
      name.erase(name.find_last_not_of(" \t\r") + 1);
      return name;
    }
  }
  throw ConfigError(config_path + ": missing 'experiment' key");
}

int cmd_run(const std::string& config_path, const std::string& out_flag,
            int threads) {
  const std::string name = experiment_of(config_path);
  const Config cfg = Config::load(config_path, experiment_registry(name));
  const std::string out = default_outdir(name, out_flag);
  const std::string summary = run_experiment(name, cfg, out, threads);
  std::cout << summary;
  std::cout << "outputs written to " << out << "\n";
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& key,
              const std::string& values, const std::string& out_flag,
              int threads) {
  const std::string name = experiment_of(config_path);
  const Config base = Config::load(config_path, experiment_registry(name));
  if (values.empty()) throw ConfigError("sweep: empty value list");
  std::vector<std::string> items;
  std::string item;
  std::stringstream ss(values);
  while (std::getline(ss, item, ';'))
    if (!item.empty()) items.push_back(item);
  if (items.empty()) throw ConfigError("sweep: empty value list");

  const std::string out = default_outdir(name + "-sweep", out_flag);
  ensure_dir(out);
  std::string all;
  for (std::size_t i = 0; i < items.size(); ++i) {
    Config cfg = base;
    cfg.set(key, items[i]);
    const std::string sub = out + "/" + std::to_string(i);
    const std::string summary = run_experiment(name, cfg, sub, threads);
    all += "# " + key + " = " + items[i] + "\n" + summary;
  }
  write_text(out + "/sweep.txt", all);
  std::cout << all << "outputs written to " << out << "\n";
  return 0;
}

int cmd_compare(const std::string& a_path, const std::string& b_path) {
  const TraceData a = read_trace_csv(a_path);
  const TraceData b = read_trace_csv(b_path);
  if (a.t_s.size() != b.t_s.size())
    throw AnalysisError("compare: traces have different lengths");
  const auto fit = goodness_of_fit(a.value, b.value);
  std::cout << "cv = " << format_double(fit.cv) << "\n";
  std::cout << "rmse = " << format_double(fit.rmse) << "\n";
  return 0;
}

int cmd_checkpoint_info(const std::string& path) {
  const Checkpoint c = Checkpoint::load(path);
  std::cout << "checkpoint " << path << "\n";
  for (const auto& [name, arr] : c.f64)
    std::cout << "  f64 " << name << " [" << arr.size() << "]\n";
  for (const auto& [name, arr] : c.u64)
    std::cout << "  u64 " << name << " [" << arr.size() << "]\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-compartment network simulator with plastic synapses"};
  app.require_subcommand(1);
  int threads = 1;
  app.add_option("--threads", threads, "worker threads for the engine");

  std::string config_path, out_flag;
  auto* run = app.add_subcommand("run", "run a named experiment from a config");
  run->add_option("config", config_path, "config file")->required();
  run->add_option("--out", out_flag, "output directory");

  std::string sweep_key, sweep_values;
  auto* sweep = app.add_subcommand("sweep", "run an experiment per value");
  sweep->add_option("config", config_path, "config file")->required();
  sweep->add_option("--key", sweep_key, "config key to vary")->required();
  sweep->add_option("--values", sweep_values,
                    "semicolon-separated values")->required();
  sweep->add_option("--out", out_flag, "output directory");

  std::string cmp_a, cmp_b;
  auto* cmp = app.add_subcommand("compare", "CV/RMSE between two trace files");
  cmp->add_option("a", cmp_a)->required();
  cmp->add_option("b", cmp_b)->required();

  auto* bench = app.add_subcommand("bench", "busyring benchmark");
  bench->add_option("config", config_path, "config file (busyring)");
  bench->add_option("--out", out_flag, "output directory");

  std::string ckpt_path;
  auto* ck = app.add_subcommand("checkpoint-info", "inspect a checkpoint file");
  ck->add_option("file", ckpt_path)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(config_path, out_flag, threads);
    if (sweep->parsed())
      return cmd_sweep(config_path, sweep_key, sweep_values, out_flag, threads);
    if (cmp->parsed()) return cmd_compare(cmp_a, cmp_b);
    if (bench->parsed()) {
      if (config_path.empty()) {
        Config cfg = Config::from_defaults(experiment_registry("busyring"));
        cfg.set("experiment", "busyring");
        const std::string out = default_outdir("busyring", out_flag);
        std::cout << run_experiment("busyring", cfg, out, threads);
        return 0;
      }
      return cmd_run(config_path, out_flag, threads);
    }
    if (ck->parsed()) return cmd_checkpoint_info(ckpt_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
