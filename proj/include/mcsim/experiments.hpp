#pragma once

#include <string>
#include <vector>

#include "mcsim/config.hpp"

namespace mcsim {

// Named experiments runnable from the CLI. Each takes a validated Config,
// writes its outputs (spikes.csv, trace CSVs, summary.txt, manifest.txt)
// into `outdir` and returns the one-page summary text.

std::vector<std::string> experiment_names();
std::vector<ParamDesc> experiment_registry(const std::string& name);

std::string run_experiment(const std::string& name, const Config& cfg,
                           const std::string& outdir, int workers);

// helpers shared with the CLI
void ensure_dir(const std::string& path);
void write_text(const std::string& path, const std::string& text);

}  // namespace mcsim
