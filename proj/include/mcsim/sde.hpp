#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "mcsim/rng.hpp"

namespace mcsim {

// dX = f(t,X) dt + sum_i g_i(t,X) dW_i with independent Wiener processes
// (identity noise correlation). Drift and diffusion write into an output
// vector of the state dimension.
struct SdeSystem {
  using Field =
      std::function<void(double t, const std::vector<double>& x,
                         std::vector<double>& out)>;
  Field drift;
  std::vector<Field> diffusion;
};

// One Euler-Maruyama step from t to t+dt. Noise increment i of this step is
// normal_for(with_stream(key,i), step): pure in (key, step), so paths are
// reproducible and mergeable across workers. Passing diffusion.empty()
// reduces exactly to forward Euler.
std::vector<double> euler_maruyama_step(const SdeSystem& sys,
                                        const std::vector<double>& x, double t,
                                        double dt, const RngKey& key,
                                        std::uint64_t step);

}  // namespace mcsim
