#include "mcsim/sde.hpp"

#include <cmath>
#include <stdexcept>

namespace mcsim {

std::vector<double> euler_maruyama_step(const SdeSystem& sys,
                                        const std::vector<double>& x, double t,
                                        double dt, const RngKey& key,
                                        std::uint64_t step) {
  if (!(dt > 0)) throw std::invalid_argument("euler_maruyama_step: dt <= 0");
  std::vector<double> next = x;
  std::vector<double> buf(x.size());

  sys.drift(t, x, buf);
  for (std::size_t j = 0; j < x.size(); ++j) next[j] += buf[j] * dt;

  const double sqrt_dt = std::sqrt(dt);
  for (std::size_t i = 0; i < sys.diffusion.size(); ++i) {
    const double dw =
        sqrt_dt * normal_for(with_stream(key, static_cast<std::uint64_t>(i)), step);
    sys.diffusion[i](t, x, buf);
    for (std::size_t j = 0; j < x.size(); ++j) next[j] += buf[j] * dw;
  }
  return next;
}

}  // namespace mcsim
