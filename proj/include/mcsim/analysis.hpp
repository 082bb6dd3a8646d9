#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace mcsim {

struct AnalysisError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RateWindow {
  double center_s = 0.0;
  double width_s = 0.5;
};

struct RecallResult {
  double nu_as = 0, nu_ans = 0, nu_ctrl = 0;
  double q = 0;
};

// Mean firing rate (Hz) of the masked population inside the window.
double mean_rate(std::span<const double> spike_times_s,
                 std::span<const std::uint32_t> spike_gids,
                 std::span<const std::uint32_t> population,
                 const RateWindow& window);

// Q = (nu_ans - nu_ctrl) / nu_as. Throws when nu_as == 0.
RecallResult recall_q(std::span<const double> spike_times_s,
                      std::span<const std::uint32_t> spike_gids,
                      std::span<const std::uint32_t> as,
                      std::span<const std::uint32_t> ans,
                      std::span<const std::uint32_t> ctrl,
                      const RateWindow& window);

struct FitResult {
  double cv = 0;    // explained-variance score, 1 - Var(a-b)/Var(a)
  double rmse = 0;
};

FitResult goodness_of_fit(std::span<const double> a, std::span<const double> b);

// Percent mismatch (a-b)/b * 100 elementwise; truncates to the shorter train
// and reports whether truncation happened.
struct MismatchResult {
  std::vector<double> percent;
  bool truncated = false;
};

MismatchResult spike_time_mismatch(std::span<const double> t_a,
                                   std::span<const double> t_b);

// mean and half-width of the normal-approximation 95% confidence interval
struct MeanCi {
  double mean = 0;
  double half_width = 0;
  int n = 0;
};

MeanCi mean_ci(std::span<const double> samples);

}  // namespace mcsim
