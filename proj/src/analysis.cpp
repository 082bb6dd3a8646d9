#include "mcsim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace mcsim {

double mean_rate(std::span<const double> spike_times_s,
                 std::span<const std::uint32_t> spike_gids,
                 std::span<const std::uint32_t> population,
                 const RateWindow& window) {
  if (!(window.width_s > 0)) throw AnalysisError("rate window width must be positive");
  if (population.empty()) throw AnalysisError("empty population");
  std::unordered_set<std::uint32_t> pop(population.begin(), population.end());
  const double t0 = window.center_s - 0.5 * window.width_s;
  const double t1 = window.center_s + 0.5 * window.width_s;
  std::size_t count = 0;
  for (std::size_t i = 0; i < spike_times_s.size(); ++i) {
    if (spike_times_s[i] >= t0 && spike_times_s[i] < t1 &&
        pop.count(spike_gids[i]))
      ++count;
  }
  return double(count) / (window.width_s * double(pop.size()));
}

RecallResult recall_q(std::span<const double> spike_times_s,
                      std::span<const std::uint32_t> spike_gids,
                      std::span<const std::uint32_t> as,
                      std::span<const std::uint32_t> ans,
                      std::span<const std::uint32_t> ctrl,
                      const RateWindow& window) {
  RecallResult r;
  r.nu_as = mean_rate(spike_times_s, spike_gids, as, window);
  r.nu_ans = mean_rate(spike_times_s, spike_gids, ans, window);
  r.nu_ctrl = mean_rate(spike_times_s, spike_gids, ctrl, window);
  if (r.nu_as == 0.0)
    throw AnalysisError("recall_q: undefined, stimulated population silent");
  r.q = (r.nu_ans - r.nu_ctrl) / r.nu_as;
  return r;
}

FitResult goodness_of_fit(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.empty())
    throw AnalysisError("goodness_of_fit: length mismatch");
  const double n = double(a.size());
  double mean_a = 0, mean_d = 0, sq = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    mean_a += a[i];
    mean_d += a[i] - b[i];
    sq += (a[i] - b[i]) * (a[i] - b[i]);
  }
  mean_a /= n;
  mean_d /= n;
  double var_a = 0, var_d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    var_a += (a[i] - mean_a) * (a[i] - mean_a);
    const double d = a[i] - b[i] - mean_d;
    var_d += d * d;
  }
  var_a /= n;
  var_d /= n;
  FitResult f;
  f.rmse = std::sqrt(sq / n);
  f.cv = var_a > 0 ? 1.0 - var_d / var_a : (var_d == 0 ? 1.0 : 0.0);
  return f;
}

MismatchResult spike_time_mismatch(std::span<const double> t_a,
                                   std::span<const double> t_b) {
  if (t_a.empty() || t_b.empty())
    throw AnalysisError("spike_time_mismatch: empty spike train");
  MismatchResult r;
  const std::size_t n = std::min(t_a.size(), t_b.size());
  r.truncated = t_a.size() != t_b.size();
  r.percent.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    r.percent.push_back((t_a[i] - t_b[i]) / t_b[i] * 100.0);
  return r;
}

MeanCi mean_ci(std::span<const double> samples) {
  MeanCi m;
  m.n = static_cast<int>(samples.size());
  if (m.n == 0) return m;
  for (double s : samples) m.mean += s;
  m.mean /= m.n;
  if (m.n < 2) return m;
  double var = 0;
  for (double s : samples) var += (s - m.mean) * (s - m.mean);
  var /= (m.n - 1);
  m.half_width = 1.959963984540054 * std::sqrt(var / m.n);
  return m;
}

}  // namespace mcsim
