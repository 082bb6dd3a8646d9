#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "mcsim/network.hpp"

using namespace mcsim;

TEST_CASE("connectivity sampler hits the requested density") {
  const std::uint32_t n = 500;
  const double p = 0.1;
  std::size_t count = 0;
  for (std::uint32_t i = 0; i < n; ++i)
    for (std::uint32_t j = 0; j < n; ++j)
      if (er_connected(3, i, j, n, p)) ++count;
  const double expect = p * n * (n - 1);
  const double sd = std::sqrt(expect * (1 - p));
  CHECK(std::fabs(double(count) - expect) < 3 * sd);
  // no self connections, and regeneration is identical
  for (std::uint32_t i = 0; i < n; ++i) CHECK(!er_connected(3, i, i, n, p));
  std::size_t again = 0;
  for (std::uint32_t i = 0; i < n; ++i)
    for (std::uint32_t j = 0; j < n; ++j)
      if (er_connected(3, i, j, n, p)) ++again;
  CHECK(again == count);
}

TEST_CASE("population bookkeeping partitions the excitatory cells") {
  ConsolidationConfig cfg;
  cfg.n_cells = 100;
  cfg.n_exc = 80;
  cfg.pattern = 20;
  const auto b = build_consolidation_network(cfg, false);
  CHECK(b.as.size() == 10);
  CHECK(b.ans.size() == 10);
  CHECK(b.ctrl.size() == 60);
  std::set<std::uint32_t> all;
  for (auto g : b.as) all.insert(g);
  for (auto g : b.ans) all.insert(g);
  for (auto g : b.ctrl) all.insert(g);
  CHECK(all.size() == 80);  // disjoint and exhaustive
  CHECK(*std::max_element(all.begin(), all.end()) == 79);
}

TEST_CASE("recurrent synapse count matches the binomial expectation") {
  ConsolidationConfig cfg;
  cfg.n_cells = 250;
  cfg.n_exc = 200;
  cfg.pattern = 20;
  const auto b = build_consolidation_network(cfg, false);
  std::size_t rec = 0;
  for (const auto& c : b.recipe.connections)
    if (!c.from_source && c.label == "rec") ++rec;
  const double expect = cfg.p_conn * cfg.n_exc * (cfg.n_exc - 1);
  const double sd = std::sqrt(expect * (1 - cfg.p_conn));
  CHECK(std::fabs(double(rec) - expect) < 3 * sd);
}

TEST_CASE("pattern size is validated") {
  ConsolidationConfig cfg;
  cfg.n_cells = 50;
  cfg.n_exc = 40;
  cfg.pattern = 41;
  CHECK_THROWS_AS(build_consolidation_network(cfg, false), EngineError);
}

TEST_CASE("identical seed and protocol give identical rasters") {
  ConsolidationConfig cfg;
  cfg.n_cells = 60;
  cfg.n_exc = 48;
  cfg.pattern = 12;
  cfg.t_learn_ms = 400.0;
  cfg.seed = 5;
  auto run = [&] {
    const auto b = build_consolidation_network(cfg, false);
    Engine eng(b.recipe, EngineOptions{cfg.dt_ms, cfg.seed, 1});
    eng.advance_to(1400.0);
    std::vector<std::pair<double, std::uint32_t>> out;
    for (const auto& s : eng.spikes()) out.emplace_back(s.t_ms, s.gid);
    std::sort(out.begin(), out.end());
    return out;
  };
  CHECK(run() == run());
}

TEST_CASE("stimulation drives spiking in a small network") {
  ConsolidationConfig cfg;
  cfg.n_cells = 60;
  cfg.n_exc = 48;
  cfg.pattern = 12;
  cfg.t_learn_ms = 200.0;
  const auto b = build_consolidation_network(cfg, false);
  Engine eng(b.recipe, EngineOptions{cfg.dt_ms, cfg.seed, 1});
  eng.advance_to(1200.0);
  std::size_t pattern_spikes = 0;
  for (const auto& s : eng.spikes())
    if (s.gid < 12 && s.t_ms >= 200.0 && s.t_ms < 1200.0) ++pattern_spikes;
  CHECK(pattern_spikes > 100);  // learning input at 150 Hz over 12 cells
}

TEST_CASE("protocol spike schedules") {
  CHECK(stc_protocol_times(StcProtocol::stet, 0).size() == 300);
  CHECK(stc_protocol_times(StcProtocol::wtet, 0).size() == 21);
  CHECK(stc_protocol_times(StcProtocol::slfs, 0).size() == 2700);
  CHECK(stc_protocol_times(StcProtocol::wlfs, 0).size() == 900);
  CHECK(stc_protocol_times(StcProtocol::none, 0).empty());
  const auto t = stc_protocol_times(StcProtocol::stet, 1000.0);
  CHECK(t.front() == 1000.0);
  CHECK(t.back() == doctest::Approx(1000.0 + 2 * 600e3 + 99 * 10.0));
  CHECK(std::is_sorted(t.begin(), t.end()));
  CHECK(stc_protocol_from_name("SLFS") == StcProtocol::slfs);
  CHECK(!stc_protocol_from_name("bogus"));
}

TEST_CASE("poisson-driven plastic neuron emits and receives spikes") {
  StdpPoissonConfig cfg;
  cfg.duration_ms = 2000.0;
  const auto res = run_stdp_poisson(cfg);
  CHECK(res.pre_count > 100);
  CHECK(res.post_count > 10);
  CHECK(!res.weight.value.empty());

  // removing inhibition cannot lower the output rate
  StdpPoissonConfig open = cfg;
  open.w_inh_uS = 0.0;
  const auto res_open = run_stdp_poisson(open);
  CHECK(res_open.post_count >= res.post_count);
}

TEST_CASE("without plasticity the output follows the input staircase") {
  HomeostasisConfig cfg;
  cfg.plastic = false;
  cfg.staircase_hz = {10, 80, 40};
  cfg.segment_ms = 4000.0;
  cfg.homeo.w_init_nA = 2.0;  // fixed mid-range weight
  const auto res = run_homeostasis(cfg);
  REQUIRE(res.segment_rate_hz.size() == 3);
  CHECK(res.segment_rate_hz[1] > res.segment_rate_hz[2]);
  CHECK(res.segment_rate_hz[2] > res.segment_rate_hz[0]);
}

TEST_CASE("calcium diffusion in the spine branch conserves mass") {
  HeteroConfig cfg;
  cfg.disable_injection = true;
  cfg.disable_decay = true;
  cfg.t_end_ms = 100.0;
  const auto res = run_four_spine(cfg);
  CHECK(res.mass_final ==
        doctest::Approx(res.mass_initial).epsilon(1e-12));
}

TEST_CASE("inactive spines receive no injection") {
  HeteroConfig cfg;
  cfg.active_spines = {};
  cfg.t_end_ms = 200.0;
  const auto res = run_four_spine(cfg);
  for (int i = 0; i < 4; ++i) {
    CHECK(res.w_final[i] == doctest::Approx(cfg.params.w_init));
    for (double c : res.calcium[i].value) CHECK(c == 0.0);
  }
}
