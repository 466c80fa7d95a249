#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <memory>

#include "nestevo/error.hpp"
#include "nestevo/evaluator.hpp"
#include "toy.hpp"

using namespace nestevo;

namespace {

SearchSpaceSpec unit_block_space() {
  SearchSpaceSpec s;
  s.n_block = 1;
  s.resolution_domain = {32};
  s.depth_domain = {2};
  s.width_domain = {16};
  s.kernel_domain = {3};
  s.expand_domain = {1};
  s.exit_min_position = 1;
  s.devices = {toy::device({1.0})};
  return s;
}

double sigma(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

TEST_CASE("layer workload by hand") {
  const auto s = unit_block_space();
  BackboneGenome b;
  b.blocks = {{0, 0, 0, 0}};
  const LayerTable t(b, s);
  CHECK(t.total_layers() == 2);
  const auto w1 = t.prefix(1, {}, 0.0);
  CHECK(w1.flops == 144.0);
  CHECK(w1.bytes == 64.0);
  CHECK(t.full().flops == 288.0);
  CHECK(t.full().bytes == 128.0);
  CHECK_THROWS_AS(t.prefix(0, {}, 0.0), std::out_of_range);
  CHECK_THROWS_AS(t.prefix(3, {}, 0.0), std::out_of_range);
  // An exit after layer 1 adds 5% of that layer's flops from layer 1 onward.
  const std::vector<int> exits{1};
  CHECK(t.prefix(1, exits, 0.05).flops == doctest::Approx(144.0 * 1.05));
  CHECK(t.prefix(2, exits, 0.05).flops == doctest::Approx(288.0 + 7.2));
}

TEST_CASE("prefix workload is nondecreasing") {
  const SearchSpaceSpec s;
  Rng rng(12);
  for (int i = 0; i < 1000; ++i) {
    const auto b = sample_backbone(s, rng);
    const LayerTable t(b, s);
    double last_f = 0.0, last_b = 0.0;
    for (int l = 1; l <= t.total_layers(); ++l) {
      const auto w = t.prefix(l, {}, 0.0);
      CHECK(w.flops >= last_f);
      CHECK(w.bytes >= last_b);
      last_f = w.flops;
      last_b = w.bytes;
    }
  }
}

TEST_CASE("accuracy surrogate") {
  SearchSpaceSpec s;
  SurrogateParams exact;
  exact.noise_eps = 0.0;
  // The mid-index genome has C = C_ref.
  BackboneGenome mid;
  mid.resolution_idx = 1;
  mid.blocks.assign(7, BlockGene{3, 7, 0, 1});
  CHECK(LayerTable(mid, s).full().flops == doctest::Approx(reference_flops(s)));
  CHECK(accuracy_surrogate(mid, s, 0, exact) == doctest::Approx(0.9 * (1 - std::exp(-1.0))).epsilon(1e-12));
  CHECK(accuracy_surrogate(mid, s, 0, exact) == doctest::Approx(0.568909).epsilon(1e-6));

  BackboneGenome bigger = mid;
  bigger.blocks[0].width_idx = 8;
  CHECK(accuracy_surrogate(bigger, s, 0, exact) > accuracy_surrogate(mid, s, 0, exact));
  CHECK(accuracy_surrogate(bigger, s, 5) == accuracy_surrogate(bigger, s, 5));
  const double noisy = accuracy_surrogate(bigger, s, 5);
  CHECK(std::abs(noisy - accuracy_surrogate(bigger, s, 0, exact)) <= 0.01 + 1e-15);
}

TEST_CASE("exit profile") {
  const SearchSpaceSpec s;
  Rng rng(6);
  for (int i = 0; i < 1000; ++i) {
    const auto b = sample_backbone(s, rng);
    const auto p = exit_profile(b, s, 3);
    const LayerTable t(b, s);
    REQUIRE(p.positions == admissible_positions(b, s));
    for (std::size_t k = 0; k < p.positions.size(); ++k) {
      const double ratio = t.prefix_flops(p.positions[k]) / t.full().flops;
      CHECK(p.n_values[k] == doctest::Approx(p.final_accuracy * sigma(6 * (ratio - 0.35))).epsilon(1e-12));
      if (k) CHECK(p.n_values[k] >= p.n_values[k - 1]);
    }
  }
  // Half the final accuracy exactly at the midpoint; 0.9 * sigma(3.9) at the end.
  CHECK(0.9 * sigma(6 * (1.0 - 0.35)) == doctest::Approx(0.882144).epsilon(1e-6));
  CHECK(sigma(6 * (0.35 - 0.35)) == 0.5);
  CHECK_THROWS_AS(exit_profile(sample_backbone(s, rng), s, 0).n_at(1), std::out_of_range);
}

TEST_CASE("synthetic hardware model") {
  const auto dev = toy::device({0.5, 1.0, 2.0});
  HardwareModelParams h;
  h.kappa_compute = 1000;
  h.p0 = 100;
  h.p1 = 0;
  h.p2 = 0;
  const auto c = hw_latency_energy({1000, 0}, dev, {"toy", 1, {}}, h);
  CHECK(c.latency_ms == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(c.energy_mj == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(hw_latency_energy({1000, 0}, dev, {"toy", 2, {}}, h).latency_ms == doctest::Approx(0.5));

  HardwareModelParams cubic;
  cubic.p0 = 0;
  cubic.p2 = 0;
  const Workload w{5.0e6, 0.0};
  double last_e = 0.0, last_l = INFINITY;
  for (int i = 0; i < 3; ++i) {
    const auto r = hw_latency_energy(w, dev, {"toy", i, {}}, cubic);
    CHECK(r.energy_mj > last_e);
    CHECK(r.latency_ms < last_l);
    last_e = r.energy_mj;
    last_l = r.latency_ms;
  }
  CHECK_THROWS_AS(hw_latency_energy(w, dev, {"toy", 3, {}}, cubic), StructuralError);
}

TEST_CASE("table backend") {
  const std::string csv = std::string(TableBackend::kHeader) +
                          "\n"
                          "toy,3,1.0,,1.0,10.0\n"
                          "toy,5,1.0,,4.0,40.0\n"
                          "toy,3,0.5,,2.0,5.0\n";
  const auto table = TableBackend::from_csv(csv);
  CHECK(table.row_count() == 3);
  const auto hit = table.lookup("toy", 3.0, 1.0, std::nullopt);
  CHECK(hit.latency_ms == 1.0);
  CHECK(hit.energy_mj == 10.0);
  const auto mid = table.lookup("toy", 4.0, 1.0, std::nullopt);
  CHECK(mid.latency_ms == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(mid.energy_mj == doctest::Approx(20.0).epsilon(1e-12));
  CHECK(table.lookup("toy", 9.0, 1.0, std::nullopt).latency_ms == 4.0);
  CHECK(table.lookup("toy", 1.0, 1.0, std::nullopt).latency_ms == 1.0);
  CHECK_THROWS_AS(table.lookup("toy", 3.0, 0.7, std::nullopt), std::out_of_range);
  CHECK_THROWS_AS(table.lookup("other", 3.0, 1.0, std::nullopt), std::out_of_range);
  CHECK_THROWS(TableBackend::from_csv("bad,header\n"));
  const auto dev = toy::device({0.5, 1.0});
  CHECK(table.cost({1.0e4, 1.0}, dev, {"toy", 1, {}}).latency_ms == doctest::Approx(2.0));
}

TEST_CASE("static evaluation composes its parts") {
  const SearchSpaceSpec s;
  const auto& dev = s.device("agx_gpu");
  const auto backend = std::make_shared<SyntheticBackend>(HardwareModelParams{});
  Rng rng(21);
  const auto b = sample_backbone(s, rng);
  const auto score = eval_static(b, s, dev, *backend, {}, 4);
  CHECK(score.accuracy == accuracy_surrogate(b, s, 4));
  const auto c = hw_latency_energy(LayerTable(b, s).full(), dev, default_dvfs(dev), HardwareModelParams{});
  CHECK(score.latency_ms == c.latency_ms);
  CHECK(score.energy_mj == c.energy_mj);

  const Evaluator ev(s, "agx_gpu", backend, {}, 0.05, 4);
  CHECK(ev.evaluate_static(b) == score);
  CHECK(ev.static_evaluations() == 1);
  ev.reset_counters();
  CHECK(ev.static_evaluations() == 0);
}

TEST_CASE("larger genomes cost more") {
  const SearchSpaceSpec s;
  const auto& dev = s.device("tx2_gpu");
  const SyntheticBackend backend{HardwareModelParams{}};
  Rng rng(30);
  for (int i = 0; i < 500; ++i) {
    auto b = sample_backbone(s, rng);
    auto grown = b;
    auto& blk = grown.blocks[rng.uniform_index(grown.blocks.size())];
    if (blk.width_idx + 1 < static_cast<int>(s.width_domain.size())) {
      ++blk.width_idx;
    } else if (blk.expand_idx + 1 < static_cast<int>(s.expand_domain.size())) {
      ++blk.expand_idx;
    } else {
      continue;
    }
    const auto a = eval_static(b, s, dev, backend, {}, 0);
    const auto g = eval_static(grown, s, dev, backend, {}, 0);
    CHECK(g.latency_ms >= a.latency_ms);
    CHECK(g.energy_mj >= a.energy_mj);
  }
}

TEST_CASE("hybrid loss") {
  SUBCASE("confident correct exit") {
    LossSample s{{{1.0, 0.0}}, {1.0, 0.0}, 0};
    const auto r = hybrid_loss(s);
    CHECK(r.nll == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(r.kd == doctest::Approx(0.0).epsilon(1e-12));
  }
  SUBCASE("uniform two-class prediction") {
    LossSample s{{{0.5, 0.5}}, {0.5, 0.5}, 0};
    const auto r = hybrid_loss(s);
    CHECK(std::abs(r.nll - std::log(2.0)) < 1e-12);
    CHECK(r.kd == 0.0);
    CHECK(r.total == r.nll + r.kd);
  }
  SUBCASE("averages over exits and samples") {
    LossSample a{{{0.5, 0.5}, {0.25, 0.75}}, {0.5, 0.5}, 1};
    const auto r = hybrid_loss(a);
    CHECK(r.nll == doctest::Approx((std::log(2.0) - std::log(0.75)) / 2));
    const double kl = 0.5 * std::log(0.5 / 0.25) + 0.5 * std::log(0.5 / 0.75);
    CHECK(r.kd == doctest::Approx(kl / 2));
    const std::vector<LossSample> batch{a, LossSample{{{0.5, 0.5}}, {0.5, 0.5}, 0}};
    CHECK(hybrid_loss(batch).nll == doctest::Approx((r.nll + std::log(2.0)) / 2));
  }
  SUBCASE("temperature scales the distillation term") {
    LossSample a{{{0.25, 0.75}}, {0.5, 0.5}, 1};
    const auto t2 = hybrid_loss(a, 2.0);
    const auto q = soften(a.exit_probs[0], 2.0);
    const double kl = 0.5 * std::log(0.5 / q[0]) + 0.5 * std::log(0.5 / q[1]);
    CHECK(t2.kd == doctest::Approx(4.0 * kl));
  }
  SUBCASE("invalid input") {
    CHECK_THROWS_AS(hybrid_loss(std::vector<LossSample>{}), std::invalid_argument);
    CHECK_THROWS_AS(hybrid_loss(LossSample{{}, {1.0}, 0}), std::invalid_argument);
    CHECK_THROWS_AS(hybrid_loss(LossSample{{{0.6, 0.6}}, {0.5, 0.5}, 0}), std::invalid_argument);
    CHECK_THROWS_AS(hybrid_loss(LossSample{{{0.5, 0.5}}, {0.5, 0.5}, 2}), std::invalid_argument);
    const auto r = hybrid_loss(LossSample{{{0.0, 1.0}}, {0.0, 1.0}, 0});
    CHECK(r.nll == doctest::Approx(-std::log(1e-12)));
  }
}
