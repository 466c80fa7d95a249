#include <doctest.h>

#include <algorithm>
#include <memory>
#include <set>

#include "nestevo/archive_io.hpp"
#include "nestevo/enumerate.hpp"
#include "nestevo/ooe.hpp"
#include "toy.hpp"

using namespace nestevo;

namespace {

Evaluator make_ev(SearchSpaceSpec space) {
  const std::string device = space.devices.front().name;
  return Evaluator(std::move(space), device, std::make_shared<SyntheticBackend>(HardwareModelParams{}), {}, 0.05, 2);
}

OoeConfig exhaustive_toy_config(std::uint64_t seed, int generations) {
  OoeConfig c;
  c.generations = generations;
  c.population = 8;
  c.budget = 8 * generations;
  c.prune_fraction = 1.0;
  c.seed = seed;
  c.ioe.generations = 1;
  c.ioe.population = 6;
  c.ioe.budget = 6;
  return c;
}

std::set<std::string> keys(const std::vector<FinalSolution>& sols, const SearchSpaceSpec& s) {
  std::set<std::string> out;
  for (const auto& x : sols) out.insert(front_row(x, s).genome_key());
  return out;
}

}  // namespace

TEST_CASE("forwarded count") {
  OoeConfig c;
  CHECK(c.forwarded_count(30) == 8);
  c.prune_fraction = 1.0;
  CHECK(c.forwarded_count(30) == 30);
  c.prune_fraction = 0.01;
  CHECK(c.forwarded_count(30) == 1);
  c.prune_fraction = 0.2;
  CHECK(c.forwarded_count(30) == 6);
}

TEST_CASE("static pruning") {
  const SearchSpaceSpec s;
  const auto ev = make_ev(s);
  Rng rng(1);
  std::vector<BackboneGenome> pop;
  for (int i = 0; i < 30; ++i) pop.push_back(sample_backbone(s, rng));

  const auto all = static_rank_and_prune(pop, ev, 1.0);
  auto sel = all.selected;
  std::sort(sel.begin(), sel.end());
  CHECK(sel.size() == 30);
  CHECK(std::adjacent_find(sel.begin(), sel.end()) == sel.end());

  const auto some = static_rank_and_prune(pop, ev, 0.25);
  CHECK(some.selected.size() == 8);
  // Anything dominated by at least 8 others cannot make the cut.
  for (std::size_t i = 0; i < pop.size(); ++i) {
    int dominators = 0;
    for (std::size_t j = 0; j < pop.size(); ++j)
      dominators += dominates(static_objectives(some.scores[j]), static_objectives(some.scores[i]));
    if (dominators >= 8) CHECK(std::find(some.selected.begin(), some.selected.end(), i) == some.selected.end());
  }
  CHECK(static_rank_and_prune(pop, ev, 0.25).selected == some.selected);
}

TEST_CASE("combined ranking uses the inner front hypervolume") {
  const StaticScore same{0.7, 10.0, 5.0};
  auto record = [&](double eff, double ratio) {
    BackboneRecord r;
    r.static_score = same;
    InnerCandidate c;
    c.score.effective_correctness = eff;
    c.score.mean_energy_ratio = ratio;
    c.score.mean_latency_ratio = ratio;
    c.objectives = ioe_objectives(c.score, ObjectiveMode::Vector);
    r.ioe_front = {c};
    r.ioe_hypervolume = ioe_front_hypervolume(r.ioe_front);
    return r;
  };
  const std::vector<BackboneRecord> recs{record(0.5, 0.5), record(0.6, 0.4)};
  CHECK(recs[1].ioe_hypervolume > recs[0].ioe_hypervolume);
  CHECK(dominates(recs[1].combined(), recs[0].combined()));
  const auto ranked = combined_rank(recs);
  CHECK(ranked.rank == std::vector<std::size_t>{1, 0});
  CHECK(combined_rank(std::vector<BackboneRecord>{recs[0]}).rank == std::vector<std::size_t>{0});

  auto swapped = recs[1];
  swapped.ioe_front.push_back(recs[0].ioe_front[0]);
  std::reverse(swapped.ioe_front.begin(), swapped.ioe_front.end());
  auto ordered = recs[1];
  ordered.ioe_front.push_back(recs[0].ioe_front[0]);
  CHECK(ioe_front_hypervolume(swapped.ioe_front) == ioe_front_hypervolume(ordered.ioe_front));

  BackboneRecord empty;
  CHECK_THROWS_AS(combined_rank(std::vector<BackboneRecord>{empty}), std::invalid_argument);
}

TEST_CASE("nested search on the toy space finds the exhaustive front") {
  const auto s = toy::ooe_space();
  const auto ev = make_ev(s);
  const auto truth = enumerate_front(ev, exhaustive_toy_config(0, 1).ioe);
  CHECK(truth.backbones == 8);
  CHECK(truth.evaluations == 4 * 2 + 4 * 6);
  const auto truth_keys = keys(truth.front, s);

  for (std::uint64_t seed : {0u, 1u, 2u}) {
    const auto one = run_ooe(ev, exhaustive_toy_config(seed, 1));
    CHECK(keys(one.archive, s) == truth_keys);
    const auto two = run_ooe(ev, exhaustive_toy_config(seed, 2));
    const auto got = keys(two.archive, s);
    CHECK(std::includes(truth_keys.begin(), truth_keys.end(), got.begin(), got.end()));
  }
}

TEST_CASE("nested search is deterministic and independent of thread count") {
  const SearchSpaceSpec s;
  const auto ev = make_ev(s);
  OoeConfig c;
  c.generations = 3;
  c.population = 10;
  c.budget = 30;
  c.seed = 5;
  c.ioe.generations = 4;
  c.ioe.population = 10;
  c.ioe.budget = 40;
  c.threads = 1;
  int observed = 0;
  const auto a = run_ooe(ev, c, [&](const GenerationSnapshot& snap) { CHECK(snap.generation == observed++); });
  c.threads = 3;
  const auto b = run_ooe(ev, c);
  CHECK(observed == 3);
  CHECK(a.archive == b.archive);
  CHECK(a.snapshots == b.snapshots);
  CHECK(a.static_evaluations == 30);
  CHECK(a.ioe_runs == 3 * 3);
  CHECK(a.dynamic_evaluations == 3 * 3 * 40);
  for (const auto& x : a.archive)
    for (const auto& y : a.archive) CHECK_FALSE(dominates(x.objectives(), y.objectives()));
}
