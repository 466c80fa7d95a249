#include "nestevo/ooe.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <stdexcept>
#include <thread>

#include "nestevo/metrics.hpp"

namespace nestevo {

void OoeConfig::validate() const {
  if (generations < 1 || population < 1) throw std::invalid_argument("ooe generations and population must be >= 1");
  if (static_cast<long long>(generations) * population > budget)
    throw std::invalid_argument("ooe generations * population exceeds the budget");
  if (!(prune_fraction > 0.0 && prune_fraction <= 1.0)) throw std::invalid_argument("prune_fraction must be in (0,1]");
  variation.validate();
  ioe.validate();
}

std::size_t OoeConfig::forwarded_count(std::size_t population_size) const {
  const auto k = static_cast<std::size_t>(std::ceil(prune_fraction * static_cast<double>(population_size) - 1e-9));
  return std::clamp<std::size_t>(k, 1, population_size);
}

ObjectiveVector static_objectives(const StaticScore& s) {
  return ObjectiveVector({s.accuracy, s.latency_ms, s.energy_mj},
                         {Direction::Maximize, Direction::Minimize, Direction::Minimize});
}

ObjectiveVector combined_objectives(const StaticScore& s, double ioe_hypervolume) {
  return ObjectiveVector({s.accuracy, s.latency_ms, s.energy_mj, ioe_hypervolume},
                         {Direction::Maximize, Direction::Minimize, Direction::Minimize, Direction::Maximize});
}

double ioe_front_hypervolume(std::span<const InnerCandidate> front) {
  const std::vector<Direction> dirs{Direction::Maximize, Direction::Minimize};
  const ObjectiveVector reference({0.0, 1.0}, dirs);
  std::vector<ObjectiveVector> points;
  for (const auto& c : front) {
    ObjectiveVector p({c.score.effective_correctness, c.score.mean_energy_ratio}, dirs);
    if (weakly_dominates(p, reference)) points.push_back(std::move(p));
  }
  return hypervolume(Front(std::move(points), reference));
}

PruneResult static_rank_and_prune(std::span<const BackboneGenome> pop, const Evaluator& ev, double prune_fraction) {
  if (pop.empty()) throw std::invalid_argument("cannot prune an empty population");
  if (!(prune_fraction > 0.0 && prune_fraction <= 1.0)) throw std::invalid_argument("prune_fraction must be in (0,1]");
  PruneResult out;
  std::vector<RankedPopulation::Member> members;
  for (std::size_t i = 0; i < pop.size(); ++i) {
    out.scores.push_back(ev.evaluate_static(pop[i]));
    members.push_back({i, static_objectives(out.scores.back())});
  }
  OoeConfig sizing;
  sizing.prune_fraction = prune_fraction;
  out.selected = survivor_select(rank_population(std::move(members)), sizing.forwarded_count(pop.size()));
  return out;
}

RankedPopulation combined_rank(std::span<const BackboneRecord> records) {
  std::vector<RankedPopulation::Member> members;
  members.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].ioe_front.empty()) throw std::invalid_argument("backbone has an empty inner front");
    members.push_back({i, records[i].combined()});
  }
  return rank_population(std::move(members));
}

std::vector<FinalSolution> final_solutions(std::span<const BackboneRecord> records) {
  std::vector<FinalSolution> out;
  if (records.empty()) return out;
  const auto ranked = combined_rank(records);
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    if (ranked.rank[i] != 0) continue;
    const auto& rec = records[ranked.members[i].id];
    for (const auto& c : rec.ioe_front)
      out.push_back({rec.backbone, c.exits, c.dvfs, rec.static_score, c.score, rec.ioe_hypervolume});
  }
  std::sort(out.begin(), out.end(), [](const FinalSolution& a, const FinalSolution& b) {
    if (a.backbone != b.backbone) return a.backbone < b.backbone;
    if (a.exits != b.exits) return a.exits < b.exits;
    return a.dvfs < b.dvfs;
  });
  return out;
}

namespace {

template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  if (threads == 0) threads = std::max(1U, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> workers;
    for (unsigned t = 0; t < threads; ++t) {
      workers.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

std::vector<BackboneGenome> initial_backbones(const Evaluator& ev, const OoeConfig& config, Rng& rng) {
  const auto& space = ev.space();
  const auto target = static_cast<std::size_t>(config.population);
  std::vector<BackboneGenome> pop;
  if (backbone_cardinality(space) <= target) pop = enumerate_backbones(space);
  while (pop.size() < target) pop.push_back(sample_backbone(space, rng));
  return pop;
}

std::vector<BackboneGenome> vary(const RankedPopulation& parents, std::span<const BackboneRecord> records,
                                 const Evaluator& ev, const OoeConfig& config, Rng& rng) {
  const auto target = static_cast<std::size_t>(config.population);
  std::vector<BackboneGenome> out;
  out.reserve(target);
  while (out.size() < target) {
    const auto& a = records[tournament_select(parents, config.variation, rng)].backbone;
    const auto& b = records[tournament_select(parents, config.variation, rng)].backbone;
    auto [ca, cb] = crossover(a, b, ev.space(), config.variation, rng);
    out.push_back(mutate_backbone(ca, ev.space(), config.variation, rng));
    if (out.size() < target) out.push_back(mutate_backbone(cb, ev.space(), config.variation, rng));
  }
  return out;
}

}  // namespace

OoeResult run_ooe(const Evaluator& ev, const OoeConfig& config, const GenerationObserver& on_generation) {
  config.validate();
  Rng rng(config.seed);
  OoeResult result;
  const std::uint64_t static_before = ev.static_evaluations();
  const std::uint64_t dynamic_before = ev.dynamic_evaluations();

  std::map<BackboneGenome, BackboneRecord> visited;
  auto population = initial_backbones(ev, config, rng);

  for (int g = 0; g < config.generations; ++g) {
    const auto pruned = static_rank_and_prune(population, ev, config.prune_fraction);

    // Each forwarded slot owns a stream derived from (seed, generation, slot),
    // so results do not depend on thread scheduling.
    std::vector<IoeResult> inner(pruned.selected.size());
    parallel_for(pruned.selected.size(), config.threads, [&](std::size_t k) {
      Rng local(hash_combine(hash_combine(config.seed, static_cast<std::uint64_t>(g) + 1), k));
      const std::size_t i = pruned.selected[k];
      inner[k] = run_ioe(population[i], pruned.scores[i], ev, config.ioe, local);
    });
    result.ioe_runs += inner.size();

    for (std::size_t k = 0; k < pruned.selected.size(); ++k) {
      const std::size_t i = pruned.selected[k];
      auto [it, fresh] = visited.try_emplace(population[i]);
      BackboneRecord& rec = it->second;
      if (fresh) {
        rec.backbone = population[i];
        rec.static_score = pruned.scores[i];
      }
      update_archive(rec.ioe_front, inner[k].archive);
      rec.ioe_hypervolume = ioe_front_hypervolume(rec.ioe_front);
    }

    std::vector<BackboneRecord> records;
    records.reserve(visited.size());
    for (const auto& [key, rec] : visited) records.push_back(rec);

    GenerationSnapshot snap;
    snap.generation = g;
    snap.archive = final_solutions(records);
    snap.static_evaluations = ev.static_evaluations() - static_before;
    snap.dynamic_evaluations = ev.dynamic_evaluations() - dynamic_before;
    snap.ioe_runs = result.ioe_runs;
    if (on_generation) on_generation(snap);
    result.snapshots.push_back(std::move(snap));

    if (g + 1 == config.generations) break;

    // Second selection over every backbone seen so far, then variation.
    const auto ranked = combined_rank(records);
    const auto chosen = survivor_select(ranked, std::min(records.size(), static_cast<std::size_t>(config.population)));
    RankedPopulation parents;
    for (std::size_t id : chosen) {
      parents.members.push_back(ranked.members[id]);
      parents.rank.push_back(ranked.rank[id]);
      parents.crowding.push_back(ranked.crowding[id]);
    }
    population = vary(parents, records, ev, config, rng);
  }

  result.archive = result.snapshots.back().archive;
  result.static_evaluations = ev.static_evaluations() - static_before;
  result.dynamic_evaluations = ev.dynamic_evaluations() - dynamic_before;
  return result;
}

}  // namespace nestevo
