#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "nestevo/evaluator.hpp"
#include "nestevo/ioe.hpp"
#include "nestevo/moea.hpp"

namespace nestevo {

struct OoeConfig {
  int generations = 15;
  int population = 30;
  int budget = 450;
  double prune_fraction = 0.25;
  VariationParams variation;
  IoeConfig ioe;
  std::uint64_t seed = 0;
  unsigned threads = 1;  // 0 = hardware concurrency

  void validate() const;
  /// ceil(prune_fraction * population_size), at least 1.
  std::size_t forwarded_count(std::size_t population_size) const;
};

/// (accuracy max, latency min, energy min).
ObjectiveVector static_objectives(const StaticScore& s);

/// Adds the IOE front summary as a fourth, maximized objective.
ObjectiveVector combined_objectives(const StaticScore& s, double ioe_hypervolume);

/// Hypervolume of (effective correctness max, energy ratio min) against the
/// reference (0, 1). Members costlier than the reference contribute nothing.
double ioe_front_hypervolume(std::span<const InnerCandidate> front);

struct PruneResult {
  std::vector<StaticScore> scores;     // one per population member
  std::vector<std::size_t> selected;  // indices into the population
};

/// Scores every member (one static evaluation each) and keeps the best
/// ceil(prune_fraction * n) by rank, then crowding.
PruneResult static_rank_and_prune(std::span<const BackboneGenome> pop, const Evaluator& ev, double prune_fraction);

/// A backbone that went through the IOE, with its accumulated inner front.
struct BackboneRecord {
  BackboneGenome backbone;
  StaticScore static_score;
  std::vector<InnerCandidate> ioe_front;
  double ioe_hypervolume = 0.0;

  ObjectiveVector combined() const { return combined_objectives(static_score, ioe_hypervolume); }
};

/// Ranks backbones by their combined 4-objective vectors; member ids are
/// indices into `records`. Throws std::invalid_argument on an empty inner
/// front.
RankedPopulation combined_rank(std::span<const BackboneRecord> records);

struct FinalSolution {
  BackboneGenome backbone;
  ExitGenome exits;
  DvfsGenome dvfs;
  StaticScore static_score;
  DynamicScore dynamic_score;
  double ioe_hypervolume = 0.0;

  ObjectiveVector objectives() const { return combined_objectives(static_score, ioe_hypervolume); }
  bool operator==(const FinalSolution&) const = default;
};

/// Every inner-front member of every rank-0 backbone, sorted by genome.
std::vector<FinalSolution> final_solutions(std::span<const BackboneRecord> records);

struct GenerationSnapshot {
  int generation = 0;
  std::vector<FinalSolution> archive;
  std::uint64_t static_evaluations = 0;
  std::uint64_t dynamic_evaluations = 0;
  std::uint64_t ioe_runs = 0;

  bool operator==(const GenerationSnapshot&) const = default;
};

struct OoeResult {
  std::vector<FinalSolution> archive;
  std::vector<GenerationSnapshot> snapshots;
  std::uint64_t static_evaluations = 0;
  std::uint64_t dynamic_evaluations = 0;
  std::uint64_t ioe_runs = 0;
};

using GenerationObserver = std::function<void(const GenerationSnapshot&)>;

/// Nested search. Each generation: static scoring and pruning, one IOE per
/// forwarded backbone, combined ranking of every backbone seen so far,
/// survivor selection, and variation. The archive holds the rank-0 backbones'
/// inner fronts.
OoeResult run_ooe(const Evaluator& ev, const OoeConfig& config, const GenerationObserver& on_generation = {});

}  // namespace nestevo
