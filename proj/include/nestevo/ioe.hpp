#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "nestevo/evaluator.hpp"
#include "nestevo/genome.hpp"
#include "nestevo/moea.hpp"

namespace nestevo {

enum class ObjectiveMode { Vector, Scalar };

/// Dynamic performance of a backbone with a set of exits at one DVFS point.
/// Ratios are relative to the backbone's full-model cost at default DVFS.
struct DynamicScore {
  double scalar_d = 0.0;  // mean exit score
  double mean_n = 0.0;
  double mean_energy_ratio = 0.0;
  double mean_latency_ratio = 0.0;
  double mean_dissim = 0.0;
  double effective_correctness = 0.0;  // mean_n * mean_dissim^gamma
  std::size_t n_exits = 0;

  bool operator==(const DynamicScore&) const = default;
};

struct IoeConfig {
  double gamma = 1.0;
  int generations = 35;
  int population = 100;
  int budget = 3500;
  ObjectiveMode objective_mode = ObjectiveMode::Vector;
  VariationParams variation;

  void validate() const;
  bool operator==(const IoeConfig&) const = default;
};

/// 1 - max N over the sampled exits before index i; the first exit gets 1.
double dissim(const ExitProfile& profile, std::span<const int> sampled_positions, std::size_t i);

/// n * energy_ratio * latency_ratio * dissim^gamma, literally.
double exit_score(double n, double energy_ratio, double latency_ratio, double dissim_value, double gamma);

/// Scores every sampled exit on the prefix workload through it (including the
/// overhead of all sampled exits up to it) at DVFS point f. Counts one dynamic
/// evaluation on `ev`.
DynamicScore dynamic_fitness(const LayerTable& layers, const ExitGenome& x, const DvfsGenome& f,
                             const ExitProfile& profile, const StaticScore& baseline, const Evaluator& ev,
                             double gamma);
DynamicScore dynamic_fitness(const BackboneGenome& b, const ExitGenome& x, const DvfsGenome& f,
                             const ExitProfile& profile, const StaticScore& baseline, const Evaluator& ev,
                             double gamma);

/// Vector: (effective correctness max, energy ratio min, latency ratio min).
/// Scalar: (scalar_d max).
ObjectiveVector ioe_objectives(const DynamicScore& score, ObjectiveMode mode);

/// Mean |N_i - N_j| over pairs of sampled exits; 0 for a single exit.
double exit_n_spread(const ExitProfile& profile, const ExitGenome& x);

struct InnerCandidate {
  ExitGenome exits;
  DvfsGenome dvfs;
  DynamicScore score;
  ObjectiveVector objectives;
};

struct IoeResult {
  std::vector<InnerCandidate> archive;
  std::uint64_t evaluations = 0;
};

using IoeObserver = std::function<void(int generation, std::span<const InnerCandidate> archive)>;

/// Merges `incoming` into a non-dominated archive. Identical genomes collapse;
/// distinct genomes with equal objectives are all kept. Result is sorted by
/// genome.
void update_archive(std::vector<InnerCandidate>& archive, std::span<const InnerCandidate> incoming);

/// NSGA-II over (exits, dvfs) for a frozen backbone. The initial population
/// enumerates the joint space when it fits; the returned archive accumulates
/// the non-dominated candidates of every generation.
IoeResult run_ioe(const BackboneGenome& b, const StaticScore& baseline, const Evaluator& ev, const IoeConfig& config,
                  Rng& rng, const IoeObserver& observer = {});

}  // namespace nestevo
