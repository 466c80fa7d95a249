#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "nestevo/genome.hpp"
#include "nestevo/rng.hpp"

namespace nestevo {

enum class Direction { Maximize, Minimize };

/// Fixed-length objective values with a per-coordinate direction. All Pareto
/// reasoning goes through this type.
class ObjectiveVector {
 public:
  ObjectiveVector() = default;
  /// Throws StructuralError on length mismatch, std::invalid_argument on
  /// non-finite values.
  ObjectiveVector(std::vector<double> values, std::vector<Direction> directions);

  std::size_t size() const { return values_.size(); }
  double value(std::size_t i) const { return values_[i]; }
  Direction direction(std::size_t i) const { return directions_[i]; }
  /// Value mapped so that larger is better.
  double normalized(std::size_t i) const {
    return directions_[i] == Direction::Maximize ? values_[i] : -values_[i];
  }
  const std::vector<double>& values() const { return values_; }
  const std::vector<Direction>& directions() const { return directions_; }

  bool operator==(const ObjectiveVector&) const = default;

 private:
  std::vector<double> values_;
  std::vector<Direction> directions_;
};

bool same_shape(const ObjectiveVector& a, const ObjectiveVector& b);

/// a is no worse than b everywhere and strictly better somewhere.
/// Throws StructuralError when shapes differ.
bool dominates(const ObjectiveVector& a, const ObjectiveVector& b);
/// a is no worse than b everywhere.
bool weakly_dominates(const ObjectiveVector& a, const ObjectiveVector& b);

/// Deb's fast non-dominated sort. Fronts list indices in ascending order.
std::vector<std::vector<std::size_t>> fast_nondominated_sort(std::span<const ObjectiveVector> pop);

constexpr double kInfiniteCrowding = std::numeric_limits<double>::infinity();

/// NSGA-II crowding distance within one front. Fronts of one or two members
/// are all boundary; an objective with zero range contributes nothing.
std::vector<double> crowding_distance(std::span<const ObjectiveVector> front);

struct RankedPopulation {
  struct Member {
    std::size_t id = 0;
    ObjectiveVector objectives;
  };
  std::vector<Member> members;
  std::vector<std::size_t> rank;
  std::vector<double> crowding;

  std::size_t size() const { return members.size(); }
  /// Strict "better" by (rank asc, crowding desc, id asc).
  bool precedes(std::size_t i, std::size_t j) const;
};

/// Sorts, assigns ranks and per-front crowding distances.
RankedPopulation rank_population(std::vector<RankedPopulation::Member> members);

/// First k member ids by (rank, crowding desc, id). Throws
/// std::invalid_argument if k exceeds the population.
std::vector<std::size_t> survivor_select(const RankedPopulation& ranked, std::size_t k);

/// Binary (or larger) tournament with replacement; returns the winner's id.
std::size_t tournament_select(const RankedPopulation& ranked, const VariationParams& params, Rng& rng);

}  // namespace nestevo
