#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "nestevo/moea.hpp"

namespace nestevo {

/// Non-dominated point set with an explicit reference point. Construction
/// drops dominated points and duplicates, and rejects any point that does
/// not weakly dominate the reference.
class Front {
 public:
  Front(std::vector<ObjectiveVector> points, ObjectiveVector reference);

  const std::vector<ObjectiveVector>& points() const { return points_; }
  const ObjectiveVector& reference() const { return reference_; }
  std::size_t dimension() const { return reference_.size(); }
  bool empty() const { return points_.empty(); }

 private:
  std::vector<ObjectiveVector> points_;
  ObjectiveVector reference_;
};

/// Non-dominated subset, first occurrence order, duplicates collapsed.
std::vector<ObjectiveVector> nondominated_subset(std::span<const ObjectiveVector> points);

/// Union of two point sets reduced to its non-dominated subset.
std::vector<ObjectiveVector> merge_nondominated(std::span<const ObjectiveVector> a,
                                                std::span<const ObjectiveVector> b);

/// Exact hypervolume for 1 to 3 objectives. Throws std::invalid_argument for
/// higher dimensions; use hypervolume_monte_carlo there.
double hypervolume(const Front& front);

struct HypervolumeEstimate {
  double estimate = 0.0;
  double standard_error = 0.0;
};

/// Uniform sampling of the box spanned by the reference and the per-axis best
/// point. Works in any dimension.
HypervolumeEstimate hypervolume_monte_carlo(const Front& front, std::size_t samples, std::uint64_t seed);

/// Fraction of points in a that dominate at least one point of b. Empty a
/// yields 0.
double ratio_of_dominance(std::span<const ObjectiveVector> a, std::span<const ObjectiveVector> b);
double ratio_of_dominance(const Front& a, const Front& b);

}  // namespace nestevo
