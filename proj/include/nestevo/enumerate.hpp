#pragma once

#include <cstdint>
#include <vector>

#include "nestevo/ioe.hpp"
#include "nestevo/ooe.hpp"

namespace nestevo {

/// |B| * max|X| * |F|, saturating at UINT64_MAX.
std::uint64_t joint_cardinality(const SearchSpaceSpec& space, const DeviceSpec& device);

/// Every (x, f) for one backbone, reduced to its non-dominated set under the
/// configured inner objectives.
std::vector<InnerCandidate> exhaustive_inner_front(const BackboneGenome& b, const StaticScore& baseline,
                                                   const Evaluator& ev, const IoeConfig& config);

struct EnumerationResult {
  std::vector<FinalSolution> front;
  std::uint64_t evaluations = 0;  // dynamic evaluations performed
  std::uint64_t backbones = 0;
};

/// The exact bi-level front: for each backbone its exhaustive inner front,
/// then the backbones that are non-dominated under the combined objectives.
EnumerationResult enumerate_front(const Evaluator& ev, const IoeConfig& config);

}  // namespace nestevo
