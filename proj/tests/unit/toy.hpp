#pragma once

#include <string>
#include <vector>

#include "nestevo/genome.hpp"

namespace toy {

inline nestevo::DeviceSpec device(std::vector<double> compute, std::vector<double> emc = {}) {
  nestevo::DeviceSpec d;
  d.name = "toy";
  d.compute_freq_ghz = std::move(compute);
  d.emc_freq_ghz = std::move(emc);
  d.default_compute_idx = d.compute_freq_ghz.size() - 1;
  d.default_emc_idx = d.emc_freq_ghz.empty() ? 0 : d.emc_freq_ghz.size() - 1;
  return d;
}

// One block, depth {6,7}, two widths, two kernels, one expand; |B| = 8.
inline nestevo::SearchSpaceSpec ooe_space() {
  nestevo::SearchSpaceSpec s;
  s.n_block = 1;
  s.resolution_domain = {224};
  s.depth_domain = {6, 7};
  s.width_domain = {16, 1984};
  s.kernel_domain = {3, 5};
  s.expand_domain = {4};
  s.exit_min_position = 5;
  s.devices = {device({0.6, 1.2})};
  return s;
}

// One block of depth 7 (two exit positions), four DVFS levels; 12 inner
// candidates per backbone, 8 backbones.
inline nestevo::SearchSpaceSpec ioe_space() {
  nestevo::SearchSpaceSpec s;
  s.n_block = 1;
  s.resolution_domain = {192, 224};
  s.depth_domain = {7};
  s.width_domain = {16, 1984};
  s.kernel_domain = {3, 5};
  s.expand_domain = {4};
  s.exit_min_position = 5;
  s.devices = {device({0.6, 0.8, 1.0, 1.2})};
  return s;
}

// Backbone with `layers` total layers in a single-block space whose depth
// domain is 1..layers.
inline nestevo::SearchSpaceSpec single_block_space(int max_depth) {
  nestevo::SearchSpaceSpec s;
  s.n_block = 1;
  s.depth_domain.clear();
  for (int d = 1; d <= max_depth; ++d) s.depth_domain.push_back(d);
  return s;
}

inline nestevo::BackboneGenome backbone_with_depth_idx(int depth_idx) {
  nestevo::BackboneGenome b;
  b.blocks = {{depth_idx, 0, 0, 0}};
  return b;
}

}  // namespace toy
