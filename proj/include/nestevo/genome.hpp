#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nestevo/rng.hpp"

namespace nestevo {

/// A device's discrete DVFS tables. An empty emc table means the device
/// exposes no memory-controller knob.
struct DeviceSpec {
  std::string name;
  std::vector<double> compute_freq_ghz;
  std::vector<double> emc_freq_ghz;
  std::size_t default_compute_idx = 0;
  std::size_t default_emc_idx = 0;

  bool has_emc() const { return !emc_freq_ghz.empty(); }
  void validate() const;

  bool operator==(const DeviceSpec&) const = default;
};

/// `count` levels evenly spaced over [lo, hi], rounded to integers.
std::vector<int> integer_levels(int lo, int hi, int count);
/// `count` levels evenly spaced over [lo, hi].
std::vector<double> frequency_levels(double lo, double hi, int count);

/// Jetson AGX Xavier / TX2 GPU and CPU tables with the matching EMC table.
std::vector<DeviceSpec> default_devices();

struct SearchSpaceSpec {
  int n_block = 7;
  std::vector<int> resolution_domain{192, 224, 256, 288};
  std::vector<int> depth_domain{1, 2, 3, 4, 5, 6, 7, 8};
  std::vector<int> width_domain = integer_levels(16, 1984, 16);
  std::vector<int> kernel_domain{3, 5};
  std::vector<int> expand_domain{1, 4, 5, 6};
  int exit_min_position = 5;
  std::vector<DeviceSpec> devices = default_devices();

  /// Throws std::invalid_argument when a domain is empty or unsorted, or when
  /// even the deepest backbone cannot host an exit.
  void validate() const;
  const DeviceSpec& device(std::string_view name) const;

  bool operator==(const SearchSpaceSpec&) const = default;
};

struct BlockGene {
  int depth_idx = 0;
  int width_idx = 0;
  int kernel_idx = 0;
  int expand_idx = 0;

  auto operator<=>(const BlockGene&) const = default;
};

/// Index-coded backbone architecture.
struct BackboneGenome {
  int resolution_idx = 0;
  std::vector<BlockGene> blocks;

  int total_layers(const SearchSpaceSpec& space) const;
  bool is_valid(const SearchSpaceSpec& space) const;
  /// Throws StructuralError if any index is out of range or no exit fits.
  void check(const SearchSpaceSpec& space) const;
  std::uint64_t hash() const;

  auto operator<=>(const BackboneGenome&) const = default;
};

/// Exit indicators over admissible positions; bit p is an exit after layer
/// first_position + p.
struct ExitGenome {
  int first_position = 0;
  std::vector<std::uint8_t> bits;

  std::size_t length() const { return bits.size(); }
  std::size_t count() const;
  std::vector<int> sampled_positions() const;
  bool is_valid_for(const BackboneGenome& b, const SearchSpaceSpec& space) const;
  std::string bit_string() const;

  auto operator<=>(const ExitGenome&) const = default;
};

struct DvfsGenome {
  std::string device;
  int compute_idx = 0;
  std::optional<int> emc_idx;

  bool is_valid_for(const DeviceSpec& device) const;
  double compute_ghz(const DeviceSpec& device) const;
  /// Memory-side frequency; devices without an EMC knob report the compute
  /// frequency.
  double memory_ghz(const DeviceSpec& device) const;

  auto operator<=>(const DvfsGenome&) const = default;
};

struct VariationParams {
  double mutation_prob_per_gene = 0.1;
  double crossover_prob = 0.5;
  std::size_t tournament_size = 2;

  void validate() const;
  bool operator==(const VariationParams&) const = default;
};

/// Layers [exit_min_position, total_layers - 1]; the last layer hosts the
/// backbone classifier.
std::vector<int> admissible_positions(const BackboneGenome& b, const SearchSpaceSpec& space);

BackboneGenome sample_backbone(const SearchSpaceSpec& space, Rng& rng);
ExitGenome sample_exit_genome(const BackboneGenome& b, const SearchSpaceSpec& space, Rng& rng);
DvfsGenome sample_dvfs(const DeviceSpec& device, Rng& rng);
/// The device's default operating point.
DvfsGenome default_dvfs(const DeviceSpec& device);

/// Raises the depth of the shallowest block until an exit fits.
void repair_backbone(BackboneGenome& b, const SearchSpaceSpec& space, Rng& rng);
/// Sets one uniformly chosen bit if none is set.
void repair_exit_genome(ExitGenome& x, Rng& rng);

BackboneGenome mutate_backbone(const BackboneGenome& b, const SearchSpaceSpec& space,
                               const VariationParams& params, Rng& rng);
ExitGenome mutate_exit(const ExitGenome& x, const VariationParams& params, Rng& rng);
DvfsGenome mutate_dvfs(const DvfsGenome& f, const SearchSpaceSpec& space,
                       const VariationParams& params, Rng& rng);

// Uniform crossover: each gene is swapped between the children with
// probability crossover_prob. Mismatched parents throw StructuralError.
std::pair<BackboneGenome, BackboneGenome> crossover(const BackboneGenome& a, const BackboneGenome& b,
                                                    const SearchSpaceSpec& space,
                                                    const VariationParams& params, Rng& rng);
std::pair<ExitGenome, ExitGenome> crossover(const ExitGenome& a, const ExitGenome& b,
                                            const VariationParams& params, Rng& rng);
std::pair<DvfsGenome, DvfsGenome> crossover(const DvfsGenome& a, const DvfsGenome& b,
                                            const VariationParams& params, Rng& rng);

// Exhaustive enumeration, for oracles over tiny spaces.
std::uint64_t backbone_cardinality(const SearchSpaceSpec& space);
std::vector<BackboneGenome> enumerate_backbones(const SearchSpaceSpec& space);
std::vector<ExitGenome> enumerate_exit_genomes(const BackboneGenome& b, const SearchSpaceSpec& space);
std::vector<DvfsGenome> enumerate_dvfs(const DeviceSpec& device);

}  // namespace nestevo
