#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nestevo/genome.hpp"

namespace nestevo {

/// Abstract compute (flops) and memory-traffic (bytes) units.
struct Workload {
  double flops = 0.0;
  double bytes = 0.0;
};

/// Per-layer compute and traffic over a backbone's flattened layer sequence.
/// Block j contributes d*w*e*k^2*(r/32)^2 flops and 4*d*w*e bytes, split
/// evenly over its d layers.
class LayerTable {
 public:
  LayerTable(const BackboneGenome& b, const SearchSpaceSpec& space);

  int total_layers() const { return static_cast<int>(flops_.size()); }
  /// Flops of 1-based layer `layer`.
  double layer_flops(int layer) const;
  double prefix_flops(int upto_layer) const;
  double prefix_bytes(int upto_layer) const;

  /// Layers 1..upto_layer plus the overhead of every exit placed at or before
  /// upto_layer. Throws std::out_of_range for upto_layer outside [1, total].
  Workload prefix(int upto_layer, std::span<const int> exit_positions, double overhead_fraction) const;
  Workload full() const { return prefix(total_layers(), {}, 0.0); }

 private:
  std::vector<double> flops_;
  std::vector<double> bytes_;
  std::vector<double> cum_flops_;
  std::vector<double> cum_bytes_;
};

/// upto_layer = nullopt means the whole backbone.
Workload workload_of(const BackboneGenome& b, const SearchSpaceSpec& space, std::optional<int> upto_layer,
                     std::span<const int> exit_positions, double overhead_fraction);

struct SurrogateParams {
  double a_max = 0.9;
  double lambda = 1.0;
  double noise_eps = 0.01;
  double sigmoid_slope = 6.0;
  double sigmoid_midpoint = 0.35;

  void validate() const;
  bool operator==(const SurrogateParams&) const = default;
};

/// Flops of the genome sitting at the middle index of every domain.
double reference_flops(const SearchSpaceSpec& space);

/// Saturating accuracy in model compute plus a deterministic per-genome
/// perturbation, clamped to [0.02, 0.98].
double accuracy_surrogate(const BackboneGenome& b, const SearchSpaceSpec& space, std::uint64_t seed,
                          const SurrogateParams& params = {});

struct ExitProfile {
  std::vector<int> positions;
  std::vector<double> n_values;
  double final_accuracy = 0.0;

  /// N at an admissible position; throws std::out_of_range otherwise.
  double n_at(int position) const;
};

/// N_i = Acc * logistic(slope * (c_i / c_M - midpoint)) over admissible
/// positions, c_i being backbone prefix flops.
ExitProfile exit_profile(const BackboneGenome& b, const SearchSpaceSpec& space, std::uint64_t seed,
                         const SurrogateParams& params = {});

struct HardwareModelParams {
  double kappa_compute = 1.0e6;  // flops per GHz per ms
  double kappa_memory = 5.0e4;   // bytes per GHz per ms
  double p0 = 2.0;               // mW
  double p1 = 8000.0;            // mW / GHz^3
  double p2 = 3.0;               // mW / GHz
  double exit_overhead_fraction = 0.05;

  void validate() const;
  bool operator==(const HardwareModelParams&) const = default;
};

struct HwCost {
  double latency_ms = 0.0;
  double energy_mj = 0.0;
};

/// L = flops/(kc*fc) + bytes/(km*fm); P = p0 + p1*fc^3 + p2*fm; E = P*L/1000.
HwCost hw_latency_energy(const Workload& w, const DeviceSpec& device, const DvfsGenome& f,
                         const HardwareModelParams& params);

class HardwareBackend {
 public:
  virtual ~HardwareBackend() = default;
  virtual HwCost cost(const Workload& w, const DeviceSpec& device, const DvfsGenome& f) const = 0;
};

class SyntheticBackend final : public HardwareBackend {
 public:
  explicit SyntheticBackend(HardwareModelParams params);
  HwCost cost(const Workload& w, const DeviceSpec& device, const DvfsGenome& f) const override;
  const HardwareModelParams& params() const { return params_; }

 private:
  HardwareModelParams params_;
};

/// Measured costs keyed by (device, frequency pair, log10 flops bucket).
/// Between buckets, log-latency and log-energy are interpolated linearly in
/// log10 flops; outside the bucket range the nearest bucket is used.
class TableBackend final : public HardwareBackend {
 public:
  static constexpr const char* kHeader = "device,bucket_log10_flops,f_compute_ghz,f_emc_ghz,latency_ms,energy_mj";

  static TableBackend from_csv(const std::string& text);
  static TableBackend load(const std::string& path);

  /// Throws std::out_of_range when the device or frequency row is absent.
  HwCost lookup(const std::string& device, double log10_flops, double f_compute_ghz,
                std::optional<double> f_emc_ghz) const;
  HwCost cost(const Workload& w, const DeviceSpec& device, const DvfsGenome& f) const override;
  std::size_t row_count() const { return rows_; }

 private:
  struct Bucket {
    double log10_flops;
    double latency_ms;
    double energy_mj;
  };
  // Frequencies keyed in kHz so text round-off does not split rows.
  using FreqKey = std::pair<long long, long long>;
  std::map<std::string, std::map<FreqKey, std::vector<Bucket>>> table_;
  std::size_t rows_ = 0;
};

struct StaticScore {
  double accuracy = 0.0;
  double latency_ms = 0.0;
  double energy_mj = 0.0;

  bool operator==(const StaticScore&) const = default;
};

/// Accuracy surrogate plus full-model cost at the device's default DVFS point.
StaticScore eval_static(const BackboneGenome& b, const SearchSpaceSpec& space, const DeviceSpec& device,
                        const HardwareBackend& backend, const SurrogateParams& surrogate, std::uint64_t seed);

/// Bundles everything a search needs to score candidates on one device, and
/// counts the evaluations it performs. Safe to share across threads.
class Evaluator {
 public:
  Evaluator(SearchSpaceSpec space, std::string device, std::shared_ptr<const HardwareBackend> backend,
            SurrogateParams surrogate, double exit_overhead_fraction, std::uint64_t seed);

  const SearchSpaceSpec& space() const { return space_; }
  const DeviceSpec& device() const { return space_.device(device_); }
  const HardwareBackend& backend() const { return *backend_; }
  const SurrogateParams& surrogate() const { return surrogate_; }
  double exit_overhead_fraction() const { return exit_overhead_; }
  std::uint64_t seed() const { return seed_; }

  /// Counted as one static evaluation.
  StaticScore evaluate_static(const BackboneGenome& b) const;
  ExitProfile profile(const BackboneGenome& b) const;
  HwCost cost(const Workload& w, const DvfsGenome& f) const;
  void record_dynamic_evaluation() const { counters_->dynamic_evals.fetch_add(1, std::memory_order_relaxed); }

  std::uint64_t static_evaluations() const { return counters_->static_evals.load(); }
  std::uint64_t dynamic_evaluations() const { return counters_->dynamic_evals.load(); }
  void reset_counters() const;

 private:
  struct Counters {
    std::atomic<std::uint64_t> static_evals{0};
    std::atomic<std::uint64_t> dynamic_evals{0};
  };
  SearchSpaceSpec space_;
  std::string device_;
  std::shared_ptr<const HardwareBackend> backend_;
  SurrogateParams surrogate_;
  double exit_overhead_;
  std::uint64_t seed_;
  std::unique_ptr<Counters> counters_;
};

// Exit training loss, averaged over samples and over the M-1 exits:
// NLL of the label plus T^2 * KL(soften(final) || soften(exit)).

struct LossSample {
  std::vector<std::vector<double>> exit_probs;
  std::vector<double> final_probs;
  std::size_t label = 0;
};

struct LossRecord {
  double nll = 0.0;
  double kd = 0.0;
  double total = 0.0;
};

/// p^(1/T) renormalized; entries are floored at 1e-12 first.
std::vector<double> soften(std::span<const double> p, double temperature);

/// Throws std::invalid_argument on an empty batch, a sample without exits, a
/// distribution not summing to 1 within 1e-9, or a label out of range. A zero
/// probability at the label is clamped to 1e-12.
LossRecord hybrid_loss(std::span<const LossSample> batch, double temperature = 1.0);
LossRecord hybrid_loss(const LossSample& sample, double temperature = 1.0);

}  // namespace nestevo
