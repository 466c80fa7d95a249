#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "nestevo/archive_io.hpp"
#include "nestevo/config.hpp"
#include "nestevo/ioe.hpp"
#include "nestevo/metrics.hpp"

namespace nestevo {

/// Environment variable that overrides the configured output directory.
/// The --out flag still takes precedence.
inline constexpr const char* kOutDirEnv = "NESTEVO_OUT_DIR";

enum ExitCode : int {
  kOk = 0,
  kRuntimeError = 1,
  kConfigError = 2,
  kDigestMismatch = 3,
  kCapExceeded = 4,
};

struct CommonOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<unsigned> threads;
};

/// Loads the config and applies --seed / --threads overrides.
RunConfig load_with_overrides(const CommonOptions& opts);
std::string resolve_output_dir(const CommonOptions& opts, const RunConfig& config);

struct SearchOptions : CommonOptions {
  bool force = false;
};

/// Runs the nested search. Writes <out>/archive.json, <out>/front.csv and one
/// <out>/checkpoints/gen_NNNN.json per completed generation. Refuses to
/// overwrite an archive produced by a different config unless forced.
int cmd_search(const SearchOptions& opts, std::ostream& out, std::ostream& err);

struct EnumerateOptions : CommonOptions {
  std::optional<std::uint64_t> cap;
};

/// Exhaustive bi-level front, written to <out>/truth_front.csv.
int cmd_enumerate(const EnumerateOptions& opts, std::ostream& out, std::ostream& err);

/// One objective column of a front CSV with its direction and reference.
struct ReferenceAxis {
  std::string column;
  Direction direction = Direction::Maximize;
  double reference = 0.0;
};

/// Parses "col:max:ref,col:min:ref,...".
std::vector<ReferenceAxis> parse_reference_spec(const std::string& spec);
std::vector<ObjectiveVector> front_points(const CsvTable& table, const std::vector<ReferenceAxis>& axes);

struct MetricsOptions {
  std::string front_a;
  std::string front_b;
  std::string reference;
  std::optional<std::string> out_path;
  std::size_t mc_samples = 1'000'000;  // used above three objectives
  std::uint64_t mc_seed = 0;
};

/// HV of both fronts and RoD in both directions, printed and optionally
/// written as JSON.
int cmd_metrics(const MetricsOptions& opts, std::ostream& out, std::ostream& err);

struct AblationArm {
  double gamma = 0.0;
  std::vector<InnerCandidate> archive;
  double hypervolume = 0.0;  // (mean N max, energy ratio min), reference (0, 1)
  double mean_spread = 0.0;  // mean exit_n_spread over multi-exit members
  std::size_t multi_exit_members = 0;
};

struct AblationReport {
  BackboneGenome backbone;
  std::vector<AblationArm> arms;
  struct Pair {
    std::size_t a = 0;
    std::size_t b = 0;
    double rod_a_over_b = 0.0;
    double rod_b_over_a = 0.0;
  };
  std::vector<Pair> pairs;
};

/// Backbone: the configured genome, else a draw from backbone_seed (or the
/// run seed). Every arm uses the same IOE stream.
AblationReport run_dissim_ablation(const Evaluator& ev, const RunConfig& config, const std::vector<double>& gammas);

struct AblateOptions : CommonOptions {
  std::vector<double> gammas;  // empty: use the config's list
};

/// One IOE run per gamma on the same backbone, written to
/// <out>/ablation.json.
int cmd_ablate_dissim(const AblateOptions& opts, std::ostream& out, std::ostream& err);

}  // namespace nestevo
