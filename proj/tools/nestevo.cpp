#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nestevo/commands.hpp"

namespace {

void add_common(CLI::App* sub, nestevo::CommonOptions& opts, std::optional<std::uint64_t>& seed,
                std::optional<std::string>& out, std::optional<unsigned>& threads) {
  sub->add_option("--config", opts.config_path, "Run config (JSON)")->required()->check(CLI::ExistingFile);
  sub->add_option("--seed", seed, "Override the config seed");
  sub->add_option("--out", out, "Output directory (overrides NESTEVO_OUT_DIR and the config)");
  sub->add_option("--threads", threads, "Worker threads, 0 = hardware concurrency");
}

template <typename Opts>
void apply_common(Opts& opts, const std::optional<std::uint64_t>& seed, const std::optional<std::string>& out,
                  const std::optional<unsigned>& threads) {
  opts.seed = seed;
  opts.out_dir = out;
  opts.threads = threads;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nested evolutionary search over backbones, early exits and DVFS settings"};
  app.require_subcommand(1);

  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<unsigned> threads;

  nestevo::SearchOptions search;
  auto* search_cmd = app.add_subcommand("search", "Run the bi-level search");
  add_common(search_cmd, search, seed, out, threads);
  search_cmd->add_flag("--force", search.force, "Overwrite an archive produced by a different config");

  nestevo::EnumerateOptions enumerate;
  std::optional<std::uint64_t> cap;
  auto* enumerate_cmd = app.add_subcommand("enumerate", "Exhaustively compute the true front of a small space");
  add_common(enumerate_cmd, enumerate, seed, out, threads);
  enumerate_cmd->add_option("--cap", cap, "Refuse spaces larger than this many candidates");

  nestevo::MetricsOptions metrics;
  std::optional<std::string> metrics_out;
  auto* metrics_cmd = app.add_subcommand("metrics", "Hypervolume and ratio of dominance between two fronts");
  metrics_cmd->add_option("--a", metrics.front_a, "First front CSV")->required()->check(CLI::ExistingFile);
  metrics_cmd->add_option("--b", metrics.front_b, "Second front CSV")->required()->check(CLI::ExistingFile);
  metrics_cmd->add_option("--ref", metrics.reference, "Objectives as column:max|min:reference,...")->required();
  metrics_cmd->add_option("--out", metrics_out, "Write the report JSON here");
  metrics_cmd->add_option("--mc-samples", metrics.mc_samples, "Monte Carlo samples above three objectives");
  metrics_cmd->add_option("--mc-seed", metrics.mc_seed, "Monte Carlo seed");

  nestevo::AblateOptions ablate;
  auto* ablate_cmd = app.add_subcommand("ablate", "Dissimilarity ablation: one inner search per gamma");
  add_common(ablate_cmd, ablate, seed, out, threads);
  ablate_cmd->add_option("--gammas", ablate.gammas, "Gamma values (default: from config)")->delimiter(',');

  CLI11_PARSE(app, argc, argv);

  if (*search_cmd) {
    apply_common(search, seed, out, threads);
    return nestevo::cmd_search(search, std::cout, std::cerr);
  }
  if (*enumerate_cmd) {
    apply_common(enumerate, seed, out, threads);
    enumerate.cap = cap;
    return nestevo::cmd_enumerate(enumerate, std::cout, std::cerr);
  }
  if (*metrics_cmd) {
    metrics.out_path = metrics_out;
    return nestevo::cmd_metrics(metrics, std::cout, std::cerr);
  }
  apply_common(ablate, seed, out, threads);
  return nestevo::cmd_ablate_dissim(ablate, std::cout, std::cerr);
}
