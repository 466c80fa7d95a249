#include "nestevo/commands.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <ostream>
#include <sstream>

#include "nestevo/archive_io.hpp"
#include "nestevo/enumerate.hpp"
#include "nestevo/error.hpp"
#include "nestevo/ooe.hpp"

namespace nestevo {

using nlohmann::json;
namespace fs = std::filesystem;

RunConfig load_with_overrides(const CommonOptions& opts) {
  RunConfig config = load_run_config(opts.config_path);
  if (opts.seed) {
    config.seed = *opts.seed;
    config.ooe.seed = *opts.seed;
  }
  if (opts.threads) config.ooe.threads = *opts.threads;
  return config;
}

std::string resolve_output_dir(const CommonOptions& opts, const RunConfig& config) {
  if (opts.out_dir) return *opts.out_dir;
  if (const char* env = std::getenv(kOutDirEnv); env && *env) return env;
  return config.output_dir;
}

namespace {

std::string checkpoint_name(int generation) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "gen_%04d.json", generation);
  return buf;
}

std::vector<FrontRow> rows_of(const std::vector<FinalSolution>& solutions, const SearchSpaceSpec& space) {
  std::vector<FrontRow> rows;
  rows.reserve(solutions.size());
  for (const auto& s : solutions) rows.push_back(front_row(s, space));
  return rows;
}

// Maps library exceptions to exit codes with a one-line diagnostic.
template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
}

json arm_member_json(const InnerCandidate& c, const ExitProfile& profile) {
  return {{"exits", c.exits.bit_string()},
          {"exit_positions", c.exits.sampled_positions()},
          {"compute_idx", c.dvfs.compute_idx},
          {"emc_idx", c.dvfs.emc_idx ? json(*c.dvfs.emc_idx) : json(nullptr)},
          {"mean_n", c.score.mean_n},
          {"energy_ratio", c.score.mean_energy_ratio},
          {"latency_ratio", c.score.mean_latency_ratio},
          {"mean_dissim", c.score.mean_dissim},
          {"scalar_d", c.score.scalar_d},
          {"n_spread", exit_n_spread(profile, c.exits)}};
}

std::vector<ObjectiveVector> accuracy_energy_points(const std::vector<InnerCandidate>& archive) {
  const std::vector<Direction> dirs{Direction::Maximize, Direction::Minimize};
  std::vector<ObjectiveVector> pts;
  for (const auto& c : archive) pts.emplace_back(std::vector<double>{c.score.mean_n, c.score.mean_energy_ratio}, dirs);
  return pts;
}

}  // namespace

int cmd_search(const SearchOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&]() -> int {
    const RunConfig config = load_with_overrides(opts);
    const std::string digest = config_digest(config);
    const fs::path dir = resolve_output_dir(opts, config);
    const fs::path archive_path = dir / "archive.json";

    if (fs::exists(archive_path) && !opts.force) {
      const auto existing = json::parse(read_file(archive_path.string()));
      const auto old_digest = existing.value("config_digest", std::string());
      if (old_digest != digest) {
        err << "error: " << archive_path.string() << " was produced by config " << old_digest
            << ", current config is " << digest << "; rerun with --force to overwrite\n";
        return kDigestMismatch;
      }
    }

    const fs::path checkpoints = dir / "checkpoints";
    fs::create_directories(checkpoints);
    for (const auto& entry : fs::directory_iterator(checkpoints))
      if (entry.path().filename().string().rfind("gen_", 0) == 0) fs::remove(entry.path());

    const auto ev = make_evaluator(config);
    const auto result = run_ooe(*ev, config.ooe, [&](const GenerationSnapshot& snap) {
      const json doc = {{"schema_version", kArchiveSchemaVersion},
                        {"config_digest", digest},
                        {"snapshot", snapshot_to_json(snap)}};
      atomic_write((checkpoints / checkpoint_name(snap.generation)).string(), dump_json(doc));
      out << "generation " << snap.generation << ": archive " << snap.archive.size() << ", static evals "
          << snap.static_evaluations << ", dynamic evals " << snap.dynamic_evaluations << "\n";
    });

    ArchiveFile archive;
    archive.config_digest = digest;
    archive.snapshots = result.snapshots;
    archive.final_archive = result.archive;
    archive.static_evaluations = result.static_evaluations;
    archive.dynamic_evaluations = result.dynamic_evaluations;
    archive.ioe_runs = result.ioe_runs;
    save_archive(archive_path.string(), archive);
    atomic_write((dir / "front.csv").string(), front_csv(rows_of(result.archive, config.space)));
    out << "wrote " << result.archive.size() << " solutions to " << dir.string() << "\n";
    return kOk;
  });
}

int cmd_enumerate(const EnumerateOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&]() -> int {
    const RunConfig config = load_with_overrides(opts);
    const std::uint64_t cap = opts.cap.value_or(config.enumerate_cap);
    const std::uint64_t cardinality = joint_cardinality(config.space, config.space.device(config.device));
    if (cardinality > cap) {
      err << "error: joint space cardinality " << cardinality << " exceeds the enumeration cap " << cap << "\n";
      return kCapExceeded;
    }
    const auto ev = make_evaluator(config);
    const auto result = enumerate_front(*ev, config.ooe.ioe);
    const fs::path dir = resolve_output_dir(opts, config);
    atomic_write((dir / "truth_front.csv").string(), front_csv(rows_of(result.front, config.space)));
    out << "evaluated " << result.evaluations << " candidates over " << result.backbones << " backbones; front has "
        << result.front.size() << " solutions\n";
    return kOk;
  });
}

std::vector<ReferenceAxis> parse_reference_spec(const std::string& spec) {
  std::vector<ReferenceAxis> axes;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto c1 = item.find(':');
    const auto c2 = c1 == std::string::npos ? c1 : item.find(':', c1 + 1);
    if (c2 == std::string::npos) throw ConfigError("reference axis must be column:max|min:value, got '" + item + "'");
    ReferenceAxis axis;
    axis.column = item.substr(0, c1);
    const std::string dir = item.substr(c1 + 1, c2 - c1 - 1);
    if (dir == "max") {
      axis.direction = Direction::Maximize;
    } else if (dir == "min") {
      axis.direction = Direction::Minimize;
    } else {
      throw ConfigError("reference direction must be max or min, got '" + dir + "'");
    }
    try {
      axis.reference = parse_number(item.substr(c2 + 1));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    axes.push_back(std::move(axis));
  }
  if (axes.empty()) throw ConfigError("reference spec names no objective");
  return axes;
}

std::vector<ObjectiveVector> front_points(const CsvTable& table, const std::vector<ReferenceAxis>& axes) {
  std::vector<Direction> dirs;
  for (const auto& a : axes) dirs.push_back(a.direction);
  std::vector<ObjectiveVector> pts;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    std::vector<double> v;
    for (const auto& a : axes) v.push_back(table.number(r, a.column));
    pts.emplace_back(std::move(v), dirs);
  }
  return pts;
}

int cmd_metrics(const MetricsOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&]() -> int {
    const auto axes = parse_reference_spec(opts.reference);
    const auto table_a = CsvTable::parse(read_file(opts.front_a));
    const auto table_b = CsvTable::parse(read_file(opts.front_b));
    if (table_a.header != table_b.header) {
      err << "error: front files have different schemas\n";
      return kConfigError;
    }
    std::vector<double> ref_values;
    std::vector<Direction> dirs;
    for (const auto& a : axes) {
      ref_values.push_back(a.reference);
      dirs.push_back(a.direction);
    }
    const ObjectiveVector reference(ref_values, dirs);
    const auto pts_a = front_points(table_a, axes);
    const auto pts_b = front_points(table_b, axes);
    const Front front_a(pts_a, reference);
    const Front front_b(pts_b, reference);

    json report;
    json objectives = json::array();
    for (const auto& a : axes)
      objectives.push_back({{"column", a.column},
                            {"direction", a.direction == Direction::Maximize ? "max" : "min"},
                            {"reference", a.reference}});
    report["objectives"] = objectives;
    if (axes.size() <= 3) {
      report["hv_method"] = "exact";
      report["hv_a"] = hypervolume(front_a);
      report["hv_b"] = hypervolume(front_b);
    } else {
      const auto ha = hypervolume_monte_carlo(front_a, opts.mc_samples, opts.mc_seed);
      const auto hb = hypervolume_monte_carlo(front_b, opts.mc_samples, opts.mc_seed);
      report["hv_method"] = "monte_carlo";
      report["hv_a"] = ha.estimate;
      report["hv_a_stderr"] = ha.standard_error;
      report["hv_b"] = hb.estimate;
      report["hv_b_stderr"] = hb.standard_error;
      report["mc_samples"] = opts.mc_samples;
      report["mc_seed"] = opts.mc_seed;
    }
    report["rod_a_over_b"] = ratio_of_dominance(front_a, front_b);
    report["rod_b_over_a"] = ratio_of_dominance(front_b, front_a);
    report["rows_a"] = pts_a.size();
    report["rows_b"] = pts_b.size();
    report["front_size_a"] = front_a.points().size();
    report["front_size_b"] = front_b.points().size();
    const std::string text = dump_json(report);
    out << text;
    if (opts.out_path) atomic_write(*opts.out_path, text);
    return kOk;
  });
}

AblationReport run_dissim_ablation(const Evaluator& ev, const RunConfig& config, const std::vector<double>& gammas) {
  if (gammas.empty()) throw ConfigError("ablation needs at least one gamma");
  AblationReport report;
  if (config.ablation.backbone) {
    report.backbone = *config.ablation.backbone;
  } else {
    Rng pick(config.ablation.backbone_seed.value_or(config.seed));
    report.backbone = sample_backbone(ev.space(), pick);
  }
  const StaticScore baseline = ev.evaluate_static(report.backbone);
  const ExitProfile profile = ev.profile(report.backbone);
  const std::vector<Direction> dirs{Direction::Maximize, Direction::Minimize};
  const ObjectiveVector reference({0.0, 1.0}, dirs);

  for (double gamma : gammas) {
    IoeConfig arm_config = config.ooe.ioe;
    arm_config.gamma = gamma;
    Rng rng(hash_combine(config.seed, 0xab1a7e));
    AblationArm arm;
    arm.gamma = gamma;
    arm.archive = run_ioe(report.backbone, baseline, ev, arm_config, rng).archive;
    std::vector<ObjectiveVector> inside;
    for (auto& p : accuracy_energy_points(arm.archive))
      if (weakly_dominates(p, reference)) inside.push_back(std::move(p));
    arm.hypervolume = hypervolume(Front(std::move(inside), reference));
    double spread = 0.0;
    for (const auto& c : arm.archive) {
      if (c.exits.count() < 2) continue;
      spread += exit_n_spread(profile, c.exits);
      ++arm.multi_exit_members;
    }
    arm.mean_spread = arm.multi_exit_members ? spread / static_cast<double>(arm.multi_exit_members) : 0.0;
    report.arms.push_back(std::move(arm));
  }
  for (std::size_t a = 0; a < report.arms.size(); ++a) {
    for (std::size_t b = a + 1; b < report.arms.size(); ++b) {
      const auto pa = accuracy_energy_points(report.arms[a].archive);
      const auto pb = accuracy_energy_points(report.arms[b].archive);
      report.pairs.push_back({a, b, ratio_of_dominance(pa, pb), ratio_of_dominance(pb, pa)});
    }
  }
  return report;
}

int cmd_ablate_dissim(const AblateOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&]() -> int {
    const RunConfig config = load_with_overrides(opts);
    const auto gammas = opts.gammas.empty() ? config.ablation.gammas : opts.gammas;
    const auto ev = make_evaluator(config);
    const auto report = run_dissim_ablation(*ev, config, gammas);
    const ExitProfile profile = ev->profile(report.backbone);

    json arms = json::array();
    for (const auto& arm : report.arms) {
      json members = json::array();
      for (const auto& c : arm.archive) members.push_back(arm_member_json(c, profile));
      arms.push_back({{"gamma", arm.gamma},
                      {"archive_size", arm.archive.size()},
                      {"hypervolume", arm.hypervolume},
                      {"mean_n_spread", arm.mean_spread},
                      {"multi_exit_members", arm.multi_exit_members},
                      {"archive", std::move(members)}});
      out << "gamma " << format_double(arm.gamma) << ": archive " << arm.archive.size() << ", hv "
          << format_double(arm.hypervolume) << ", mean N spread " << format_double(arm.mean_spread) << "\n";
    }
    json pairs = json::array();
    for (const auto& p : report.pairs) {
      pairs.push_back({{"gamma_a", report.arms[p.a].gamma},
                       {"gamma_b", report.arms[p.b].gamma},
                       {"rod_a_over_b", p.rod_a_over_b},
                       {"rod_b_over_a", p.rod_b_over_a}});
      out << "RoD gamma " << format_double(report.arms[p.a].gamma) << " over " << format_double(report.arms[p.b].gamma)
          << ": " << format_double(p.rod_a_over_b) << ", reverse " << format_double(p.rod_b_over_a) << "\n";
    }
    const json doc = {{"config_digest", config_digest(config)},
                      {"backbone", backbone_to_json(report.backbone)},
                      {"arms", std::move(arms)},
                      {"pairs", std::move(pairs)}};
    const fs::path dir = resolve_output_dir(opts, config);
    atomic_write((dir / "ablation.json").string(), dump_json(doc));
    return kOk;
  });
}

}  // namespace nestevo
