#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "nestevo/archive_io.hpp"
#include "nestevo/commands.hpp"
#include "nestevo/error.hpp"

using namespace nestevo;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("nestevo_test_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

json toy_config() {
  return json::parse(R"({
    "seed": 7,
    "device": "toy",
    "enumerate_cap": 1000,
    "space": {
      "n_block": 1, "resolution": [192, 224], "depth": [7], "width": [16, 1984],
      "kernel": [3, 5], "expand": [4], "exit_min_position": 5,
      "devices": [{"name": "toy", "compute_ghz": [0.6, 0.8, 1.0, 1.2]}]
    },
    "ooe": {"generations": 2, "population": 8, "budget": 16, "prune_fraction": 1.0},
    "ioe": {"generations": 1, "population": 12, "budget": 12}
  })");
}

std::string write_config(const fs::path& dir, const json& j) {
  const auto path = (dir / "config.json").string();
  std::ofstream(path) << j.dump(2);
  return path;
}

std::string slurp(const fs::path& p) { return read_file(p.string()); }

}  // namespace

TEST_CASE("config parsing") {
  const auto c = parse_run_config(toy_config());
  CHECK(c.seed == 7);
  CHECK(c.ooe.seed == 7);
  CHECK(c.space.n_block == 1);
  CHECK(c.space.device("toy").compute_freq_ghz.size() == 4);
  CHECK(c.ooe.ioe.population == 12);
  CHECK_NOTHROW(c.validate());

  auto missing_seed = toy_config();
  missing_seed.erase("seed");
  CHECK_THROWS_AS(parse_run_config(missing_seed), ConfigError);
  auto negative_seed = toy_config();
  negative_seed["seed"] = -1;
  CHECK_THROWS_AS(parse_run_config(negative_seed), ConfigError);
  auto unknown = toy_config();
  unknown["ooe"]["popsize"] = 3;
  CHECK_THROWS_AS(parse_run_config(unknown), ConfigError);
  auto no_table = toy_config();
  no_table["backend"] = {{"kind", "table"}, {"path", "/nonexistent/table.csv"}};
  CHECK_THROWS_AS(parse_run_config(no_table).validate(), ConfigError);

  auto levels = toy_config();
  levels["space"]["width"] = {{"min", 16}, {"max", 1984}, {"levels", 16}};
  CHECK(parse_run_config(levels).space.width_domain == SearchSpaceSpec{}.width_domain);

  const json defaults = {{"seed", 1}};
  const auto d = parse_run_config(defaults);
  CHECK(d.ooe.generations == 15);
  CHECK(d.ooe.population == 30);
  CHECK(d.ooe.ioe.generations == 35);
  CHECK(d.ooe.ioe.population == 100);
  CHECK(d.device == "agx_gpu");
}

TEST_CASE("config digest") {
  const auto a = parse_run_config(toy_config());
  auto b = a;
  CHECK(config_digest(a) == config_digest(b));
  CHECK(config_digest(a).size() == 16);
  b.output_dir = "elsewhere";
  b.ooe.threads = 4;
  CHECK(config_digest(a) == config_digest(b));
  b.ooe.ioe.gamma = 0.5;
  CHECK(config_digest(a) != config_digest(b));
  CHECK(parse_run_config(canonical_json(a)) .seed == a.seed);
  CHECK(config_digest(parse_run_config(canonical_json(a))) == config_digest(a));
}

TEST_CASE("number formatting round-trips") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 123456789.123, -2.5, 0.0}) CHECK(parse_number(format_double(v)) == v);
  CHECK_THROWS(parse_number("1.0x"));
  CHECK_THROWS(parse_number(""));
}

TEST_CASE("search writes archive, front and checkpoints") {
  const auto dir = scratch("search");
  const auto cfg = write_config(dir, toy_config());
  std::ostringstream out, err;
  SearchOptions opts;
  opts.config_path = cfg;
  opts.out_dir = (dir / "run").string();
  REQUIRE(cmd_search(opts, out, err) == kOk);

  const auto archive = load_archive((dir / "run" / "archive.json").string());
  CHECK(archive.config_digest == config_digest(parse_run_config(toy_config())));
  CHECK(archive.snapshots.size() == 2);
  CHECK(archive.static_evaluations == 16);
  CHECK(archive.dynamic_evaluations == 2 * 8 * 12);
  const auto rows = parse_front_csv(slurp(dir / "run" / "front.csv"));
  CHECK(rows.size() == archive.final_archive.size());
  std::size_t checkpoints = 0;
  for (const auto& e : fs::directory_iterator(dir / "run" / "checkpoints")) checkpoints += e.path().extension() == ".json";
  CHECK(checkpoints == 2);

  SUBCASE("archive and CSV round-trip") {
    const auto path = (dir / "copy.json").string();
    save_archive(path, archive);
    CHECK(load_archive(path) == archive);
    CHECK(slurp(path) == slurp(dir / "run" / "archive.json"));
    std::vector<FrontRow> again = parse_front_csv(front_csv(rows));
    CHECK(again == rows);
  }
  SUBCASE("rerun is byte-identical") {
    const auto first_json = slurp(dir / "run" / "archive.json");
    const auto first_csv = slurp(dir / "run" / "front.csv");
    REQUIRE(cmd_search(opts, out, err) == kOk);
    CHECK(slurp(dir / "run" / "archive.json") == first_json);
    CHECK(slurp(dir / "run" / "front.csv") == first_csv);
  }
  SUBCASE("config drift is detected") {
    auto changed = toy_config();
    changed["ioe"]["gamma"] = 0.5;
    SearchOptions drift = opts;
    drift.config_path = write_config(dir, changed);
    std::ostringstream e2;
    CHECK(cmd_search(drift, out, e2) == kDigestMismatch);
    CHECK(e2.str().find("--force") != std::string::npos);
    drift.force = true;
    CHECK(cmd_search(drift, out, err) == kOk);
  }
  SUBCASE("seed override changes the digest") {
    SearchOptions reseeded = opts;
    reseeded.seed = 8;
    std::ostringstream e2;
    CHECK(cmd_search(reseeded, out, e2) == kDigestMismatch);
  }
}

TEST_CASE("output directory precedence") {
  const auto dir = scratch("outdir");
  auto j = toy_config();
  j["output_dir"] = (dir / "from_config").string();
  CommonOptions opts;
  opts.config_path = write_config(dir, j);
  const auto config = load_with_overrides(opts);
  ::unsetenv(kOutDirEnv);
  CHECK(resolve_output_dir(opts, config) == (dir / "from_config").string());
  ::setenv(kOutDirEnv, (dir / "from_env").c_str(), 1);
  CHECK(resolve_output_dir(opts, config) == (dir / "from_env").string());
  opts.out_dir = (dir / "from_flag").string();
  CHECK(resolve_output_dir(opts, config) == (dir / "from_flag").string());
  ::unsetenv(kOutDirEnv);
}

TEST_CASE("invalid config gives a nonzero exit") {
  const auto dir = scratch("invalid");
  auto j = toy_config();
  j["ooe"]["budget"] = 3;
  SearchOptions opts;
  opts.config_path = write_config(dir, j);
  opts.out_dir = (dir / "run").string();
  std::ostringstream out, err;
  CHECK(cmd_search(opts, out, err) == kConfigError);
  CHECK_FALSE(err.str().empty());
  opts.config_path = (dir / "missing.json").string();
  CHECK(cmd_search(opts, out, err) != kOk);
}

TEST_CASE("enumerate") {
  const auto dir = scratch("enumerate");
  EnumerateOptions opts;
  opts.config_path = write_config(dir, toy_config());
  opts.out_dir = dir.string();
  std::ostringstream out, err;
  REQUIRE(cmd_enumerate(opts, out, err) == kOk);
  CHECK(out.str().find("evaluated 96 candidates") != std::string::npos);
  CHECK_FALSE(parse_front_csv(slurp(dir / "truth_front.csv")).empty());

  opts.cap = 10;
  std::ostringstream e2;
  CHECK(cmd_enumerate(opts, out, e2) == kCapExceeded);
  CHECK(e2.str().find("96") != std::string::npos);

  SUBCASE("a single-candidate space is its own front") {
    auto j = toy_config();
    j["space"]["resolution"] = {224};
    j["space"]["width"] = {16};
    j["space"]["kernel"] = {3};
    j["space"]["depth"] = {6};
    j["space"]["devices"][0]["compute_ghz"] = {1.0};
    EnumerateOptions single;
    single.config_path = write_config(dir, j);
    single.out_dir = (dir / "single").string();
    std::ostringstream o3;
    REQUIRE(cmd_enumerate(single, o3, err) == kOk);
    CHECK(o3.str().find("evaluated 1 candidates") != std::string::npos);
    CHECK(parse_front_csv(slurp(dir / "single" / "truth_front.csv")).size() == 1);
  }
}

TEST_CASE("metrics command") {
  const auto dir = scratch("metrics");
  const std::string header = "a,b\n";
  std::ofstream(dir / "x.csv") << header << "0.8,0.2\n0.2,0.8\n";
  std::ofstream(dir / "y.csv") << header << "0.5,0.5\n";
  std::ofstream(dir / "z.csv") << "a,c\n0.5,0.5\n";

  MetricsOptions opts;
  opts.front_a = (dir / "x.csv").string();
  opts.front_b = (dir / "x.csv").string();
  opts.reference = "a:max:0,b:max:0";
  opts.out_path = (dir / "report.json").string();
  std::ostringstream out, err;
  REQUIRE(cmd_metrics(opts, out, err) == kOk);
  auto report = json::parse(slurp(dir / "report.json"));
  CHECK(report["hv_a"].get<double>() == doctest::Approx(0.28).epsilon(1e-15));
  CHECK(report["hv_a"] == report["hv_b"]);
  CHECK(report["rod_a_over_b"].get<double>() == 0.0);
  CHECK(report["rod_b_over_a"].get<double>() == 0.0);

  opts.front_b = (dir / "y.csv").string();
  REQUIRE(cmd_metrics(opts, out, err) == kOk);
  report = json::parse(slurp(dir / "report.json"));
  CHECK(report["hv_b"].get<double>() == doctest::Approx(0.25).epsilon(1e-15));

  opts.front_b = (dir / "z.csv").string();
  CHECK(cmd_metrics(opts, out, err) != kOk);
  opts.front_b = (dir / "y.csv").string();
  opts.reference = "a:up:0";
  CHECK(cmd_metrics(opts, out, err) == kConfigError);
}

TEST_CASE("dissimilarity ablation") {
  const auto dir = scratch("ablate");
  auto j = toy_config();
  j["ablation"] = {{"backbone", {{"resolution_idx", 1}, {"blocks", {{0, 1, 1, 0}}}}}};
  const auto config = parse_run_config(j);
  const auto ev = make_evaluator(config);

  const auto single = run_dissim_ablation(*ev, config, {0.0});
  CHECK(single.arms.size() == 1);
  CHECK(single.pairs.empty());
  const auto both = run_dissim_ablation(*ev, config, {0.0, 1.0});
  CHECK(both.arms.size() == 2);
  CHECK(both.pairs.size() == 1);
  CHECK(both.backbone == *config.ablation.backbone);
  CHECK(both.arms[0].archive.size() > 0);

  AblateOptions opts;
  opts.config_path = write_config(dir, j);
  opts.out_dir = dir.string();
  opts.gammas = {0.0, 1.0};
  std::ostringstream out, err;
  REQUIRE(cmd_ablate_dissim(opts, out, err) == kOk);
  const auto doc = json::parse(slurp(dir / "ablation.json"));
  CHECK(doc["arms"].size() == 2);
  CHECK(doc["pairs"].size() == 1);
}
