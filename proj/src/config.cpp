#include "nestevo/config.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "nestevo/error.hpp"

namespace nestevo {

using nlohmann::json;

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
}

template <typename T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

// Either an explicit list or {"min", "max", "levels"} evenly spaced.
template <typename T>
void read_levels(const json& j, const char* key, std::vector<T>& out, const std::string& where) {
  if (!j.contains(key)) return;
  const json& v = j.at(key);
  if (v.is_object()) {
    check_keys(v, {"min", "max", "levels"}, where + "." + key);
    if (!v.contains("min") || !v.contains("max") || !v.contains("levels"))
      throw ConfigError(where + "." + key + " needs min, max and levels");
    const int levels = v.at("levels").get<int>();
    if constexpr (std::is_integral_v<T>) {
      out = integer_levels(v.at("min").get<int>(), v.at("max").get<int>(), levels);
    } else {
      out = frequency_levels(v.at("min").get<double>(), v.at("max").get<double>(), levels);
    }
    return;
  }
  read(j, key, out, where);
}

DeviceSpec parse_device(const json& j) {
  check_keys(j, {"name", "compute_ghz", "emc_ghz", "default_compute_idx", "default_emc_idx"}, "device");
  DeviceSpec d;
  read(j, "name", d.name, "device");
  read_levels(j, "compute_ghz", d.compute_freq_ghz, "device " + d.name);
  read_levels(j, "emc_ghz", d.emc_freq_ghz, "device " + d.name);
  d.default_compute_idx = d.compute_freq_ghz.empty() ? 0 : d.compute_freq_ghz.size() - 1;
  d.default_emc_idx = d.emc_freq_ghz.empty() ? 0 : d.emc_freq_ghz.size() - 1;
  read(j, "default_compute_idx", d.default_compute_idx, "device " + d.name);
  read(j, "default_emc_idx", d.default_emc_idx, "device " + d.name);
  return d;
}

json device_to_json(const DeviceSpec& d) {
  return {{"name", d.name},
          {"compute_ghz", d.compute_freq_ghz},
          {"emc_ghz", d.emc_freq_ghz},
          {"default_compute_idx", d.default_compute_idx},
          {"default_emc_idx", d.default_emc_idx}};
}

VariationParams parse_variation(const json& j, const std::string& where) {
  check_keys(j, {"mutation_prob_per_gene", "crossover_prob", "tournament_size"}, where);
  VariationParams v;
  read(j, "mutation_prob_per_gene", v.mutation_prob_per_gene, where);
  read(j, "crossover_prob", v.crossover_prob, where);
  read(j, "tournament_size", v.tournament_size, where);
  return v;
}

json variation_to_json(const VariationParams& v) {
  return {{"mutation_prob_per_gene", v.mutation_prob_per_gene},
          {"crossover_prob", v.crossover_prob},
          {"tournament_size", v.tournament_size}};
}

}  // namespace

json backbone_to_json(const BackboneGenome& b) {
  json blocks = json::array();
  for (const auto& blk : b.blocks) blocks.push_back({blk.depth_idx, blk.width_idx, blk.kernel_idx, blk.expand_idx});
  return {{"resolution_idx", b.resolution_idx}, {"blocks", std::move(blocks)}};
}

BackboneGenome backbone_from_json(const json& j) {
  check_keys(j, {"resolution_idx", "blocks"}, "backbone");
  BackboneGenome b;
  b.resolution_idx = j.at("resolution_idx").get<int>();
  for (const auto& blk : j.at("blocks")) {
    const auto g = blk.get<std::vector<int>>();
    if (g.size() != 4) throw StructuralError("backbone block must have 4 genes (depth, width, kernel, expand)");
    b.blocks.push_back({g[0], g[1], g[2], g[3]});
  }
  return b;
}

void RunConfig::validate() const {
  try {
    space.validate();
    (void)space.device(device);
    surrogate.validate();
    ooe.validate();
    if (backend.kind == BackendConfig::Kind::Synthetic) {
      backend.synthetic.validate();
    } else {
      if (!std::filesystem::exists(backend.table_path))
        throw ConfigError("lookup table not found: " + backend.table_path);
      if (!(backend.synthetic.exit_overhead_fraction >= 0.0))
        throw ConfigError("exit_overhead_fraction must be nonnegative");
    }
    if (enumerate_cap == 0) throw ConfigError("enumerate_cap must be positive");
    for (double g : ablation.gammas)
      if (!(g >= 0.0)) throw ConfigError("ablation gammas must be >= 0");
    if (ablation.backbone && !ablation.backbone->is_valid(space))
      throw ConfigError("ablation backbone is not valid in the search space");
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
}

RunConfig parse_run_config(const json& j, const std::string& base_dir) {
  check_keys(j, {"seed", "device", "output_dir", "enumerate_cap", "space", "backend", "surrogate", "ooe", "ioe",
                 "ablation"},
             "config");
  RunConfig c;
  if (!j.contains("seed") || !j.at("seed").is_number_integer() || j.at("seed").get<std::int64_t>() < 0)
    throw ConfigError("config.seed is mandatory and must be a nonnegative integer");
  c.seed = j.at("seed").get<std::uint64_t>();
  read(j, "device", c.device, "config");
  read(j, "output_dir", c.output_dir, "config");
  read(j, "enumerate_cap", c.enumerate_cap, "config");

  if (j.contains("space")) {
    const json& s = j.at("space");
    check_keys(s, {"n_block", "resolution", "depth", "width", "kernel", "expand", "exit_min_position", "devices"},
               "space");
    read(s, "n_block", c.space.n_block, "space");
    read_levels(s, "resolution", c.space.resolution_domain, "space");
    read_levels(s, "depth", c.space.depth_domain, "space");
    read_levels(s, "width", c.space.width_domain, "space");
    read_levels(s, "kernel", c.space.kernel_domain, "space");
    read_levels(s, "expand", c.space.expand_domain, "space");
    read(s, "exit_min_position", c.space.exit_min_position, "space");
    if (s.contains("devices")) {
      c.space.devices.clear();
      for (const auto& d : s.at("devices")) c.space.devices.push_back(parse_device(d));
    }
  }

  if (j.contains("backend")) {
    const json& b = j.at("backend");
    check_keys(b, {"kind", "kappa_compute", "kappa_memory", "p0", "p1", "p2", "exit_overhead_fraction", "path"},
               "backend");
    std::string kind = "synthetic";
    read(b, "kind", kind, "backend");
    if (kind == "synthetic") {
      c.backend.kind = BackendConfig::Kind::Synthetic;
      if (b.contains("path")) throw ConfigError("backend.path is only valid for the table backend");
    } else if (kind == "table") {
      c.backend.kind = BackendConfig::Kind::Table;
      if (!b.contains("path")) throw ConfigError("table backend needs backend.path");
      for (const char* k : {"kappa_compute", "kappa_memory", "p0", "p1", "p2"})
        if (b.contains(k)) throw ConfigError(std::string("backend.") + k + " is only valid for the synthetic backend");
      const std::filesystem::path p = b.at("path").get<std::string>();
      c.backend.table_path = (p.is_absolute() ? p : std::filesystem::path(base_dir) / p).lexically_normal().string();
    } else {
      throw ConfigError("backend.kind must be 'synthetic' or 'table'");
    }
    auto& h = c.backend.synthetic;
    read(b, "kappa_compute", h.kappa_compute, "backend");
    read(b, "kappa_memory", h.kappa_memory, "backend");
    read(b, "p0", h.p0, "backend");
    read(b, "p1", h.p1, "backend");
    read(b, "p2", h.p2, "backend");
    read(b, "exit_overhead_fraction", h.exit_overhead_fraction, "backend");
  }

  if (j.contains("surrogate")) {
    const json& s = j.at("surrogate");
    check_keys(s, {"a_max", "lambda", "noise_eps", "sigmoid_slope", "sigmoid_midpoint", "seed"}, "surrogate");
    read(s, "a_max", c.surrogate.a_max, "surrogate");
    read(s, "lambda", c.surrogate.lambda, "surrogate");
    read(s, "noise_eps", c.surrogate.noise_eps, "surrogate");
    read(s, "sigmoid_slope", c.surrogate.sigmoid_slope, "surrogate");
    read(s, "sigmoid_midpoint", c.surrogate.sigmoid_midpoint, "surrogate");
    read(s, "seed", c.surrogate_seed, "surrogate");
  }

  if (j.contains("ooe")) {
    const json& o = j.at("ooe");
    check_keys(o, {"generations", "population", "budget", "prune_fraction", "threads", "variation"}, "ooe");
    read(o, "generations", c.ooe.generations, "ooe");
    read(o, "population", c.ooe.population, "ooe");
    read(o, "budget", c.ooe.budget, "ooe");
    read(o, "prune_fraction", c.ooe.prune_fraction, "ooe");
    read(o, "threads", c.ooe.threads, "ooe");
    if (o.contains("variation")) c.ooe.variation = parse_variation(o.at("variation"), "ooe.variation");
  }

  if (j.contains("ioe")) {
    const json& i = j.at("ioe");
    check_keys(i, {"generations", "population", "budget", "gamma", "objective_mode", "variation"}, "ioe");
    auto& ioe = c.ooe.ioe;
    read(i, "generations", ioe.generations, "ioe");
    read(i, "population", ioe.population, "ioe");
    read(i, "budget", ioe.budget, "ioe");
    read(i, "gamma", ioe.gamma, "ioe");
    std::string mode = "vector";
    read(i, "objective_mode", mode, "ioe");
    if (mode == "vector") {
      ioe.objective_mode = ObjectiveMode::Vector;
    } else if (mode == "scalar") {
      ioe.objective_mode = ObjectiveMode::Scalar;
    } else {
      throw ConfigError("ioe.objective_mode must be 'vector' or 'scalar'");
    }
    if (i.contains("variation")) ioe.variation = parse_variation(i.at("variation"), "ioe.variation");
  }

  if (j.contains("ablation")) {
    const json& a = j.at("ablation");
    check_keys(a, {"gammas", "backbone", "backbone_seed"}, "ablation");
    read(a, "gammas", c.ablation.gammas, "ablation");
    if (a.contains("backbone")) c.ablation.backbone = backbone_from_json(a.at("backbone"));
    if (a.contains("backbone_seed")) c.ablation.backbone_seed = a.at("backbone_seed").get<std::uint64_t>();
  }

  c.ooe.seed = c.seed;
  c.validate();
  return c;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file " + path + " is not valid JSON: " + e.what());
  }
  const auto dir = std::filesystem::path(path).parent_path();
  return parse_run_config(j, dir.empty() ? "." : dir.string());
}

json canonical_json(const RunConfig& c) {
  json devices = json::array();
  for (const auto& d : c.space.devices) devices.push_back(device_to_json(d));
  json backend;
  if (c.backend.kind == BackendConfig::Kind::Synthetic) {
    const auto& h = c.backend.synthetic;
    backend = {{"kind", "synthetic"},     {"kappa_compute", h.kappa_compute}, {"kappa_memory", h.kappa_memory},
               {"p0", h.p0},              {"p1", h.p1},                       {"p2", h.p2},
               {"exit_overhead_fraction", h.exit_overhead_fraction}};
  } else {
    backend = {{"kind", "table"},
               {"path", c.backend.table_path},
               {"exit_overhead_fraction", c.backend.synthetic.exit_overhead_fraction}};
  }
  const auto& ioe = c.ooe.ioe;
  json ablation = {{"gammas", c.ablation.gammas}};
  if (c.ablation.backbone) ablation["backbone"] = backbone_to_json(*c.ablation.backbone);
  if (c.ablation.backbone_seed) ablation["backbone_seed"] = *c.ablation.backbone_seed;
  return {
      {"seed", c.seed},
      {"device", c.device},
      {"enumerate_cap", c.enumerate_cap},
      {"space",
       {{"n_block", c.space.n_block},
        {"resolution", c.space.resolution_domain},
        {"depth", c.space.depth_domain},
        {"width", c.space.width_domain},
        {"kernel", c.space.kernel_domain},
        {"expand", c.space.expand_domain},
        {"exit_min_position", c.space.exit_min_position},
        {"devices", devices}}},
      {"backend", backend},
      {"surrogate",
       {{"a_max", c.surrogate.a_max},
        {"lambda", c.surrogate.lambda},
        {"noise_eps", c.surrogate.noise_eps},
        {"sigmoid_slope", c.surrogate.sigmoid_slope},
        {"sigmoid_midpoint", c.surrogate.sigmoid_midpoint},
        {"seed", c.surrogate_seed}}},
      {"ooe",
       {{"generations", c.ooe.generations},
        {"population", c.ooe.population},
        {"budget", c.ooe.budget},
        {"prune_fraction", c.ooe.prune_fraction},
        {"variation", variation_to_json(c.ooe.variation)}}},
      {"ioe",
       {{"generations", ioe.generations},
        {"population", ioe.population},
        {"budget", ioe.budget},
        {"gamma", ioe.gamma},
        {"objective_mode", ioe.objective_mode == ObjectiveMode::Vector ? "vector" : "scalar"},
        {"variation", variation_to_json(ioe.variation)}}},
      {"ablation", ablation},
  };
}

std::string config_digest(const RunConfig& config) {
  const std::string text = canonical_json(config).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::unique_ptr<Evaluator> make_evaluator(const RunConfig& config) {
  std::shared_ptr<const HardwareBackend> backend;
  if (config.backend.kind == BackendConfig::Kind::Synthetic) {
    backend = std::make_shared<SyntheticBackend>(config.backend.synthetic);
  } else {
    backend = std::make_shared<TableBackend>(TableBackend::load(config.backend.table_path));
  }
  return std::make_unique<Evaluator>(config.space, config.device, std::move(backend), config.surrogate,
                                     config.backend.synthetic.exit_overhead_fraction, config.surrogate_seed);
}

}  // namespace nestevo
