#include "nestevo/archive_io.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

#include "nestevo/config.hpp"

namespace nestevo {

using nlohmann::json;

namespace {

json exits_to_json(const ExitGenome& x) { return {{"first_position", x.first_position}, {"bits", x.bit_string()}}; }

ExitGenome exits_from_json(const json& j) {
  ExitGenome x;
  x.first_position = j.at("first_position").get<int>();
  for (char c : j.at("bits").get<std::string>()) {
    if (c != '0' && c != '1') throw std::invalid_argument("exit bits must be 0 or 1");
    x.bits.push_back(c == '1' ? 1 : 0);
  }
  return x;
}

json dvfs_to_json(const DvfsGenome& f) {
  json j = {{"device", f.device}, {"compute_idx", f.compute_idx}};
  j["emc_idx"] = f.emc_idx ? json(*f.emc_idx) : json(nullptr);
  return j;
}

DvfsGenome dvfs_from_json(const json& j) {
  DvfsGenome f;
  f.device = j.at("device").get<std::string>();
  f.compute_idx = j.at("compute_idx").get<int>();
  if (!j.at("emc_idx").is_null()) f.emc_idx = j.at("emc_idx").get<int>();
  return f;
}

json static_to_json(const StaticScore& s) {
  return {{"accuracy", s.accuracy}, {"latency_ms", s.latency_ms}, {"energy_mj", s.energy_mj}};
}

StaticScore static_from_json(const json& j) {
  return {j.at("accuracy").get<double>(), j.at("latency_ms").get<double>(), j.at("energy_mj").get<double>()};
}

json dynamic_to_json(const DynamicScore& d) {
  return {{"scalar_d", d.scalar_d},
          {"mean_n", d.mean_n},
          {"mean_energy_ratio", d.mean_energy_ratio},
          {"mean_latency_ratio", d.mean_latency_ratio},
          {"mean_dissim", d.mean_dissim},
          {"effective_correctness", d.effective_correctness},
          {"n_exits", d.n_exits}};
}

DynamicScore dynamic_from_json(const json& j) {
  DynamicScore d;
  d.scalar_d = j.at("scalar_d").get<double>();
  d.mean_n = j.at("mean_n").get<double>();
  d.mean_energy_ratio = j.at("mean_energy_ratio").get<double>();
  d.mean_latency_ratio = j.at("mean_latency_ratio").get<double>();
  d.mean_dissim = j.at("mean_dissim").get<double>();
  d.effective_correctness = j.at("effective_correctness").get<double>();
  d.n_exits = j.at("n_exits").get<std::size_t>();
  return d;
}

template <typename T, typename Fn>
std::string join(const std::vector<T>& v, Fn&& fn) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out.push_back('-');
    out += fn(v[i]);
  }
  return out;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(std::move(cur));
  return out;
}

}  // namespace

json solution_to_json(const FinalSolution& s) {
  return {{"backbone", backbone_to_json(s.backbone)},
          {"exits", exits_to_json(s.exits)},
          {"dvfs", dvfs_to_json(s.dvfs)},
          {"static_score", static_to_json(s.static_score)},
          {"dynamic_score", dynamic_to_json(s.dynamic_score)},
          {"ioe_hypervolume", s.ioe_hypervolume},
          {"objectives", s.objectives().values()}};
}

FinalSolution solution_from_json(const json& j) {
  FinalSolution s;
  s.backbone = backbone_from_json(j.at("backbone"));
  s.exits = exits_from_json(j.at("exits"));
  s.dvfs = dvfs_from_json(j.at("dvfs"));
  s.static_score = static_from_json(j.at("static_score"));
  s.dynamic_score = dynamic_from_json(j.at("dynamic_score"));
  s.ioe_hypervolume = j.at("ioe_hypervolume").get<double>();
  return s;
}

json snapshot_to_json(const GenerationSnapshot& s) {
  json archive = json::array();
  for (const auto& sol : s.archive) archive.push_back(solution_to_json(sol));
  return {{"generation", s.generation},
          {"static_evaluations", s.static_evaluations},
          {"dynamic_evaluations", s.dynamic_evaluations},
          {"ioe_runs", s.ioe_runs},
          {"archive", std::move(archive)}};
}

GenerationSnapshot snapshot_from_json(const json& j) {
  GenerationSnapshot s;
  s.generation = j.at("generation").get<int>();
  s.static_evaluations = j.at("static_evaluations").get<std::uint64_t>();
  s.dynamic_evaluations = j.at("dynamic_evaluations").get<std::uint64_t>();
  s.ioe_runs = j.at("ioe_runs").get<std::uint64_t>();
  for (const auto& sol : j.at("archive")) s.archive.push_back(solution_from_json(sol));
  return s;
}

json archive_to_json(const ArchiveFile& a) {
  json snaps = json::array();
  for (const auto& s : a.snapshots) snaps.push_back(snapshot_to_json(s));
  json fin = json::array();
  for (const auto& s : a.final_archive) fin.push_back(solution_to_json(s));
  return {{"schema_version", a.schema_version},
          {"config_digest", a.config_digest},
          {"static_evaluations", a.static_evaluations},
          {"dynamic_evaluations", a.dynamic_evaluations},
          {"ioe_runs", a.ioe_runs},
          {"snapshots", std::move(snaps)},
          {"final_archive", std::move(fin)}};
}

ArchiveFile archive_from_json(const json& j) {
  ArchiveFile a;
  a.schema_version = j.at("schema_version").get<int>();
  if (a.schema_version != kArchiveSchemaVersion)
    throw std::invalid_argument("unsupported archive schema version " + std::to_string(a.schema_version));
  a.config_digest = j.at("config_digest").get<std::string>();
  a.static_evaluations = j.at("static_evaluations").get<std::uint64_t>();
  a.dynamic_evaluations = j.at("dynamic_evaluations").get<std::uint64_t>();
  a.ioe_runs = j.at("ioe_runs").get<std::uint64_t>();
  int prev = -1;
  for (const auto& s : j.at("snapshots")) {
    a.snapshots.push_back(snapshot_from_json(s));
    if (a.snapshots.back().generation <= prev) throw std::invalid_argument("archive snapshots are out of order");
    prev = a.snapshots.back().generation;
  }
  for (const auto& s : j.at("final_archive")) a.final_archive.push_back(solution_from_json(s));
  return a;
}

std::string dump_json(const json& j) { return j.dump(2) + "\n"; }

void atomic_write(const std::string& path, const std::string& content) {
  const std::filesystem::path target(path);
  if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
  const std::filesystem::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, target);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void save_archive(const std::string& path, const ArchiveFile& archive) {
  atomic_write(path, dump_json(archive_to_json(archive)));
}

ArchiveFile load_archive(const std::string& path) { return archive_from_json(json::parse(read_file(path))); }

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw std::out_of_range("no column named " + name);
}

double CsvTable::number(std::size_t row, const std::string& name) const {
  return parse_number(rows.at(row).at(column(name)));
}

std::string CsvTable::to_string() const {
  std::string out;
  auto line = [&out](const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out.push_back(',');
      out += fields[i];
    }
    out.push_back('\n');
  };
  line(header);
  for (const auto& r : rows) line(r);
  return out;
}

CsvTable CsvTable::parse(const std::string& text) {
  CsvTable t;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split(line, ',');
    if (first) {
      t.header = std::move(fields);
      first = false;
      continue;
    }
    if (fields.size() != t.header.size())
      throw std::invalid_argument("csv row has " + std::to_string(fields.size()) + " fields, header has " +
                                  std::to_string(t.header.size()));
    t.rows.push_back(std::move(fields));
  }
  if (first) throw std::invalid_argument("csv text has no header");
  return t;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  if (res.ec != std::errc()) throw std::runtime_error("cannot format number");
  return std::string(buf, res.ptr);
}

double parse_number(const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw std::invalid_argument("not a number: '" + s + "'");
  return v;
}

const std::vector<std::string> kFrontColumns = {
    "resolution",   "depths",       "widths",       "kernels",       "expands",
    "exits",        "exit_positions", "device",     "f_compute_ghz", "f_emc_ghz",
    "accuracy",     "latency_ms",   "energy_mj",    "mean_n",        "energy_ratio",
    "latency_ratio", "scalar_d",    "effective_correctness", "mean_dissim", "n_exits",
    "ioe_hv"};

std::string FrontRow::genome_key() const {
  return std::to_string(resolution) + "|" + depths + "|" + widths + "|" + kernels + "|" + expands + "|" + exits +
         "|" + device + "|" + format_double(f_compute_ghz) + "|" +
         (f_emc_ghz ? format_double(*f_emc_ghz) : std::string());
}

FrontRow front_row(const FinalSolution& s, const SearchSpaceSpec& space) {
  const auto& device = space.device(s.dvfs.device);
  auto val = [](const std::vector<int>& domain, int idx) { return std::to_string(domain.at(static_cast<std::size_t>(idx))); };
  const auto& blocks = s.backbone.blocks;
  FrontRow r;
  r.resolution = space.resolution_domain.at(static_cast<std::size_t>(s.backbone.resolution_idx));
  r.depths = join(blocks, [&](const BlockGene& b) { return val(space.depth_domain, b.depth_idx); });
  r.widths = join(blocks, [&](const BlockGene& b) { return val(space.width_domain, b.width_idx); });
  r.kernels = join(blocks, [&](const BlockGene& b) { return val(space.kernel_domain, b.kernel_idx); });
  r.expands = join(blocks, [&](const BlockGene& b) { return val(space.expand_domain, b.expand_idx); });
  r.exits = s.exits.bit_string();
  r.exit_positions = join(s.exits.sampled_positions(), [](int p) { return std::to_string(p); });
  r.device = s.dvfs.device;
  r.f_compute_ghz = s.dvfs.compute_ghz(device);
  if (device.has_emc()) r.f_emc_ghz = s.dvfs.memory_ghz(device);
  r.accuracy = s.static_score.accuracy;
  r.latency_ms = s.static_score.latency_ms;
  r.energy_mj = s.static_score.energy_mj;
  r.mean_n = s.dynamic_score.mean_n;
  r.energy_ratio = s.dynamic_score.mean_energy_ratio;
  r.latency_ratio = s.dynamic_score.mean_latency_ratio;
  r.scalar_d = s.dynamic_score.scalar_d;
  r.effective_correctness = s.dynamic_score.effective_correctness;
  r.mean_dissim = s.dynamic_score.mean_dissim;
  r.n_exits = s.dynamic_score.n_exits;
  r.ioe_hv = s.ioe_hypervolume;
  return r;
}

std::string front_csv(const std::vector<FrontRow>& rows) {
  CsvTable t;
  t.header = kFrontColumns;
  for (const auto& r : rows) {
    t.rows.push_back({std::to_string(r.resolution), r.depths, r.widths, r.kernels, r.expands, r.exits,
                      r.exit_positions, r.device, format_double(r.f_compute_ghz),
                      r.f_emc_ghz ? format_double(*r.f_emc_ghz) : std::string(), format_double(r.accuracy),
                      format_double(r.latency_ms), format_double(r.energy_mj), format_double(r.mean_n),
                      format_double(r.energy_ratio), format_double(r.latency_ratio), format_double(r.scalar_d),
                      format_double(r.effective_correctness), format_double(r.mean_dissim),
                      std::to_string(r.n_exits), format_double(r.ioe_hv)});
  }
  return t.to_string();
}

std::vector<FrontRow> parse_front_csv(const std::string& text) {
  const auto t = CsvTable::parse(text);
  if (t.header != kFrontColumns) throw std::invalid_argument("front csv header does not match the front schema");
  std::vector<FrontRow> out;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& f = t.rows[i];
    FrontRow r;
    r.resolution = static_cast<int>(parse_number(f[0]));
    r.depths = f[1];
    r.widths = f[2];
    r.kernels = f[3];
    r.expands = f[4];
    r.exits = f[5];
    r.exit_positions = f[6];
    r.device = f[7];
    r.f_compute_ghz = parse_number(f[8]);
    if (!f[9].empty()) r.f_emc_ghz = parse_number(f[9]);
    r.accuracy = parse_number(f[10]);
    r.latency_ms = parse_number(f[11]);
    r.energy_mj = parse_number(f[12]);
    r.mean_n = parse_number(f[13]);
    r.energy_ratio = parse_number(f[14]);
    r.latency_ratio = parse_number(f[15]);
    r.scalar_d = parse_number(f[16]);
    r.effective_correctness = parse_number(f[17]);
    r.mean_dissim = parse_number(f[18]);
    r.n_exits = static_cast<std::size_t>(parse_number(f[19]));
    r.ioe_hv = parse_number(f[20]);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace nestevo
