#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nestevo/ooe.hpp"

namespace nestevo {

constexpr int kArchiveSchemaVersion = 1;

struct ArchiveFile {
  int schema_version = kArchiveSchemaVersion;
  std::string config_digest;
  std::vector<GenerationSnapshot> snapshots;
  std::vector<FinalSolution> final_archive;
  std::uint64_t static_evaluations = 0;
  std::uint64_t dynamic_evaluations = 0;
  std::uint64_t ioe_runs = 0;

  bool operator==(const ArchiveFile&) const = default;
};

nlohmann::json solution_to_json(const FinalSolution& s);
FinalSolution solution_from_json(const nlohmann::json& j);
nlohmann::json snapshot_to_json(const GenerationSnapshot& s);
GenerationSnapshot snapshot_from_json(const nlohmann::json& j);
nlohmann::json archive_to_json(const ArchiveFile& a);
ArchiveFile archive_from_json(const nlohmann::json& j);

/// Pretty-printed JSON with a trailing newline.
std::string dump_json(const nlohmann::json& j);

/// Writes to a sibling temporary file and renames it into place.
void atomic_write(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

void save_archive(const std::string& path, const ArchiveFile& archive);
ArchiveFile load_archive(const std::string& path);

/// Plain comma-separated table without quoting; fields never contain commas.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Throws std::out_of_range for an unknown column.
  std::size_t column(const std::string& name) const;
  double number(std::size_t row, const std::string& name) const;

  std::string to_string() const;
  static CsvTable parse(const std::string& text);
};

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);
double parse_number(const std::string& s);

/// One plot-ready line per final solution, with decoded genome values.
struct FrontRow {
  int resolution = 0;
  std::string depths;
  std::string widths;
  std::string kernels;
  std::string expands;
  std::string exits;
  std::string exit_positions;
  std::string device;
  double f_compute_ghz = 0.0;
  std::optional<double> f_emc_ghz;
  double accuracy = 0.0;
  double latency_ms = 0.0;
  double energy_mj = 0.0;
  double mean_n = 0.0;
  double energy_ratio = 0.0;
  double latency_ratio = 0.0;
  double scalar_d = 0.0;
  double effective_correctness = 0.0;
  double mean_dissim = 0.0;
  std::size_t n_exits = 0;
  double ioe_hv = 0.0;

  bool operator==(const FrontRow&) const = default;
  /// Genome identity: every field that encodes (b, x, f).
  std::string genome_key() const;
};

extern const std::vector<std::string> kFrontColumns;

FrontRow front_row(const FinalSolution& s, const SearchSpaceSpec& space);
std::string front_csv(const std::vector<FrontRow>& rows);
std::vector<FrontRow> parse_front_csv(const std::string& text);

}  // namespace nestevo
