#pragma once

// Result tables: a CSV body with a '#'-prefixed header block and a JSON
// sidecar echoing the configuration.

#include "cvrep/experiments.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cvrep {

inline constexpr int kSchemaVersion = 1;

struct Column {
  std::string name;
  std::string unit;  // "1" for dimensionless
};

struct Table {
  std::vector<Column> columns;
  std::vector<std::vector<std::string>> rows;

  /// Throws std::logic_error if the row width does not match the columns.
  void add_row(std::vector<std::string> cells);
};

/// "%.10g"; non-finite values are rejected.
std::string format_number(double x);
/// Empty cell for std::nullopt.
std::string format_number(const std::optional<double>& x);
/// Values joined with ';'.
std::string format_list(const std::vector<double>& xs);

/// Columns shared by keyrate, bounds and optimize tables.
Table result_table(const std::vector<ResultRow>& rows);

/// SHA-1 of "blob <size>\0<content>", as `git hash-object` computes it.
std::string git_blob_sha1(std::string_view content);

/// Column header line plus data lines, no '#' block.
std::string csv_body(const Table& table);
std::string render_csv(const Table& table, const std::string& config_hash);

struct WrittenOutput {
  std::filesystem::path csv;
  std::filesystem::path sidecar;
  std::string config_hash;
  std::string body_hash;
};

/// Writes `path` and `path` + ".json". The config hash covers config.dump().
WrittenOutput write_outputs(const std::filesystem::path& path, const Table& table, const nlohmann::json& config,
                            const nlohmann::json& summary);

}  // namespace cvrep
