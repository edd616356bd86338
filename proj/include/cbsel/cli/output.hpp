#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "cbsel/cli/config.hpp"

namespace cbsel::cli {

/// One table cell; monostate is an empty field (JSON null).
using Cell = std::variant<std::monostate, double, std::int64_t, std::uint64_t, std::string>;

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<Cell>> rows;
};

/// Shortest decimal that parses back to the same double; "nan"/"inf" for
/// non-finite values.
std::string format_number(double v);

/// RFC 4180 style: comma separated, header row, LF line endings.
std::string to_csv(const Table& table);

/// Array of objects keyed by the header.
nlohmann::json to_json(const Table& table);

/// Writes stem.csv or stem.json into `dir`; returns the file name.
std::string write_table(const std::filesystem::path& dir, const std::string& stem,
                        const Table& table, OutputFormat format);

/// Writes `text` byte for byte (binary mode, no newline translation).
void write_text(const std::filesystem::path& path, const std::string& text);

/// Pretty-printed JSON with a trailing newline.
void write_json(const std::filesystem::path& path, const nlohmann::json& value);

/// Scenario in configuration units, for sidecars and manifests.
nlohmann::json to_json(const ScenarioConfig& config);

}  // namespace cbsel::cli
