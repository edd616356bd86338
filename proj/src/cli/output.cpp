#include "cbsel/cli/output.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <fmt/format.h>

namespace cbsel::cli {

namespace {

std::string csv_field(const Cell& cell) {
  struct Visitor {
    std::string operator()(std::monostate) const { return {}; }
    std::string operator()(double v) const { return format_number(v); }
    std::string operator()(std::int64_t v) const { return fmt::format("{}", v); }
    std::string operator()(std::uint64_t v) const { return fmt::format("{}", v); }
    std::string operator()(const std::string& s) const {
      if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
      std::string quoted = "\"";
      for (char c : s) {
        if (c == '"') quoted += '"';
        quoted += c;
      }
      return quoted + '"';
    }
  };
  return std::visit(Visitor{}, cell);
}

nlohmann::json json_field(const Cell& cell) {
  struct Visitor {
    nlohmann::json operator()(std::monostate) const { return nullptr; }
    nlohmann::json operator()(double v) const {
      return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(format_number(v));
    }
    nlohmann::json operator()(std::int64_t v) const { return v; }
    nlohmann::json operator()(std::uint64_t v) const { return v; }
    nlohmann::json operator()(const std::string& s) const { return s; }
  };
  return std::visit(Visitor{}, cell);
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return fmt::format("{}", v);
}

std::string to_csv(const Table& table) {
  std::string out;
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (i) out += ',';
    out += csv_field(table.header[i]);
  }
  out += '\n';
  for (const auto& row : table.rows) {
    if (row.size() != table.header.size()) throw std::logic_error("row width does not match header");
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += csv_field(row[i]);
    }
    out += '\n';
  }
  return out;
}

nlohmann::json to_json(const Table& table) {
  auto out = nlohmann::json::array();
  for (const auto& row : table.rows) {
    if (row.size() != table.header.size()) throw std::logic_error("row width does not match header");
    nlohmann::json obj = nlohmann::json::object();
    for (std::size_t i = 0; i < row.size(); ++i) obj[table.header[i]] = json_field(row[i]);
    out.push_back(std::move(obj));
  }
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
  out << text;
  if (!out) throw std::runtime_error(fmt::format("write failed: {}", path.string()));
}

void write_json(const std::filesystem::path& path, const nlohmann::json& value) {
  write_text(path, value.dump(2) + "\n");
}

std::string write_table(const std::filesystem::path& dir, const std::string& stem,
                        const Table& table, OutputFormat format) {
  if (format == OutputFormat::Csv) {
    const std::string name = stem + ".csv";
    write_text(dir / name, to_csv(table));
    return name;
  }
  const std::string name = stem + ".json";
  write_json(dir / name, to_json(table));
  return name;
}

nlohmann::json to_json(const ScenarioConfig& c) {
  return {
      {"num_candidates", c.num_candidates},
      {"num_selected", c.num_selected},
      {"group_size", c.group_size},
      {"disk_radius_wavelengths", c.disk_radius_wavelengths},
      {"intended_direction_deg", c.intended_direction_deg},
      {"unintended_directions_deg", c.unintended_directions_deg},
      {"eta_thr_linear", c.eta_thr_linear},
      {"eta_thr_per_bs_linear", c.eta_thr_per_bs_linear},
      {"target_snr_linear", c.target_snr_linear},
      {"noise_power_linear", c.noise_power_linear},
      {"lognormal_mean_np", c.lognormal_mean_np},
      {"lognormal_var_np2", c.lognormal_var_np2},
      {"node_distribution",
       c.node_distribution == NodeDistribution::UniformDisk ? "uniform_disk" : "gaussian_disk"},
      {"seed", c.seed},
      {"unintended_from_average_peaks", c.unintended_from_average_peaks},
      {"rotate_targets", c.rotate_targets},
  };
}

}  // namespace cbsel::cli
