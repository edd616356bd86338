#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cbsel/core.hpp"
#include "cbsel/montecarlo.hpp"

namespace cbsel::cli {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class OutputFormat { Csv, Json };

/// [scenario] in configuration units: angles in degrees, powers linear
/// (dB keys are converted once at parse time).
struct ScenarioConfig {
  std::size_t num_candidates = 512;
  std::size_t num_selected = 256;
  std::size_t group_size = 32;
  double disk_radius_wavelengths = 2.0;
  double intended_direction_deg = 0.0;
  std::vector<double> unintended_directions_deg;
  double eta_thr_linear = 10.0;
  std::vector<double> eta_thr_per_bs_linear;
  double target_snr_linear = 100.0;
  double noise_power_linear = 1.0;
  double lognormal_mean_np = 0.0;
  double lognormal_var_np2 = 0.2;
  NodeDistribution node_distribution = NodeDistribution::UniformDisk;
  std::uint64_t seed = 1;
  // > 0: replace the unintended directions by this many highest sidelobe
  // peaks of the average beampattern.
  std::size_t unintended_from_average_peaks = 0;
  // Run one selection per BS, each steering to it with all others as victims.
  bool rotate_targets = false;

  bool operator==(const ScenarioConfig&) const = default;
};

struct SweepConfig {
  SweepAxis axis = SweepAxis::InrThreshold;
  std::vector<double> values;  // eta axis linear
  std::optional<SweepAxis> series_axis;
  std::vector<double> series_values;
  std::size_t runs_per_point = 1000;
  ChannelMode mode = ChannelMode::FixedPerRealization;
  std::uint64_t seed_base = 1;
  std::size_t max_trials = 0;
  std::optional<double> prediction_cap;
  std::size_t active_clusters = 1;
  InrMeasure measure = InrMeasure::SymbolAveraged;
  std::vector<double> ccdf_levels_linear;

  bool operator==(const SweepConfig&) const = default;
};

struct OutputConfig {
  OutputFormat format = OutputFormat::Csv;
  std::size_t angle_grid_points = 3601;
  std::size_t average_realizations = 200;

  bool operator==(const OutputConfig&) const = default;
};

struct RunConfig {
  ScenarioConfig scenario;
  std::optional<SweepConfig> sweep;
  OutputConfig output;

  bool operator==(const RunConfig&) const = default;
};

/// Parses INI text. Unknown sections/keys, malformed values, and keys given
/// in both dB and linear form raise ConfigError. `overrides` are
/// "section.key=value" strings applied on top of the file; an override of
/// one unit variant replaces the other.
RunConfig parse_config(const std::string& text, const std::vector<std::string>& overrides = {});
RunConfig load_config(const std::filesystem::path& path,
                      const std::vector<std::string>& overrides = {});

/// Normalized INI text: every key present, linear units, shortest
/// round-trip numbers. parse_config(serialize_config(c)) == c.
std::string serialize_config(const RunConfig& config);

/// Scenario parameters in internal units (radians). Throws ConfigError if
/// the result is not a valid scenario.
ScenarioParams to_params(const ScenarioConfig& config);
Scenario to_scenario(const ScenarioConfig& config);

/// SweepSpec for one series value (nullopt: no series axis).
SweepSpec to_sweep_spec(const RunConfig& config, std::optional<double> series_value = {});

/// Parses "a, b, c" or the range form "start:stop:count" (inclusive).
std::vector<double> parse_number_list(const std::string& text);

SweepAxis parse_axis(const std::string& name);

/// Path of a shipped preset, e.g. preset_path("fig6").
std::filesystem::path preset_path(const std::string& name);

}  // namespace cbsel::cli
