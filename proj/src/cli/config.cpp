#include "cbsel/cli/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>
#include <fmt/ranges.h>

#include "cbsel/units.hpp"

#ifndef CBSEL_PRESET_DIR
#define CBSEL_PRESET_DIR "presets"
#endif

namespace cbsel::cli {

namespace pt = boost::property_tree;

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

double parse_double(const std::string& raw, const std::string& key) {
  const std::string s = trim(raw);
  if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError(fmt::format("{}: '{}' is not a number", key, raw));
  }
  return v;
}

std::uint64_t parse_u64(const std::string& raw, const std::string& key) {
  const std::string s = trim(raw);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError(fmt::format("{}: '{}' is not a non-negative integer", key, raw));
  }
  return v;
}

std::size_t parse_count(const std::string& raw, const std::string& key) {
  return static_cast<std::size_t>(parse_u64(raw, key));
}

bool parse_bool(const std::string& raw, const std::string& key) {
  const std::string s = trim(raw);
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw ConfigError(fmt::format("{}: expected true or false, got '{}'", key, raw));
}

std::string number(double v) { return fmt::format("{}", v); }

std::string number_list(const std::vector<double>& vs) {
  std::vector<std::string> parts;
  parts.reserve(vs.size());
  for (double v : vs) parts.push_back(number(v));
  return fmt::format("{}", fmt::join(parts, ", "));
}

std::vector<double> to_linear(std::vector<double> dbs) {
  for (double& v : dbs) v = db_to_linear(v);
  return dbs;
}

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"scenario",
       {"num_candidates", "num_selected", "group_size", "disk_radius_wavelengths",
        "intended_direction_deg", "unintended_directions_deg", "eta_thr_db", "eta_thr_linear",
        "eta_thr_per_bs_db", "eta_thr_per_bs_linear", "target_snr_db", "target_snr_linear",
        "noise_power_db", "noise_power_linear", "lognormal_mean_np", "lognormal_var_np2",
        "node_distribution", "seed", "unintended_from_average_peaks", "rotate_targets"}},
      {"sweep",
       {"axis", "values", "values_db", "values_linear", "series_axis", "series_values",
        "series_values_db", "series_values_linear", "runs_per_point", "mode", "seed_base",
        "max_trials", "prediction_cap", "active_clusters", "measure", "ccdf_levels_linear"}},
      {"output", {"format", "angle_grid_points", "average_realizations"}},
  };
  return keys;
}

// Keys that name the same quantity in different units.
std::vector<std::string> unit_siblings(const std::string& key) {
  for (const std::string suffix : {"_db", "_linear"}) {
    if (key.size() > suffix.size() && key.ends_with(suffix)) {
      const std::string stem = key.substr(0, key.size() - suffix.size());
      if (stem == "values" || stem == "series_values") return {stem + "_db", stem + "_linear", stem};
      return {stem + "_db", stem + "_linear"};
    }
  }
  if (key == "values" || key == "series_values") return {key, key + "_db", key + "_linear"};
  return {key};
}

void apply_override(pt::ptree& tree, const std::string& text) {
  const auto eq = text.find('=');
  const auto dot = text.find('.');
  if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
    throw ConfigError(fmt::format("override '{}' is not section.key=value", text));
  }
  const std::string section = trim(text.substr(0, dot));
  const std::string key = trim(text.substr(dot + 1, eq - dot - 1));
  const auto known = schema().find(section);
  if (known == schema().end() || !known->second.contains(key)) {
    throw ConfigError(fmt::format("override '{}' names an unknown key", text));
  }
  const pt::ptree::path_type path(section, '\0');
  if (tree.find(section) == tree.not_found()) tree.add_child(path, pt::ptree());
  pt::ptree& target = tree.get_child(path);
  for (const auto& sibling : unit_siblings(key)) target.erase(sibling);
  target.put(pt::ptree::path_type(key, '\0'), trim(text.substr(eq + 1)));
}

class Section {
 public:
  Section(const pt::ptree* tree, std::string name) : tree_(tree), name_(std::move(name)) {}

  std::optional<std::string> get(const std::string& key) const {
    if (!tree_) return std::nullopt;
    auto v = tree_->get_optional<std::string>(pt::ptree::path_type(key, '\0'));
    if (!v) return std::nullopt;
    return *v;
  }

  std::string qualified(const std::string& key) const { return name_ + "." + key; }

  template <class T, class Parse>
  void read(const std::string& key, T& out, Parse parse) const {
    if (auto v = get(key)) out = parse(*v, qualified(key));
  }

  // Reads a quantity that may be given as <stem>_db or <stem>_linear.
  void read_power(const std::string& stem, double& out) const {
    const auto db = get(stem + "_db");
    const auto lin = get(stem + "_linear");
    if (db && lin) throw ConfigError(fmt::format("{}: give either _db or _linear, not both", qualified(stem)));
    if (db) out = db_to_linear(parse_double(*db, qualified(stem + "_db")));
    if (lin) out = parse_double(*lin, qualified(stem + "_linear"));
  }

  void read_power_list(const std::string& stem, std::vector<double>& out) const {
    const auto db = get(stem + "_db");
    const auto lin = get(stem + "_linear");
    if (db && lin) throw ConfigError(fmt::format("{}: give either _db or _linear, not both", qualified(stem)));
    if (db) out = to_linear(list(*db, stem + "_db"));
    if (lin) out = list(*lin, stem + "_linear");
  }

  std::vector<double> list(const std::string& raw, const std::string& key) const {
    try {
      return parse_number_list(raw);
    } catch (const ConfigError& e) {
      throw ConfigError(fmt::format("{}: {}", qualified(key), e.what()));
    }
  }

 private:
  const pt::ptree* tree_;
  std::string name_;
};

NodeDistribution parse_distribution(const std::string& raw, const std::string& key) {
  const std::string s = trim(raw);
  if (s == "uniform_disk") return NodeDistribution::UniformDisk;
  if (s == "gaussian_disk") return NodeDistribution::GaussianDisk;
  throw ConfigError(fmt::format("{}: expected uniform_disk or gaussian_disk, got '{}'", key, raw));
}

ChannelMode parse_mode(const std::string& raw, const std::string& key) {
  const std::string s = trim(raw);
  if (s == "fixed_channel") return ChannelMode::FixedPerRealization;
  if (s == "redraw_per_trial") return ChannelMode::RedrawPerTrial;
  throw ConfigError(fmt::format("{}: expected fixed_channel or redraw_per_trial, got '{}'", key, raw));
}

InrMeasure parse_measure(const std::string& raw, const std::string& key) {
  const std::string s = trim(raw);
  if (s == "symbol_averaged") return InrMeasure::SymbolAveraged;
  if (s == "instantaneous") return InrMeasure::Instantaneous;
  throw ConfigError(fmt::format("{}: expected symbol_averaged or instantaneous, got '{}'", key, raw));
}

OutputFormat parse_format(const std::string& raw, const std::string& key) {
  const std::string s = trim(raw);
  if (s == "csv") return OutputFormat::Csv;
  if (s == "json") return OutputFormat::Json;
  throw ConfigError(fmt::format("{}: expected csv or json, got '{}'", key, raw));
}

std::string distribution_name(NodeDistribution d) {
  return d == NodeDistribution::UniformDisk ? "uniform_disk" : "gaussian_disk";
}

std::string mode_name(ChannelMode m) {
  return m == ChannelMode::FixedPerRealization ? "fixed_channel" : "redraw_per_trial";
}

std::string measure_name(InrMeasure m) {
  return m == InrMeasure::SymbolAveraged ? "symbol_averaged" : "instantaneous";
}

// Axis values: eta in linear/dB keys, integer axes in the bare key.
void read_axis_values(const Section& s, const std::string& stem, SweepAxis axis,
                      std::vector<double>& out) {
  if (axis == SweepAxis::InrThreshold) {
    if (s.get(stem)) {
      throw ConfigError(fmt::format("{}: the eta_thr axis needs {}_db or {}_linear",
                                    s.qualified(stem), stem, stem));
    }
    s.read_power_list(stem, out);
    return;
  }
  if (s.get(stem + "_db") || s.get(stem + "_linear")) {
    throw ConfigError(fmt::format("{}: unit suffix only applies to the eta_thr axis", s.qualified(stem)));
  }
  if (auto v = s.get(stem)) out = s.list(*v, stem);
}

void check_keys(const pt::ptree& tree) {
  for (const auto& [section, body] : tree) {
    const auto known = schema().find(section);
    if (known == schema().end()) throw ConfigError(fmt::format("unknown section [{}]", section));
    if (!body.data().empty()) throw ConfigError(fmt::format("stray value outside a section: {}", section));
    for (const auto& [key, value] : body) {
      if (!known->second.contains(key)) {
        throw ConfigError(fmt::format("unknown key {}.{}", section, key));
      }
    }
  }
}

}  // namespace

std::vector<double> parse_number_list(const std::string& text) {
  const std::string s = trim(text);
  if (s.empty()) return {};
  if (s.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream in(s);
    for (std::string part; std::getline(in, part, ':');) parts.push_back(part);
    if (parts.size() != 3) throw ConfigError(fmt::format("range '{}' must be start:stop:count", text));
    const double start = parse_double(parts[0], "range start");
    const double stop = parse_double(parts[1], "range stop");
    const std::size_t count = parse_count(parts[2], "range count");
    if (count == 0) throw ConfigError("range count must be positive");
    std::vector<double> out(count);
    for (std::size_t i = 0; i < count; ++i) {
      out[i] = count == 1 ? start
                          : start + (stop - start) * static_cast<double>(i) /
                                        static_cast<double>(count - 1);
    }
    out.back() = count == 1 ? start : stop;
    return out;
  }
  std::vector<double> out;
  std::stringstream in(s);
  for (std::string part; std::getline(in, part, ',');) out.push_back(parse_double(part, "list entry"));
  return out;
}

SweepAxis parse_axis(const std::string& raw) {
  const std::string s = trim(raw);
  for (SweepAxis a : {SweepAxis::InrThreshold, SweepAxis::GroupSize, SweepAxis::NumUnintended,
                      SweepAxis::ActiveClusters, SweepAxis::NumSelected}) {
    if (s == axis_name(a)) return a;
  }
  throw ConfigError(fmt::format("unknown sweep axis '{}' (eta_thr, L, D, K, N)", raw));
}

RunConfig parse_config(const std::string& text, const std::vector<std::string>& overrides) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(fmt::format("malformed configuration: {}", e.message()));
  }
  check_keys(tree);
  for (const auto& o : overrides) apply_override(tree, o);

  auto section = [&](const std::string& name) {
    const auto it = tree.find(name);
    return Section(it == tree.not_found() ? nullptr : &it->second, name);
  };

  RunConfig cfg;
  {
    auto& c = cfg.scenario;
    const Section s = section("scenario");
    s.read("num_candidates", c.num_candidates, parse_count);
    s.read("num_selected", c.num_selected, parse_count);
    s.read("group_size", c.group_size, parse_count);
    s.read("disk_radius_wavelengths", c.disk_radius_wavelengths, parse_double);
    s.read("intended_direction_deg", c.intended_direction_deg, parse_double);
    if (auto v = s.get("unintended_directions_deg")) {
      c.unintended_directions_deg = s.list(*v, "unintended_directions_deg");
    }
    s.read_power("eta_thr", c.eta_thr_linear);
    s.read_power_list("eta_thr_per_bs", c.eta_thr_per_bs_linear);
    s.read_power("target_snr", c.target_snr_linear);
    s.read_power("noise_power", c.noise_power_linear);
    s.read("lognormal_mean_np", c.lognormal_mean_np, parse_double);
    s.read("lognormal_var_np2", c.lognormal_var_np2, parse_double);
    s.read("node_distribution", c.node_distribution, parse_distribution);
    s.read("seed", c.seed, parse_u64);
    s.read("unintended_from_average_peaks", c.unintended_from_average_peaks, parse_count);
    s.read("rotate_targets", c.rotate_targets, parse_bool);
  }
  if (tree.find("sweep") != tree.not_found()) {
    SweepConfig w;
    const Section s = section("sweep");
    s.read("axis", w.axis, [](const std::string& v, const std::string&) { return parse_axis(v); });
    read_axis_values(s, "values", w.axis, w.values);
    if (auto v = s.get("series_axis")) {
      if (!trim(*v).empty()) w.series_axis = parse_axis(*v);
    }
    if (w.series_axis) {
      read_axis_values(s, "series_values", *w.series_axis, w.series_values);
    } else if (s.get("series_values") || s.get("series_values_db") || s.get("series_values_linear")) {
      throw ConfigError("sweep.series_values given without sweep.series_axis");
    }
    s.read("runs_per_point", w.runs_per_point, parse_count);
    s.read("mode", w.mode, parse_mode);
    s.read("seed_base", w.seed_base, parse_u64);
    s.read("max_trials", w.max_trials, parse_count);
    if (auto v = s.get("prediction_cap")) {
      if (!trim(*v).empty()) w.prediction_cap = parse_double(*v, s.qualified("prediction_cap"));
    }
    s.read("active_clusters", w.active_clusters, parse_count);
    s.read("measure", w.measure, parse_measure);
    if (auto v = s.get("ccdf_levels_linear")) w.ccdf_levels_linear = s.list(*v, "ccdf_levels_linear");
    cfg.sweep = std::move(w);
  }
  {
    auto& o = cfg.output;
    const Section s = section("output");
    s.read("format", o.format, parse_format);
    s.read("angle_grid_points", o.angle_grid_points, parse_count);
    s.read("average_realizations", o.average_realizations, parse_count);
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(fmt::format("cannot read configuration file {}", path.string()));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), overrides);
}

std::string serialize_config(const RunConfig& config) {
  std::string out;
  auto line = [&](std::string_view key, const std::string& value) {
    out += fmt::format("{} = {}\n", key, value);
  };
  const auto& c = config.scenario;
  out += "[scenario]\n";
  line("num_candidates", fmt::format("{}", c.num_candidates));
  line("num_selected", fmt::format("{}", c.num_selected));
  line("group_size", fmt::format("{}", c.group_size));
  line("disk_radius_wavelengths", number(c.disk_radius_wavelengths));
  line("intended_direction_deg", number(c.intended_direction_deg));
  line("unintended_directions_deg", number_list(c.unintended_directions_deg));
  line("eta_thr_linear", number(c.eta_thr_linear));
  line("eta_thr_per_bs_linear", number_list(c.eta_thr_per_bs_linear));
  line("target_snr_linear", number(c.target_snr_linear));
  line("noise_power_linear", number(c.noise_power_linear));
  line("lognormal_mean_np", number(c.lognormal_mean_np));
  line("lognormal_var_np2", number(c.lognormal_var_np2));
  line("node_distribution", distribution_name(c.node_distribution));
  line("seed", fmt::format("{}", c.seed));
  line("unintended_from_average_peaks", fmt::format("{}", c.unintended_from_average_peaks));
  line("rotate_targets", c.rotate_targets ? "true" : "false");

  if (config.sweep) {
    const auto& w = *config.sweep;
    auto values_key = [](SweepAxis axis, std::string stem) {
      return axis == SweepAxis::InrThreshold ? stem + "_linear" : stem;
    };
    out += "\n[sweep]\n";
    line("axis", std::string(axis_name(w.axis)));
    line(values_key(w.axis, "values"), number_list(w.values));
    line("series_axis", w.series_axis ? std::string(axis_name(*w.series_axis)) : "");
    if (w.series_axis) line(values_key(*w.series_axis, "series_values"), number_list(w.series_values));
    line("runs_per_point", fmt::format("{}", w.runs_per_point));
    line("mode", mode_name(w.mode));
    line("seed_base", fmt::format("{}", w.seed_base));
    line("max_trials", fmt::format("{}", w.max_trials));
    line("prediction_cap", w.prediction_cap ? number(*w.prediction_cap) : "");
    line("active_clusters", fmt::format("{}", w.active_clusters));
    line("measure", measure_name(w.measure));
    line("ccdf_levels_linear", number_list(w.ccdf_levels_linear));
  }

  const auto& o = config.output;
  out += "\n[output]\n";
  line("format", o.format == OutputFormat::Csv ? "csv" : "json");
  line("angle_grid_points", fmt::format("{}", o.angle_grid_points));
  line("average_realizations", fmt::format("{}", o.average_realizations));
  return out;
}

ScenarioParams to_params(const ScenarioConfig& c) {
  ScenarioParams p;
  p.num_candidates = c.num_candidates;
  p.num_selected = c.num_selected;
  p.group_size = c.group_size;
  p.disk_radius = c.disk_radius_wavelengths;
  p.intended_direction = deg_to_rad(c.intended_direction_deg);
  p.unintended_directions.clear();
  for (double d : c.unintended_directions_deg) p.unintended_directions.push_back(deg_to_rad(d));
  p.inr_threshold = c.eta_thr_linear;
  p.per_bs_thresholds = c.eta_thr_per_bs_linear;
  p.target_snr = c.target_snr_linear;
  p.noise_power = c.noise_power_linear;
  p.shadowing = {c.lognormal_mean_np, c.lognormal_var_np2};
  p.distribution = c.node_distribution;
  p.seed = c.seed;
  return p;
}

Scenario to_scenario(const ScenarioConfig& config) {
  try {
    return Scenario(to_params(config));
  } catch (const ScenarioError& e) {
    throw ConfigError(e.what());
  }
}

SweepSpec to_sweep_spec(const RunConfig& config, std::optional<double> series_value) {
  if (!config.sweep) throw ConfigError("this command needs a [sweep] section");
  const auto& w = *config.sweep;
  if (w.values.empty()) throw ConfigError("sweep.values is empty");
  if (w.runs_per_point == 0) throw ConfigError("sweep.runs_per_point must be at least 1");
  if (w.active_clusters == 0) throw ConfigError("sweep.active_clusters must be at least 1");
  SweepSpec spec;
  spec.base = to_params(config.scenario);
  spec.axis = w.axis;
  spec.values = w.values;
  spec.runs_per_point = w.runs_per_point;
  spec.mode = w.mode;
  spec.seed_base = w.seed_base;
  spec.max_trials = w.max_trials;
  if (w.prediction_cap) spec.prediction_cap = *w.prediction_cap;
  spec.active_clusters = w.active_clusters;
  spec.measure = w.measure;
  if (series_value) {
    if (!w.series_axis) throw ConfigError("series value given without a series axis");
    if (*w.series_axis == SweepAxis::ActiveClusters) {
      spec.active_clusters = static_cast<std::size_t>(*series_value);
    } else {
      try {
        spec.base = apply_axis(spec.base, *w.series_axis, *series_value);
      } catch (const ScenarioError& e) {
        throw ConfigError(fmt::format("invalid series value: {}", e.what()));
      }
    }
  }
  // Every axis value must give a valid scenario.
  for (double v : spec.values) {
    try {
      Scenario check(apply_axis(spec.base, spec.axis, v));
    } catch (const ScenarioError& e) {
      throw ConfigError(fmt::format("sweep value {} is invalid: {}", v, e.what()));
    }
  }
  return spec;
}

std::filesystem::path preset_path(const std::string& name) {
  return std::filesystem::path(CBSEL_PRESET_DIR) / (name + ".ini");
}

}  // namespace cbsel::cli
