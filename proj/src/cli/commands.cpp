#include "cbsel/cli/commands.hpp"

#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "cbsel/analysis.hpp"
#include "cbsel/beampattern.hpp"
#include "cbsel/cli/output.hpp"
#include "cbsel/montecarlo.hpp"
#include "cbsel/selection.hpp"
#include "cbsel/units.hpp"

namespace cbsel::cli {

namespace {

using nlohmann::json;

struct NamedCommand {
  Command command;
  const char* name;
};

constexpr NamedCommand kCommands[] = {
    {Command::Beampattern, "beampattern"}, {Command::Select, "select"},
    {Command::SweepTrials, "sweep-trials"}, {Command::SweepInr, "sweep-inr"},
    {Command::Ccdf, "ccdf"},               {Command::Case1, "case1"},
    {Command::Case2, "case2"},             {Command::Case3, "case3"},
    {Command::Case4, "case4"},             {Command::ValidateAppendix, "validate-appendix"},
};

// Substreams of the scenario seed used by the beampattern commands.
constexpr std::uint64_t kRandomSetChild = 1;
constexpr std::uint64_t kAverageChild = 0xA5E0ULL;

// Appendix validation settings.
constexpr std::size_t kPhaseDraws = 1'000'000;
constexpr double kPhaseTolerance = 0.005;
constexpr std::size_t kTrialSequences = 100'000;
constexpr double kTrialTolerance = 0.02;

bool is_case(Command c) {
  return c == Command::Case1 || c == Command::Case2 || c == Command::Case3 || c == Command::Case4;
}

double to_db(double linear) {
  return linear > 0.0 ? linear_to_db(linear) : -std::numeric_limits<double>::infinity();
}

// Axis values are written in configuration units (eta_thr in dB).
std::string axis_column(SweepAxis axis) {
  return axis == SweepAxis::InrThreshold ? "eta_thr_db" : std::string(axis_name(axis));
}

Cell axis_cell(SweepAxis axis, double value) {
  if (axis == SweepAxis::InrThreshold) return to_db(value);
  return static_cast<std::uint64_t>(value);
}

Cell number_or_empty(double v) { return std::isnan(v) ? Cell() : Cell(v); }

struct Artifacts {
  std::filesystem::path dir;
  std::vector<std::string> files;

  void add(std::string name) { files.push_back(std::move(name)); }
};

std::vector<std::size_t> random_subset(std::size_t m, std::size_t n, RngStream& stream) {
  std::vector<std::size_t> pool(m);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  for (std::size_t k = 0; k < n; ++k) std::swap(pool[k], pool[k + stream.index(m - k)]);
  pool.resize(n);
  return pool;
}

Table pattern_table(const BeampatternSample& bp) {
  Table t{{"angle_deg", "power_db"}, {}};
  t.rows.reserve(bp.angles.size());
  for (std::size_t i = 0; i < bp.angles.size(); ++i) {
    t.rows.push_back({rad_to_deg(bp.angles[i]), to_db(bp.power[i])});
  }
  return t;
}

json messages_json(const MessageCounts& m) {
  return {{"select", m.select}, {"offer", m.offer},   {"approval", m.approval},
          {"test", m.test},     {"reject", m.reject}, {"end", m.end}};
}

json station_list(const Scenario& s) {
  json out = json::array();
  for (std::size_t bs = 0; bs < s.num_stations(); ++bs) {
    out.push_back({{"bs", bs}, {"direction_deg", rad_to_deg(s.direction(bs))},
                   {"eta_thr_db", to_db(s.threshold(bs))}});
  }
  return out;
}

// Per-victim INR (dB) of the whole selected set and the worst approved group.
json interference_report(const SelectionOutcome& o, const NetworkRealization& network,
                         const Scenario& s) {
  const NetworkRealization& net = o.tested_network ? *o.tested_network : network;
  json out = json::array();
  for (std::size_t bs = 0; bs < s.num_stations(); ++bs) {
    if (bs == o.target_bs) continue;
    json entry{{"bs", bs}, {"eta_thr_db", to_db(s.threshold(bs))}};
    if (o.converged()) {
      const double p = s.noise_power() * s.target_snr() / static_cast<double>(o.selected.size());
      entry["final_set_inr_db"] =
          to_db(group_interference(net, o.selected, o.target_bs, bs, p).power() / s.noise_power());
      double worst = 0.0;
      for (const auto& g : o.state.approved) {
        const double pg = s.noise_power() * s.target_snr() / static_cast<double>(g.size());
        worst = std::max(worst, group_interference(net, g, o.target_bs, bs, pg).power() /
                                    s.noise_power());
      }
      entry["max_group_inr_db"] = to_db(worst);
    }
    out.push_back(std::move(entry));
  }
  return out;
}

std::string status_name(const SelectionOutcome& o) {
  return o.converged() ? "converged" : "non_convergence";
}

// Scenario with unintended directions resolved (average-beampattern peaks).
struct ResolvedScenario {
  Scenario scenario;
  std::optional<BeampatternSample> average;
};

ResolvedScenario resolve_scenario(const RunConfig& cfg, const std::vector<double>& angles,
                                  Execution exec, std::ostream& log) {
  ScenarioConfig sc = cfg.scenario;
  if (sc.unintended_from_average_peaks == 0) return {to_scenario(sc), std::nullopt};
  const std::size_t count = sc.unintended_from_average_peaks;
  // The average pattern depends only on placement; a placeholder victim
  // opposite the target keeps the scenario valid.
  sc.unintended_directions_deg = {rad_to_deg(wrap_angle(deg_to_rad(sc.intended_direction_deg) + kPi))};
  sc.eta_thr_per_bs_linear.clear();
  const Scenario base = to_scenario(sc);
  sc.unintended_directions_deg.clear();
  const double p = base.noise_power() * base.target_snr() / static_cast<double>(base.num_selected());
  auto avg = average_beampattern(base, base.num_selected(), cfg.output.average_realizations, p,
                                 SeedTree(base.seed()).child(kAverageChild), angles, exec);
  const auto peaks = sidelobe_peaks(avg, base.direction(0), count);
  if (peaks.size() < count) {
    throw ConfigError(fmt::format("average beampattern has only {} sidelobe peaks", peaks.size()));
  }
  for (double a : peaks) sc.unintended_directions_deg.push_back(rad_to_deg(a));
  log << "unintended directions from average-beampattern peaks:";
  for (double d : sc.unintended_directions_deg) log << ' ' << fmt::format("{:.1f}", d);
  log << '\n';
  return {to_scenario(sc), std::move(avg)};
}

int cmd_beampattern(const RunConfig& cfg, Execution exec, Artifacts& art, std::ostream& log) {
  const auto angles = uniform_angle_grid(cfg.output.angle_grid_points);
  auto resolved = resolve_scenario(cfg, angles, exec, log);
  const Scenario& s = resolved.scenario;
  const SeedTree seeds(s.seed());
  const std::size_t n = s.num_selected();
  const double p = s.noise_power() * s.target_snr() / static_cast<double>(n);
  const auto format = cfg.output.format;

  std::vector<std::size_t> targets{0};
  if (cfg.scenario.rotate_targets) {
    targets.resize(s.num_stations());
    std::iota(targets.begin(), targets.end(), std::size_t{0});
  }

  json clusters = json::array();
  bool all_converged = true;
  for (std::size_t c = 0; c < targets.size(); ++c) {
    const std::size_t target = targets[c];
    const SeedTree cluster_seeds = seeds.child(c);
    const NetworkRealization network = sample_network(s, cluster_seeds);
    std::vector<std::size_t> pool(network.size());
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    SelectionOptions opts;
    opts.record_trials = false;
    const auto outcome = run_selection(network, s, target, std::move(pool), cluster_seeds, opts);
    const std::string suffix = targets.size() > 1 ? fmt::format("_bs{}", target) : "";

    if (outcome.converged()) {
      const auto phases = synchronize(network, outcome.selected, s.direction(target));
      art.add(write_table(art.dir, "beampattern_selected" + suffix,
                          pattern_table(sample_beampattern(network, outcome.selected, phases, p,
                                                           angles, exec)),
                          format));
    } else {
      all_converged = false;
      log << fmt::format("selection toward BS {} did not converge after {} trials\n", target,
                         outcome.trials);
    }
    RngStream pick = cluster_seeds.child(kRandomSetChild).stream(StreamId::Selection);
    const auto random_set = random_subset(network.size(), n, pick);
    const auto random_phases = synchronize(network, random_set, s.direction(target));
    art.add(write_table(
        art.dir, "beampattern_random" + suffix,
        pattern_table(sample_beampattern(network, random_set, random_phases, p, angles, exec)),
        format));

    clusters.push_back({{"target_bs", target},
                        {"target_direction_deg", rad_to_deg(s.direction(target))},
                        {"status", status_name(outcome)},
                        {"trials", outcome.trials},
                        {"verified", verify_outcome(outcome, network, s)},
                        {"messages", messages_json(outcome.messages)},
                        {"victims", interference_report(outcome, network, s)}});
  }

  if (!resolved.average) {
    resolved.average = average_beampattern(s, n, cfg.output.average_realizations, p,
                                           seeds.child(kAverageChild), angles, exec);
  }
  art.add(write_table(art.dir, "beampattern_average", pattern_table(*resolved.average), format));

  const json sidecar{{"scenario", to_json(cfg.scenario)},
                     {"seed", s.seed()},
                     {"stations", station_list(s)},
                     {"node_power", p},
                     {"average_realizations", cfg.output.average_realizations},
                     {"clusters", clusters}};
  write_json(art.dir / "beampattern.json", sidecar);
  art.add("beampattern.json");
  return all_converged ? exit_code::kSuccess : exit_code::kNonConvergence;
}

int cmd_select(const RunConfig& cfg, Artifacts& art, std::ostream& log) {
  const Scenario s = to_scenario(cfg.scenario);
  const SeedTree seeds(s.seed());
  const NetworkRealization network = sample_network(s, seeds);
  SelectionOptions opts;
  if (cfg.sweep) {
    opts.mode = cfg.sweep->mode;
    opts.max_trials = cfg.sweep->max_trials;
  }
  const auto outcome = run_selection(network, s, seeds, opts);

  Table trials{{"trial_index", "verdict", "rejecting_bs"}, {}};
  for (std::size_t bs = 1; bs < s.num_stations(); ++bs) {
    trials.header.push_back(fmt::format("inr_db_bs{}", bs));
  }
  for (std::size_t t = 0; t < outcome.state.trial_log.size(); ++t) {
    const auto& rec = outcome.state.trial_log[t];
    std::vector<Cell> row{static_cast<std::uint64_t>(t),
                          std::string(rec.verdict == Verdict::Approved ? "approved" : "rejected"),
                          rec.rejecting_bs ? Cell(static_cast<std::uint64_t>(*rec.rejecting_bs))
                                           : Cell()};
    for (double inr : rec.inr) row.emplace_back(to_db(inr));
    trials.rows.push_back(std::move(row));
  }
  art.add(write_table(art.dir, "trials", trials, cfg.output.format));

  double prediction = std::numeric_limits<double>::quiet_NaN();
  try {
    prediction = expected_trials(s);
  } catch (const DomainError&) {
  }
  const json sidecar{{"scenario", to_json(cfg.scenario)},
                     {"seed", s.seed()},
                     {"mode", opts.mode == ChannelMode::FixedPerRealization ? "fixed_channel"
                                                                           : "redraw_per_trial"},
                     {"status", status_name(outcome)},
                     {"trials", outcome.trials},
                     {"expected_trials", std::isfinite(prediction) ? json(prediction) : json()},
                     {"verified", verify_outcome(outcome, network, s)},
                     {"groups", outcome.state.approved},
                     {"selected", outcome.selected},
                     {"messages", messages_json(outcome.messages)},
                     {"victims", interference_report(outcome, network, s)}};
  write_json(art.dir / "selection.json", sidecar);
  art.add("selection.json");
  if (!outcome.converged()) {
    log << fmt::format("selection did not converge after {} trials\n", outcome.trials);
    return exit_code::kNonConvergence;
  }
  return exit_code::kSuccess;
}

int cmd_sweep(Command command, const RunConfig& cfg, Execution exec, Artifacts& art,
              std::ostream& log) {
  if (!cfg.sweep) throw ConfigError("this command needs a [sweep] section");
  const auto& w = *cfg.sweep;
  if (command == Command::Ccdf && w.ccdf_levels_linear.empty()) {
    throw ConfigError("ccdf needs sweep.ccdf_levels_linear");
  }
  std::vector<std::optional<double>> series;
  if (w.series_axis) {
    if (w.series_values.empty()) throw ConfigError("sweep.series_values is empty");
    for (double v : w.series_values) series.emplace_back(v);
  } else {
    series.emplace_back(std::nullopt);
  }

  Table table;
  if (w.series_axis) table.header.push_back(axis_column(*w.series_axis));
  table.header.push_back(axis_column(w.axis));
  if (command == Command::Ccdf) table.header.push_back("inr_level");
  for (const char* h : {"estimate", "std_error", "prediction", "n", "nonconverged", "flagged",
                        "skipped"}) {
    table.header.emplace_back(h);
  }

  // Validate every series before spending time on any of them.
  std::vector<SweepSpec> specs;
  for (const auto& sv : series) {
    specs.push_back(to_sweep_spec(cfg, sv));
    specs.back().execution = exec;
  }

  bool flagged = false;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const SweepSpec& spec = specs[i];
    std::vector<EstimateRow> rows;
    try {
      if (command == Command::SweepTrials) {
        rows = sweep_expected_trials(spec);
      } else if (command == Command::SweepInr) {
        rows = sweep_average_inr(spec);
      } else {
        rows = empirical_ccdf(spec, w.ccdf_levels_linear);
      }
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    for (const auto& r : rows) {
      std::vector<Cell> row;
      if (w.series_axis) row.push_back(axis_cell(*w.series_axis, *series[i]));
      row.push_back(axis_cell(w.axis, r.axis_value));
      if (r.level) row.emplace_back(*r.level);
      row.push_back(number_or_empty(r.estimate));
      row.push_back(r.skipped ? Cell() : Cell(r.std_error));
      row.push_back(number_or_empty(r.prediction));
      row.emplace_back(static_cast<std::uint64_t>(r.n));
      row.emplace_back(static_cast<std::uint64_t>(r.nonconverged));
      row.emplace_back(static_cast<std::uint64_t>(r.flagged));
      row.emplace_back(static_cast<std::uint64_t>(r.skipped));
      table.rows.push_back(std::move(row));
      if (r.flagged) {
        flagged = true;
        log << fmt::format("{} = {}: {} of {} runs did not converge\n", axis_name(w.axis),
                           r.axis_value, r.nonconverged, spec.runs_per_point);
      }
    }
  }
  const char* stem = command == Command::SweepTrials ? "trials"
                     : command == Command::SweepInr  ? "inr"
                                                     : "ccdf";
  art.add(write_table(art.dir, stem, table, cfg.output.format));
  return flagged ? exit_code::kNonConvergence : exit_code::kSuccess;
}

int cmd_validate_appendix(const RunConfig& cfg, Artifacts& art, std::ostream& log) {
  const std::uint64_t seed = cfg.scenario.seed;
  const PhaseMoments m = simulate_phase_moments(kPhaseDraws, seed);
  const bool phase_ok = std::abs(m.mean_cos) <= kPhaseTolerance &&
                        std::abs(m.mean_sin) <= kPhaseTolerance &&
                        std::abs(m.var_cos - 0.5) <= kPhaseTolerance &&
                        std::abs(m.var_sin - 0.5) <= kPhaseTolerance;
  json report;
  report["phase_moments"] = {{"draws", kPhaseDraws},  {"tolerance", kPhaseTolerance},
                             {"mean_cos", m.mean_cos}, {"var_cos", m.var_cos},
                             {"mean_sin", m.mean_sin}, {"var_sin", m.var_sin},
                             {"pass", phase_ok}};
  bool trials_ok = true;
  json nb = json::array();
  std::uint64_t index = 0;
  for (std::size_t required : {1, 4, 8}) {
    for (double p : {0.1, 0.5, 0.9}) {
      const auto est = simulate_negative_binomial_mean(required, p, kTrialSequences,
                                                       derive_seed(seed, 0xB, index++));
      const double expected = static_cast<double>(required) / p;
      const double rel = std::abs(est.mean - expected) / expected;
      const bool ok = rel <= kTrialTolerance;
      trials_ok = trials_ok && ok;
      nb.push_back({{"required", required}, {"p", p}, {"sequences", kTrialSequences},
                    {"mean", est.mean}, {"std_error", est.std_error}, {"expected", expected},
                    {"relative_error", rel}, {"tolerance", kTrialTolerance}, {"pass", ok}});
    }
  }
  report["negative_binomial_mean"] = nb;
  report["seed"] = seed;
  report["pass"] = phase_ok && trials_ok;
  write_json(art.dir / "appendix.json", report);
  art.add("appendix.json");
  if (!(phase_ok && trials_ok)) {
    log << "appendix validation failed; see appendix.json\n";
    return exit_code::kValidation;
  }
  return exit_code::kSuccess;
}

json config_json(const RunConfig& cfg) {
  json out{{"scenario", to_json(cfg.scenario)},
           {"output",
            {{"format", cfg.output.format == OutputFormat::Csv ? "csv" : "json"},
             {"angle_grid_points", cfg.output.angle_grid_points},
             {"average_realizations", cfg.output.average_realizations}}}};
  if (cfg.sweep) {
    const auto& w = *cfg.sweep;
    out["sweep"] = {
        {"axis", axis_name(w.axis)},
        {"values", w.values},
        {"series_axis", w.series_axis ? json(axis_name(*w.series_axis)) : json()},
        {"series_values", w.series_values},
        {"runs_per_point", w.runs_per_point},
        {"mode", w.mode == ChannelMode::FixedPerRealization ? "fixed_channel" : "redraw_per_trial"},
        {"seed_base", w.seed_base},
        {"max_trials", w.max_trials},
        {"prediction_cap", w.prediction_cap ? json(format_number(*w.prediction_cap)) : json()},
        {"active_clusters", w.active_clusters},
        {"measure", w.measure == InrMeasure::SymbolAveraged ? "symbol_averaged" : "instantaneous"},
        {"ccdf_levels_linear", w.ccdf_levels_linear}};
  }
  return out;
}

}  // namespace

std::optional<Command> parse_command(const std::string& name) {
  for (const auto& c : kCommands) {
    if (name == c.name) return c.command;
  }
  return std::nullopt;
}

std::string command_name(Command command) {
  for (const auto& c : kCommands) {
    if (c.command == command) return c.name;
  }
  return "?";
}

std::vector<std::string> command_names() {
  std::vector<std::string> out;
  for (const auto& c : kCommands) out.emplace_back(c.name);
  return out;
}

RunConfig resolve_config(const CommandSpec& spec) {
  std::vector<std::string> overrides = spec.overrides;
  if (spec.format) {
    overrides.push_back(*spec.format == OutputFormat::Csv ? "output.format=csv"
                                                          : "output.format=json");
  }
  if (spec.config_path && spec.preset) throw ConfigError("give either a config file or a preset");
  std::optional<std::filesystem::path> path = spec.config_path;
  if (spec.preset) path = preset_path(*spec.preset);
  if (!path && is_case(spec.command)) path = preset_path(command_name(spec.command));
  return path ? load_config(*path, overrides) : parse_config("", overrides);
}

int run_command(const CommandSpec& spec, std::ostream& log) {
  RunConfig cfg;
  try {
    cfg = resolve_config(spec);
  } catch (const ConfigError& e) {
    log << "configuration error: " << e.what() << '\n';
    return exit_code::kConfig;
  }

  Artifacts art{spec.output_dir, {}};
  int code = exit_code::kSuccess;
  try {
    std::filesystem::create_directories(spec.output_dir);
    switch (spec.command) {
      case Command::Beampattern:
      case Command::Case1:
      case Command::Case2:
      case Command::Case3:
      case Command::Case4:
        code = cmd_beampattern(cfg, spec.execution, art, log);
        break;
      case Command::Select:
        code = cmd_select(cfg, art, log);
        break;
      case Command::SweepTrials:
      case Command::SweepInr:
      case Command::Ccdf:
        code = cmd_sweep(spec.command, cfg, spec.execution, art, log);
        break;
      case Command::ValidateAppendix:
        code = cmd_validate_appendix(cfg, art, log);
        break;
    }
  } catch (const ConfigError& e) {
    log << "configuration error: " << e.what() << '\n';
    return exit_code::kConfig;
  } catch (const ScenarioError& e) {
    log << "configuration error: " << e.what() << '\n';
    return exit_code::kConfig;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return exit_code::kFailure;
  }

  // The manifest is a complete config: rerunning the command with it
  // reproduces every file above byte for byte.
  write_text(spec.output_dir / "manifest.ini",
             fmt::format("; cbsim {}\n", command_name(spec.command)) + serialize_config(cfg));
  write_json(spec.output_dir / "manifest.json", {{"command", command_name(spec.command)},
                                                 {"config", config_json(cfg)},
                                                 {"files", art.files},
                                                 {"exit_code", code}});
  return code;
}

}  // namespace cbsel::cli
