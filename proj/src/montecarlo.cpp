#include "cbsel/montecarlo.hpp"

#include <cmath>
#include <stdexcept>

#include "cbsel/analysis.hpp"
#include "cbsel/beampattern.hpp"
#include "cbsel/units.hpp"

namespace cbsel {

namespace {

constexpr std::uint64_t kAppendixPhase = 1;
constexpr std::uint64_t kAppendixTrials = 2;

std::size_t as_count(double value, const char* what) {
  if (!(value >= 0.0) || value != std::floor(value) || value > 1e15) {
    throw ScenarioError(std::string(what) + " must be a non-negative integer");
  }
  return static_cast<std::size_t>(value);
}

struct Moments {
  double mean = 0.0;
  double std_error = 0.0;
};

// Two-pass mean and standard error, in index order.
Moments summarize(const std::vector<double>& xs) {
  Moments m;
  if (xs.empty()) return m;
  double sum = 0.0;
  for (double x : xs) sum += x;
  m.mean = sum / static_cast<double>(xs.size());
  if (xs.size() < 2) return m;
  double ss = 0.0;
  for (double x : xs) ss += (x - m.mean) * (x - m.mean);
  const double n = static_cast<double>(xs.size());
  m.std_error = std::sqrt(ss / (n - 1.0) / n);
  return m;
}

void check_spec(const SweepSpec& spec) {
  if (spec.values.empty()) throw std::invalid_argument("sweep has no axis values");
  if (spec.runs_per_point == 0) throw std::invalid_argument("runs_per_point must be at least 1");
  if (spec.active_clusters == 0) throw std::invalid_argument("active_clusters must be at least 1");
}

void require_axis(const SweepSpec& spec, std::initializer_list<SweepAxis> allowed,
                  const char* sweep) {
  for (SweepAxis a : allowed) {
    if (a == spec.axis) return;
  }
  throw std::invalid_argument(std::string(sweep) + " does not support axis " +
                              std::string(axis_name(spec.axis)));
}

double trials_prediction(const Scenario& scenario) {
  try {
    return expected_trials(scenario);
  } catch (const DomainError&) {
    return std::numeric_limits<double>::infinity();
  }
}

EstimateRow skipped_row(double axis_value, double prediction) {
  EstimateRow row;
  row.axis_value = axis_value;
  row.prediction = prediction;
  row.estimate = std::numeric_limits<double>::quiet_NaN();
  row.skipped = true;
  return row;
}

EstimateRow finish(double axis_value, double prediction, const std::vector<double>& kept,
                   std::size_t runs) {
  EstimateRow row;
  row.axis_value = axis_value;
  row.prediction = prediction;
  row.n = kept.size();
  row.nonconverged = runs - kept.size();
  row.flagged = 10 * row.nonconverged > runs;
  const Moments m = summarize(kept);
  row.estimate = kept.empty() ? std::numeric_limits<double>::quiet_NaN() : m.mean;
  row.std_error = m.std_error;
  return row;
}

// Per-run INR samples at one point; NaN marks a failed selection.
std::vector<double> inr_samples(const SweepSpec& spec, const Scenario& scenario,
                                std::size_t clusters, std::uint64_t point) {
  std::vector<double> out(spec.runs_per_point);
  for_each_index(spec.runs_per_point, spec.execution, [&](std::size_t run) {
    const SeedTree seeds(run_seed(spec.seed_base, point, run));
    const auto inr = simulate_total_inr(scenario, clusters, seeds, spec.mode, spec.measure,
                                        spec.max_trials);
    out[run] = inr ? *inr : std::numeric_limits<double>::quiet_NaN();
  });
  return out;
}

std::vector<double> drop_failed(const std::vector<double>& xs) {
  std::vector<double> kept;
  kept.reserve(xs.size());
  for (double x : xs) {
    if (!std::isnan(x)) kept.push_back(x);
  }
  return kept;
}

}  // namespace

std::string_view axis_name(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::InrThreshold: return "eta_thr";
    case SweepAxis::GroupSize: return "L";
    case SweepAxis::NumUnintended: return "D";
    case SweepAxis::ActiveClusters: return "K";
    case SweepAxis::NumSelected: return "N";
  }
  return "?";
}

std::uint64_t run_seed(std::uint64_t seed_base, std::uint64_t point, std::uint64_t run) {
  return derive_seed(seed_base, point, run);
}

ScenarioParams apply_axis(const ScenarioParams& base, SweepAxis axis, double value) {
  ScenarioParams p = base;
  switch (axis) {
    case SweepAxis::InrThreshold:
      p.inr_threshold = value;
      p.per_bs_thresholds.clear();
      break;
    case SweepAxis::GroupSize:
      p.group_size = as_count(value, "L");
      break;
    case SweepAxis::NumUnintended: {
      const std::size_t d = as_count(value, "D");
      if (d > p.unintended_directions.size()) {
        throw ScenarioError("D exceeds the number of configured unintended directions");
      }
      p.unintended_directions.resize(d);
      if (!p.per_bs_thresholds.empty()) p.per_bs_thresholds.resize(d);
      break;
    }
    case SweepAxis::ActiveClusters:
      if (as_count(value, "K") == 0) throw ScenarioError("K must be at least 1");
      break;
    case SweepAxis::NumSelected:
      p.num_selected = as_count(value, "N");
      break;
  }
  return p;
}

std::size_t clusters_at(const SweepSpec& spec, double value) {
  return spec.axis == SweepAxis::ActiveClusters ? as_count(value, "K") : spec.active_clusters;
}

TrialRun simulate_trials(const Scenario& scenario, const SeedTree& seeds, ChannelMode mode,
                         std::size_t max_trials) {
  const NetworkRealization network = sample_network(scenario, seeds);
  SelectionOptions opts;
  opts.mode = mode;
  opts.max_trials = max_trials;
  opts.record_trials = false;
  const auto outcome = run_selection(network, scenario, seeds, opts);
  return {outcome.trials, outcome.converged()};
}

std::optional<double> simulate_total_inr(const Scenario& scenario, std::size_t clusters,
                                         const SeedTree& seeds, ChannelMode mode,
                                         InrMeasure measure, std::size_t max_trials) {
  if (clusters == 0) throw std::invalid_argument("need at least one active cluster");
  if (scenario.num_unintended() == 0) throw std::invalid_argument("INR needs a victim BS");
  SelectionOptions opts;
  opts.mode = mode;
  opts.max_trials = max_trials;
  opts.record_trials = false;

  std::vector<NetworkRealization> networks;
  std::vector<SelectionOutcome> outcomes;
  networks.reserve(clusters);
  outcomes.reserve(clusters);
  for (std::size_t k = 0; k < clusters; ++k) {
    const SeedTree child = seeds.child(k);
    networks.push_back(sample_network(scenario, child));
    outcomes.push_back(run_selection(networks.back(), scenario, child, opts));
    if (!outcomes.back().converged()) return std::nullopt;
  }

  std::vector<ActiveCluster> active;
  active.reserve(clusters);
  for (std::size_t k = 0; k < clusters; ++k) {
    const auto& o = outcomes[k];
    const NetworkRealization& net = o.tested_network ? *o.tested_network : networks[k];
    active.push_back({std::cref(net), o.selected, 1});
  }
  const std::size_t n = scenario.num_selected();
  if (measure == InrMeasure::SymbolAveraged) {
    return mean_received_inr(active, n, scenario.target_snr(), scenario.noise_power());
  }
  RngStream symbols_stream = seeds.stream(StreamId::Symbols);
  const auto symbols = draw_symbols(clusters, symbols_stream);
  return total_received_inr(active, symbols, n, scenario.target_snr(), scenario.noise_power());
}

std::vector<EstimateRow> sweep_expected_trials(const SweepSpec& spec) {
  check_spec(spec);
  require_axis(spec, {SweepAxis::InrThreshold, SweepAxis::GroupSize, SweepAxis::NumUnintended,
                      SweepAxis::NumSelected},
               "sweep_expected_trials");
  std::vector<EstimateRow> rows;
  for (std::size_t point = 0; point < spec.values.size(); ++point) {
    const double value = spec.values[point];
    const Scenario scenario(apply_axis(spec.base, spec.axis, value));
    const double prediction = trials_prediction(scenario);
    if (prediction > spec.prediction_cap) {
      rows.push_back(skipped_row(value, prediction));
      continue;
    }
    std::vector<double> trials(spec.runs_per_point);
    for_each_index(spec.runs_per_point, spec.execution, [&](std::size_t run) {
      const SeedTree seeds(run_seed(spec.seed_base, point, run));
      const TrialRun r = simulate_trials(scenario, seeds, spec.mode, spec.max_trials);
      trials[run] = r.converged ? static_cast<double>(r.trials)
                                : std::numeric_limits<double>::quiet_NaN();
    });
    rows.push_back(finish(value, prediction, drop_failed(trials), spec.runs_per_point));
  }
  return rows;
}

std::vector<EstimateRow> sweep_average_inr(const SweepSpec& spec) {
  check_spec(spec);
  require_axis(spec, {SweepAxis::InrThreshold, SweepAxis::GroupSize, SweepAxis::ActiveClusters},
               "sweep_average_inr");
  std::vector<EstimateRow> rows;
  for (std::size_t point = 0; point < spec.values.size(); ++point) {
    const double value = spec.values[point];
    const Scenario scenario(apply_axis(spec.base, spec.axis, value));
    const std::size_t k = clusters_at(spec, value);
    double prediction = std::numeric_limits<double>::quiet_NaN();
    try {
      prediction = predicted_average_inr(scenario, k);
    } catch (const DomainError&) {
    }
    if (trials_prediction(scenario) > spec.prediction_cap) {
      rows.push_back(skipped_row(value, prediction));
      continue;
    }
    const auto samples = inr_samples(spec, scenario, k, point);
    rows.push_back(finish(value, prediction, drop_failed(samples), spec.runs_per_point));
  }
  return rows;
}

std::vector<EstimateRow> empirical_ccdf(const SweepSpec& spec, const std::vector<double>& levels) {
  check_spec(spec);
  require_axis(spec, {SweepAxis::InrThreshold, SweepAxis::ActiveClusters}, "empirical_ccdf");
  if (levels.empty()) throw std::invalid_argument("CCDF grid is empty");
  for (double l : levels) {
    if (!(l >= 0.0)) throw std::invalid_argument("CCDF levels must be non-negative");
  }
  const bool shared_seeds = spec.axis == SweepAxis::ActiveClusters;
  std::vector<EstimateRow> rows;
  for (std::size_t point = 0; point < spec.values.size(); ++point) {
    const double value = spec.values[point];
    const Scenario scenario(apply_axis(spec.base, spec.axis, value));
    const std::size_t k = clusters_at(spec, value);
    double rate = std::numeric_limits<double>::quiet_NaN();
    try {
      rate = erlang_rate(scenario);
    } catch (const DomainError&) {
    }
    if (trials_prediction(scenario) > spec.prediction_cap) {
      for (double level : levels) {
        EstimateRow row = skipped_row(value, std::isnan(rate) ? rate : inr_ccdf(level, k, rate));
        row.level = level;
        rows.push_back(row);
      }
      continue;
    }
    const auto kept = drop_failed(inr_samples(spec, scenario, k, shared_seeds ? 0 : point));
    const double n = static_cast<double>(kept.size());
    for (double level : levels) {
      std::size_t above = 0;
      for (double x : kept) above += x >= level ? 1 : 0;
      EstimateRow row;
      row.axis_value = value;
      row.level = level;
      row.n = kept.size();
      row.nonconverged = spec.runs_per_point - kept.size();
      row.flagged = 10 * row.nonconverged > spec.runs_per_point;
      if (kept.empty()) {
        row.estimate = std::numeric_limits<double>::quiet_NaN();
      } else {
        row.estimate = static_cast<double>(above) / n;
        row.std_error = std::sqrt(row.estimate * (1.0 - row.estimate) / n);
      }
      row.prediction = std::isnan(rate) ? rate : inr_ccdf(level, k, rate);
      rows.push_back(row);
    }
  }
  return rows;
}

PhaseMoments simulate_phase_moments(std::size_t draws, std::uint64_t seed) {
  if (draws < 2) throw std::invalid_argument("need at least two draws");
  RngStream stream = SeedTree(seed).stream(StreamId::Appendix, kAppendixPhase);
  std::vector<double> c(draws);
  std::vector<double> s(draws);
  for (std::size_t i = 0; i < draws; ++i) {
    const double t1 = kTwoPi * stream.uniform() - kPi;
    const double t2 = kTwoPi * stream.uniform() - kPi;
    c[i] = std::cos(t1 - t2);
    s[i] = std::sin(t1 - t2);
  }
  const double n = static_cast<double>(draws);
  const Moments mc = summarize(c);
  const Moments ms = summarize(s);
  // std_error^2 * n = sample variance
  return {mc.mean, mc.std_error * mc.std_error * n, ms.mean, ms.std_error * ms.std_error * n};
}

MeanEstimate simulate_negative_binomial_mean(std::size_t required, double p,
                                             std::size_t sequences, std::uint64_t seed) {
  if (required == 0) throw std::invalid_argument("at least one success is required");
  if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("p must lie in (0, 1]");
  if (sequences == 0) throw std::invalid_argument("need at least one sequence");
  RngStream stream = SeedTree(seed).stream(StreamId::Appendix, kAppendixTrials);
  std::vector<double> t(sequences);
  for (auto& out : t) {
    std::size_t trials = 0;
    std::size_t successes = 0;
    while (successes < required) {
      ++trials;
      if (stream.uniform() < p) ++successes;
    }
    out = static_cast<double>(trials);
  }
  const Moments m = summarize(t);
  return {m.mean, m.std_error, sequences};
}

}  // namespace cbsel
