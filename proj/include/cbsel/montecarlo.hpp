#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string_view>
#include <vector>

#include "cbsel/core.hpp"
#include "cbsel/parallel.hpp"
#include "cbsel/rng.hpp"
#include "cbsel/selection.hpp"

namespace cbsel {

enum class SweepAxis {
  InrThreshold,   // eta_thr, linear
  GroupSize,      // L
  NumUnintended,  // D: keeps the first D entries of base.unintended_directions
  ActiveClusters, // K
  NumSelected,    // N
};

std::string_view axis_name(SweepAxis axis);

enum class InrMeasure {
  // sum_k |C_k|^2 / noise: the symbol-averaged power of K independent clusters.
  SymbolAveraged,
  // |sum_k s_k C_k|^2 / noise for one draw of unit-modulus symbols s_k.
  Instantaneous,
};

struct SweepSpec {
  ScenarioParams base;
  SweepAxis axis = SweepAxis::InrThreshold;
  std::vector<double> values;
  std::size_t runs_per_point = 1000;
  ChannelMode mode = ChannelMode::FixedPerRealization;
  std::uint64_t seed_base = 1;
  std::size_t active_clusters = 1;  // K when the axis is not K
  std::size_t max_trials = 0;       // 0 = default_max_trials
  // Points whose predicted E{T} exceeds this are reported as skipped
  // (all three sweeps).
  double prediction_cap = std::numeric_limits<double>::infinity();
  InrMeasure measure = InrMeasure::SymbolAveraged;
  Execution execution = Execution::Parallel;
};

struct EstimateRow {
  double axis_value = 0.0;
  std::optional<double> level;  // CCDF grid point, CCDF rows only
  double estimate = 0.0;
  double std_error = 0.0;
  double prediction = 0.0;
  std::size_t n = 0;             // runs that entered the estimate
  std::size_t nonconverged = 0;  // runs excluded for NonConvergence
  bool flagged = false;          // nonconverged > 10% of runs
  bool skipped = false;          // prediction above the cap; not simulated
};

/// Seed of run `run` at sweep point `point`.
std::uint64_t run_seed(std::uint64_t seed_base, std::uint64_t point, std::uint64_t run);

/// Scenario parameters at one axis value. K leaves the scenario unchanged.
ScenarioParams apply_axis(const ScenarioParams& base, SweepAxis axis, double value);

/// Clusters K at one sweep point.
std::size_t clusters_at(const SweepSpec& spec, double value);

struct TrialRun {
  std::size_t trials = 0;
  bool converged = false;
};

/// One selection on a fresh network rooted at `seeds`.
TrialRun simulate_trials(const Scenario& scenario, const SeedTree& seeds,
                         ChannelMode mode, std::size_t max_trials = 0);

/// Selects K clusters (cluster k on its own network from seeds.child(k))
/// and returns the total INR at BS 1, or nullopt if any selection failed.
std::optional<double> simulate_total_inr(const Scenario& scenario, std::size_t clusters,
                                         const SeedTree& seeds, ChannelMode mode,
                                         InrMeasure measure, std::size_t max_trials = 0);

/// Mean trial count per axis value against ceil(N/L)/p.
/// Axis must be eta_thr, L, D or N.
std::vector<EstimateRow> sweep_expected_trials(const SweepSpec& spec);

/// Mean post-selection INR at BS 1 against 2 sigma_I^2 K.
/// Axis must be eta_thr, L or K.
std::vector<EstimateRow> sweep_average_inr(const SweepSpec& spec);

/// Empirical P(INR >= level) per axis value and level, against the Erlang
/// CCDF. Axis must be eta_thr or K. Rows are ordered point-major.
/// On the K axis all points share run seeds, so the K-cluster total
/// contains the (K-1)-cluster total path by path.
std::vector<EstimateRow> empirical_ccdf(const SweepSpec& spec, const std::vector<double>& levels);

struct PhaseMoments {
  double mean_cos = 0.0;
  double var_cos = 0.0;
  double mean_sin = 0.0;
  double var_sin = 0.0;
};

/// Sample moments of cos and sin of theta_1 - theta_2, theta_i ~ U[-pi, pi].
PhaseMoments simulate_phase_moments(std::size_t draws, std::uint64_t seed);

struct MeanEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n = 0;
};

/// Mean number of Bernoulli(p) trials needed for `required` successes.
MeanEstimate simulate_negative_binomial_mean(std::size_t required, double p,
                                             std::size_t sequences, std::uint64_t seed);

}  // namespace cbsel
