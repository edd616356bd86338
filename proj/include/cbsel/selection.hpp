#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "cbsel/core.hpp"
#include "cbsel/rng.hpp"

namespace cbsel {

enum class ChannelMode {
  // Placement and shadowing drawn once per realization and reused by every
  // trial.
  FixedPerRealization,
  // Each trial re-samples the tested nodes' placement and shadowing from a
  // per-trial substream, so verdicts are i.i.d. Bernoulli draws.
  RedrawPerTrial,
};

enum class Verdict { Approved, Rejected };

struct TrialRecord {
  std::vector<std::size_t> group;
  std::vector<std::size_t> victims;  // BS indices, parallel to `inr`
  std::vector<double> inr;           // linear INR at each victim
  Verdict verdict = Verdict::Rejected;
  std::optional<std::size_t> rejecting_bs;  // first victim over threshold
};

/// Tallies of the select/offer/approval/test/reject/end handshake. No
/// timing is modelled.
struct MessageCounts {
  std::size_t select = 0;
  std::size_t offer = 0;
  std::size_t approval = 0;
  std::size_t test = 0;
  std::size_t reject = 0;
  std::size_t end = 0;
};

struct SelectionState {
  std::vector<std::size_t> pool;                  // nodes still available
  std::vector<std::vector<std::size_t>> approved;  // approved groups, in order
  std::vector<TrialRecord> trial_log;              // empty unless recorded

  std::size_t approved_count() const noexcept { return approved.size(); }
};

enum class SelectionStatus { Converged, NonConvergence };

struct SelectionOutcome {
  SelectionStatus status = SelectionStatus::NonConvergence;
  std::vector<std::size_t> selected;  // union of approved groups
  std::size_t trials = 0;
  std::size_t target_bs = 0;
  ChannelMode mode = ChannelMode::FixedPerRealization;
  SelectionState state;
  MessageCounts messages;
  // Network as seen by the tests. Present only in RedrawPerTrial mode,
  // where approved nodes carry the placement/gains they were tested with.
  std::optional<NetworkRealization> tested_network;

  bool converged() const noexcept { return status == SelectionStatus::Converged; }
};

struct SelectionOptions {
  ChannelMode mode = ChannelMode::FixedPerRealization;
  std::size_t max_trials = 0;  // 0 selects the default 10^4 * ceil(N/L)
  bool record_trials = true;
};

std::size_t default_max_trials(const Scenario& scenario);

/// Iterative random group selection toward the intended BS (index 0).
///
/// Each trial draws the next group uniformly without replacement from the
/// pool (partial Fisher-Yates on the Selection stream of `seeds`), steers
/// it to the target with per-node power noise*snr/|group|, and measures the
/// INR at every other BS. A group over any threshold is returned to the
/// pool; otherwise it is approved and leaves the pool for good. Stops after
/// ceil(N/L) approvals or max_trials trials (NonConvergence).
///
/// `scenario` supplies N, L, thresholds and powers and must match the
/// network's geometry (M, BS directions). Passing a different threshold
/// with the same network is allowed.
SelectionOutcome run_selection(const NetworkRealization& network,
                               const Scenario& scenario, const SeedTree& seeds,
                               const SelectionOptions& options = {});

/// Same, steering to `target_bs` and drawing only from `pool`; every other
/// BS of the network is a victim.
SelectionOutcome run_selection(const NetworkRealization& network,
                               const Scenario& scenario, std::size_t target_bs,
                               std::vector<std::size_t> pool,
                               const SeedTree& seeds,
                               const SelectionOptions& options = {});

/// Replays an outcome from raw network data: sizes, disjointness, and the
/// INR of every approved group at every victim against its threshold.
bool verify_outcome(const SelectionOutcome& outcome,
                    const NetworkRealization& network, const Scenario& scenario);

/// One selection per network, each toward that network's intended BS.
/// Cluster c uses seeds.child(c).
std::vector<SelectionOutcome> run_multi_cluster(
    std::span<const NetworkRealization> networks, const SeedTree& seeds,
    const SelectionOptions& options = {});

/// Sequential selections from one shared pool, cluster c steering to
/// targets[c]. Approved nodes never return to the pool, so the selected
/// sets are pairwise disjoint. Once the pool cannot supply another N nodes
/// the remaining clusters report NonConvergence.
std::vector<SelectionOutcome> run_shared_pool(
    const NetworkRealization& network, const Scenario& scenario,
    std::span<const std::size_t> targets, const SeedTree& seeds,
    const SelectionOptions& options = {});

}  // namespace cbsel
