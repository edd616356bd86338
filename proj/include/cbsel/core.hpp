#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cbsel/channel.hpp"
#include "cbsel/rng.hpp"

namespace cbsel {

class ScenarioError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class NodeDistribution { UniformDisk, GaussianDisk };

/// Plain experiment parameters. Angles in radians, powers linear, distances
/// in wavelengths. Validated when a Scenario is built from them.
struct ScenarioParams {
  std::size_t num_candidates = 512;  // M
  std::size_t num_selected = 256;    // N
  std::size_t group_size = 32;       // L
  double disk_radius = 2.0;
  double intended_direction = 0.0;
  std::vector<double> unintended_directions;
  double inr_threshold = 10.0;
  // Optional per-BS thresholds for BSs 1..D; empty means inr_threshold.
  std::vector<double> per_bs_thresholds;
  double target_snr = 100.0;
  double noise_power = 1.0;
  LognormalParams shadowing{0.0, 0.2};
  NodeDistribution distribution = NodeDistribution::UniformDisk;
  std::uint64_t seed = 1;
};

/// Validated, immutable experiment parameters.
///
/// Base stations are indexed 0..D: index 0 is the intended BS, 1..D the
/// unintended ones, in the order given.
class Scenario {
 public:
  /// Throws ScenarioError if any invariant fails.
  explicit Scenario(ScenarioParams params);

  const ScenarioParams& params() const noexcept { return params_; }

  std::size_t num_candidates() const noexcept { return params_.num_candidates; }
  std::size_t num_selected() const noexcept { return params_.num_selected; }
  std::size_t group_size() const noexcept { return params_.group_size; }
  std::size_t num_unintended() const noexcept {
    return params_.unintended_directions.size();
  }
  std::size_t num_stations() const noexcept { return num_unintended() + 1; }
  double disk_radius() const noexcept { return params_.disk_radius; }
  double noise_power() const noexcept { return params_.noise_power; }
  double target_snr() const noexcept { return params_.target_snr; }
  double inr_threshold() const noexcept { return params_.inr_threshold; }
  const LognormalParams& shadowing() const noexcept { return params_.shadowing; }
  NodeDistribution distribution() const noexcept { return params_.distribution; }
  std::uint64_t seed() const noexcept { return params_.seed; }

  double direction(std::size_t bs) const;
  /// Threshold applied by BS `bs` when it is a victim.
  double threshold(std::size_t bs) const;

  /// ceil(N / L), the number of groups that must be approved.
  std::size_t num_groups() const noexcept;
  /// Size of the l-th approved group (0-based); the last one takes the
  /// remainder of N / L when L does not divide N.
  std::size_t group_size_at(std::size_t l) const;

 private:
  ScenarioParams params_;
};

/// Polar node coordinates around the source node; radius in wavelengths.
struct NodePosition {
  double radius = 0.0;
  double azimuth = 0.0;
};

/// One Monte Carlo instance: M node positions and an M x (D+1) matrix of
/// shadowing gains a_{rk} (node r toward BS k), row-major.
class NetworkRealization {
 public:
  NetworkRealization(Scenario scenario, std::vector<NodePosition> positions,
                     std::vector<double> shadowing);

  const Scenario& scenario() const noexcept { return scenario_; }
  std::size_t size() const noexcept { return positions_.size(); }
  std::size_t num_stations() const noexcept { return stations_; }

  std::span<const NodePosition> positions() const noexcept { return positions_; }
  const NodePosition& position(std::size_t node) const { return positions_[node]; }

  double gain(std::size_t node, std::size_t bs) const {
    return shadowing_[node * stations_ + bs];
  }
  std::span<const double> gains(std::size_t node) const {
    return {shadowing_.data() + node * stations_, stations_};
  }
  std::span<const double> shadowing() const noexcept { return shadowing_; }

  /// Overwrites one node's placement and gains (per-trial redraw).
  void replace_node(std::size_t node, NodePosition position,
                    std::span<const double> gains);

 private:
  Scenario scenario_;
  std::vector<NodePosition> positions_;
  std::vector<double> shadowing_;
  std::size_t stations_;
};

NodePosition sample_position(NodeDistribution distribution, double radius,
                             RngStream& stream);

/// Draws M positions from the Positions stream and the shadowing matrix
/// from the Shadowing stream of `seeds`.
NetworkRealization sample_network(const Scenario& scenario, const SeedTree& seeds);

/// Same, rooted at scenario.seed().
NetworkRealization sample_network(const Scenario& scenario);

/// Far-field distance to the point (range, direction): range - rho cos(direction - psi).
/// Requires range >= 100 * array_radius.
double far_field_distance(const NodePosition& node, double direction,
                          double range, double array_radius);

}  // namespace cbsel
