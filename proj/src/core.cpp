#include "cbsel/core.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "cbsel/units.hpp"

namespace cbsel {

namespace {

bool in_half_open_circle(double angle) { return angle >= -kPi && angle < kPi; }

void check(bool ok, const std::string& what) {
  if (!ok) throw ScenarioError("invalid scenario: " + what);
}

}  // namespace

Scenario::Scenario(ScenarioParams params) : params_(std::move(params)) {
  const auto& p = params_;
  check(p.group_size >= 1, "group size L must be at least 1");
  check(p.group_size <= p.num_selected, "group size L must not exceed N");
  check(p.num_selected <= p.num_candidates, "N must not exceed M");
  check(!p.unintended_directions.empty(), "at least one unintended BS is required");
  check(std::isfinite(p.disk_radius) && p.disk_radius > 0.0, "disk radius must be positive");
  check(std::isfinite(p.noise_power) && p.noise_power > 0.0, "noise power must be positive");
  check(std::isfinite(p.target_snr) && p.target_snr > 0.0, "target SNR must be positive");
  check(std::isfinite(p.shadowing.mean), "lognormal mean must be finite");
  check(std::isfinite(p.shadowing.variance) && p.shadowing.variance >= 0.0,
        "lognormal variance must be non-negative");
  check(p.inr_threshold > 0.0, "INR threshold must be positive");
  check(in_half_open_circle(p.intended_direction), "intended direction outside [-pi, pi)");
  for (double d : p.unintended_directions) {
    check(in_half_open_circle(d), "unintended direction outside [-pi, pi)");
    check(d != p.intended_direction, "intended direction repeated among unintended BSs");
  }
  if (!p.per_bs_thresholds.empty()) {
    check(p.per_bs_thresholds.size() == p.unintended_directions.size(),
          "per-BS threshold list must have one entry per unintended BS");
    for (double t : p.per_bs_thresholds) check(t > 0.0, "per-BS thresholds must be positive");
  }
}

double Scenario::direction(std::size_t bs) const {
  if (bs == 0) return params_.intended_direction;
  return params_.unintended_directions.at(bs - 1);
}

double Scenario::threshold(std::size_t bs) const {
  if (bs >= 1 && !params_.per_bs_thresholds.empty()) {
    return params_.per_bs_thresholds.at(bs - 1);
  }
  return params_.inr_threshold;
}

std::size_t Scenario::num_groups() const noexcept {
  return (params_.num_selected + params_.group_size - 1) / params_.group_size;
}

std::size_t Scenario::group_size_at(std::size_t l) const {
  const std::size_t groups = num_groups();
  if (l >= groups) throw std::out_of_range("group index past the last group");
  const std::size_t rem = params_.num_selected % params_.group_size;
  return (l + 1 == groups && rem != 0) ? rem : params_.group_size;
}

NetworkRealization::NetworkRealization(Scenario scenario,
                                       std::vector<NodePosition> positions,
                                       std::vector<double> shadowing)
    : scenario_(std::move(scenario)),
      positions_(std::move(positions)),
      shadowing_(std::move(shadowing)),
      stations_(scenario_.num_stations()) {
  if (positions_.size() != scenario_.num_candidates()) {
    throw std::invalid_argument("position count does not match M");
  }
  if (shadowing_.size() != positions_.size() * stations_) {
    throw std::invalid_argument("shadowing matrix must be M x (D+1)");
  }
  if (!std::all_of(shadowing_.begin(), shadowing_.end(), [](double a) { return a > 0.0; })) {
    throw std::invalid_argument("shadowing gains must be positive");
  }
}

void NetworkRealization::replace_node(std::size_t node, NodePosition position,
                                      std::span<const double> gains) {
  if (gains.size() != stations_) throw std::invalid_argument("gain row has wrong length");
  positions_.at(node) = position;
  std::copy(gains.begin(), gains.end(), shadowing_.begin() + node * stations_);
}

NodePosition sample_position(NodeDistribution distribution, double radius,
                             RngStream& stream) {
  if (distribution == NodeDistribution::UniformDisk) {
    const double rho = radius * std::sqrt(stream.uniform());
    const double psi = kTwoPi * stream.uniform() - kPi;
    return {rho, psi};
  }
  const double x = stream.normal(0.0, radius);
  const double y = stream.normal(0.0, radius);
  return {std::hypot(x, y), wrap_angle(std::atan2(y, x))};
}

NetworkRealization sample_network(const Scenario& scenario, const SeedTree& seeds) {
  RngStream pos_stream = seeds.stream(StreamId::Positions);
  RngStream gain_stream = seeds.stream(StreamId::Shadowing);

  std::vector<NodePosition> positions(scenario.num_candidates());
  for (auto& p : positions) {
    p = sample_position(scenario.distribution(), scenario.disk_radius(), pos_stream);
  }
  std::vector<double> gains(scenario.num_candidates() * scenario.num_stations());
  draw_shadowing(scenario.shadowing(), gains, gain_stream);
  return NetworkRealization(scenario, std::move(positions), std::move(gains));
}

NetworkRealization sample_network(const Scenario& scenario) {
  return sample_network(scenario, SeedTree(scenario.seed()));
}

double far_field_distance(const NodePosition& node, double direction,
                          double range, double array_radius) {
  if (!(range >= 100.0 * array_radius)) {
    throw std::invalid_argument("far-field range must be at least 100 array radii");
  }
  return range - node.radius * std::cos(direction - node.azimuth);
}

}  // namespace cbsel
