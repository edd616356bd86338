#include "cbsel/beampattern.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

namespace cbsel {

namespace {

void check_nodes(const NetworkRealization& network, std::span<const std::size_t> nodes) {
  for (std::size_t r : nodes) {
    if (r >= network.size()) throw std::out_of_range("node index out of range");
  }
}

}  // namespace

PhaseAssignment synchronize(const NetworkRealization& network,
                            std::span<const std::size_t> nodes, double target) {
  if (nodes.empty()) throw std::invalid_argument("cannot synchronize an empty node set");
  check_nodes(network, nodes);
  PhaseAssignment out;
  out.target = target;
  out.phases.reserve(nodes.size());
  for (std::size_t r : nodes) out.phases.push_back(steering_phase(network.position(r), target));
  return out;
}

Complex array_factor(const NetworkRealization& network,
                     std::span<const std::size_t> nodes,
                     const PhaseAssignment& phases, double node_power,
                     double direction) {
  if (phases.phases.size() != nodes.size()) {
    throw std::invalid_argument("phase assignment does not match node set");
  }
  double re = 0.0;
  double im = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const double phase = phases.phases[i] - steering_phase(network.position(nodes[i]), direction);
    re += std::cos(phase);
    im += std::sin(phase);
  }
  const double amp = std::sqrt(node_power);
  return {amp * re, amp * im};
}

BeampatternSample sample_beampattern(const NetworkRealization& network,
                                     std::span<const std::size_t> nodes,
                                     const PhaseAssignment& phases,
                                     double node_power,
                                     std::span<const double> angles,
                                     Execution exec) {
  if (!(node_power > 0.0)) throw std::invalid_argument("node power must be positive");
  check_nodes(network, nodes);
  BeampatternSample out;
  out.angles.assign(angles.begin(), angles.end());
  out.power.resize(angles.size());
  out.nodes.assign(nodes.begin(), nodes.end());
  out.node_power = node_power;
  for_each_index(angles.size(), exec, [&](std::size_t i) {
    out.power[i] = std::norm(array_factor(network, nodes, phases, node_power, angles[i]));
  });
  return out;
}

std::vector<double> uniform_angle_grid(std::size_t points) {
  if (points < 2) throw std::invalid_argument("angle grid needs at least two points");
  std::vector<double> grid(points);
  const double step = kTwoPi / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) grid[i] = -kPi + step * static_cast<double>(i);
  grid.back() = kPi;
  return grid;
}

BeampatternSample average_beampattern(const Scenario& scenario,
                                      std::size_t set_size,
                                      std::size_t realizations,
                                      double node_power, const SeedTree& seeds,
                                      std::span<const double> angles,
                                      Execution exec) {
  if (realizations == 0) throw std::invalid_argument("need at least one realization");
  if (set_size == 0 || set_size > scenario.num_candidates()) {
    throw std::invalid_argument("set size must be in [1, M]");
  }
  std::vector<std::vector<double>> patterns(realizations);
  for_each_index(realizations, exec, [&](std::size_t i) {
    const SeedTree child = seeds.child(i);
    const NetworkRealization network = sample_network(scenario, child);
    RngStream pick = child.stream(StreamId::Selection);
    std::vector<std::size_t> pool(network.size());
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    for (std::size_t k = 0; k < set_size; ++k) {
      std::swap(pool[k], pool[k + pick.index(pool.size() - k)]);
    }
    pool.resize(set_size);
    const auto phases = synchronize(network, pool, scenario.direction(0));
    patterns[i] = sample_beampattern(network, pool, phases, node_power, angles,
                                     Execution::Serial).power;
  });

  BeampatternSample out;
  out.angles.assign(angles.begin(), angles.end());
  out.power.assign(angles.size(), 0.0);
  out.node_power = node_power;
  for (const auto& p : patterns) {
    for (std::size_t j = 0; j < p.size(); ++j) out.power[j] += p[j];
  }
  for (double& v : out.power) v /= static_cast<double>(realizations);
  return out;
}

std::vector<double> sidelobe_peaks(const BeampatternSample& pattern,
                                   double target, std::size_t count) {
  const auto& a = pattern.angles;
  const auto& p = pattern.power;
  if (a.size() < 3 || a.size() != p.size()) {
    throw std::invalid_argument("pattern needs at least three samples");
  }
  std::size_t centre = 0;
  for (std::size_t i = 1; i < a.size(); ++i) {
    if (std::abs(a[i] - target) < std::abs(a[centre] - target)) centre = i;
  }
  // Mainlobe = run from the centre down to the first local minimum each side.
  std::size_t lo = centre;
  while (lo > 0 && p[lo - 1] <= p[lo]) --lo;
  std::size_t hi = centre;
  while (hi + 1 < p.size() && p[hi + 1] <= p[hi]) ++hi;

  std::vector<std::size_t> peaks;
  for (std::size_t i = 1; i + 1 < p.size(); ++i) {
    if (i >= lo && i <= hi) continue;
    if (p[i] > p[i - 1] && p[i] >= p[i + 1]) peaks.push_back(i);
  }
  std::stable_sort(peaks.begin(), peaks.end(),
                   [&](std::size_t x, std::size_t y) { return p[x] > p[y]; });
  if (peaks.size() > count) peaks.resize(count);
  std::vector<double> out;
  out.reserve(peaks.size());
  for (std::size_t i : peaks) out.push_back(a[i]);
  return out;
}

double mainlobe_width(const NetworkRealization& network,
                      std::span<const std::size_t> nodes,
                      const PhaseAssignment& phases, double node_power,
                      double tolerance) {
  const double target = phases.target;
  auto bp = [&](double phi) {
    return std::norm(array_factor(network, nodes, phases, node_power, phi));
  };
  const double half = 0.5 * bp(target);
  const double step = deg_to_rad(0.1);

  auto crossing = [&](double sign) {
    double inside = 0.0;
    double outside = step;
    while (bp(target + sign * outside) >= half) {
      inside = outside;
      outside += step;
      if (outside > kPi) return kPi;
    }
    while (outside - inside > tolerance) {
      const double mid = 0.5 * (inside + outside);
      (bp(target + sign * mid) >= half ? inside : outside) = mid;
    }
    return 0.5 * (inside + outside);
  };
  return crossing(+1.0) + crossing(-1.0);
}

InterferenceComponents group_interference(const NetworkRealization& network,
                                          std::span<const std::size_t> group,
                                          std::size_t target_bs,
                                          std::size_t victim_bs,
                                          double node_power) {
  if (group.empty()) throw std::invalid_argument("interference of an empty group");
  check_nodes(network, group);
  const Scenario& s = network.scenario();
  const double to_target = s.direction(target_bs);
  const double to_victim = s.direction(victim_bs);
  double x = 0.0;
  double y = 0.0;
  for (std::size_t r : group) {
    const auto& pos = network.position(r);
    const double delta = steering_phase(pos, to_target) - steering_phase(pos, to_victim);
    const double a = network.gain(r, victim_bs);
    x += a * std::cos(delta);
    y -= a * std::sin(delta);
  }
  const double amp = std::sqrt(node_power);
  return {amp * x, amp * y};
}

Complex cluster_interference(const ActiveCluster& cluster, double node_power) {
  const auto c = group_interference(cluster.network.get(), cluster.nodes, 0,
                                    cluster.victim_bs, node_power);
  return {c.x, -c.y};
}

namespace {

void check_disjoint(std::span<const ActiveCluster> clusters) {
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    for (std::size_t j = i + 1; j < clusters.size(); ++j) {
      if (&clusters[i].network.get() != &clusters[j].network.get()) continue;
      std::unordered_set<std::size_t> seen(clusters[i].nodes.begin(), clusters[i].nodes.end());
      for (std::size_t r : clusters[j].nodes) {
        if (seen.contains(r)) throw std::invalid_argument("active clusters share a node");
      }
    }
  }
}

double node_power_for(std::size_t nodes_per_cluster, double target_snr, double noise_power) {
  if (nodes_per_cluster == 0) throw std::invalid_argument("cluster size must be positive");
  return noise_power * target_snr / static_cast<double>(nodes_per_cluster);
}

}  // namespace

double total_received_inr(std::span<const ActiveCluster> clusters,
                          std::span<const Complex> symbols,
                          std::size_t nodes_per_cluster, double target_snr,
                          double noise_power) {
  if (symbols.size() != clusters.size()) {
    throw std::invalid_argument("need one symbol per active cluster");
  }
  check_disjoint(clusters);
  const double p = node_power_for(nodes_per_cluster, target_snr, noise_power);
  Complex total{0.0, 0.0};
  for (std::size_t k = 0; k < clusters.size(); ++k) {
    total += symbols[k] * cluster_interference(clusters[k], p);
  }
  return std::norm(total) / noise_power;
}

double mean_received_inr(std::span<const ActiveCluster> clusters,
                         std::size_t nodes_per_cluster, double target_snr,
                         double noise_power) {
  check_disjoint(clusters);
  const double p = node_power_for(nodes_per_cluster, target_snr, noise_power);
  double total = 0.0;
  for (const auto& c : clusters) total += std::norm(cluster_interference(c, p));
  return total / noise_power;
}

std::vector<Complex> draw_symbols(std::size_t count, RngStream& stream) {
  std::vector<Complex> out(count);
  for (auto& z : out) z = std::polar(1.0, kTwoPi * stream.uniform() - kPi);
  return out;
}

}  // namespace cbsel
