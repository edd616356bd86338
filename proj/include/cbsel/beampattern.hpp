#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "cbsel/core.hpp"
#include "cbsel/parallel.hpp"
#include "cbsel/rng.hpp"
#include "cbsel/units.hpp"

namespace cbsel {

using Complex = std::complex<double>;

/// Propagation phase of a node toward `direction`, with the common 2*pi*A
/// term dropped: -2*pi*rho*cos(direction - psi). The coherent initial phase
/// for a target direction is the same expression evaluated at the target.
inline double steering_phase(const NodePosition& node, double direction) {
  return -kTwoPi * node.radius * std::cos(direction - node.azimuth);
}

struct PhaseAssignment {
  std::vector<double> phases;  // one per participating node, in node-set order
  double target = 0.0;
};

struct BeampatternSample {
  std::vector<double> angles;
  std::vector<double> power;  // linear, |AF|^2
  std::vector<std::size_t> nodes;
  double node_power = 0.0;
};

/// Real and imaginary interference sums of one group at one victim BS.
struct InterferenceComponents {
  double x = 0.0;
  double y = 0.0;
  double power() const { return x * x + y * y; }
};

/// Closed-loop phases that align every node at `target`. Throws on an
/// empty node set.
PhaseAssignment synchronize(const NetworkRealization& network,
                            std::span<const std::size_t> nodes, double target);

/// sum_r sqrt(P) e^{j theta_r^k} e^{-j theta_r(phi)} (no channel gains).
Complex array_factor(const NetworkRealization& network,
                     std::span<const std::size_t> nodes,
                     const PhaseAssignment& phases, double node_power,
                     double direction);

/// |array_factor|^2 on the grid. The parallel path splits the grid across
/// threads; the serial path is the reference.
BeampatternSample sample_beampattern(const NetworkRealization& network,
                                     std::span<const std::size_t> nodes,
                                     const PhaseAssignment& phases,
                                     double node_power,
                                     std::span<const double> angles,
                                     Execution exec = Execution::Parallel);

/// `points` equally spaced angles covering [-pi, pi] inclusive.
std::vector<double> uniform_angle_grid(std::size_t points = 3601);

/// Mean beampattern over `realizations` independent networks, each using a
/// uniformly random subset of `set_size` nodes steered to the intended BS.
/// Realization i uses seeds.child(i); the sum runs in index order.
BeampatternSample average_beampattern(const Scenario& scenario,
                                      std::size_t set_size,
                                      std::size_t realizations,
                                      double node_power, const SeedTree& seeds,
                                      std::span<const double> angles,
                                      Execution exec = Execution::Parallel);

/// Angles of the `count` highest local maxima of `pattern`, skipping the
/// mainlobe (the run around `target` down to the first local minimum on
/// each side).
/// Sorted by descending power.
std::vector<double> sidelobe_peaks(const BeampatternSample& pattern,
                                   double target, std::size_t count);

/// Full -3 dB width (radians) of the mainlobe around `target`, located by
/// stepping outward and bisecting each crossing to `tolerance`.
double mainlobe_width(const NetworkRealization& network,
                      std::span<const std::size_t> nodes,
                      const PhaseAssignment& phases, double node_power,
                      double tolerance = 1e-7);

/// X = sqrt(P) sum a_{r,victim} x_r and Y = sqrt(P) sum a_{r,victim} y_r with
/// x_r - j y_r = e^{j(theta_r^{target} - theta_r^{victim})}, the group's
/// contribution at the victim BS when steered to the target BS.
InterferenceComponents group_interference(const NetworkRealization& network,
                                          std::span<const std::size_t> group,
                                          std::size_t target_bs,
                                          std::size_t victim_bs,
                                          double node_power);

/// One selected set transmitting toward its own intended BS (index 0 of its
/// network), observed at `victim_bs` of the same network.
struct ActiveCluster {
  std::reference_wrapper<const NetworkRealization> network;
  std::span<const std::size_t> nodes;
  std::size_t victim_bs = 1;
};

/// sum_r sqrt(P) a_r (x_r - j y_r) for one cluster, unit symbol.
Complex cluster_interference(const ActiveCluster& cluster, double node_power);

/// Instantaneous total INR for one symbol per cluster:
///   |sum_k z_k sum_r sqrt(noise*snr/N) a_r (x_r - j y_r)|^2 / noise.
/// Clusters drawn from the same network must have disjoint node sets.
double total_received_inr(std::span<const ActiveCluster> clusters,
                          std::span<const Complex> symbols,
                          std::size_t nodes_per_cluster, double target_snr,
                          double noise_power);

/// Symbol-averaged total INR: sum_k |C_k|^2 / noise, the expectation of
/// total_received_inr over independent unit-power symbols.
double mean_received_inr(std::span<const ActiveCluster> clusters,
                         std::size_t nodes_per_cluster, double target_snr,
                         double noise_power);

/// Unit-magnitude symbols with uniform random phase.
std::vector<Complex> draw_symbols(std::size_t count, RngStream& stream);

}  // namespace cbsel
