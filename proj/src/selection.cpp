#include "cbsel/selection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "cbsel/beampattern.hpp"

namespace cbsel {

namespace {

// Per-node terms a_{r,v} cos(delta) and a_{r,v} sin(delta) for every victim
// v, laid out so that a group sum performs exactly the same floating-point
// operations as group_interference(). Replays therefore reproduce verdicts
// bit for bit.
class InterferenceTable {
 public:
  InterferenceTable(const NetworkRealization& network, std::size_t target_bs,
                    std::vector<std::size_t> victims)
      : target_(target_bs), victims_(std::move(victims)) {
    cos_.resize(network.size() * victims_.size());
    sin_.resize(cos_.size());
    for (std::size_t r = 0; r < network.size(); ++r) refresh(network, r);
  }

  void refresh(const NetworkRealization& network, std::size_t node) {
    const Scenario& s = network.scenario();
    const auto& pos = network.position(node);
    const double to_target = steering_phase(pos, s.direction(target_));
    for (std::size_t v = 0; v < victims_.size(); ++v) {
      const std::size_t bs = victims_[v];
      const double delta = to_target - steering_phase(pos, s.direction(bs));
      const double a = network.gain(node, bs);
      cos_[node * victims_.size() + v] = a * std::cos(delta);
      sin_[node * victims_.size() + v] = a * std::sin(delta);
    }
  }

  /// Interference power at victim slot v for the group.
  double power(std::span<const std::size_t> group, std::size_t v, double amp) const {
    double x = 0.0;
    double y = 0.0;
    for (std::size_t r : group) {
      x += cos_[r * victims_.size() + v];
      y -= sin_[r * victims_.size() + v];
    }
    x *= amp;
    y *= amp;
    return x * x + y * y;
  }

  const std::vector<std::size_t>& victims() const noexcept { return victims_; }

 private:
  std::size_t target_;
  std::vector<std::size_t> victims_;
  std::vector<double> cos_;
  std::vector<double> sin_;
};

void check_compatible(const NetworkRealization& network, const Scenario& scenario) {
  const Scenario& own = network.scenario();
  bool same = network.size() == scenario.num_candidates() &&
              own.num_stations() == scenario.num_stations() &&
              own.disk_radius() == scenario.disk_radius() &&
              own.distribution() == scenario.distribution();
  for (std::size_t bs = 0; same && bs < own.num_stations(); ++bs) {
    same = own.direction(bs) == scenario.direction(bs);
  }
  if (!same) throw std::invalid_argument("scenario does not match the network geometry");
}

std::vector<std::size_t> victims_of(std::size_t stations, std::size_t target) {
  std::vector<std::size_t> v;
  for (std::size_t bs = 0; bs < stations; ++bs) {
    if (bs != target) v.push_back(bs);
  }
  return v;
}

}  // namespace

std::size_t default_max_trials(const Scenario& scenario) {
  return 10000 * scenario.num_groups();
}

SelectionOutcome run_selection(const NetworkRealization& network,
                               const Scenario& scenario, const SeedTree& seeds,
                               const SelectionOptions& options) {
  std::vector<std::size_t> pool(network.size());
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  return run_selection(network, scenario, 0, std::move(pool), seeds, options);
}

SelectionOutcome run_selection(const NetworkRealization& network,
                               const Scenario& scenario, std::size_t target_bs,
                               std::vector<std::size_t> pool,
                               const SeedTree& seeds,
                               const SelectionOptions& options) {
  check_compatible(network, scenario);
  if (target_bs >= network.num_stations()) throw std::out_of_range("target BS index");
  for (std::size_t r : pool) {
    if (r >= network.size()) throw std::out_of_range("pool node index");
  }
  const std::size_t groups = scenario.num_groups();
  const std::size_t max_trials =
      options.max_trials == 0 ? default_max_trials(scenario) : options.max_trials;
  if (max_trials < groups) throw std::invalid_argument("max_trials below ceil(N/L)");

  SelectionOutcome out;
  out.target_bs = target_bs;
  out.mode = options.mode;
  const bool redraw = options.mode == ChannelMode::RedrawPerTrial;
  if (redraw) out.tested_network = network;
  const NetworkRealization& net = redraw ? *out.tested_network : network;

  auto& state = out.state;
  state.pool = std::move(pool);
  if (state.pool.size() < scenario.num_selected()) return out;

  InterferenceTable table(net, target_bs, victims_of(net.num_stations(), target_bs));
  const auto& victims = table.victims();
  RngStream pick = seeds.stream(StreamId::Selection);
  std::vector<double> row(net.num_stations());
  std::vector<double> inr(victims.size());

  while (state.approved_count() < groups) {
    if (out.trials == max_trials) return out;
    const std::size_t size = scenario.group_size_at(state.approved_count());
    if (state.pool.size() < size) throw std::logic_error("selection pool exhausted");

    auto& p = state.pool;
    for (std::size_t i = 0; i < size; ++i) std::swap(p[i], p[i + pick.index(p.size() - i)]);
    const std::span<const std::size_t> group(p.data(), size);

    if (redraw) {
      RngStream fresh = seeds.stream(StreamId::Redraw, out.trials);
      for (std::size_t r : group) {
        const NodePosition pos =
            sample_position(scenario.distribution(), scenario.disk_radius(), fresh);
        draw_shadowing(scenario.shadowing(), row, fresh);
        out.tested_network->replace_node(r, pos, row);
        table.refresh(net, r);
      }
    }
    ++out.trials;

    const double node_power = scenario.noise_power() * scenario.target_snr() / static_cast<double>(size);
    const double amp = std::sqrt(node_power);
    std::optional<std::size_t> rejecting;
    std::size_t rejects = 0;
    for (std::size_t v = 0; v < victims.size(); ++v) {
      inr[v] = table.power(group, v, amp) / scenario.noise_power();
      if (inr[v] > scenario.threshold(victims[v])) {
        ++rejects;
        if (!rejecting) rejecting = victims[v];
      }
    }

    auto& msg = out.messages;
    ++msg.select;
    msg.offer += size;
    msg.approval += size;
    ++msg.test;
    msg.reject += rejects;

    if (options.record_trials) {
      state.trial_log.push_back({std::vector<std::size_t>(group.begin(), group.end()),
                                 victims, inr,
                                 rejecting ? Verdict::Rejected : Verdict::Approved,
                                 rejecting});
    }
    if (!rejecting) {
      state.approved.emplace_back(group.begin(), group.end());
      out.selected.insert(out.selected.end(), group.begin(), group.end());
      p.erase(p.begin(), p.begin() + static_cast<std::ptrdiff_t>(size));
    }
  }
  ++out.messages.end;
  out.status = SelectionStatus::Converged;
  return out;
}

bool verify_outcome(const SelectionOutcome& outcome,
                    const NetworkRealization& network, const Scenario& scenario) {
  if (!outcome.converged()) return false;
  const NetworkRealization& net = outcome.tested_network ? *outcome.tested_network : network;
  if (net.size() != scenario.num_candidates() ||
      net.num_stations() != scenario.num_stations() ||
      outcome.target_bs >= net.num_stations()) {
    return false;
  }
  const auto& groups = outcome.state.approved;
  if (groups.size() != scenario.num_groups()) return false;

  std::vector<char> used(net.size(), 0);
  std::size_t total = 0;
  for (std::size_t l = 0; l < groups.size(); ++l) {
    if (groups[l].size() != scenario.group_size_at(l)) return false;
    for (std::size_t r : groups[l]) {
      if (r >= net.size() || used[r]) return false;
      used[r] = 1;
      ++total;
    }
  }
  if (total != scenario.num_selected() || outcome.selected.size() != total) return false;
  for (std::size_t r : outcome.selected) {
    if (r >= net.size() || used[r] != 1) return false;
    used[r] = 2;
  }
  for (std::size_t r : outcome.state.pool) {
    if (r < net.size() && used[r] != 0) return false;
  }

  for (const auto& g : groups) {
    const double node_power = scenario.noise_power() * scenario.target_snr() / static_cast<double>(g.size());
    for (std::size_t bs = 0; bs < net.num_stations(); ++bs) {
      if (bs == outcome.target_bs) continue;
      const double inr =
          group_interference(net, g, outcome.target_bs, bs, node_power).power() /
          scenario.noise_power();
      if (!(inr <= scenario.threshold(bs))) return false;
    }
  }
  return true;
}

std::vector<SelectionOutcome> run_multi_cluster(
    std::span<const NetworkRealization> networks, const SeedTree& seeds,
    const SelectionOptions& options) {
  std::vector<SelectionOutcome> out;
  out.reserve(networks.size());
  for (std::size_t c = 0; c < networks.size(); ++c) {
    out.push_back(run_selection(networks[c], networks[c].scenario(), seeds.child(c), options));
  }
  return out;
}

std::vector<SelectionOutcome> run_shared_pool(
    const NetworkRealization& network, const Scenario& scenario,
    std::span<const std::size_t> targets, const SeedTree& seeds,
    const SelectionOptions& options) {
  std::vector<std::size_t> pool(network.size());
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  std::vector<SelectionOutcome> out;
  out.reserve(targets.size());
  for (std::size_t c = 0; c < targets.size(); ++c) {
    auto outcome = run_selection(network, scenario, targets[c], pool, seeds.child(c), options);
    if (outcome.converged()) {
      std::vector<char> taken(network.size(), 0);
      for (std::size_t r : outcome.selected) taken[r] = 1;
      std::erase_if(pool, [&](std::size_t r) { return taken[r] != 0; });
    }
    out.push_back(std::move(outcome));
  }
  return out;
}

}  // namespace cbsel
