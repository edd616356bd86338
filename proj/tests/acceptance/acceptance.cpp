// End-to-end acceptance run: one PASS/FAIL line per criterion.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "cbsel/analysis.hpp"
#include "cbsel/beampattern.hpp"
#include "cbsel/montecarlo.hpp"
#include "cbsel/selection.hpp"
#include "cbsel/units.hpp"

using namespace cbsel;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::vector<int> failed;

void criterion(int id, const char* name, double budget_s, const std::function<Verdict()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Verdict v;
  try {
    v = body();
  } catch (const std::exception& e) {
    v = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!v.pass) failed.push_back(id);
  std::printf("[%s] %d %s: %s; time %.1f s (target < %.0f s)\n", v.pass ? "PASS" : "FAIL", id,
              name, v.detail.c_str(), secs, budget_s);
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Shared figure setup: M=512, N=256, L=32, R=5, sigma_w^2 = 0.05, 20 dB SNR.
ScenarioParams figure_params() {
  ScenarioParams p;
  p.num_candidates = 512;
  p.num_selected = 256;
  p.group_size = 32;
  p.disk_radius = 5.0;
  p.unintended_directions = {deg_to_rad(65.0)};
  p.noise_power = 0.05;
  p.target_snr = 100.0;
  p.shadowing = {0.0, 0.2};
  return p;
}

// Case setup: R=2, eta_thr = 10 dB, 20 dB budget split as noise 10 dB, SNR 10 dB.
ScenarioParams case_params() {
  ScenarioParams p;
  p.num_candidates = 512;
  p.num_selected = 256;
  p.group_size = 32;
  p.disk_radius = 2.0;
  p.noise_power = 10.0;
  p.target_snr = 10.0;
  p.shadowing = {0.0, 0.2};
  p.inr_threshold = 10.0;
  return p;
}

std::vector<double> degrees(std::initializer_list<double> d) {
  std::vector<double> out;
  for (double x : d) out.push_back(deg_to_rad(x));
  return out;
}

std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  return out;
}

// ---------------------------------------------------------------------------

Verdict appendix_moments() {
  const auto m = simulate_phase_moments(1'000'000, 2026);
  const double dev = std::max({std::abs(m.mean_cos), std::abs(m.mean_sin),
                               std::abs(m.var_cos - 0.5), std::abs(m.var_sin - 0.5)});
  return {dev <= 0.005, fmt("mean cos %.5f, mean sin %.5f, var cos %.5f, var sin %.5f; "
                            "max deviation %.5f (tol 0.005)",
                            m.mean_cos, m.mean_sin, m.var_cos, m.var_sin, dev)};
}

Verdict negative_binomial_grid() {
  double worst = 0.0;
  std::uint64_t seed = 100;
  for (std::size_t t0 : {1, 4, 8}) {
    for (double p : {0.1, 0.5, 0.9}) {
      const auto est = simulate_negative_binomial_mean(t0, p, 100'000, seed++);
      worst = std::max(worst, std::abs(est.mean / (t0 / p) - 1.0));
    }
  }
  return {worst < 0.02, fmt("9-point grid, max relative error %.4f (tol 0.02)", worst)};
}

// Mean T vs prediction at every simulated point (prediction <= 500).
struct TrialCheck {
  double worst = 0.0;
  std::size_t points = 0;
  std::size_t flagged = 0;
};

void accumulate(TrialCheck& c, const std::vector<EstimateRow>& rows) {
  for (const auto& r : rows) {
    if (r.skipped || r.prediction > 500.0) continue;
    ++c.points;
    if (r.flagged) ++c.flagged;
    c.worst = std::max(c.worst, std::abs(r.estimate / r.prediction - 1.0));
  }
}

Verdict figure6() {
  TrialCheck c;
  for (std::size_t l : {16, 32, 64, 128}) {
    SweepSpec spec;
    spec.base = figure_params();
    spec.base.group_size = l;
    spec.axis = SweepAxis::InrThreshold;
    for (double db : linspace(-15.0, 10.0, 11)) spec.values.push_back(db_to_linear(db));
    spec.runs_per_point = 1000;
    spec.mode = ChannelMode::RedrawPerTrial;
    spec.seed_base = 6;
    spec.prediction_cap = 500.0;
    accumulate(c, sweep_expected_trials(spec));
  }
  return {c.worst <= 0.10 && c.points > 0 && c.flagged == 0,
          fmt("%zu points with E{T} <= 500, max relative error %.4f (tol 0.10), %zu flagged",
              c.points, c.worst, c.flagged)};
}

Verdict figure8() {
  TrialCheck c;
  const auto etas = linspace(-15.0, 20.0, 15);
  std::vector<std::vector<EstimateRow>> by_d;
  for (std::size_t d : {1, 2, 3, 4}) {
    SweepSpec spec;
    spec.base = figure_params();
    spec.base.unintended_directions = degrees({65.0, -50.0, 170.0, -120.0});
    spec.base.unintended_directions.resize(d);
    spec.axis = SweepAxis::InrThreshold;
    for (double db : etas) spec.values.push_back(db_to_linear(db));
    spec.runs_per_point = 1000;
    spec.mode = ChannelMode::RedrawPerTrial;
    spec.seed_base = 8;
    spec.prediction_cap = 5000.0;
    by_d.push_back(sweep_expected_trials(spec));
    accumulate(c, by_d.back());
  }
  // Ordering in D wherever all four curves were simulated.
  std::size_t ordered_points = 0;
  bool increasing = true;
  for (std::size_t i = 0; i < etas.size(); ++i) {
    if (std::any_of(by_d.begin(), by_d.end(), [&](const auto& rows) { return rows[i].skipped; })) continue;
    ++ordered_points;
    for (std::size_t d = 1; d < by_d.size(); ++d) {
      increasing = increasing && by_d[d][i].estimate > by_d[d - 1][i].estimate;
    }
  }
  return {c.worst <= 0.10 && c.flagged == 0 && increasing && ordered_points > 0,
          fmt("%zu points with E{T} <= 500, max relative error %.4f (tol 0.10), %zu flagged; "
              "strictly increasing in D at %zu/%zu shared eta points: %s",
              c.points, c.worst, c.flagged, ordered_points, ordered_points,
              increasing ? "yes" : "no")};
}

Verdict ccdf() {
  auto max_gap = [](const std::vector<EstimateRow>& rows, std::size_t& nonconv) {
    double gap = 0.0;
    for (const auto& r : rows) {
      gap = std::max(gap, std::abs(r.estimate - r.prediction));
      nonconv = std::max(nonconv, r.nonconverged);
    }
    return gap;
  };
  std::size_t nonconv = 0;

  SweepSpec eta;
  eta.base = figure_params();
  eta.axis = SweepAxis::InrThreshold;
  eta.values = {db_to_linear(-5.0), db_to_linear(0.0), db_to_linear(5.0), db_to_linear(10.0)};
  eta.runs_per_point = 10'000;
  eta.mode = ChannelMode::FixedPerRealization;
  eta.seed_base = 9;
  const auto eta_rows = empirical_ccdf(eta, linspace(0.0, 30.0, 101));
  const double eta_gap = max_gap(eta_rows, nonconv);

  SweepSpec k = eta;
  k.base.inr_threshold = db_to_linear(10.0);
  k.axis = SweepAxis::ActiveClusters;
  k.values = {1, 2, 3};
  k.seed_base = 10;
  const auto k_rows = empirical_ccdf(k, linspace(0.0, 60.0, 121));
  const double k_gap = max_gap(k_rows, nonconv);

  const double gap = std::max(eta_gap, k_gap);
  return {gap < 0.02 && nonconv == 0,
          fmt("max |empirical - Erlang| %.4f over eta curves, %.4f over K curves (tol < 0.02, "
              "10^4 samples/curve), nonconverged runs %zu",
              eta_gap, k_gap, nonconv)};
}

Verdict cases() {
  constexpr std::size_t kRunsPerCase = 25;
  std::size_t runs = 0;
  std::size_t converged = 0;
  std::size_t verified = 0;

  auto run_case = [&](ScenarioParams p, bool rotate, std::uint64_t tag) {
    const Scenario s(p);
    for (std::size_t run = 0; run < kRunsPerCase; ++run) {
      const SeedTree seeds(derive_seed(600 + tag, run));
      const auto net = sample_network(s, seeds);
      const std::size_t targets = rotate ? s.num_stations() : 1;
      for (std::size_t t = 0; t < targets; ++t) {
        std::vector<std::size_t> pool(net.size());
        std::iota(pool.begin(), pool.end(), std::size_t{0});
        SelectionOptions opt;
        opt.record_trials = false;
        const auto out = run_selection(net, s, t, std::move(pool), seeds.child(t), opt);
        ++runs;
        if (!out.converged()) continue;
        ++converged;
        verified += verify_outcome(out, net, s) ? 1 : 0;
      }
    }
  };

  auto p1 = case_params();
  p1.unintended_directions = degrees({-160.0, -50.0, 60.0, 170.0});
  run_case(p1, false, 1);

  auto p2 = case_params();
  p2.intended_direction = deg_to_rad(-160.0);
  p2.unintended_directions = degrees({-50.0, 60.0, 170.0});
  run_case(p2, true, 2);

  auto p3 = case_params();
  for (double d : linspace(25.0, 45.0, 21)) p3.unintended_directions.push_back(deg_to_rad(d));
  run_case(p3, false, 3);

  // Case 4: victims at the four strongest sidelobes of the average pattern.
  auto probe = case_params();
  probe.unintended_directions = {-kPi};  // placeholder; the average depends on placement only
  const auto avg = average_beampattern(Scenario(probe), probe.num_selected, 200, 1.0,
                                       SeedTree(probe.seed).child(1), uniform_angle_grid(3601));
  auto p4 = case_params();
  p4.unintended_directions = sidelobe_peaks(avg, 0.0, 4);
  for (double& d : p4.unintended_directions) d = wrap_angle(d);
  run_case(p4, false, 4);

  return {runs >= 100 && converged == verified && converged > 0,
          fmt("%zu runs over cases 1-4, %zu converged, %zu verified by replay", runs, converged,
              verified)};
}

Verdict mainlobe() {
  auto p = case_params();
  p.unintended_directions = {kPi / 2};
  p.shadowing = {0.0, 0.0};
  const Scenario s(p);
  const auto net = sample_network(s, SeedTree(77));
  const double power = 1.0;
  const double n = static_cast<double>(p.num_selected);
  const auto grid = uniform_angle_grid(3601);
  RngStream pick(derive_seed(77, 1));

  double worst_peak = 0.0;
  bool peak_at_target = true;
  std::vector<double> widths;
  for (int k = 0; k < 50; ++k) {
    std::vector<std::size_t> pool(net.size());
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    for (std::size_t i = 0; i < p.num_selected; ++i) std::swap(pool[i], pool[i + pick.index(pool.size() - i)]);
    pool.resize(p.num_selected);
    const auto ph = synchronize(net, pool, 0.0);
    const double peak = std::norm(array_factor(net, pool, ph, power, 0.0));
    worst_peak = std::max(worst_peak, std::abs(peak / (n * n * power) - 1.0));
    const auto bp = sample_beampattern(net, pool, ph, power, grid);
    const auto top = std::max_element(bp.power.begin(), bp.power.end());
    peak_at_target = peak_at_target && std::abs(grid[top - bp.power.begin()]) < 1e-9;
    widths.push_back(mainlobe_width(net, pool, ph, power));
  }
  const double mean = std::accumulate(widths.begin(), widths.end(), 0.0) / widths.size();
  double ss = 0.0;
  for (double w : widths) ss += (w - mean) * (w - mean);
  const double cv = std::sqrt(ss / (widths.size() - 1)) / mean;
  const auto [lo, hi] = std::minmax_element(widths.begin(), widths.end());
  return {worst_peak <= 1e-12 && peak_at_target && cv < 0.05,
          fmt("peak/(N^2 P) - 1 max %.2e (tol 1e-12), grid maximum at target: %s; -3 dB width "
              "mean %.3f deg, CV %.4f (tol 0.05), range %.3f-%.3f deg",
              worst_peak, peak_at_target ? "yes" : "no", rad_to_deg(mean), cv,
              rad_to_deg(*lo), rad_to_deg(*hi))};
}

Verdict oracles() {
  RngStream rng(8080);
  auto u = [&](double a, double b) { return a + (b - a) * rng.uniform(); };
  double worst = 0.0;
  auto rel = [&](std::complex<double> got, std::complex<double> want) {
    const double scale = std::max(std::abs(want), 1e-300);
    worst = std::max(worst, std::abs(got - want) / scale);
  };
  for (int inst = 0; inst < 100; ++inst) {
    ScenarioParams p;
    p.num_candidates = 2 + rng.index(63);
    p.num_selected = 1 + rng.index(p.num_candidates / 2);
    p.group_size = 1 + rng.index(p.num_selected);
    p.disk_radius = u(0.1, 5.0);
    p.intended_direction = u(-kPi, kPi);
    p.unintended_directions = {u(-kPi, kPi), u(-kPi, kPi)};
    p.shadowing = {u(-0.3, 0.3), u(0.0, 0.5)};
    p.noise_power = u(0.01, 2.0);
    p.target_snr = u(1.0, 300.0);
    const Scenario s(p);
    const auto net = sample_network(s, SeedTree(rng.engine()()));
    const double power = u(0.1, 2.0);

    std::vector<std::size_t> set(p.num_selected);
    std::iota(set.begin(), set.end(), std::size_t{0});
    std::vector<std::size_t> rest(p.num_candidates - p.num_selected);
    std::iota(rest.begin(), rest.end(), p.num_selected);

    // Brute force: the far-field path difference to each direction.
    auto path = [&](std::size_t r, double dir) {
      const auto& q = net.position(r);
      const double x = q.radius * std::cos(q.azimuth);
      const double y = q.radius * std::sin(q.azimuth);
      return x * std::cos(dir) + y * std::sin(dir);
    };
    const auto ph = synchronize(net, set, p.intended_direction);
    for (int k = 0; k < 8; ++k) {
      const double phi = u(-kPi, kPi);
      std::complex<double> want{};
      for (std::size_t r : set) {
        want += std::sqrt(power) *
                std::exp(std::complex<double>(0, kTwoPi * (path(r, phi) - path(r, p.intended_direction))));
      }
      rel(array_factor(net, set, ph, power, phi), want);
    }

    // Group components: X - jY = sqrt(P) sum a e^{j(theta_t - theta_v)}.
    for (std::size_t target : {0, 1}) {
      for (std::size_t victim = 0; victim < 3; ++victim) {
        if (victim == target) continue;
        std::complex<double> want{};
        for (std::size_t r : set) {
          const double delta = kTwoPi * (path(r, s.direction(victim)) - path(r, s.direction(target)));
          want += std::sqrt(power) * net.gain(r, victim) * std::exp(std::complex<double>(0, delta));
        }
        const auto c = group_interference(net, set, target, victim, power);
        rel({c.x, -c.y}, want);
      }
    }

    // Two clusters on one network plus one on another, random symbols.
    if (!rest.empty()) {
      const auto other = sample_network(s, SeedTree(rng.engine()()));
      const std::vector<ActiveCluster> clusters{{net, set, 1}, {net, rest, 2}, {other, set, 1}};
      const std::size_t n = set.size();
      const auto z = draw_symbols(3, rng);
      const double pw = p.noise_power * p.target_snr / static_cast<double>(n);
      std::complex<double> total{};
      for (std::size_t k = 0; k < clusters.size(); ++k) {
        const auto& cn = clusters[k].network.get();
        std::complex<double> ck{};
        for (std::size_t r : clusters[k].nodes) {
          const auto& q = cn.position(r);
          auto pth = [&](double dir) {
            return q.radius * (std::cos(q.azimuth) * std::cos(dir) + std::sin(q.azimuth) * std::sin(dir));
          };
          const double delta = kTwoPi * (pth(s.direction(clusters[k].victim_bs)) - pth(s.direction(0)));
          ck += std::sqrt(pw) * cn.gain(r, clusters[k].victim_bs) * std::exp(std::complex<double>(0, delta));
        }
        total += z[k] * ck;
      }
      const double want = std::norm(total) / p.noise_power;
      const double got = total_received_inr(clusters, z, n, p.target_snr, p.noise_power);
      worst = std::max(worst, std::abs(got - want) / std::max(want, 1e-300));
    }
  }
  return {worst <= 1e-10, fmt("100 instances, max relative error %.2e (tol 1e-10)", worst)};
}

}  // namespace

// --known-fail=5,... names criteria that are expected to fail; they still
// print FAIL, but only an unexpected failure sets the exit code.
std::vector<int> known_failures(int argc, char** argv) {
  std::vector<int> ids;
  const std::string flag = "--known-fail=";
  for (int i = 1; i < argc; ++i) {
    std::string arg = argv[i];
    if (arg.rfind(flag, 0) != 0) continue;
    arg.erase(0, flag.size());
    for (std::size_t pos = 0; pos < arg.size();) {
      const std::size_t comma = std::min(arg.find(',', pos), arg.size());
      ids.push_back(std::stoi(arg.substr(pos, comma - pos)));
      pos = comma + 1;
    }
  }
  return ids;
}

int main(int argc, char** argv) {
  const auto known = known_failures(argc, argv);
  criterion(1, "phase-difference moments", 5, appendix_moments);
  criterion(2, "trial-count mean vs T0/p", 30, negative_binomial_grid);
  criterion(3, "expected trials vs L and eta_thr", 600, figure6);
  criterion(4, "expected trials vs D", 900, figure8);
  criterion(5, "total-INR CCDF vs Erlang", 600, ccdf);
  criterion(6, "per-group INR guarantee, cases 1-4", 120, cases);
  criterion(7, "mainlobe stability", 60, mainlobe);
  criterion(8, "oracle equivalence", 10, oracles);
  std::printf("%zu of 8 criteria failed\n", failed.size());
  bool as_expected = true;
  for (int id : failed) {
    const bool expected = std::find(known.begin(), known.end(), id) != known.end();
    std::printf("criterion %d failed (%s)\n", id, expected ? "known failure" : "unexpected");
    as_expected = as_expected && expected;
  }
  for (int id : known) {
    if (std::find(failed.begin(), failed.end(), id) == failed.end()) {
      std::printf("criterion %d listed as a known failure but passed\n", id);
    }
  }
  return as_expected ? 0 : 1;
}
