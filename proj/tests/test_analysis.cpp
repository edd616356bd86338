#include <cmath>
#include <limits>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "doctest.h"

#include "cbsel/analysis.hpp"
#include "cbsel/channel.hpp"
#include "cbsel/rng.hpp"
#include "cbsel/units.hpp"

using namespace cbsel;

namespace {

// gamma = 100, sigma_w^2 = 0.05, lognormal (0, 0.2): sigma_X^2 = 3.72956.
ScenarioParams reference_params() {
  ScenarioParams p;
  p.num_candidates = 512;
  p.num_selected = 256;
  p.group_size = 32;
  p.unintended_directions = {deg_to_rad(65.0)};
  p.target_snr = 100.0;
  p.noise_power = 0.05;
  p.shadowing = {0.0, 0.2};
  p.inr_threshold = 10.0;
  return p;
}

double integrate(auto f, double a, double b) {
  boost::math::quadrature::tanh_sinh<double> q;
  return q.integrate(f, a, b);
}

}  // namespace

TEST_CASE("phase-difference density is a proper arcsine law") {
  // Endpoint singularities cap the quadrature at ~1e-8.
  CHECK(integrate([](double u) { return phase_diff_pdf(u); }, -1.0, 1.0) ==
        doctest::Approx(1.0).epsilon(1e-6));
  CHECK(integrate([](double u) { return u * phase_diff_pdf(u); }, -1.0, 1.0) ==
        doctest::Approx(kPhaseComponentMean).scale(1.0).epsilon(1e-10));
  CHECK(integrate([](double u) { return u * u * phase_diff_pdf(u); }, -1.0, 1.0) ==
        doctest::Approx(kPhaseComponentVariance).epsilon(1e-6));
  CHECK(phase_diff_pdf(0.0) == doctest::Approx(1.0 / kPi));
  CHECK_THROWS_AS(phase_diff_pdf(1.0), DomainError);
}

TEST_CASE("Gaussian tail") {
  CHECK(q_function(0.0) == 0.5);
  CHECK(q_function(1.96) == doctest::Approx(0.0249979).epsilon(1e-5));
  CHECK(q_function(-1.0) == doctest::Approx(1.0 - q_function(1.0)));
}

TEST_CASE("component variance") {
  const Scenario s(reference_params());
  CHECK(term_variance({0.0, 0.2}) == doctest::Approx(0.5 * std::exp(0.4)).epsilon(1e-14));
  CHECK(component_variance(s) == doctest::Approx(3.72956).epsilon(1e-6));
  CHECK(term_variance({0.0, 0.0}) == doctest::Approx(0.5));

  // Sample variance of a * cos(theta_1 - theta_2) with independent draws.
  RngStream rng(41);
  const std::size_t n = 1'000'000;
  double s1 = 0.0;
  double s2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = std::exp(rng.normal(0.0, std::sqrt(0.2)));
    const double d = kTwoPi * rng.uniform() - kTwoPi * rng.uniform();
    const double v = a * std::cos(d);
    s1 += v;
    s2 += v * v;
  }
  const double mean = s1 / n;
  const double var = s2 / n - mean * mean;
  CHECK(var == doctest::Approx(term_variance({0.0, 0.2})).epsilon(0.01));
}

TEST_CASE("approval probability") {
  // beta = 1
  CHECK(single_approval_probability(2.0, 1.0, 1.0) == doctest::Approx(0.63212).epsilon(1e-5));
  CHECK(single_approval_probability(1e-300, 1.0, 1.0) > 0.0);

  SUBCASE("two victims at p' = 1/2 give p = 1/4") {
    auto p = reference_params();
    p.unintended_directions = {1.0, 2.0};
    const double var = component_variance(Scenario(p));
    p.inr_threshold = 2.0 * var * std::log(2.0) / p.noise_power;
    const auto ap = approval_probability(Scenario(p));
    CHECK(ap.single == doctest::Approx(0.5));
    CHECK(ap.all == doctest::Approx(0.25));
  }

  SUBCASE("per-BS thresholds multiply") {
    auto p = reference_params();
    p.unintended_directions = {1.0, 2.0};
    p.per_bs_thresholds = {5.0, 50.0};
    const Scenario s(p);
    const double var = component_variance(s);
    const auto ap = approval_probability(s);
    CHECK(ap.all == doctest::Approx(single_approval_probability(5.0, 0.05, var) *
                                    single_approval_probability(50.0, 0.05, var)));
  }

  SUBCASE("matches draws of a circular Gaussian pair") {
    const double var = 3.72956;
    const double thr = 200.0;
    const double noise = 0.05;
    RngStream rng(12);
    const std::size_t n = 400000;
    std::size_t inside = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double x = rng.normal(0.0, std::sqrt(var));
      const double y = rng.normal(0.0, std::sqrt(var));
      inside += (x * x + y * y <= noise * thr) ? 1 : 0;
    }
    const double p = single_approval_probability(thr, noise, var);
    const double frac = static_cast<double>(inside) / n;
    CHECK(std::abs(frac - p) <= 4 * std::sqrt(p * (1 - p) / n));
  }

  SUBCASE("degenerate channel") {
    auto p = reference_params();
    p.shadowing = {0.0, 0.0};
    const Scenario s(p);
    CHECK(component_variance(s) == 0.0);
    CHECK_THROWS_AS(approval_probability(s), DomainError);
    CHECK_THROWS_AS(truncated_variance(s), DomainError);
    CHECK_THROWS_AS(expected_trials(s), DomainError);
    CHECK_THROWS_AS(truncated_variance(1.0, 1.0, 0.0), DomainError);
    CHECK_THROWS_AS(truncation_ratio(1.0, 1.0, 0.0), DomainError);
  }
}

TEST_CASE("expected trials") {
  CHECK(expected_trials(8, 0.5) == 16.0);
  CHECK(expected_trials(1, 1.0) == 1.0);
  CHECK_THROWS_AS(expected_trials(8, 0.0), DomainError);

  auto p = reference_params();
  p.inr_threshold = 1e12;  // p -> 1
  CHECK(expected_trials(Scenario(p)) == doctest::Approx(8.0));
  p.group_size = 30;  // ceil(256 / 30) = 9
  CHECK(expected_trials(Scenario(p)) == doctest::Approx(9.0));
}

TEST_CASE("trial-count distribution") {
  SUBCASE("one success is geometric") {
    for (std::size_t t = 1; t <= 20; ++t) {
      CHECK(trial_count_pmf(t, 1, 0.3) == doctest::Approx(0.3 * std::pow(0.7, t - 1.0)).epsilon(1e-12));
    }
    CHECK(trial_count_pmf(0, 1, 0.3) == 0.0);
  }
  SUBCASE("normalised, with mean r/p") {
    double total = 0.0;
    double mean = 0.0;
    for (std::size_t t = 0; t < 2000; ++t) {
      const double v = trial_count_pmf(t, 8, 0.3);
      total += v;
      mean += static_cast<double>(t) * v;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(mean == doctest::Approx(8 / 0.3).epsilon(1e-10));
    CHECK(trial_count_pmf(7, 8, 0.3) == 0.0);
    CHECK(trial_count_pmf(8, 8, 1.0) == doctest::Approx(1.0));
    CHECK(trial_count_pmf(9, 8, 1.0) == 0.0);
  }
  SUBCASE("histogram of simulated Bernoulli sequences") {
    constexpr std::size_t r = 8;
    constexpr double p = 0.3;
    RngStream rng(1234);
    const std::size_t n = 200000;
    std::vector<std::size_t> hist(400, 0);
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t t = 0;
      std::size_t ok = 0;
      while (ok < r) {
        ++t;
        ok += rng.uniform() < p ? 1 : 0;
      }
      if (t < hist.size()) ++hist[t];
    }
    for (std::size_t t = 10; t <= 50; t += 5) {
      const double want = trial_count_pmf(t, r, p);
      const double got = static_cast<double>(hist[t]) / n;
      CAPTURE(t);
      CHECK(std::abs(got - want) <= 4 * std::sqrt(want * (1 - want) / n));
    }
  }
  CHECK_THROWS(trial_count_pmf(3, 0, 0.5));
  CHECK_THROWS(trial_count_pmf(3, 1, 0.0));
}

TEST_CASE("truncated component density") {
  const double var = 3.72956;
  const double noise = 0.05;
  for (double thr : {10.0, 100.0, 1000.0}) {
    const double r = std::sqrt(noise * thr);
    auto f = [&](double u) { return truncated_component_pdf(u, thr, noise, var); };
    CAPTURE(thr);
    CHECK(integrate(f, -r, r) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(integrate([&](double u) { return u * f(u); }, -r, r) == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
    CHECK(integrate([&](double u) { return u * u * f(u); }, -r, r) ==
          doctest::Approx(truncated_variance(thr, noise, var) * noise).epsilon(1e-8));
    CHECK(f(0.3 * r) == doctest::Approx(f(-0.3 * r)));
    CHECK(f(1.01 * r) == 0.0);
  }
}

TEST_CASE("truncated variance") {
  // beta = 1, sigma_X^2 = noise = 1: (1 - 2/e) / (1 - 1/e).
  CHECK(truncated_variance(2.0, 1.0, 1.0) == doctest::Approx(0.41802).epsilon(1e-5));

  SUBCASE("limits") {
    // Large beta: untruncated Gaussian, sigma_X^2 / noise.
    CHECK(truncated_variance(1e6, 1.0, 2.0) == doctest::Approx(2.0).epsilon(1e-12));
    // Small beta: uniform over the disk, E{X^2} = r^2 / 4 = noise * thr / 4.
    CHECK(truncated_variance(1e-6, 1.0, 2.0) == doctest::Approx(1e-6 / 4).epsilon(1e-5));
  }
  SUBCASE("continuous across the series switch at beta = 0.1") {
    const double lo = truncated_variance(0.2 * (1 - 1e-9), 1.0, 1.0);
    const double hi = truncated_variance(0.2 * (1 + 1e-9), 1.0, 1.0);
    CHECK(lo == doctest::Approx(hi).epsilon(1e-8));
  }
  SUBCASE("increasing in the threshold") {
    double prev = 0.0;
    for (double thr = 0.01; thr < 2e3; thr *= 1.5) {
      const double v = truncated_variance(thr, 0.05, 3.72956);
      CHECK(v > prev);
      prev = v;
    }
    CHECK(prev < 3.72956 / 0.05);
  }
  SUBCASE("rejection sampling") {
    const double var = 3.72956;
    const double noise = 0.05;
    const double thr = 300.0;
    RngStream rng(5);
    double s2 = 0.0;
    std::size_t kept = 0;
    while (kept < 400000) {
      const double x = rng.normal(0.0, std::sqrt(var));
      const double y = rng.normal(0.0, std::sqrt(var));
      if (x * x + y * y > noise * thr) continue;
      s2 += x * x;
      ++kept;
    }
    CHECK(s2 / kept / noise == doctest::Approx(truncated_variance(thr, noise, var)).epsilon(0.01));
  }
}

TEST_CASE("Erlang CCDF of the total INR") {
  // K = 3, rate * level = 2: e^{-2} (1 + 2 + 2).
  CHECK(inr_ccdf(4.0, 3, 0.5) == doctest::Approx(0.67668).epsilon(1e-5));
  CHECK(inr_ccdf(0.0, 4, 0.5) == 1.0);
  CHECK(inr_ccdf(3.0, 1, 1.0) == doctest::Approx(std::exp(-3.0)));
  CHECK(inr_ccdf(1e5, 3, 1.0) == doctest::Approx(0.0).scale(1.0));

  SUBCASE("more clusters dominate, higher levels are rarer") {
    for (double x = 0.5; x < 40.0; x += 0.5) {
      CHECK(inr_ccdf(x, 2, 0.4) >= inr_ccdf(x, 1, 0.4));
      CHECK(inr_ccdf(x, 3, 0.4) >= inr_ccdf(x, 2, 0.4));
      CHECK(inr_ccdf(x + 0.5, 2, 0.4) <= inr_ccdf(x, 2, 0.4));
    }
  }
  SUBCASE("sums of exponentials") {
    RngStream rng(77);
    const double rate = 0.7;
    const std::size_t n = 200000;
    std::vector<std::size_t> above(4, 0);
    const std::vector<double> levels{0.5, 2.0, 5.0, 10.0};
    for (std::size_t i = 0; i < n; ++i) {
      double t = 0.0;
      for (int k = 0; k < 3; ++k) t -= std::log1p(-rng.uniform()) / rate;
      for (std::size_t j = 0; j < levels.size(); ++j) above[j] += t >= levels[j] ? 1 : 0;
    }
    for (std::size_t j = 0; j < levels.size(); ++j) {
      const double want = inr_ccdf(levels[j], 3, rate);
      CHECK(std::abs(static_cast<double>(above[j]) / n - want) <=
            4 * std::sqrt(want * (1 - want) / n) + 1e-12);
    }
  }
  CHECK_THROWS(inr_ccdf(1.0, 0, 1.0));
  CHECK_THROWS(inr_ccdf(-1.0, 1, 1.0));
  CHECK_THROWS(inr_ccdf(1.0, 1, 0.0));
}

TEST_CASE("predict collects the chain") {
  const Scenario s(reference_params());
  const auto pr = predict(s, 3);
  CHECK(pr.phase_variance == 0.5);
  CHECK(pr.component_variance == doctest::Approx(3.72956).epsilon(1e-6));
  CHECK(pr.p_all == doctest::Approx(approval_probability(s).all));
  CHECK(pr.expected_trials == doctest::Approx(8.0 / pr.p_all));
  CHECK(pr.beta == doctest::Approx(0.05 * 10.0 / (2 * 3.72956)));
  CHECK(pr.truncated_variance == doctest::Approx(truncated_variance(s)));
  CHECK(pr.erlang_rate == doctest::Approx(1.0 / (2 * pr.truncated_variance)));
  CHECK(predicted_average_inr(s, 3) == doctest::Approx(6 * pr.truncated_variance));
  CHECK(pr.clusters == 3);
}
