#include "cbsel/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cbsel/units.hpp"

namespace cbsel {

namespace {

void require_positive_variance(double component_var) {
  if (!(component_var > 0.0)) {
    throw DomainError("degenerate channel: interference variance is zero, INR is deterministic");
  }
}

// 1 - (1 + b) e^{-b}, with a series near zero where the direct form cancels.
double truncated_numerator(double b) {
  if (b < 0.1) {
    double sum = 0.0;
    double power = b;  // b^n / n!
    for (int n = 2; n <= 14; ++n) {
      power *= b / n;
      const double term = (n - 1) * power;
      sum += (n % 2 == 0) ? term : -term;
    }
    return sum;
  }
  return -std::expm1(-b) - b * std::exp(-b);
}

}  // namespace

double phase_diff_pdf(double u) {
  if (!(std::abs(u) < 1.0)) throw DomainError("phase_diff_pdf is defined on (-1, 1)");
  return 1.0 / (kPi * std::sqrt((1.0 - u) * (1.0 + u)));
}

double q_function(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

double term_variance(const LognormalParams& shadowing) {
  const ChannelMoments a = moments(shadowing);
  constexpr double su2 = kPhaseComponentVariance;
  constexpr double mu = kPhaseComponentMean;
  return (su2 + mu * mu) * (a.variance + a.mean * a.mean) - a.mean * a.mean * mu * mu;
}

double component_variance(const Scenario& scenario) {
  // A lognormal gain with zero log-variance is a constant; there is then no
  // shadowing randomness left to drive the closed forms.
  if (scenario.shadowing().variance == 0.0) return 0.0;
  return scenario.target_snr() * scenario.noise_power() * term_variance(scenario.shadowing());
}

double single_approval_probability(double threshold, double noise_power,
                                   double component_var) {
  require_positive_variance(component_var);
  return -std::expm1(-truncation_ratio(threshold, noise_power, component_var));
}

ApprovalProbability approval_probability(const Scenario& scenario) {
  const double var = component_variance(scenario);
  require_positive_variance(var);
  ApprovalProbability out;
  out.single = single_approval_probability(scenario.inr_threshold(), scenario.noise_power(), var);
  out.all = 1.0;
  for (std::size_t bs = 1; bs < scenario.num_stations(); ++bs) {
    out.all *= single_approval_probability(scenario.threshold(bs), scenario.noise_power(), var);
  }
  return out;
}

double expected_trials(std::size_t required, double p) {
  if (!(p > 0.0)) throw DomainError("approval probability is zero: expected trial count is infinite");
  return static_cast<double>(required) / p;
}

double expected_trials(const Scenario& scenario) {
  return expected_trials(scenario.num_groups(), approval_probability(scenario).all);
}

double trial_count_pmf(std::size_t t, std::size_t required, double p) {
  if (required == 0) throw std::invalid_argument("at least one success is required");
  if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("p must lie in (0, 1]");
  if (t < required) return 0.0;
  if (p == 1.0) return t == required ? 1.0 : 0.0;
  const double tt = static_cast<double>(t);
  const double r = static_cast<double>(required);
  const double log_choose = std::lgamma(tt) - std::lgamma(r) - std::lgamma(tt - r + 1.0);
  return std::exp(log_choose + r * std::log(p) + (tt - r) * std::log1p(-p));
}

double truncation_ratio(double threshold, double noise_power, double component_var) {
  require_positive_variance(component_var);
  return noise_power * threshold / (2.0 * component_var);
}

double truncation_ratio(const Scenario& scenario) {
  return truncation_ratio(scenario.inr_threshold(), scenario.noise_power(),
                          component_variance(scenario));
}

double truncated_component_pdf(double u, double threshold, double noise_power,
                               double component_var) {
  const double beta = truncation_ratio(threshold, noise_power, component_var);
  const double radius2 = noise_power * threshold;
  if (u * u > radius2) return 0.0;
  const double sigma = std::sqrt(component_var);
  // 1 - 2 Q(x) written as erf(x / sqrt 2) to keep precision near the rim.
  const double inner = std::erf(std::sqrt(radius2 - u * u) / sigma / std::numbers::sqrt2);
  const double gauss = std::exp(-u * u / (2.0 * component_var)) / (std::sqrt(kTwoPi) * sigma);
  return gauss * inner / -std::expm1(-beta);
}

double truncated_component_pdf(double u, const Scenario& scenario) {
  return truncated_component_pdf(u, scenario.inr_threshold(), scenario.noise_power(),
                                 component_variance(scenario));
}

double truncated_variance(double threshold, double noise_power, double component_var) {
  const double beta = truncation_ratio(threshold, noise_power, component_var);
  if (!(beta > 0.0)) throw DomainError("truncation ratio beta must be positive");
  return component_var * truncated_numerator(beta) / (noise_power * -std::expm1(-beta));
}

double truncated_variance(const Scenario& scenario) {
  return truncated_variance(scenario.inr_threshold(), scenario.noise_power(),
                            component_variance(scenario));
}

double erlang_rate(const Scenario& scenario) { return 0.5 / truncated_variance(scenario); }

double inr_ccdf(double level, std::size_t clusters, double rate) {
  if (clusters == 0) throw std::invalid_argument("need at least one active cluster");
  if (!(level >= 0.0)) throw std::invalid_argument("INR level must be non-negative");
  if (!(rate > 0.0)) throw std::invalid_argument("Erlang rate must be positive");
  const double x = rate * level;
  if (x == 0.0) return 1.0;
  const double log_x = std::log(x);
  // Neumaier-compensated sum of e^{k ln x - x - ln k!}.
  double sum = 0.0;
  double carry = 0.0;
  for (std::size_t k = 0; k < clusters; ++k) {
    const double kk = static_cast<double>(k);
    const double term = std::exp(kk * log_x - x - std::lgamma(kk + 1.0));
    const double t = sum + term;
    carry += std::abs(sum) >= std::abs(term) ? (sum - t) + term : (term - t) + sum;
    sum = t;
  }
  return std::clamp(sum + carry, 0.0, 1.0);
}

double inr_ccdf(double level, std::size_t clusters, const Scenario& scenario) {
  return inr_ccdf(level, clusters, erlang_rate(scenario));
}

double predicted_average_inr(const Scenario& scenario, std::size_t clusters) {
  return 2.0 * truncated_variance(scenario) * static_cast<double>(clusters);
}

AnalyticalPrediction predict(const Scenario& scenario, std::size_t clusters) {
  AnalyticalPrediction out;
  out.clusters = clusters;
  out.term_variance = term_variance(scenario.shadowing());
  out.component_variance = component_variance(scenario);
  const auto p = approval_probability(scenario);
  out.p_single = p.single;
  out.p_all = p.all;
  out.expected_trials = p.all > 0.0 ? expected_trials(scenario.num_groups(), p.all)
                                    : std::numeric_limits<double>::infinity();
  out.beta = truncation_ratio(scenario);
  out.truncated_variance = truncated_variance(scenario);
  out.erlang_rate = 0.5 / out.truncated_variance;
  return out;
}

}  // namespace cbsel
