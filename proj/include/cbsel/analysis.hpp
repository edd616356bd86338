#pragma once

#include <cstddef>
#include <stdexcept>

#include "cbsel/core.hpp"

namespace cbsel {

/// Thrown when a closed form is evaluated outside its domain (degenerate
/// channel, zero approval probability, |u| >= 1, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Moments of u = cos(delta) (or sin(delta)) for a uniform phase difference.
inline constexpr double kPhaseComponentMean = 0.0;
inline constexpr double kPhaseComponentVariance = 0.5;

/// Density of u = cos(theta_1 - theta_2), theta_i ~ U[-pi, pi]:
/// 1 / (pi sqrt(1 - u^2)) on (-1, 1).
double phase_diff_pdf(double u);

/// Gaussian tail Q(x) = P(Z > x).
double q_function(double x);

/// Per-term variance sigma_1^2 of a * u, from the product-moment identity
///   (sigma_u^2 + m_u^2)(sigma_a^2 + m_a^2) - m_a^2 m_u^2,
/// which equals 0.5 E{a^2} because m_u = 0.
double term_variance(const LognormalParams& shadowing);

/// Variance sigma_X^2 = snr * noise * sigma_1^2 of each Gaussian
/// interference component of one tested group.
double component_variance(const Scenario& scenario);

struct ApprovalProbability {
  double single = 0.0;  // p', one victim at the shared threshold
  double all = 0.0;     // p, every victim approves
};

/// p' = 1 - exp(-threshold * noise / (2 sigma_X^2)) for one victim.
double single_approval_probability(double threshold, double noise_power,
                                   double component_var);

/// p' at the shared threshold and the product over all D victims (each at
/// its own threshold). Throws DomainError when sigma_X^2 = 0.
ApprovalProbability approval_probability(const Scenario& scenario);

/// ceil(N/L) / p. Throws DomainError when p = 0.
double expected_trials(const Scenario& scenario);
double expected_trials(std::size_t required, double p);

/// Negative binomial P(T = t) for `required` successes with success
/// probability p, evaluated in log space; zero for t < required.
double trial_count_pmf(std::size_t t, std::size_t required, double p);

/// beta = noise * threshold / (2 sigma_X^2).
double truncation_ratio(double threshold, double noise_power, double component_var);
double truncation_ratio(const Scenario& scenario);

/// Marginal density of one interference component of an approved group,
/// i.e. a 2-D Gaussian (variance sigma_X^2 per axis) conditioned on the
/// disk X^2 + Y^2 <= noise * threshold. Zero outside |u| <= sqrt(noise*thr).
double truncated_component_pdf(double u, double threshold, double noise_power,
                               double component_var);
double truncated_component_pdf(double u, const Scenario& scenario);

/// sigma_I^2 = sigma_X^2 (1 - (1+beta) e^{-beta}) / (noise (1 - e^{-beta})).
double truncated_variance(double threshold, double noise_power, double component_var);
double truncated_variance(const Scenario& scenario);

/// Erlang rate alpha = 1 / (2 sigma_I^2).
double erlang_rate(const Scenario& scenario);

/// P(eta >= level) for an Erlang(K, rate) total INR:
///   sum_{k<K} (rate*level)^k e^{-rate*level} / k!
/// Terms are formed in log space and summed with compensation.
double inr_ccdf(double level, std::size_t clusters, double rate);
double inr_ccdf(double level, std::size_t clusters, const Scenario& scenario);

/// Closed-form average INR from K selected clusters, 2 sigma_I^2 K.
double predicted_average_inr(const Scenario& scenario, std::size_t clusters);

struct AnalyticalPrediction {
  double phase_variance = kPhaseComponentVariance;  // sigma_u^2
  double term_variance = 0.0;                       // sigma_1^2
  double component_variance = 0.0;                  // sigma_X^2
  double p_single = 0.0;
  double p_all = 0.0;
  double expected_trials = 0.0;  // +inf when p = 0
  double beta = 0.0;
  double truncated_variance = 0.0;  // sigma_I^2
  double erlang_rate = 0.0;         // alpha
  std::size_t clusters = 1;         // K
};

AnalyticalPrediction predict(const Scenario& scenario, std::size_t clusters = 1);

}  // namespace cbsel
