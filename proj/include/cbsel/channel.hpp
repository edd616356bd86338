#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "cbsel/rng.hpp"

namespace cbsel {

/// Parameters of the Gaussian underlying a lognormal shadowing gain,
/// a = exp(g) with g ~ N(mean, variance). Units are nepers.
struct LognormalParams {
  double mean = 0.0;
  double variance = 0.0;
};

struct ChannelMoments {
  double mean = 1.0;
  double variance = 0.0;

  /// E{a^2}; this is what multiplies the phase-component variance.
  double second_moment() const { return variance + mean * mean; }
};

/// Exact mean and variance of the lognormal gain:
///   mean = e^{m + s^2/2},  variance = (e^{s^2} - 1) e^{2m + s^2}.
ChannelMoments moments(const LognormalParams& params);

/// i.i.d. lognormal gains; fills `out` in order.
void draw_shadowing(const LognormalParams& params, std::span<double> out,
                    RngStream& stream);

std::vector<double> draw_shadowing(const LognormalParams& params,
                                   std::size_t count, RngStream& stream);

}  // namespace cbsel
