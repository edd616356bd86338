#include "cbsel/channel.hpp"

#include <cmath>
#include <stdexcept>

namespace cbsel {

ChannelMoments moments(const LognormalParams& params) {
  if (params.variance < 0.0) {
    throw std::invalid_argument("lognormal variance must be non-negative");
  }
  const double m = params.mean;
  const double s2 = params.variance;
  return {std::exp(m + 0.5 * s2), std::expm1(s2) * std::exp(2.0 * m + s2)};
}

void draw_shadowing(const LognormalParams& params, std::span<double> out,
                    RngStream& stream) {
  const double sd = std::sqrt(params.variance);
  for (double& a : out) a = std::exp(stream.normal(params.mean, sd));
}

std::vector<double> draw_shadowing(const LognormalParams& params,
                                   std::size_t count, RngStream& stream) {
  std::vector<double> out(count);
  draw_shadowing(params, out, stream);
  return out;
}

}  // namespace cbsel
