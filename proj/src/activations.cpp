#include "lcg/activations.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace lcg {

double gelu(double x) noexcept { return 0.5 * x * (1.0 + std::erf(x / std::numbers::sqrt2)); }

double gelu_derivative(double x) noexcept {
  const double cdf = 0.5 * (1.0 + std::erf(x / std::numbers::sqrt2));
  const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
  return cdf + x * pdf;
}

ProbabilityVector softmax(std::span<const double> logits) {
  ProbabilityVector p(logits.size());
  if (logits.empty()) return p;
  const double top = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - top);
    sum += p[i];
  }
  for (double& v : p) v /= sum;
  return p;
}

double max_probability(std::span<const double> p) noexcept {
  return p.empty() ? 0.0 : *std::max_element(p.begin(), p.end());
}

std::size_t argmax(std::span<const double> p) noexcept {
  return static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
}

}  // namespace lcg
