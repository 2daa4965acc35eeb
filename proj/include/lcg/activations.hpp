#pragma once

#include <span>
#include <vector>

namespace lcg {

/// Point on the K-simplex: entries in [0,1] summing to 1.
using ProbabilityVector = std::vector<double>;

/// Exact GELU, x * Phi(x) with Phi the standard normal CDF (erf form).
double gelu(double x) noexcept;
double gelu_derivative(double x) noexcept;

/// Max-subtracted softmax.
ProbabilityVector softmax(std::span<const double> logits);

/// Largest entry, i.e. the confidence of a prediction.
double max_probability(std::span<const double> p) noexcept;

/// Index of the largest entry; lowest index on ties.
std::size_t argmax(std::span<const double> p) noexcept;

}  // namespace lcg
