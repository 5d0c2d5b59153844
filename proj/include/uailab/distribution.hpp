#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace uailab {

inline constexpr double kNormTolerance = 1e-12;

// True when all entries are >= 0 and the sum is 1 within `tol`.
bool is_distribution(std::span<const double> p, double tol = kNormTolerance);

// Throws ConfigError naming `what` if `p` is not a distribution.
void require_distribution(std::span<const double> p, const char* what,
                          double tol = kNormTolerance);

// Shannon entropy in nats, 0 ln 0 = 0.
double entropy(std::span<const double> p);

// KL(p || q) in nats with 0 ln 0 = 0. Returns +inf when q is zero on p's
// support.
double kl_divergence(std::span<const double> p, std::span<const double> q);

// (1 - kappa * n) * p + kappa, i.e. a mixture with the uniform distribution
// at weight kappa * n. Every entry of the result is >= kappa.
std::vector<double> floor_mix(std::span<const double> p, double kappa);

// Lowest index attaining the maximum.
std::size_t argmax_lowest(std::span<const double> values);

double log_sum_exp(std::span<const double> values);

std::vector<double> one_hot(std::size_t size, std::size_t index);

std::vector<double> uniform(std::size_t size);

}  // namespace uailab
