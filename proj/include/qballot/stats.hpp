#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>

namespace qballot {

inline constexpr double kDefaultZ = 3.0;

// Binomial proportion estimate with a normal-approximation radius z * sqrt(p(1-p)/n).
struct BinomialEstimate {
  std::string name;
  std::size_t successes = 0;
  std::size_t trials = 0;
  double p_hat = 0.0;
  double ci_radius = 0.0;
  double z = kDefaultZ;
  std::optional<double> analytic;

  // |p_hat - analytic| within z standard errors computed at the analytic p.
  bool agrees(double z_tol = kDefaultZ) const {
    if (!analytic) return true;
    const double p = std::clamp(*analytic, 0.0, 1.0);  // exact values may carry rounding
    const double sigma = std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
    return std::abs(p_hat - p) <= z_tol * sigma + 1e-15;
  }
};

inline BinomialEstimate estimate(std::string name, std::size_t successes, std::size_t trials,
                                 std::optional<double> analytic = std::nullopt, double z = kDefaultZ) {
  BinomialEstimate e;
  e.name = std::move(name);
  e.successes = successes;
  e.trials = trials;
  e.p_hat = trials ? static_cast<double>(successes) / static_cast<double>(trials) : 0.0;
  e.ci_radius = trials ? z * std::sqrt(e.p_hat * (1.0 - e.p_hat) / static_cast<double>(trials)) : 0.0;
  e.z = z;
  e.analytic = analytic;
  return e;
}

}  // namespace qballot
