#include "spatmax/mathutil.hpp"

#include <algorithm>
#include <cmath>

#include "spatmax/error.hpp"

namespace spatmax {

double empirical_quantile(std::vector<double> values, double p) {
  if (values.empty()) throw NumericError("quantile of empty sample");
  if (p < 0.0 || p > 1.0) throw NumericError("quantile level outside [0, 1]");
  std::sort(values.begin(), values.end());
  const double pos = p * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  const double w = pos - static_cast<double>(lo);
  return (1.0 - w) * values[lo] + w * values[hi];
}

double sample_median(std::vector<double> values) {
  return empirical_quantile(std::move(values), 0.5);
}

double sample_iqr(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const auto at = [&](double p) {
    const double pos = p * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = static_cast<std::size_t>(std::ceil(pos));
    const double w = pos - static_cast<double>(lo);
    return (1.0 - w) * values[lo] + w * values[hi];
  };
  if (values.empty()) throw NumericError("quantile of empty sample");
  return at(0.75) - at(0.25);
}

}  // namespace spatmax
