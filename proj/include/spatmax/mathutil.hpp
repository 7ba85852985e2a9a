#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace spatmax {

inline constexpr double kPi = 3.14159265358979323846;

/// Standard normal CDF via erfc; absolute error below 1e-15 over the real line.
inline double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// Standard normal density.
inline double norm_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * kPi);
}

/// Neumaier compensated accumulator for order-fixed deterministic sums
/// over blocks and pairs.
class KahanSum {
 public:
  void add(double v) {
    double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Central finite-difference gradient with per-coordinate step
/// h_i = rel_step * max(1, |x_i|).
inline std::vector<double> fd_gradient(const std::function<double(std::span<const double>)>& f,
                                       std::span<const double> x, double rel_step) {
  std::vector<double> xp(x.begin(), x.end());
  std::vector<double> grad(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double h = rel_step * std::max(1.0, std::abs(x[i]));
    const double xi = xp[i];
    xp[i] = xi + h;
    const double fp = f(xp);
    xp[i] = xi - h;
    const double fm = f(xp);
    xp[i] = xi;
    grad[i] = (fp - fm) / (2.0 * h);
  }
  return grad;
}

/// Empirical quantile with linear interpolation between order statistics
/// (used for Monte Carlo confidence intervals; thresholds use the type-1
/// order statistic in decluster.hpp instead).
double empirical_quantile(std::vector<double> values, double p);

/// Median and interquartile range of a sample (helpers for default inits).
double sample_median(std::vector<double> values);
double sample_iqr(std::vector<double> values);

}  // namespace spatmax
