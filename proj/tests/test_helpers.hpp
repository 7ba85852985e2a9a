#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace testutil {

/// Standard normal CDF by Simpson quadrature of the density from 0 to |x|,
/// independent of the library's erfc-based implementation.
inline double simpson_norm_cdf(double x) {
  const double ax = std::abs(x);
  const int n = 4000;  // even
  const double h = ax / n;
  double acc = 0.0;
  auto pdf = [](double t) { return std::exp(-0.5 * t * t) / std::sqrt(2.0 * 3.14159265358979323846); };
  for (int i = 0; i <= n; ++i) {
    double w = (i == 0 || i == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    acc += w * pdf(i * h);
  }
  double half = acc * h / 3.0;
  return x >= 0.0 ? 0.5 + half : 0.5 - half;
}

/// One-sample Kolmogorov-Smirnov statistic against the uniform law;
/// probs must already be probability-integral transformed values.
inline double ks_statistic(std::vector<double> probs) {
  std::sort(probs.begin(), probs.end());
  const double n = static_cast<double>(probs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    d = std::max(d, (i + 1) / n - probs[i]);
    d = std::max(d, probs[i] - i / n);
  }
  return d;
}

/// Asymptotic KS p-value 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 lambda^2),
/// lambda = sqrt(n) D.
inline double ks_pvalue(double d, std::size_t n) {
  const double lambda = std::sqrt(static_cast<double>(n)) * d;
  double p = 0.0;
  for (int k = 1; k <= 100; ++k) {
    double term = 2.0 * std::exp(-2.0 * k * k * lambda * lambda);
    p += (k % 2 == 1) ? term : -term;
  }
  return std::min(1.0, std::max(0.0, p));
}

/// Fresh scratch directory under the system temp root.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    auto base = std::filesystem::temp_directory_path();
    for (int i = 0; i < 10000; ++i) {
      auto candidate = base / ("spatmax_" + tag + "_" + std::to_string(i));
      std::error_code ec;
      if (std::filesystem::create_directory(candidate, ec)) {
        path_ = candidate;
        return;
      }
    }
    path_ = base;
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

inline std::string read_text(const std::string& path) {
  std::ifstream in(path);
  std::string s((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return s;
}

}  // namespace testutil
