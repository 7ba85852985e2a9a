#pragma once

#include <functional>
#include <span>
#include <vector>

namespace spatmax {

using Objective = std::function<double(std::span<const double>)>;

struct NelderMeadOptions {
  double ftol_rel = 1e-10;
  double xtol_rel = 1e-8;
  double init_step = 0.1;
  int max_iter_per_dim = 2000;
  int restarts = 2;
};

struct NelderMeadResult {
  std::vector<double> x;
  double fmin = 0.0;
  bool converged = false;
  int iterations = 0;
  int evaluations = 0;
};

/// Derivative-free simplex minimization. The objective may return +infinity
/// to reject a point. Requires a finite value at x0.
NelderMeadResult nelder_mead(const Objective& f, std::span<const double> x0,
                             const NelderMeadOptions& opts = {});

/// Brent root finder on [lo, hi]; f(lo) and f(hi) must bracket a sign change.
double brent_root(const std::function<double(double)>& f, double lo, double hi, double tol_rel,
                  int max_iter = 200);

}  // namespace spatmax
