#include "spatmax/optim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "spatmax/error.hpp"

namespace spatmax {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Simplex {
  int dim;
  std::vector<std::vector<double>> x;
  std::vector<double> f;
  std::vector<int> order;

  void sort() {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return f[a] < f[b]; });
  }
  int best() const { return order.front(); }
  int worst() const { return order.back(); }
  int second_worst() const { return order[dim - 1]; }
};

/// One Nelder-Mead run from a simplex seeded around x0 with the given step.
void run_simplex(const Objective& obj, std::vector<double>& x0, double& f0, double step,
                 const NelderMeadOptions& opts, NelderMeadResult& out) {
  const int dim = static_cast<int>(x0.size());
  const int max_iter = opts.max_iter_per_dim * dim;
  auto eval = [&](std::span<const double> x) {
    ++out.evaluations;
    const double v = obj(x);
    return std::isnan(v) ? kInf : v;
  };

  Simplex s;
  s.dim = dim;
  s.x.assign(dim + 1, x0);
  s.f.assign(dim + 1, f0);
  s.order.assign(dim + 1, 0);
  for (int i = 0; i < dim; ++i) {
    double h = step * std::max(1.0, std::abs(x0[i]));
    for (int attempt = 0; attempt < 6; ++attempt) {
      s.x[i + 1][i] = x0[i] + h;
      s.f[i + 1] = eval(s.x[i + 1]);
      if (std::isfinite(s.f[i + 1])) break;
      h = attempt % 2 == 0 ? -h : -h / 4.0;
    }
  }

  std::vector<double> centroid(dim), xr(dim), xe(dim), xc(dim);
  for (int iter = 0; iter < max_iter; ++iter) {
    ++out.iterations;
    s.sort();
    const int b = s.best();
    const int w = s.worst();

    const double frange = s.f[w] - s.f[b];
    const double fscale = std::abs(s.f[b]) + 1e-30;
    double xrange = 0.0;
    for (int v = 0; v <= dim; ++v) {
      for (int i = 0; i < dim; ++i) {
        const double d = std::abs(s.x[v][i] - s.x[b][i]) / std::max(1.0, std::abs(s.x[b][i]));
        xrange = std::max(xrange, d);
      }
    }
    if (std::isfinite(frange) && frange <= opts.ftol_rel * fscale && xrange <= opts.xtol_rel) {
      out.converged = true;
      break;
    }

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (int v = 0; v <= dim; ++v) {
      if (v == w) continue;
      for (int i = 0; i < dim; ++i) centroid[i] += s.x[v][i];
    }
    for (int i = 0; i < dim; ++i) centroid[i] /= dim;

    for (int i = 0; i < dim; ++i) xr[i] = centroid[i] + (centroid[i] - s.x[w][i]);
    const double fr = eval(xr);

    if (fr < s.f[b]) {
      for (int i = 0; i < dim; ++i) xe[i] = centroid[i] + 2.0 * (centroid[i] - s.x[w][i]);
      const double fe = eval(xe);
      if (fe < fr) {
        s.x[w] = xe;
        s.f[w] = fe;
      } else {
        s.x[w] = xr;
        s.f[w] = fr;
      }
      continue;
    }
    if (fr < s.f[s.second_worst()]) {
      s.x[w] = xr;
      s.f[w] = fr;
      continue;
    }
    if (fr < s.f[w]) {
      for (int i = 0; i < dim; ++i) xc[i] = centroid[i] + 0.5 * (xr[i] - centroid[i]);
      const double fc = eval(xc);
      if (fc <= fr) {
        s.x[w] = xc;
        s.f[w] = fc;
        continue;
      }
    } else {
      for (int i = 0; i < dim; ++i) xc[i] = centroid[i] + 0.5 * (s.x[w][i] - centroid[i]);
      const double fc = eval(xc);
      if (fc < s.f[w]) {
        s.x[w] = xc;
        s.f[w] = fc;
        continue;
      }
    }
    for (int v = 0; v <= dim; ++v) {
      if (v == b) continue;
      for (int i = 0; i < dim; ++i) s.x[v][i] = s.x[b][i] + 0.5 * (s.x[v][i] - s.x[b][i]);
      s.f[v] = eval(s.x[v]);
    }
  }

  s.sort();
  x0 = s.x[s.best()];
  f0 = s.f[s.best()];
}

}  // namespace

NelderMeadResult nelder_mead(const Objective& f, std::span<const double> x0,
                             const NelderMeadOptions& opts) {
  if (x0.empty()) throw UsageError("nelder_mead: empty parameter vector");
  NelderMeadResult out;
  out.x.assign(x0.begin(), x0.end());
  out.fmin = f(out.x);
  ++out.evaluations;
  if (!std::isfinite(out.fmin))
    throw NumericError("optimizer start point has non-finite objective");

  double step = opts.init_step;
  for (int round = 0; round <= opts.restarts; ++round) {
    const double before = out.fmin;
    out.converged = false;
    run_simplex(f, out.x, out.fmin, step, opts, out);
    step *= 0.25;
    if (round > 0 && before - out.fmin <= opts.ftol_rel * (std::abs(out.fmin) + 1e-30)) break;
  }
  return out;
}

double brent_root(const std::function<double(double)>& f, double lo, double hi, double tol_rel,
                  int max_iter) {
  double a = lo, b = hi;
  double fa = f(a), fb = f(b);
  if (!std::isfinite(fa) || !std::isfinite(fb))
    throw NumericError("root bracket endpoints must evaluate finite");
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if ((fa > 0.0) == (fb > 0.0)) throw NumericError("root not bracketed");

  double c = a, fc = fa;
  double d = b - a, e = d;
  for (int iter = 0; iter < max_iter; ++iter) {
    if ((fb > 0.0) == (fc > 0.0)) {
      c = a;
      fc = fa;
      d = b - a;
      e = d;
    }
    if (std::abs(fc) < std::abs(fb)) {
      a = b;
      b = c;
      c = a;
      fa = fb;
      fb = fc;
      fc = fa;
    }
    const double tol1 = 2.0 * std::numeric_limits<double>::epsilon() * std::abs(b) +
                        0.5 * tol_rel * std::max(1.0, std::abs(b));
    const double xm = 0.5 * (c - b);
    if (std::abs(xm) <= tol1 || fb == 0.0) return b;
    if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
      const double s = fb / fa;
      double p, q;
      if (a == c) {
        p = 2.0 * xm * s;
        q = 1.0 - s;
      } else {
        const double qq = fa / fc;
        const double r = fb / fc;
        p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
        q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0) q = -q;
      p = std::abs(p);
      if (2.0 * p < std::min(3.0 * xm * q - std::abs(tol1 * q), std::abs(e * q))) {
        e = d;
        d = p / q;
      } else {
        d = xm;
        e = d;
      }
    } else {
      d = xm;
      e = d;
    }
    a = b;
    fa = fb;
    b += std::abs(d) > tol1 ? d : (xm > 0.0 ? tol1 : -tol1);
    fb = f(b);
  }
  throw NumericError("root finder failed to converge");
}

}  // namespace spatmax
