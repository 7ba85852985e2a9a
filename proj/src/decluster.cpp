#include "spatmax/decluster.hpp"

#include <algorithm>
#include <cmath>

#include "spatmax/error.hpp"
#include "spatmax/likelihood.hpp"

namespace spatmax {

std::vector<Cluster> runs_decluster(std::span<const double> series, double u) {
  if (!std::isfinite(u)) throw NumericError("declustering threshold must be finite");
  std::vector<Cluster> clusters;
  Cluster cur;
  bool open = false;
  for (int k = 0; k < static_cast<int>(series.size()); ++k) {
    const double v = series[k];
    const bool exceeds = !is_missing(v) && v > u;
    if (exceeds) {
      if (!open) {
        cur = Cluster{k, k + 1, k, v};
        open = true;
      } else {
        cur.end = k + 1;
        if (v > cur.maximum) {
          cur.maximum = v;
          cur.argmax = k;
        }
      }
    } else if (open) {
      clusters.push_back(cur);
      open = false;
    }
  }
  if (open) clusters.push_back(cur);
  return clusters;
}

double site_threshold(std::span<const double> series, double q) {
  if (!(q > 0.0) || !(q < 1.0)) throw UsageError("threshold quantile level must lie in (0, 1)");
  std::vector<double> observed;
  observed.reserve(series.size());
  for (double v : series) {
    if (!is_missing(v)) observed.push_back(v);
  }
  if (observed.size() < 20)
    throw DataError("threshold needs at least 20 observed values, got " +
                    std::to_string(observed.size()));
  std::sort(observed.begin(), observed.end());
  const auto n = static_cast<double>(observed.size());
  auto rank = static_cast<std::size_t>(std::ceil(q * n));
  if (rank < 1) rank = 1;
  if (rank > observed.size()) rank = observed.size();
  return observed[rank - 1];
}

ThresholdSpec thresholds_from_panel(const DailyPanel& panel, double q) {
  ThresholdSpec spec;
  spec.quantile_level = q;
  spec.u.resize(panel.n_sites());
  std::vector<double> series;
  for (int s = 0; s < panel.n_sites(); ++s) {
    series.assign(panel.values.begin() + panel.index(s, 0, 0),
                  panel.values.begin() + panel.index(s, 0, 0) +
                      static_cast<std::size_t>(panel.n_blocks) * panel.block_size);
    spec.u[s] = site_threshold(series, q);
  }
  return spec;
}

BlockMaxima block_maxima(const DailyPanel& panel, double max_missing_frac) {
  if (!(max_missing_frac >= 0.0) || !(max_missing_frac < 1.0))
    throw UsageError("max missing fraction must lie in [0, 1)");
  BlockMaxima out =
      BlockMaxima::empty(panel.site_ids, panel.block_labels, MaximaProvenance::FromPanel);
  for (int s = 0; s < panel.n_sites(); ++s) {
    for (int t = 0; t < panel.n_blocks; ++t) {
      int n_missing = 0;
      double best = -std::numeric_limits<double>::infinity();
      bool any = false;
      for (int k = 0; k < panel.block_size; ++k) {
        const double v = panel.at(s, t, k);
        if (is_missing(v)) {
          ++n_missing;
        } else {
          any = true;
          best = std::max(best, v);
        }
      }
      const double frac = static_cast<double>(n_missing) / panel.block_size;
      if (any && frac <= max_missing_frac) out.at(s, t) = best;
    }
  }
  return out;
}

DailyPanel decluster_panel(const DailyPanel& panel, const ThresholdSpec& thresholds) {
  if (static_cast<int>(thresholds.u.size()) != panel.n_sites())
    throw DataError("threshold vector does not match the panel's site count");
  DailyPanel out = panel;
  std::vector<double> series(panel.block_size);
  for (int s = 0; s < panel.n_sites(); ++s) {
    const double u = thresholds.u[s];
    for (int t = 0; t < panel.n_blocks; ++t) {
      for (int k = 0; k < panel.block_size; ++k) series[k] = panel.at(s, t, k);
      for (const Cluster& c : runs_decluster(series, u)) {
        for (int k = c.begin; k < c.end; ++k) {
          if (k != c.argmax) out.at(s, t, k) = u;
        }
      }
    }
  }
  return out;
}

}  // namespace spatmax
