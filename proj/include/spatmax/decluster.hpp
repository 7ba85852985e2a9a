#pragma once

#include <span>
#include <vector>

#include "spatmax/panel.hpp"

namespace spatmax {

struct ThresholdSpec;

/// One maximal run of consecutive threshold exceedances; day indices [begin, end).
struct Cluster {
  int begin = 0;
  int end = 0;
  int argmax = 0;
  double maximum = 0.0;
};

/// Runs declustering: consecutive exceedances of u form a cluster, terminated by
/// the first observation at or below u. Missing days also terminate a cluster.
std::vector<Cluster> runs_decluster(std::span<const double> series, double u);

/// Type-1 empirical quantile of the observed values: sorted order statistic at
/// 1-based index ceil(q * N). Requires at least 20 observed values.
double site_threshold(std::span<const double> series, double q);

/// Per-site thresholds over all observed days of the panel.
ThresholdSpec thresholds_from_panel(const DailyPanel& panel, double q);

/// Block maxima over observed days; a block whose missing fraction exceeds
/// max_missing_frac becomes MISSING.
BlockMaxima block_maxima(const DailyPanel& panel, double max_missing_frac);

/// Replaces every within-cluster exceedance except the cluster maximum by the
/// site threshold, so later exceedance accounting sees one value per cluster.
DailyPanel decluster_panel(const DailyPanel& panel, const ThresholdSpec& thresholds);

}  // namespace spatmax
