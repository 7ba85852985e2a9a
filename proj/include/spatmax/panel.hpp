#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace spatmax {

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

inline bool is_missing(double v) { return std::isnan(v); }

/// Daily observations Y[s][t][k], S sites by n blocks by m days, NaN = missing.
struct DailyPanel {
  std::vector<std::string> site_ids;
  std::vector<int> block_labels;
  int n_blocks = 0;
  int block_size = 0;
  std::vector<double> values;

  int n_sites() const { return static_cast<int>(site_ids.size()); }
  std::size_t index(int s, int t, int k) const {
    return (static_cast<std::size_t>(s) * n_blocks + t) * block_size + k;
  }
  double at(int s, int t, int k) const { return values[index(s, t, k)]; }
  double& at(int s, int t, int k) { return values[index(s, t, k)]; }

  static DailyPanel empty(std::vector<std::string> ids, std::vector<int> blocks, int m) {
    DailyPanel p;
    p.site_ids = std::move(ids);
    p.block_labels = std::move(blocks);
    p.n_blocks = static_cast<int>(p.block_labels.size());
    p.block_size = m;
    p.values.assign(static_cast<std::size_t>(p.n_sites()) * p.n_blocks * m, kMissing);
    return p;
  }
};

enum class MaximaProvenance { FromSimulation, FromPanel };

/// Block maxima M[s][t], NaN where the block fails the missingness rule.
struct BlockMaxima {
  std::vector<std::string> site_ids;
  std::vector<int> block_labels;
  int n_blocks = 0;
  std::vector<double> values;
  MaximaProvenance provenance = MaximaProvenance::FromPanel;

  int n_sites() const { return static_cast<int>(site_ids.size()); }
  std::size_t index(int s, int t) const { return static_cast<std::size_t>(s) * n_blocks + t; }
  double at(int s, int t) const { return values[index(s, t)]; }
  double& at(int s, int t) { return values[index(s, t)]; }

  static BlockMaxima empty(std::vector<std::string> ids, std::vector<int> blocks,
                           MaximaProvenance prov) {
    BlockMaxima m;
    m.site_ids = std::move(ids);
    m.block_labels = std::move(blocks);
    m.n_blocks = static_cast<int>(m.block_labels.size());
    m.values.assign(static_cast<std::size_t>(m.n_sites()) * m.n_blocks, kMissing);
    m.provenance = prov;
    return m;
  }
};

}  // namespace spatmax
