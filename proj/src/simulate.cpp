#include "spatmax/simulate.hpp"

#include <algorithm>
#include <cmath>

#include "spatmax/error.hpp"
#include "spatmax/mathutil.hpp"

namespace spatmax {

SmithSimContext::SmithSimContext(const SiteCatalog& sites, const SmithDispersion& sigma) {
  if (sites.sites.empty()) throw DataError("cannot simulate over an empty site set");
  if (!sigma.valid()) throw NumericError("dispersion matrix is not positive definite");
  const int S = static_cast<int>(sites.size());
  x1_.resize(S);
  x2_.resize(S);
  double lo1 = sites.sites[0].x1, hi1 = lo1;
  double lo2 = sites.sites[0].x2, hi2 = lo2;
  for (int s = 0; s < S; ++s) {
    x1_[s] = sites.sites[s].x1;
    x2_[s] = sites.sites[s].x2;
    lo1 = std::min(lo1, x1_[s]);
    hi1 = std::max(hi1, x1_[s]);
    lo2 = std::min(lo2, x2_[s]);
    hi2 = std::max(hi2, x2_[s]);
  }
  const double pad = 6.0 * std::sqrt(sigma.largest_eigenvalue());
  lo1_ = lo1 - pad;
  lo2_ = lo2 - pad;
  len1_ = (hi1 + pad) - lo1_;
  len2_ = (hi2 + pad) - lo2_;
  area_ = len1_ * len2_;
  const double det = sigma.det();
  g_max_ = 1.0 / (2.0 * kPi * std::sqrt(det));
  inv11_ = sigma.sigma22 / det;
  inv12_ = -sigma.sigma12 / det;
  inv22_ = sigma.sigma11 / det;
}

void SmithSimContext::draw(CounterRng& rng, std::vector<double>& field) const {
  const int S = n_sites();
  field.assign(S, 0.0);
  double running_min = 0.0;
  double gamma = 0.0;
  for (;;) {
    gamma += rng.exponential();
    const double intensity = area_ / gamma;
    const double peak = intensity * g_max_;
    if (peak <= running_min) break;
    const double c1 = lo1_ + len1_ * rng.uniform();
    const double c2 = lo2_ + len2_ * rng.uniform();
    bool touched_min = false;
    for (int s = 0; s < S; ++s) {
      if (peak <= field[s]) continue;
      const double v1 = x1_[s] - c1;
      const double v2 = x2_[s] - c2;
      const double q = inv11_ * v1 * v1 + 2.0 * inv12_ * v1 * v2 + inv22_ * v2 * v2;
      const double z = peak * std::exp(-0.5 * q);
      if (z > field[s]) {
        if (field[s] <= running_min) touched_min = true;
        field[s] = z;
      }
    }
    if (touched_min || running_min == 0.0) {
      running_min = field[0];
      for (int s = 1; s < S; ++s) running_min = std::min(running_min, field[s]);
    }
  }
}

std::vector<double> simulate_smith_field(const SiteCatalog& sites, const SmithDispersion& sigma,
                                         CounterRng& rng) {
  SmithSimContext ctx(sites, sigma);
  std::vector<double> field;
  ctx.draw(rng, field);
  return field;
}

SimulatedData simulate_daily_panel(const Scenario& scenario) {
  if (scenario.n_blocks < 1 || scenario.block_size < 1)
    throw UsageError("scenario needs n_blocks >= 1 and block_size >= 1");
  const std::vector<GevParams> margins =
      site_margins(scenario.sites, scenario.beta_true, scenario.design);
  const SmithSimContext ctx(scenario.sites, scenario.sigma_true);
  const int S = static_cast<int>(scenario.sites.size());
  const int n = scenario.n_blocks;
  const int m = scenario.block_size;

  std::vector<std::string> ids;
  ids.reserve(S);
  for (const Site& s : scenario.sites.sites) ids.push_back(s.id);
  std::vector<int> blocks(n);
  for (int t = 0; t < n; ++t) blocks[t] = t + 1;

  SimulatedData out;
  out.panel = DailyPanel::empty(ids, blocks, m);
  out.maxima = BlockMaxima::empty(ids, blocks, MaximaProvenance::FromSimulation);

  std::vector<double> field;
  for (int t = 0; t < n; ++t) {
    for (int k = 0; k < m; ++k) {
      CounterRng rng = CounterRng::keyed(
          scenario.seed, {kStreamDaily, static_cast<std::uint64_t>(t), static_cast<std::uint64_t>(k)});
      ctx.draw(rng, field);
      for (int s = 0; s < S; ++s) {
        const double y = apply_gev_margins(field[s] / m, margins[s]);
        out.panel.at(s, t, k) = y;
        double& mx = out.maxima.at(s, t);
        if (is_missing(mx) || y > mx) mx = y;
      }
    }
  }
  return out;
}

}  // namespace spatmax
