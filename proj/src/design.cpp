#include "spatmax/design.hpp"

#include <cmath>
#include <set>
#include <sstream>

#include "spatmax/error.hpp"

namespace spatmax {

Link parse_link(const std::string& name) {
  if (name == "identity") return Link::Identity;
  throw UsageError("unsupported link function '" + name + "' (supported: identity)");
}

std::string link_name(Link) { return "identity"; }

std::vector<std::string> MarginalDesign::beta_names() const {
  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(n_beta()));
  for (int i = 0; i < n_mu(); ++i) names.push_back("beta_mu_" + std::to_string(i));
  for (int i = 0; i < n_sigma(); ++i) names.push_back("beta_sigma_" + std::to_string(i));
  for (int i = 0; i < n_xi(); ++i) names.push_back("beta_xi_" + std::to_string(i));
  return names;
}

void SiteCatalog::validate() const {
  if (sites.empty()) throw DataError("site catalog is empty");
  std::set<std::string> ids;
  const std::size_t ncov = sites.front().covariates.size();
  for (const Site& s : sites) {
    if (s.id.empty()) throw DataError("site with empty id");
    if (!ids.insert(s.id).second) throw DataError("duplicate site id '" + s.id + "'");
    if (!std::isfinite(s.x1) || !std::isfinite(s.x2))
      throw DataError("non-finite coordinates at site '" + s.id + "'");
    if (s.covariates.size() != ncov)
      throw DataError("covariate length mismatch at site '" + s.id + "'");
    for (double c : s.covariates) {
      if (!std::isfinite(c)) throw DataError("non-finite covariate at site '" + s.id + "'");
    }
  }
}

int SiteCatalog::covariate_dim() const {
  return sites.empty() ? 0 : static_cast<int>(sites.front().covariates.size());
}

SiteCatalog grid_catalog(int n_sites) {
  const int k = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n_sites))));
  if (k * k != n_sites || k < 1) {
    throw UsageError("grid catalog requires a perfect-square site count, got " +
                     std::to_string(n_sites));
  }
  SiteCatalog cat;
  int idx = 0;
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      Site s;
      s.x1 = k == 1 ? 0.0 : -5.0 + 10.0 * i / (k - 1);
      s.x2 = k == 1 ? 0.0 : -5.0 + 10.0 * j / (k - 1);
      std::ostringstream id;
      id << "s";
      if (++idx < 10) id << "0";
      id << idx;
      s.id = id.str();
      s.covariates = {s.x1, s.x2};
      cat.sites.push_back(std::move(s));
    }
  }
  return cat;
}

namespace {

double linear_predictor(const std::vector<double>& covariates, std::span<const double> coeffs,
                        const std::vector<int>& selected) {
  double v = coeffs[0];
  for (std::size_t j = 0; j < selected.size(); ++j) {
    const int c = selected[j];
    if (c < 0 || static_cast<std::size_t>(c) >= covariates.size())
      throw DataError("design references covariate index " + std::to_string(c) +
                      " beyond the site covariate vector");
    v += coeffs[j + 1] * covariates[static_cast<std::size_t>(c)];
  }
  return v;
}

}  // namespace

namespace {

GevParams compute_margins(const std::vector<double>& covariates, std::span<const double> beta,
                          const MarginalDesign& design) {
  GevParams p;
  p.mu = linear_predictor(covariates, beta.subspan(0, design.n_mu()), design.mu_covariates);
  p.sigma = linear_predictor(covariates, beta.subspan(design.n_mu(), design.n_sigma()),
                             design.sigma_covariates);
  p.xi = linear_predictor(covariates, beta.subspan(design.n_mu() + design.n_sigma(), design.n_xi()),
                          design.xi_covariates);
  return p;
}

}  // namespace

GevParams marginal_params_at_site(const std::vector<double>& covariates,
                                  std::span<const double> beta, const MarginalDesign& design,
                                  const std::string& site_id) {
  if (static_cast<int>(beta.size()) != design.n_beta())
    throw DataError("beta length " + std::to_string(beta.size()) + " does not match design (" +
                    std::to_string(design.n_beta()) + ")");
  GevParams p = compute_margins(covariates, beta, design);
  if (!p.valid()) {
    std::ostringstream msg;
    msg << "invalid marginal parameter (sigma = " << p.sigma << ")";
    if (!site_id.empty()) msg << " at site " << site_id;
    throw NumericError(msg.str());
  }
  return p;
}

std::vector<GevParams> site_margins(const SiteCatalog& sites, std::span<const double> beta,
                                    const MarginalDesign& design) {
  std::vector<GevParams> out;
  out.reserve(sites.sites.size());
  for (const Site& s : sites.sites) {
    out.push_back(marginal_params_at_site(s.covariates, beta, design, s.id));
  }
  return out;
}

bool try_site_margins(const SiteCatalog& sites, std::span<const double> beta,
                      const MarginalDesign& design, std::vector<GevParams>& out) {
  if (static_cast<int>(beta.size()) != design.n_beta())
    throw DataError("beta length does not match design");
  out.resize(sites.sites.size());
  for (std::size_t i = 0; i < sites.sites.size(); ++i) {
    GevParams p = compute_margins(sites.sites[i].covariates, beta, design);
    if (!p.valid()) return false;
    out[i] = p;
  }
  return true;
}

}  // namespace spatmax
