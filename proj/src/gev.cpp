#include "spatmax/gev.hpp"

#include <cmath>
#include <sstream>

#include "spatmax/error.hpp"

namespace spatmax {

bool GevParams::valid() const {
  return std::isfinite(mu) && std::isfinite(sigma) && sigma > 0.0 && std::isfinite(xi);
}

bool GevParams::in_support(double y) const {
  if (!std::isfinite(y)) return false;
  if (std::abs(xi) < kGumbelEps) return true;
  return 1.0 + xi * (y - mu) / sigma > 0.0;
}

namespace {

void check_params(const GevParams& p) {
  if (!p.valid()) throw Error("invalid GEV parameters: sigma must be > 0 and all finite");
}

}  // namespace

double gev_cdf(double y, const GevParams& p) {
  check_params(p);
  if (!std::isfinite(y)) throw Error("gev_cdf: non-finite argument");
  const double w = (y - p.mu) / p.sigma;
  if (std::abs(p.xi) < kGumbelEps) {
    return std::exp(-std::exp(-w));
  }
  const double bracket = 1.0 + p.xi * w;
  if (bracket <= 0.0) {
    return p.xi > 0.0 ? 0.0 : 1.0;  // below lower / above upper endpoint
  }
  // t = bracket^(-1/xi), computed in log space
  const double t = std::exp(-std::log1p(p.xi * w) / p.xi);
  return std::exp(-t);
}

double gev_quantile(double prob, const GevParams& p) {
  check_params(p);
  if (!(prob > 0.0 && prob < 1.0)) throw Error("gev_quantile: prob must lie in (0,1)");
  const double loglog = std::log(-std::log(prob));
  if (std::abs(p.xi) < kGumbelEps) {
    return p.mu - p.sigma * loglog;
  }
  // ( (-log p)^{-xi} - 1 ) / xi  via expm1 for small xi
  return p.mu + p.sigma * std::expm1(-p.xi * loglog) / p.xi;
}

double gev_to_frechet(double m, const GevParams& p, const std::string& site_id) {
  check_params(p);
  const double w = (m - p.mu) / p.sigma;
  if (std::abs(p.xi) < kGumbelEps) {
    return std::exp(w);
  }
  const double bracket = 1.0 + p.xi * w;
  if (!(bracket > 0.0) || !std::isfinite(m)) {
    std::ostringstream msg;
    msg << "value " << m << " outside GEV support";
    if (!site_id.empty()) msg << " at site " << site_id;
    throw SupportError(msg.str(), site_id, m);
  }
  return std::exp(std::log1p(p.xi * w) / p.xi);
}

bool try_gev_to_frechet(double m, const GevParams& p, double& z) noexcept {
  if (!std::isfinite(m)) return false;
  const double w = (m - p.mu) / p.sigma;
  if (std::abs(p.xi) < kGumbelEps) {
    z = std::exp(w);
    return z > 0.0;
  }
  const double bracket = 1.0 + p.xi * w;
  if (!(bracket > 0.0)) return false;
  z = std::exp(std::log1p(p.xi * w) / p.xi);
  return z > 0.0;
}

double frechet_jacobian(double m, const GevParams& p) {
  const double z = gev_to_frechet(m, p);
  if (std::abs(p.xi) < kGumbelEps) return z / p.sigma;
  return std::pow(z, 1.0 - p.xi) / p.sigma;
}

double apply_gev_margins(double v, const GevParams& p) {
  check_params(p);
  if (!(v > 0.0)) throw Error("apply_gev_margins: argument must be positive");
  if (std::abs(p.xi) < kGumbelEps) {
    return p.mu + p.sigma * std::log(v);
  }
  return p.mu + p.sigma * std::expm1(p.xi * std::log(v)) / p.xi;
}

}  // namespace spatmax
