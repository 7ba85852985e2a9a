#include "spatmax/godambe.hpp"

#include <cmath>

#include "spatmax/error.hpp"
#include "spatmax/mathutil.hpp"

namespace spatmax {

namespace {

constexpr double kOuterStep = 1e-4;
constexpr double kMaxCondition = 1e12;

void check_finite(const Eigen::MatrixXd& m, const char* what) {
  if (!m.allFinite()) throw NumericError(std::string(what) + " contains non-finite entries");
}

/// Total loglikelihood gradients (the summed scores) at eta = (beta, theta).
/// Beta rows hold dl1/dbeta for the two-step stack or dl2/dbeta for the
/// one-step stack; both parts may be skipped for columns that cannot move
/// them (theta perturbations under the two-step structural zero).
Eigen::VectorXd total_scores(std::span<const double> beta, const SmithDispersion& theta,
                             const Step1Workspace* ws, const BlockMaxima& maxima,
                             const MarginalDesign& design, const SiteCatalog& sites,
                             bool beta_rows_step1, bool beta_rows_step2) {
  const int nb = design.n_beta();
  Eigen::VectorXd psi = Eigen::VectorXd::Zero(nb + 3);
  std::vector<double> b(beta.begin(), beta.end());

  if (beta_rows_step1) {
    const auto l1 = [&](std::span<const double> x) { return -step1_nll(x, *ws, design, sites); };
    const std::vector<double> g1 = fd_gradient(l1, b, kScoreStep);
    for (int j = 0; j < nb; ++j) psi[j] = g1[j];
  }
  if (beta_rows_step2) {
    const auto l2b = [&](std::span<const double> x) {
      return -step2_nll(theta, x, maxima, sites, design);
    };
    const std::vector<double> g2b = fd_gradient(l2b, b, kScoreStep);
    for (int j = 0; j < nb; ++j) psi[j] += g2b[j];
  }
  const double tv[3] = {theta.sigma11, theta.sigma12, theta.sigma22};
  const auto l2t = [&](std::span<const double> x) {
    return -step2_nll(SmithDispersion{x[0], x[1], x[2]}, b, maxima, sites, design);
  };
  const std::vector<double> g2t = fd_gradient(l2t, std::span<const double>(tv, 3), kScoreStep);
  for (int j = 0; j < 3; ++j) psi[nb + j] = g2t[j];
  return psi;
}

/// Central-difference Jacobian of the total scores, divided by n.
Eigen::MatrixXd fd_a_matrix(std::span<const double> beta, const SmithDispersion& theta,
                            const Step1Workspace* ws, const BlockMaxima& maxima,
                            const MarginalDesign& design, const SiteCatalog& sites,
                            bool two_step) {
  const int nb = design.n_beta();
  const int dim = nb + 3;
  const int n = maxima.n_blocks;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(dim, dim);

  std::vector<double> eta(beta.begin(), beta.end());
  eta.push_back(theta.sigma11);
  eta.push_back(theta.sigma12);
  eta.push_back(theta.sigma22);

  // Two-step beta rows are psi1 = dl1/dbeta; one-step beta rows are
  // phi2 = dl2/dbeta. Never both.
  auto scores_at = [&](const std::vector<double>& e, bool need_beta_rows) {
    const std::span<const double> bspan(e.data(), static_cast<std::size_t>(nb));
    const SmithDispersion th{e[nb], e[nb + 1], e[nb + 2]};
    if (!th.valid())
      throw NumericError("dispersion left the positive-definite cone during differentiation");
    return total_scores(bspan, th, ws, maxima, design, sites, two_step && need_beta_rows,
                        !two_step);
  };

  for (int j = 0; j < dim; ++j) {
    const double h = kOuterStep * std::max(1.0, std::abs(eta[j]));
    // theta perturbations cannot move psi1 (two-step structural zero)
    const bool need_step1 = j < nb;
    const double ej = eta[j];
    eta[j] = ej + h;
    const Eigen::VectorXd sp = scores_at(eta, need_step1);
    eta[j] = ej - h;
    const Eigen::VectorXd sm = scores_at(eta, need_step1);
    eta[j] = ej;
    A.col(j) = (sp - sm) / (2.0 * h * n);
    if (two_step && !need_step1) A.block(0, j, nb, 1).setZero();
  }
  if (two_step) A.topRightCorner(nb, 3).setZero();
  check_finite(A, "A (finite differences)");
  return A;
}

}  // namespace

std::string a_variant_name(AVariant v) { return v == AVariant::FD ? "fd" : "bartlett"; }

AVariant parse_a_variant(const std::string& name) {
  if (name == "fd") return AVariant::FD;
  if (name == "bartlett") return AVariant::Bartlett;
  throw UsageError("unknown A variant '" + name + "' (expected fd or bartlett)");
}

Eigen::MatrixXd estimate_B(const BlockScores& scores) {
  const int dim = scores.dim_beta + scores.dim_theta;
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::VectorXd psi(dim);
  for (int t = 0; t < scores.n_blocks; ++t) {
    const auto p1 = scores.psi1_row(t);
    const auto p2 = scores.psi2_row(t);
    for (int j = 0; j < scores.dim_beta; ++j) psi[j] = p1[j];
    for (int j = 0; j < scores.dim_theta; ++j) psi[scores.dim_beta + j] = p2[j];
    B.noalias() += psi * psi.transpose();
  }
  B /= scores.n_blocks;
  check_finite(B, "B");
  return B;
}

Eigen::MatrixXd estimate_B_onestep(const BlockScores& scores) {
  const int dim = scores.dim_beta + scores.dim_theta;
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::VectorXd psi(dim);
  for (int t = 0; t < scores.n_blocks; ++t) {
    const auto pb = scores.phi2_row(t);
    const auto pt = scores.psi2_row(t);
    for (int j = 0; j < scores.dim_beta; ++j) psi[j] = pb[j];
    for (int j = 0; j < scores.dim_theta; ++j) psi[scores.dim_beta + j] = pt[j];
    B.noalias() += psi * psi.transpose();
  }
  B /= scores.n_blocks;
  check_finite(B, "B");
  return B;
}

Eigen::MatrixXd estimate_A_fd(std::span<const double> beta, const SmithDispersion& theta,
                              const Step1Workspace& ws, const BlockMaxima& maxima,
                              const MarginalDesign& design, const SiteCatalog& sites) {
  return fd_a_matrix(beta, theta, &ws, maxima, design, sites, true);
}

Eigen::MatrixXd estimate_A_fd_onestep(std::span<const double> beta, const SmithDispersion& theta,
                                      const BlockMaxima& maxima, const MarginalDesign& design,
                                      const SiteCatalog& sites) {
  return fd_a_matrix(beta, theta, nullptr, maxima, design, sites, false);
}

Eigen::MatrixXd estimate_A_bartlett(const DetailScores& scores) {
  const int nb = scores.dim_beta;
  const int nt = scores.dim_theta;
  const int dim = nb + nt;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::VectorXd s1(nb), s2(nt), f2(nb);
  for (int t = 0; t < scores.n_blocks; ++t) {
    for (int s = 0; s < scores.n_sites; ++s) {
      const auto row = scores.psi1_at(t, s);
      for (int j = 0; j < nb; ++j) s1[j] = row[j];
      A.topLeftCorner(nb, nb).noalias() -= s1 * s1.transpose();
    }
    for (int p = 0; p < scores.n_pairs; ++p) {
      const auto rp = scores.psi2_at(t, p);
      const auto rf = scores.phi2_at(t, p);
      for (int j = 0; j < nt; ++j) s2[j] = rp[j];
      for (int j = 0; j < nb; ++j) f2[j] = rf[j];
      A.bottomLeftCorner(nt, nb).noalias() -= s2 * f2.transpose();
      A.bottomRightCorner(nt, nt).noalias() -= s2 * s2.transpose();
    }
  }
  A /= scores.n_blocks;
  check_finite(A, "A (Bartlett)");
  return A;
}

Eigen::MatrixXd estimate_A_bartlett_onestep(const DetailScores& scores) {
  const int nb = scores.dim_beta;
  const int nt = scores.dim_theta;
  const int dim = nb + nt;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::VectorXd s(dim);
  for (int t = 0; t < scores.n_blocks; ++t) {
    for (int p = 0; p < scores.n_pairs; ++p) {
      const auto rf = scores.phi2_at(t, p);
      const auto rp = scores.psi2_at(t, p);
      for (int j = 0; j < nb; ++j) s[j] = rf[j];
      for (int j = 0; j < nt; ++j) s[nb + j] = rp[j];
      A.noalias() -= s * s.transpose();
    }
  }
  A /= scores.n_blocks;
  check_finite(A, "A (Bartlett)");
  return A;
}

GodambeResult sandwich(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, int n_blocks,
                       AVariant variant) {
  if (A.rows() != A.cols() || B.rows() != B.cols() || A.rows() != B.rows())
    throw UsageError("A and B must be square matrices of equal dimension");
  check_finite(A, "A");
  check_finite(B, "B");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
  const double smin = svd.singularValues().minCoeff();
  const double smax = svd.singularValues().maxCoeff();
  const double cond = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
  if (!(cond < kMaxCondition))
    throw NumericError(
        "A is singular or ill-conditioned (condition number " + std::to_string(cond) +
        "); consider the Bartlett A variant or a simpler marginal model");

  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
  const Eigen::MatrixXd C = lu.solve(B);
  Eigen::MatrixXd omega = lu.solve(C.transpose()).transpose();
  omega = 0.5 * (omega + omega.transpose()).eval();

  GodambeResult out;
  out.A = A;
  out.B = B;
  out.omega = omega;
  out.variant = variant;
  out.n_blocks = n_blocks;
  out.cond_A = cond;
  out.se.resize(static_cast<std::size_t>(omega.rows()));
  for (int i = 0; i < omega.rows(); ++i) {
    out.se[static_cast<std::size_t>(i)] = std::sqrt(std::max(omega(i, i), 0.0) / n_blocks);
  }
  return out;
}

GodambeResult godambe_variance(const FitResult& fit, const Step1Workspace* ws,
                               const BlockMaxima& maxima, const MarginalDesign& design,
                               const SiteCatalog& sites, AVariant variant) {
  if (fit.method == FitMethod::TwoStep) {
    if (ws == nullptr)
      throw UsageError("two-step variance needs the daily panel the margins were fitted on");
    const BlockScores scores =
        block_scores(fit.beta_hat, fit.theta_hat, *ws, maxima, design, sites);
    const Eigen::MatrixXd B = estimate_B(scores);
    Eigen::MatrixXd A;
    if (variant == AVariant::FD) {
      A = estimate_A_fd(fit.beta_hat, fit.theta_hat, *ws, maxima, design, sites);
    } else {
      A = estimate_A_bartlett(detail_scores(fit.beta_hat, fit.theta_hat, *ws, maxima, design, sites));
    }
    return sandwich(A, B, maxima.n_blocks, variant);
  }
  const BlockScores scores =
      block_scores_step2_only(fit.beta_hat, fit.theta_hat, maxima, design, sites);
  const Eigen::MatrixXd B = estimate_B_onestep(scores);
  Eigen::MatrixXd A;
  if (variant == AVariant::FD) {
    A = estimate_A_fd_onestep(fit.beta_hat, fit.theta_hat, maxima, design, sites);
  } else {
    A = estimate_A_bartlett_onestep(
        detail_scores_step2_only(fit.beta_hat, fit.theta_hat, maxima, design, sites));
  }
  return sandwich(A, B, maxima.n_blocks, variant);
}

}  // namespace spatmax
