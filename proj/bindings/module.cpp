#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

#include "spatmax/decluster.hpp"
#include "spatmax/design.hpp"
#include "spatmax/error.hpp"
#include "spatmax/fit.hpp"
#include "spatmax/godambe.hpp"
#include "spatmax/io.hpp"
#include "spatmax/likelihood.hpp"
#include "spatmax/risk.hpp"
#include "spatmax/simulate.hpp"
#include "spatmax/smith.hpp"
#include "spatmax/version.hpp"

namespace py = pybind11;
using namespace spatmax;

namespace {

std::span<const double> as_span(const std::vector<double>& v) { return {v.data(), v.size()}; }

FitResult py_fit_two_step(const DailyPanel& panel, const BlockMaxima& maxima,
                          const ThresholdSpec& thresholds, const MarginalDesign& design,
                          const SiteCatalog& sites, const std::vector<double>& init_beta,
                          std::optional<SmithDispersion> init_theta) {
  return fit_two_step(panel, maxima, thresholds, design, sites, as_span(init_beta),
                      init_theta ? &*init_theta : nullptr);
}

FitResult py_fit_pairwise(const BlockMaxima& maxima, const MarginalDesign& design,
                          const SiteCatalog& sites, const std::vector<double>& init_beta,
                          std::optional<SmithDispersion> init_theta) {
  return fit_pairwise_onestep(maxima, design, sites, as_span(init_beta),
                              init_theta ? &*init_theta : nullptr);
}

GodambeResult py_godambe(const FitResult& fit, const BlockMaxima& maxima,
                         const MarginalDesign& design, const SiteCatalog& sites,
                         const std::string& variant, std::optional<DailyPanel> panel,
                         std::optional<ThresholdSpec> thresholds) {
  const AVariant v = parse_a_variant(variant);
  if (fit.method == FitMethod::TwoStep) {
    if (!panel || !thresholds) {
      throw UsageError("two-step variance needs the daily panel and thresholds");
    }
    Step1Workspace ws(*panel, *thresholds);
    return godambe_variance(fit, &ws, maxima, design, sites, v);
  }
  return godambe_variance(fit, nullptr, maxima, design, sites, v);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "two-step composite likelihood inference for spatial max-stable extremes";
  m.attr("__version__") = kToolVersion;

  auto error = py::register_exception<Error>(m, "Error");
  py::register_exception<DataError>(m, "DataError", error);
  py::register_exception<NumericError>(m, "NumericError", error);
  py::register_exception<UsageError>(m, "UsageError", error);

  py::class_<GevParams>(m, "GevParams")
      .def(py::init<>())
      .def(py::init([](double mu, double sigma, double xi) {
             return GevParams{mu, sigma, xi};
           }),
           py::arg("mu"), py::arg("sigma"), py::arg("xi"))
      .def_readwrite("mu", &GevParams::mu)
      .def_readwrite("sigma", &GevParams::sigma)
      .def_readwrite("xi", &GevParams::xi)
      .def("valid", &GevParams::valid)
      .def("in_support", &GevParams::in_support, py::arg("y"))
      .def("__repr__", [](const GevParams& p) {
        return "GevParams(mu=" + format_double(p.mu) + ", sigma=" + format_double(p.sigma) +
               ", xi=" + format_double(p.xi) + ")";
      });

  py::class_<SmithDispersion>(m, "SmithDispersion")
      .def(py::init<>())
      .def(py::init([](double s11, double s12, double s22) {
             return SmithDispersion{s11, s12, s22};
           }),
           py::arg("sigma11"), py::arg("sigma12"), py::arg("sigma22"))
      .def_readwrite("sigma11", &SmithDispersion::sigma11)
      .def_readwrite("sigma12", &SmithDispersion::sigma12)
      .def_readwrite("sigma22", &SmithDispersion::sigma22)
      .def("det", &SmithDispersion::det)
      .def("valid", &SmithDispersion::valid)
      .def("__repr__", [](const SmithDispersion& s) {
        return "SmithDispersion(" + format_double(s.sigma11) + ", " + format_double(s.sigma12) +
               ", " + format_double(s.sigma22) + ")";
      });

  py::class_<Site>(m, "Site")
      .def(py::init([](std::string id, double x1, double x2, std::vector<double> covariates) {
             return Site{std::move(id), x1, x2, std::move(covariates)};
           }),
           py::arg("id"), py::arg("x1"), py::arg("x2"),
           py::arg("covariates") = std::vector<double>{})
      .def_readwrite("id", &Site::id)
      .def_readwrite("x1", &Site::x1)
      .def_readwrite("x2", &Site::x2)
      .def_readwrite("covariates", &Site::covariates);

  py::class_<SiteCatalog>(m, "SiteCatalog")
      .def(py::init<>())
      .def(py::init([](std::vector<Site> sites) {
             SiteCatalog cat;
             cat.sites = std::move(sites);
             cat.validate();
             return cat;
           }),
           py::arg("sites"))
      .def_readwrite("sites", &SiteCatalog::sites)
      .def("__len__", &SiteCatalog::size)
      .def("validate", &SiteCatalog::validate)
      .def("covariate_dim", &SiteCatalog::covariate_dim);

  py::class_<MarginalDesign>(m, "MarginalDesign")
      .def(py::init<>())
      .def(py::init([](std::vector<int> mu, std::vector<int> sigma, std::vector<int> xi) {
             MarginalDesign d;
             d.mu_covariates = std::move(mu);
             d.sigma_covariates = std::move(sigma);
             d.xi_covariates = std::move(xi);
             return d;
           }),
           py::arg("mu_covariates") = std::vector<int>{},
           py::arg("sigma_covariates") = std::vector<int>{},
           py::arg("xi_covariates") = std::vector<int>{})
      .def_readwrite("mu_covariates", &MarginalDesign::mu_covariates)
      .def_readwrite("sigma_covariates", &MarginalDesign::sigma_covariates)
      .def_readwrite("xi_covariates", &MarginalDesign::xi_covariates)
      .def("n_beta", &MarginalDesign::n_beta)
      .def("beta_names", &MarginalDesign::beta_names);

  py::class_<ThresholdSpec>(m, "ThresholdSpec")
      .def(py::init<>())
      .def_readwrite("u", &ThresholdSpec::u)
      .def_readwrite("quantile_level", &ThresholdSpec::quantile_level);

  py::class_<DailyPanel>(m, "DailyPanel")
      .def_readonly("site_ids", &DailyPanel::site_ids)
      .def_readonly("block_labels", &DailyPanel::block_labels)
      .def_readonly("n_blocks", &DailyPanel::n_blocks)
      .def_readonly("block_size", &DailyPanel::block_size)
      .def("n_sites", &DailyPanel::n_sites)
      .def("value", [](const DailyPanel& p, int s, int t, int k) { return p.at(s, t, k); },
           py::arg("site"), py::arg("block"), py::arg("day"));

  py::class_<BlockMaxima>(m, "BlockMaxima")
      .def_readonly("site_ids", &BlockMaxima::site_ids)
      .def_readonly("block_labels", &BlockMaxima::block_labels)
      .def_readonly("n_blocks", &BlockMaxima::n_blocks)
      .def("n_sites", &BlockMaxima::n_sites)
      .def("value", [](const BlockMaxima& m_, int s, int t) { return m_.at(s, t); },
           py::arg("site"), py::arg("block"));

  py::class_<Scenario>(m, "Scenario")
      .def(py::init<>())
      .def_readwrite("sites", &Scenario::sites)
      .def_readwrite("design", &Scenario::design)
      .def_readwrite("beta_true", &Scenario::beta_true)
      .def_readwrite("sigma_true", &Scenario::sigma_true)
      .def_readwrite("n_blocks", &Scenario::n_blocks)
      .def_readwrite("block_size", &Scenario::block_size)
      .def_readwrite("seed", &Scenario::seed);

  py::class_<SimulatedData>(m, "SimulatedData")
      .def_readonly("panel", &SimulatedData::panel)
      .def_readonly("maxima", &SimulatedData::maxima);

  py::class_<Convergence>(m, "Convergence")
      .def_readonly("converged", &Convergence::converged)
      .def_readonly("iterations", &Convergence::iterations)
      .def_readonly("evaluations", &Convergence::evaluations)
      .def_readonly("note", &Convergence::note);

  py::class_<FitResult>(m, "FitResult")
      .def_property_readonly("method",
                             [](const FitResult& f) { return method_name(f.method); })
      .def_readonly("beta_hat", &FitResult::beta_hat)
      .def_readonly("theta_hat", &FitResult::theta_hat)
      .def_readonly("nll_step1", &FitResult::nll_step1)
      .def_readonly("nll_step2", &FitResult::nll_step2)
      .def_readonly("convergence", &FitResult::convergence)
      .def_readonly("parameter_layout", &FitResult::parameter_layout)
      .def("eta_hat", &FitResult::eta_hat);

  py::class_<GodambeResult>(m, "GodambeResult")
      .def_readonly("A", &GodambeResult::A)
      .def_readonly("B", &GodambeResult::B)
      .def_readonly("omega", &GodambeResult::omega)
      .def_readonly("se", &GodambeResult::se)
      .def_readonly("n_blocks", &GodambeResult::n_blocks)
      .def_readonly("cond_A", &GodambeResult::cond_A)
      .def_property_readonly("variant",
                             [](const GodambeResult& g) { return a_variant_name(g.variant); });

  py::class_<ReturnLevelCI>(m, "ReturnLevelCI")
      .def_readonly("estimate", &ReturnLevelCI::estimate)
      .def_readonly("lower", &ReturnLevelCI::lower)
      .def_readonly("upper", &ReturnLevelCI::upper)
      .def_readonly("n_rejected", &ReturnLevelCI::n_rejected)
      .def_readonly("n_failed", &ReturnLevelCI::n_failed)
      .def_readonly("draws", &ReturnLevelCI::draws);

  m.def("grid_catalog", &grid_catalog, py::arg("n_sites"));
  m.def("site_margins",
        [](const SiteCatalog& sites, const std::vector<double>& beta,
           const MarginalDesign& design) { return site_margins(sites, as_span(beta), design); },
        py::arg("sites"), py::arg("beta"), py::arg("design"));

  m.def("gev_cdf", &gev_cdf, py::arg("y"), py::arg("params"));
  m.def("gev_quantile", &gev_quantile, py::arg("prob"), py::arg("params"));
  m.def("gev_to_frechet",
        [](double y, const GevParams& p) { return gev_to_frechet(y, p); },
        py::arg("y"), py::arg("params"));
  m.def("apply_gev_margins", &apply_gev_margins, py::arg("z"), py::arg("params"));

  m.def("mahalanobis_a", &mahalanobis_a, py::arg("dx1"), py::arg("dx2"), py::arg("sigma"));
  m.def("bivariate_cdf_frechet", &bivariate_cdf_frechet, py::arg("z1"), py::arg("z2"),
        py::arg("a"));
  m.def("log_bivariate_density_frechet", &log_bivariate_density_frechet, py::arg("z1"),
        py::arg("z2"), py::arg("a"));
  m.def("log_pairwise_density_gev", &log_pairwise_density_gev, py::arg("m1"), py::arg("m2"),
        py::arg("p1"), py::arg("p2"), py::arg("a"));
  m.def("extremal_coefficient", &extremal_coefficient, py::arg("a"));

  m.def("simulate_daily_panel", &simulate_daily_panel, py::arg("scenario"));
  m.def("thresholds_from_panel", &thresholds_from_panel, py::arg("panel"), py::arg("quantile"));
  m.def("block_maxima", &block_maxima, py::arg("panel"), py::arg("max_missing_frac") = 0.05);
  m.def("decluster_panel", &decluster_panel, py::arg("panel"), py::arg("thresholds"));

  m.def("fit_two_step", &py_fit_two_step, py::arg("panel"), py::arg("maxima"),
        py::arg("thresholds"), py::arg("design"), py::arg("sites"),
        py::arg("init_beta") = std::vector<double>{},
        py::arg("init_theta") = std::optional<SmithDispersion>{});
  m.def("fit_pairwise_onestep", &py_fit_pairwise, py::arg("maxima"), py::arg("design"),
        py::arg("sites"), py::arg("init_beta") = std::vector<double>{},
        py::arg("init_theta") = std::optional<SmithDispersion>{});

  m.def("godambe_variance", &py_godambe, py::arg("fit"), py::arg("maxima"), py::arg("design"),
        py::arg("sites"), py::arg("variant") = "fd",
        py::arg("panel") = std::optional<DailyPanel>{},
        py::arg("thresholds") = std::optional<ThresholdSpec>{});

  m.def("joint_return_level",
        [](const SiteCatalog& sites, int i, int j, const std::vector<double>& beta,
           const SmithDispersion& theta, const MarginalDesign& design, double T) {
          return joint_return_level(sites, i, j, as_span(beta), theta, design, T);
        },
        py::arg("sites"), py::arg("site_i"), py::arg("site_j"), py::arg("beta"), py::arg("theta"),
        py::arg("design"), py::arg("T"));
  m.def("joint_return_level_ci",
        [](const SiteCatalog& sites, int i, int j, const FitResult& fit,
           const GodambeResult& godambe, const MarginalDesign& design, double T, int n_draws,
           std::uint64_t seed) {
          return joint_return_level_ci(sites, i, j, fit, godambe, design, T, n_draws, seed);
        },
        py::arg("sites"), py::arg("site_i"), py::arg("site_j"), py::arg("fit"),
        py::arg("godambe"), py::arg("design"), py::arg("T"), py::arg("n_draws"),
        py::arg("seed") = 1);
  m.def("sample_T_year_maxima_batch",
        [](const SiteCatalog& sites, const std::vector<double>& beta, const SmithDispersion& theta,
           const MarginalDesign& design, double T, int n_draws, std::uint64_t seed) {
          return sample_T_year_maxima_batch(sites, as_span(beta), theta, design, T, n_draws, seed);
        },
        py::arg("sites"), py::arg("beta"), py::arg("theta"), py::arg("design"), py::arg("T"),
        py::arg("n_draws"), py::arg("seed") = 1);

  m.def("read_catalog_csv", &read_catalog_csv, py::arg("path"));
  m.def("read_daily_csv", &read_daily_csv, py::arg("path"), py::arg("sites"));
  m.def("read_maxima_csv", &read_maxima_csv, py::arg("path"), py::arg("sites"));
  m.def("read_thresholds_csv", &read_thresholds_csv, py::arg("path"), py::arg("sites"));
}
