"""Two-step composite likelihood inference for spatial max-stable extremes.

Thin re-export of the compiled core; see the C++ headers for the full
semantics of each operation.
"""

from spatmax._core import (
    BlockMaxima,
    Convergence,
    DailyPanel,
    DataError,
    Error,
    FitResult,
    GevParams,
    GodambeResult,
    MarginalDesign,
    NumericError,
    ReturnLevelCI,
    Scenario,
    SimulatedData,
    Site,
    SiteCatalog,
    SmithDispersion,
    ThresholdSpec,
    UsageError,
    __version__,
    apply_gev_margins,
    bivariate_cdf_frechet,
    block_maxima,
    decluster_panel,
    extremal_coefficient,
    fit_pairwise_onestep,
    fit_two_step,
    gev_cdf,
    gev_quantile,
    gev_to_frechet,
    godambe_variance,
    grid_catalog,
    joint_return_level,
    joint_return_level_ci,
    log_bivariate_density_frechet,
    log_pairwise_density_gev,
    mahalanobis_a,
    read_catalog_csv,
    read_daily_csv,
    read_maxima_csv,
    read_thresholds_csv,
    sample_T_year_maxima_batch,
    simulate_daily_panel,
    site_margins,
    thresholds_from_panel,
)

__all__ = [name for name in dir() if not name.startswith("_")] + ["__version__"]
