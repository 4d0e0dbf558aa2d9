"""Simulation and spectral verification of isotropic vector-valued
Gaussian random fields on the 2-sphere."""

from .harmonics import (
    HarmonicIndex,
    LegendreValues,
    SphericalGrid,
    analyze_scalar,
    build_grid,
    legendre_all,
    sph_harm,
    synthesize_scalar,
)
from .model import (
    ReducedSpectrum,
    SpectralModel,
    kernel_reconstruct,
    make_model_from_table,
    make_powerlaw_model,
    mean_square_continuity_modulus,
    power_spectrum_operator,
    reduced_spectrum,
)
from .operators import (
    CltCovariance,
    OperatorOnH,
    SymBasisElement,
    TruncatedSpace,
    clt_covariance,
    hs_inner,
    outer_product,
    schatten_norm,
    sym_basis,
    trace,
)
from .sampler import (
    CoefficientSet,
    FieldRealization,
    draw_coefficients,
    replicate_stream,
    synthesize_field,
)
from .estimators import (
    NormalizedStatistic,
    SamplePowerSpectrum,
    analyze_field,
    normalized_statistic,
    reduced_estimator,
    sample_power_spectrum,
)
from .verify import (
    MonteCarloReport,
    TheoreticalQuantities,
    d2_proxy,
    empirical_cumulant4,
    ks_to_standard_normal,
    mse_theoretical,
    run_mc,
    theoretical,
)

__version__ = "0.1.0"
