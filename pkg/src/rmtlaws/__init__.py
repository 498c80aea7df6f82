"""Random-matrix spectral laws: a coupling metric on disjoint unions, seeded
ensembles, transform solvers and Monte Carlo verification of limit laws."""

from .ensembles import (
    CovarianceConfig,
    DeformedConfig,
    EntryLaw,
    SpikedConfig,
    WignerConfig,
    sample_deformed_wigner,
    sample_sample_covariance,
    sample_spiked,
    sample_wigner,
    wick_covariance,
)
from .laws import (
    CltConstants,
    SolverSettings,
    clt_cov_b,
    clt_mean_a,
    invert_stieltjes,
    semicircle_cdf,
    semicircle_stieltjes,
    solve_deformed_wigner,
    solve_silverstein,
    spiked_limit_description,
    transform_derivative,
)
from .spectra import (
    AtomicDistribution,
    EmpiricalSpectrum,
    eigenvalues_symmetric,
    esd_cdf,
    ks_distance,
    stieltjes_of_spectrum,
)
from .union_metric import TaggedPoint, UnionSpace, convergence_trace, delta, metric_axiom_suite

__version__ = "0.1.0"
