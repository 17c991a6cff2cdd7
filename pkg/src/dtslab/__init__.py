"""dtslab: a numerical laboratory for estimation of displaced thermal states.

The package computes right-logarithmic-derivative (RLD) Cramér-Rao type
bounds for joint estimation of the complex amplitude and the mean photon
number of displaced thermal light, and checks by Monte Carlo simulation
that a collective beam-splitter concentration strategy attains the bound
while a per-copy heterodyne strategy does not.

Modules:
    bounds    -- RLD Fisher matrix inverses, bound formulas, Gaussian trade-off
    states    -- analytic outcome laws and samplers (heterodyne, photon counting)
    fock      -- truncated Fock-space oracle that certifies the analytic laws
    estimator -- outcome-level protocol simulation and empirical MSE matrices
    cli       -- batch front-end (bounds | simulate | oracle-check)
"""

__version__ = "0.1.0"

from .bounds import (
    BoundKind,
    BoundValue,
    ThetaPoint,
    WeightMatrix,
    c_r_closed_2param,
    c_r_closed_3param,
    c_r_general,
    optimal_gaussian_tradeoff,
    rld_inverse_2param,
    rld_inverse_3param,
)
from .errors import DomainError, NumericalError, PreconditionError
from .estimator import (
    Estimate,
    ExperimentConfig,
    MseMatrix,
    ProtocolKind,
    compare_to_bounds,
    mle_geometric,
    monte_carlo_mse,
)
from .rng import RngStream
from .states import DisplacedThermalParams, concentrate, heterodyne_pdf, photon_pmf

__all__ = [
    "BoundKind",
    "BoundValue",
    "DisplacedThermalParams",
    "DomainError",
    "Estimate",
    "ExperimentConfig",
    "MseMatrix",
    "NumericalError",
    "PreconditionError",
    "ProtocolKind",
    "RngStream",
    "ThetaPoint",
    "WeightMatrix",
    "c_r_closed_2param",
    "c_r_closed_3param",
    "c_r_general",
    "compare_to_bounds",
    "concentrate",
    "heterodyne_pdf",
    "mle_geometric",
    "monte_carlo_mse",
    "optimal_gaussian_tradeoff",
    "photon_pmf",
    "rld_inverse_2param",
    "rld_inverse_3param",
    "__version__",
]
