"""Lattice theta and zeta functions, lattice-logarithms and deformed eta products.

Hot loops (sphere enumeration, periodic-sequence sums) are compiled with
numba when it is available; set ``LATTC_NO_NUMBA=1`` to use the pure
numpy versions instead.
"""
from ._accel import backend
from .errors import (
    CoincidentPoints,
    DegenerateNome,
    DomainError,
    EnumerationTooLarge,
    LatticeError,
    MaxIterations,
    NonConvergence,
    NumericFailure,
    QuadratureFailure,
    SingularBasis,
    Underflow,
    UnknownLattice,
)
from .eta import (
    EtaParams,
    casimir_delta,
    casimir_delta_bessel,
    dedekind_eta,
    eta_limit_experiment,
    log_eta_product,
    log_eta_series,
    product_second_term,
)
from .lattice import (
    Lattice,
    PeriodicSequence,
    ShellSeries,
    dual,
    enumerate_shells,
    load_lattice,
    make_lattice,
    named_lattice,
    primitive_representatives,
    rescale_to_covolume,
    save_lattice,
)
from .llog import AffineGrowth, LogArgument, exp_sequence, log_lattice, log_sequence, pair_energy
from .optimize import (
    ModularPoint,
    OptimizationReport,
    gradient_check,
    lattice_from_modular,
    make_objective,
    maximize_2d,
    multistart_2d,
    optimize_sequence_1d,
    scan_2d,
)
from .special import SumResult, epstein_zeta, lattice_energy, theta

__version__ = "0.1.0"

__all__ = [
    "AffineGrowth",
    "CoincidentPoints",
    "DegenerateNome",
    "DomainError",
    "EnumerationTooLarge",
    "EtaParams",
    "Lattice",
    "LatticeError",
    "LogArgument",
    "MaxIterations",
    "ModularPoint",
    "NonConvergence",
    "NumericFailure",
    "OptimizationReport",
    "PeriodicSequence",
    "QuadratureFailure",
    "ShellSeries",
    "SingularBasis",
    "SumResult",
    "Underflow",
    "UnknownLattice",
    "backend",
    "casimir_delta",
    "casimir_delta_bessel",
    "dedekind_eta",
    "dual",
    "enumerate_shells",
    "epstein_zeta",
    "eta_limit_experiment",
    "exp_sequence",
    "gradient_check",
    "lattice_energy",
    "lattice_from_modular",
    "load_lattice",
    "log_eta_product",
    "log_eta_series",
    "log_lattice",
    "log_sequence",
    "make_lattice",
    "make_objective",
    "maximize_2d",
    "multistart_2d",
    "named_lattice",
    "optimize_sequence_1d",
    "pair_energy",
    "primitive_representatives",
    "product_second_term",
    "rescale_to_covolume",
    "save_lattice",
    "scan_2d",
    "theta",
]
