"""Heat-exchange statistics of a damped thermal harmonic oscillator."""

import os as _os

# QHEAT_THREADS bounds the BLAS/OpenMP pools used by the numeric kernels;
# must be applied before numpy is first imported.
_threads = _os.environ.get("QHEAT_THREADS")
if _threads:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        _os.environ.setdefault(_var, _threads)

from . import errors  # noqa: E402
from .heatstats import (  # noqa: E402
    CharFnSample,
    CumulantTrace,
    HeatDistribution,
    asymptotic_distribution,
    charfn,
    charfn_from_matrix,
    classical_density,
    classical_variance,
    cumulant_trace,
    default_k_max,
    invert_charfn,
    isothermal_distribution,
    low_temperature_distribution,
    mean_heat,
    stationary_charfn,
    stationary_mean,
    stationary_variance,
    variance_heat,
)
from .model import (  # noqa: E402
    ModelParams,
    RelaxationPair,
    TransitionMatrix,
    build_transition_matrix,
    certified_n_max,
    nbar,
    relaxation_pair,
    transition_direct,
    transition_hypergeometric,
)
from .oracle import (  # noqa: E402
    PopulationState,
    birth_death_generator,
    evolve,
    evolve_matrix,
    heat_distribution_bruteforce,
)
from .verify import check_fluctuation_theorem, check_symmetry, run_suite  # noqa: E402

__version__ = "0.1.0"
