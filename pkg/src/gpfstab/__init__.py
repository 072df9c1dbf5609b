"""Simulation and finite-time stability certification of delayed
generalized proportional fractional (GPF) systems."""

from .certify import (
    Certificate,
    StabilityBox,
    T2Constants,
    gronwall_bound,
    t1_certify,
    t1_lhs,
    t2_certify,
    t2_constants,
    t2_lhs,
)
from .config import LoadedSpec, SpecError, load_spec
from .gpf_calculus import GPFParams, SampledFunction, d1mu, gpf_derivative, gpf_integral
from .harness import VerifyConfig, VerifyReport, mc_verify, reproduce_example
from .history import ConstantHistory, InitialHistory, SampledHistory, TanhHistory
from .matnorm import history_sup_norm, spectral_norm
from .solver import (
    DivergenceError,
    Nonlinearity,
    SystemSpec,
    Trajectory,
    evaluate_history,
    picard_oracle,
    solve_trajectory,
)
from .special_fn import MLQuery, gamma, mittag_leffler

__version__ = "0.1.0"
