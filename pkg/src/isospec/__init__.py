"""Isospectral one-parameter deformations of classical special functions."""

from .classical import ClassicalEval, Family, classical_sequence, eval_classical
from .deformation import (
    DeformationChain,
    DeformationContext,
    DeformedEval,
    EvalTable,
    apply_B,
    apply_C,
    apply_L_tilde,
    eval_b,
    eval_psi_tilde,
    make_context,
    tabulate,
)
from .errors import (
    ConvergenceError,
    DenominatorVanishes,
    DomainError,
    InadmissibleGamma,
    IsospecError,
    NonFiniteError,
    NotApplicable,
    NumericalFailure,
    ParameterError,
)
from .families import FamilySpec, GammaBound, default_families, gamma_admissible, spec_for
from .grid import GridSpec
from .kernels import BACKEND_NAME
from .quadrature import QuadResult, cumulative, integrate, integrate_to_infinity
from .verify import IDENTITIES, ResidualReport, run_identity, run_suite

__version__ = "0.1.0"

__all__ = [
    "BACKEND_NAME",
    "ClassicalEval",
    "ConvergenceError",
    "DeformationChain",
    "DeformationContext",
    "DeformedEval",
    "DenominatorVanishes",
    "DomainError",
    "EvalTable",
    "Family",
    "FamilySpec",
    "GammaBound",
    "GridSpec",
    "IDENTITIES",
    "InadmissibleGamma",
    "IsospecError",
    "NonFiniteError",
    "NotApplicable",
    "NumericalFailure",
    "ParameterError",
    "QuadResult",
    "ResidualReport",
    "apply_B",
    "apply_C",
    "apply_L_tilde",
    "classical_sequence",
    "cumulative",
    "default_families",
    "eval_b",
    "eval_classical",
    "eval_psi_tilde",
    "gamma_admissible",
    "integrate",
    "integrate_to_infinity",
    "make_context",
    "run_identity",
    "run_suite",
    "spec_for",
    "tabulate",
]
