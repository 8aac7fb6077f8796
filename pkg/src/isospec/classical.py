"""Classical special functions and their first two derivatives.

Polynomial families are evaluated with three-term recurrences, differentiated
term by term so that ``d1`` and ``d2`` come out of the same O(n) sweep without
dividing by the leading ODE coefficient. Bessel functions use the ascending
series for small arguments and Miller's backward recurrence otherwise.

Normalizations follow the ladder relations the deformation is built on:
physicists' Hermite ``H_n``, generalized Laguerre ``L_n^alpha``, Legendre
``P_n``, Chebyshev ``T_n``, Jacobi ``P_n^(alpha, beta)``, integer-order Bessel
``J_n`` and the Jacobi functions ``f_n(x) = 2F1(-n, n + alpha; lambda; x)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DomainError, ParameterError

KINDS = (
    "hermite",
    "laguerre",
    "legendre",
    "chebyshev",
    "jacobi_function",
    "jacobi_polynomial",
    "bessel",
)

BESSEL_X_MAX = 1.0e4

_ALIASES = {
    "jacobi-function": "jacobi_function",
    "jacobif": "jacobi_function",
    "jacobi-polynomial": "jacobi_polynomial",
    "jacobi": "jacobi_polynomial",
    "jacobip": "jacobi_polynomial",
}


@dataclass(frozen=True)
class Family:
    """Identifier of one of the seven families, with its parameters.

    ``alpha`` is used by Laguerre, both Jacobi families; ``beta`` by Jacobi
    polynomials; ``lam`` (the lambda of the Jacobi-function equation) by
    Jacobi functions only.
    """

    kind: str
    alpha: float = 0.0
    beta: float = 0.0
    lam: float = 0.0

    def __post_init__(self):
        kind = _ALIASES.get(self.kind.lower(), self.kind.lower())
        if kind not in KINDS:
            raise ParameterError(f"unknown family {self.kind!r}; expected one of {', '.join(KINDS)}")
        object.__setattr__(self, "kind", kind)
        for name in ("alpha", "beta", "lam"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ParameterError(f"{name} must be finite")
            object.__setattr__(self, name, value)
        # zero out parameters the family does not use so equality is meaningful
        used = _USED[kind]
        for name in ("alpha", "beta", "lam"):
            if name not in used:
                object.__setattr__(self, name, 0.0)
        if kind == "laguerre" and self.alpha <= -1:
            raise ParameterError("Laguerre requires alpha > -1")
        if kind == "jacobi_polynomial" and (self.alpha <= -1 or self.beta <= -1):
            raise ParameterError("Jacobi polynomials require alpha > -1 and beta > -1")
        if kind == "jacobi_function" and (self.lam <= 0 or self.alpha <= 0):
            raise ParameterError("Jacobi functions require lambda > 0 and alpha > 0")

    # constructors ----------------------------------------------------------

    @classmethod
    def hermite(cls) -> "Family":
        return cls("hermite")

    @classmethod
    def laguerre(cls, alpha: float = 0.0) -> "Family":
        return cls("laguerre", alpha=alpha)

    @classmethod
    def legendre(cls) -> "Family":
        return cls("legendre")

    @classmethod
    def chebyshev(cls) -> "Family":
        return cls("chebyshev")

    @classmethod
    def jacobi_function(cls, alpha: float = 1.5, lam: float = 1.25) -> "Family":
        return cls("jacobi_function", alpha=alpha, lam=lam)

    @classmethod
    def jacobi_polynomial(cls, alpha: float = 0.0, beta: float = 0.0) -> "Family":
        return cls("jacobi_polynomial", alpha=alpha, beta=beta)

    @classmethod
    def bessel(cls) -> "Family":
        return cls("bessel")

    @classmethod
    def parse(cls, name: str, alpha=None, beta=None, lam=None) -> "Family":
        """Build a family from a CLI-style name and optional parameter overrides."""
        kind = _ALIASES.get(name.strip().lower(), name.strip().lower())
        defaults = {
            "laguerre": {"alpha": 0.0},
            "jacobi_function": {"alpha": 1.5, "lam": 1.25},
            "jacobi_polynomial": {"alpha": 0.0, "beta": 0.0},
        }.get(kind, {})
        params = dict(defaults)
        for key, value in (("alpha", alpha), ("beta", beta), ("lam", lam)):
            if value is not None:
                params[key] = value
        return cls(kind, **params)

    # properties ------------------------------------------------------------

    @property
    def label(self) -> str:
        used = _USED[self.kind]
        if not used:
            return self.kind
        args = ", ".join(f"{'lambda' if k == 'lam' else k}={getattr(self, k):g}" for k in used)
        return f"{self.kind}({args})"

    @property
    def domain(self) -> tuple[float, float]:
        """Open natural domain."""
        return _DOMAINS[self.kind]

    @property
    def is_polynomial(self) -> bool:
        return self.kind != "bessel"

    def check_domain(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if not np.all(np.isfinite(x)):
            raise DomainError(f"{self.label}: abscissae must be finite")
        lo, hi = self.domain
        if self.is_polynomial:
            bad = (x < lo) | (x > hi)
        else:
            bad = (x <= lo) | (x >= hi)
        if self.kind == "bessel":
            # Miller's start index grows with x; the asymptotic regime is out of scope
            bad = bad | (x > BESSEL_X_MAX)
        if np.any(bad):
            first = float(np.atleast_1d(x)[np.atleast_1d(bad)][0])
            hi_txt = BESSEL_X_MAX if self.kind == "bessel" else hi
            raise DomainError(f"{self.label}: x={first!r} outside the supported domain ({lo}, {hi_txt})")
        return x


_USED = {
    "hermite": (),
    "laguerre": ("alpha",),
    "legendre": (),
    "chebyshev": (),
    "jacobi_function": ("alpha", "lam"),
    "jacobi_polynomial": ("alpha", "beta"),
    "bessel": (),
}

_DOMAINS = {
    "hermite": (-math.inf, math.inf),
    "laguerre": (0.0, math.inf),
    "legendre": (-1.0, 1.0),
    "chebyshev": (-1.0, 1.0),
    "jacobi_function": (0.0, 1.0),
    "jacobi_polynomial": (-1.0, 1.0),
    "bessel": (0.0, math.inf),
}


@dataclass(frozen=True)
class ClassicalEval:
    x: float | np.ndarray
    n: int
    value: float | np.ndarray
    d1: float | np.ndarray
    d2: float | np.ndarray


def _jacobi_coeffs(a: float, b: float, nmax: int):
    A = np.empty(nmax)
    B = np.empty(nmax)
    C = np.zeros(nmax)
    for k in range(nmax):
        if k == 0:
            A[0] = 0.5 * (a + b + 2.0)
            B[0] = 0.5 * (a - b)
            continue
        s = 2.0 * k + a + b
        denom = 2.0 * (k + 1) * (k + a + b + 1) * s
        A[k] = (s + 1) * (s + 2) * s / denom
        B[k] = (s + 1) * (a * a - b * b) / denom
        C[k] = 2.0 * (k + a) * (k + b) * (s + 2) / denom
    return A, B, C


def recurrence_coefficients(family: Family, nmax: int):
    """Arrays ``A, B, C`` with ``p[k+1] = (A[k] x + B[k]) p[k] - C[k] p[k-1]``."""
    k = np.arange(nmax, dtype=float)
    kind = family.kind
    if kind == "hermite":
        return np.full(nmax, 2.0), np.zeros(nmax), 2.0 * k
    if kind == "laguerre":
        al = family.alpha
        return -1.0 / (k + 1), (2 * k + al + 1) / (k + 1), (k + al) / (k + 1)
    if kind == "legendre":
        return (2 * k + 1) / (k + 1), np.zeros(nmax), k / (k + 1)
    if kind == "chebyshev":
        A = np.full(nmax, 2.0)
        if nmax:
            A[0] = 1.0
        return A, np.zeros(nmax), np.ones(nmax)
    if kind == "jacobi_polynomial":
        return _jacobi_coeffs(family.alpha, family.beta, nmax)
    if kind == "jacobi_function":
        # P_k^(lam-1, alpha-lam)(1 - 2x) scaled by k!/(lam)_k, folded into the recurrence
        lam = family.lam
        A, B, C = _jacobi_coeffs(lam - 1.0, family.alpha - lam, nmax)
        ratio = (k + 1) / (lam + k)
        prev = np.concatenate(([1.0], ratio[:-1])) if nmax else ratio
        return -2.0 * A * ratio, (A + B) * ratio, C * ratio * prev
    raise ParameterError(f"{family.label} has no polynomial recurrence")


def classical_sequence(family: Family, nmax: int, x):
    """Values and two derivatives of psi_k(x) for k = 0..nmax.

    Returns three arrays of shape ``(nmax + 1, len(x))``.
    """
    if nmax < 0:
        raise ParameterError("index must be non-negative")
    x = np.atleast_1d(family.check_domain(x)).astype(float).ravel()
    if family.kind == "bessel":
        vals = kernels.bessel_j_seq(x, nmax + 1)
        d1 = np.empty((nmax + 1, x.size))
        d1[0] = -vals[1]
        for k in range(1, nmax + 1):
            d1[k] = vals[k - 1] - (k / x) * vals[k]
        vals = vals[: nmax + 1]
        orders = np.arange(nmax + 1, dtype=float)[:, None]
        d2 = -d1 / x - (1.0 - orders**2 / x**2) * vals
        return vals, d1, d2
    return kernels.three_term(x, *recurrence_coefficients(family, nmax))


def eval_classical(family: Family, n: int, x) -> ClassicalEval:
    """psi_n(x) with first and second derivatives; scalar in, scalar out."""
    n = int(n)
    if n < 0:
        raise ParameterError("index must be non-negative")
    scalar = np.ndim(x) == 0
    vals, d1, d2 = classical_sequence(family, n, x)
    if scalar:
        return ClassicalEval(float(x), n, float(vals[n, 0]), float(d1[n, 0]), float(d2[n, 0]))
    shape = np.shape(x)
    return ClassicalEval(
        np.asarray(x, dtype=float), n, vals[n].reshape(shape), d1[n].reshape(shape), d2[n].reshape(shape)
    )
