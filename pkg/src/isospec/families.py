"""Sturm-Liouville data and factorization closed forms for the seven families.

Every family is described by the operator ``L_n = P d2 + Q d + R_n`` and a
pair of first-order ladder operators written as ``sqrt(P) d + a``:

* raising  ``A_n^+     = sqrt(P) d + a_plus(n)``,  ``A_n^+ psi_n = raise_coeff(n) psi_{n+1}``
* lowering ``A_{n+1}^- = sqrt(P) d + a_minus(n)``, ``A_{n+1}^- psi_{n+1} = lower_coeff(n) psi_n``

so that ``A_{n+1}^- A_n^+ = L_n + K_n`` and ``A_n^+ A_{n+1}^- = L_{n+1} + K_n``
with ``K_n = raise_coeff(n) * lower_coeff(n)``. The coefficient callables use
plain arithmetic and therefore accept floats, arrays and :class:`~isospec.jet.Jet`
objects.

For Legendre the square root of ``P = (1 - x**2)**2`` is taken as ``1 - x**2``,
the positive branch on (-1, 1); the ladder operators are then the negatives of
the textbook ``(x**2 - 1) d +- (n + 1) x`` forms, which leaves ``P``, ``Q``,
``R_n`` unchanged and reproduces the deformation function with a
``gamma - integral`` denominator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from . import quadrature
from .classical import Family
from .errors import ParameterError
from .grid import GridSpec

ABS_GREATER_THAN = "AbsGreaterThan"
GREATER_THAN = "GreaterThan"
LESS_THAN = "LessThan"
NON_NEGATIVE = "NonNegative"


@dataclass(frozen=True)
class GammaBound:
    """Admissible region for the deformation parameter at index ``n``.

    ``boundary(n)`` is the closed-form maximum of the denominator integral over
    the implemented domain; ``threshold(n)`` is the constant the condition
    compares gamma with (zero for ``LessThan``/``NonNegative``).
    """

    kind: str
    boundary: Callable[[int], float]
    threshold: Callable[[int], float]

    def admits(self, n: int, gamma: float) -> bool:
        if not math.isfinite(gamma):
            return False
        t = self.threshold(n)
        if self.kind == ABS_GREATER_THAN:
            return abs(gamma) > t
        if self.kind == GREATER_THAN:
            return gamma > t
        if self.kind == LESS_THAN:
            return gamma < t
        return gamma >= 0.0

    def describe(self, n: int) -> str:
        t = self.threshold(n)
        return {
            ABS_GREATER_THAN: f"|gamma| > {t:.17g}",
            GREATER_THAN: f"gamma > {t:.17g}",
            LESS_THAN: f"gamma < {t:.17g}",
            NON_NEGATIVE: "gamma >= 0",
        }[self.kind]

    def samples(self, n: int, count: int = 3) -> list[float]:
        """``count`` admissible gammas: multiples 1.5, 3, 10, ... of the bound.

        Multiplying (not adding) keeps the samples admissible when the bound
        grows quickly with ``n``; for ``|gamma| >`` rules the sign alternates.
        """
        factors = [1.5, 3.0, 10.0, 30.0, 100.0][:count]
        if self.kind == NON_NEGATIVE:
            return [0.0, 1.0, 10.0, 100.0, 1000.0][:count]
        if self.kind == LESS_THAN:
            base = max(self.boundary(n), 1.0)
            return [-f * base for f in factors]
        base = self.threshold(n)
        if self.kind == ABS_GREATER_THAN:
            return [f * base * (-1) ** i for i, f in enumerate(factors)]
        return [f * base for f in factors]

    def limit_sequence(self, n: int) -> list[float]:
        """Gammas 1e2, 1e3, 1e4 (times the boundary when it exceeds 1), signed admissibly."""
        sign = -1.0 if self.kind == LESS_THAN else 1.0
        base = max(1.0, abs(self.boundary(n)), abs(self.threshold(n)))
        return [sign * base * 10.0**k for k in (2, 3, 4)]


@dataclass(frozen=True)
class FamilySpec:
    family: Family
    p: Callable
    sqrt_p: Callable
    q: Callable
    r: Callable
    a_plus: Callable
    a_minus: Callable
    raise_coeff: Callable[[int], float]
    lower_coeff: Callable[[int], float]
    delta: Callable
    denom_integrand: Callable
    x0: float
    domain: tuple[float, float]
    gamma_rule: GammaBound
    default_grid: GridSpec
    # exponents of the denominator integrand at (lo, hi) domain ends, None if infinite
    endpoint_exponents: Callable[[int], tuple]
    closed_form_b: Callable | None = None

    def k(self, n: int) -> float:
        """Factorization constant shared by both orderings of the ladder product."""
        return self.raise_coeff(n) * self.lower_coeff(n)

    def delta_prime(self, n: int, x):
        return (self.a_plus(n, x) - self.a_minus(n, x)) / self.sqrt_p(x)

    def exp_delta(self, n: int, x):
        return np.exp(self.delta(n, x))

    def x0_singular(self, n: int) -> bool:
        """Whether the integrand is non-smooth at the lower integration limit."""
        lo_exp, hi_exp = self.endpoint_exponents(n)
        lo, hi = self.domain
        if self.x0 == lo:
            return _irregular(lo_exp)
        if self.x0 == hi:
            return _irregular(hi_exp)
        return False

    def full_integral(self, n: int, rel_tol: float = 1e-12) -> float:
        """Quadrature of the denominator integrand over the whole domain from ``x0``.

        This is the independent check of ``gamma_rule.boundary``; infinite
        ranges are truncated where the analytic tail bound drops below 1e-17
        of the total.
        """
        lo, hi = self.domain
        kind = self.family.kind
        f = lambda y: self.denom_integrand(n, y)  # noqa: E731
        lo_exp, hi_exp = self.endpoint_exponents(n)
        if kind == "bessel":
            raise ParameterError("the Bessel denominator integral diverges at x = 0")
        if kind == "hermite":
            cut = _gaussian_cutoff()
            return quadrature.integrate(f, 0.0, cut, rel_tol, 0.0).value
        if kind == "laguerre":
            s = self.family.alpha + 2 * n + 1
            cut = _gamma_tail_cutoff(s)
            return quadrature.integrate(f, 0.0, cut, rel_tol, 0.0, singular=(_irregular(lo_exp), False)).value
        return quadrature.integrate(f, lo, hi, rel_tol, 0.0, singular=(_irregular(lo_exp), _irregular(hi_exp))).value


def _irregular(exponent) -> bool:
    if exponent is None:
        return False
    return exponent < 0 or abs(exponent - round(exponent)) > 1e-12


def _gaussian_cutoff(rel: float = 1e-17) -> float:
    # tail of int exp(-y^2) beyond T is below exp(-T^2)/(2T)
    t = 1.0
    while math.exp(-t * t) / (2 * t) > rel * math.sqrt(math.pi) / 2:
        t += 0.125
    return t


def _gamma_tail_cutoff(s: float, rel: float = 1e-17) -> float:
    # for T > s + 1: Gamma(s+1, T) <= T^s e^{-T} / (1 - s/T)
    log_total = math.lgamma(s + 1)
    t = max(s + 2.0, 1.0)
    while s * math.log(t) - t - math.log1p(-s / t) > log_total + math.log(rel):
        t += 1.0
    return t


def _log_beta(a: float, b: float) -> float:
    return math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)


def _gamma(x: float) -> float:
    # direct Gamma is a few ulps more accurate than exp(lgamma) while it fits
    return math.gamma(x) if x < 170.0 else math.exp(math.lgamma(x))


def _scaled_beta(scale_log2: float, a: float, b: float) -> float:
    """``2**scale_log2 * B(a, b)``."""
    if a + b < 170.0:
        return 2.0**scale_log2 * math.gamma(a) * math.gamma(b) / math.gamma(a + b)
    return math.exp(scale_log2 * math.log(2.0) + _log_beta(a, b))


def _double_factorial_ratio(n: int, first: int) -> float:
    """prod_{k=1..n} (2k + first - 1) / (2k + first), a ratio of double factorials."""
    out = 1.0
    for k in range(1, n + 1):
        out *= (2 * k + first - 1) / (2 * k + first)
    return out


# ---------------------------------------------------------------------------
# presets


def _hermite(fam: Family) -> FamilySpec:
    root = math.sqrt(math.pi) / 2
    return FamilySpec(
        family=fam,
        p=lambda x: 1.0 + 0.0 * x,
        sqrt_p=lambda x: 1.0 + 0.0 * x,
        q=lambda x: -2.0 * x,
        r=lambda n, x: 2.0 * n + 0.0 * x,
        a_plus=lambda n, x: -2.0 * x,
        a_minus=lambda n, x: 0.0 * x,
        raise_coeff=lambda n: -1.0,
        lower_coeff=lambda n: 2.0 * (n + 1),
        delta=lambda n, x: -x * x,
        denom_integrand=lambda n, y: np.exp(-y * y),
        x0=0.0,
        domain=fam.domain,
        gamma_rule=GammaBound(ABS_GREATER_THAN, lambda n: root, lambda n: root),
        default_grid=GridSpec(-4.0, 4.0, 400),
        endpoint_exponents=lambda n: (None, None),
    )


def _laguerre(fam: Family) -> FamilySpec:
    al = fam.alpha
    return FamilySpec(
        family=fam,
        p=lambda x: x * x,
        sqrt_p=lambda x: x,
        q=lambda x: (al + 1.0) * x - x * x,
        r=lambda n, x: n * x,
        a_plus=lambda n, x: (al + n + 1.0) - x,
        a_minus=lambda n, x: -(n + 1.0) + 0.0 * x,
        raise_coeff=lambda n: n + 1.0,
        lower_coeff=lambda n: -(al + n + 1.0),
        delta=lambda n, x: (al + 2 * (n + 1)) * np.log(x) - x,
        denom_integrand=lambda n, y: np.exp((al + 2 * n + 1) * np.log(y) - y),
        x0=0.0,
        domain=fam.domain,
        gamma_rule=GammaBound(LESS_THAN, lambda n: _gamma(al + 2 * n + 2), lambda n: 0.0),
        default_grid=GridSpec(0.05, 15.0, 400),
        endpoint_exponents=lambda n: (al + 2 * n + 1, None),
    )


def _legendre(fam: Family) -> FamilySpec:
    def boundary(n):
        # 2 (2n)!! / (2n+1)!!
        return 2.0 * _double_factorial_ratio(n, 1)

    return FamilySpec(
        family=fam,
        p=lambda x: (1.0 - x * x) * (1.0 - x * x),
        sqrt_p=lambda x: 1.0 - x * x,
        q=lambda x: -2.0 * x * (1.0 - x * x),
        r=lambda n, x: n * (n + 1.0) * (1.0 - x * x),
        a_plus=lambda n, x: -(n + 1.0) * x,
        a_minus=lambda n, x: (n + 1.0) * x,
        raise_coeff=lambda n: -(n + 1.0),
        lower_coeff=lambda n: n + 1.0,
        delta=lambda n, x: (n + 1) * np.log1p(-x * x),
        denom_integrand=lambda n, y: (1.0 - y * y) ** n,
        x0=-1.0,
        domain=fam.domain,
        gamma_rule=GammaBound(ABS_GREATER_THAN, boundary, lambda n: 2.0),
        default_grid=GridSpec(-0.998, 0.998, 400),
        endpoint_exponents=lambda n: (float(n), float(n)),
    )


def _chebyshev(fam: Family) -> FamilySpec:
    def boundary(n):
        # pi (2n-1)!! / (2n)!!
        return math.pi * _double_factorial_ratio(n, 0)

    return FamilySpec(
        family=fam,
        p=lambda x: (1.0 - x * x) * (1.0 - x * x),
        sqrt_p=lambda x: 1.0 - x * x,
        q=lambda x: -x * (1.0 - x * x),
        r=lambda n, x: n * n * (1.0 - x * x),
        a_plus=lambda n, x: -n * x,
        a_minus=lambda n, x: (n + 1.0) * x,
        raise_coeff=lambda n: -float(n),
        lower_coeff=lambda n: n + 1.0,
        delta=lambda n, x: (n + 0.5) * np.log1p(-x * x),
        denom_integrand=lambda n, y: np.exp((n - 0.5) * (np.log1p(y) + np.log1p(-y))),
        x0=-1.0,
        domain=fam.domain,
        gamma_rule=GammaBound(GREATER_THAN, boundary, lambda n: math.pi),
        default_grid=GridSpec(-0.998, 0.998, 400),
        endpoint_exponents=lambda n: (n - 0.5, n - 0.5),
    )


def jacobi_function_uv(fam: Family, n: int) -> tuple[float, float]:
    """The exponents ``u`` and ``v`` of the Jacobi-function deformation."""
    al, lam = fam.alpha, fam.lam
    v = 2 * n + al + 1
    u = ((n + al) * (n + lam) + (n + 1) * (n + 1 + al - lam)) / v
    return u, v


def _jacobi_function(fam: Family) -> FamilySpec:
    al, lam = fam.alpha, fam.lam

    def uv(n):
        u, v = jacobi_function_uv(fam, n)
        if u <= 0 or v - u <= 0:
            raise ParameterError(
                f"{fam.label}: need u > 0 and v > u for an integrable deformation at n={n} (u={u:g}, v={v:g})"
            )
        return u, v

    def a_plus(n, x):
        return -(n + al) * (x - (n + lam) / (2 * n + al + 1))

    def a_minus(n, x):
        return (n + 1.0) * (x - (n + 1 + al - lam) / (2 * n + al + 1))

    def delta(n, x):
        u, v = uv(n)
        return u * np.log(x) + (v - u) * np.log1p(-x)

    def integrand(n, y):
        u, v = uv(n)
        return np.exp((u - 1) * np.log(y) + (v - u - 1) * np.log1p(-y))

    def boundary(n):
        u, v = uv(n)
        return _scaled_beta(0.0, u, v - u)

    def exponents(n):
        u, v = uv(n)
        return (u - 1, v - u - 1)

    return FamilySpec(
        family=fam,
        p=lambda x: (x * (1.0 - x)) * (x * (1.0 - x)),
        sqrt_p=lambda x: x * (1.0 - x),
        q=lambda x: x * (1.0 - x) * (lam - (al + 1.0) * x),
        r=lambda n, x: n * (n + al) * x * (1.0 - x),
        a_plus=a_plus,
        a_minus=a_minus,
        raise_coeff=lambda n: (n + al) * (n + lam) / (2 * n + al + 1),
        lower_coeff=lambda n: -(n + 1) * (n + 1 + al - lam) / (2 * n + al + 1),
        delta=delta,
        denom_integrand=integrand,
        x0=0.0,
        domain=fam.domain,
        gamma_rule=GammaBound(ABS_GREATER_THAN, boundary, lambda n: 2.0 * boundary(n)),
        default_grid=GridSpec(0.001, 0.999, 400),
        endpoint_exponents=exponents,
    )


def _jacobi_polynomial(fam: Family) -> FamilySpec:
    al, be = fam.alpha, fam.beta

    def pq(n):
        q = 2 * n + 2 + al + be
        return (be * be - al * al) / q, q

    def a_plus(n, x):
        p, q = pq(n)
        return (n + 1 + al + be) * (-x + (be - al) / q)

    def a_minus(n, x):
        p, q = pq(n)
        return (n + 1.0) * (x + (be - al) / q)

    def delta(n, x):
        p, q = pq(n)
        return 0.5 * (q + p) * np.log1p(x) + 0.5 * (q - p) * np.log1p(-x)

    def integrand(n, y):
        p, q = pq(n)
        return np.exp((0.5 * (q + p) - 1) * np.log1p(y) + (0.5 * (q - p) - 1) * np.log1p(-y))

    def boundary(n):
        p, q = pq(n)
        return _scaled_beta(q - 1, 0.5 * (q + p), 0.5 * (q - p))

    def exponents(n):
        p, q = pq(n)
        return (0.5 * (q + p) - 1, 0.5 * (q - p) - 1)

    return FamilySpec(
        family=fam,
        p=lambda x: (1.0 - x * x) * (1.0 - x * x),
        sqrt_p=lambda x: 1.0 - x * x,
        q=lambda x: (1.0 - x * x) * ((be - al) - (al + be + 2.0) * x),
        r=lambda n, x: n * (n + al + be + 1.0) * (1.0 - x * x),
        a_plus=a_plus,
        a_minus=a_minus,
        raise_coeff=lambda n: -2.0 * (n + 1) * (n + 1 + al + be) / (2 * n + 2 + al + be),
        lower_coeff=lambda n: 2.0 * (n + 1 + al) * (n + 1 + be) / (2 * n + 2 + al + be),
        delta=delta,
        denom_integrand=integrand,
        x0=-1.0,
        domain=fam.domain,
        gamma_rule=GammaBound(GREATER_THAN, boundary, boundary),
        default_grid=GridSpec(-0.998, 0.998, 400),
        endpoint_exponents=exponents,
    )


def _bessel(fam: Family) -> FamilySpec:
    def closed_form_b(n, gamma, x):
        x = np.asarray(x, dtype=float) if not hasattr(x, "c") else x
        return (2.0 * n) / (gamma * x ** (2 * n + 1) + x)

    return FamilySpec(
        family=fam,
        p=lambda x: 1.0 + 0.0 * x,
        sqrt_p=lambda x: 1.0 + 0.0 * x,
        q=lambda x: 1.0 / x,
        r=lambda n, x: 1.0 - (n * n) / (x * x),
        a_plus=lambda n, x: -float(n) / x,
        a_minus=lambda n, x: (n + 1.0) / x,
        raise_coeff=lambda n: -1.0,
        lower_coeff=lambda n: 1.0,
        delta=lambda n, x: -(2 * n + 1) * np.log(x),
        denom_integrand=lambda n, y: y ** (-(2.0 * n + 1)),
        x0=math.inf,
        domain=fam.domain,
        gamma_rule=GammaBound(NON_NEGATIVE, lambda n: 0.0, lambda n: 0.0),
        default_grid=GridSpec(0.05, 10.0, 400),
        endpoint_exponents=lambda n: (-(2.0 * n + 1), None),
        closed_form_b=closed_form_b,
    )


_BUILDERS = {
    "hermite": _hermite,
    "laguerre": _laguerre,
    "legendre": _legendre,
    "chebyshev": _chebyshev,
    "jacobi_function": _jacobi_function,
    "jacobi_polynomial": _jacobi_polynomial,
    "bessel": _bessel,
}


@lru_cache(maxsize=None)
def spec_for(family: Family) -> FamilySpec:
    """The fully populated preset for ``family``."""
    if not isinstance(family, Family):
        raise ParameterError(f"expected a Family, got {family!r}")
    return _BUILDERS[family.kind](family)


def default_families() -> list[Family]:
    """One representative of every family, with the parameters used by the suite."""
    return [
        Family.hermite(),
        Family.laguerre(0.0),
        Family.legendre(),
        Family.chebyshev(),
        Family.jacobi_function(1.5, 1.25),
        Family.jacobi_polynomial(0.5, -0.25),
        Family.bessel(),
    ]


def _dense_grid(spec: FamilySpec, n: int) -> np.ndarray:
    lo, hi = spec.domain
    g = spec.default_grid
    kind = spec.family.kind
    if kind == "hermite":
        return np.linspace(-8.0, 8.0, 401)
    if kind == "laguerre":
        cut = _gamma_tail_cutoff(spec.family.alpha + 2 * n + 1)
        return np.concatenate([np.geomspace(1e-6, g.lo, 40, endpoint=False), np.linspace(g.lo, max(cut, g.hi), 400)])
    if kind == "bessel":
        return np.geomspace(1e-4, 1e3, 400)
    width = hi - lo
    inner = np.linspace(lo + 1e-6 * width, hi - 1e-6 * width, 401)
    return inner


@lru_cache(maxsize=4096)
def _numerically_admissible(family: Family, n: int, gamma: float) -> bool:
    spec = spec_for(family)
    xs = _dense_grid(spec, n)
    if spec.closed_form_b is not None:
        denom = gamma * xs ** (2 * n + 1) + xs
        return bool(np.all(denom > 0))
    integral = quadrature.cumulative(
        lambda y: spec.denom_integrand(n, y), spec.x0, xs, rel_tol=1e-10, singular_at_x0=spec.x0_singular(n)
    )
    d = gamma - integral
    scale = max(abs(gamma), 1e-300)
    return bool(np.all(d > 1e-8 * scale) or np.all(d < -1e-8 * scale))


def gamma_admissible(spec: FamilySpec, n: int, gamma: float) -> bool:
    """Whether ``gamma`` satisfies the family's admissibility condition at index ``n``.

    The rule is backed by a numerical scan of the denominator on a
    dense grid, which must keep one sign.
    """
    try:
        gamma = float(gamma)
        if n < 0 or not spec.gamma_rule.admits(n, gamma):
            return False
        return _numerically_admissible(spec.family, int(n), gamma)
    except ParameterError:
        return False
