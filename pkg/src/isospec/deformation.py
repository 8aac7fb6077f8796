"""One-parameter isospectral deformation of a family at index ``n``.

With ``D(x) = gamma - int_{x0}^x exp(delta)/sqrt(P)`` the deformation function
is ``b(x) = exp(delta(x)) / D(x)``. It solves the Riccati equation
``sqrt(P) b' = b**2 + b (a_plus - a_minus)``, which is how every derivative of
``b`` is obtained here: the equation is expanded as a truncated Taylor series
(see :mod:`isospec.jet`), never differentiated numerically.

Shifted ladder operators ``B+ = A+ + b`` and ``B- = A- - b`` keep the product
``B- B+ = L_n + K_n`` while ``B+ B- - K_n`` is the deformed operator
``L~_{n+1} = L_{n+1} - 2 sqrt(P) b'``, whose kernel contains
``psi~_{n+1} = B+ psi_n = raise_coeff(n) psi_{n+1} + b psi_n``.

All evaluation functions are vectorized over ``x``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import quadrature
from .classical import Family, classical_sequence
from .errors import DenominatorVanishes, DomainError, InadmissibleGamma, NonFiniteError, ParameterError
from .families import FamilySpec, gamma_admissible, spec_for
from .grid import GridSpec
from .jet import Jet, extend_ode2, integrate_riccati

PLUS = "plus"
MINUS = "minus"

# relative margin by which |D| must stay away from zero on the working grid
DENOMINATOR_MARGIN = 1e-8


class Denominator:
    """``D(x) = gamma - int_{x0}^x f`` with values cached on a set of nodes.

    Off-node abscissae are integrated from a nearby node, so evaluating a
    finite-difference stencil anchored at one node gives values that differ
    only by short, accurately resolved integrals.
    """

    def __init__(self, spec: FamilySpec, n: int, gamma: float, nodes: np.ndarray):
        self.spec = spec
        self.n = n
        self.gamma = gamma
        self._f = lambda y: spec.denom_integrand(n, y)
        self._x0 = spec.x0
        self._singular = spec.x0_singular(n)
        nodes = np.unique(np.asarray(nodes, dtype=float))
        integral = quadrature.cumulative(self._f, self._x0, nodes, singular_at_x0=self._singular)
        values = gamma - integral
        if math.isfinite(self._x0) and self._x0 not in nodes:
            k = int(np.searchsorted(nodes, self._x0))
            nodes = np.insert(nodes, k, self._x0)
            values = np.insert(values, k, gamma)
        self.nodes = nodes
        self.values = values

    def __call__(self, x, anchor=None) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        anchor = x if anchor is None else np.broadcast_to(np.asarray(anchor, dtype=float), x.shape)
        flat, aflat = x.ravel(), anchor.ravel()
        idx = np.clip(np.searchsorted(self.nodes, aflat), 1, self.nodes.size - 1)
        left = self.nodes[idx - 1]
        right = self.nodes[idx]
        idx = np.where(np.abs(aflat - left) <= np.abs(right - aflat), idx - 1, idx)
        base = self.nodes[idx]
        lo = np.minimum(base, flat)
        hi = np.maximum(base, flat)
        sign = np.where(flat >= base, 1.0, -1.0)
        sing_lo = self._singular & (lo == self._x0)
        sing_hi = self._singular & (hi == self._x0)
        integral, _, _ = quadrature.integrate_segments(self._f, lo, hi, singular_lo=sing_lo, singular_hi=sing_hi)
        return (self.values[idx] - sign * integral).reshape(x.shape)


@dataclass(frozen=True, eq=False)
class DeformationContext:
    spec: FamilySpec
    n: int
    gamma: float
    grid: GridSpec
    denom: Denominator | None = field(repr=False)

    @property
    def family(self) -> Family:
        return self.spec.family

    @property
    def k(self) -> float:
        return self.spec.k(self.n)

    @property
    def raise_coeff(self) -> float:
        return self.spec.raise_coeff(self.n)

    def x_grid(self) -> np.ndarray:
        return self.grid.points()


@dataclass(frozen=True)
class DeformedEval:
    x: float | np.ndarray
    b: float | np.ndarray
    db: float | np.ndarray
    psi_tilde: float | np.ndarray
    psi_tilde_d1: float | np.ndarray
    psi_tilde_d2: float | np.ndarray


@dataclass(frozen=True)
class EvalTable:
    """Grid tabulation of one deformation; every column has one entry per abscissa."""

    x: np.ndarray
    psi_n: np.ndarray
    psi_np1: np.ndarray
    b: np.ndarray | None = None
    db: np.ndarray | None = None
    psi_tilde: np.ndarray | None = None
    psi_tilde_d1: np.ndarray | None = None
    psi_tilde_d2: np.ndarray | None = None
    psi_n_d1: np.ndarray | None = None
    psi_n_d2: np.ndarray | None = None

    def columns(self) -> dict[str, np.ndarray]:
        return {k: v for k, v in self.__dict__.items() if v is not None}


def _as_spec(family) -> FamilySpec:
    if isinstance(family, FamilySpec):
        return family
    if isinstance(family, Family):
        return spec_for(family)
    raise ParameterError(f"expected Family or FamilySpec, got {family!r}")


def _check_open(spec: FamilySpec, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    lo, hi = spec.domain
    if not np.all(np.isfinite(x)) or np.any((x <= lo) | (x >= hi)):
        raise DomainError(f"{spec.family.label}: abscissae must lie in the open domain ({lo}, {hi})")
    return x


def make_context(family, n: int, gamma: float, grid: GridSpec | None = None) -> DeformationContext:
    """Bind ``(family, n, gamma)`` and cache the denominator on ``grid``.

    Raises :class:`InadmissibleGamma` when gamma violates the family bound and
    :class:`DenominatorVanishes` if ``|D|`` nevertheless gets within
    ``1e-8 |gamma|`` of zero on the grid.
    """
    spec = _as_spec(family)
    if int(n) != n or n < 0:
        raise ParameterError("n must be a non-negative integer")
    n = int(n)
    gamma = float(gamma)
    grid = spec.default_grid if grid is None else grid
    if not math.isfinite(gamma) or not gamma_admissible(spec, n, gamma):
        raise InadmissibleGamma(
            f"{spec.family.label}, n={n}: gamma={gamma!r} is not admissible (need {spec.gamma_rule.describe(n)})"
        )
    xs = _check_open(spec, grid.points())
    if spec.closed_form_b is not None:
        if np.any(gamma * xs ** (2 * n + 1) + xs <= 0):
            raise DenominatorVanishes(f"{spec.family.label}: closed-form denominator vanishes on the grid")
        return DeformationContext(spec, n, gamma, grid, None)
    denom = Denominator(spec, n, gamma, xs)
    d = denom.values
    if np.any(np.abs(d) <= DENOMINATOR_MARGIN * abs(gamma)) or np.any(np.sign(d) != np.sign(gamma)):
        raise DenominatorVanishes(
            f"{spec.family.label}, n={n}, gamma={gamma!r}: denominator reaches {np.min(np.abs(d)):.3g} on the grid"
        )
    return DeformationContext(spec, n, gamma, grid, denom)


def _scalar_out(scalar: bool, *arrays):
    if scalar:
        return tuple(float(a) for a in arrays)
    return arrays


def _b_values(ctx: DeformationContext, x: np.ndarray, anchor=None) -> np.ndarray:
    spec, n = ctx.spec, ctx.n
    if spec.closed_form_b is not None:
        return spec.closed_form_b(n, ctx.gamma, x)
    return spec.exp_delta(n, x) / ctx.denom(x, anchor)


def riccati_rhs(spec: FamilySpec, n: int):
    """``(x, b) -> b'`` from the Riccati equation, jet compatible."""

    def rhs(x, b):
        return (b * b + b * (spec.a_plus(n, x) - spec.a_minus(n, x))) / spec.sqrt_p(x)

    return rhs


def b_jet(ctx: DeformationContext, x, order: int, anchor=None) -> Jet:
    """Taylor jet of ``b`` at ``x``: the value from the denominator, the rest from the Riccati equation."""
    x = _check_open(ctx.spec, x)
    b0 = _b_values(ctx, x, anchor)
    return integrate_riccati(b0, x, riccati_rhs(ctx.spec, ctx.n), order)


def eval_b(ctx: DeformationContext, x, anchor=None):
    """``(b, db)`` at ``x``; ``db`` comes from the Riccati relation."""
    scalar = np.ndim(x) == 0
    jet = b_jet(ctx, x, 1, anchor)
    b, db = jet.derivs()
    if not (np.all(np.isfinite(b)) and np.all(np.isfinite(db))):
        raise NonFiniteError(f"{ctx.spec.family.label}: b is not finite")
    return _scalar_out(scalar, b, db)


def classical_jets(spec: FamilySpec, n: int, x, order: int) -> list[Jet]:
    """Jets of ``psi_0 .. psi_n`` at ``x``, extended past the second derivative with each ODE."""
    vals, d1, d2 = classical_sequence(spec.family, n, np.ravel(x))
    x = np.ravel(x)
    out = []
    for k in range(n + 1):
        derivs = [vals[k], d1[k], d2[k]][: order + 1]
        if order <= 2:
            out.append(Jet.from_derivs(derivs))
        else:
            out.append(extend_ode2(derivs, x, spec.p, spec.q, lambda xj, k=k: spec.r(k, xj), order))
    return out


def psi_tilde_jet(ctx: DeformationContext, x, order: int = 2, anchor=None) -> Jet:
    """Jet of ``raise_coeff(n) psi_{n+1} + b psi_n`` at ``x`` (flattened)."""
    x = np.ravel(_check_open(ctx.spec, x))
    jets = classical_jets(ctx.spec, ctx.n + 1, x, order)
    b = b_jet(ctx, x, order, None if anchor is None else np.ravel(anchor))
    return jets[ctx.n + 1] * ctx.raise_coeff + b * jets[ctx.n]


def eval_psi_tilde(ctx: DeformationContext, x, anchor=None) -> DeformedEval:
    """psi~_{n+1}, its first two derivatives, and (b, b') at ``x``."""
    scalar = np.ndim(x) == 0
    shape = np.shape(x)
    xf = np.ravel(_check_open(ctx.spec, x))
    jets = classical_jets(ctx.spec, ctx.n + 1, xf, 2)
    b = b_jet(ctx, xf, 2, None if anchor is None else np.ravel(anchor))
    pt = jets[ctx.n + 1] * ctx.raise_coeff + b * jets[ctx.n]
    cols = [xf, b.c[0], b.c[1]] + pt.derivs()
    if not all(np.all(np.isfinite(c)) for c in cols):
        raise NonFiniteError(f"{ctx.spec.family.label}: deformed eigenfunction is not finite")
    if scalar:
        return DeformedEval(*(float(c[0]) for c in cols))
    return DeformedEval(*(c.reshape(shape) for c in cols))


def tabulate(family, n: int, gamma: float | None, grid: GridSpec) -> EvalTable:
    """Classical and (when ``gamma`` is given) deformed columns on ``grid``."""
    spec = _as_spec(family)
    xs = grid.points()
    vals, d1, d2 = classical_sequence(spec.family, n + 1, xs)
    if gamma is None:
        return EvalTable(xs, vals[n], vals[n + 1], psi_n_d1=d1[n], psi_n_d2=d2[n])
    ctx = make_context(spec, n, gamma, grid)
    ev = eval_psi_tilde(ctx, xs)
    return EvalTable(
        xs,
        vals[n],
        vals[n + 1],
        b=ev.b,
        db=ev.db,
        psi_tilde=ev.psi_tilde,
        psi_tilde_d1=ev.psi_tilde_d1,
        psi_tilde_d2=ev.psi_tilde_d2,
        psi_n_d1=d1[n],
        psi_n_d2=d2[n],
    )


# ---------------------------------------------------------------------------
# operators


def _derivs_of(f, count: int) -> list[np.ndarray]:
    if isinstance(f, Jet):
        return f.derivs()[:count]
    if hasattr(f, "psi_tilde"):
        seq = [f.psi_tilde, f.psi_tilde_d1, f.psi_tilde_d2]
    elif hasattr(f, "value"):
        seq = [f.value, f.d1, f.d2]
    else:
        seq = list(f)
    if len(seq) < count:
        raise ParameterError(f"operator needs {count} derivative slots, got {len(seq)}")
    return [np.asarray(s, dtype=float) for s in seq[:count]]


def first_order(spec: FamilySpec, coeff, f: Jet, x) -> Jet:
    """``(sqrt(P) d + coeff) f`` on jets; ``coeff`` is a jet or a callable of the x-jet."""
    order = f.order - 1
    xj = Jet.variable(x, order)
    c = coeff(xj) if callable(coeff) else coeff.truncate(order)
    return spec.sqrt_p(xj) * f.deriv() + c * f.truncate(order)


def apply_B(ctx: DeformationContext, direction: str, f, x, anchor=None):
    """``B+ f = sqrt(P) f' + (a_plus + b) f`` or ``B- f = sqrt(P) f' + (a_minus - b) f``.

    ``f`` is a ``(value, d1)`` pair (returns an array) or a jet (returns a jet).
    """
    spec, n = ctx.spec, ctx.n
    x_in = x
    x = np.ravel(_check_open(spec, x))
    as_jet = isinstance(f, Jet)
    fj = f if as_jet else Jet.from_derivs([np.ravel(v) for v in _derivs_of(f, 2)])
    b = b_jet(ctx, x, fj.order - 1, anchor)
    xj = Jet.variable(x, fj.order - 1)
    if direction == PLUS:
        coeff = spec.a_plus(n, xj) + b
    elif direction == MINUS:
        coeff = spec.a_minus(n, xj) - b
    else:
        raise ParameterError(f"direction must be {PLUS!r} or {MINUS!r}")
    out = first_order(spec, coeff, fj, x)
    if as_jet:
        return out
    val = out.value.reshape(np.shape(x_in))
    return float(val) if np.ndim(x_in) == 0 else val


def l_tilde_terms(ctx: DeformationContext, f, x, anchor=None) -> list[np.ndarray]:
    """The four terms ``P f'', Q f', R_{n+1} f, -2 sqrt(P) b' f`` of the deformed operator."""
    spec, n = ctx.spec, ctx.n
    x = np.ravel(_check_open(spec, x))
    v, d1, d2 = (np.ravel(a) for a in _derivs_of(f, 3))
    _, db = eval_b(ctx, x, anchor)
    return [spec.p(x) * d2, spec.q(x) * d1, spec.r(n + 1, x) * v, -2.0 * spec.sqrt_p(x) * db * v]


def apply_L_tilde(ctx: DeformationContext, f, x, anchor=None):
    """``P f'' + Q f' + R_{n+1} f - 2 sqrt(P) b' f`` for a ``(value, d1, d2)`` triple."""
    total = sum(l_tilde_terms(ctx, f, x, anchor))
    return float(total[0]) if np.ndim(x) == 0 else total.reshape(np.shape(x))


class DeformationChain:
    """Contexts sharing one gamma and grid across neighbouring indices.

    The third-order operators couple three consecutive indices, so gamma must
    be admissible for each of them.
    """

    def __init__(self, family, gamma: float, grid: GridSpec | None = None):
        self.spec = _as_spec(family)
        self.gamma = float(gamma)
        self.grid = self.spec.default_grid if grid is None else grid
        self._contexts: dict[int, DeformationContext] = {}

    def context(self, n: int) -> DeformationContext:
        if n not in self._contexts:
            self._contexts[n] = make_context(self.spec, n, self.gamma, self.grid)
        return self._contexts[n]

    def psi_tilde_jet(self, m: int, x, order: int = 3) -> Jet:
        """Jet of psi~_m = B+_{m-1} psi_{m-1} (``m >= 1``)."""
        if m < 1:
            raise IndexError("deformed eigenfunctions start at index 1")
        return psi_tilde_jet(self.context(m - 1), x, order)


def c_scalar(spec: FamilySpec, direction: str, m: int) -> float:
    """The multiple of psi~_{m+1} (plus) or psi~_{m-1} (minus) produced from psi~_m."""
    if direction == PLUS:
        return spec.k(m - 1) * spec.raise_coeff(m - 1)
    return spec.k(m - 1) * spec.lower_coeff(m - 2)


def _extend_deformed(chain: DeformationChain, m: int, f, x) -> Jet:
    """Third-order jet for a triple annihilated by the deformed operator of index m."""
    spec = chain.spec
    derivs = [np.ravel(v) for v in _derivs_of(f, 3)]
    ctx = chain.context(m - 1)
    db = b_jet(ctx, x, 2).deriv()

    def r(xj):
        return spec.r(m, xj) - 2.0 * spec.sqrt_p(xj) * db.truncate(xj.order)

    return extend_ode2(derivs, x, spec.p, spec.q, r, 3)


def apply_C(chain: DeformationChain, direction: str, m: int, f, x):
    """Third-order ladder operator acting on a function of deformed index ``m``.

    ``C+ = B+_m A+_{m-1} B-_m`` maps psi~_m to a multiple of psi~_{m+1};
    ``C- = B+_{m-2} A-_{m-1} B-_m`` maps psi~_m to a multiple of psi~_{m-1}
    and needs ``m >= 2``, since psi~_0 does not exist. ``f`` is a jet of
    order >= 3 or a ``(value, d1, d2)`` triple of a solution of the deformed
    equation of index ``m``, whose third derivative is then taken from that
    equation.
    """
    spec = chain.spec
    if direction not in (PLUS, MINUS):
        raise ParameterError(f"direction must be {PLUS!r} or {MINUS!r}")
    if m < 1 or (direction == MINUS and m < 2):
        raise IndexError(f"C{'+' if direction == PLUS else '-'} is not defined on deformed index {m}")
    x_in = x
    x = np.ravel(_check_open(spec, x))
    fj = f if isinstance(f, Jet) else _extend_deformed(chain, m, f, x)
    if fj.order < 3:
        raise ParameterError("C operators need a jet of order 3")
    fj = fj.truncate(3)

    lower = chain.context(m - 1)
    b_lo = b_jet(lower, x, 2)
    g = first_order(spec, lambda xj: spec.a_minus(m - 1, xj) - b_lo.truncate(xj.order), fj, x)
    if direction == PLUS:
        g = first_order(spec, lambda xj: spec.a_plus(m - 1, xj), g, x)
        top = chain.context(m)
        b_top = b_jet(top, x, 0)
        g = first_order(spec, lambda xj: spec.a_plus(m, xj) + b_top, g, x)
    else:
        g = first_order(spec, lambda xj: spec.a_minus(m - 2, xj), g, x)
        top = chain.context(m - 2)
        b_top = b_jet(top, x, 0)
        g = first_order(spec, lambda xj: spec.a_plus(m - 2, xj) + b_top, g, x)
    val = g.value
    if isinstance(f, Jet):
        return val
    return float(val[0]) if np.ndim(x_in) == 0 else val.reshape(np.shape(x_in))
