"""Identity checks for the classical functions and their deformations.

Each identity is evaluated over a grid and summarized as a
:class:`ResidualReport`. The relative residual divides by the largest
magnitude of the identity's individual terms over the grid, so neither tiny
terms nor zeros of the functions produce false verdicts.

Derivative identities are judged against independent oracles: five-point
finite differences of tabulated values (with the denominator integral of each
stencil anchored at the stencil centre, so the stencil sees a smooth function),
quadrature for the bound constants, and direct re-evaluation for the
proportionality checks of the third-order operators.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import deformation as dfm
from . import quadrature
from .classical import Family, classical_sequence
from .errors import InadmissibleGamma, IsospecError, NotApplicable, ParameterError
from .families import FamilySpec, gamma_admissible, spec_for
from .grid import GridSpec
from .jet import Jet

IDENTITIES = (
    "ClassicalODE",
    "LadderRaise",
    "LadderLower",
    "DeltaConsistency",
    "RiccatiB",
    "FactorizationBB",
    "AnnihilationLtilde",
    "EigenvalueBB",
    "GammaBoundQuadrature",
    "LimitGammaInf",
    "BesselClosedForm",
    "BesselGammaZero",
    "CLadderPlus",
    "CLadderMinus",
)

DEFAULT_TOLERANCES = {
    "ClassicalODE": 1e-10,
    "LadderRaise": 1e-9,
    "LadderLower": 1e-9,
    "DeltaConsistency": 1e-6,
    "RiccatiB": 1e-6,
    "FactorizationBB": 1e-8,
    "AnnihilationLtilde": 1e-8,
    "EigenvalueBB": 1e-7,
    "GammaBoundQuadrature": 1e-9,
    # the gamma*deviation products may differ by at most a factor of 2
    "LimitGammaInf": 1.0,
    "BesselClosedForm": 1e-8,
    "BesselGammaZero": 1e-9,
    "CLadderPlus": 1e-5,
    "CLadderMinus": 1e-5,
}
FD_ANNIHILATION_TOLERANCE = 1e-5

GAMMA_IDENTITIES = frozenset(
    {"RiccatiB", "FactorizationBB", "AnnihilationLtilde", "EigenvalueBB", "BesselClosedForm", "CLadderPlus", "CLadderMinus"}
)

EPS = np.finfo(float).eps


def default_tolerance(identity: str, method: str = "analytic") -> float:
    scale = float(os.environ.get("ISOSPEC_TOLERANCE_SCALE", "1"))
    if identity == "AnnihilationLtilde" and method == "fd":
        return FD_ANNIHILATION_TOLERANCE * scale
    return DEFAULT_TOLERANCES[identity] * scale


@dataclass(frozen=True)
class ResidualReport:
    identity: str
    family: Family
    n: int
    gamma: float | None
    max_abs_residual: float
    max_rel_residual: float
    scale: float
    passed: bool
    tolerance: float
    method: str = "analytic"
    status: str = "run"  # run | not_applicable | error
    note: str = ""
    detail: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["family"] = {"kind": self.family.kind, "label": self.family.label, **_params(self.family)}
        d["pass"] = d.pop("passed")
        return _finite_or_null(d)

    @property
    def sort_key(self):
        return (self.family.label, IDENTITIES.index(self.identity), self.n, self.method, _gamma_key(self.gamma))


def _gamma_key(g):
    return (0, 0.0) if g is None else (1, g)


def _params(fam: Family) -> dict:
    return {"alpha": fam.alpha, "beta": fam.beta, "lambda": fam.lam}


def _finite_or_null(obj):
    if isinstance(obj, dict):
        return {k: _finite_or_null(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite_or_null(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        return float(obj) if math.isfinite(obj) else None
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def _report(identity, family, n, gamma, abs_res, rel_res, scale, tol, method="analytic", detail=None):
    abs_res, rel_res, scale = float(abs_res), float(rel_res), float(scale)
    ok = bool(math.isfinite(rel_res) and rel_res <= tol)
    return ResidualReport(identity, family, n, gamma, abs_res, rel_res, scale, ok, tol, method, "run", "", detail or {})


def _not_applicable(identity, family, n, gamma, reason, tol, method="analytic"):
    return ResidualReport(identity, family, n, gamma, 0.0, 0.0, 1.0, True, tol, method, "not_applicable", reason)


def _relative(residual: np.ndarray, terms) -> tuple[float, float, float]:
    """Max absolute residual, max relative residual, and the term scale."""
    scale = max((float(np.max(np.abs(t))) for t in terms), default=0.0)
    scale = scale if scale > 0 else 1.0
    a = float(np.max(np.abs(residual)))
    return a, a / scale, scale


# ---------------------------------------------------------------------------
# finite differences


def _local_scale(spec: FamilySpec, x: np.ndarray) -> np.ndarray:
    lo, hi = spec.domain
    s = np.maximum(1.0, np.abs(x))
    if math.isfinite(lo):
        s = np.minimum(s, 0.25 * (x - lo))
    if math.isfinite(hi):
        s = np.minimum(s, 0.25 * (hi - x))
    return s


_OFFSETS = np.array([-2.0, -1.0, 0.0, 1.0, 2.0])
_W1 = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
_W2 = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0


def stencil(spec: FamilySpec, x: np.ndarray, derivative: int):
    """Five-point stencil abscissae ``(m, 5)`` and steps for the given derivative order."""
    root = 5.0 if derivative == 1 else 6.0
    h = EPS ** (1.0 / root) * _local_scale(spec, x)
    return x[:, None] + h[:, None] * _OFFSETS[None, :], h


def fd_first(values: np.ndarray, h: np.ndarray) -> np.ndarray:
    return values @ _W1 / h


def fd_second(values: np.ndarray, h: np.ndarray) -> np.ndarray:
    return values @ _W2 / (h * h)


# ---------------------------------------------------------------------------
# individual identities


def _points(spec: FamilySpec, grid) -> np.ndarray:
    if grid is None:
        return spec.default_grid.points()
    if isinstance(grid, GridSpec):
        return grid.points()
    return np.sort(np.asarray(grid, dtype=float).ravel())


def _check_classical(identity, spec, n, xs, tol):
    fam = spec.family
    vals, d1, d2 = classical_sequence(fam, n + 1, xs)
    if identity == "ClassicalODE":
        terms = [spec.p(xs) * d2[n], spec.q(xs) * d1[n], spec.r(n, xs) * vals[n]]
        res = sum(terms)
    elif identity == "LadderRaise":
        terms = [spec.sqrt_p(xs) * d1[n], spec.a_plus(n, xs) * vals[n], spec.raise_coeff(n) * vals[n + 1]]
        res = terms[0] + terms[1] - terms[2]
    else:
        terms = [spec.sqrt_p(xs) * d1[n + 1], spec.a_minus(n, xs) * vals[n + 1], spec.lower_coeff(n) * vals[n]]
        res = terms[0] + terms[1] - terms[2]
    a, r, s = _relative(res, terms)
    return _report(identity, fam, n, None, a, r, s, tol)


def _check_delta(spec, n, xs, tol):
    pts, h = stencil(spec, xs, 1)
    fd = fd_first(spec.delta(n, pts), h)
    dp = spec.delta_prime(n, xs)
    pointwise = np.abs(fd - dp) / (1.0 + np.abs(dp))
    return _report(
        "DeltaConsistency", spec.family, n, None, np.max(np.abs(fd - dp)), np.max(pointwise), 1.0 + np.max(np.abs(dp)), tol, "fd"
    )


def _check_bound(spec, n, tol):
    closed = spec.gamma_rule.boundary(n)
    quad = spec.full_integral(n)
    diff = abs(quad - closed)
    return _report(
        "GammaBoundQuadrature", spec.family, n, None, diff, diff / abs(closed), abs(closed), tol,
        "quadrature", {"closed_form": closed, "quadrature": quad},
    )


def _check_riccati(ctx, xs, tol):
    spec, n = ctx.spec, ctx.n
    pts, h = stencil(spec, xs, 1)
    b_st, _ = dfm.eval_b(ctx, pts.ravel(), np.repeat(xs, 5))
    db = fd_first(b_st.reshape(pts.shape), h)
    b = b_st.reshape(pts.shape)[:, 2]
    terms = [spec.sqrt_p(xs) * db, b * b, b * (spec.a_plus(n, xs) - spec.a_minus(n, xs))]
    res = terms[0] - terms[1] - terms[2]
    a, r, s = _relative(res, terms)
    return _report("RiccatiB", spec.family, n, ctx.gamma, a, r, s, tol, "fd")


def _op_terms(spec, coeff: Jet, f: Jet, x):
    """The two pieces ``sqrt(P) f'`` and ``coeff f`` of a first-order operator, as jets."""
    order = f.order - 1
    xj = Jet.variable(x, order)
    return spec.sqrt_p(xj) * f.deriv(), coeff.truncate(order) * f.truncate(order)


def _compose(spec, coeffs, f: Jet, x):
    """Apply first-order operators right to left; also return every term's values."""
    terms = []
    for c in coeffs:
        t1, t2 = _op_terms(spec, c, f, x)
        terms += [t1.value, t2.value]
        f = t1 + t2
    return f, terms


def _check_factorization(ctx, xs, tol):
    spec, n = ctx.spec, ctx.n
    psi = dfm.classical_jets(spec, n, xs, 2)[n]
    xj = Jet.variable(xs, 1)
    b = dfm.b_jet(ctx, xs, 1)
    bb, t_b = _compose(spec, [spec.a_plus(n, xj) + b, spec.a_minus(n, xj) - b], psi, xs)
    aa, t_a = _compose(spec, [spec.a_plus(n, xj), spec.a_minus(n, xj)], psi, xs)
    k_psi = ctx.k * psi.value
    res = bb.value - aa.value
    a, r, s = _relative(res, t_b + t_a + [k_psi])
    detail = {"max_dev_from_K_psi": float(np.max(np.abs(bb.value - k_psi)))}
    return _report("FactorizationBB", spec.family, n, ctx.gamma, a, r, s, tol, "analytic", detail)


def _check_eigenvalue(ctx, xs, tol):
    spec, n = ctx.spec, ctx.n
    pt = dfm.psi_tilde_jet(ctx, xs, 2)
    xj = Jet.variable(xs, 1)
    b = dfm.b_jet(ctx, xs, 1)
    out, terms = _compose(spec, [spec.a_minus(n, xj) - b, spec.a_plus(n, xj) + b], pt, xs)
    k_pt = ctx.k * pt.value
    a, r, s = _relative(out.value - k_pt, terms + [k_pt])
    return _report("EigenvalueBB", spec.family, n, ctx.gamma, a, r, s, tol)


def _check_annihilation(ctx, xs, tol, method):
    spec, n = ctx.spec, ctx.n
    if method == "analytic":
        ev = dfm.eval_psi_tilde(ctx, xs)
        terms = dfm.l_tilde_terms(ctx, ev, xs)
    elif method == "fd":
        p1, h1 = stencil(spec, xs, 1)
        p2, h2 = stencil(spec, xs, 2)
        e1 = dfm.eval_psi_tilde(ctx, p1.ravel(), np.repeat(xs, 5))
        e2 = dfm.eval_psi_tilde(ctx, p2.ravel(), np.repeat(xs, 5))
        v = e2.psi_tilde.reshape(p2.shape)[:, 2]
        d1 = fd_first(e1.psi_tilde.reshape(p1.shape), h1)
        d2 = fd_second(e2.psi_tilde.reshape(p2.shape), h2)
        db = fd_first(e1.b.reshape(p1.shape), h1)
        terms = [spec.p(xs) * d2, spec.q(xs) * d1, spec.r(n + 1, xs) * v, -2.0 * spec.sqrt_p(xs) * db * v]
    else:
        raise ParameterError(f"unknown method {method!r}; use 'analytic' or 'fd'")
    a, r, s = _relative(sum(terms), terms)
    return _report("AnnihilationLtilde", spec.family, n, ctx.gamma, a, r, s, tol, method)


def _check_limit(spec, n, xs, tol):
    rho = spec.raise_coeff(n)
    vals, _, _ = classical_sequence(spec.family, n + 1, xs)
    limit = rho * vals[n + 1]
    gammas = spec.gamma_rule.limit_sequence(n)
    grid = GridSpec(float(xs[0]), float(xs[-1]), xs.size)
    products = []
    devs = []
    for g in gammas:
        ctx = dfm.make_context(spec, n, g, grid)
        dev = float(np.max(np.abs(dfm.eval_psi_tilde(ctx, xs).psi_tilde - limit)))
        devs.append(dev)
        products.append(abs(g) * dev)
    ratio = max(products) / min(products) if min(products) > 0 else math.inf
    detail = {"gammas": gammas, "deviations": devs, "gamma_times_deviation": products}
    return _report("LimitGammaInf", spec.family, n, None, ratio - 1.0, ratio - 1.0, 1.0, tol, "scaling", detail)


def _check_bessel_closed(ctx, xs, tol):
    n, gamma = ctx.n, ctx.gamma
    closed = ctx.spec.closed_form_b(n, gamma, xs)
    g_prime = gamma / (2 * n)
    tail = np.array([quadrature.integrate_to_infinity(lambda y: y ** (-(2.0 * n + 1)), x).value for x in xs])
    integral_form = xs ** (-(2.0 * n + 1)) / (g_prime + tail)
    diff = np.abs(closed - integral_form)
    rel = np.max(diff / np.abs(closed))
    return _report("BesselClosedForm", ctx.spec.family, n, gamma, np.max(diff), rel, float(np.max(np.abs(closed))), tol, "quadrature")


def _check_bessel_zero(spec, n, xs, tol):
    ctx = dfm.make_context(spec, n, 0.0, GridSpec(float(xs[0]), float(xs[-1]), xs.size))
    ev = dfm.eval_psi_tilde(ctx, xs)
    vals, _, _ = classical_sequence(spec.family, n + 1, xs)
    fn_err = np.max(np.abs(ev.psi_tilde - vals[n - 1]))
    r_tilde = spec.r(n + 1, xs) - 2.0 * spec.sqrt_p(xs) * ev.db
    r_low = spec.r(n - 1, xs)
    coef_scale = np.maximum.reduce([np.abs(spec.r(n + 1, xs)), np.abs(2.0 * ev.db), np.abs(r_low)])
    coef_err = np.max(np.abs(r_tilde - r_low) / coef_scale)
    detail = {"psi_tilde_minus_J_n_minus_1": float(fn_err), "coefficient_rel_mismatch": float(coef_err)}
    worst = max(fn_err, coef_err)
    return _report("BesselGammaZero", spec.family, n, 0.0, worst, worst, 1.0, tol, "analytic", detail)


def _check_c(identity, spec, m, gamma, xs, tol):
    direction = dfm.PLUS if identity == "CLadderPlus" else dfm.MINUS
    chain = dfm.DeformationChain(spec, gamma, GridSpec(float(xs[0]), float(xs[-1]), xs.size))
    f = chain.psi_tilde_jet(m, xs, 3)
    out = dfm.apply_C(chain, direction, m, f, xs)
    target = chain.psi_tilde_jet(m + 1 if direction == dfm.PLUS else m - 1, xs, 0).value
    mask = np.abs(target) > 1e-3 * np.max(np.abs(target))
    ratios = out[mask] / target[mask]
    c = float(np.median(ratios))
    spread = float(np.max(ratios) - np.min(ratios))
    rel = spread / abs(c) if c != 0 else math.inf
    detail = {"measured_ratio": c, "expected_ratio": dfm.c_scalar(spec, direction, m)}
    return _report(identity, spec.family, m, gamma, float(np.max(np.abs(out - c * target))), rel, abs(c), tol, "ratio", detail)


def _c_admissible_gamma(spec: FamilySpec, identity: str, m: int, gamma: float) -> bool:
    lo = m - 1 if identity == "CLadderPlus" else m - 2
    return all(gamma_admissible(spec, k, gamma) for k in range(lo, m + 1))


def run_identity(
    identity: str,
    family: Family,
    n: int,
    gamma: float | None = None,
    grid=None,
    tol: float | None = None,
    method: str = "analytic",
) -> ResidualReport:
    """Evaluate one identity for ``(family, n[, gamma])`` over ``grid``.

    ``grid`` is a :class:`GridSpec`, an array of abscissae, or ``None`` for the
    family default. For the C identities ``n`` is the index of the deformed
    eigenfunction acted on. Raises :class:`NotApplicable` when the identity
    does not apply and :class:`InadmissibleGamma` for a bad gamma.
    """
    if identity not in IDENTITIES:
        raise ParameterError(f"unknown identity {identity!r}")
    if int(n) != n or n < 0:
        raise ParameterError("n must be a non-negative integer")
    n = int(n)
    spec = spec_for(family)
    tol = default_tolerance(identity, method) if tol is None else float(tol)
    bessel = family.kind == "bessel"
    reason = _inapplicable(identity, family, n)
    if reason:
        raise NotApplicable(reason)
    if identity == "LimitGammaInf" and bessel and grid is None:
        grid = GridSpec(1.0, 10.0, 400)
    xs = _points(spec, grid)

    if identity in ("ClassicalODE", "LadderRaise", "LadderLower"):
        return _check_classical(identity, spec, n, xs, tol)
    if identity == "DeltaConsistency":
        return _check_delta(spec, n, xs, tol)
    if identity == "GammaBoundQuadrature":
        return _check_bound(spec, n, tol)
    if identity == "LimitGammaInf":
        return _check_limit(spec, n, xs, tol)
    if identity == "BesselGammaZero":
        return _check_bessel_zero(spec, n, xs, tol)

    if gamma is None:
        raise ParameterError(f"{identity} needs a gamma value")
    gamma = float(gamma)
    if identity in ("CLadderPlus", "CLadderMinus"):
        if not _c_admissible_gamma(spec, identity, n, gamma):
            raise InadmissibleGamma(f"gamma={gamma!r} is not admissible for every index {identity} couples")
        return _check_c(identity, spec, n, gamma, xs, tol)
    ctx_grid = grid if isinstance(grid, GridSpec) else GridSpec(float(xs[0]), float(xs[-1]), xs.size)
    ctx = dfm.make_context(spec, n, gamma, ctx_grid)
    if identity == "RiccatiB":
        return _check_riccati(ctx, xs, tol)
    if identity == "FactorizationBB":
        return _check_factorization(ctx, xs, tol)
    if identity == "EigenvalueBB":
        return _check_eigenvalue(ctx, xs, tol)
    if identity == "AnnihilationLtilde":
        return _check_annihilation(ctx, xs, tol, method)
    return _check_bessel_closed(ctx, xs, tol)


def _inapplicable(identity: str, family: Family, n: int) -> str:
    bessel = family.kind == "bessel"
    if identity in ("BesselClosedForm", "BesselGammaZero"):
        if not bessel:
            return f"{identity} concerns the Bessel family only"
        if n == 0:
            return "at n = 0 the Bessel deformation vanishes identically"
    if identity == "GammaBoundQuadrature" and bessel:
        return "the Bessel denominator integral diverges at x = 0; gamma >= 0 has no finite boundary"
    if identity == "LimitGammaInf" and bessel and n == 0:
        return "at n = 0 the Bessel deformation vanishes identically"
    if identity == "CLadderPlus":
        if n < 1:
            return "deformed eigenfunctions start at index 1"
        if family.kind == "chebyshev" and n == 1:
            return "raise_coeff(0) = 0 for Chebyshev, so C+ annihilates psi~_1"
    if identity == "CLadderMinus" and n < 2:
        return "C- would map psi~_1 to the nonexistent psi~_0"
    return ""


def _suite_gammas(spec: FamilySpec, identity: str, n: int, count: int) -> list[float]:
    if identity in ("CLadderPlus", "CLadderMinus"):
        lo = n - 1 if identity == "CLadderPlus" else n - 2
        columns = [spec.gamma_rule.samples(k, count) for k in range(max(lo, 0), n + 1)]
        return [max(col, key=abs) for col in zip(*columns)]
    return spec.gamma_rule.samples(n, count)


def _cells(families, n_max, gammas_per_family, seed):
    rng = np.random.default_rng(seed)
    cells = []
    for fam in families:
        spec = spec_for(fam)
        g = spec.default_grid
        random_points = np.sort(rng.uniform(g.lo, g.hi, 100))
        for n in range(n_max + 1):
            for identity in IDENTITIES:
                methods = ("analytic", "fd") if identity == "AnnihilationLtilde" else ("analytic",)
                for method in methods:
                    grid = random_points if identity in ("ClassicalODE", "LadderRaise", "LadderLower", "DeltaConsistency") else None
                    if identity in GAMMA_IDENTITIES and not _inapplicable(identity, fam, n):
                        for gamma in _suite_gammas(spec, identity, n, gammas_per_family):
                            cells.append((identity, fam, n, gamma, grid, method))
                    else:
                        cells.append((identity, fam, n, None, grid, method))
    return cells


def _run_cell(cell) -> ResidualReport:
    identity, fam, n, gamma, grid, method = cell
    tol = default_tolerance(identity, method)
    try:
        return run_identity(identity, fam, n, gamma, grid, tol, method)
    except NotApplicable as exc:
        return _not_applicable(identity, fam, n, gamma, str(exc), tol, method)
    except (IsospecError, ArithmeticError, ValueError) as exc:
        return ResidualReport(
            identity, fam, n, gamma, math.inf, math.inf, 1.0, False, tol, method, "error", f"{type(exc).__name__}: {exc}"
        )


def run_suite(
    families,
    n_max: int,
    gammas_per_family: int = 3,
    seed: int = 42,
    workers: int = 1,
) -> list[ResidualReport]:
    """Every identity for every family, ``n <= n_max`` and sampled admissible gammas.

    Failures are reported, never raised. Reports come back in a canonical
    order, so the result does not depend on ``workers``.
    """
    if n_max < 1:
        raise ParameterError("n_max must be at least 1")
    cells = _cells(list(families), int(n_max), int(gammas_per_family), seed)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(_run_cell, cells))
    else:
        reports = [_run_cell(c) for c in cells]
    return sorted(reports, key=lambda r: r.sort_key)


def summarize(reports) -> dict:
    status = {"run": 0, "not_applicable": 0, "error": 0}
    for r in reports:
        status[r.status] += 1
    failed = sum(1 for r in reports if not r.passed)
    return {"total": len(reports), "failed": failed, "passed": len(reports) - failed, **status}
