import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import special

from isospec import deformation as dfm
from isospec import families
from isospec.classical import Family, classical_sequence, eval_classical
from isospec.errors import DenominatorVanishes, DomainError, InadmissibleGamma
from isospec.families import GammaBound, default_families, spec_for
from isospec.grid import GridSpec
from isospec.verify import fd_first, stencil

HERMITE_INT_0_1 = 0.7468241328124271  # int_0^1 exp(-y^2), erf series oracle


def test_context_hermite_d0():
    ctx = dfm.make_context(Family.hermite(), 0, 2.0, GridSpec(-4, 4, 400))
    assert ctx.denom(0.0) == 2.0


def test_chebyshev_gamma_3_inadmissible():
    with pytest.raises(InadmissibleGamma):
        dfm.make_context(Family.chebyshev(), 1, 3.0)


def test_bessel_gamma_zero_is_valid():
    ctx = dfm.make_context(Family.bessel(), 1, 0.0, GridSpec(0.01, 10, 100))
    b, _ = dfm.eval_b(ctx, 2.0)
    assert b == pytest.approx(1.0)  # 2n / x


def test_eval_b_examples():
    ctx = dfm.make_context(Family.hermite(), 0, 2.0)
    b0, db0 = dfm.eval_b(ctx, 0.0)
    assert b0 == 0.5
    assert db0 == 0.25  # Riccati: b' = b^2 - 2x b
    b1, _ = dfm.eval_b(ctx, 1.0)
    assert b1 == pytest.approx(math.exp(-1) / (2 - HERMITE_INT_0_1), rel=1e-9)
    assert b1 == pytest.approx(0.2935577126912, rel=1e-12)


@pytest.mark.parametrize("gamma", [0.0, 1.0, 10.0])
def test_bessel_n0_b_vanishes(gamma):
    ctx = dfm.make_context(Family.bessel(), 0, gamma)
    b, db = dfm.eval_b(ctx, np.linspace(0.1, 9, 13))
    assert np.all(b == 0) and np.all(db == 0)


def test_psi_tilde_examples():
    far = dfm.make_context(Family.hermite(), 0, 1e6)
    assert dfm.eval_psi_tilde(far, 1.0).psi_tilde == pytest.approx(-2.0, abs=2e-6)
    bes = dfm.make_context(Family.bessel(), 2, 0.0)
    assert dfm.eval_psi_tilde(bes, 3.0).psi_tilde == pytest.approx(special.jv(1, 3.0), abs=1e-9)
    assert special.jv(1, 3.0) == pytest.approx(0.339059, abs=1e-6)
    leg = dfm.make_context(Family.legendre(), 1, 3.0)
    # sign convention: raise_coeff = -2, P2(0) = -1/2, P1(0) = 0
    assert dfm.eval_psi_tilde(leg, 0.0).psi_tilde == pytest.approx(1.0, abs=1e-9)


def test_l_tilde_linear_and_annihilates():
    ctx = dfm.make_context(Family.hermite(), 0, 2.0)
    assert dfm.apply_L_tilde(ctx, (0.0, 0.0, 0.0), 0.4) == 0.0
    x = np.array([0.7])
    ev = dfm.eval_psi_tilde(ctx, x)
    terms = dfm.l_tilde_terms(ctx, ev, x)
    scale = max(float(np.max(np.abs(t))) for t in terms)
    assert np.max(np.abs(dfm.apply_L_tilde(ctx, ev, x))) <= 1e-8 * scale


def test_bessel_gamma_zero_annihilates_j1():
    ctx = dfm.make_context(Family.bessel(), 2, 0.0)
    j1 = eval_classical(Family.bessel(), 1, 5.0)
    scale = max(abs(j1.d2), abs(j1.d1 / 5), abs(j1.value))
    assert abs(dfm.apply_L_tilde(ctx, j1, 5.0)) <= 1e-9 * scale


def test_apply_b_plus_on_h0_is_psi_tilde():
    ctx = dfm.make_context(Family.hermite(), 0, 2.0)
    x = np.linspace(-3, 3, 25)
    got = dfm.apply_B(ctx, dfm.PLUS, (np.ones_like(x), np.zeros_like(x)), x)
    np.testing.assert_allclose(got, dfm.eval_psi_tilde(ctx, x).psi_tilde, rtol=1e-15, atol=1e-15)


@pytest.mark.parametrize("family", default_families(), ids=lambda f: f.kind)
def test_b_minus_b_plus_is_k(family):
    s = spec_for(family)
    for n in (0, 2):
        ctx = dfm.make_context(family, n, s.gamma_rule.samples(n)[1])
        x = ctx.x_grid()[5:-5:7]
        psi = dfm.classical_jets(s, n, x, 2)[n]
        out = dfm.apply_B(ctx, dfm.MINUS, dfm.apply_B(ctx, dfm.PLUS, psi, x), x).value
        kpsi = ctx.k * psi.value
        assert np.max(np.abs(out - kpsi)) <= 1e-8 * max(np.max(np.abs(kpsi)), np.max(np.abs(out)), 1.0)


def test_apply_b_rejects_direction():
    ctx = dfm.make_context(Family.hermite(), 0, 2.0)
    with pytest.raises(ValueError):
        dfm.apply_B(ctx, "sideways", (1.0, 0.0), 0.0)


def _ratio_spread(out, target):
    mask = np.abs(target) > 1e-3 * np.max(np.abs(target))
    r = out[mask] / target[mask]
    return (r.max() - r.min()) / abs(np.median(r)), np.median(r)


def test_c_plus_hermite_example():
    chain = dfm.DeformationChain(Family.hermite(), 2.0)
    x = chain.grid.points()
    ev = dfm.eval_psi_tilde(chain.context(0), x)  # psi~_1 as a triple
    out = dfm.apply_C(chain, dfm.PLUS, 1, ev, x)
    spread, ratio = _ratio_spread(out, dfm.eval_psi_tilde(chain.context(1), x).psi_tilde)
    assert spread <= 1e-6
    assert ratio == pytest.approx(dfm.c_scalar(chain.spec, dfm.PLUS, 1), rel=1e-9)


def test_c_minus_legendre_example():
    chain = dfm.DeformationChain(Family.legendre(), 5.0)
    x = chain.grid.points()
    out = dfm.apply_C(chain, dfm.MINUS, 2, chain.psi_tilde_jet(2, x), x)
    spread, ratio = _ratio_spread(out, chain.psi_tilde_jet(1, x, 0).value)
    assert spread <= 1e-6
    assert ratio == pytest.approx(dfm.c_scalar(chain.spec, dfm.MINUS, 2), rel=1e-9)


@pytest.mark.parametrize("family", default_families(), ids=lambda f: f.kind)
def test_c_minus_undefined_below_two(family):
    chain = dfm.DeformationChain(family, spec_for(family).gamma_rule.samples(0)[2])
    x = chain.grid.points()[10:20]
    f = chain.psi_tilde_jet(1, x)
    with pytest.raises(IndexError):
        dfm.apply_C(chain, dfm.MINUS, 1, f, x)
    with pytest.raises(IndexError):
        dfm.apply_C(chain, dfm.PLUS, 0, f, x)
    with pytest.raises(IndexError):
        chain.psi_tilde_jet(0, x)


def test_chebyshev_c_plus_on_first_vanishes():
    chain = dfm.DeformationChain(Family.chebyshev(), 5.0)
    x = chain.grid.points()
    out = dfm.apply_C(chain, dfm.PLUS, 1, chain.psi_tilde_jet(1, x), x)
    assert np.max(np.abs(out)) <= 1e-12 * np.max(np.abs(chain.psi_tilde_jet(2, x, 0).value))


@pytest.mark.parametrize("family", default_families(), ids=lambda f: f.kind)
def test_riccati_residual_fd(family):
    s = spec_for(family)
    for n in range(0, 7, 3):
        for gamma in s.gamma_rule.samples(n):
            ctx = dfm.make_context(family, n, gamma)
            x = ctx.x_grid()[::8]
            pts, h = stencil(s, x, 1)
            b_st, _ = dfm.eval_b(ctx, pts.ravel(), np.repeat(x, 5))
            b_st = b_st.reshape(pts.shape)
            db = fd_first(b_st, h)
            b = b_st[:, 2]
            terms = [s.sqrt_p(x) * db, b * b, b * (s.a_plus(n, x) - s.a_minus(n, x))]
            res = terms[0] - terms[1] - terms[2]
            assert np.max(np.abs(res)) <= 1e-6 * max(np.max(np.abs(t)) for t in terms)


@st.composite
def admissible_case(draw):
    fam = draw(st.sampled_from(default_families()))
    s = spec_for(fam)
    n = draw(st.integers(0, 6))
    factor = draw(st.floats(1.05, 50.0))
    sign = draw(st.sampled_from([1.0, -1.0]))
    rule = s.gamma_rule
    if rule.kind == families.NON_NEGATIVE:
        gamma = factor - 1.05
    elif rule.kind == families.LESS_THAN:
        gamma = -factor * rule.boundary(n)
    elif rule.kind == families.ABS_GREATER_THAN:
        gamma = sign * factor * rule.threshold(n)
    else:
        gamma = factor * rule.threshold(n)
    g = s.default_grid
    x = draw(st.floats(g.lo, g.hi))
    return fam, n, gamma, x


@given(admissible_case())
def test_annihilation_property(case):
    fam, n, gamma, x = case
    ctx = dfm.make_context(fam, n, gamma)
    ev = dfm.eval_psi_tilde(ctx, np.array([x]))
    terms = dfm.l_tilde_terms(ctx, ev, np.array([x]))
    scale = max(float(np.max(np.abs(t))) for t in terms)
    assert abs(float(sum(terms)[0])) <= 1e-8 * scale + 1e-300


@given(admissible_case())
def test_eval_b_off_grid_matches_integral(case):
    fam, n, gamma, x = case
    s = spec_for(fam)
    if s.closed_form_b is not None:
        return
    ctx = dfm.make_context(fam, n, gamma, GridSpec(s.default_grid.lo, s.default_grid.hi, 11))
    b, _ = dfm.eval_b(ctx, x)
    from isospec.quadrature import integrate

    lo, hi = sorted((s.x0, x))
    sing = (s.x0_singular(n) and lo == s.x0, s.x0_singular(n) and hi == s.x0)
    integral = integrate(lambda y: s.denom_integrand(n, y), lo, hi, 1e-13, 0.0, singular=sing).value
    integral = integral if x >= s.x0 else -integral
    assert b == pytest.approx(float(s.exp_delta(n, x)) / (gamma - integral), rel=1e-9)


@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("gamma", [0.0, 1.0, 10.0])
def test_bessel_closed_form_matches_integral(n, gamma):
    s = spec_for(Family.bessel())
    x = np.linspace(0.05, 10, 60)
    from isospec.quadrature import integrate_to_infinity

    tail = np.array([integrate_to_infinity(lambda y: y ** (-(2.0 * n + 1)), xi).value for xi in x])
    integral_b = x ** (-(2.0 * n + 1)) / (gamma / (2 * n) + tail)
    np.testing.assert_allclose(s.closed_form_b(n, gamma, x), integral_b, rtol=1e-8)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_bessel_gamma_zero_reduces(n):
    ctx = dfm.make_context(Family.bessel(), n, 0.0, GridSpec(0.5, 10, 200))
    x = ctx.x_grid()
    ev = dfm.eval_psi_tilde(ctx, x)
    np.testing.assert_allclose(ev.psi_tilde, special.jv(n - 1, x), rtol=0, atol=1e-9)
    s = ctx.spec
    np.testing.assert_allclose(s.r(n + 1, x) - 2 * s.sqrt_p(x) * ev.db, s.r(n - 1, x), rtol=1e-10)


def test_gamma_to_infinity_scaling():
    devs = []
    x = np.linspace(-4, 4, 200)
    limit = -classical_sequence(Family.hermite(), 2, x)[0][2]
    for g in (1e2, 1e3, 1e4):
        ctx = dfm.make_context(Family.hermite(), 1, g)
        devs.append(g * np.max(np.abs(dfm.eval_psi_tilde(ctx, x).psi_tilde - limit)))
    assert max(devs) / min(devs) <= 2.0


def test_tabulate_columns():
    table = dfm.tabulate(Family.hermite(), 0, 2.0, GridSpec(-4, 4, 9))
    assert set(table.columns()) >= {"x", "psi_n", "psi_np1", "b", "psi_tilde", "db"}
    assert table.b[4] == 0.5
    classical = dfm.tabulate(Family.hermite(), 0, None, GridSpec(-4, 4, 9))
    assert classical.b is None


def test_grid_outside_domain():
    with pytest.raises(DomainError):
        dfm.make_context(Family.legendre(), 1, 3.0, GridSpec(-1.0, 1.0, 10))
    ctx = dfm.make_context(Family.laguerre(0.0), 1, -10.0)
    with pytest.raises(DomainError):
        dfm.eval_b(ctx, -1.0)


def test_denominator_vanishes_when_bound_is_wrong(monkeypatch):
    # a deliberately wrong bound slips past the rule; the grid check catches it
    s = spec_for(Family.hermite())
    wrong = replace(s, gamma_rule=GammaBound(families.ABS_GREATER_THAN, lambda n: 0.1, lambda n: 0.1))
    monkeypatch.setattr(families, "_numerically_admissible", lambda *a: True)
    with pytest.raises(DenominatorVanishes):
        dfm.make_context(wrong, 0, 0.5)


def test_non_integer_n_rejected():
    with pytest.raises(ValueError):
        dfm.make_context(Family.hermite(), 1.5, 2.0)
