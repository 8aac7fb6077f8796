import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import special

from isospec.classical import Family, classical_sequence, eval_classical
from isospec.errors import DomainError, ParameterError
from isospec.families import spec_for

ALL = [
    Family.hermite(),
    Family.laguerre(0.0),
    Family.laguerre(0.5),
    Family.legendre(),
    Family.chebyshev(),
    Family.jacobi_function(1.5, 1.25),
    Family.jacobi_polynomial(0.0, 0.0),
    Family.jacobi_polynomial(0.5, -0.25),
    Family.bessel(),
]

SAMPLE_RANGES = {
    "hermite": (-4.0, 4.0),
    "laguerre": (0.05, 15.0),
    "legendre": (-0.999, 0.999),
    "chebyshev": (-0.999, 0.999),
    "jacobi_function": (0.001, 0.999),
    "jacobi_polynomial": (-0.999, 0.999),
    "bessel": (0.05, 30.0),
}


def scipy_values(family, n, x):
    k = family.kind
    if k == "hermite":
        return special.eval_hermite(n, x)
    if k == "laguerre":
        return special.eval_genlaguerre(n, family.alpha, x)
    if k == "legendre":
        return special.eval_legendre(n, x)
    if k == "chebyshev":
        return special.eval_chebyt(n, x)
    if k == "jacobi_polynomial":
        return special.eval_jacobi(n, family.alpha, family.beta, x)
    if k == "jacobi_function":
        return special.hyp2f1(-n, n + family.alpha, family.lam, x)
    return special.jv(n, x)


@pytest.mark.parametrize("family", ALL, ids=lambda f: f.label)
def test_values_match_scipy(family):
    lo, hi = SAMPLE_RANGES[family.kind]
    x = np.linspace(lo, hi, 97)
    vals, _, _ = classical_sequence(family, 10, x)
    for n in range(11):
        want = scipy_values(family, n, x)
        scale = np.max(np.abs(want))
        np.testing.assert_allclose(vals[n], want, rtol=0, atol=1e-13 * max(scale, 1.0))


def test_bessel_high_order_accuracy():
    # decision point must keep <= 1e-12 accuracy up to n = 20
    x = np.concatenate([np.geomspace(1e-3, 1.99, 40), np.linspace(2.0, 50.0, 200)])
    vals, _, _ = classical_sequence(Family.bessel(), 20, x)
    for n in range(21):
        np.testing.assert_allclose(vals[n], special.jv(n, x), rtol=0, atol=1e-12)


def test_hermite_example():
    ev = eval_classical(Family.hermite(), 1, 0.5)
    assert ev.value == 1.0
    assert ev.d1 == 2.0


@given(x=st.floats(-1.0, 1.0))
def test_legendre_zero_is_one(x):
    ev = eval_classical(Family.legendre(), 0, x)
    assert ev.value == 1.0 and ev.d1 == 0.0


def _series_j0(x: float) -> float:
    # independent oracle: ascending series with exact rational coefficients
    total, term, k = 0.0, 1.0, 0
    while abs(term) > 1e-18:
        total += term
        k += 1
        term *= -(x * x / 4.0) / (k * k)
    return total


def test_first_bessel_zero():
    lo, hi = 2.0, 3.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if _series_j0(lo) * _series_j0(mid) <= 0:
            hi = mid
        else:
            lo = mid
    assert abs(0.5 * (lo + hi) - 2.404825557695773) < 1e-12
    assert abs(eval_classical(Family.bessel(), 0, 2.404825557695773).value) < 1e-9


@st.composite
def family_point(draw, nmax=10):
    fam = draw(st.sampled_from(ALL))
    lo, hi = SAMPLE_RANGES[fam.kind]
    x = draw(st.floats(lo, hi))
    n = draw(st.integers(0, nmax))
    return fam, n, x


@given(family_point())
def test_ode_residual_property(args):
    fam, n, x = args
    spec = spec_for(fam)
    ev = eval_classical(fam, n, x)
    terms = [spec.p(x) * ev.d2, spec.q(x) * ev.d1, spec.r(n, x) * ev.value]
    scale = max(abs(t) for t in terms)
    assert abs(sum(terms)) <= 1e-10 * scale + 1e-300


@pytest.mark.parametrize("family", ALL, ids=lambda f: f.label)
def test_ode_residual_random_points(family):
    rng = np.random.default_rng(7)
    lo, hi = SAMPLE_RANGES[family.kind]
    x = rng.uniform(lo, hi, 100)
    spec = spec_for(family)
    vals, d1, d2 = classical_sequence(family, 10, x)
    for n in range(11):
        terms = [spec.p(x) * d2[n], spec.q(x) * d1[n], spec.r(n, x) * vals[n]]
        scale = max(np.max(np.abs(t)) for t in terms)
        assert np.max(np.abs(sum(terms))) <= 1e-10 * scale


@given(family_point(nmax=8))
def test_d1_matches_central_difference(args):
    fam, n, x = args
    h = 1e-5
    lo, hi = SAMPLE_RANGES[fam.kind]
    x = min(max(x, lo + 2 * h), hi - 2 * h)
    ev = eval_classical(fam, n, x)
    fd = (eval_classical(fam, n, x + h).value - eval_classical(fam, n, x - h).value) / (2 * h)
    scale = max(abs(ev.d1), abs(ev.value), 1e-300)
    assert abs(fd - ev.d1) <= 1e-6 * scale


def test_polynomials_evaluate_on_closed_interval():
    ev = eval_classical(Family.legendre(), 3, 1.0)
    assert ev.value == pytest.approx(1.0)
    assert ev.d1 == pytest.approx(6.0)


def test_vector_input_keeps_shape():
    x = np.linspace(-1, 1, 6).reshape(2, 3)
    ev = eval_classical(Family.chebyshev(), 2, x)
    assert ev.value.shape == (2, 3)


@pytest.mark.parametrize(
    "family, x",
    [
        (Family.laguerre(0.0), -0.1),
        (Family.legendre(), 1.5),
        (Family.jacobi_function(), 1.2),
        (Family.bessel(), 0.0),
        (Family.bessel(), 2e4),
        (Family.hermite(), math.inf),
    ],
)
def test_domain_errors(family, x):
    with pytest.raises(DomainError):
        eval_classical(family, 2, x)


@pytest.mark.parametrize(
    "build",
    [
        lambda: Family.laguerre(-1.0),
        lambda: Family.jacobi_polynomial(-1.5, 0.0),
        lambda: Family.jacobi_function(1.0, 0.0),
        lambda: Family("nonsense"),
        lambda: Family.hermite().__class__("laguerre", alpha=math.nan),
    ],
)
def test_parameter_errors(build):
    with pytest.raises(ParameterError):
        build()


def test_negative_index_rejected():
    with pytest.raises(ParameterError):
        eval_classical(Family.hermite(), -1, 0.0)


def test_parse_aliases_and_defaults():
    assert Family.parse("jacobi-function") == Family.jacobi_function(1.5, 1.25)
    assert Family.parse("jacobi", alpha=0.5, beta=-0.25) == Family.jacobi_polynomial(0.5, -0.25)
    # unused parameters are dropped so equality is structural
    assert Family("hermite", alpha=3.0) == Family.hermite()
