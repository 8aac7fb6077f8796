import json
import math

import numpy as np
import pytest

from isospec import verify
from isospec.classical import Family
from isospec.errors import InadmissibleGamma, NotApplicable, ParameterError
from isospec.families import default_families
from isospec.grid import GridSpec
from isospec.verify import IDENTITIES, run_identity, run_suite, summarize


def test_identity_names():
    assert len(IDENTITIES) == 14
    assert set(verify.DEFAULT_TOLERANCES) == set(IDENTITIES)


def test_classical_ode_legendre_example():
    r = run_identity("ClassicalODE", Family.legendre(), 3, grid=GridSpec(-0.99, 0.99, 200))
    assert r.passed and r.status == "run"
    assert r.max_rel_residual <= 1e-10
    assert r.gamma is None


def test_annihilation_fd_example():
    r = run_identity("AnnihilationLtilde", Family.hermite(), 2, 5.0, tol=1e-5, method="fd")
    assert r.passed and r.method == "fd"
    a = run_identity("AnnihilationLtilde", Family.hermite(), 2, 5.0)
    assert a.max_rel_residual <= 1e-8
    assert a.max_rel_residual < r.max_rel_residual


def test_gamma_bound_chebyshev_example():
    r = run_identity("GammaBoundQuadrature", Family.chebyshev(), 0)
    assert r.passed
    assert r.detail["closed_form"] == pytest.approx(math.pi, rel=1e-15)
    assert r.detail["quadrature"] == pytest.approx(math.pi, rel=1e-12)


def test_array_grid_accepted():
    x = np.linspace(-2, 2, 31)
    r = run_identity("RiccatiB", Family.hermite(), 1, 3.0, grid=x)
    assert r.passed


def test_custom_tolerance_can_fail():
    r = run_identity("RiccatiB", Family.hermite(), 1, 3.0, tol=1e-30)
    assert not r.passed and r.tolerance == 1e-30
    assert r.max_rel_residual > 0


@pytest.mark.parametrize(
    "identity, family, n",
    [
        ("BesselClosedForm", Family.hermite(), 2),
        ("BesselGammaZero", Family.bessel(), 0),
        ("GammaBoundQuadrature", Family.bessel(), 1),
        ("CLadderMinus", Family.hermite(), 1),
        ("CLadderPlus", Family.legendre(), 0),
        ("CLadderPlus", Family.chebyshev(), 1),
    ],
)
def test_not_applicable(identity, family, n):
    with pytest.raises(NotApplicable):
        run_identity(identity, family, n, 5.0)


def test_errors():
    with pytest.raises(ParameterError):
        run_identity("NoSuchIdentity", Family.hermite(), 0)
    with pytest.raises(ParameterError):
        run_identity("RiccatiB", Family.hermite(), 0)
    with pytest.raises(ParameterError):
        run_identity("RiccatiB", Family.hermite(), -1, 2.0)
    with pytest.raises(InadmissibleGamma):
        run_identity("RiccatiB", Family.chebyshev(), 1, 3.0)
    with pytest.raises(InadmissibleGamma):
        # gamma = 1.5 clears the n = 1 threshold (1.289) but C+ on psi~_1 also needs n = 0 (1.866)
        run_identity("CLadderPlus", Family.jacobi_polynomial(0.5, -0.25), 1, 1.5)
    assert run_identity("RiccatiB", Family.jacobi_polynomial(0.5, -0.25), 1, 1.5).passed


def test_c_reports_ratio():
    r = run_identity("CLadderPlus", Family.hermite(), 2, 5.0)
    assert r.passed
    assert r.detail["measured_ratio"] == pytest.approx(r.detail["expected_ratio"], rel=1e-8)


def test_empty_suite():
    assert run_suite([], 4) == []


def test_suite_rejects_small_n_max():
    with pytest.raises(ParameterError):
        run_suite(default_families(), 0)


def test_bessel_suite_includes_gamma_zero():
    reports = run_suite([Family.bessel()], 1)
    zero = [r for r in reports if r.identity == "BesselGammaZero"]
    assert any(r.status == "run" and r.n == 1 and r.passed for r in zero)
    assert any(r.status == "not_applicable" and r.n == 0 and r.note for r in zero)
    assert all(r.passed for r in reports)


def test_suite_deterministic_and_worker_independent():
    fams = [Family.hermite(), Family.jacobi_function(1.5, 1.25)]
    a = [r.to_dict() for r in run_suite(fams, 2, seed=7)]
    b = [r.to_dict() for r in run_suite(fams, 2, seed=7, workers=3)]
    assert json.dumps(a) == json.dumps(b)
    c = [r.to_dict() for r in run_suite(fams, 2, seed=8)]
    assert json.dumps(a) != json.dumps(c)


def test_suite_covers_every_identity_and_both_methods():
    reports = run_suite(default_families(), 2)
    assert {r.identity for r in reports} == set(IDENTITIES)
    ann = {r.method for r in reports if r.identity == "AnnihilationLtilde"}
    assert ann == {"analytic", "fd"}
    s = summarize(reports)
    assert s["failed"] == 0 and s["error"] == 0
    assert s["total"] == len(reports) == s["run"] + s["not_applicable"]


def test_to_dict_is_strict_json():
    r = verify.ResidualReport(
        "RiccatiB", Family.laguerre(0.5), 1, -3.0, math.inf, math.nan, 1.0, False, 1e-6, status="error"
    )
    d = r.to_dict()
    text = json.dumps(d, allow_nan=False)
    assert d["max_abs_residual"] is None and d["max_rel_residual"] is None
    assert d["pass"] is False and "passed" not in d
    assert d["family"]["alpha"] == 0.5
    assert json.loads(text)["gamma"] == -3.0


def test_fd_helpers_exact_on_quartic():
    x = np.array([0.3, 1.7, 4.0])
    spec = verify.spec_for(Family.hermite())
    pts, h = verify.stencil(spec, x, 1)
    np.testing.assert_allclose(verify.fd_first(pts**4, h), 4 * x**3, rtol=1e-9)
    pts, h = verify.stencil(spec, x, 2)
    np.testing.assert_allclose(verify.fd_second(pts**4, h), 12 * x**2, rtol=1e-7)


def test_fd_stencil_stays_inside_domain():
    spec = verify.spec_for(Family.legendre())
    x = np.array([-0.999999, 0.0, 0.999999])
    for d in (1, 2):
        pts, _ = verify.stencil(spec, x, d)
        assert np.all(np.abs(pts) < 1)
