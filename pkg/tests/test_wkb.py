import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from schrodheat import wkb
from schrodheat.model import make_params


@pytest.fixture(scope="module")
def p324():
    return make_params(3, 2, 4)


@pytest.fixture(scope="module")
def p322():
    return make_params(3, 2, 2)


def test_golden_coefficients(p324):
    e = wkb.wkb_coefficients(p324, 0.0, 3)
    assert e.coeffs == (-0.375, 0.75, -2.3203125)


def test_zero_expansion_at_lambda_c0(p324):
    e = wkb.wkb_coefficients(p324, p324.derived.c0, 6)
    assert all(c == 0.0 for c in e.coeffs)
    r = np.geomspace(1, 100, 20)
    assert np.all(wkb.v_lambda(e, r, p324) == 0.0)
    assert np.all(wkb.v_integral(e, r, p324) == 0.0)


def test_322_coefficients(p322):
    e = wkb.wkb_coefficients(p322, -2.0, 2)
    assert e.coeffs == (-1.0, 1.0)
    assert wkb.v_lambda(e, 2.0, p322) == pytest.approx(-0.125, rel=1e-14)
    assert wkb.v_integral_limit(e, p322) == pytest.approx(-0.5, rel=1e-14)


def test_default_order(p324):
    k = wkb.default_order(p324)
    d = p324.derived
    assert k * d.xi + 2 - p324.alpha > 0
    assert (k - 1) * d.xi + 2 - p324.alpha > 0  # one safety order on top


@settings(max_examples=50, deadline=None)
@given(
    st.integers(min_value=3, max_value=8),
    st.floats(min_value=2.0, max_value=6.0),
    st.floats(min_value=0.25, max_value=7.0),
    st.floats(min_value=-10.0, max_value=10.0),
    st.integers(min_value=1, max_value=8),
)
def test_recurrence_invariants_random_sweep(N, alpha, dbeta, lam, k):
    p = make_params(N, alpha, alpha - 2.0 + dbeta)
    e = wkb.wkb_coefficients(p, lam, k)
    res = wkb.recurrence_residuals(p, e)
    assert np.all(np.abs(res) < 1e-12)


def test_v_lambda_term_bound(p324):
    e = wkb.wkb_coefficients(p324, -1.0, 4)
    r = np.geomspace(1.0, 50.0, 30)
    bound = sum(abs(c) for c in e.coeffs) * r ** -(p324.derived.xi + 1.0)
    assert np.all(np.abs(wkb.v_lambda(e, r, p324)) <= bound * (1 + 1e-12))


def test_v_lambda_rejects_nonpositive(p324):
    e = wkb.wkb_coefficients(p324, 0.0, 2)
    with pytest.raises(ValueError):
        wkb.v_lambda(e, 0.0, p324)


def test_v_integral_contract(p324):
    e = wkb.wkb_coefficients(p324, 0.0, 3)
    assert wkb.v_integral(e, 1.0, p324) == 0.0
    with pytest.raises(ValueError):
        wkb.v_integral(e, 0.5, p324)
    # numeric limit matches the closed form
    assert wkb.v_integral(e, 1e6, p324) == pytest.approx(
        wkb.v_integral_limit(e, p324), abs=1e-8
    )


def test_phase_integral_sanity_oscillator():
    p = make_params(3, 0, 2, sanity_mode=True)
    assert wkb.phase_integral(p, 0.0, 2.0) == pytest.approx(2.0, rel=1e-10)


def test_phase_integral_closed_form(p322):
    val = wkb.phase_integral(p322, 1.0, 2.0)
    assert val == pytest.approx(math.sqrt(5) - math.sqrt(2), rel=1e-10)
    assert wkb.phase_integral(p322, 1.5, 1.5) == 0.0
    with pytest.raises(ValueError):
        wkb.phase_integral(p322, 2.0, 1.0)


def test_phase_integral_additive(p324):
    a = wkb.phase_integral(p324, 1.0, 3.0)
    b = wkb.phase_integral(p324, 3.0, 7.0)
    c = wkb.phase_integral(p324, 1.0, 7.0)
    assert a + b == pytest.approx(c, rel=1e-9)
    assert a >= 0 and b >= 0


@settings(max_examples=25, deadline=None)
@given(
    st.floats(min_value=2.0, max_value=5.0),
    st.floats(min_value=0.5, max_value=5.0),
    st.floats(min_value=0.0, max_value=2.0),
    st.floats(min_value=0.1, max_value=4.0),
    st.floats(min_value=0.1, max_value=4.0),
)
def test_phase_additivity_property(alpha, dbeta, R, d1, d2):
    p = make_params(3, alpha, alpha - 2.0 + dbeta)
    r1, r2 = R + d1, R + d1 + d2
    a = wkb.phase_integral(p, R, r1)
    b = wkb.phase_integral(p, r1, r2)
    c = wkb.phase_integral(p, R, r2)
    assert a >= 0 and b >= 0
    assert a + b == pytest.approx(c, rel=1e-8, abs=1e-12)


def test_f_eval_at_base_radius(p324):
    e = wkb.wkb_coefficients(p324, 0.0, 3)
    expected = 1.0 ** (-1.0) * (0.5) ** -0.25
    assert wkb.f_eval(p324, e, 1.0) == pytest.approx(expected, rel=1e-10)
    with pytest.raises(ValueError):
        wkb.f_eval(p324, e, 0.9)


def test_f_eval_propagates_quadrature_failure(p324):
    from schrodheat.errors import QuadratureError
    e = wkb.wkb_coefficients(p324, 0.0, 3)
    with pytest.raises(QuadratureError) as exc:
        wkb.f_eval(p324, e, 5.0, rtol=1e-30)
    assert exc.value.details["achieved"] > 0


def test_f_eval_eventually_decreasing(p324):
    e = wkb.wkb_coefficients(p324, 0.0, 3)
    r = np.linspace(2.0, 30.0, 100)
    f = wkb.f_eval(p324, e, r)
    assert np.all(np.diff(f) < 0)


def test_f_over_envelope_band_frozen(p324):
    """(3,2,4) sits on beta = 3 alpha - 2: the band grows ~ r^(1/2).

    Regression on the measured band rather than a boundedness assertion
    (the phase correction is log-divergent in this regime); evaluated in
    log space since both factors underflow past r ~ 38.
    """
    from schrodheat.model import log_envelope
    e = wkb.wkb_coefficients(p324, 0.0, 3)
    r = np.geomspace(1.0, 50.0, 120)
    log_ratio = wkb.log_f_eval(p324, e, r) - log_envelope(p324, r)
    ratio = np.exp(log_ratio - log_ratio[0])
    band = ratio.max() / ratio.min()
    assert band == pytest.approx(7.633, rel=0.01)
    mid = len(r) // 2
    drift = ratio[-1] / ratio[mid]
    assert drift == pytest.approx(math.sqrt(50.0 / r[mid]), rel=0.01)


def test_profile_envelope_band_report(p324):
    e = wkb.wkb_coefficients(p324, 0.0, 3)
    rep = wkb.profile_envelope_band(p324, e)
    assert rep["regime_delicate"]          # beta = 3 alpha - 2 exactly
    assert rep["band"] == pytest.approx(7.633, rel=0.01)
    p = make_params(4, 4, 4)               # beta < 3 alpha - 2: converging
    rep2 = wkb.profile_envelope_band(p, wkb.wkb_coefficients(p, 0.0, 4))
    assert not rep2["regime_delicate"]
    # the v-tail converges like 1/r, so a few percent remain at r=50;
    # contrast with the delicate case where the ratio keeps growing
    assert rep2["outward_drift"] == pytest.approx(1.0, abs=0.05)
    assert rep["outward_drift"] > 2.0


def test_residual_g_m_term():
    """With v == 0 the only N-dependence of g is -m(r); N=3 kills it."""
    p3 = make_params(3, 2, 4)
    p4 = make_params(4, 2, 4)
    e3 = wkb.wkb_coefficients(p3, p3.derived.c0, 3)   # v == 0
    e4 = wkb.wkb_coefficients(p4, p4.derived.c0, 3)   # v == 0
    r = np.geomspace(1.0, 20.0, 15)
    m4 = (4 - 1) * (4 - 3) / (4.0 * r**2)
    diff = wkb.residual_g(p3, e3, r) - wkb.residual_g(p4, e4, r)
    assert np.allclose(diff, m4, rtol=1e-12)


def test_pde_identity_by_finite_differences(p324):
    e = wkb.wkb_coefficients(p324, 0.0, 3)
    for r in (2.0, 3.5, 5.0, 7.0):
        assert wkb.pde_residual(p324, e, r) < 1e-6


def test_decay_slope_324(p324):
    e = wkb.wkb_coefficients(p324, 0.0, 3)
    rep = wkb.residual_decay_report(p324, e, 10.0, 100.0, 40)
    assert not rep.vacuous
    assert rep.slope <= -1.9
    assert rep.expected_slope == -2.0


def test_decay_slope_zero_expansion_is_alpha(p324):
    e = wkb.wkb_coefficients(p324, p324.derived.c0, 3)
    rep = wkb.residual_decay_report(p324, e, 10.0, 100.0, 40)
    assert rep.slope == pytest.approx(-p324.alpha, abs=0.05)


def test_decay_slope_steepens_with_k():
    p = make_params(3, 6, 5)     # xi = 1/2 so k*xi < alpha for small k
    r1 = wkb.residual_decay_report(p, wkb.wkb_coefficients(p, 0.0, 2), 10, 100)
    r2 = wkb.residual_decay_report(p, wkb.wkb_coefficients(p, 0.0, 4), 10, 100)
    assert r2.slope < r1.slope - 0.5


def test_decay_vacuous_for_exact_oscillator():
    p = make_params(3, 0, 2, sanity_mode=True)
    e = wkb.wkb_coefficients(p, p.derived.c0, 3)
    rep = wkb.residual_decay_report(p, e, 10.0, 100.0, 40)
    assert rep.vacuous


def test_decay_report_validates_input(p324):
    e = wkb.wkb_coefficients(p324, 0.0, 3)
    with pytest.raises(ValueError):
        wkb.residual_decay_report(p324, e, 100.0, 10.0)
    with pytest.raises(ValueError):
        wkb.residual_decay_report(p324, e, 10.0, 100.0, samples=5)
