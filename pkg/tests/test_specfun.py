import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from thzcov.specfun import (
    FtrParams,
    SeriesControl,
    SeriesConvergenceError,
    ftr_cdf,
    ftr_laplace,
    ftr_log_rj,
    ftr_pdf,
    ftr_rj,
    ftr_rj_series,
    ftr_weights,
    gauss_2f1,
    omega,
    pochhammer,
    truncation_index,
    upper_incomplete_gamma,
)

REF = FtrParams()  # m=2, K=4, delta=0.5, 2 sigma^2 = 0.2


def test_pochhammer_basics():
    assert pochhammer(3.5, 0) == 1.0
    assert pochhammer(1.0, 5) == 120.0
    assert pochhammer(-2.0, 3) == 0.0
    with pytest.raises(ValueError):
        pochhammer(1.0, -1)


@pytest.mark.parametrize("a,x", [(0.5, 0.1), (1.0, 2.0), (3.5, 7.0), (12.0, 3.0), (40.0, 55.0)])
def test_upper_incomplete_gamma_vs_mpmath(a, x):
    ref = float(mp.gammainc(a, x, mp.inf))
    assert upper_incomplete_gamma(a, x) == pytest.approx(ref, rel=1e-12)


def test_upper_incomplete_gamma_domain():
    assert upper_incomplete_gamma(2.5, 0.0) == pytest.approx(math.gamma(2.5), rel=1e-14)
    with pytest.raises(ValueError):
        upper_incomplete_gamma(0.0, 1.0)
    with pytest.raises(ValueError):
        upper_incomplete_gamma(1.0, -1.0)


@pytest.mark.parametrize(
    "a,b,c,x",
    [
        (0.5, 1.0, 1.5, 0.3),
        (2.0, 2.5, 3.0, 0.9),
        (3.0, 3.5, 1.0, 0.5),
        (1.5, 2.0, 4.0, -0.8),
        (-3.0, 2.0, 1.5, 0.7),  # terminating
    ],
)
def test_gauss_2f1_vs_mpmath(a, b, c, x):
    ref = float(mp.hyp2f1(a, b, c, x))
    assert gauss_2f1(a, b, c, x) == pytest.approx(ref, rel=1e-12)


def test_gauss_2f1_edges():
    assert gauss_2f1(1.0, 2.0, 3.0, 0.0) == 1.0
    with pytest.raises(ValueError):
        gauss_2f1(1.0, 1.0, 2.0, 0.999)
    with pytest.raises(ValueError):
        gauss_2f1(1.0, 1.0, -2.0, 0.5)
    with pytest.raises(SeriesConvergenceError):
        gauss_2f1(5.0, 5.0, 1.0, 0.99, SeriesControl(1e-17, 2, 50))


def _omega_mp(mu, ups, x):
    # the regularised 2F1 of the non-integer branch, continued to integer mu
    a, b = (ups - mu) / 2, (ups - mu + 1) / 2
    return float(mp.hyp2f1(a, b, 1 - mu, x) * mp.rgamma(1 - mu)) if mu < 1 or mu % 1 else float(
        mp.limit(lambda m: mp.hyp2f1((ups - m) / 2, (ups - m + 1) / 2, 1 - m, x) * mp.rgamma(1 - m), mu)
    )


@pytest.mark.parametrize("mu,ups,x", [(0.0, 3.0, 0.2), (-1.5, 4.0, 0.05), (2.0, 6.0, 0.1), (1.0, 3.0, 0.3)])
def test_omega_matches_regularised_2f1(mu, ups, x):
    assert omega(mu, ups, x) == pytest.approx(_omega_mp(mu, ups, x), rel=1e-9)


def _rj_mixture_mp(j, p):
    # r_j = Gamma(j+m) E_alpha[(1 + D cos a)^j (m + K + K D cos a)^-(j+m)]
    m, K, D = p.m, p.big_k, p.delta
    f = lambda a: (1 + D * mp.cos(a)) ** j * (m + K + K * D * mp.cos(a)) ** (-(j + m))
    # the integrand peaks sharply at a = 0 for large j; subdivide
    with mp.workdps(30):
        return float(mp.gamma(j + m) * mp.quad(f, mp.linspace(0, mp.pi, 33)) / mp.pi)


@pytest.mark.parametrize("j", [0, 1, 5, 10, 40, 90])
def test_rj_vs_mpmath_mixture(j):
    assert ftr_rj(j, REF) == pytest.approx(_rj_mixture_mp(j, REF), rel=1e-11)


@pytest.mark.parametrize("p", [REF, FtrParams(3.0, 10.0, 0.9, 0.05), FtrParams(1.5, 1.0, 0.2, 0.5)])
def test_rj_series_agrees_with_mixture_route(p):
    for j in range(0, 10):
        assert ftr_rj_series(j, p) == pytest.approx(ftr_rj(j, p), rel=1e-9)


def test_log_rj_table_is_consistent():
    lr = ftr_log_rj(30, REF)
    assert len(lr) == 31
    assert np.exp(lr[7]) == pytest.approx(ftr_rj(7, REF), rel=1e-13)


def test_weights_normalise_and_mean():
    w = ftr_weights(REF)
    assert abs(w.sum() - 1.0) < 1e-11
    assert np.all(w >= 0)
    # E[H] = 2 sigma^2 E[j + 1]
    mean = 2 * REF.sigma_sq * np.dot(np.arange(len(w)) + 1, w)
    assert mean == pytest.approx(REF.mean_power, rel=1e-10)
    assert REF.mean_power == pytest.approx(1.0)


def test_rayleigh_limit():
    p = FtrParams(2.0, 0.0, 0.5, 0.3)
    h = np.array([0.01, 0.3, 1.0, 3.0])
    assert np.allclose(ftr_pdf(h, p), np.exp(-h / 0.6) / 0.6, rtol=1e-12)
    assert np.allclose(ftr_cdf(h, p), -np.expm1(-h / 0.6), rtol=1e-12)


def test_pdf_integrates_to_one():
    val, _ = integrate.quad(lambda h: ftr_pdf(h, REF), 0, np.inf, epsabs=1e-13, limit=200)
    assert val == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("h", [0.05, 0.2, 0.7, 1.0, 2.5, 6.0])
def test_cdf_vs_pdf_quadrature(h):
    val, _ = integrate.quad(lambda x: ftr_pdf(x, REF), 0, h, epsabs=1e-14, epsrel=1e-13)
    assert ftr_cdf(h, REF) == pytest.approx(val, abs=1e-10)


def test_pdf_against_independent_mixture():
    # weights rebuilt from the mpmath mixture integral, gamma kernels from scipy
    from scipy import stats

    h = np.array([0.1, 1.0, 3.0])
    m, k = REF.m, REF.big_k
    ref = np.zeros_like(h)
    for j in range(70):
        wj = m**m / math.gamma(m) * k**j * _rj_mixture_mp(j, REF) / math.factorial(j)
        ref += wj * stats.gamma.pdf(h, j + 1, scale=2 * REF.sigma_sq)
    assert np.allclose(ftr_pdf(h, REF), ref, rtol=1e-10)


@pytest.mark.parametrize("s,c", [(0.0, 1.0), (0.5, 1.0), (3.0, 2.0), (40.0, 0.1)])
def test_laplace_vs_quadrature(s, c):
    val, _ = integrate.quad(lambda h: np.exp(-s * c * h) * ftr_pdf(h, REF), 0, np.inf, epsabs=1e-13)
    assert ftr_laplace(s, c, REF) == pytest.approx(val, abs=1e-10)


def test_truncation_rule():
    ctl = SeriesControl(1e-3, 2, 50)
    terms = np.array([1.0, 0.5, 1e-4, 1e-4, 1e-4, 1.0])
    assert truncation_index(terms, ctl) == 5
    with pytest.raises(SeriesConvergenceError):
        truncation_index(np.ones(10), SeriesControl(1e-3, 2, 10))


def test_weights_raise_when_budget_too_small():
    with pytest.raises(SeriesConvergenceError):
        ftr_weights(REF, SeriesControl(1e-14, 5, 21))


def test_params_validation():
    with pytest.raises(ValueError):
        FtrParams(m=0.0)
    with pytest.raises(ValueError):
        FtrParams(delta=1.5)
    with pytest.raises(ValueError):
        FtrParams(sigma_sq=-1)


@settings(max_examples=40, deadline=None)
@given(
    m=st.floats(0.6, 8.0),
    k=st.floats(0.0, 10.0),
    delta=st.floats(0.0, 1.0),
    a=st.floats(0.0, 5.0),
    b=st.floats(0.0, 5.0),
)
def test_cdf_monotone_and_bounded(m, k, delta, a, b):
    p = FtrParams(m, k, delta, 0.1)
    ctl = SeriesControl(1e-12, 20, 600)
    lo, hi = sorted((a, b))
    fl, fh = ftr_cdf(lo, p, ctl), ftr_cdf(hi, p, ctl)
    assert 0.0 <= fl <= fh + 1e-12 <= 1.0 + 1e-12
