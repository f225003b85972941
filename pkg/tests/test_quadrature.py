import numpy as np
import pytest

from thzcov.quadrature import QuadratureError, integrate


@pytest.mark.parametrize("deg", [0, 3, 10, 22])
def test_polynomials_exact(deg):
    res = integrate(lambda x: x**deg, [0.0, 1.0, 2.0], sqrt_map=False)
    assert res.value == pytest.approx(2.0 ** (deg + 1) / (deg + 1), rel=1e-13)


def test_sqrt_endpoint_behaviour():
    # sqrt(x - 1) on [1, 5] is smooth after the t^2 substitution
    res = integrate(lambda x: np.sqrt(np.maximum(x - 1, 0)), [1.0, 5.0], epsabs=1e-12)
    assert res.value == pytest.approx(2 / 3 * 4**1.5, rel=1e-12)
    assert res.neval == 15


def test_vector_valued_and_panels():
    f = lambda x: np.stack([np.sin(x), np.exp(-x)])
    res = integrate(f, [0.0, 1.0, np.pi], epsabs=1e-12, epsrel=1e-12)
    assert res.value == pytest.approx([2.0, 1 - np.exp(-np.pi)], rel=1e-11)
    assert res.panel_values.shape == (2, 2)
    assert res.panel_values[0].sum() == pytest.approx(2.0, rel=1e-11)
    assert res.panel_values[0, 0] == pytest.approx(1 - np.cos(1.0), rel=1e-11)


def test_peaked_integrand_adapts():
    eps = 1e-3
    f = lambda x: eps / (x * x + eps * eps)
    res = integrate(f, [-1.0, 1.0], sqrt_map=False, epsabs=1e-10, epsrel=1e-10)
    assert res.value == pytest.approx(2 * np.arctan(1 / eps), rel=1e-9)
    assert res.error < 1e-9


def test_zero_width_and_empty():
    assert integrate(np.cos, [1.0, 1.0]).value == 0.0
    res = integrate(lambda x: np.ones_like(x), [0.0, 0.0, 2.0])
    assert res.value == pytest.approx(2.0)
    with pytest.raises(ValueError):
        integrate(np.cos, [1.0, 0.0])


def test_limit_raises():
    f = lambda x: np.sign(np.sin(200 * x))
    with pytest.raises(QuadratureError):
        integrate(f, [0.0, 1.0], epsabs=1e-14, epsrel=1e-14, limit=16)
    res = integrate(f, [0.0, 1.0], epsabs=1e-14, epsrel=1e-14, limit=16, raise_on_fail=False)
    assert np.isfinite(res.value)
