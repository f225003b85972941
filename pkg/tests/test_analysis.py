import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from thzcov.analysis import (
    CoverageModel,
    ap_hit_prob,
    conditional_coverage,
    gain_distribution,
    laplace_in_derivatives,
    nearest_los_cdf,
    nearest_los_pdf,
    segment_hit_prob,
    ue_hit_prob,
    ue_horizontal_hit_prob,
    ue_vertical_reach,
    void_probability,
)
from thzcov.channel import path_gain
from thzcov.config import default_scenario
from thzcov.specfun import ftr_cdf


@pytest.fixture(scope="module")
def center():
    return default_scenario(placement="center")


@pytest.fixture(scope="module")
def model(center):
    sc = center
    return CoverageModel(sc.room, sc.sys, sc.ap, sc.ue, sc.ftr, sc.ctl)


def _room_integral(sc, d0=np.inf):
    """Mean LoS AP count within ``d0``, integrated in polar form around the UE.

    Along direction ``phi`` the floor extends to the wall distance ``R(phi)``;
    the radial integral of ``lambda exp(-alpha r) r`` is closed form.
    """
    ux, uy = sc.room.ue_position
    rx, ry = sc.room.r_x, sc.room.r_y
    lam, a = sc.sys.lambda_a, sc.sys.alpha

    def reach(phi):
        c, s = math.cos(phi), math.sin(phi)
        out = math.inf
        if c > 1e-15:
            out = min(out, (rx - ux) / c)
        if c < -1e-15:
            out = min(out, -ux / c)
        if s > 1e-15:
            out = min(out, (ry - uy) / s)
        if s < -1e-15:
            out = min(out, -uy / s)
        return min(out, d0)

    def radial(phi):
        r = reach(phi)
        return lam * (1 - math.exp(-a * r) * (1 + a * r)) / a**2

    corners = sorted(
        math.atan2(y - uy, x - ux) % (2 * math.pi) for x in (0, rx) for y in (0, ry)
    )
    cuts = []
    if np.isfinite(d0):
        for off, base in ((rx - ux, 0.0), (ry - uy, math.pi / 2), (ux, math.pi), (uy, 1.5 * math.pi)):
            if d0 > off:
                h = math.acos(off / d0)
                cuts += [(base - h) % (2 * math.pi), (base + h) % (2 * math.pi)]
    pts = sorted({0.0, 2 * math.pi, *corners, *cuts})
    return sum(
        integrate.quad(radial, p, q, epsabs=1e-13, epsrel=1e-12)[0] for p, q in zip(pts[:-1], pts[1:])
    )


@pytest.mark.parametrize("placement", ["center", "corner"])
def test_void_probability_vs_floor_integral(placement):
    sc = default_scenario(placement=placement, lambda_a=0.02)
    assert void_probability(sc.room, sc.sys) == pytest.approx(math.exp(-_room_integral(sc)), rel=1e-9)


def test_distance_cdf_vs_floor_integral():
    sc = default_scenario(placement="near_center", lambda_a=0.05)
    for d0 in (2.0, 3.5):
        ref = -math.expm1(-_room_integral(sc, d0))
        assert nearest_los_cdf(sc.room, sc.sys, d0) == pytest.approx(ref, rel=1e-9)


def test_distance_pdf_integrates_to_non_void(center):
    sc = center
    pts = np.concatenate([[0.0], sc.room.breakpoints()])
    total = sum(
        integrate.quad(lambda d: nearest_los_pdf(sc.room, sc.sys, d), a, b, epsabs=1e-13)[0]
        for a, b in zip(pts[:-1], pts[1:])
    )
    assert total == pytest.approx(1 - void_probability(sc.room, sc.sys), abs=1e-10)
    assert nearest_los_cdf(sc.room, sc.sys, 100.0) == pytest.approx(total, abs=1e-10)


def test_lower_density_shifts_distance_right(center):
    sc = center
    lo = default_scenario(lambda_a=0.05)
    d = np.linspace(0.1, 12, 60)
    assert np.all(nearest_los_cdf(lo.room, lo.sys, d) <= nearest_los_cdf(sc.room, sc.sys, d))


def test_ap_hit_prob(center):
    sc = center
    phi_ap = math.atan(2.0 / 20.0)
    ref = math.radians(10) / (math.pi / 2 - phi_ap) * math.radians(10) / (2 * math.pi)
    assert ap_hit_prob(sc.ap, sc.sys) == pytest.approx(ref)
    assert ap_hit_prob(sc.ap, sc.sys) == pytest.approx(0.0033, abs=1e-4)


def _arc_pair_prob(theta, phi, n=3000):
    # two uniform points on an arc of angle theta, circular gap < phi/2
    a = (np.arange(n) + 0.5) / n * theta
    gap = np.abs(a[:, None] - a[None, :])
    gap = np.minimum(gap, 2 * np.pi - gap)
    return np.mean(gap < phi / 2)


@pytest.mark.parametrize("theta", [0.2, 0.5, 1.3, 3.0, 5.9, 6.1, 2 * np.pi])
def test_segment_hit_prob_vs_grid(theta):
    phi = math.radians(33)
    assert segment_hit_prob(theta, phi) == pytest.approx(_arc_pair_prob(theta, phi), abs=2e-3)


def test_segment_hit_prob_edges():
    phi = 0.5
    assert segment_hit_prob(0.2, phi) == 1.0
    assert segment_hit_prob(0.0, phi) == 0.0
    assert segment_hit_prob(2 * np.pi, phi) == pytest.approx(phi / (2 * np.pi))


def test_ue_hit_prob(center):
    sc = center
    d0 = 4.0
    reach = ue_vertical_reach(sc.ue, sc.sys, d0)
    assert reach == pytest.approx(2.0 / math.tan(math.atan(2.0 / 4.0) - math.radians(16.5)))
    assert ue_vertical_reach(sc.ue, sc.sys, 8.0) == math.inf
    ph = ue_horizontal_hit_prob(sc.room, sc.ue, d0)
    assert ph == pytest.approx(math.radians(33) / (2 * np.pi))
    assert ue_hit_prob(sc.room, sc.ue, sc.sys, d0, reach - 0.1) == pytest.approx(ph)
    assert ue_hit_prob(sc.room, sc.ue, sc.sys, d0, reach + 0.1) == 0.0
    with pytest.raises(ValueError):
        ue_hit_prob(sc.room, sc.ue, sc.sys, d0, 3.0)


@settings(max_examples=200, deadline=None)
@given(pa=st.floats(0, 1), pu=st.floats(0, 1))
def test_gain_distribution_sums_to_one(center, pa, pu):
    g = gain_distribution(pa, pu, center.ap, center.ue)
    assert sum(g.probs) == pytest.approx(1.0, abs=1e-15)
    assert min(g.probs) >= 0
    assert g.gains[0] == max(g.gains)


def test_gain_distribution_domain(center):
    with pytest.raises(ValueError):
        gain_distribution(1.2, 0.5, center.ap, center.ue)


def test_laplace_at_zero_is_one(model):
    for d0 in (0.5, 3.0, 9.0):
        assert model.laplace_derivatives(0.0, d0, 0)[0] == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("beta_db,d0", [(0.0, 1.0), (10.0, 4.0), (20.0, 8.0), (25.0, 11.0)])
def test_scaled_and_direct_derivative_routes_agree(model, beta_db, d0):
    s = float(model.s_of(10 ** (beta_db / 10), d0))
    u, _ = model.scaled_derivatives(s, d0, 6)
    direct = model.laplace_derivatives(s, d0, 5)
    ref = [(-s) ** l * direct[l] / math.factorial(l) for l in range(6)]
    assert np.allclose(u, ref, rtol=1e-7, atol=1e-14)
    assert np.all(u >= 0)


def test_functional_laplace_front_end(center, model):
    sc = center
    out = laplace_in_derivatives(1e7, 3.0, 2, sc.room, sc.sys, sc.ap, sc.ue, sc.ftr)
    assert np.allclose(out, model.laplace_derivatives(1e7, 3.0, 2), rtol=1e-12)


@pytest.mark.parametrize("d0", [1.0, 5.0, 10.0])
def test_no_interferers_closed_form(d0):
    sc = default_scenario(lambda_a=0.0)
    m = CoverageModel(sc.room, sc.sys, sc.ap, sc.ue, sc.ftr, sc.ctl)
    beta = 10.0 ** 2.5
    x = beta * sc.sys.n0 / (m.g0 * path_gain(d0, sc.sys))
    val, clamp, _ = m.conditional_coverage(beta, d0)
    # the series drops the FTR tail mass beyond its truncation point
    assert val == pytest.approx(1.0 - ftr_cdf(x, sc.ftr), abs=2 * m.trunc_err + 1e-15)
    assert clamp == 0.0


def test_conditional_coverage_decreases_with_threshold(center):
    sc = center
    vals = [conditional_coverage(10 ** (b / 10), 4.0, sc.room, sc.sys, sc.ap, sc.ue, sc.ftr)
            for b in range(0, 35, 5)]
    assert np.all(np.diff(vals) < 0)


def test_coverage_result_fields(model):
    res = model.coverage(10.0)
    assert 0.99 < res.coverage < 1.0
    assert res.void_prob < 1e-10
    assert res.trunc_err < 1e-11
    assert res.quad_err < 1e-5
    assert res.clamp < 1e-12


def test_noise_limited_coverage_collapses():
    sc = default_scenario(n0_db=40.0)
    m = CoverageModel(sc.room, sc.sys, sc.ap, sc.ue, sc.ftr, sc.ctl)
    assert m.coverage(10.0).coverage < 1e-6


@pytest.mark.parametrize("placement", ["center", "near_center", "corner"])
def test_hitting_approximation_dips_are_small(placement):
    # Just past a wall distance the segment approximation misses pairs that
    # straddle the short cut, so it can dip slightly; bound the dip.
    sc = default_scenario(placement=placement)
    d = np.linspace(0.5, 12, 2301)
    p = ue_horizontal_hit_prob(sc.room, sc.ue, d)
    assert np.min(np.diff(p)) > -0.02
