"""Analytical downlink coverage of the typical UE in a rectangular room.

Pipeline
--------
1. AP intensity along the in-room arc of radius ``d`` and its LoS thinning.
2. Law of the distance to the nearest LoS AP (with a void atom when no LoS
   AP exists in the room).
3. Antenna hitting probabilities and the four-point interferer gain law.
4. Laplace transform of interference plus noise, ``L(s) = exp(g(s))``, and
   its derivatives through the exponential-composition recursion.
5. Conditional coverage through the FTR series and the outer ``d0`` integral.

The conditional coverage is assembled from the scaled derivatives

    u_l = (-s)^l L^(l)(s) / l!  =  P(N = l),   N | X ~ Poisson(s X),

which are all non-negative. With ``q_n = (-s)^n g^(n)(s) / n!`` (also
non-negative) they obey ``u_l = (1/l) sum_{n=1..l} n q_n u_{l-n}``, so the
whole chain is free of cancellation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .channel import (
    AntennaParams,
    SystemParams,
    link_constant,
    lobe_gains,
    path_gain,
)
from .geometry import RoomGeometry, arc_angle, max_corner_distance, segment_matrix
from .quadrature import integrate
from .specfun import FtrParams, SeriesControl, ftr_weights

__all__ = [
    "GainDistribution",
    "CoverageResult",
    "CoverageModel",
    "ap_intensity",
    "los_intensity",
    "nearest_los_pdf",
    "nearest_los_cdf",
    "void_probability",
    "ap_hit_prob",
    "segment_hit_prob",
    "ue_horizontal_hit_prob",
    "ue_vertical_reach",
    "ue_hit_prob",
    "gain_distribution",
    "laplace_in_derivatives",
    "conditional_coverage",
    "coverage_probability",
]


@dataclass(frozen=True)
class GainDistribution:
    """Interferer gain law ordered (Am Um, Am Us, As Um, As Us)."""

    gains: tuple[float, float, float, float]
    probs: tuple[float, float, float, float]


@dataclass
class CoverageResult:
    coverage: float
    void_prob: float
    trunc_err: float
    quad_err: float
    clamp: float = 0.0
    extra: dict = field(default_factory=dict)


# --------------------------------------------------------------------------
# distance law


def ap_intensity(room: RoomGeometry, sys: SystemParams, d):
    """AP intensity per metre of radius, ``lambda_A * theta(d) * d``."""
    d = np.asarray(d, dtype=float)
    out = sys.lambda_a * np.asarray(arc_angle(room, d)) * d
    return float(out) if out.ndim == 0 else out


def los_intensity(room: RoomGeometry, sys: SystemParams, d):
    d = np.asarray(d, dtype=float)
    out = np.asarray(ap_intensity(room, sys, d)) * np.exp(-sys.alpha * d)
    return float(out) if out.ndim == 0 else out


def _rho(room: RoomGeometry, sys: SystemParams, d0):
    """Mean number of LoS APs within horizontal distance ``d0``."""
    d0 = np.asarray(d0, dtype=float)
    flat = d0.ravel()
    dmax = max_corner_distance(room)
    clipped = np.clip(flat, 0.0, dmax)
    pts = np.unique(np.concatenate([[0.0, dmax], room.breakpoints(), clipped]))
    pts = pts[pts <= dmax]
    res = integrate(lambda x: los_intensity(room, sys, x), pts, epsabs=1e-13, epsrel=1e-13)
    cum = np.concatenate([[0.0], np.cumsum(res.panel_values)])
    out = cum[np.searchsorted(pts, clipped)].reshape(d0.shape)
    return float(out) if out.ndim == 0 else out


def void_probability(room: RoomGeometry, sys: SystemParams) -> float:
    """Probability that the room holds no LoS AP."""
    return math.exp(-_rho(room, sys, max_corner_distance(room)))


def nearest_los_cdf(room: RoomGeometry, sys: SystemParams, d0):
    """Distribution function of the nearest-LoS-AP distance (defective)."""
    out = -np.expm1(-np.asarray(_rho(room, sys, d0)))
    return float(out) if np.ndim(out) == 0 else out


def nearest_los_pdf(room: RoomGeometry, sys: SystemParams, d0):
    """Density of the nearest-LoS-AP distance; integrates to 1 - void."""
    d0 = np.asarray(d0, dtype=float)
    out = np.asarray(los_intensity(room, sys, d0)) * np.exp(-np.asarray(_rho(room, sys, d0)))
    return float(out) if out.ndim == 0 else out


# --------------------------------------------------------------------------
# antenna hitting


def ap_hit_prob(ap: AntennaParams, sys: SystemParams) -> float:
    """Probability that a randomly steered interfering AP beam covers the UE."""
    if ap.r_cov is None or not ap.r_cov > 0:
        raise ValueError("AP antenna needs a positive coverage radius r_cov")
    phi_ap = math.atan(sys.delta_h / ap.r_cov)
    p_v = min(ap.phi_v / (math.pi / 2 - phi_ap), 1.0)
    p_h = ap.phi_h / (2 * math.pi)
    return p_v * p_h


def segment_hit_prob(theta, phi):
    """P(two uniform points of an arc of angle ``theta`` are within ``phi/2``).

    The last branch accounts for wrap-around when the arc almost closes.
    """
    theta = np.asarray(theta, dtype=float)
    safe = np.where(theta > 0, theta, 1.0)
    mid = phi / safe - (phi / (2 * safe)) ** 2
    wrap = phi / safe + (safe - 2 * np.pi) * (safe - 2 * np.pi + phi) / safe**2
    out = np.where(theta <= phi / 2, 1.0, np.where(theta <= 2 * np.pi - phi / 2, mid, wrap))
    out = np.where(theta > 0, out, 0.0)
    return float(out) if out.ndim == 0 else out


def ue_horizontal_hit_prob(room: RoomGeometry, ue: AntennaParams, d0):
    """Approximate probability that an interferer lies in the UE's horizontal beam.

    The interferer and the serving AP are assumed to share an arc segment;
    segment ``k`` is chosen by both with probability ``(theta_k / theta)^2``.
    """
    seg = segment_matrix(room, d0)  # (n, 4)
    tot = seg.sum(axis=1, keepdims=True)
    frac = np.divide(seg, tot, out=np.zeros_like(seg), where=tot > 0)
    out = np.sum(frac**2 * segment_hit_prob(seg, ue.phi_h), axis=1)
    return float(out[0]) if np.ndim(d0) == 0 else out.reshape(np.shape(d0))


def ue_vertical_reach(ue: AntennaParams, sys: SystemParams, d0):
    """Largest interferer distance inside the UE's vertical beam (inf if unbounded)."""
    d0 = np.asarray(d0, dtype=float)
    elev = np.arctan2(sys.delta_h, d0)
    gap = elev - ue.phi_v / 2
    with np.errstate(divide="ignore"):
        out = np.where(gap > 0, sys.delta_h / np.tan(np.where(gap > 0, gap, 1.0)), np.inf)
    return float(out) if out.ndim == 0 else out


def ue_hit_prob(room: RoomGeometry, ue: AntennaParams, sys: SystemParams, d0, d_i):
    """Probability that an interferer at ``d_i`` falls in the UE's main lobe."""
    d0 = np.asarray(d0, dtype=float)
    d_i = np.asarray(d_i, dtype=float)
    if np.any(d_i < d0):
        raise ValueError("interferers cannot be nearer than the serving AP")
    p_v = (d_i <= np.asarray(ue_vertical_reach(ue, sys, d0))).astype(float)
    out = p_v * np.asarray(ue_horizontal_hit_prob(room, ue, d0))
    return float(out) if out.ndim == 0 else out


def gain_distribution(p_a, p_u, ap: AntennaParams, ue: AntennaParams) -> GainDistribution:
    if not (0 <= p_a <= 1 and 0 <= p_u <= 1):
        raise ValueError("hit probabilities must lie in [0, 1]")
    am, as_ = lobe_gains(ap)
    um, us = lobe_gains(ue)
    return GainDistribution(
        (am * um, am * us, as_ * um, as_ * us),
        (p_a * p_u, p_a * (1 - p_u), (1 - p_a) * p_u, (1 - p_a) * (1 - p_u)),
    )


# --------------------------------------------------------------------------
# coverage engine


class CoverageModel:
    """Precomputed state for repeated Laplace / coverage evaluations.

    Parameters
    ----------
    room, sys, ap, ue, ftr
        Scenario description.
    ctl : SeriesControl
        Truncation of the FTR mixture series.
    epsabs_inner, epsabs_outer : float
        Absolute tolerances of the interference integral (per derivative
        order) and of the outer integral over the serving distance.
    """

    def __init__(
        self,
        room: RoomGeometry,
        sys: SystemParams,
        ap: AntennaParams,
        ue: AntennaParams,
        ftr: FtrParams,
        ctl: SeriesControl | None = None,
        epsabs_inner: float = 1e-8,
        epsabs_outer: float = 1e-6,
    ):
        self.room, self.sys, self.ap, self.ue, self.ftr = room, sys, ap, ue, ftr
        self.ctl = ctl or SeriesControl()
        self.epsabs_inner = epsabs_inner
        self.epsabs_outer = epsabs_outer

        self.p_a = ap_hit_prob(ap, sys)
        am, as_ = lobe_gains(ap)
        um, us = lobe_gains(ue)
        self.combo_gain = np.array([am * um, am * us, as_ * um, as_ * us])
        self.combo_c = link_constant(self.combo_gain, 1.0, sys)
        self.g0 = float(self.combo_c[0])

        self.w = ftr_weights(ftr, self.ctl)
        self.n_terms = len(self.w)
        self.trunc_err = abs(1.0 - float(self.w.sum()))
        # tail sums W_l = sum_{j >= l} w_j
        self.w_tail = np.cumsum(self.w[::-1])[::-1]
        j = np.arange(self.n_terms, dtype=float)[:, None]
        n = np.arange(self.n_terms, dtype=float)[None, :]
        self._binom = self.w[:, None] * np.exp(
            special.gammaln(j + n + 1) - special.gammaln(j + 1) - special.gammaln(n + 1)
        )
        self.dmax = max_corner_distance(room)

    # ---- pieces -----------------------------------------------------------

    def s_of(self, beta: float, d0):
        """Laplace argument ``beta / (2 g0 W(d0) sigma^2)``."""
        return beta / (2.0 * self.g0 * np.asarray(path_gain(d0, self.sys)) * self.ftr.sigma_sq)

    def _probs(self, d0: float, x):
        p_u = (x <= ue_vertical_reach(self.ue, self.sys, d0)) * ue_horizontal_hit_prob(
            self.room, self.ue, d0
        )
        pa = self.p_a
        return np.stack([pa * p_u, pa * (1 - p_u), (1 - pa) * p_u, (1 - pa) * (1 - p_u)])

    def _scaled_kernel(self, s: float, x, orders: int):
        # Phi[G, n, p] = s^n E[(c_G W H)^n exp(-s c_G W H)] / n!  at d = x[p],
        # except that row n = 0 holds 1 - Phi[G, 0, p], summed without the
        # cancellation of forming 1 - E[exp(-s c_G W H)] explicitly.
        t = 2.0 * self.ftr.sigma_sq * s * np.outer(self.combo_c, path_gain(x, self.sys))
        log1m_y = -np.log1p(t)  # log(1 - y), y = t / (1 + t)
        with np.errstate(divide="ignore"):
            log_y = np.log(t) + log1m_y
        j = np.arange(self.n_terms)
        v = np.exp(log1m_y[..., None] * j)  # (4, P, J)
        core = v @ self._binom[:, :orders]  # (4, P, N)
        n = np.arange(orders)
        with np.errstate(invalid="ignore"):
            pw = np.exp(special.xlogy(n, np.exp(log_y)[..., None]) + log1m_y[..., None])
        out = core * pw
        out[..., 0] = -np.expm1(log1m_y[..., None] * (j + 1)) @ self.w
        return np.transpose(out, (0, 2, 1))  # (4, N, P)

    def _breakpoints(self, d0: float):
        reach = ue_vertical_reach(self.ue, self.sys, d0)
        pts = [d0, self.dmax, reach, *self.room.breakpoints()]
        pts = np.unique([p for p in pts if d0 <= p <= self.dmax])
        return pts

    def exponent_series(self, s: float, d0: float, orders: int | None = None):
        """Return ``(g, q, err)``: log-Laplace and scaled exponent derivatives.

        ``q[n] = (-s)^n g^(n)(s) / n!`` for ``n = 1..orders-1``; ``q[0]`` is
        unused and set to zero.
        """
        orders = self.n_terms if orders is None else orders
        if d0 >= self.dmax:
            q = np.zeros(orders)
            if orders > 1:
                q[1] = s * self.sys.n0
            return -s * self.sys.n0, q, 0.0

        def f(x):
            lam = los_intensity(self.room, self.sys, x)
            mix = np.einsum("gp,gnp->np", self._probs(d0, x), self._scaled_kernel(s, x, orders))
            return mix * lam

        res = integrate(f, self._breakpoints(d0), epsabs=self.epsabs_inner, epsrel=1e-10)
        vals = np.asarray(res.value)
        q = vals.copy()
        g = -s * self.sys.n0 - vals[0]
        q[0] = 0.0
        if orders > 1:
            q[1] += s * self.sys.n0
        return g, q, res.error

    def scaled_derivatives(self, s: float, d0: float, orders: int | None = None):
        """``u_l = (-s)^l L^(l)(s | d0) / l!`` for ``l = 0..orders-1``."""
        g, q, err = self.exponent_series(s, d0, orders)
        n = len(q)
        u = np.zeros(n)
        u[0] = math.exp(g)
        k = np.arange(n)
        for l in range(1, n):
            u[l] = np.dot(k[1 : l + 1] * q[1 : l + 1], u[l - 1 :: -1][:l]) / l
        return u, err

    def laplace_derivatives(self, s: float, d0: float, l_max: int):
        """``L^(l)(s | d0)`` for ``l = 0..l_max`` by direct differentiation.

        Each exponent derivative is
        ``g^(n) = -N0 [n = 1] + (-1)^n int Lambda_LoS sum_G Pr(G) M_n dd`` with
        ``M_n = sum_j w_j (j+1)_n t^n (1 + s t)^-(j+1+n)``, ``t = 2 sigma^2 c_G W(d)``.
        """
        j = np.arange(self.n_terms, dtype=float)
        n = np.arange(1, l_max + 1, dtype=float)
        lw = np.log(self.w)

        def f(x):
            lam = los_intensity(self.room, self.sys, x)
            t = 2.0 * self.ftr.sigma_sq * np.outer(self.combo_c, path_gain(x, self.sys))  # (4, P)
            lt = np.log(t)
            l1 = np.log1p(s * t)
            out = np.empty((l_max + 1,) + np.shape(x))
            probs = self._probs(d0, x)
            # n = 0 row: 1 - Laplace of the interferer power
            one_minus = -np.expm1(-(j[None, None, :] + 1) * l1[..., None]) @ self.w
            out[0] = lam * np.sum(probs * one_minus, axis=0)
            for i, nn in enumerate(n, start=1):
                lp = special.gammaln(j + 1 + nn) - special.gammaln(j + 1)
                terms = lw + lp + nn * lt[..., None] - (j + 1 + nn) * l1[..., None]
                m_n = np.exp(terms).sum(axis=-1)
                out[i] = lam * (-1) ** int(nn) * np.sum(probs * m_n, axis=0)
            return out

        if d0 >= self.dmax:
            vals = np.zeros(l_max + 1)
        else:
            vals = np.asarray(
                integrate(f, self._breakpoints(d0), epsabs=1e-12, epsrel=1e-12).value
            )
        g = np.empty(l_max + 1)
        g[0] = -s * self.sys.n0 - vals[0]
        g[1:] = vals[1:]
        if l_max >= 1:
            g[1] -= self.sys.n0
        L = np.zeros(l_max + 1)
        L[0] = math.exp(g[0])
        for l in range(1, l_max + 1):
            k = np.arange(l)
            L[l] = np.sum(special.comb(l - 1, k) * g[l - k] * L[k])
        return L

    def conditional_coverage(self, beta: float, d0: float):
        """``P(SINR > beta | d0)`` with its clamp magnitude and quadrature error."""
        s = float(self.s_of(beta, d0))
        u, err = self.scaled_derivatives(s, d0)
        raw = float(np.dot(u, self.w_tail))
        val = min(max(raw, 0.0), 1.0)
        return val, abs(raw - val), err

    def coverage(self, beta: float) -> CoverageResult:
        """Coverage probability; the no-LoS-AP event counts as an outage."""
        inner_err = [0.0]
        clamp = [0.0]

        def f(x):
            out = np.zeros_like(x)
            pdf = nearest_los_pdf(self.room, self.sys, x)
            for i, d0 in enumerate(x):
                if pdf[i] == 0.0:
                    continue
                val, cl, err = self.conditional_coverage(beta, float(d0))
                out[i] = val * pdf[i]
                inner_err[0] = max(inner_err[0], err)
                clamp[0] = max(clamp[0], cl)
            return out

        pts = np.unique(np.concatenate([[0.0, self.dmax], self.room.breakpoints()]))
        res = integrate(f, pts, epsabs=self.epsabs_outer, epsrel=1e-8)
        void = void_probability(self.room, self.sys)
        cov = min(max(float(res.value), 0.0), 1.0)
        return CoverageResult(
            coverage=cov,
            void_prob=void,
            trunc_err=self.trunc_err,
            quad_err=float(res.error) + inner_err[0],
            clamp=clamp[0],
            extra={"neval_outer": res.neval},
        )


# --------------------------------------------------------------------------
# functional front-ends


def laplace_in_derivatives(s, d0, l_max, room, sys, ap, ue, ftr, ctl=None):
    """``[L(s|d0), L'(s|d0), ..., L^(l_max)(s|d0)]`` of interference plus noise."""
    return CoverageModel(room, sys, ap, ue, ftr, ctl).laplace_derivatives(s, d0, l_max)


def conditional_coverage(beta, d0, room, sys, ap, ue, ftr, ctl=None):
    return CoverageModel(room, sys, ap, ue, ftr, ctl).conditional_coverage(beta, d0)[0]


def coverage_probability(beta, room, sys, ap, ue, ftr, ctl=None) -> CoverageResult:
    return CoverageModel(room, sys, ap, ue, ftr, ctl).coverage(beta)
