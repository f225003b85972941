"""Special functions and the fluctuating two-ray (FTR) fading family.

The FTR power gain ``H`` is a Poisson-Gamma mixture: conditional on the
shadowing and the phase difference of the two specular waves, ``H`` is a
noncentral chi-square with two degrees of freedom, which expands as

    f_H(h) = sum_j w_j * Gamma(j + 1, scale=2 sigma^2).pdf(h),
    w_j    = m^m / Gamma(m) * K^j * r_j / j!.

Every quantity here (pdf, cdf, Laplace transform, higher moments of the
Laplace kernel) is a linear functional of the weight vector ``w``, so the
weights are computed once per parameter set and cached.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import special

__all__ = [
    "FtrParams",
    "SeriesControl",
    "SeriesConvergenceError",
    "pochhammer",
    "upper_incomplete_gamma",
    "gauss_2f1",
    "omega",
    "ftr_rj",
    "ftr_rj_series",
    "ftr_log_rj",
    "ftr_weights",
    "ftr_pdf",
    "ftr_cdf",
    "ftr_laplace",
    "truncation_index",
]


class SeriesConvergenceError(RuntimeError):
    """Raised when a series hits its hard term cap before converging."""


@dataclass(frozen=True)
class FtrParams:
    """Parameters of the FTR fading power distribution.

    Parameters
    ----------
    m : float
        Shadowing severity of the specular components (Gamma shape).
    big_k : float
        Ratio of specular to diffuse average power.
    delta : float
        Similarity of the two specular waves, in [0, 1].
    sigma_sq : float
        Per-dimension diffuse power; the diffuse component carries ``2 sigma_sq``.
    """

    m: float = 2.0
    big_k: float = 4.0
    delta: float = 0.5
    sigma_sq: float = 0.1

    def __post_init__(self):
        if not self.m > 0:
            raise ValueError(f"m must be positive, got {self.m}")
        if not self.big_k >= 0:
            raise ValueError(f"K must be non-negative, got {self.big_k}")
        if not 0 <= self.delta <= 1:
            raise ValueError(f"delta must lie in [0, 1], got {self.delta}")
        if not self.sigma_sq > 0:
            raise ValueError(f"sigma_sq must be positive, got {self.sigma_sq}")

    @property
    def mean_power(self) -> float:
        return 2.0 * self.sigma_sq * (1.0 + self.big_k)

    @property
    def omega_arg(self) -> float:
        return (self.big_k * self.delta / (self.m + self.big_k)) ** 2


@dataclass(frozen=True)
class SeriesControl:
    """Truncation controls for the infinite sums over the mixture index.

    A series stops once ``|term| < rel_tol * |partial sum|`` holds for three
    consecutive terms past index ``j_min``; reaching ``j_max`` first raises
    :class:`SeriesConvergenceError`.
    """

    rel_tol: float = 1e-12
    j_min: int = 20
    j_max: int = 200

    def __post_init__(self):
        if not 0 < self.rel_tol < 1:
            raise ValueError("rel_tol must lie in (0, 1)")
        if not 0 <= self.j_min <= self.j_max:
            raise ValueError("need 0 <= j_min <= j_max")


_HYP_CONTROL = SeriesControl(rel_tol=1e-17, j_min=2, j_max=20000)


def truncation_index(terms, ctl: SeriesControl) -> int:
    """Number of leading terms to keep from ``terms`` under ``ctl``.

    ``terms`` must hold at least ``ctl.j_max + 1`` entries (index 0..j_max).
    """
    terms = np.asarray(terms, dtype=float)
    partial = np.cumsum(terms)
    small = np.abs(terms) < ctl.rel_tol * np.abs(partial)
    run = 0
    for j in range(min(len(terms), ctl.j_max + 1)):
        run = run + 1 if small[j] else 0
        if run >= 3 and j >= ctl.j_min:
            return j + 1
    raise SeriesConvergenceError(
        f"series did not reach rel_tol={ctl.rel_tol:g} within j_max={ctl.j_max}"
    )


def pochhammer(a: float, n: int) -> float:
    """Rising factorial a (a+1) ... (a+n-1); equal to 1 for n = 0."""
    if n < 0:
        raise ValueError("n must be a non-negative integer")
    out = 1.0
    for i in range(n):
        out *= a + i
    return out


def upper_incomplete_gamma(a: float, x: float) -> float:
    """Non-regularised upper incomplete gamma function Gamma(a, x)."""
    if not a > 0:
        raise ValueError(f"a must be positive, got {a}")
    if x < 0:
        raise ValueError(f"x must be non-negative, got {x}")
    return float(special.gammaincc(a, x) * special.gamma(a))


def gauss_2f1(a: float, b: float, c: float, x: float, ctl: SeriesControl | None = None) -> float:
    """Gauss hypergeometric function by its power series.

    Only the disc ``|x| < 0.999`` is supported; no transformation formulas
    are applied. The recursion ``t_{n+1} = t_n (a+n)(b+n) x / ((c+n)(n+1))``
    is summed until the truncation rule of ``ctl`` fires or the series
    terminates exactly.
    """
    if abs(x) >= 0.999:
        raise ValueError(f"|x| must be < 0.999 for the power series, got {x}")
    ctl = ctl or _HYP_CONTROL
    term = 1.0
    total = 1.0
    run = 0
    for n in range(ctl.j_max):
        num = (a + n) * (b + n)
        if num == 0.0 or x == 0.0:
            return total
        den = c + n
        if den == 0.0:
            raise ValueError("c is a non-positive integer and the series does not terminate")
        term *= num * x / (den * (n + 1))
        total += term
        run = run + 1 if abs(term) < ctl.rel_tol * abs(total) else 0
        if run >= 3 and n >= ctl.j_min:
            return total
    raise SeriesConvergenceError(f"2F1({a}, {b}; {c}; {x}) did not converge in {ctl.j_max} terms")


def omega(mu: float, upsilon: float, x: float) -> float:
    """Two-branch hypergeometric kernel used by the FTR ``r_j`` series.

    For positive integer ``mu`` the Pochhammer-weighted branch is used;
    otherwise ``2F1((u-mu)/2, (u-mu+1)/2; 1-mu; x) / Gamma(1-mu)``.
    """
    if not 0 <= x < 1:
        raise ValueError(f"x must lie in [0, 1), got {x}")
    if mu >= 1 and float(mu).is_integer():
        k = int(mu)
        pref = (
            pochhammer((upsilon - k) / 2, k)
            * pochhammer((upsilon - k + 1) / 2, k)
            * x**k
            / math.factorial(k)
        )
        if pref == 0.0:
            return 0.0
        return pref * gauss_2f1((upsilon + k) / 2, (upsilon + k + 1) / 2, 1 + k, x)
    return gauss_2f1((upsilon - mu) / 2, (upsilon - mu + 1) / 2, 1 - mu, x) * float(
        special.rgamma(1 - mu)
    )


def ftr_rj_series(j: int, p: FtrParams) -> float:
    """``r_j`` from the closed double binomial sum.

    The sum alternates in sign and loses roughly ``0.3 j`` digits to
    cancellation, so it is only trustworthy for small ``j`` (about j <= 12
    for K ~ 4). It serves as a cross-check of :func:`ftr_rj`.
    """
    m, K, D = p.m, p.big_k, p.delta
    x = p.omega_arg
    ups = j + m
    total = 0.0
    for k in range(j + 1):
        for l in range(k + 1):
            power = j + m + 2 * l - k
            if K == 0.0 and 2 * l - k != 0:
                continue
            if D == 0.0 and l > 0:
                continue
            log_mag = (
                math.lgamma(j + 1) - math.lgamma(k + 1) - math.lgamma(j - k + 1)
                + math.lgamma(k + 1) - math.lgamma(l + 1) - math.lgamma(k - l + 1)
                + math.lgamma(power) - power * math.log(m + K)
            )
            if 2 * l - k != 0:
                log_mag += (2 * l - k) * math.log(K)
            if l > 0:
                log_mag += 2 * l * math.log(D / 2)
            sign = -1.0 if k % 2 else 1.0
            total += sign * math.exp(log_mag) * omega(k - 2 * l, ups, x)
    return total


@lru_cache(maxsize=64)
def _log_rj_table(m: float, K: float, D: float, j_max: int) -> np.ndarray:
    # log r_j for j = 0..j_max from the phase average
    #   r_j = Gamma(j+m) E_a[(1 + D cos a)^j (m + K + K D cos a)^-(j+m)],
    # a uniform on the circle. The integrand is periodic and analytic, so
    # the trapezoid rule converges geometrically in the node count.
    j = np.arange(j_max + 1, dtype=float)[:, None]
    prev = None
    n = 64
    while True:
        a = 2.0 * np.pi * np.arange(n) / n
        c = np.cos(a)[None, :]
        with np.errstate(divide="ignore"):
            logf = special.xlogy(j, 1.0 + D * c) - (j + m) * np.log(m + K + K * D * c)
        cur = special.logsumexp(logf, axis=1) - math.log(n) + special.gammaln(j[:, 0] + m)
        if prev is not None and np.max(np.abs(cur - prev)) < 1e-14 * max(1.0, np.max(np.abs(cur))):
            break
        if n >= 1 << 16:
            break
        prev = cur
        n *= 2
    cur.setflags(write=False)
    return cur


def ftr_log_rj(j_max: int, p: FtrParams) -> np.ndarray:
    """``log r_j`` for ``j = 0..j_max`` (cached per parameter set)."""
    return _log_rj_table(float(p.m), float(p.big_k), float(p.delta), int(j_max))


def ftr_rj(j: int, p: FtrParams) -> float:
    """Mixture coefficient ``r_j`` of the FTR series."""
    return float(np.exp(ftr_log_rj(max(j, 1), p)[j]))


@lru_cache(maxsize=64)
def _weights(m: float, K: float, D: float, rel_tol: float, j_min: int, j_max: int):
    log_r = _log_rj_table(m, K, D, j_max)
    j = np.arange(j_max + 1, dtype=float)
    log_w = m * math.log(m) - math.lgamma(m) + special.xlogy(j, K) + log_r - special.gammaln(j + 1)
    w = np.exp(log_w)
    if K == 0.0:
        w[1:] = 0.0
    n = truncation_index(w, SeriesControl(rel_tol, j_min, j_max))
    w = w[:n].copy()
    w.setflags(write=False)
    return w


def ftr_weights(p: FtrParams, ctl: SeriesControl | None = None) -> np.ndarray:
    """Truncated mixture weights ``w_j``; they sum to one up to the tail."""
    ctl = ctl or SeriesControl()
    return _weights(float(p.m), float(p.big_k), float(p.delta), ctl.rel_tol, ctl.j_min, ctl.j_max)


def ftr_pdf(h, p: FtrParams, ctl: SeriesControl | None = None):
    """Density of the FTR power gain at ``h >= 0``."""
    w = ftr_weights(p, ctl)
    h = np.asarray(h, dtype=float)
    if np.any(h < 0):
        raise ValueError("h must be non-negative")
    theta = 2.0 * p.sigma_sq
    j = np.arange(len(w), dtype=float)
    hh = h[..., None]
    log_g = special.xlogy(j, hh / theta) - hh / theta - math.log(theta) - special.gammaln(j + 1)
    out = np.exp(log_g) @ w
    return float(out) if out.ndim == 0 else out


def ftr_cdf(h, p: FtrParams, ctl: SeriesControl | None = None):
    """Distribution function of the FTR power gain.

    Equal to ``1 - sum_j w_j Q(j+1, h / 2 sigma^2)`` with ``Q`` the regularised
    upper incomplete gamma function; evaluated through the complementary
    ``P = 1 - Q`` so that small ``h`` keeps full relative precision.
    """
    w = ftr_weights(p, ctl)
    h = np.asarray(h, dtype=float)
    if np.any(h < 0):
        raise ValueError("h must be non-negative")
    j = np.arange(len(w), dtype=float)
    out = special.gammainc(j + 1, h[..., None] / (2.0 * p.sigma_sq)) @ w
    out = np.clip(out, 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


def ftr_laplace(s, c, p: FtrParams, ctl: SeriesControl | None = None):
    """``E[exp(-s c H)]`` for the FTR power gain ``H``."""
    w = ftr_weights(p, ctl)
    s = np.asarray(s, dtype=float)
    c = np.asarray(c, dtype=float)
    if np.any(s < 0) or np.any(c < 0):
        raise ValueError("s and c must be non-negative")
    t = 2.0 * p.sigma_sq * s * c
    j = np.arange(len(w), dtype=float)
    out = np.exp(-(j + 1) * np.log1p(t)[..., None]) @ w
    return float(out) if out.ndim == 0 else out
