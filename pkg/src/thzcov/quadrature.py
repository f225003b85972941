"""Vectorised adaptive Gauss-Kronrod (G7/K15) integration.

The integrand is called with a 1-D array of abscissae and may return any
array whose *last* axis runs over those abscissae, so one pass integrates a
whole vector of related functions. All panels needing work in a round are
evaluated in a single call.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["QuadResult", "QuadratureError", "integrate"]

# QUADPACK qk15 abscissae and weights on [-1, 1].
_XK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

_NODES = np.concatenate([-_XK[:-1], _XK[::-1]])  # 15 nodes ascending
_KW = np.concatenate([_WK[:-1], _WK[::-1]])
_GW = np.zeros(15)
_GW[[1, 3, 5, 7, 9, 11, 13]] = np.concatenate([_WG[:-1], _WG[::-1]])


class QuadratureError(RuntimeError):
    """Raised when the subdivision budget is exhausted before tolerance."""


@dataclass
class QuadResult:
    value: np.ndarray | float
    error: float
    neval: int
    panel_values: np.ndarray  # integral over each initial panel


def integrate(f, points, epsabs=1e-8, epsrel=1e-8, limit=4000, sqrt_map=True, raise_on_fail=True):
    """Integrate ``f`` over ``[points[0], points[-1]]`` with breakpoints.

    Parameters
    ----------
    f : callable
        ``f(x) -> array`` with the last axis matching ``x``.
    points : sequence of float
        Increasing breakpoints including both end points. Each consecutive
        pair is an initial panel; zero-width panels are dropped.
    epsabs, epsrel : float
        Stop when the summed error estimate (max-norm over components) is
        below ``max(epsabs, epsrel * |I|)``.
    limit : int
        Maximum number of live panels.
    sqrt_map : bool
        Substitute ``x = a + (b - a) t^2`` on every initial panel. Removes
        ``sqrt(x - a)`` behaviour at the left end of a panel, which is what
        arc angles do just past a wall distance.
    """
    pts = np.asarray(points, dtype=float)
    widths = np.diff(pts)
    if np.any(widths < 0):
        raise ValueError("breakpoints must be non-decreasing")
    keep = widths > 0
    origin_a = pts[:-1]
    origin_w = widths
    n_init = len(widths)

    # live panels in t-space of their origin panel
    org = np.flatnonzero(keep)
    t0 = np.zeros(len(org))
    t1 = np.ones(len(org))
    done_val = None
    done_err = 0.0
    done_panel = None
    neval = 0

    def evaluate(org, t0, t1):
        half = 0.5 * (t1 - t0)
        mid = 0.5 * (t1 + t0)
        t = mid[:, None] + half[:, None] * _NODES[None, :]  # (P, 15)
        a = origin_a[org][:, None]
        w = origin_w[org][:, None]
        if sqrt_map:
            x = a + w * t * t
            jac = 2.0 * w * t * half[:, None]
        else:
            x = a + w * t
            jac = w * half[:, None]
        vals = np.asarray(f(x.ravel()))
        vals = vals.reshape(vals.shape[:-1] + x.shape)
        k = np.sum(vals * (jac * _KW), axis=-1)
        g = np.sum(vals * (jac * _GW), axis=-1)
        err = np.abs(k - g)
        if err.ndim > 1:
            err = err.reshape(-1, err.shape[-1]).max(axis=0)
        return k, err

    if len(org) == 0:
        return QuadResult(0.0, 0.0, 0, np.zeros(n_init))

    while True:
        k, err = evaluate(org, t0, t1)
        neval += 15 * len(org)
        if done_val is None:
            done_val = np.zeros(k.shape[:-1])
            done_panel = np.zeros(k.shape[:-1] + (n_init,))
        total_err = done_err + err.sum()
        tol = max(epsabs, epsrel * float(np.max(np.abs(done_val + k.sum(axis=-1)))))
        if total_err <= tol:
            retire = np.ones(len(org), bool)
        else:
            # retired panels never use more than half the remaining budget
            share = (t1 - t0) * origin_w[org]
            retire = err <= 0.5 * max(tol - done_err, 0.0) * share / share.sum()
            if 2 * np.count_nonzero(~retire) > limit:
                if raise_on_fail:
                    raise QuadratureError(
                        f"panel limit reached with error estimate {total_err:.3g} > {tol:.3g}"
                    )
                retire[:] = True
        kr = k[..., retire]
        done_val = done_val + kr.sum(axis=-1)
        done_err += float(err[retire].sum())
        np.add.at(done_panel.T, org[retire], kr.T)
        if np.all(retire):
            break
        org, t0, t1 = org[~retire], t0[~retire], t1[~retire]
        mid = 0.5 * (t0 + t1)
        org = np.concatenate([org, org])
        t0, t1 = np.concatenate([t0, mid]), np.concatenate([mid, t1])

    value = done_val if np.ndim(done_val) else float(done_val)
    return QuadResult(value, float(done_err), neval, done_panel)
