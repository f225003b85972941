"""Scene-level Monte Carlo simulator for the indoor THz downlink.

Trials are processed in fixed-size blocks. Block ``b`` draws from its own
Philox stream whose counter starts at ``b << 192``, so any trial's random
numbers depend only on ``(seed, block_size, b)``; the thread count only
changes which worker runs a block, never the result. Per-block integer
tallies are summed in block order.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .analysis import ap_hit_prob, ue_horizontal_hit_prob, ue_vertical_reach
from .channel import AntennaParams, SystemParams, link_constant, lobe_gains, path_gain
from .geometry import RoomGeometry
from .specfun import FtrParams

__all__ = [
    "Scene",
    "SimConfig",
    "DistanceHistogram",
    "block_rng",
    "sample_scene",
    "is_los",
    "sample_ftr",
    "simulate_coverage",
    "simulate_conditional_coverage",
    "simulate_distance_pdf",
    "simulate_hitting",
]

THREADS_ENV = "THZCOV_THREADS"


@dataclass
class SimConfig:
    trials: int = 1_000_000
    seed: int = 0
    blockage_mode: Literal["bernoulli", "cylinder"] = "bernoulli"
    beam_mode: Literal["probabilistic", "geometric"] = "probabilistic"
    block_size: int = 20_000
    threads: int | None = None

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.blockage_mode not in ("bernoulli", "cylinder"):
            raise ValueError(f"unknown blockage mode {self.blockage_mode!r}")
        if self.beam_mode not in ("probabilistic", "geometric"):
            raise ValueError(f"unknown beam mode {self.beam_mode!r}")

    def n_threads(self) -> int:
        if self.threads is not None:
            return max(1, int(self.threads))
        return max(1, int(os.environ.get(THREADS_ENV, "1")))


@dataclass
class Scene:
    ap_positions: np.ndarray
    blocker_positions: np.ndarray
    ue_position: np.ndarray
    rng_state: dict = field(repr=False, default_factory=dict)


def block_rng(seed: int, block: int) -> np.random.Generator:
    """Independent counter-based stream for block ``block``."""
    counter = np.array([0, 0, 0, block], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=seed & (2**64 - 1), counter=counter))


def _run_blocks(fn, cfg: SimConfig):
    sizes = [cfg.block_size] * (cfg.trials // cfg.block_size)
    if cfg.trials % cfg.block_size:
        sizes.append(cfg.trials % cfg.block_size)
    jobs = list(enumerate(sizes))
    threads = cfg.n_threads()
    if threads == 1:
        return [fn(block_rng(cfg.seed, b), n) for b, n in jobs]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda job: fn(block_rng(cfg.seed, job[0]), job[1]), jobs))


def _wrap(a):
    return (a + np.pi) % (2 * np.pi) - np.pi


# --------------------------------------------------------------------------
# single scenes


def sample_scene(room: RoomGeometry, sys: SystemParams, rng: np.random.Generator) -> Scene:
    """Poisson APs and blocker centres, uniform in the room."""
    area = room.r_x * room.r_y
    state = rng.bit_generator.state
    n_ap = rng.poisson(sys.lambda_a * area)
    aps = np.column_stack([rng.uniform(0, room.r_x, n_ap), rng.uniform(0, room.r_y, n_ap)])
    n_b = rng.poisson(sys.lambda_b * area)
    blockers = np.column_stack([rng.uniform(0, room.r_x, n_b), rng.uniform(0, room.r_y, n_b)])
    return Scene(aps, blockers, np.array(room.ue_position), state)


def _cylinder_blocked(ue, ap, blockers, sys: SystemParams, r_b: float):
    # Blockage zone: points within r_b of the ground segment from the UE towards
    # the AP, cut where the ray drops below the blocker height.
    v = ap - ue
    d = math.hypot(*v)
    if len(blockers) == 0 or d == 0:
        return False
    u = v / d
    length = d * (sys.h_b - sys.h_u) / sys.delta_h
    rel = blockers - ue
    t = np.clip(rel @ u, 0.0, length)
    dist = np.hypot(*(rel - t[:, None] * u).T)
    return bool(np.any(dist < r_b))


def is_los(scene: Scene, ap_index: int, sys: SystemParams, mode="cylinder", rng=None) -> bool:
    """LoS state of one AP-UE link in ``scene``.

    ``cylinder`` tests the scene's blockers geometrically; ``bernoulli`` draws
    an independent LoS event with probability ``exp(-alpha d)`` from ``rng``.
    """
    ap = scene.ap_positions[ap_index]
    if mode == "cylinder":
        return not _cylinder_blocked(scene.ue_position, ap, scene.blocker_positions, sys, sys.r_b)
    if mode == "bernoulli":
        if rng is None:
            raise ValueError("bernoulli mode needs an rng")
        d = math.hypot(*(ap - scene.ue_position))
        return bool(rng.random() < math.exp(-sys.alpha * d))
    raise ValueError(f"unknown blockage mode {mode!r}")


def sample_ftr(p: FtrParams, rng: np.random.Generator, size=None):
    """Draw FTR power gains from the two-wave-plus-diffuse construction.

    Only the relative phase of the two specular waves matters: a common
    rotation is absorbed by the circularly symmetric diffuse term.
    """
    root = math.sqrt(max(1.0 - p.delta**2, 0.0))
    v1 = math.sqrt(p.sigma_sq * p.big_k * (1 + root))
    v2 = math.sqrt(p.sigma_sq * p.big_k * (1 - root))
    zeta = rng.gamma(p.m, 1.0 / p.m, size)
    ph = rng.uniform(0, 2 * np.pi, size)
    sd = math.sqrt(p.sigma_sq)
    amp = np.sqrt(zeta)
    re = amp * (v1 + v2 * np.cos(ph)) + rng.normal(0, sd, size)
    im = amp * (v2 * np.sin(ph)) + rng.normal(0, sd, size)
    return re * re + im * im


# --------------------------------------------------------------------------
# vectorised blocks


def _sample_aps(room, sys, rng, n):
    counts = rng.poisson(sys.lambda_a * room.r_x * room.r_y, n)
    tot = int(counts.sum())
    trial = np.repeat(np.arange(n), counts)
    x = rng.uniform(0, room.r_x, tot)
    y = rng.uniform(0, room.r_y, tot)
    return trial, x, y


def _los_mask(room, sys, rng, n, trial, x, y, mode):
    ux, uy = room.ue_position
    d = np.hypot(x - ux, y - uy)
    if mode == "bernoulli":
        return rng.random(len(d)) < np.exp(-sys.alpha * d)
    # cylinder: test every (AP, blocker) pair of the same trial
    nb = rng.poisson(sys.lambda_b * room.r_x * room.r_y, n)
    bx = rng.uniform(0, room.r_x, int(nb.sum())) - ux
    by = rng.uniform(0, room.r_y, int(nb.sum())) - uy
    start = np.concatenate([[0], np.cumsum(nb)[:-1]])
    per_ap = nb[trial]
    ap_idx = np.repeat(np.arange(len(d)), per_ap)
    offs = np.arange(len(ap_idx)) - np.repeat(np.cumsum(per_ap) - per_ap, per_ap)
    b_idx = start[trial[ap_idx]] + offs
    safe = np.where(d > 0, d, 1.0)
    ex, ey = (x - ux) / safe, (y - uy) / safe
    length = d * (sys.h_b - sys.h_u) / sys.delta_h
    px, py = bx[b_idx], by[b_idx]
    t = np.clip(px * ex[ap_idx] + py * ey[ap_idx], 0.0, length[ap_idx])
    hit = np.hypot(px - t * ex[ap_idx], py - t * ey[ap_idx]) < sys.r_b
    blocked = np.bincount(ap_idx, weights=hit, minlength=len(d)) > 0
    return ~blocked


def _nearest(n, trial, d, los):
    dl = np.where(los, d, np.inf)
    dmin = np.full(n, np.inf)
    np.minimum.at(dmin, trial, dl)
    assoc = los & (d == dmin[trial])
    return dmin, assoc


def simulate_distance_pdf(room: RoomGeometry, sys: SystemParams, cfg: SimConfig, bin_width: float):
    """Histogram of the nearest-LoS-AP distance; void scenes tallied apart."""
    if not bin_width > 0:
        raise ValueError("bin_width must be positive")
    dmax = max(room.corner_distances())
    edges = np.arange(0.0, dmax + bin_width, bin_width)

    def block(rng, n):
        trial, x, y = _sample_aps(room, sys, rng, n)
        d = np.hypot(x - room.ue_position[0], y - room.ue_position[1])
        los = _los_mask(room, sys, rng, n, trial, x, y, cfg.blockage_mode)
        dmin, _ = _nearest(n, trial, d, los)
        ok = np.isfinite(dmin)
        return np.histogram(dmin[ok], edges)[0], int(np.count_nonzero(~ok))

    parts = _run_blocks(block, cfg)
    counts = np.sum([p[0] for p in parts], axis=0)
    void = sum(p[1] for p in parts)
    return DistanceHistogram(edges, counts, void, cfg.trials)


@dataclass
class DistanceHistogram:
    edges: np.ndarray
    counts: np.ndarray
    void: int
    trials: int

    @property
    def centers(self):
        return 0.5 * (self.edges[1:] + self.edges[:-1])

    @property
    def prob(self):
        return self.counts / self.trials

    @property
    def density(self):
        return self.prob / np.diff(self.edges)

    @property
    def stderr(self):
        """Standard error of ``density`` per bin."""
        p = self.prob
        return np.sqrt(p * (1 - p) / self.trials) / np.diff(self.edges)

    @property
    def void_fraction(self):
        return self.void / self.trials


def _interference_gains(room, sys, ap, ue, rng, trial, x, y, d, dmin, intf, beam_mode, az0):
    """Gain-combination index (0..3 = AmUm, AmUs, AsUm, AsUs) per interferer."""
    idx = np.flatnonzero(intf)
    owner = trial[idx]
    d0 = dmin[owner]
    di = d[idx]
    if beam_mode == "probabilistic":
        tx_main = rng.random(len(idx)) < ap_hit_prob(ap, sys)
        p_h = np.zeros(len(dmin))
        has = np.isfinite(dmin)
        if np.any(has):
            p_h[has] = ue_horizontal_hit_prob(room, ue, dmin[has])
        p_u = (di <= ue_vertical_reach(ue, sys, d0)) * p_h[owner]
        rx_main = rng.random(len(idx)) < p_u
    else:
        ux, uy = room.ue_position
        phi_ap = math.atan(sys.delta_h / ap.r_cov)
        dep = rng.uniform(phi_ap, np.pi / 2, len(idx))
        az = rng.uniform(0, 2 * np.pi, len(idx))
        az_to_ue = np.arctan2(uy - y[idx], ux - x[idx])
        dep_to_ue = np.arctan2(sys.delta_h, di)
        tx_main = (np.abs(_wrap(az - az_to_ue)) < ap.phi_h / 2) & (
            np.abs(dep - dep_to_ue) < ap.phi_v / 2
        )
        az_i = np.arctan2(y[idx] - uy, x[idx] - ux)
        rx_main = (np.abs(_wrap(az_i - az0[trial[idx]])) < ue.phi_h / 2) & (
            di <= ue_vertical_reach(ue, sys, d0)
        )
    return idx, 2 * (~tx_main) + (~rx_main)


def _sinr_block(room, sys, ap, ue, ftr, beta, cfg, rng, n, pinned_d0=None):
    ux, uy = room.ue_position
    combo_c = link_constant(
        np.array([a * u for a in lobe_gains(ap) for u in lobe_gains(ue)]), 1.0, sys
    )
    trial, x, y = _sample_aps(room, sys, rng, n)
    if pinned_d0 is not None:
        # serving AP at a fixed distance in a uniformly random in-room direction
        ang = _sample_arc_angles(room, pinned_d0, rng, n)
        x = np.concatenate([ux + pinned_d0 * np.cos(ang), x])
        y = np.concatenate([uy + pinned_d0 * np.sin(ang), y])
        trial = np.concatenate([np.arange(n), trial])
    d = np.hypot(x - ux, y - uy)
    los = _los_mask(room, sys, rng, n, trial, x, y, cfg.blockage_mode)
    if pinned_d0 is not None:
        los[:n] = True
        los[n:] &= d[n:] > pinned_d0
        dmin = np.full(n, float(pinned_d0))
        assoc = np.zeros(len(d), bool)
        assoc[:n] = True
    else:
        dmin, assoc = _nearest(n, trial, d, los)
    h = np.zeros(len(d))
    h[los] = sample_ftr(ftr, rng, int(np.count_nonzero(los)))
    has = np.isfinite(dmin)
    signal = np.zeros(n)
    signal[trial[assoc]] = combo_c[0] * path_gain(d[assoc], sys) * h[assoc]
    az0 = np.zeros(n)
    az0[trial[assoc]] = np.arctan2(y[assoc] - uy, x[assoc] - ux)
    intf = los & ~assoc
    idx, combo = _interference_gains(
        room, sys, ap, ue, rng, trial, x, y, d, dmin, intf, cfg.beam_mode, az0
    )
    power = combo_c[combo] * path_gain(d[idx], sys) * h[idx]
    interference = np.bincount(trial[idx], weights=power, minlength=n)
    beta = np.atleast_1d(np.asarray(beta, dtype=float))
    covered = has & (signal > beta[:, None] * (interference + sys.n0))
    return np.count_nonzero(covered, axis=1)


def _mean_stderr(hits, n: int):
    p = np.asarray(hits) / n
    se = np.sqrt(np.maximum(p * (1 - p), 0.0) / n)
    if p.ndim == 0:
        return float(p), float(se)
    return p, se


def _beta_result(hits, beta, n):
    hits = np.sum(hits, axis=0)
    return _mean_stderr(hits[0] if np.ndim(beta) == 0 else hits, n)


def simulate_coverage(room, sys, ap, ue, ftr, beta, cfg: SimConfig):
    """Empirical ``P(SINR > beta)`` and its standard error.

    Scenes without a LoS AP count as not covered. An array of thresholds is
    evaluated on the same scenes and gives arrays of estimates.
    """
    hits = _run_blocks(lambda rng, n: _sinr_block(room, sys, ap, ue, ftr, beta, cfg, rng, n), cfg)
    return _beta_result(hits, beta, cfg.trials)


def simulate_conditional_coverage(room, sys, ap, ue, ftr, beta, d0, cfg: SimConfig):
    """``P(SINR > beta | d0)`` with the serving AP pinned at distance ``d0``.

    APs nearer than ``d0`` are dropped: given the association event they are
    blocked and contribute nothing.
    """
    hits = _run_blocks(lambda rng, n: _sinr_block(room, sys, ap, ue, ftr, beta, cfg, rng, n, d0), cfg)
    return _beta_result(hits, beta, cfg.trials)


def _sample_arc_angles(room: RoomGeometry, d0: float, rng, n: int):
    # uniform angles on the in-room part of the radius-d0 circle, by rejection
    ux, uy = room.ue_position
    out = np.empty(0)
    while len(out) < n:
        a = rng.uniform(0, 2 * np.pi, max(2 * (n - len(out)), 1024))
        px, py = ux + d0 * np.cos(a), uy + d0 * np.sin(a)
        inside = (px >= 0) & (px <= room.r_x) & (py >= 0) & (py <= room.r_y)
        if not np.any(inside) and len(out) == 0 and d0 >= max(room.corner_distances()):
            raise ValueError("radius lies outside the room")
        out = np.concatenate([out, a[inside]])
    return out[:n]


def simulate_hitting(room: RoomGeometry, sys: SystemParams, ue: AntennaParams, d0: float, cfg: SimConfig):
    """Empirical probability that an interferer sits in the UE's horizontal beam.

    Both the serving AP and the interferer are uniform on the in-room arc of
    radius ``d0``; the beam test is an angular offset below ``phi_h / 2``.
    Returns ``(estimate, stderr)``.
    """

    def block(rng, n):
        a0 = _sample_arc_angles(room, d0, rng, n)
        a1 = _sample_arc_angles(room, d0, rng, n)
        return int(np.count_nonzero(np.abs(_wrap(a1 - a0)) < ue.phi_h / 2))

    return _mean_stderr(sum(_run_blocks(block, cfg)), cfg.trials)
