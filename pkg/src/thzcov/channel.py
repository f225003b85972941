"""Large-scale THz link model: path gain, blockage, sectored antenna gains."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

__all__ = [
    "SPEED_OF_LIGHT",
    "SystemParams",
    "AntennaParams",
    "db_to_linear",
    "linear_to_db",
    "dbm_to_watt",
    "lobe_gains",
    "check_lobe_gains",
    "path_gain",
    "los_probability",
    "link_constant",
]

SPEED_OF_LIGHT = 3e8


def db_to_linear(x):
    return 10.0 ** (np.asarray(x, dtype=float) / 10.0)


def linear_to_db(x):
    return 10.0 * np.log10(x)


def dbm_to_watt(x):
    return 1e-3 * db_to_linear(x)


@dataclass(frozen=True)
class SystemParams:
    """Deployment and link-budget parameters, all in linear SI units.

    ``absorption`` is the molecular absorption coefficient in 1/m. ``beta``
    is the default SINR threshold; ``bandwidth`` is carried for record only.
    """

    lambda_a: float = 0.1
    lambda_b: float = 0.1
    r_b: float = 0.25
    h_a: float = 3.0
    h_u: float = 1.0
    h_b: float = 1.7
    freq: float = 300e9
    absorption: float = 0.00143
    p_t: float = float(dbm_to_watt(5.0))
    n0: float = float(dbm_to_watt(-77.0))
    beta: float = 10.0
    bandwidth: float = 5e9

    def __post_init__(self):
        if not self.h_a > self.h_b > self.h_u > 0:
            raise ValueError("heights must satisfy h_a > h_b > h_u > 0")
        for name in ("lambda_a", "lambda_b", "r_b", "absorption", "p_t", "n0"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if not self.freq > 0:
            raise ValueError("freq must be positive")

    @property
    def delta_h(self) -> float:
        return self.h_a - self.h_u

    @property
    def alpha(self) -> float:
        """Exponent of the human-blockage LoS probability, per metre."""
        return 2.0 * self.lambda_b * self.r_b * (self.h_b - self.h_u) / (self.h_a - self.h_u)


@dataclass(frozen=True)
class AntennaParams:
    """Two-level sectored antenna. ``r_cov`` is only used on the AP side."""

    phi_h: float
    phi_v: float
    k_ratio: float
    r_cov: float | None = None

    def __post_init__(self):
        for name in ("phi_h", "phi_v"):
            v = getattr(self, name)
            if not 0 < v < math.pi:
                raise ValueError(f"{name} must lie in (0, pi), got {v}")
        if not self.k_ratio > 0:
            raise ValueError("k_ratio must be positive")


def lobe_gains(a: AntennaParams) -> tuple[float, float]:
    """Main- and side-lobe gains (linear) of the pyramidal sectored pattern."""
    arg = math.tan(a.phi_h / 2) * math.tan(a.phi_v / 2)
    if arg > 1:
        raise ValueError(f"beam too wide: tan(phi_h/2) tan(phi_v/2) = {arg:.4f} > 1")
    solid = math.asin(arg)
    main = math.pi / ((1 + a.k_ratio) * solid)
    side = math.pi * a.k_ratio / ((1 + a.k_ratio) * (math.pi - solid))
    return main, side


def check_lobe_gains(a: AntennaParams, main_db: float | None, side_db: float | None, tol_db=1.0):
    """Warn when tabulated gains disagree with the beam-width formulas."""
    main, side = lobe_gains(a)
    for label, given, computed in (("main", main_db, main), ("side", side_db, side)):
        if given is None:
            continue
        gap = abs(given - float(linear_to_db(computed)))
        if gap > tol_db:
            warnings.warn(
                f"{label}-lobe gain {given:.2f} dBi differs from beam-width value "
                f"{float(linear_to_db(computed)):.2f} dBi by {gap:.2f} dB",
                stacklevel=2,
            )


def path_gain(d, sys: SystemParams):
    """Spreading times absorption gain at horizontal distance ``d`` (no c^2/(4 pi f)^2)."""
    d = np.asarray(d, dtype=float)
    r2 = d * d + sys.delta_h**2
    out = np.exp(-sys.absorption * np.sqrt(r2)) / r2
    return float(out) if out.ndim == 0 else out


def los_probability(d, sys: SystemParams):
    """Probability that no human body blocks a link of horizontal length ``d``."""
    out = np.exp(-sys.alpha * np.asarray(d, dtype=float))
    return float(out) if out.ndim == 0 else out


def link_constant(g_tx, g_rx, sys: SystemParams):
    """``P_t G_tx G_rx c^2 / (4 pi f)^2``."""
    return sys.p_t * g_tx * g_rx * (SPEED_OF_LIGHT / (4 * math.pi * sys.freq)) ** 2
