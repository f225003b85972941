"""Scenario defaults and JSON parameter handling.

Flat parameter maps use linear SI units except for keys ending in ``_db``
(dB / dBm / dBi) or ``_deg`` (degrees), which are converted here and
nowhere else.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .channel import AntennaParams, SystemParams, dbm_to_watt, db_to_linear
from .geometry import RoomGeometry
from .specfun import FtrParams, SeriesControl

__all__ = [
    "PLACEMENTS",
    "DEFAULTS",
    "Scenario",
    "resolve_params",
    "scenario_from_params",
    "default_scenario",
]

PLACEMENTS = {
    "corner": (1 / 20, 1 / 15),
    "near_center": (1 / 5, 1 / 5),
    "center": (1 / 2, 1 / 2),
}

# Indoor THz reference deployment. ``ftr_delta`` has no published value;
# 0.5 is a modelling choice.
DEFAULTS = {
    "lambda_a": 0.1,
    "lambda_b": 0.1,
    "r_b": 0.25,
    "h_a": 3.0,
    "h_u": 1.0,
    "h_b": 1.7,
    "r_x": 20.0,
    "r_y": 15.0,
    "placement": "center",
    "freq": 300e9,
    "bandwidth": 5e9,
    "absorption": 0.00143,
    "p_t_db": 5.0,
    "n0_db": -77.0,
    "beta_db": 10.0,
    "ftr_m": 2.0,
    "ftr_k": 4.0,
    "ftr_sigma_sq": 0.1,
    "ftr_delta": 0.5,
    "ap_phi_h_deg": 10.0,
    "ap_phi_v_deg": 10.0,
    "ap_k": 0.1,
    "ap_r_cov": 20.0,
    "ue_phi_h_deg": 33.0,
    "ue_phi_v_deg": 33.0,
    "ue_k": 0.1,
    "rel_tol": 1e-12,
    "j_min": 20,
    "j_max": 200,
}


def resolve_params(overrides: dict | None = None, base: dict | None = None) -> dict:
    """Merge ``overrides`` into ``base`` (default: :data:`DEFAULTS`).

    A key given in its linear form replaces the ``_db``/``_deg`` form and
    vice versa, so ``{"beta": 100}`` overrides ``beta_db``.
    """
    out = dict(DEFAULTS if base is None else base)
    for key, value in (overrides or {}).items():
        for suffix in ("_db", "_deg"):
            if key.endswith(suffix):
                out.pop(key[: -len(suffix)], None)
            else:
                out.pop(key + suffix, None)
        out[key] = value
    unknown = set(out) - _known_keys()
    if unknown:
        raise KeyError(f"unknown parameter(s): {', '.join(sorted(unknown))}")
    return out


def _known_keys():
    keys = set(DEFAULTS) | {"delta_x", "delta_y", "r_y_ratio"}
    for k in list(DEFAULTS):
        for suffix in ("_db", "_deg"):
            if k.endswith(suffix):
                keys.add(k[: -len(suffix)])
    return keys


def _linear(p: dict, key: str, conv) -> float:
    if key in p:
        return float(p[key])
    return float(conv(p[key + "_db"]))


def _angle(p: dict, key: str) -> float:
    if key in p:
        return float(p[key])
    return math.radians(float(p[key + "_deg"]))


@dataclass(frozen=True)
class Scenario:
    room: RoomGeometry
    sys: SystemParams
    ap: AntennaParams
    ue: AntennaParams
    ftr: FtrParams
    ctl: SeriesControl

    @property
    def beta(self) -> float:
        return self.sys.beta


def scenario_from_params(p: dict) -> Scenario:
    """Build typed parameter objects from a resolved flat parameter map."""
    if "delta_x" in p or "delta_y" in p:
        dx, dy = float(p["delta_x"]), float(p["delta_y"])
    else:
        try:
            dx, dy = PLACEMENTS[p["placement"]]
        except KeyError:
            raise ValueError(f"unknown placement {p['placement']!r}") from None
    r_x = float(p["r_x"])
    r_y = r_x * float(p["r_y_ratio"]) if "r_y_ratio" in p else float(p["r_y"])
    room = RoomGeometry(r_x, r_y, dx, dy)
    sys = SystemParams(
        lambda_a=float(p["lambda_a"]),
        lambda_b=float(p["lambda_b"]),
        r_b=float(p["r_b"]),
        h_a=float(p["h_a"]),
        h_u=float(p["h_u"]),
        h_b=float(p["h_b"]),
        freq=float(p["freq"]),
        absorption=float(p["absorption"]),
        p_t=_linear(p, "p_t", dbm_to_watt),
        n0=_linear(p, "n0", dbm_to_watt),
        beta=_linear(p, "beta", db_to_linear),
        bandwidth=float(p["bandwidth"]),
    )
    ap = AntennaParams(
        _angle(p, "ap_phi_h"), _angle(p, "ap_phi_v"), float(p["ap_k"]), float(p["ap_r_cov"])
    )
    ue = AntennaParams(_angle(p, "ue_phi_h"), _angle(p, "ue_phi_v"), float(p["ue_k"]))
    ftr = FtrParams(
        float(p["ftr_m"]), float(p["ftr_k"]), float(p["ftr_delta"]), float(p["ftr_sigma_sq"])
    )
    ctl = SeriesControl(float(p["rel_tol"]), int(p["j_min"]), int(p["j_max"]))
    return Scenario(room, sys, ap, ue, ftr, ctl)


def default_scenario(**overrides) -> Scenario:
    """Reference scenario with optional flat-key overrides."""
    return scenario_from_params(resolve_params(overrides))
