"""Arc geometry of a circle centred on the UE inside a rectangular room.

The room is split by the UE into four quadrant rectangles ``(i, j)`` of
size ``R_{X,i} x R_{Y,j}``. Quadrant ``(1, 1)`` lies towards the left and
front walls. All angle functions accept scalar or array radii.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

__all__ = [
    "RoomGeometry",
    "SegmentSet",
    "psi",
    "quadrant_angle",
    "quadrant_angles",
    "arc_angle",
    "arc_angle_and_length",
    "intersection_counts",
    "segment_count",
    "segment_angles",
    "segment_matrix",
    "max_corner_distance",
]


@dataclass(frozen=True)
class RoomGeometry:
    """Rectangular room and the UE position in it.

    ``delta_x`` and ``delta_y`` are the UE's fractional distances to the left
    and front walls.
    """

    r_x: float = 20.0
    r_y: float = 15.0
    delta_x: float = 0.5
    delta_y: float = 0.5

    def __post_init__(self):
        if not (self.r_x > 0 and self.r_y > 0):
            raise ValueError("room dimensions must be positive")
        if not (0 < self.delta_x < 1 and 0 < self.delta_y < 1):
            raise ValueError("UE placement fractions must lie in (0, 1)")

    @property
    def rx1(self) -> float:
        return self.delta_x * self.r_x

    @property
    def rx2(self) -> float:
        return self.r_x - self.rx1

    @property
    def ry1(self) -> float:
        return self.delta_y * self.r_y

    @property
    def ry2(self) -> float:
        return self.r_y - self.ry1

    @property
    def wall_distances(self) -> tuple[float, float, float, float]:
        """Distances to the (left, right, front, rear) walls."""
        return (self.rx1, self.rx2, self.ry1, self.ry2)

    @property
    def ue_position(self) -> tuple[float, float]:
        return (self.rx1, self.ry1)

    def corner_distances(self) -> tuple[float, float, float, float]:
        """Corner distances ordered (11, 12, 21, 22) by quadrant."""
        return tuple(
            float(np.hypot(a, b)) for a in (self.rx1, self.rx2) for b in (self.ry1, self.ry2)
        )

    def breakpoints(self) -> np.ndarray:
        """Sorted radii where the arc geometry changes analytic form."""
        pts = np.array(self.wall_distances + self.corner_distances())
        return np.unique(pts)


class SegmentSet(NamedTuple):
    angles: tuple[float, ...]
    count: int


def psi(a, b):
    """``arccos(a / b)`` when ``b > a``, else zero."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        ratio = np.where(b > a, a / np.where(b > 0, b, 1.0), 1.0)
    out = np.arccos(np.clip(ratio, -1.0, 1.0))
    return float(out) if out.ndim == 0 else out


def quadrant_angle(room: RoomGeometry, i: int, j: int, d):
    """Angle of the radius-``d`` arc lying inside quadrant ``(i, j)``."""
    rx = room.rx1 if i == 1 else room.rx2
    ry = room.ry1 if j == 1 else room.ry2
    out = np.maximum(np.pi / 2 - psi(rx, d) - psi(ry, d), 0.0)
    return float(out) if np.ndim(out) == 0 else out


def quadrant_angles(room: RoomGeometry, d) -> np.ndarray:
    """Stacked quadrant angles, shape ``(4, *d.shape)`` ordered 11, 12, 21, 22."""
    d = np.asarray(d, dtype=float)
    return np.stack([
        np.asarray(quadrant_angle(room, i, j, d)) for i in (1, 2) for j in (1, 2)
    ])


def arc_angle(room: RoomGeometry, d):
    """Total angle of the in-room part of the radius-``d`` circle."""
    out = quadrant_angles(room, d).sum(axis=0)
    return float(out) if out.ndim == 0 else out


def arc_angle_and_length(room: RoomGeometry, d):
    """Angle and length of the in-room arc of radius ``d``."""
    theta = arc_angle(room, d)
    if np.ndim(theta) == 0:
        return theta, theta * float(d)
    return theta, theta * np.asarray(d, dtype=float)


def _wall_indicators(room: RoomGeometry, d0):
    d0 = np.asarray(d0, dtype=float)
    return np.stack([d0 > r for r in room.wall_distances]).astype(int)


def _corner_indicators(room: RoomGeometry, d0):
    d0 = np.asarray(d0, dtype=float)
    return np.stack([d0 >= c for c in room.corner_distances()]).astype(int)


def intersection_counts(room: RoomGeometry, d0):
    """Crossings of the full radius-``d0`` circle with each wall.

    Returns ``(xi_x1, xi_x2, xi_y1, xi_y2, xi)``.
    """
    w = _wall_indicators(room, d0)
    c = _corner_indicators(room, d0)  # 11, 12, 21, 22
    xi_x1 = 2 * w[0] - c[0] - c[1]
    xi_x2 = 2 * w[1] - c[2] - c[3]
    xi_y1 = 2 * w[2] - c[0] - c[2]
    xi_y2 = 2 * w[3] - c[1] - c[3]
    total = xi_x1 + xi_x2 + xi_y1 + xi_y2
    out = (xi_x1, xi_x2, xi_y1, xi_y2, total)
    if np.ndim(d0) == 0:
        return tuple(int(v) for v in out)
    return out


def segment_count(room: RoomGeometry, d0):
    """Number of disjoint in-room arc segments at radius ``d0``."""
    w = _wall_indicators(room, d0)
    c = _corner_indicators(room, d0)
    inside = np.all(w == 0, axis=0).astype(int)
    out = w.sum(axis=0) - c.sum(axis=0) + inside
    return int(out) if np.ndim(d0) == 0 else out


# Segment composition keyed by the indicator bits (X1, X2, Y1, Y2). Each
# segment is a list of quadrant indices 0..3 = (11, 12, 21, 22); None marks
# the whole in-room arc as a single segment; ("rest", q) is the arc minus
# quadrant q.
_T11, _T12, _T21, _T22 = range(4)
_SEGMENT_TABLE = {
    (0, 0, 0, 0): None,
    (1, 0, 0, 0): None,
    (0, 1, 0, 0): None,
    (0, 0, 1, 0): None,
    (0, 0, 0, 1): None,
    (1, 1, 0, 0): [[_T11, _T21], [_T12, _T22]],
    (1, 0, 1, 0): [[_T11], ("rest", _T11)],
    (1, 0, 0, 1): [[_T12], ("rest", _T12)],
    (0, 1, 1, 0): [[_T21], ("rest", _T21)],
    (0, 1, 0, 1): [[_T22], ("rest", _T22)],
    (0, 0, 1, 1): [[_T11, _T12], [_T21, _T22]],
    (1, 1, 1, 0): [[_T11], [_T21], [_T12, _T22]],
    (1, 1, 0, 1): [[_T11, _T21], [_T12], [_T22]],
    (1, 0, 1, 1): [[_T11], [_T12], [_T21, _T22]],
    (0, 1, 1, 1): [[_T11, _T12], [_T21], [_T22]],
    (1, 1, 1, 1): [[_T11], [_T12], [_T21], [_T22]],
}


def segment_matrix(room: RoomGeometry, d0) -> np.ndarray:
    """Arc segment angles for an array of radii, zero padded to width 4.

    Row ``k`` lists the segments for ``d0[k]`` in table order; empty
    segments are left as zeros.
    """
    d0 = np.atleast_1d(np.asarray(d0, dtype=float))
    q = quadrant_angles(room, d0)  # (4, n)
    theta = q.sum(axis=0)
    bits = _wall_indicators(room, d0)  # (4, n)
    key = bits[0] * 8 + bits[1] * 4 + bits[2] * 2 + bits[3]
    out = np.zeros((len(d0), 4))
    for ind, layout in _SEGMENT_TABLE.items():
        sel = key == ind[0] * 8 + ind[1] * 4 + ind[2] * 2 + ind[3]
        if not np.any(sel):
            continue
        if layout is None:
            out[sel, 0] = theta[sel]
            continue
        for col, seg in enumerate(layout):
            if isinstance(seg, tuple):
                out[sel, col] = theta[sel] - q[seg[1], sel]
            else:
                out[sel, col] = q[seg, :][:, sel].sum(axis=0)
    # round-off can leave tiny negatives in theta - q
    out[out < 1e-15] = 0.0
    return out


def segment_angles(room: RoomGeometry, d0: float) -> SegmentSet:
    """Non-empty arc segment angles at radius ``d0``, in table order."""
    row = segment_matrix(room, d0)[0]
    angles = tuple(float(a) for a in row if a > 0)
    return SegmentSet(angles, len(angles))


def max_corner_distance(room: RoomGeometry) -> float:
    return max(room.corner_distances())
