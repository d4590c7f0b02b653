"""Bivariate local-linear (LOWESS-style) surface smoother.

Each grid node gets its own weighted plane fitted to the ``ceil(span * n)``
nearest observations, distances measured after scaling each axis by its
standard deviation, with tricube weights ``(1 - (d / d_max)^3)^3`` where
``d_max`` is the distance to the farthest neighbour used. No robustness
iterations.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

COND_TOL = 1e-10


class DegenerateNeighborhood(UserWarning):
    """Local design was singular; the node fell back to a weighted mean."""


@dataclass(frozen=True)
class SmoothSpec:
    span: float = 0.3
    grid: tuple[int, int] = (25, 25)

    def __post_init__(self):
        if not 0.0 < self.span <= 1.0:
            raise ValueError(f"span must lie in (0, 1], got {self.span!r}")
        if len(self.grid) != 2 or min(self.grid) < 2:
            raise ValueError(f"grid dimensions must be at least 2x2, got {self.grid!r}")


@dataclass(frozen=True)
class SmoothResult:
    x1: np.ndarray  # node coordinates along the first axis
    x2: np.ndarray
    fitted: np.ndarray  # shape (len(x1), len(x2))
    degenerate: np.ndarray  # bool mask, same shape as fitted

    def rows(self):
        for i, u in enumerate(self.x1):
            for j, v in enumerate(self.x2):
                yield float(u), float(v), float(self.fitted[i, j]), bool(self.degenerate[i, j])


def tricube(d: np.ndarray, d_max: float) -> np.ndarray:
    if d_max <= 0.0:
        return np.ones_like(d)
    r = np.clip(d / d_max, 0.0, 1.0)
    return (1.0 - r**3) ** 3


def _axis_scale(x: np.ndarray) -> float:
    s = float(np.std(x))
    return s if s > 0.0 else 1.0


def local_fit(
    x1: np.ndarray, x2: np.ndarray, y: np.ndarray, node: tuple[float, float], q: int, scales: tuple[float, float]
) -> tuple[float, bool]:
    """Value of the local plane at ``node`` and whether the fallback was used."""
    z1 = (x1 - node[0]) / scales[0]
    z2 = (x2 - node[1]) / scales[1]
    d = np.hypot(z1, z2)
    idx = np.argsort(d, kind="stable")[:q]
    w = tricube(d[idx], float(d[idx].max()))
    A = np.column_stack([np.ones(q), z1[idx], z2[idx]])
    sw = np.sqrt(w)
    Aw = A * sw[:, None]
    sv = np.linalg.svd(Aw, compute_uv=False)
    if len(sv) < 3 or sv[0] == 0.0 or sv[-1] <= COND_TOL * sv[0]:
        wsum = w.sum()
        val = float(np.dot(w, y[idx]) / wsum) if wsum > 0 else float(np.mean(y[idx]))
        return val, True
    beta, *_ = np.linalg.lstsq(Aw, y[idx] * sw, rcond=None)
    # the node is the origin of the centred design
    return float(beta[0]), False


def lowess_surface(x1, x2, y, spec: SmoothSpec = SmoothSpec()) -> SmoothResult:
    """Fit the surface on a regular grid spanning the data's bounding box."""
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    y = np.asarray(y, dtype=float)
    n = len(y)
    if not (len(x1) == len(x2) == n) or n == 0:
        raise ValueError("x1, x2 and y must be nonempty and of equal length")
    q = min(n, max(1, math.ceil(spec.span * n)))
    scales = (_axis_scale(x1), _axis_scale(x2))
    g1 = np.linspace(x1.min(), x1.max(), spec.grid[0])
    g2 = np.linspace(x2.min(), x2.max(), spec.grid[1])
    fitted = np.empty(spec.grid)
    degenerate = np.zeros(spec.grid, dtype=bool)
    for i, u in enumerate(g1):
        for j, v in enumerate(g2):
            fitted[i, j], degenerate[i, j] = local_fit(x1, x2, y, (u, v), q, scales)
    if degenerate.any():
        warnings.warn(
            f"{int(degenerate.sum())} of {degenerate.size} grid nodes had a singular local design "
            f"(span={spec.span}, n={n}); used the weighted mean there",
            DegenerateNeighborhood,
            stacklevel=2,
        )
    return SmoothResult(g1, g2, fitted, degenerate)
