"""Kernel-smoothed and empirical distribution functions.

A smooth CDF built on centers ``c_1..c_n`` with bandwidth ``h`` is

    F(z) = n^{-1} * sum_t G((z - c_t) / h),

where ``G`` is the integrated kernel.  Fed with true errors it is the
infeasible estimator; fed with residuals it is the plug-in estimator.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numba
import numpy as np

from .exceptions import DegenerateDataError

__all__ = [
    "Kernel",
    "QUARTIC",
    "quartic_density",
    "quartic_G",
    "SmoothCdf",
    "StepCdf",
    "bandwidth_rule",
    "iqr",
    "smooth_cdf",
    "step_cdf",
    "quantile",
    "evaluation_grid",
    "plot_grid",
    "write_cdf_csv",
    "GRID_POINTS",
]

GRID_POINTS = 512
# bounds the size of the (grid chunk x window) work array
_CHUNK_ELEMS = 1 << 21


def quartic_density(u):
    u = np.asarray(u, dtype=float)
    return np.where(np.abs(u) <= 1.0, 15.0 / 16.0 * (1.0 - u * u) ** 2, 0.0)


def quartic_G(u):
    """Integrated quartic kernel: 0 below -1, 1 above 1."""
    u = np.asarray(u, dtype=float)
    v = np.clip(u, -1.0, 1.0)
    v2 = v * v
    out = 0.5 + (15.0 / 16.0) * v * (1.0 - v2 * (2.0 / 3.0 - v2 / 5.0))
    out = np.where(u >= 1.0, 1.0, np.where(u <= -1.0, 0.0, out))
    return float(out) if out.ndim == 0 else out


@numba.njit(cache=True)
def _quartic_sum(c, z, h, out):
    # c sorted; for each z: #(c <= z - h) + sum of G over centers strictly within h
    n = c.size
    lo = 0
    hi = 0
    order = np.argsort(z)
    for k in range(z.size):
        i = order[k]
        zi = z[i]
        while lo < n and c[lo] <= zi - h:
            lo += 1
        if hi < lo:
            hi = lo
        while hi < n and c[hi] < zi + h:
            hi += 1
        s = 0.0
        for j in range(lo, hi):
            u = (zi - c[j]) / h
            if u >= 1.0:
                s += 1.0
            elif u > -1.0:
                u2 = u * u
                s += 0.5 + 0.9375 * u * (1.0 - u2 * (2.0 / 3.0 - u2 / 5.0))
        out[i] = (lo + s) / n


@dataclass(frozen=True)
class Kernel:
    """Symmetric density supported on [-1, 1] together with its antiderivative."""

    name: str
    density: Callable
    integrated: Callable


QUARTIC = Kernel("quartic", quartic_density, quartic_G)


class SmoothCdf:
    """Kernel distribution estimator; immutable after construction."""

    def __init__(self, centers, h: float, kernel: Kernel = QUARTIC):
        c = np.sort(np.asarray(centers, dtype=float).reshape(-1))
        if c.size < 1:
            raise ValueError("need at least one center")
        if not (h > 0 and np.isfinite(h)):
            raise ValueError("bandwidth must be positive and finite")
        c.flags.writeable = False
        self.centers = c
        self.h = float(h)
        self.kernel = kernel

    @property
    def n(self) -> int:
        return self.centers.size

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        flat = np.ascontiguousarray(z.reshape(-1))
        out = np.empty(flat.size)
        if self.kernel is QUARTIC and not np.isnan(flat).any():
            _quartic_sum(self.centers, flat, self.h, out)
            return float(out[0]) if z.ndim == 0 else out.reshape(z.shape)
        c, h, n = self.centers, self.h, self.centers.size
        lo = np.searchsorted(c, flat - h, side="right")
        hi = np.searchsorted(c, flat + h, side="left")
        width = int((hi - lo).max()) if flat.size else 0
        if width == 0:
            out[:] = lo
        else:
            step = max(1, _CHUNK_ELEMS // width)
            offs = np.arange(width)
            G = self.kernel.integrated
            for s in range(0, flat.size, step):
                sl = slice(s, s + step)
                l, u = lo[sl], hi[sl]
                idx = l[:, None] + offs
                inside = idx < u[:, None]
                cc = c[np.minimum(idx, n - 1)]
                vals = np.where(inside, G((flat[sl, None] - cc) / h), 0.0)
                # centers at or below z - h contribute a full unit each
                out[sl] = l + vals.sum(axis=1)
        out /= n
        return float(out[0]) if z.ndim == 0 else out.reshape(z.shape)

    def support(self) -> tuple[float, float]:
        return float(self.centers[0] - self.h), float(self.centers[-1] + self.h)

    def grid(self) -> np.ndarray:
        return evaluation_grid(self)

    def __repr__(self):
        return f"SmoothCdf(n={self.n}, h={self.h:.6g}, kernel={self.kernel.name})"


class StepCdf:
    """Right-continuous empirical CDF."""

    def __init__(self, points):
        pts = np.sort(np.asarray(points, dtype=float).reshape(-1))
        if pts.size < 1:
            raise ValueError("need at least one point")
        pts.flags.writeable = False
        self.sorted_points = pts

    @property
    def n(self) -> int:
        return self.sorted_points.size

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        out = np.searchsorted(self.sorted_points, z, side="right") / self.n
        return float(out) if z.ndim == 0 else out

    def left_limit(self, z):
        z = np.asarray(z, dtype=float)
        out = np.searchsorted(self.sorted_points, z, side="left") / self.n
        return float(out) if z.ndim == 0 else out

    @property
    def jumps(self) -> np.ndarray:
        return np.unique(self.sorted_points)

    def grid(self) -> np.ndarray:
        return self.jumps

    def __repr__(self):
        return f"StepCdf(n={self.n})"


def iqr(x) -> float:
    """Interquartile range with linearly interpolated order statistics ((k-1)/(n-1) positions)."""
    q1, q3 = np.percentile(np.asarray(x, dtype=float), [25.0, 75.0], method="linear")
    return float(q3 - q1)


def bandwidth_rule(residuals) -> float:
    """``h = IQR * n^(-1/3)``."""
    r = np.asarray(residuals, dtype=float).reshape(-1)
    if r.size < 4:
        raise ValueError(f"bandwidth rule needs at least 4 values, got {r.size}")
    spread = iqr(r)
    if not spread > 0:
        raise DegenerateDataError("degenerate residual spread: interquartile range is zero")
    return spread * r.size ** (-1.0 / 3.0)


def smooth_cdf(centers, h: float, kernel: Kernel = QUARTIC) -> SmoothCdf:
    return SmoothCdf(centers, h, kernel)


def step_cdf(points) -> StepCdf:
    return StepCdf(points)


def quantile(cdf: SmoothCdf, alpha: float, tol: float = 1e-10) -> float:
    """Smallest ``z`` with ``cdf(z) >= alpha``, by bisection on the support."""
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie strictly between 0 and 1")
    lo, hi = cdf.support()
    for _ in range(400):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if cdf(mid) >= alpha:
            hi = mid
        else:
            lo = mid
    return hi


def plot_grid(cdf, points: int = GRID_POINTS) -> np.ndarray:
    if isinstance(cdf, SmoothCdf):
        lo, hi = cdf.centers[0] - 3 * cdf.h, cdf.centers[-1] + 3 * cdf.h
    else:
        pts = cdf.sorted_points
        pad = 0.05 * max(pts[-1] - pts[0], 1.0)
        lo, hi = pts[0] - pad, pts[-1] + pad
    return np.linspace(lo, hi, points)


def evaluation_grid(cdf: SmoothCdf) -> np.ndarray:
    """Sorted centers, centers -/+ h, and 512 points spanning [min - 3h, max + 3h]."""
    c, h = cdf.centers, cdf.h
    return np.unique(np.concatenate([c, c - h, c + h, plot_grid(cdf)]))


def write_cdf_csv(path, z, values, header=("z", "F")) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in zip(z, values):
            w.writerow([repr(float(v)) for v in row])
