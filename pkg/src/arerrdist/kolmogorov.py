"""Kolmogorov limit law and simultaneous confidence bands for an error CDF."""
from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Callable, Union

import numpy as np

from .kcdf import SmoothCdf, StepCdf

__all__ = [
    "Band",
    "SmallSampleWarning",
    "kolmogorov_cdf",
    "kolmogorov_cdf_alternating",
    "kolmogorov_cdf_theta",
    "kolmogorov_quantile",
    "build_band",
    "covers",
    "write_band_csv",
    "MIN_BAND_N",
]

MIN_BAND_N = 50
_TERM_TOL = 1e-14
_MAX_TERMS = 10_000
_THETA_SWITCH = 0.2


class SmallSampleWarning(UserWarning):
    pass


def kolmogorov_cdf_alternating(q: float) -> float:
    """``1 - 2 * sum_{j>=1} (-1)^(j-1) exp(-2 j^2 q^2)``, unclamped."""
    s = 0.0
    for j in range(1, _MAX_TERMS + 1):
        term = math.exp(-2.0 * j * j * q * q)
        s += term if j % 2 else -term
        if term < _TERM_TOL:
            break
    return 1.0 - 2.0 * s


def kolmogorov_cdf_theta(q: float) -> float:
    """Dual (Jacobi theta) form ``sqrt(2 pi)/q * sum_{j>=1} exp(-(2j-1)^2 pi^2 / (8 q^2))``."""
    a = math.pi**2 / (8.0 * q * q)
    s = 0.0
    for j in range(1, _MAX_TERMS + 1):
        term = math.exp(-((2 * j - 1) ** 2) * a)
        s += term
        if term < _TERM_TOL:
            break
    return math.sqrt(2.0 * math.pi) / q * s


def kolmogorov_cdf(q: float) -> float:
    """Limit distribution of ``sqrt(n) * sup |F_n - F|``."""
    q = float(q)
    if not q > 0:
        raise ValueError("Kolmogorov distribution is defined for Q > 0")
    if math.isinf(q):
        return 1.0
    val = kolmogorov_cdf_theta(q) if q < _THETA_SWITCH else kolmogorov_cdf_alternating(q)
    return min(1.0, max(0.0, val))


@lru_cache(maxsize=256)
def kolmogorov_quantile(p: float) -> float:
    """Solve ``L(Q) = p`` by bisection on [0.01, 5]."""
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie strictly between 0 and 1")
    lo, hi = 0.01, 5.0
    while hi - lo > 1e-10:
        mid = 0.5 * (lo + hi)
        if kolmogorov_cdf(mid) < p:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


Center = Union[SmoothCdf, StepCdf, Callable]


@dataclass(frozen=True)
class Band:
    """``[max(0, F(z) - w), min(1, F(z) + w)]`` around an estimated CDF ``F``."""

    center: Center
    halfwidth: float
    level: float

    def lower(self, z):
        return np.maximum(0.0, np.asarray(self.center(z)) - self.halfwidth)

    def upper(self, z):
        return np.minimum(1.0, np.asarray(self.center(z)) + self.halfwidth)

    def evaluate(self, z):
        """Return ``(lower, center, upper)`` from a single evaluation of the center."""
        c = np.asarray(self.center(z), dtype=float)
        return np.maximum(0.0, c - self.halfwidth), c, np.minimum(1.0, c + self.halfwidth)


def build_band(center: Center, n: int, alpha: float) -> Band:
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie strictly between 0 and 1")
    if n < 1:
        raise ValueError("n must be positive")
    if n < MIN_BAND_N:
        warnings.warn(
            f"n={n} is below {MIN_BAND_N}; asymptotic Kolmogorov constants used anyway",
            SmallSampleWarning,
            stacklevel=2,
        )
    return Band(center, kolmogorov_quantile(1.0 - alpha) / math.sqrt(n), 1.0 - alpha)


def covers(band: Band, truth: Callable, grid) -> bool:
    """True iff ``lower <= truth <= upper`` at every grid point.

    A step-function center also gets checked at the left limit of each
    jump, which is where a continuous truth can escape the band.
    """
    grid = np.asarray(grid, dtype=float).reshape(-1)
    if grid.size == 0:
        raise ValueError("grid must be nonempty")
    lo, _, hi = band.evaluate(grid)
    t = np.asarray(truth(grid), dtype=float)
    ok = bool(np.all((lo <= t) & (t <= hi)))
    if ok and isinstance(band.center, StepCdf):
        jumps = band.center.jumps
        left = band.center.left_limit(jumps)
        t = np.asarray(truth(jumps), dtype=float)
        w = band.halfwidth
        ok = bool(np.all((np.maximum(0.0, left - w) <= t) & (t <= np.minimum(1.0, left + w))))
        if ok:
            c = band.center(jumps)
            ok = bool(np.all((np.maximum(0.0, c - w) <= t) & (t <= np.minimum(1.0, c + w))))
    return ok


def write_band_csv(path, band: Band, grid) -> None:
    grid = np.asarray(grid, dtype=float)
    lo, c, hi = band.evaluate(grid)
    with Path(path).open("w", newline="") as fh:
        fh.write(f"# halfwidth={band.halfwidth!r}\n# level={band.level!r}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["z", "lower", "center", "upper"])
        for row in zip(grid, lo, c, hi):
            w.writerow([repr(float(v)) for v in row])
