"""Distances between distribution functions: sup-norm and integrated squared error."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .kcdf import StepCdf

__all__ = [
    "DeviationReport",
    "sup_distance",
    "ise",
    "ise_dF",
    "mise_range",
    "deviation_report",
    "augment_grid",
    "ISE_PANELS",
]

ISE_PANELS = 2048


@dataclass(frozen=True)
class DeviationReport:
    d_sup: float
    argmax_z: float
    ise: float


def augment_grid(grid, *funcs) -> np.ndarray:
    """Add each step function's jump points and the float just below them."""
    parts = [np.asarray(grid, dtype=float).reshape(-1)]
    for f in funcs:
        if isinstance(f, StepCdf):
            j = f.jumps
            parts += [j, np.nextafter(j, -np.inf)]
    return np.unique(np.concatenate(parts)) if len(parts) > 1 else parts[0]


def sup_distance(f1: Callable, f2: Callable, grid) -> tuple[float, float]:
    """``max |f1 - f2|`` over ``grid`` (augmented at step-function jumps).

    Returns ``(d_sup, argmax_z)``; ties resolve to the smallest ``z``.
    """
    g = np.asarray(grid, dtype=float).reshape(-1)
    if g.size == 0:
        raise ValueError("grid must be nonempty")
    g = augment_grid(g, f1, f2)
    diff = np.abs(np.asarray(f1(g), dtype=float) - np.asarray(f2(g), dtype=float))
    k = int(np.argmax(diff))
    return float(diff[k]), float(g[k])


def _simpson_weights(panels: int) -> np.ndarray:
    w = np.ones(panels + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w


def ise(f1: Callable, f2: Callable, lo: float, hi: float, panels: int = ISE_PANELS) -> float:
    """Composite Simpson approximation of ``int_lo^hi (f1 - f2)^2 dz``."""
    if not lo < hi:
        raise ValueError("need lo < hi")
    if panels < 64:
        raise ValueError("panels must be at least 64")
    panels += panels % 2
    z = np.linspace(lo, hi, panels + 1)
    d = np.asarray(f1(z), dtype=float) - np.asarray(f2(z), dtype=float)
    step = (hi - lo) / panels
    return max(0.0, math.fsum(_simpson_weights(panels) * d * d) * step / 3.0)


def ise_dF(f1: Callable, f2: Callable, ppf: Callable, panels: int = ISE_PANELS) -> float:
    """``int (f1 - f2)^2 dF`` for the law with quantile function ``ppf``.

    Computed as ``int_0^1 (f1 - f2)^2(ppf(u)) du`` with the midpoint rule,
    which never touches the infinite endpoints.
    """
    if panels < 64:
        raise ValueError("panels must be at least 64")
    u = (np.arange(panels) + 0.5) / panels
    z = np.asarray(ppf(u), dtype=float)
    d = np.asarray(f1(z), dtype=float) - np.asarray(f2(z), dtype=float)
    return math.fsum(d * d) / panels


def mise_range(sample) -> tuple[float, float]:
    """Integration window ``mean -/+ 8 sd`` of a sample."""
    s = np.asarray(sample, dtype=float)
    mu, sd = float(s.mean()), float(s.std(ddof=1)) if s.size > 1 else 1.0
    sd = sd if sd > 0 else 1.0
    return mu - 8.0 * sd, mu + 8.0 * sd


def deviation_report(f1, f2, grid, lo, hi, panels: int = ISE_PANELS) -> DeviationReport:
    d, arg = sup_distance(f1, f2, grid)
    return DeviationReport(d, arg, ise(f1, f2, lo, hi, panels))
