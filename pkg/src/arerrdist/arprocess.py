"""AR(p) models: causality, simulation with burn-in, MA(infinity) weights."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.signal import lfilter

from .exceptions import NonCausalError
from .rng_dist import ErrorLaw, RngState, sample_errors

__all__ = [
    "ArModel",
    "Series",
    "ROOT_TOL",
    "root_moduli",
    "check_causal",
    "burn_in_length",
    "simulate",
    "ma_coefficients",
    "write_series_csv",
    "read_series_csv",
]

ROOT_TOL = 1e-8


@dataclass(frozen=True)
class ArModel:
    """``X_t = phi_1 X_{t-1} + ... + phi_p X_{t-p} + sigma * Z_t``."""

    phi: tuple[float, ...]
    sigma: float = 1.0

    def __post_init__(self):
        phi = tuple(float(c) for c in np.atleast_1d(self.phi))
        if len(phi) < 1:
            raise ValueError("AR order must be at least 1")
        if not all(np.isfinite(phi)):
            raise ValueError("AR coefficients must be finite")
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")
        object.__setattr__(self, "phi", phi)

    @property
    def order(self) -> int:
        return len(self.phi)


@dataclass(frozen=True, eq=False)
class Series:
    """A realisation ``X_{1-p}, ..., X_0`` (presample) and ``X_1, ..., X_n`` (body)."""

    presample: np.ndarray
    body: np.ndarray

    def __post_init__(self):
        pre = np.asarray(self.presample, dtype=float).reshape(-1)
        body = np.asarray(self.body, dtype=float).reshape(-1)
        if body.size < 1:
            raise ValueError("series body must contain at least one value")
        pre.flags.writeable = False
        body.flags.writeable = False
        object.__setattr__(self, "presample", pre)
        object.__setattr__(self, "body", body)

    @property
    def n(self) -> int:
        return self.body.size

    @property
    def values(self) -> np.ndarray:
        return np.concatenate([self.presample, self.body])

    @classmethod
    def from_values(cls, values: Sequence[float], p: int) -> "Series":
        """Split raw observations, treating the first ``p`` as the presample."""
        values = np.asarray(values, dtype=float).reshape(-1)
        if p < 0:
            raise ValueError("order must be non-negative")
        if values.size < p + 1:
            raise ValueError(
                f"need at least {p + 1} observations for order {p}, got {values.size}"
            )
        return cls(values[:p], values[p:])


def root_moduli(phi: Sequence[float]) -> np.ndarray:
    """Moduli of the roots of ``1 - phi_1 z - ... - phi_p z^p``, ascending."""
    phi = np.asarray(phi, dtype=float).reshape(-1)
    if phi.size == 0:
        raise ValueError("characteristic polynomial of an order-0 model is degenerate")
    if not np.all(np.isfinite(phi)):
        raise ValueError("AR coefficients must be finite")
    # np.roots wants the highest degree first and strips leading zeros
    coeffs = np.concatenate([-phi[::-1], [1.0]])
    return np.sort(np.abs(np.roots(coeffs)))


def check_causal(phi: Sequence[float]) -> bool:
    mod = root_moduli(phi)
    # a constant polynomial (all phi zero) has no roots and is trivially causal
    return bool(mod.size == 0 or mod[0] > 1.0 + ROOT_TOL)


def _require_causal(phi) -> None:
    if not check_causal(phi):
        raise NonCausalError(phi, root_moduli(phi))


def burn_in_length(p: int) -> int:
    return 500 + 50 * p


def simulate(
    model: ArModel, law: ErrorLaw, n: int, rng: RngState | np.random.Generator
) -> tuple[Series, np.ndarray]:
    """Simulate ``n + p`` values of a stationary AR(p) path.

    The recursion is started at zero and the first ``burn_in_length(p)``
    values are thrown away.  Returns the series and the innovations
    ``Z_1..Z_n`` (scaled by ``sigma``) aligned with the body.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    _require_causal(model.phi)
    p = model.order
    burn = burn_in_length(p)
    z = model.sigma * sample_errors(law, burn + p + n, rng)
    x = lfilter([1.0], np.concatenate([[1.0], -np.asarray(model.phi)]), z)
    x = x[burn:]
    return Series(x[:p], x[p:]), z[burn + p:].copy()


def ma_coefficients(model: ArModel, count: int) -> np.ndarray:
    """First ``count`` weights ``psi_j`` of the causal expansion ``X_t = sum psi_j Z_{t-j}``."""
    _require_causal(model.phi)
    phi = model.phi
    p = len(phi)
    psi = np.zeros(count)
    if count:
        psi[0] = 1.0
    for j in range(1, count):
        psi[j] = sum(phi[i - 1] * psi[j - i] for i in range(1, min(j, p) + 1))
    return psi


def write_series_csv(path, series: Series, meta: dict | None = None) -> None:
    """Write one ``x`` column with ``# key=value`` metadata lines on top."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        fh.write(f"# presample_len={series.presample.size}\n")
        for key, val in (meta or {}).items():
            fh.write(f"# {key}={val}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x"])
        for v in series.values:
            w.writerow([repr(float(v))])


def read_series_csv(path) -> tuple[np.ndarray, dict]:
    """Return all values (presample first) and the metadata dict.

    A file without a header row is accepted when its first non-comment row
    parses as a number.
    """
    meta: dict[str, str] = {}
    values: list[float] = []
    with Path(path).open(newline="") as fh:
        seen_row = False
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" in body:
                    key, val = body.split("=", 1)
                    meta[key.strip()] = val.strip()
                continue
            cell = next(csv.reader([line]))[0].strip()
            if not seen_row:
                seen_row = True
                try:
                    values.append(float(cell))
                except ValueError:
                    pass  # header
                continue
            try:
                values.append(float(cell))
            except ValueError:
                raise ValueError(f"{path}:{lineno}: not a number: {cell!r}") from None
    return np.asarray(values, dtype=float), meta
