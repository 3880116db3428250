"""Yule-Walker estimation of AR coefficients and the resulting residuals.

The autocovariances are *not* demeaned and always use the body length ``n``
as divisor, while the sums run over the presample as well::

    gamma(l) = n^{-1} * sum_{i=1-p}^{n-l} X_i X_{i+l}
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .arprocess import Series
from .exceptions import DegenerateDataError

__all__ = [
    "AutocovSet",
    "FittedAr",
    "ResidualSet",
    "COND_LIMIT",
    "autocov",
    "levinson_durbin",
    "toeplitz_matrix",
    "fit",
    "residuals",
]

COND_LIMIT = 1e12
_REFLECTION_LIMIT = 1.0 - 1e-12


@dataclass(frozen=True, eq=False)
class AutocovSet:
    gamma_hat: np.ndarray  # gamma(0), ..., gamma(p)
    n: int

    @property
    def order(self) -> int:
        return self.gamma_hat.size - 1


@dataclass(frozen=True, eq=False)
class FittedAr:
    phi_hat: np.ndarray
    gamma: AutocovSet

    @property
    def order(self) -> int:
        return self.phi_hat.size

    def to_record(self) -> str:
        """``key=value`` text record (order, n, phi_hat, gamma_hat)."""
        fmt = lambda a: ",".join(repr(float(v)) for v in a)  # noqa: E731
        return (
            f"order={self.order}\n"
            f"n={self.gamma.n}\n"
            f"phi_hat={fmt(self.phi_hat)}\n"
            f"gamma_hat={fmt(self.gamma.gamma_hat)}\n"
        )


@dataclass(frozen=True, eq=False)
class ResidualSet:
    z_hat: np.ndarray
    fit: FittedAr


def autocov(series: Series, p: int) -> AutocovSet:
    if p < 1:
        raise ValueError("order must be at least 1")
    if series.presample.size < p:
        short = p - series.presample.size
        raise ValueError(
            f"order {p} needs a presample of length {p}; "
            f"got {series.presample.size} ({short} short)"
        )
    n = series.n
    if n < p + 1:
        raise ValueError(f"order {p} needs at least {p + 1} body observations, got {n}")
    x = np.concatenate([series.presample[-p:], series.body])
    m = x.size  # n + p
    gamma = np.array([np.dot(x[: m - l], x[l:]) for l in range(p + 1)]) / n
    return AutocovSet(gamma, n)


def toeplitz_matrix(c: np.ndarray) -> np.ndarray:
    c = np.asarray(c, dtype=float)
    idx = np.abs(np.subtract.outer(np.arange(c.size), np.arange(c.size)))
    return c[idx]


def levinson_durbin(gamma: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Solve ``Gamma_p phi = (gamma(1), ..., gamma(p))`` by the Durbin recursion.

    ``gamma`` holds ``gamma(0..p)``.  Returns ``(phi, reflection)``; the
    reflection (partial autocorrelation) coefficients are returned so the
    caller can judge how close the system is to singular.
    """
    gamma = np.asarray(gamma, dtype=float)
    p = gamma.size - 1
    phi = np.zeros(p)
    refl = np.zeros(p)
    v = gamma[0]
    for k in range(p):
        acc = gamma[k + 1] - np.dot(phi[:k], gamma[k:0:-1])
        kk = acc / v
        refl[k] = kk
        if abs(kk) > _REFLECTION_LIMIT or not np.isfinite(kk):
            raise np.linalg.LinAlgError(f"reflection coefficient {kk!r} at lag {k + 1}")
        prev = phi[:k].copy()
        phi[:k] = prev - kk * prev[::-1]
        phi[k] = kk
        v *= 1.0 - kk * kk
    return phi, refl


def fit(series: Series, p: int) -> FittedAr:
    """Yule-Walker estimate ``phi_hat = Gamma_p^{-1} gamma_p``."""
    acs = autocov(series, p)
    g = acs.gamma_hat
    if not g[0] > 0:
        raise DegenerateDataError("degenerate autocovariance: gamma(0) is zero")
    mat = toeplitz_matrix(g[:p])
    if np.linalg.cond(mat) > COND_LIMIT:
        raise DegenerateDataError("degenerate autocovariance: Gamma_p is near singular")
    try:
        phi, _ = levinson_durbin(g)
    except np.linalg.LinAlgError:
        phi = np.linalg.solve(mat, g[1:])
    return FittedAr(phi, acs)


def residuals(series: Series, fitted: FittedAr) -> ResidualSet:
    """``Z_hat_t = X_t - sum_r phi_hat_r X_{t-r}`` for ``t = 1..n``."""
    p = fitted.order
    if series.presample.size < p:
        raise ValueError(
            f"fit of order {p} needs a presample of length {p}, got {series.presample.size}"
        )
    n = series.n
    x = np.concatenate([series.presample[-p:], series.body])
    z = series.body.copy()
    for r in range(1, p + 1):
        z -= fitted.phi_hat[r - 1] * x[p - r : p - r + n]
    return ResidualSet(z, fitted)
