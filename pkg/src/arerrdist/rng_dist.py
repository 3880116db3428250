"""Error laws for the AR innovations and seeded random streams.

Two reference laws are built in: the standard normal and the standard
double exponential (Laplace with unit scale, variance 2).  Any other law
can be wrapped with :meth:`ErrorLaw.custom`.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import special

__all__ = [
    "LawKind",
    "ErrorLaw",
    "RngState",
    "STANDARD_NORMAL",
    "STANDARD_LAPLACE",
    "law_from_name",
    "sample_errors",
    "reference_cdf",
    "reference_ppf",
]

_TWO53 = 2**53


class LawKind(enum.Enum):
    STANDARD_NORMAL = "normal"
    STANDARD_DOUBLE_EXPONENTIAL = "laplace"
    CUSTOM = "custom"


@dataclass(frozen=True)
class RngState:
    """Seed plus stream identifier.

    ``stream`` is a tuple of non-negative integers; it is fed to
    :class:`numpy.random.SeedSequence` as the spawn key, so every distinct
    ``(seed, stream)`` pair yields an independent PCG64 stream.
    """

    seed: int
    stream: tuple[int, ...] = ()

    def __post_init__(self):
        if self.seed < 0 or self.seed >= 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        object.__setattr__(self, "stream", tuple(int(s) for s in self.stream))
        if any(s < 0 for s in self.stream):
            raise ValueError("stream ids must be non-negative")

    def substream(self, *keys: int) -> "RngState":
        return RngState(self.seed, self.stream + tuple(keys))

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=self.stream)
        return np.random.Generator(np.random.PCG64(ss))


def _unit_open(gen: np.random.Generator, n: int) -> np.ndarray:
    # uniforms strictly inside (0, 1)
    return (gen.integers(0, _TWO53, size=n, dtype=np.int64) + 0.5) / _TWO53


def _normal_sampler(gen: np.random.Generator, n: int) -> np.ndarray:
    return gen.standard_normal(n)


def _laplace_ppf(u):
    u = np.asarray(u, dtype=float)
    with np.errstate(divide="ignore"):
        return np.where(u < 0.5, np.log(2.0 * u), -np.log(2.0 * (1.0 - u)))


def _laplace_sampler(gen: np.random.Generator, n: int) -> np.ndarray:
    return _laplace_ppf(_unit_open(gen, n))


def _laplace_cdf(z):
    z = np.asarray(z, dtype=float)
    # 1 - exp(-z)/2 for z >= 0, exp(z)/2 below; exponent clipped to avoid overflow warnings
    return np.where(z >= 0, 1.0 - 0.5 * np.exp(-np.abs(z)), 0.5 * np.exp(-np.abs(z)))


@dataclass(frozen=True)
class ErrorLaw:
    """Distribution of the innovations ``Z_t``.

    ``cdf`` and ``ppf`` are vectorised callables; ``sampler(gen, n)`` draws
    ``n`` values from a :class:`numpy.random.Generator`.
    """

    kind: LawKind
    cdf: Optional[Callable] = field(default=None, compare=False)
    sampler: Optional[Callable[[np.random.Generator, int], np.ndarray]] = field(
        default=None, compare=False
    )
    ppf: Optional[Callable] = field(default=None, compare=False)
    name: str = ""

    @classmethod
    def custom(cls, sampler, cdf=None, ppf=None, name="custom") -> "ErrorLaw":
        if sampler is None:
            raise ValueError("a custom law needs a sampler")
        return cls(LawKind.CUSTOM, cdf=cdf, sampler=sampler, ppf=ppf, name=name)


STANDARD_NORMAL = ErrorLaw(
    LawKind.STANDARD_NORMAL,
    cdf=special.ndtr,
    sampler=_normal_sampler,
    ppf=special.ndtri,
    name="normal",
)
STANDARD_LAPLACE = ErrorLaw(
    LawKind.STANDARD_DOUBLE_EXPONENTIAL,
    cdf=_laplace_cdf,
    sampler=_laplace_sampler,
    ppf=_laplace_ppf,
    name="laplace",
)

_BY_NAME = {
    "normal": STANDARD_NORMAL,
    "gaussian": STANDARD_NORMAL,
    "laplace": STANDARD_LAPLACE,
    "double_exponential": STANDARD_LAPLACE,
}


def law_from_name(name: str) -> ErrorLaw:
    try:
        return _BY_NAME[name.strip().lower()]
    except KeyError:
        raise ValueError(f"unknown error law {name!r}; expected normal or laplace") from None


def sample_errors(law: ErrorLaw, n: int, rng: RngState | np.random.Generator) -> np.ndarray:
    """Draw ``n`` i.i.d. innovations from ``law``.

    Passing the same :class:`RngState` twice gives bit-identical output.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    gen = rng.generator() if isinstance(rng, RngState) else rng
    return np.asarray(law.sampler(gen, int(n)), dtype=float)


def reference_cdf(law: ErrorLaw, z):
    if law.cdf is None:
        raise ValueError(f"law {law.name!r} has no closed-form cdf")
    out = law.cdf(z)
    return float(out) if np.ndim(out) == 0 else np.asarray(out, dtype=float)


def reference_ppf(law: ErrorLaw, u):
    if law.ppf is None:
        raise ValueError(f"law {law.name!r} has no quantile function")
    out = law.ppf(u)
    return float(out) if np.ndim(out) == 0 else np.asarray(out, dtype=float)
