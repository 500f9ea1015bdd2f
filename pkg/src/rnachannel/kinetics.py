"""Replication timing model.

Each template nucleotide is copied in an iid random time; per-letter means
and variances are free parameters.  A whole-strand replication time is the
sum over the template, available in two modes:

* ``gaussian`` -- normal approximation with the summed mean and variance
  (CLT regime), resampled until strictly positive;
* ``exact_sum`` -- exact sum of per-nucleotide exponential times with the
  letter's mean (drawn as one Gamma per letter).

At a uniform single-nucleotide rate k, a length-n strand has
E[T] = n/k and Var[T] = n/k^2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernel
from .codec import LETTERS

TIME_MODES = ("gaussian", "exact_sum")


class EmptyStrand(ValueError):
    """Replication time is undefined for a length-zero strand."""


@dataclass(frozen=True)
class Composition:
    """Letter counts of a strand (order A, C, G, U)."""

    n_a: int
    n_c: int
    n_g: int
    n_u: int

    def __post_init__(self):
        for name, v in zip("n_a n_c n_g n_u".split(), self.as_tuple()):
            if v < 0:
                raise ValueError(f"{name} must be nonnegative, got {v}")

    def as_tuple(self):
        return (self.n_a, self.n_c, self.n_g, self.n_u)

    def as_array(self) -> np.ndarray:
        return np.array(self.as_tuple(), dtype=np.int64)

    def total(self) -> int:
        return self.n_a + self.n_c + self.n_g + self.n_u

    @classmethod
    def from_array(cls, arr) -> "Composition":
        a = np.asarray(arr)
        if a.shape != (4,):
            raise ValueError(f"expected 4 letter counts, got shape {a.shape}")
        return cls(int(a[0]), int(a[1]), int(a[2]), int(a[3]))

    @classmethod
    def from_digits(cls, digits) -> "Composition":
        return cls.from_array(np.bincount(np.asarray(digits, dtype=np.intp), minlength=4))


@dataclass(frozen=True)
class TimeStats:
    mean: float
    variance: float


@dataclass
class KineticParams:
    """Per-letter copy-time moments, seconds (arrays ordered A, C, G, U)."""

    mean_time: np.ndarray
    var_time: np.ndarray

    def __post_init__(self):
        self.mean_time = np.asarray(self.mean_time, dtype=np.float64)
        self.var_time = np.asarray(self.var_time, dtype=np.float64)
        if self.mean_time.shape != (4,) or self.var_time.shape != (4,):
            raise ValueError("mean_time and var_time must each hold 4 values")
        if not np.all(self.mean_time > 0):
            raise ValueError("per-letter mean times must be positive")
        if not np.all(self.var_time >= 0):
            raise ValueError("per-letter time variances must be nonnegative")

    @classmethod
    def from_rate(cls, rate_per_s: float) -> "KineticParams":
        """Uniform exponential kinetics at single-nucleotide rate k (1/s)."""
        if rate_per_s <= 0:
            raise ValueError(f"rate must be positive, got {rate_per_s}")
        m = 1.0 / rate_per_s
        return cls(np.full(4, m), np.full(4, m * m))

    @classmethod
    def per_letter(cls, means, variances=None) -> "KineticParams":
        """Explicit per-letter means; variances default to mean^2 (exponential)."""
        means = np.asarray(means, dtype=np.float64)
        if variances is None:
            variances = means * means
        return cls(means, np.asarray(variances, dtype=np.float64))


def replication_time_stats(comp: Composition, params: KineticParams) -> TimeStats:
    """Exact mean and variance of the whole-strand replication time.

    Independence across positions gives E[T] = sum n_L E[t_L] and
    Var[T] = sum n_L Var[t_L].
    """
    counts = comp.as_array().astype(np.float64)
    return TimeStats(
        mean=float(counts @ params.mean_time),
        variance=float(counts @ params.var_time),
    )


def _check_mode(mode: str):
    if mode not in TIME_MODES:
        raise ValueError(f"time mode must be one of {TIME_MODES}, got {mode!r}")


def sample_replication_time(
    comp: Composition,
    params: KineticParams,
    mode: str = "gaussian",
    rng: np.random.Generator | None = None,
) -> float:
    """Draw one whole-strand replication time (strictly positive)."""
    _check_mode(mode)
    if comp.total() < 1:
        raise EmptyStrand("cannot replicate a length-zero strand")
    if rng is None:
        rng = np.random.default_rng()
    return float(
        _kernel._sample_time(
            rng, comp.as_array(), params.mean_time, params.var_time, mode == "gaussian"
        )
    )


def letter_index(letter: str) -> int:
    i = LETTERS.find(letter.upper())
    if i < 0:
        raise ValueError(f"unknown letter {letter!r}")
    return i
