"""Channel-level analysis: redundancy bounds, trend fits, corruption demos."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .codec import (
    LengthNotMultipleOfFour,
    decode_bytes,
    digits_to_str,
    encode_to_digits,
)
from .mutation import ErrorCounts


class InvalidProbability(ValueError):
    """Probability outside [0, 1)."""


class DegenerateSeries(ValueError):
    """Too few distinct abscissae to fit a line."""


def erasure_bound(p_d: float) -> float:
    """Minimum redundancy fraction to survive iid deletions of rate p_d.

    Deletions at known positions are erasures; correcting a fraction p_d of
    erasures needs at least p_d / (1 - p_d) redundant symbols per data
    symbol.  Diverges as p_d -> 1 (channel capacity goes to zero).
    """
    p = float(p_d)
    if not 0.0 <= p < 1.0:
        raise InvalidProbability(f"deletion probability must be in [0, 1), got {p_d}")
    return p / (1.0 - p)


@dataclass(frozen=True)
class LinearFit:
    slope: float
    intercept: float
    r_squared: float


def fit_linear(times, values=None) -> LinearFit:
    """Ordinary least squares line fit.

    Accepts either (times, values) arrays or one iterable of (t, y) pairs.
    R^2 of an exactly-fit series with zero variance is 1.0 by convention.
    """
    if values is None:
        pairs = np.asarray(list(times), dtype=np.float64)
        if pairs.ndim != 2 or pairs.shape[1] != 2:
            raise ValueError("expected an iterable of (t, y) pairs")
        t, y = pairs[:, 0], pairs[:, 1]
    else:
        t = np.asarray(times, dtype=np.float64)
        y = np.asarray(values, dtype=np.float64)
    if t.shape != y.shape or t.ndim != 1:
        raise ValueError("times and values must be 1-d arrays of equal length")
    if np.unique(t).size < 2:
        raise DegenerateSeries("need at least two distinct time points to fit a line")

    tm = t.mean()
    ym = y.mean()
    dt = t - tm
    slope = float(dt @ (y - ym) / (dt @ dt))
    intercept = float(ym - slope * tm)
    resid = y - (slope * t + intercept)
    ss_res = float(resid @ resid)
    ss_tot = float(((y - ym) ** 2).sum())
    if ss_tot > 0.0:
        r2 = 1.0 - ss_res / ss_tot
    else:
        r2 = 1.0 if np.isclose(ss_res, 0.0) else 0.0
    return LinearFit(slope=slope, intercept=intercept, r_squared=r2)


def aggregate_mean_se(values, axis: int = 0):
    """Across-trial mean and standard error of the mean along an axis.

    se uses the ddof=1 sample standard deviation over sqrt(n); a single
    trial has no spread estimate and reports se = 0.
    """
    values = np.asarray(values, dtype=np.float64)
    n = values.shape[axis]
    mean = values.mean(axis=axis)
    if n < 2:
        return mean, np.zeros_like(mean)
    return mean, values.std(axis=axis, ddof=1) / np.sqrt(n)


@dataclass
class CorruptionReport:
    """What one replicated copy of an encoded message looks like on receipt."""

    original: bytes
    received_nucleotides: str
    decoded: bytes | None
    framing_error: str | None
    changed_byte_positions: list[int]
    length_changed: bool
    strand_errors: ErrorCounts
    generation: int


def corrupt_message_demo(message: bytes, cfg) -> CorruptionReport:
    """Encode a message, replicate it noisily, and decode one survivor.

    Runs a sequence-representation trial rooted at the encoded message,
    samples one random strand from the final population at t_max, and
    attempts to decode it.  A single deletion shifts the digit frame, so
    either the length stops dividing by four (framing error) or every byte
    past the deletion scrambles; the report shows which.
    """
    from .simulator import config_with, run_trial

    digits = encode_to_digits(message)
    if digits.size == 0:
        raise ValueError("message must be nonempty")
    demo_cfg = config_with(
        cfg,
        representation="sequence",
        root_sequence=digits,
        root_composition=None,
    )
    result = run_trial(demo_cfg, 0, capture_final=True)
    population = result.final_population
    rng = np.random.default_rng([demo_cfg.master_seed, 1])
    strand = population[int(rng.integers(0, len(population)))]

    received = digits_to_str(strand.sequence)
    decoded = None
    framing_error = None
    try:
        decoded = decode_bytes(received)
    except LengthNotMultipleOfFour as exc:
        framing_error = str(exc)

    changed = []
    length_changed = decoded is None or len(decoded) != len(message)
    if decoded is not None:
        upto = min(len(decoded), len(message))
        changed = [i for i in range(upto) if decoded[i] != message[i]]
        changed += list(range(upto, max(len(decoded), len(message))))
    return CorruptionReport(
        original=bytes(message),
        received_nucleotides=received,
        decoded=decoded,
        framing_error=framing_error,
        changed_byte_positions=changed,
        length_changed=length_changed,
        strand_errors=strand.cum_errors,
        generation=strand.generation,
    )
