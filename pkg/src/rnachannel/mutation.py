"""Replication error channel: insertions, deletions, substitutions.

Per replication of a length-n template, each position independently deletes
with p_del, substitutes with p_sub (uniform over the other three letters)
or copies faithfully; insertions arrive as Binomial(n, p_ins) uniform
letters at uniform positions.  Two equivalent samplers: a sequence form
that transforms the digit array, and a counts form that updates only the
letter composition (used by the hot simulation path).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernel
from .kinetics import Composition


@dataclass(frozen=True)
class ErrorRates:
    """Per-nucleotide, per-replication error probabilities."""

    p_ins: float = 0.0
    p_del: float = 0.0
    p_sub: float = 0.0

    def __post_init__(self):
        for name in ("p_ins", "p_del", "p_sub"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {v}")
        if self.p_del + self.p_sub > 1.0:
            raise ValueError(
                f"p_del + p_sub must not exceed 1, got {self.p_del + self.p_sub}"
            )


@dataclass
class ErrorCounts:
    """Error tallies, either for one replication event or cumulative.

    per_letter_deletions attributes deletions to template letters (A, C,
    G, U); it is None when the sampler had no template to attribute from.
    """

    insertions: int = 0
    deletions: int = 0
    substitutions: int = 0
    per_letter_deletions: np.ndarray | None = None

    def __post_init__(self):
        for name in ("insertions", "deletions", "substitutions"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")
        if self.per_letter_deletions is not None:
            self.per_letter_deletions = np.asarray(
                self.per_letter_deletions, dtype=np.int64
            )
            if self.per_letter_deletions.shape != (4,):
                raise ValueError("per_letter_deletions must hold 4 counts")
            if int(self.per_letter_deletions.sum()) != self.deletions:
                raise ValueError(
                    "per-letter deletion counts must sum to the deletion total"
                )

    def accumulate(self, other: "ErrorCounts") -> "ErrorCounts":
        if self.per_letter_deletions is None or other.per_letter_deletions is None:
            per_letter = None
        else:
            per_letter = self.per_letter_deletions + other.per_letter_deletions
        return ErrorCounts(
            self.insertions + other.insertions,
            self.deletions + other.deletions,
            self.substitutions + other.substitutions,
            per_letter,
        )


def sample_error_counts(template_len, rates: ErrorRates, rng: np.random.Generator, size=None):
    """Marginal error counts for one replication of a length-n template.

    insertions ~ Binomial(n, p_ins), deletions ~ Binomial(n, p_del),
    substitutions ~ Binomial(n, p_sub).  With size=None returns an
    ErrorCounts (no per-letter attribution); with an integer size returns
    three arrays (ins, del, sub) of that many independent draws.
    """
    n = int(template_len)
    if n < 0:
        raise ValueError(f"template length must be nonnegative, got {template_len}")
    if size is None:
        ins = int(rng.binomial(n, rates.p_ins))
        dels = int(rng.binomial(n, rates.p_del))
        subs = int(rng.binomial(n, rates.p_sub))
        return ErrorCounts(ins, dels, subs)
    ins = rng.binomial(n, rates.p_ins, size=size)
    dels = rng.binomial(n, rates.p_del, size=size)
    subs = rng.binomial(n, rates.p_sub, size=size)
    return ins, dels, subs


def mutate_sequence(template, rates: ErrorRates, rng: np.random.Generator):
    """Replicate a digit sequence through the error channel.

    Returns (child digits uint8, ErrorCounts for this event).  Insertion
    positions index the post-deletion/substitution child, endpoints
    included.
    """
    template = np.asarray(template, dtype=np.uint8)
    if template.size and template.max() > 3:
        raise ValueError("sequence digits must be in 0..3")
    n = template.size

    u = rng.random(n)
    del_mask = u < rates.p_del
    sub_mask = (~del_mask) & (u < rates.p_del + rates.p_sub)
    per_letter = np.bincount(template[del_mask], minlength=4).astype(np.int64)

    child = template[~del_mask].copy()
    subs_in_child = sub_mask[~del_mask]
    n_sub = int(subs_in_child.sum())
    if n_sub:
        shift = rng.integers(1, 4, size=n_sub).astype(np.uint8)
        child[subs_in_child] = (child[subs_in_child] + shift) % 4

    n_ins = int(rng.binomial(n, rates.p_ins))
    if n_ins:
        pos = rng.integers(0, child.size + 1, size=n_ins)
        letters = rng.integers(0, 4, size=n_ins).astype(np.uint8)
        child = np.insert(child, pos, letters)

    counts = ErrorCounts(n_ins, int(del_mask.sum()), n_sub, per_letter)
    return child, counts


def mutate_counts(template: Composition, rates: ErrorRates, rng: np.random.Generator):
    """Replicate through the error channel tracking only letter counts.

    Distributionally identical to mutate_sequence: deleted and substituted
    letters are drawn without replacement from the composition, i.e.
    multivariate-hypergeometric given the totals.
    """
    comp_in = template.as_array()
    comp_out = np.zeros(4, dtype=np.int64)
    per_letter = np.zeros(4, dtype=np.int64)
    ins, dels, subs = _kernel._mutate_counts_core(
        rng, comp_in, comp_out, per_letter, rates.p_ins, rates.p_del, rates.p_sub
    )
    child = Composition.from_array(comp_out)
    return child, ErrorCounts(int(ins), int(dels), int(subs), per_letter)
