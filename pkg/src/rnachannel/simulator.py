"""Branching replication simulator.

Continuous-time branching process: every strand is always replicating, each
completion spawns one child drawn through the error channel, and both
immediately begin their next replications.  Children inherit the parent's
cumulative error counters, so a strand's counters record every event on its
lineage back to the root.  Population is capped by uniform culling to half
the cap, with a scale multiplier tracking true size.

Two interchangeable state representations:

* ``counts`` -- strands are letter compositions plus counters; the per-trial
  event loop lives in ``_kernel`` and runs JIT-compiled by default.
* ``sequence`` -- strands carry full digit arrays (pure Python engine);
  slower, but positions are preserved, which message-corruption demos need.
"""

from __future__ import annotations

import heapq
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernel
from .analysis import aggregate_mean_se
from .kinetics import Composition, KineticParams, TIME_MODES, sample_replication_time
from .mutation import ErrorCounts, ErrorRates, mutate_sequence

REPRESENTATIONS = ("counts", "sequence")

DEFAULT_POP_CAP = 1 << 20
DEFAULT_SAMPLE_CAP = 1024
DEFAULT_ROOT_SEED = 20177


class PopulationExtinct(RuntimeError):
    """Every strand reached length zero; nothing can replicate."""


class EmptyPopulation(ValueError):
    """A population-level operation received no strands."""


@dataclass
class Strand:
    composition: Composition
    generation: int
    cum_errors: ErrorCounts
    birth_time: float
    sequence: np.ndarray | None = None
    # engine bookkeeping: scheduled completion time and birth order
    next_time: float = math.inf
    birth_order: int = 0


@dataclass
class CheckpointSample:
    """Population statistics at one checkpoint time.

    population is the culling-corrected size (live strands times the scale
    multiplier); rates are cumulative error counters per root nucleotide,
    averaged over the sampled strands.  del_rate_by_letter divides each
    letter's deletions by the root's count of that letter.
    """

    time: float
    population: float
    live: int
    mean_generation: float
    del_rate: float
    ins_rate: float
    sub_rate: float
    del_rate_by_letter: np.ndarray


@dataclass
class Lineage:
    """Birth-ordered genealogy of one trial (index 0 is the root).

    parent holds the parent's birth index (-1 for the root); counters are
    cumulative at birth; length is the strand's length at birth.
    """

    parent: np.ndarray
    generation: np.ndarray
    insertions: np.ndarray
    deletions: np.ndarray
    substitutions: np.ndarray
    length: np.ndarray

    def __len__(self):
        return self.parent.size


@dataclass
class TrialResult:
    checkpoints: list[CheckpointSample]
    lineage: Lineage | None = None
    final_population: list[Strand] | None = None
    final_multiplier: float = 1.0


@dataclass
class SimConfig:
    """Full description of one experiment (all trials share it)."""

    n0: int = 20000
    rates: ErrorRates = field(default_factory=lambda: ErrorRates(2.3e-7, 2.3e-7, 0.0))
    kinetics: KineticParams = field(default_factory=lambda: KineticParams.from_rate(22.0))
    time_mode: str = "gaussian"
    representation: str = "counts"
    t_max: float = 27600.0
    checkpoints: np.ndarray | None = None
    pop_cap: int = DEFAULT_POP_CAP
    trials: int = 100
    master_seed: int = 1
    sample_cap: int = DEFAULT_SAMPLE_CAP
    root_sequence: np.ndarray | None = None
    root_composition: np.ndarray | None = None
    root_seed: int = DEFAULT_ROOT_SEED

    def __post_init__(self):
        if self.checkpoints is None:
            self.checkpoints = np.linspace(0.0, self.t_max, 11)
        self.checkpoints = np.asarray(self.checkpoints, dtype=np.float64)
        if self.root_sequence is not None:
            self.root_sequence = np.asarray(self.root_sequence, dtype=np.uint8)
            self.n0 = int(self.root_sequence.size)
        elif self.root_composition is not None:
            self.root_composition = np.asarray(self.root_composition, dtype=np.int64)
            self.n0 = int(self.root_composition.sum())

    def validate(self):
        """Raise ValueError naming the offending field."""
        if self.n0 < 1:
            raise ValueError(f"n0: initial strand length must be >= 1, got {self.n0}")
        if self.time_mode not in TIME_MODES:
            raise ValueError(f"time_mode: must be one of {TIME_MODES}, got {self.time_mode!r}")
        if self.representation not in REPRESENTATIONS:
            raise ValueError(
                f"representation: must be one of {REPRESENTATIONS}, got {self.representation!r}"
            )
        if not self.t_max > 0:
            raise ValueError(f"t_max: must be positive, got {self.t_max}")
        cps = self.checkpoints
        if cps.size < 1:
            raise ValueError("checkpoints: need at least one checkpoint")
        if np.any(np.diff(cps) < 0):
            raise ValueError("checkpoints: must be sorted ascending")
        if cps[0] < 0 or cps[-1] > self.t_max:
            raise ValueError("checkpoints: must lie within [0, t_max]")
        if self.pop_cap < 2:
            raise ValueError(f"pop_cap: must be >= 2, got {self.pop_cap}")
        if self.trials < 1:
            raise ValueError(f"trials: must be >= 1, got {self.trials}")
        if self.master_seed < 0:
            raise ValueError(f"master_seed: must be nonnegative, got {self.master_seed}")
        if self.sample_cap < 1:
            raise ValueError(f"sample_cap: must be >= 1, got {self.sample_cap}")
        if self.root_sequence is not None and self.root_sequence.size:
            if int(self.root_sequence.max()) > 3:
                raise ValueError("root_sequence: digits must be in 0..3")
        if self.root_composition is not None:
            if np.any(self.root_composition < 0):
                raise ValueError("root_composition: counts must be nonnegative")
            if self.representation == "sequence":
                raise ValueError(
                    "root_composition: sequence representation needs an explicit "
                    "root_sequence or a random root"
                )
        self.rates, self.kinetics  # constructed => already validated


def resolve_root(cfg: SimConfig):
    """Root strand shared by every trial: (digits or None, composition).

    A random root is drawn once from root_seed, uniform over the alphabet,
    so trials differ only through their replication randomness.
    """
    if cfg.root_sequence is not None:
        digits = cfg.root_sequence
        comp = np.bincount(digits, minlength=4).astype(np.int64)
    elif cfg.root_composition is not None:
        digits = None
        comp = cfg.root_composition.astype(np.int64)
    else:
        rng = np.random.default_rng(cfg.root_seed)
        digits = rng.integers(0, 4, size=cfg.n0).astype(np.uint8)
        comp = np.bincount(digits, minlength=4).astype(np.int64)
    return digits, comp


def cull_population(strands: list, pop_cap: int, rng: np.random.Generator):
    """Uniform subsample of pop_cap//2 survivors once the cap is exceeded.

    Returns (survivors, factor) where factor is the population scale lost
    (old size / kept size); at or under the cap the input is returned
    unchanged with factor 1.0.
    """
    n = len(strands)
    if n == 0:
        raise EmptyPopulation("cannot cull an empty population")
    if n <= pop_cap:
        return strands, 1.0
    keep = pop_cap // 2
    idx = np.arange(n)
    for i in range(keep):
        j = i + int(rng.integers(0, n - i))
        idx[i], idx[j] = idx[j], idx[i]
    chosen = np.sort(idx[:keep])
    return [strands[i] for i in chosen], n / keep


def sample_checkpoint(
    strands: list,
    t: float,
    rng: np.random.Generator,
    *,
    n0: int,
    root_composition,
    multiplier: float = 1.0,
    sample_cap: int = DEFAULT_SAMPLE_CAP,
) -> CheckpointSample:
    """Population statistics at time t.

    Exact over the whole population while it fits within sample_cap;
    otherwise over sample_cap strands drawn with replacement.
    """
    if not strands:
        raise EmptyPopulation(f"no strands to sample at t={t}")
    root_comp = np.asarray(root_composition, dtype=np.int64)
    if len(strands) <= sample_cap:
        nsamp = len(strands)
        picks = range(nsamp)
    else:
        nsamp = sample_cap
        picks = rng.integers(0, len(strands), size=nsamp)
    s_gen = 0
    s_ins = 0
    s_del = 0
    s_sub = 0
    s_let = np.zeros(4, dtype=np.int64)
    for w in picks:
        s = strands[w]
        s_gen += s.generation
        s_ins += s.cum_errors.insertions
        s_del += s.cum_errors.deletions
        s_sub += s.cum_errors.substitutions
        if s.cum_errors.per_letter_deletions is not None:
            s_let += s.cum_errors.per_letter_deletions
    by_letter = np.zeros(4)
    nz = root_comp > 0
    by_letter[nz] = (s_let[nz] / nsamp) / root_comp[nz]
    return CheckpointSample(
        time=float(t),
        population=len(strands) * multiplier,
        live=len(strands),
        mean_generation=s_gen / nsamp,
        del_rate=(s_del / nsamp) / n0,
        ins_rate=(s_ins / nsamp) / n0,
        sub_rate=(s_sub / nsamp) / n0,
        del_rate_by_letter=by_letter,
    )


def _run_counts(cfg: SimConfig, rng, root_comp, record_lineage: bool) -> TrialResult:
    out = _kernel.run_counts_trial(
        rng,
        root_comp,
        cfg.kinetics.mean_time,
        cfg.kinetics.var_time,
        cfg.rates.p_ins,
        cfg.rates.p_del,
        cfg.rates.p_sub,
        cfg.time_mode == "gaussian",
        cfg.checkpoints,
        cfg.pop_cap,
        cfg.sample_cap,
        record_lineage,
    )
    (live, pop, gen, dels, ins, subs, by_letter, status, births, rec) = out
    if status == _kernel.STATUS_EXTINCT:
        raise PopulationExtinct(
            f"all strands reached length zero before t={cfg.checkpoints[-1]}"
        )
    samples = [
        CheckpointSample(
            time=float(cfg.checkpoints[i]),
            population=float(pop[i]),
            live=int(live[i]),
            mean_generation=float(gen[i]),
            del_rate=float(dels[i]),
            ins_rate=float(ins[i]),
            sub_rate=float(subs[i]),
            del_rate_by_letter=by_letter[i].copy(),
        )
        for i in range(cfg.checkpoints.size)
    ]
    lineage = None
    if record_lineage:
        rec = np.asarray(rec)
        lineage = Lineage(
            parent=rec[:, 0].copy(),
            generation=rec[:, 1].copy(),
            insertions=rec[:, 2].copy(),
            deletions=rec[:, 3].copy(),
            substitutions=rec[:, 4].copy(),
            length=rec[:, 5].copy(),
        )
    return TrialResult(checkpoints=samples, lineage=lineage)


def _run_sequence(
    cfg: SimConfig,
    rng,
    root_digits,
    root_comp,
    record_lineage: bool,
    capture_final: bool,
) -> TrialResult:
    if root_digits is None:
        raise ValueError("sequence representation requires a root sequence")
    n0 = int(root_comp.sum())
    root = Strand(
        composition=Composition.from_array(root_comp),
        generation=0,
        cum_errors=ErrorCounts(0, 0, 0, np.zeros(4, dtype=np.int64)),
        birth_time=0.0,
        sequence=root_digits.copy(),
        birth_order=0,
    )
    strands = [root]
    births = 1
    multiplier = 1.0
    rec = [(-1, 0, 0, 0, 0, n0)] if record_lineage else None

    heap: list[tuple[float, int, int]] = []
    root.next_time = sample_replication_time(root.composition, cfg.kinetics, cfg.time_mode, rng)
    heapq.heappush(heap, (root.next_time, 0, 0))

    def advance_to(t_stop: float):
        nonlocal strands, births, multiplier, heap
        while heap and heap[0][0] <= t_stop:
            t_ev, _, idx = heapq.heappop(heap)
            parent = strands[idx]
            child_seq, event = mutate_sequence(parent.sequence, cfg.rates, rng)
            child = Strand(
                composition=Composition.from_digits(child_seq),
                generation=parent.generation + 1,
                cum_errors=parent.cum_errors.accumulate(event),
                birth_time=t_ev,
                sequence=child_seq,
                birth_order=births,
            )
            if rec is not None:
                rec.append(
                    (
                        parent.birth_order,
                        child.generation,
                        child.cum_errors.insertions,
                        child.cum_errors.deletions,
                        child.cum_errors.substitutions,
                        int(child_seq.size),
                    )
                )
            births += 1
            strands.append(child)
            # parent reschedules first, then the child if it can replicate
            parent.next_time = t_ev + sample_replication_time(
                parent.composition, cfg.kinetics, cfg.time_mode, rng
            )
            heapq.heappush(heap, (parent.next_time, parent.birth_order, idx))
            if child.composition.total() > 0:
                child.next_time = t_ev + sample_replication_time(
                    child.composition, cfg.kinetics, cfg.time_mode, rng
                )
                heapq.heappush(heap, (child.next_time, child.birth_order, len(strands) - 1))
            if len(strands) > cfg.pop_cap:
                strands, factor = cull_population(strands, cfg.pop_cap, rng)
                multiplier *= factor
                heap = [
                    (s.next_time, s.birth_order, i)
                    for i, s in enumerate(strands)
                    if s.next_time < math.inf
                ]
                heapq.heapify(heap)

    samples = []
    for tcp in cfg.checkpoints:
        advance_to(tcp)
        if not heap:
            raise PopulationExtinct(f"all strands reached length zero before t={tcp}")
        samples.append(
            sample_checkpoint(
                strands,
                tcp,
                rng,
                n0=n0,
                root_composition=root_comp,
                multiplier=multiplier,
                sample_cap=cfg.sample_cap,
            )
        )

    final_pop = None
    if capture_final:
        advance_to(cfg.t_max)
        final_pop = list(strands)

    lineage = None
    if rec is not None:
        arr = np.asarray(rec, dtype=np.int64).reshape(-1, 6)
        lineage = Lineage(
            parent=arr[:, 0],
            generation=arr[:, 1],
            insertions=arr[:, 2],
            deletions=arr[:, 3],
            substitutions=arr[:, 4],
            length=arr[:, 5],
        )
    return TrialResult(
        checkpoints=samples,
        lineage=lineage,
        final_population=final_pop,
        final_multiplier=multiplier,
    )


def run_trial(
    cfg: SimConfig,
    trial_index: int,
    *,
    record_lineage: bool = False,
    capture_final: bool = False,
) -> TrialResult:
    """One independent trial, deterministic given (master_seed, trial_index)."""
    cfg.validate()
    rng = np.random.default_rng(cfg.master_seed + trial_index)
    root_digits, root_comp = resolve_root(cfg)
    if int(root_comp.sum()) < 1:
        raise ValueError("n0: initial strand length must be >= 1")
    if cfg.representation == "counts":
        if capture_final:
            raise ValueError("capture_final requires the sequence representation")
        return _run_counts(cfg, rng, root_comp, record_lineage)
    return _run_sequence(cfg, rng, root_digits, root_comp, record_lineage, capture_final)


@dataclass
class AggregateTrajectory:
    """Across-trial mean and standard error of every checkpoint statistic.

    per_trial keeps the raw (trials x checkpoints) matrices so downstream
    statistics (paired comparisons, distribution tests) stay possible.
    """

    times: np.ndarray
    n_trials: int
    population: np.ndarray
    mean_generation: np.ndarray
    del_rate: np.ndarray
    ins_rate: np.ndarray
    sub_rate: np.ndarray
    del_rate_by_letter: np.ndarray  # (checkpoints, 4)
    population_se: np.ndarray
    mean_generation_se: np.ndarray
    del_rate_se: np.ndarray
    ins_rate_se: np.ndarray
    sub_rate_se: np.ndarray
    del_rate_by_letter_se: np.ndarray
    per_trial: dict[str, np.ndarray] = field(default_factory=dict)


def run_experiment(cfg: SimConfig, *, threads: int = 1) -> AggregateTrajectory:
    """Run cfg.trials independent trials and aggregate mean +/- se per checkpoint.

    Trials are seeded by index, so the result is identical for any thread
    count.  The counts kernel releases the GIL when JIT-compiled, letting
    threads overlap.
    """
    cfg.validate()
    indices = list(range(cfg.trials))
    if threads <= 1:
        results = [run_trial(cfg, i) for i in indices]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda i: run_trial(cfg, i), indices))

    ncp = cfg.checkpoints.size
    stats = {
        name: np.empty((cfg.trials, ncp))
        for name in ("population", "mean_generation", "del_rate", "ins_rate", "sub_rate")
    }
    by_letter = np.empty((cfg.trials, ncp, 4))
    for ti, res in enumerate(results):
        for ci, s in enumerate(res.checkpoints):
            stats["population"][ti, ci] = s.population
            stats["mean_generation"][ti, ci] = s.mean_generation
            stats["del_rate"][ti, ci] = s.del_rate
            stats["ins_rate"][ti, ci] = s.ins_rate
            stats["sub_rate"][ti, ci] = s.sub_rate
            by_letter[ti, ci] = s.del_rate_by_letter

    mean_se = {name: aggregate_mean_se(m) for name, m in stats.items()}
    letter_mean, letter_se = aggregate_mean_se(by_letter)
    per_trial = dict(stats)
    per_trial["del_rate_by_letter"] = by_letter
    return AggregateTrajectory(
        times=cfg.checkpoints.copy(),
        n_trials=cfg.trials,
        population=mean_se["population"][0],
        mean_generation=mean_se["mean_generation"][0],
        del_rate=mean_se["del_rate"][0],
        ins_rate=mean_se["ins_rate"][0],
        sub_rate=mean_se["sub_rate"][0],
        del_rate_by_letter=letter_mean,
        population_se=mean_se["population"][1],
        mean_generation_se=mean_se["mean_generation"][1],
        del_rate_se=mean_se["del_rate"][1],
        ins_rate_se=mean_se["ins_rate"][1],
        sub_rate_se=mean_se["sub_rate"][1],
        del_rate_by_letter_se=letter_se,
        per_trial=per_trial,
    )


def config_with(cfg: SimConfig, **changes) -> SimConfig:
    """dataclasses.replace wrapper that revalidates.

    Changing t_max without also giving checkpoints rescales the existing
    checkpoint grid to the new horizon rather than leaving stale times
    outside it.
    """
    if "t_max" in changes and "checkpoints" not in changes:
        changes["checkpoints"] = cfg.checkpoints * (changes["t_max"] / cfg.t_max)
    new = replace(cfg, **changes)
    new.validate()
    return new
