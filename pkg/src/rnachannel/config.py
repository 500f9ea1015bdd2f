"""Flat key=value experiment configs, canonical emission, figure presets.

Config text is one ``key = value`` pair per line; ``#`` starts a comment,
blank lines are ignored.  Unknown keys, duplicate keys, malformed values
and invariant violations are reported with file and line.  Missing keys
take the library defaults (the long-strand deletion-accumulation setup).

``config_to_text`` emits a canonical form that reparses to an equivalent
config; it is written beside CSV outputs and embedded in JSON outputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .codec import LETTERS, digits_to_str, str_to_digits
from .kinetics import KineticParams
from .mutation import ErrorRates
from .simulator import (
    DEFAULT_POP_CAP,
    DEFAULT_ROOT_SEED,
    DEFAULT_SAMPLE_CAP,
    SimConfig,
)

FORMATS = ("csv", "json")

DEFAULT_OUTPUT = "trajectory.csv"

PRESETS = ("fig1", "fig2", "fig3")


class ConfigError(ValueError):
    """Config parse or validation failure, carrying file/line context."""

    def __init__(self, message, source="<config>", line=None):
        loc = source if line is None else f"{source}:{line}"
        super().__init__(f"{loc}: {message}")


@dataclass
class ExperimentConfig:
    sim: SimConfig
    output: str = DEFAULT_OUTPUT
    format: str = "csv"

    def validate(self):
        self.sim.validate()
        if self.format not in FORMATS:
            raise ValueError(f"format: must be one of {FORMATS}, got {self.format!r}")
        if not self.output:
            raise ValueError("output: must be a nonempty path")


def format_number(x) -> str:
    """Shortest positional decimal that round-trips the float (no exponent)."""
    return np.format_float_positional(float(x), trim="-")


def _parse_float(s):
    return float(s)


def _parse_int(s):
    v = float(s)
    i = int(v)
    if i != v:
        raise ValueError(f"expected an integer, got {s!r}")
    return i


def _parse_float_list(s):
    parts = [p.strip() for p in s.split(",") if p.strip()]
    if not parts:
        raise ValueError("expected a comma-separated list of numbers")
    return [float(p) for p in parts]


def _parse_int_list(s):
    return [_parse_int(p) for p in s.split(",") if p.strip()]


_SCALAR_KEYS = {
    # key: (converter, description)
    "n0": _parse_int,
    "p_ins": _parse_float,
    "p_del": _parse_float,
    "p_sub": _parse_float,
    "rate_per_s": _parse_float,
    "time_mode": str,
    "representation": str,
    "t_max": _parse_float,
    "checkpoints": _parse_float_list,
    "pop_cap": _parse_int,
    "sample_cap": _parse_int,
    "trials": _parse_int,
    "master_seed": _parse_int,
    "root_seed": _parse_int,
    "root_sequence": str,
    "root_composition": _parse_int_list,
    "output": str,
    "format": str,
}
for _L in LETTERS:
    _SCALAR_KEYS[f"mean_time_{_L.lower()}"] = _parse_float
    _SCALAR_KEYS[f"var_time_{_L.lower()}"] = _parse_float

KNOWN_KEYS = tuple(_SCALAR_KEYS)


def parse_config_text(text: str, source: str = "<config>") -> ExperimentConfig:
    """Parse config text into an ExperimentConfig, defaults filled in."""
    values = {}
    lines = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", source, lineno)
        key, _, val = line.partition("=")
        key = key.strip()
        val = val.strip()
        if key not in _SCALAR_KEYS:
            raise ConfigError(f"unknown key {key!r}", source, lineno)
        if key in values:
            raise ConfigError(f"duplicate key {key!r} (first set on line {lines[key]})", source, lineno)
        try:
            values[key] = _SCALAR_KEYS[key](val)
        except ValueError as exc:
            raise ConfigError(f"{key}: {exc}", source, lineno) from None
        lines[key] = lineno

    def fail(field, message):
        raise ConfigError(f"{field}: {message}", source, lines.get(field))

    # kinetics: a uniform rate or explicit per-letter moments, not both
    has_per_letter = any(
        f"mean_time_{L.lower()}" in values or f"var_time_{L.lower()}" in values for L in LETTERS
    )
    if "rate_per_s" in values and has_per_letter:
        fail("rate_per_s", "give either rate_per_s or per-letter times, not both")
    try:
        if has_per_letter:
            means = np.array(
                [values.get(f"mean_time_{L.lower()}", 1.0 / 22.0) for L in LETTERS]
            )
            variances = np.array(
                [
                    values.get(f"var_time_{L.lower()}", means[i] * means[i])
                    for i, L in enumerate(LETTERS)
                ]
            )
            kin = KineticParams(means, variances)
        else:
            kin = KineticParams.from_rate(values.get("rate_per_s", 22.0))
    except ValueError as exc:
        fail("mean_time_a" if has_per_letter else "rate_per_s", str(exc))

    try:
        rates = ErrorRates(
            values.get("p_ins", 2.3e-7),
            values.get("p_del", 2.3e-7),
            values.get("p_sub", 0.0),
        )
    except ValueError as exc:
        first = next((k for k in ("p_ins", "p_del", "p_sub") if k in values), "p_ins")
        fail(first, str(exc))

    if "root_sequence" in values and "root_composition" in values:
        fail("root_sequence", "give either root_sequence or root_composition, not both")
    root_sequence = None
    root_composition = None
    if "root_sequence" in values:
        try:
            root_sequence = str_to_digits(values["root_sequence"])
        except ValueError as exc:
            fail("root_sequence", str(exc))
    if "root_composition" in values:
        rc = values["root_composition"]
        if len(rc) != 4:
            fail("root_composition", f"expected 4 counts (A,C,G,U), got {len(rc)}")
        root_composition = np.asarray(rc, dtype=np.int64)
    if root_sequence is not None and "n0" in values and values["n0"] != root_sequence.size:
        fail("n0", f"n0={values['n0']} disagrees with root_sequence length {root_sequence.size}")
    if root_composition is not None and "n0" in values and values["n0"] != int(root_composition.sum()):
        fail("n0", f"n0={values['n0']} disagrees with root_composition total {int(root_composition.sum())}")

    t_max = values.get("t_max", 27600.0)
    checkpoints = values.get("checkpoints")
    sim = SimConfig(
        n0=values.get("n0", 20000),
        rates=rates,
        kinetics=kin,
        time_mode=values.get("time_mode", "gaussian"),
        representation=values.get("representation", "counts"),
        t_max=t_max,
        checkpoints=None if checkpoints is None else np.asarray(checkpoints, dtype=np.float64),
        pop_cap=values.get("pop_cap", DEFAULT_POP_CAP),
        trials=values.get("trials", 100),
        master_seed=values.get("master_seed", 1),
        sample_cap=values.get("sample_cap", DEFAULT_SAMPLE_CAP),
        root_sequence=root_sequence,
        root_composition=root_composition,
        root_seed=values.get("root_seed", DEFAULT_ROOT_SEED),
    )
    exp = ExperimentConfig(
        sim=sim,
        output=values.get("output", DEFAULT_OUTPUT),
        format=values.get("format", "csv"),
    )
    try:
        exp.validate()
    except ValueError as exc:
        msg = str(exc)
        field = msg.split(":", 1)[0].strip()
        raise ConfigError(msg, source, lines.get(field)) from None
    return exp


def load_config(path) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config_text(fh.read(), source=str(path))


def config_to_text(exp: ExperimentConfig) -> str:
    """Canonical emission; parse_config_text(config_to_text(e)) == e."""
    sim = exp.sim
    out = []
    if sim.root_sequence is not None:
        out.append(f"root_sequence = {digits_to_str(sim.root_sequence)}")
    elif sim.root_composition is not None:
        out.append(
            "root_composition = " + ",".join(str(int(v)) for v in sim.root_composition)
        )
    else:
        out.append(f"n0 = {sim.n0}")
        out.append(f"root_seed = {sim.root_seed}")
    out.append(f"p_ins = {format_number(sim.rates.p_ins)}")
    out.append(f"p_del = {format_number(sim.rates.p_del)}")
    out.append(f"p_sub = {format_number(sim.rates.p_sub)}")
    for i, L in enumerate(LETTERS):
        out.append(f"mean_time_{L.lower()} = {format_number(sim.kinetics.mean_time[i])}")
    for i, L in enumerate(LETTERS):
        out.append(f"var_time_{L.lower()} = {format_number(sim.kinetics.var_time[i])}")
    out.append(f"time_mode = {sim.time_mode}")
    out.append(f"representation = {sim.representation}")
    out.append(f"t_max = {format_number(sim.t_max)}")
    out.append("checkpoints = " + ",".join(format_number(t) for t in sim.checkpoints))
    out.append(f"pop_cap = {sim.pop_cap}")
    out.append(f"sample_cap = {sim.sample_cap}")
    out.append(f"trials = {sim.trials}")
    out.append(f"master_seed = {sim.master_seed}")
    out.append(f"output = {exp.output}")
    out.append(f"format = {exp.format}")
    return "\n".join(out) + "\n"


def _preset_sims(name: str):
    if name == "fig1":
        rates = ErrorRates(2.3e-7, 2.3e-7, 0.0)
        kin = KineticParams.from_rate(22.0)
        t_max = 27600.0
        lengths = (20000, 40000)
    elif name == "fig2":
        rates = ErrorRates(1.7e-5, 1.7e-5, 0.0)
        kin = KineticParams.per_letter([0.001, 0.046, 0.046, 0.046])
        t_max = 41700.0
        lengths = (100000,)
    elif name == "fig3":
        rates = ErrorRates(2.3e-7, 2.3e-7, 9.1e-6)
        kin = KineticParams.from_rate(22.0)
        t_max = 27600.0
        lengths = (20000, 40000)
    else:
        raise ConfigError(f"unknown preset {name!r}; choose from {PRESETS}")
    sims = []
    for n0 in lengths:
        sims.append(
            SimConfig(
                n0=n0,
                rates=rates,
                kinetics=KineticParams(kin.mean_time.copy(), kin.var_time.copy()),
                time_mode="gaussian",
                representation="counts",
                t_max=t_max,
                checkpoints=np.linspace(0.0, t_max, 11),
                pop_cap=65536,
                trials=100,
                master_seed=1,
                root_seed=DEFAULT_ROOT_SEED,
            )
        )
    return sims


def scale_config(sim: SimConfig, scale: float) -> SimConfig:
    """Shrink a config for desk-scale runs.

    Strand length divides by the factor while error rates multiply, keeping
    expected errors per replication fixed.  Replication takes proportionally
    less time, so the horizon and checkpoints divide too, preserving the
    generation depth and hence the shape of every trajectory.
    """
    if scale <= 0:
        raise ConfigError(f"scale must be positive, got {scale}")
    if scale == 1.0:
        return sim
    n0 = max(1, round(sim.n0 / scale))
    try:
        rates = ErrorRates(
            min(1.0, sim.rates.p_ins * scale),
            min(1.0, sim.rates.p_del * scale),
            sim.rates.p_sub * scale,
        )
    except ValueError as exc:
        raise ConfigError(f"scaled rates invalid: {exc}") from None
    return SimConfig(
        n0=n0,
        rates=rates,
        kinetics=KineticParams(sim.kinetics.mean_time.copy(), sim.kinetics.var_time.copy()),
        time_mode=sim.time_mode,
        representation=sim.representation,
        t_max=sim.t_max / scale,
        checkpoints=sim.checkpoints / scale,
        pop_cap=sim.pop_cap,
        trials=sim.trials,
        master_seed=sim.master_seed,
        sample_cap=sim.sample_cap,
        root_seed=sim.root_seed,
    )


def figure_preset(name: str, scale: float = 1.0, fmt: str = "csv"):
    """Named experiment sets reproducing the headline figures.

    fig1: deletion accumulation vs time for strand lengths 20k and 40k.
    fig2: per-letter deletion rates under strongly asymmetric kinetics.
    fig3: fig1 geometry with substitutions at 9.1e-6 alongside indels.

    Returns [(label, ExperimentConfig), ...]; labels name the (scaled)
    strand length.
    """
    if fmt not in FORMATS:
        raise ConfigError(f"format: must be one of {FORMATS}, got {fmt!r}")
    out = []
    for sim in _preset_sims(name):
        scaled = scale_config(sim, scale)
        label = f"n{scaled.n0}"
        exp = ExperimentConfig(sim=scaled, output=f"{name}_{label}.{fmt}", format=fmt)
        exp.validate()
        out.append((label, exp))
    return out
