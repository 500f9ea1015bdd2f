"""Command-line interface.

Subcommands: encode, decode, simulate, figure, bound.  Output is
machine-readable (CSV or JSON trajectories, raw bytes, plain numbers) and
byte-for-byte deterministic for a given config, seed and backend,
regardless of --threads.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from ._backend import backend_name
from .analysis import erasure_bound
from .codec import decode_bytes, encode_bytes
from .config import (
    FORMATS,
    PRESETS,
    ConfigError,
    ExperimentConfig,
    config_to_text,
    figure_preset,
    format_number,
    load_config,
)
from .simulator import AggregateTrajectory, config_with, run_experiment

TRAJECTORY_COLUMNS = [
    "time_s",
    "population",
    "mean_generation",
    "del_rate",
    "ins_rate",
    "sub_rate",
    "del_rate_A",
    "del_rate_C",
    "del_rate_G",
    "del_rate_U",
    "mean_generation_se",
    "del_rate_se",
    "ins_rate_se",
    "sub_rate_se",
    "del_rate_A_se",
    "del_rate_C_se",
    "del_rate_G_se",
    "del_rate_U_se",
]


def trajectory_rows(agg: AggregateTrajectory):
    """Rows of plain floats in TRAJECTORY_COLUMNS order."""
    rows = []
    for i in range(agg.times.size):
        rows.append(
            [
                float(agg.times[i]),
                float(agg.population[i]),
                float(agg.mean_generation[i]),
                float(agg.del_rate[i]),
                float(agg.ins_rate[i]),
                float(agg.sub_rate[i]),
                float(agg.del_rate_by_letter[i, 0]),
                float(agg.del_rate_by_letter[i, 1]),
                float(agg.del_rate_by_letter[i, 2]),
                float(agg.del_rate_by_letter[i, 3]),
                float(agg.mean_generation_se[i]),
                float(agg.del_rate_se[i]),
                float(agg.ins_rate_se[i]),
                float(agg.sub_rate_se[i]),
                float(agg.del_rate_by_letter_se[i, 0]),
                float(agg.del_rate_by_letter_se[i, 1]),
                float(agg.del_rate_by_letter_se[i, 2]),
                float(agg.del_rate_by_letter_se[i, 3]),
            ]
        )
    return rows


def trajectory_csv_text(agg: AggregateTrajectory) -> str:
    lines = [",".join(TRAJECTORY_COLUMNS)]
    for row in trajectory_rows(agg):
        lines.append(",".join(format_number(v) for v in row))
    return "\n".join(lines) + "\n"


def trajectory_json_text(agg: AggregateTrajectory, exp: ExperimentConfig) -> str:
    doc = {
        "config": config_to_text(exp),
        "columns": TRAJECTORY_COLUMNS,
        "rows": trajectory_rows(agg),
    }
    return json.dumps(doc, indent=2) + "\n"


def write_trajectory(agg: AggregateTrajectory, exp: ExperimentConfig, out_path: Path):
    """Write the trajectory plus reparseable config metadata.

    CSV gets a ``<output>.meta.cfg`` sidecar; JSON embeds the config text.
    """
    out_path.parent.mkdir(parents=True, exist_ok=True)
    if exp.format == "csv":
        out_path.write_text(trajectory_csv_text(agg), encoding="utf-8")
        meta = out_path.with_name(out_path.name + ".meta.cfg")
        meta.write_text(config_to_text(exp), encoding="utf-8")
    else:
        out_path.write_text(trajectory_json_text(agg, exp), encoding="utf-8")


def _read_input(path: str | None) -> bytes:
    if path is None or path == "-":
        return sys.stdin.buffer.read()
    return Path(path).read_bytes()


def _write_output(path: str | None, data: bytes):
    if path is None or path == "-":
        sys.stdout.buffer.write(data)
        sys.stdout.buffer.flush()
    else:
        Path(path).write_bytes(data)


def _cmd_encode(args) -> int:
    data = _read_input(args.input)
    _write_output(args.output, (encode_bytes(data) + "\n").encode("ascii"))
    return 0


def _cmd_decode(args) -> int:
    text = _read_input(args.input).decode("ascii", errors="replace")
    text = "".join(text.split())  # tolerate whitespace and line breaks
    data = decode_bytes(text)
    _write_output(args.output, data)
    return 0


def _apply_overrides(exp: ExperimentConfig, args) -> ExperimentConfig:
    sim = exp.sim
    if args.seed is not None:
        sim = config_with(sim, master_seed=args.seed)
    fmt = args.format or exp.format
    output = args.output or exp.output
    new = ExperimentConfig(sim=sim, output=output, format=fmt)
    new.validate()
    return new


def _cmd_simulate(args) -> int:
    exp = load_config(args.config)
    exp = _apply_overrides(exp, args)
    agg = run_experiment(exp.sim, threads=args.threads)
    out_path = Path(exp.output)
    write_trajectory(agg, exp, out_path)
    print(f"wrote {out_path} ({exp.sim.trials} trials, backend={backend_name()})")
    return 0


def _cmd_figure(args) -> int:
    outdir = Path(args.output) if args.output else Path(".")
    fmt = args.format or "csv"
    for label, exp in figure_preset(args.preset, scale=args.scale, fmt=fmt):
        if args.seed is not None:
            exp = ExperimentConfig(
                sim=config_with(exp.sim, master_seed=args.seed),
                output=exp.output,
                format=exp.format,
            )
        agg = run_experiment(exp.sim, threads=args.threads)
        out_path = outdir / exp.output
        write_trajectory(agg, exp, out_path)
        print(f"wrote {out_path} ({label}, {exp.sim.trials} trials)")
    return 0


def _cmd_bound(args) -> int:
    print(format_number(erasure_bound(args.p_del)))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="rnachannel",
        description="Replication-as-a-noisy-channel simulator and codec",
    )
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    enc = sub.add_parser("encode", help="bytes -> nucleotide text")
    enc.add_argument("--input", "-i", default=None, help="input file ('-' or omit for stdin)")
    enc.add_argument("--output", "-o", default=None, help="output file ('-' or omit for stdout)")
    enc.set_defaults(fn=_cmd_encode)

    dec = sub.add_parser("decode", help="nucleotide text -> bytes")
    dec.add_argument("--input", "-i", default=None)
    dec.add_argument("--output", "-o", default=None)
    dec.set_defaults(fn=_cmd_decode)

    simp = sub.add_parser("simulate", help="run an experiment from a config file")
    simp.add_argument("config", help="key=value config file")
    simp.add_argument("--seed", type=int, default=None, help="override master_seed")
    simp.add_argument("--threads", type=int, default=1)
    simp.add_argument("--format", choices=FORMATS, default=None)
    simp.add_argument("--output", "-o", default=None)
    simp.set_defaults(fn=_cmd_simulate)

    fig = sub.add_parser("figure", help="run a named preset experiment set")
    fig.add_argument("preset", choices=PRESETS)
    fig.add_argument("--scale", type=float, default=1.0, help="divide n0 and multiply rates")
    fig.add_argument("--seed", type=int, default=None)
    fig.add_argument("--threads", type=int, default=1)
    fig.add_argument("--format", choices=FORMATS, default=None)
    fig.add_argument("--output", "-o", default=None, help="output directory")
    fig.set_defaults(fn=_cmd_figure)

    bnd = sub.add_parser("bound", help="erasure-correction redundancy bound")
    bnd.add_argument("p_del", type=float)
    bnd.set_defaults(fn=_cmd_bound)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigError, ValueError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
