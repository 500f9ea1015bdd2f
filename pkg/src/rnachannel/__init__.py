"""rnachannel: RNA replication as a noisy data-transmission channel.

Monte Carlo simulator and codec for studying how insertion, deletion and
substitution errors accumulate over generations of template replication,
together with the erasure-coding redundancy needed to survive them.
"""

__version__ = "0.1.0"

from ._backend import BACKEND, backend_name
from .codec import (
    LETTERS,
    InvalidDigit,
    InvalidNucleotide,
    LengthNotMultipleOfFour,
    decode_bytes,
    decode_digits,
    digit_to_nucleotide,
    digits_to_str,
    encode_bytes,
    encode_to_digits,
    nucleotide_to_digit,
    str_to_digits,
)
from .kinetics import (
    Composition,
    EmptyStrand,
    KineticParams,
    TimeStats,
    replication_time_stats,
    sample_replication_time,
)
from .mutation import (
    ErrorCounts,
    ErrorRates,
    mutate_counts,
    mutate_sequence,
    sample_error_counts,
)
from .simulator import (
    AggregateTrajectory,
    CheckpointSample,
    EmptyPopulation,
    Lineage,
    PopulationExtinct,
    SimConfig,
    Strand,
    TrialResult,
    config_with,
    cull_population,
    resolve_root,
    run_experiment,
    run_trial,
    sample_checkpoint,
)
from .analysis import (
    CorruptionReport,
    DegenerateSeries,
    InvalidProbability,
    LinearFit,
    aggregate_mean_se,
    corrupt_message_demo,
    erasure_bound,
    fit_linear,
)
from .config import (
    ConfigError,
    ExperimentConfig,
    config_to_text,
    figure_preset,
    load_config,
    parse_config_text,
    scale_config,
)

__all__ = [
    "BACKEND",
    "backend_name",
    "LETTERS",
    "InvalidDigit",
    "InvalidNucleotide",
    "LengthNotMultipleOfFour",
    "encode_bytes",
    "decode_bytes",
    "encode_to_digits",
    "decode_digits",
    "digits_to_str",
    "str_to_digits",
    "nucleotide_to_digit",
    "digit_to_nucleotide",
    "Composition",
    "EmptyStrand",
    "KineticParams",
    "TimeStats",
    "replication_time_stats",
    "sample_replication_time",
    "ErrorCounts",
    "ErrorRates",
    "mutate_counts",
    "mutate_sequence",
    "sample_error_counts",
    "AggregateTrajectory",
    "CheckpointSample",
    "EmptyPopulation",
    "Lineage",
    "PopulationExtinct",
    "SimConfig",
    "Strand",
    "TrialResult",
    "config_with",
    "cull_population",
    "resolve_root",
    "run_experiment",
    "run_trial",
    "sample_checkpoint",
    "CorruptionReport",
    "DegenerateSeries",
    "InvalidProbability",
    "LinearFit",
    "aggregate_mean_se",
    "corrupt_message_demo",
    "erasure_bound",
    "fit_linear",
    "ConfigError",
    "ExperimentConfig",
    "config_to_text",
    "figure_preset",
    "load_config",
    "parse_config_text",
    "scale_config",
]
