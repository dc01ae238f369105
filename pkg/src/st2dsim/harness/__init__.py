"""Monte-Carlo simulation: sweeps, stop rules, seeding, presets and result files."""

from .io import CSV_FIELDS, format_csv, load_config, parse_config, parse_csv, read_csv, write_csv
from .presets import PRESETS, find, info_len, preset
from .sim import (
    WORKERS_ENV,
    FerRecord,
    SimConfig,
    StopRule,
    point_seed,
    resolve_workers,
    run_point,
    run_sweep,
)

__all__ = [
    "CSV_FIELDS",
    "FerRecord",
    "PRESETS",
    "SimConfig",
    "StopRule",
    "WORKERS_ENV",
    "find",
    "format_csv",
    "info_len",
    "load_config",
    "parse_config",
    "parse_csv",
    "point_seed",
    "preset",
    "read_csv",
    "resolve_workers",
    "run_point",
    "run_sweep",
    "write_csv",
]
