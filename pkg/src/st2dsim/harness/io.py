"""CSV results and the flat ``key = value`` simulation config format.

Config files mirror :class:`SimConfig`: top-level keys are its scalar
fields, ``stop_rule.*`` and ``mimo.*`` fill the nested dataclasses, and
``st2d.*`` describes the trellis through its builder parameters::

    # T-S, one codeword per row and per column
    label = ts16
    st2d.mode = time_space
    st2d.time_len = 16
    st2d.time_info = 8
    st2d.space_len = 64
    st2d.space_info = 32
    mimo.tx_antennas_nt = 64
    mimo.rx_antennas_nr = 128
    ebn0_points_db = -10, -9.5, -9
    stop_rule.min_frame_errors = 100
    master_seed = 7

Blank lines and ``#`` comments are ignored; unknown keys are errors.
"""

from __future__ import annotations

import csv
import io
from dataclasses import fields

from ..phy import MimoConfig
from ..st2d import folded_1d_config, lowest_latency_config, parallel_1d_config
from .sim import FerRecord, SimConfig, StopRule

CSV_FIELDS = ("ebn0_db", "frames", "frame_errors", "fer", "bit_errors", "ber", "seconds")


def _num(x: float) -> str:
    # 17 significant digits round-trip every float exactly
    return format(float(x), ".17g")


def format_csv(records) -> str:
    records = list(records)
    labeled = any(r.label for r in records)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS + (("label",) if labeled else ()))
    for r in records:
        row = [_num(r.ebn0_db), r.frames_run, r.frame_errors, _num(r.fer), r.bit_errors, _num(r.ber),
               f"{r.seconds:.6f}"]
        if labeled:
            row.append(r.label)
        w.writerow(row)
    return buf.getvalue()


def write_csv(records, path) -> None:
    """Write records with the standard header; a ``label`` column is added when any record has one."""
    text = format_csv(records)
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def parse_csv(text: str) -> list:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        raise ValueError("empty CSV")
    head = tuple(rows[0])
    if head[:len(CSV_FIELDS)] != CSV_FIELDS or head[len(CSV_FIELDS):] not in ((), ("label",)):
        raise ValueError(f"unexpected CSV header {','.join(head)}")
    out = []
    for n, row in enumerate(rows[1:], start=2):
        if len(row) != len(head):
            raise ValueError(f"line {n}: expected {len(head)} fields, got {len(row)}")
        rec = dict(zip(head, row))
        try:
            out.append(FerRecord(float(rec["ebn0_db"]), int(rec["frames"]), int(rec["frame_errors"]),
                                 int(rec["bit_errors"]), float(rec["ber"]), float(rec["seconds"]),
                                 rec.get("label", "")))
        except ValueError as exc:
            raise ValueError(f"line {n}: {exc}") from None
    return out


def read_csv(path) -> list:
    """Parse a results file; ``fer`` is re-derived from the counts."""
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            text = fh.read()
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc.strerror or exc}") from exc
    return parse_csv(text)


# ---------------------------------------------------------------- config files

_ST2D_KEYS = {"mode", "time_len", "time_info", "space_len", "space_info", "width_mbit",
              "scan_iterations", "f_node", "soft_output", "design_snr_db"}
_MIMO_KEYS = {f.name for f in fields(MimoConfig)}
_STOP_KEYS = {f.name for f in fields(StopRule)}
_TOP_KEYS = {"ebn0_points_db", "master_seed", "worker_count", "block_frames", "fer_floor", "noiseless", "label"}
_INT_KEYS = {"time_len", "time_info", "space_len", "space_info", "width_mbit", "scan_iterations",
             "tx_antennas_nt", "rx_antennas_nr", "modulation_q", "min_frame_errors", "max_frames",
             "master_seed", "worker_count", "block_frames"}
_FLOAT_KEYS = {"design_snr_db", "fer_floor"}


def _convert(key, raw):
    try:
        if key in _INT_KEYS:
            return int(raw)
        if key in _FLOAT_KEYS:
            return float(raw)
    except ValueError:
        raise ValueError(f"{key}: expected a number, got {raw!r}") from None
    if key == "ebn0_points_db":
        try:
            return tuple(float(v) for v in raw.split(",") if v.strip())
        except ValueError:
            raise ValueError(f"ebn0_points_db: expected comma-separated numbers, got {raw!r}") from None
    if key == "noiseless":
        low = raw.lower()
        if low not in ("true", "false", "1", "0", "yes", "no"):
            raise ValueError(f"noiseless: expected a boolean, got {raw!r}")
        return low in ("true", "1", "yes")
    return raw


def _split(text):
    groups = {"": {}, "st2d": {}, "mimo": {}, "stop_rule": {}}
    allowed = {"": _TOP_KEYS, "st2d": _ST2D_KEYS, "mimo": _MIMO_KEYS, "stop_rule": _STOP_KEYS}
    for n, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {n}: expected 'key = value'")
        key, raw = (s.strip() for s in line.split("=", 1))
        group, _, name = key.rpartition(".")
        if group not in groups or name not in allowed[group]:
            raise ValueError(f"line {n}: unknown key {key!r}")
        if name in groups[group]:
            raise ValueError(f"line {n}: duplicate key {key!r}")
        groups[group][name] = _convert(name, raw)
    return groups


def _build_st2d(p, mimo):
    p = dict(p)
    mode = p.pop("mode", None)
    if mode is None:
        raise ValueError("st2d.mode is required")
    opts = {k: p.pop(k) for k in ("scan_iterations", "f_node", "soft_output") if k in p}
    design = p.pop("design_snr_db", None)
    q = mimo.modulation_q

    def need(*names):
        missing = [k for k in names if k not in p]
        if missing:
            raise ValueError(f"{mode} needs " + ", ".join(f"st2d.{k}" for k in missing))
        vals = [p.pop(k) for k in names]
        if p:
            raise ValueError(f"{mode} does not use " + ", ".join(f"st2d.{k}" for k in sorted(p)))
        return vals

    if mode in ("time_space", "space_time"):
        nt, kt, ns, ks = need("time_len", "time_info", "space_len", "space_info")
        return lowest_latency_config(mode, nt, kt, ns, ks, q, design, **opts)
    if mode == "time_only_parallel":
        nt, kt = need("time_len", "time_info")
        return parallel_1d_config(nt, kt, mimo.layers_l, q, design, **opts)
    if mode == "time_only_folded":
        nt, kt, m = need("time_len", "time_info", "width_mbit")
        return folded_1d_config(nt, kt, mimo.layers_l, m, q, design, **opts)
    raise ValueError(f"unknown st2d.mode {mode!r}")


def parse_config(text: str) -> SimConfig:
    """Build a :class:`SimConfig` from config-file text; raises ValueError on any problem."""
    g = _split(text)
    mimo = MimoConfig(**g["mimo"])
    st = _build_st2d(g["st2d"], mimo)
    top = g[""]
    if "ebn0_points_db" not in top:
        raise ValueError("ebn0_points_db is required")
    return SimConfig(st2d=st, mimo=mimo, stop_rule=StopRule(**g["stop_rule"]), **top)


def load_config(path) -> SimConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc.strerror or exc}") from exc
    return parse_config(text)
