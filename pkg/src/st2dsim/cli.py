"""Command-line front end.

::

    st2dsim sweep --config run.cfg --out run.csv [--seed N]
    st2dsim preset --name fig_2d_gain --out gain.csv
    st2dsim latency --gamma 1 --time-lens 16 --space-lens 64
    st2dsim plotdata --in gain.csv --out gain.dat

Exit status is 0 on success, 1 on a validation error and 2 on an I/O error.
Every input is checked before anything is written.  Result files hold
``seconds = 0`` so that reruns are byte-identical; set ST2DSIM_RECORD_TIME=1
to keep the measured wall-clock time.
"""

from __future__ import annotations

import argparse
import dataclasses
import math
import os
import sys
import tempfile

from .harness import PRESETS, format_csv, load_config, preset, read_csv, run_sweep
from .latency import LatencyModel, decoding_latency, min_latency

RECORD_TIME_ENV = "ST2DSIM_RECORD_TIME"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{message}\n{self.format_usage().strip()}")


def _build_parser():
    p = _Parser(prog="st2dsim", description="Spatiotemporal 2-D polar coding link simulator.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("sweep", help="run the Eb/N0 sweep described by a config file")
    s.add_argument("--config", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--seed", type=int)

    s = sub.add_parser("preset", help="run every curve of a named experiment")
    s.add_argument("--name", required=True, choices=sorted(PRESETS))
    s.add_argument("--out", required=True)

    s = sub.add_parser("latency", help="decoding latency D and the trellis minimum D_min")
    s.add_argument("--gamma", type=float, default=1.0)
    s.add_argument("--time-lens", required=True)
    s.add_argument("--space-lens", required=True)

    s = sub.add_parser("plotdata", help="two-column (ebn0, fer) series per curve")
    s.add_argument("--in", dest="inp", required=True)
    s.add_argument("--out", required=True)
    return p


def _lengths(text, flag):
    try:
        vals = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ValueError(f"{flag} must be comma-separated integers, got {text!r}") from None
    if not vals or min(vals) <= 0:
        raise ValueError(f"{flag} needs at least one positive length")
    return vals


def _fmt(x):
    return str(int(x)) if float(x).is_integer() else repr(float(x))


def _check_writable(path):
    parent = os.path.dirname(os.path.abspath(path))
    if not os.path.isdir(parent):
        raise OSError(f"cannot write {path}: directory does not exist")
    if os.path.isdir(path):
        raise OSError(f"cannot write {path}: is a directory")
    if not os.access(parent, os.W_OK):
        raise OSError(f"cannot write {path}: permission denied")


def _write_atomic(path, text):
    parent = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=parent, prefix=".st2dsim-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _progress(rec):
    print(f"{rec.label or 'run'} ebn0={rec.ebn0_db:g} frames={rec.frames_run} "
          f"errors={rec.frame_errors} fer={rec.fer:.4g}", file=sys.stderr, flush=True)


def _records_text(records):
    if os.environ.get(RECORD_TIME_ENV, "") != "1":
        records = [dataclasses.replace(r, seconds=0.0) for r in records]
    return format_csv(records)


def _cmd_sweep(args):
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, master_seed=args.seed)
    _check_writable(args.out)
    _write_atomic(args.out, _records_text(run_sweep(cfg, _progress)))


def _cmd_preset(args):
    configs = preset(args.name)
    _check_writable(args.out)
    records = []
    for cfg in configs:
        records.extend(run_sweep(cfg, _progress))
    _write_atomic(args.out, _records_text(records))


def _cmd_latency(args):
    if not (math.isfinite(args.gamma) and args.gamma > 0):
        raise ValueError(f"--gamma must be positive, got {args.gamma}")
    model = LatencyModel(args.gamma)
    t = _lengths(args.time_lens, "--time-lens")
    s = _lengths(args.space_lens, "--space-lens")
    # widest trellis on which every codeword spans whole rows / columns
    width, layers = math.gcd(*t), math.gcd(*s)
    print(f"D={_fmt(decoding_latency(t, s, model))}")
    print(f"D_min={_fmt(min_latency(width, layers, model))}")


def _cmd_plotdata(args):
    records = read_csv(args.inp)
    _check_writable(args.out)
    series = {}
    for r in records:
        series.setdefault(r.label, []).append(r)
    blocks = []
    for label, recs in series.items():
        lines = [f"# {label}" if label else "# run", "# ebn0_db fer"]
        lines += [f"{r.ebn0_db:.17g} {r.fer:.17g}" for r in sorted(recs, key=lambda r: r.ebn0_db)]
        blocks.append("\n".join(lines) + "\n")
    _write_atomic(args.out, "\n\n".join(blocks))


COMMANDS = {"sweep": _cmd_sweep, "preset": _cmd_preset, "latency": _cmd_latency, "plotdata": _cmd_plotdata}


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"st2dsim: error: {exc}", file=sys.stderr)
        return 1
    try:
        COMMANDS[args.command](args)
    except OSError as exc:
        print(f"st2dsim: I/O error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"st2dsim: invalid input: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
