"""Named experiment setups, one list of labeled curves per result figure.

Eb/N0 grids are placed where the curves fall under this package's
normalization (see :func:`st2dsim.phy.ebn0_to_sigma2`).  With MMSE over a
64 x 128 link the array gain puts the waterfalls around -14 to -4 dB.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from ..phy import MimoConfig
from ..st2d import lowest_latency_config, parallel_1d_config
from .sim import SimConfig, StopRule

Q = 4
DEFAULT_STOP = StopRule(100, 1_000_000)
DEFAULT_FLOOR = 1e-4


def info_len(n: int, rate) -> int:
    """``K = round(N * R)`` with exact rational arithmetic (halves round up)."""
    return int(Fraction(n) * Fraction(rate) + Fraction(1, 2))


def _grid(lo, hi, step=0.5):
    return tuple(float(x) for x in np.arange(lo, hi + step / 2, step))


def _rate_tag(r):
    r = Fraction(r)
    return f"{r.numerator}/{r.denominator}"


def _one_d(n_s, rate, mimo, grid, seed):
    st = parallel_1d_config(n_s, info_len(n_s, rate), mimo.layers_l, Q)
    return SimConfig(st, mimo, grid, DEFAULT_STOP, seed, fer_floor=DEFAULT_FLOOR,
                     label=f"1d-Ns{n_s}-R{_rate_tag(rate)}")


def _two_d(mode, n_time, n_space, r_time, r_space, mimo, grid, seed):
    st = lowest_latency_config(mode, n_time, info_len(n_time, r_time), n_space, info_len(n_space, r_space), Q)
    tag = "TS" if mode == "time_space" else "ST"
    label = f"2d-{tag}-Nt{n_time}-Ns{n_space}-R{_rate_tag(r_time)}x{_rate_tag(r_space)}"
    return SimConfig(st, mimo, grid, DEFAULT_STOP, seed, fer_floor=DEFAULT_FLOOR, label=label)


def _link(nt=64, nr=128):
    return MimoConfig(nt, nr, Q)


def fig_1d_lengths():
    grid = _grid(-14.0, -4.0)
    return [_one_d(n, Fraction(1, 4), _link(), grid, 100 + i) for i, n in enumerate((16, 32, 64, 128))]


def fig_2d_gain():
    grid = _grid(-13.0, -4.0)
    one = [_one_d(n, Fraction(1, 4), _link(), grid, 200 + i) for i, n in enumerate((16, 32, 64))]
    two = [_two_d("time_space", n, 64, Fraction(1, 2), Fraction(1, 2), _link(), grid, 210 + i)
           for i, n in enumerate((16, 32, 64))]
    return one + two


def fig_nspace_sweep():
    # antennas follow the space code: nt = N_space, nr = 2 nt
    grid = _grid(-17.0, -2.0)
    out = []
    for i, n_time in enumerate((16, 32, 64)):
        for j, n_space in enumerate((32, 64, 128)):
            out.append(_two_d("time_space", n_time, n_space, Fraction(1, 2), Fraction(1, 2),
                              _link(n_space, 2 * n_space), grid, 300 + 10 * i + j))
    return out


RSPACE_PAIRS = ((Fraction(1, 3), Fraction(3, 4)), (Fraction(1, 2), Fraction(1, 2)),
                (Fraction(2, 3), Fraction(3, 8)))


def fig_rspace_sweep():
    # R_time * R_space held at 1/4
    grid = _grid(-13.0, -3.0)
    out = []
    for i, n_time in enumerate((16, 32, 64)):
        for j, (rt, rs) in enumerate(RSPACE_PAIRS):
            out.append(_two_d("time_space", n_time, 64, rt, rs, _link(), grid, 400 + 10 * i + j))
    return out


def fig_ts_vs_st():
    grid = _grid(-13.0, -4.0)
    return [
        _one_d(16, Fraction(1, 4), _link(), grid, 500),
        _two_d("time_space", 16, 64, Fraction(1, 2), Fraction(1, 2), _link(), grid, 501),
        _two_d("space_time", 16, 64, Fraction(1, 2), Fraction(1, 2), _link(), grid, 502),
    ]


PRESETS = {
    "fig_1d_lengths": fig_1d_lengths,
    "fig_2d_gain": fig_2d_gain,
    "fig_nspace_sweep": fig_nspace_sweep,
    "fig_rspace_sweep": fig_rspace_sweep,
    "fig_ts_vs_st": fig_ts_vs_st,
}


def preset(name: str) -> list:
    """Labeled :class:`SimConfig` curves of the named experiment."""
    try:
        build = PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    return build()


def find(configs, label: str) -> SimConfig:
    for c in configs:
        if c.label == label:
            return c
    raise KeyError(label)
