"""Spatiotemporal 2-D coding over the L x M_bit codeword trellis.

Rows of the trellis are layers (space axis), columns are bit positions
within a layer (time axis).  Four layouts are supported:

``time_space``
    S time codewords fill the first ``K_space`` rows (a codeword longer than
    one row takes consecutive rows), then every column is encoded by a space
    code of length L.  Decoding runs soft-output SCAN on the columns, then SC
    on the time codewords.
``space_time``
    The transpose: T space codewords fill the first ``K_time`` columns, then
    every row is encoded by a time code of length M_bit.
``time_only_parallel``
    Time codewords only, laid row-wise over all L rows.
``time_only_folded``
    One bit stream of concatenated time codewords folded symbol-by-symbol
    over the layers (symbol i goes to layer ``i mod L``).

Arrays may carry leading batch axes: info bits ``(..., K_total)`` and
trellises ``(..., L, M_bit)``.  A second-stage code of rate one is treated as
uncoded (identity), which makes rate-1 space coding identical to the 1-D
parallel layout.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import polar
from .latency import LatencyModel, decoding_latency
from .polar import PolarCode

MODES = ("time_space", "space_time", "time_only_parallel", "time_only_folded")
SOFT_OUTPUTS = ("posterior", "extrinsic")


# ---------------------------------------------------------------- layer mapping


def map_parallel(symbol_streams):
    """Parallel layer mapping: layer l carries stream s = l (S must equal L)."""
    return [np.asarray(s) for s in symbol_streams]


def demap_parallel(layers):
    return [np.asarray(x) for x in layers]


def map_folded(symbol_stream, layers_l: int, item_ndim: int = 0) -> np.ndarray:
    """Fold one stream over ``layers_l`` layers: item i -> layer i mod L, slot i // L.

    The stream axis is ``-1 - item_ndim``; trailing ``item_ndim`` axes are
    carried along (e.g. the q bits of a symbol).  Returns shape
    ``(..., L, n / L, *item)``.
    """
    x = np.asarray(symbol_stream)
    ax = x.ndim - 1 - item_ndim
    n = x.shape[ax]
    if layers_l < 1 or n % layers_l:
        raise ValueError(f"stream length {n} not divisible by L={layers_l}")
    lead, item = x.shape[:ax], x.shape[ax + 1:]
    x = x.reshape(lead + (n // layers_l, layers_l) + item)
    return np.swapaxes(x, ax, ax + 1)


def demap_folded(layers, item_ndim: int = 0) -> np.ndarray:
    """Inverse of :func:`map_folded`."""
    x = np.asarray(layers)
    ax = x.ndim - 2 - item_ndim
    x = np.swapaxes(x, ax, ax + 1)
    return x.reshape(x.shape[:ax] + (-1,) + x.shape[ax + 2:])


# ---------------------------------------------------------------- configuration


@dataclass(frozen=True)
class St2dConfig:
    """Complete description of one trellis layout and its component codes.

    ``time_codes`` are the row-direction codes and ``space_codes`` the
    column-direction codes.  In ``time_space`` and the 1-D modes the bit
    streams are the time codewords' messages; in ``space_time`` they are the
    space codewords' messages.
    """

    mode: str
    layers_l: int
    width_mbit: int
    time_codes: tuple = ()
    space_codes: tuple = ()
    modulation_q: int = 4
    scan_iterations: int = 1
    f_node: str = "min_sum"
    soft_output: str = "posterior"
    _first: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "time_codes", tuple(self.time_codes))
        object.__setattr__(self, "space_codes", tuple(self.space_codes))
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.soft_output not in SOFT_OUTPUTS:
            raise ValueError(f"soft_output must be one of {SOFT_OUTPUTS}")
        if self.scan_iterations < 1:
            raise ValueError("scan_iterations must be >= 1")
        L, M, q = self.layers_l, self.width_mbit, self.modulation_q
        if L < 1 or M < 1:
            raise ValueError("trellis dimensions must be positive")
        if M % q:
            raise ValueError(f"M_bit={M} must be a multiple of q={q}")
        if not self.time_codes:
            raise ValueError("at least one time code is required")
        getattr(self, f"_check_{self.mode}")(L, M)
        first = self.space_codes if self.mode == "space_time" else self.time_codes
        object.__setattr__(self, "_first", first)

    def _check_time_space(self, L, M):
        k_space = self._rows_of(self.time_codes, M, "time codeword length", "M_bit")
        if len(self.space_codes) != M:
            raise ValueError(f"time_space needs one space code per column ({M}), got {len(self.space_codes)}")
        for c in self.space_codes:
            if c.target_len != L or c.info_len_k != k_space:
                raise ValueError(f"space codes must be ({L}, {k_space}) to match the time-coded rows, got {c}")

    def _check_space_time(self, L, M):
        k_time = self._rows_of(self.space_codes, L, "space codeword length", "L")
        if len(self.time_codes) != L:
            raise ValueError(f"space_time needs one time code per row ({L}), got {len(self.time_codes)}")
        for c in self.time_codes:
            if c.target_len != M or c.info_len_k != k_time:
                raise ValueError(f"time codes must be ({M}, {k_time}) to match the space-coded columns, got {c}")

    def _check_time_only_parallel(self, L, M):
        if self.space_codes:
            raise ValueError("1-D modes take no space codes")
        rows = self._rows_of(self.time_codes, M, "time codeword length", "M_bit")
        if rows != L:
            raise ValueError(f"time codewords cover {rows} rows, trellis has {L}")

    def _check_time_only_folded(self, L, M):
        if self.space_codes:
            raise ValueError("1-D modes take no space codes")
        total = sum(c.target_len for c in self.time_codes)
        if total != L * M:
            raise ValueError(f"folded codewords total {total} bits, trellis holds {L * M}")
        if any(c.target_len % self.modulation_q for c in self.time_codes):
            raise ValueError("folded codeword lengths must be multiples of q")

    @staticmethod
    def _rows_of(codes, line, what, name):
        if not codes:
            raise ValueError(f"missing codes for the first coding stage")
        for c in codes:
            if c.target_len % line:
                raise ValueError(f"{what} {c.target_len} is not a multiple of {name}={line}")
        return sum(c.target_len for c in codes) // line

    # -- derived quantities

    @property
    def stream_codes(self) -> tuple:
        """Codes whose messages are the bit streams, in stream order."""
        return self._first

    @property
    def stream_count_s(self) -> int:
        return len(self.time_codes)

    @property
    def space_codeword_count_t(self) -> int:
        return len(self.space_codes)

    @property
    def stream_lengths(self) -> list:
        return [c.info_len_k for c in self._first]

    @property
    def info_len(self) -> int:
        return sum(self.stream_lengths)

    @property
    def overall_rate(self) -> float:
        return self.info_len / (self.layers_l * self.width_mbit)

    @property
    def symbols_per_layer(self) -> int:
        return self.width_mbit // self.modulation_q

    def decoding_latency(self, model: LatencyModel | None = None) -> float:
        """Decoding latency of this layout; rate-1 (uncoded) stages add nothing."""
        model = model or LatencyModel()
        time_lens = [c.target_len for c in self.time_codes if not _is_identity(c)]
        space_lens = [c.target_len for c in self.space_codes if not _is_identity(c)]
        if not space_lens:
            return model.gamma * max(time_lens)
        if not time_lens:
            return model.gamma * max(space_lens)
        return decoding_latency(time_lens, space_lens, model)


def _polar(n, k, design):
    return polar.code_for_length(n, k, design) if design is not None else polar.code_for_length(n, k)


def lowest_latency_config(mode: str, n_time: int, k_time: int, n_space: int, k_space: int,
                          modulation_q: int = 4, design_param: float | None = None, **options) -> St2dConfig:
    """2-D layout where every codeword occupies exactly one row or column.

    ``M_bit = n_time`` and ``L = n_space``.
    """
    t = _polar(n_time, k_time, design_param)
    s = _polar(n_space, k_space, design_param)
    if mode == "time_space":
        return St2dConfig(mode, n_space, n_time, (t,) * k_space, (s,) * n_time, modulation_q, **options)
    if mode == "space_time":
        return St2dConfig(mode, n_space, n_time, (t,) * n_space, (s,) * k_time, modulation_q, **options)
    raise ValueError(f"lowest_latency_config builds 2-D modes only, got {mode!r}")


def parallel_1d_config(n_time: int, k_time: int, layers_l: int, modulation_q: int = 4,
                       design_param: float | None = None, **options) -> St2dConfig:
    """1-D parallel mapping with one (n_time, k_time) codeword per layer."""
    t = _polar(n_time, k_time, design_param)
    return St2dConfig("time_only_parallel", layers_l, n_time, (t,) * layers_l, (), modulation_q, **options)


def folded_1d_config(code_len: int, k: int, layers_l: int, width_mbit: int, modulation_q: int = 4,
                     design_param: float | None = None, **options) -> St2dConfig:
    """1-D folded mapping of equal codewords of length ``code_len`` over the trellis."""
    total = layers_l * width_mbit
    if total % code_len:
        raise ValueError(f"code length {code_len} does not tile a {layers_l}x{width_mbit} trellis")
    t = _polar(code_len, k, design_param)
    return St2dConfig("time_only_folded", layers_l, width_mbit, (t,) * (total // code_len), (),
                      modulation_q, **options)


# ---------------------------------------------------------------- bit streams


@dataclass(frozen=True)
class BitStreams:
    """The S input bit streams (each may carry leading batch axes)."""

    streams: tuple

    @classmethod
    def from_flat(cls, bits, lengths: Sequence[int]) -> "BitStreams":
        bits = np.asarray(bits, dtype=np.uint8)
        if bits.shape[-1] != sum(lengths):
            raise ValueError(f"expected {sum(lengths)} bits, got {bits.shape[-1]}")
        cuts = np.cumsum(lengths)[:-1]
        return cls(tuple(np.split(bits, cuts, axis=-1)))

    @property
    def flat(self) -> np.ndarray:
        return np.concatenate([np.asarray(s, dtype=np.uint8) for s in self.streams], axis=-1)

    @property
    def lengths(self) -> list:
        return [np.shape(s)[-1] for s in self.streams]


def _as_flat(info, cfg: St2dConfig) -> np.ndarray:
    if isinstance(info, BitStreams):
        if info.lengths != cfg.stream_lengths:
            raise ValueError(f"stream lengths {info.lengths} do not match config {cfg.stream_lengths}")
        return info.flat
    bits = np.asarray(info, dtype=np.uint8)
    if bits.shape[-1] != cfg.info_len:
        raise ValueError(f"expected {cfg.info_len} info bits, got {bits.shape[-1]}")
    return bits


def _require_mode(cfg, *modes):
    if cfg.mode not in modes:
        raise ValueError(f"operation needs mode in {modes}, config has {cfg.mode!r}")


# ---------------------------------------------------------------- component-code helpers


def _is_identity(code: PolarCode) -> bool:
    return code.info_len_k == code.target_len


def _groups(codes):
    """Group equal codes: yields (code, indices)."""
    seen = {}
    for i, c in enumerate(codes):
        seen.setdefault(c, []).append(i)
    return seen.items()


def line_order(code: PolarCode) -> np.ndarray:
    """Position order of a second-stage codeword along its trellis line.

    Systematic positions (the info set) come first, then the remaining
    positions, both ascending.  Line slot ``j`` holds codeword bit
    ``line_order(code)[j]``, so the first K slots carry the message verbatim.
    """
    rest = np.setdiff1d(np.arange(code.target_len), code.info_set)
    return np.concatenate([code.info_set, rest])


def _encode_lines(codes, msgs):
    """Systematically encode ``msgs[..., i, :]`` with ``codes[i]``; output ``(..., len(codes), N)``."""
    if all(_is_identity(c) for c in codes):
        return msgs.copy()
    out = np.empty(msgs.shape[:-1] + (codes[0].target_len,), dtype=np.uint8)
    for code, idx in _groups(codes):
        if _is_identity(code):
            out[..., idx, :] = msgs[..., idx, :]
        else:
            out[..., idx, :] = polar.encode_systematic(code, msgs[..., idx, :])[..., line_order(code)]
    return out


def _soft_lines(codes, llrs, cfg):
    """SCAN every line; returns the LLRs of its K systematic bits ``(..., len(codes), K)``."""
    k = codes[0].info_len_k
    out = np.empty(llrs.shape[:-1] + (k,))
    for code, idx in _groups(codes):
        if _is_identity(code):
            out[..., idx, :] = llrs[..., idx, :]
            continue
        order = line_order(code)
        cw = np.empty(llrs.shape[:-2] + (len(idx), code.target_len))
        cw[..., order] = llrs[..., idx, :]
        _, cb = polar.soft_decode(code, cw, cfg.scan_iterations, cfg.f_node, cfg.soft_output)
        out[..., idx, :] = cb[..., code.info_set]
    return out


def _encode_concat(codes, bits):
    """Encode consecutive messages with ``codes`` and concatenate the codewords."""
    parts, pos = [], 0
    for c in codes:
        parts.append(polar.encode(c, bits[..., pos:pos + c.info_len_k]))
        pos += c.info_len_k
    return np.concatenate(parts, axis=-1)


def _sc_concat(codes, llrs, cfg):
    """SC-decode consecutive codewords laid end to end in ``llrs``."""
    starts = np.concatenate([[0], np.cumsum([c.target_len for c in codes])])
    parts = [None] * len(codes)
    for code, idx in _groups(codes):
        block = np.stack([llrs[..., starts[i]:starts[i] + code.target_len] for i in idx], axis=-2)
        info, _ = polar.sc_decode(code, block, cfg.f_node)
        for j, i in enumerate(idx):
            parts[i] = info[..., j, :]
    return np.concatenate(parts, axis=-1)


# ---------------------------------------------------------------- 2-D product layout


def _product_encode(bits, first, second, line_len):
    """First stage fills a (K2 x line_len) region; second stage encodes each of its lines.

    Returns ``(..., line_len, N2)``: one second-stage codeword per line.
    """
    region = _encode_concat(first, bits)
    region = region.reshape(region.shape[:-1] + (-1, line_len))
    return _encode_lines(second, np.swapaxes(region, -1, -2))


def _product_decode(lines, first, second, cfg):
    """Inverse of :func:`_product_encode` on LLRs ``(..., line_len, N2)``."""
    soft = _soft_lines(second, lines, cfg)
    region = np.swapaxes(soft, -1, -2)
    region = region.reshape(region.shape[:-2] + (-1,))
    return _sc_concat(first, region, cfg)


def encode_time_space(info, cfg: St2dConfig) -> np.ndarray:
    """Time codes row-wise, then space codes column-wise; returns ``(..., L, M_bit)``."""
    _require_mode(cfg, "time_space")
    bits = _as_flat(info, cfg)
    cols = _product_encode(bits, cfg.time_codes, cfg.space_codes, cfg.width_mbit)
    return np.swapaxes(cols, -1, -2)


def encode_space_time(info, cfg: St2dConfig) -> np.ndarray:
    """Space codes column-wise, then time codes row-wise; returns ``(..., L, M_bit)``."""
    _require_mode(cfg, "space_time")
    bits = _as_flat(info, cfg)
    return _product_encode(bits, cfg.space_codes, cfg.time_codes, cfg.layers_l)


def encode_1d(info, cfg: St2dConfig) -> np.ndarray:
    _require_mode(cfg, "time_only_parallel", "time_only_folded")
    bits = _as_flat(info, cfg)
    stream = _encode_concat(cfg.time_codes, bits)
    if cfg.mode == "time_only_parallel":
        return stream.reshape(stream.shape[:-1] + (cfg.layers_l, cfg.width_mbit))
    q = cfg.modulation_q
    symbols = stream.reshape(stream.shape[:-1] + (-1, q))
    layers = map_folded(symbols, cfg.layers_l, item_ndim=1)
    return layers.reshape(layers.shape[:-2] + (cfg.width_mbit,))


def encode(info, cfg: St2dConfig) -> np.ndarray:
    """Encode for whichever mode ``cfg`` selects."""
    if cfg.mode == "time_space":
        return encode_time_space(info, cfg)
    if cfg.mode == "space_time":
        return encode_space_time(info, cfg)
    return encode_1d(info, cfg)


def _check_llrs(llrs, cfg):
    llrs = np.asarray(llrs, dtype=np.float64)
    if llrs.shape[-2:] != (cfg.layers_l, cfg.width_mbit):
        raise ValueError(f"LLR trellis is {llrs.shape[-2:]}, config expects {(cfg.layers_l, cfg.width_mbit)}")
    return llrs


def _finish(bits, cfg, truth):
    if truth is None:
        return bits, None
    truth = _as_flat(truth, cfg)
    wrong = bits != truth
    cuts = np.cumsum(cfg.stream_lengths)[:-1]
    flags = np.stack([w.any(axis=-1) for w in np.split(wrong, cuts, axis=-1)], axis=-1)
    return bits, flags


def decode_time_space(llrs, cfg: St2dConfig, truth=None):
    """SCAN on every column, then SC on every time codeword.

    Returns ``(info_bits, flags)``; ``flags[..., s]`` marks stream ``s`` as
    wrong when ``truth`` is given, otherwise ``flags`` is None.
    """
    _require_mode(cfg, "time_space")
    llrs = _check_llrs(llrs, cfg)
    bits = _product_decode(np.swapaxes(llrs, -1, -2), cfg.time_codes, cfg.space_codes, cfg)
    return _finish(bits, cfg, truth)


def decode_space_time(llrs, cfg: St2dConfig, truth=None):
    """SCAN on every row (time codes), then SC on every space codeword."""
    _require_mode(cfg, "space_time")
    llrs = _check_llrs(llrs, cfg)
    bits = _product_decode(llrs, cfg.space_codes, cfg.time_codes, cfg)
    return _finish(bits, cfg, truth)


def decode_1d(llrs, cfg: St2dConfig, truth=None):
    """SC decoding of every time codeword (after de-folding in folded mode)."""
    _require_mode(cfg, "time_only_parallel", "time_only_folded")
    llrs = _check_llrs(llrs, cfg)
    if cfg.mode == "time_only_parallel":
        stream = llrs.reshape(llrs.shape[:-2] + (-1,))
    else:
        q = cfg.modulation_q
        grouped = llrs.reshape(llrs.shape[:-1] + (-1, q))
        stream = demap_folded(grouped, item_ndim=1)
        stream = stream.reshape(stream.shape[:-2] + (-1,))
    bits = _sc_concat(cfg.time_codes, stream, cfg)
    return _finish(bits, cfg, truth)


def decode(llrs, cfg: St2dConfig, truth=None):
    if cfg.mode == "time_space":
        return decode_time_space(llrs, cfg, truth)
    if cfg.mode == "space_time":
        return decode_space_time(llrs, cfg, truth)
    return decode_1d(llrs, cfg, truth)
