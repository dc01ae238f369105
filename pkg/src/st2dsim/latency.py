"""Decoding-latency model for the 2-D trellis.

Decoding starts once the whole trellis is received, all decoders of one
domain run in parallel, and decoding a codeword of length N takes
``gamma * N``.
"""

from __future__ import annotations

from dataclasses import dataclass

SPECIAL_CASES = ("parallel_rows_rate1_space", "single_folded_stream")


@dataclass(frozen=True)
class LatencyModel:
    gamma: float = 1.0

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")


def _longest(lengths, name):
    lengths = list(lengths)
    if not lengths:
        raise ValueError(f"{name} must be non-empty")
    if any(n <= 0 for n in lengths):
        raise ValueError(f"{name} must be positive")
    return max(lengths)


def decoding_latency(time_lengths, space_lengths, model: LatencyModel | None = None) -> float:
    """``gamma * (max N_time + max N_space)``."""
    model = model or LatencyModel()
    return model.gamma * (_longest(time_lengths, "time_lengths") + _longest(space_lengths, "space_lengths"))


def min_latency(width_mbit: int, layers_l: int, model: LatencyModel | None = None) -> float:
    """Lowest 2-D latency, reached when every codeword spans one row or column."""
    if width_mbit <= 0 or layers_l <= 0:
        raise ValueError("width_mbit and layers_l must be positive")
    model = model or LatencyModel()
    return model.gamma * (width_mbit + layers_l)


def special_case_latency(mode: str, width_mbit: int, layers_l: int, model: LatencyModel | None = None) -> float:
    """Latency of the two 1-D limits of the trellis.

    ``parallel_rows_rate1_space``: one codeword per row, uncoded columns,
    so only the row decoders run.  ``single_folded_stream``: one codeword
    covering the whole trellis.
    """
    model = model or LatencyModel()
    if mode == "parallel_rows_rate1_space":
        return model.gamma * width_mbit
    if mode == "single_folded_stream":
        return model.gamma * layers_l * width_mbit
    raise ValueError(f"unknown special case {mode!r}; expected one of {SPECIAL_CASES}")
