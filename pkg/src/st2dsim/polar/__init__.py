"""Polar component codes: construction, encoding, SC and SCAN decoding."""

from ._kernels import LLR_CLIP
from .codec import (
    encode,
    encode_systematic,
    exact_bit_posteriors,
    hard_decision,
    polar_transform,
    rate_dematch,
    rate_match,
    sc_decode,
    sequential_map_decisions,
    soft_decode,
)
from .construction import DEFAULT_DESIGN_SNR_DB, PolarCode, code_for_length, construct, reliability_order

__all__ = [
    "DEFAULT_DESIGN_SNR_DB",
    "LLR_CLIP",
    "PolarCode",
    "code_for_length",
    "construct",
    "encode",
    "encode_systematic",
    "exact_bit_posteriors",
    "hard_decision",
    "polar_transform",
    "rate_dematch",
    "rate_match",
    "reliability_order",
    "sc_decode",
    "sequential_map_decisions",
    "soft_decode",
]
