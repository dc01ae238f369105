"""Spatiotemporal 2-D polar coding over massive-MIMO layers.

Subpackages: :mod:`~st2dsim.polar` (component codes), :mod:`~st2dsim.st2d`
(codeword trellis layouts), :mod:`~st2dsim.phy` (QAM, Rayleigh MIMO,
MMSE), :mod:`~st2dsim.latency` and :mod:`~st2dsim.harness` (Monte-Carlo
sweeps).
"""

from . import harness, latency, phy, polar, st2d
from ._accel import USE_NUMBA, backend_name
from .latency import LatencyModel, decoding_latency, min_latency, special_case_latency
from .phy import MimoConfig, NoisePoint, transmit_frame
from .st2d import St2dConfig, decode, encode, lowest_latency_config, parallel_1d_config

__version__ = "0.1.0"

__all__ = [
    "LatencyModel",
    "MimoConfig",
    "NoisePoint",
    "St2dConfig",
    "USE_NUMBA",
    "backend_name",
    "decode",
    "decoding_latency",
    "encode",
    "harness",
    "latency",
    "lowest_latency_config",
    "min_latency",
    "parallel_1d_config",
    "phy",
    "polar",
    "special_case_latency",
    "st2d",
]
