"""Polar code construction.

Reliability of the N synthetic channels is computed for the natural-order
transform ``x = u F^{(x)n}`` (no bit reversal), so index ``i`` of the result
refers directly to position ``i`` of the input vector ``u``.  The index MSB
selects the polarization step next to the channel (``x = [(a+b) G', b G']``
puts ``a`` on the check-node side), so building up from the channel each new
step contributes the next less significant bit: ``new[2i + 0]`` is the
check-node child of ``old[i]`` and ``new[2i + 1]`` its variable-node child.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

DEFAULT_DESIGN_SNR_DB = 0.0
CONSTRUCTIONS = ("ga", "bhattacharyya")

# Chung's two-piece approximation of phi(x) = 1 - E[tanh(u/2)], u ~ N(x, 2x).
_PHI_A = -0.4527
_PHI_B = 0.86
_PHI_C = 0.0218
_PHI_SPLIT = 10.0


def _log_phi(x: float) -> float:
    if x <= 0.0:
        return 0.0
    if x < _PHI_SPLIT:
        return _PHI_A * x**_PHI_B + _PHI_C
    return 0.5 * math.log(math.pi / x) - x / 4.0 + math.log1p(-10.0 / (7.0 * x))


def _log_phi_inv(target: float, upper: float) -> float:
    """Solve log phi(x) = target for x in (0, upper]."""
    if target >= _PHI_C:
        return 0.0
    if target >= _PHI_A * _PHI_SPLIT**_PHI_B + _PHI_C:
        # first piece, closed form
        return ((target - _PHI_C) / _PHI_A) ** (1.0 / _PHI_B)
    hi = max(upper, _PHI_SPLIT) + 10.0
    while _log_phi(hi) > target:
        hi *= 2.0
    return brentq(lambda v: _log_phi(v) - target, _PHI_SPLIT, hi, xtol=1e-12, rtol=1e-14, maxiter=500)


def ga_check_mean(m: float) -> float:
    """Mean LLR after a check-node combination of two channels of mean ``m``."""
    lp = _log_phi(m)
    # 1 - (1 - phi)^2 = phi * (2 - phi), evaluated in the log domain
    target = lp + math.log(2.0 - math.exp(lp))
    return _log_phi_inv(target, m)


def _interleave(check, var):
    out = np.empty(2 * len(check))
    out[0::2] = check
    out[1::2] = var
    return out


def ga_reliabilities(n_mother: int, design_snr_db: float) -> np.ndarray:
    """Mean LLR of every synthetic channel under Gaussian approximation.

    ``design_snr_db`` is the Es/N0 of the BPSK-AWGN construction channel, so
    the initial mean LLR is ``4 * 10**(snr/10)``.  Larger means are more
    reliable.
    """
    means = np.array([4.0 * 10.0 ** (design_snr_db / 10.0)])
    for _ in range(int(math.log2(n_mother))):
        worse = np.array([ga_check_mean(m) for m in means])
        means = _interleave(worse, 2.0 * means)
    return means


def bhattacharyya_reliabilities(n_mother: int, design_snr_db: float) -> np.ndarray:
    """Negative log Bhattacharyya parameters (larger is more reliable)."""
    # work with a = -ln Z to avoid underflow
    a = np.array([10.0 ** (design_snr_db / 10.0)])
    for _ in range(int(math.log2(n_mother))):
        # Z' = 2Z - Z^2  ->  -ln(Z(2 - Z))
        worse = a - np.log(2.0 - np.exp(-a))
        a = _interleave(worse, 2.0 * a)
    return a


def reliability_order(n_mother: int, design_snr_db: float, method: str = "ga") -> np.ndarray:
    """Indices sorted from least to most reliable (ties broken by index)."""
    if method == "ga":
        score = ga_reliabilities(n_mother, design_snr_db)
    elif method == "bhattacharyya":
        score = bhattacharyya_reliabilities(n_mother, design_snr_db)
    else:
        raise ValueError(f"unknown construction method {method!r}; expected one of {CONSTRUCTIONS}")
    return np.lexsort((np.arange(n_mother), score))


def _is_pow2(n: int) -> bool:
    return n > 0 and n & (n - 1) == 0


@dataclass(frozen=True, eq=False)
class PolarCode:
    """An (N, K) polar code shortened to ``target_len`` bits.

    Instances are immutable; arrays are made read-only.  ``info_set`` lists
    the non-frozen input positions in increasing order.
    """

    mother_len_n: int
    info_len_k: int
    frozen_set: np.ndarray
    target_len: int
    design_param: float = DEFAULT_DESIGN_SNR_DB
    construction: str = "ga"
    info_set: np.ndarray = field(init=False, repr=False)
    frozen_mask: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        n, k, m = self.mother_len_n, self.info_len_k, self.target_len
        if not _is_pow2(n):
            raise ValueError(f"mother length must be a power of two, got {n}")
        if not 0 < k <= m <= n:
            raise ValueError(f"need 0 < K <= target_len <= N, got K={k}, target_len={m}, N={n}")
        frozen = np.unique(np.asarray(self.frozen_set, dtype=np.int64))
        if frozen.size != n - k or (frozen.size and (frozen[0] < 0 or frozen[-1] >= n)):
            raise ValueError(f"frozen set must hold {n - k} distinct indices in [0, {n})")
        mask = np.zeros(n, dtype=bool)
        mask[frozen] = True
        if not mask[m:].all():
            raise ValueError("shortened positions must be frozen")
        info = np.flatnonzero(~mask)
        for arr in (frozen, mask, info):
            arr.setflags(write=False)
        object.__setattr__(self, "frozen_set", frozen)
        object.__setattr__(self, "frozen_mask", mask)
        object.__setattr__(self, "info_set", info)

    @property
    def rate(self) -> float:
        return self.info_len_k / self.target_len

    @property
    def key(self):
        return (self.mother_len_n, self.target_len, tuple(self.info_set.tolist()))

    def __eq__(self, other):
        if not isinstance(other, PolarCode):
            return NotImplemented
        return self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __repr__(self):
        return (f"PolarCode(N={self.mother_len_n}, K={self.info_len_k}, "
                f"target_len={self.target_len}, design={self.design_param} dB, {self.construction})")


def construct(mother_len_n: int, info_len_k: int, target_len: int | None = None,
              design_param: float = DEFAULT_DESIGN_SNR_DB, method: str = "ga") -> PolarCode:
    """Build a polar code by reliability ranking.

    The ``N - K`` least reliable channels are frozen; positions at or beyond
    ``target_len`` are forced frozen first so shortening removes only
    deterministic zeros.
    """
    n, k = int(mother_len_n), int(info_len_k)
    m = n if target_len is None else int(target_len)
    if not _is_pow2(n):
        raise ValueError(f"mother length must be a power of two, got {n}")
    if m > n:
        raise ValueError(f"target_len {m} exceeds mother length {n}")
    if not 0 < k <= m:
        raise ValueError(f"need 0 < K <= target_len, got K={k}, target_len={m}")
    order = reliability_order(n, design_param, method)
    candidates = order[order < m]
    info = np.sort(candidates[-k:])
    frozen = np.setdiff1d(np.arange(n), info)
    return PolarCode(n, k, frozen, m, float(design_param), method)


def code_for_length(length: int, info_len: int, design_param: float = DEFAULT_DESIGN_SNR_DB,
                    method: str = "ga") -> PolarCode:
    """Smallest mother code covering ``length``, shortened to it."""
    n = 1 << max(0, (int(length) - 1).bit_length())
    return construct(n, info_len, length, design_param, method)
