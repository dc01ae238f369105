"""Encoding, rate matching and decoding for :class:`PolarCode`.

All functions accept a single vector or a batch with arbitrary leading
dimensions; the last axis is the bit/LLR axis.  LLRs follow the convention
``log P(bit=0) / P(bit=1)``.
"""

from __future__ import annotations

import itertools

import numpy as np

from ._kernels import LLR_CLIP, scan_decode_batch, sc_decode_batch
from .construction import PolarCode

F_NODES = ("min_sum", "exact")
MAX_ENUM_N = 16


def _check_f_node(f_node):
    if f_node not in F_NODES:
        raise ValueError(f"f_node must be one of {F_NODES}, got {f_node!r}")
    return f_node == "exact"


def polar_transform(u: np.ndarray) -> np.ndarray:
    """``u @ F^{(x)n}`` over GF(2) along the last axis, F = [[1, 0], [1, 1]]."""
    x = np.array(u, dtype=np.uint8, copy=True)
    big_n = x.shape[-1]
    if big_n & (big_n - 1):
        raise ValueError(f"length must be a power of two, got {big_n}")
    lead = x.shape[:-1]
    half = 1
    while half < big_n:
        v = x.reshape(lead + (big_n // (2 * half), 2, half))
        v[..., 0, :] ^= v[..., 1, :]
        half *= 2
    return x


def rate_match(mother_bits: np.ndarray, target_len: int) -> np.ndarray:
    """Shorten to ``target_len`` by dropping the trailing positions."""
    mother_bits = np.asarray(mother_bits)
    if target_len > mother_bits.shape[-1]:
        raise ValueError(f"target_len {target_len} exceeds mother length {mother_bits.shape[-1]}")
    return mother_bits[..., :target_len]


def rate_dematch(llrs: np.ndarray, mother_len: int) -> np.ndarray:
    """Restore length ``mother_len``; shortened positions get +LLR_CLIP (known zero)."""
    llrs = np.asarray(llrs, dtype=np.float64)
    m = llrs.shape[-1]
    if m > mother_len:
        raise ValueError(f"LLR length {m} exceeds mother length {mother_len}")
    out = np.full(llrs.shape[:-1] + (mother_len,), LLR_CLIP)
    out[..., :m] = llrs
    return out


def _saturate(llrs):
    return np.clip(np.nan_to_num(llrs, nan=0.0, posinf=LLR_CLIP, neginf=-LLR_CLIP), -LLR_CLIP, LLR_CLIP)


def encode(code: PolarCode, info_bits: np.ndarray) -> np.ndarray:
    """Encode ``K`` info bits (last axis) to ``target_len`` code bits."""
    info_bits = np.asarray(info_bits, dtype=np.uint8)
    if info_bits.shape[-1] != code.info_len_k:
        raise ValueError(f"expected {code.info_len_k} info bits, got {info_bits.shape[-1]}")
    u = np.zeros(info_bits.shape[:-1] + (code.mother_len_n,), dtype=np.uint8)
    u[..., code.info_set] = info_bits
    return rate_match(polar_transform(u), code.target_len)


def encode_systematic(code: PolarCode, info_bits: np.ndarray) -> np.ndarray:
    """Systematic encoding: the codeword carries ``info_bits`` at ``code.info_set``.

    Uses the two-pass transform (place, transform, clear frozen, transform),
    valid for the domination-contiguous info sets produced by
    :func:`construct`.
    """
    info_bits = np.asarray(info_bits, dtype=np.uint8)
    if info_bits.shape[-1] != code.info_len_k:
        raise ValueError(f"expected {code.info_len_k} info bits, got {info_bits.shape[-1]}")
    v = np.zeros(info_bits.shape[:-1] + (code.mother_len_n,), dtype=np.uint8)
    v[..., code.info_set] = info_bits
    u = polar_transform(v)
    u[..., code.frozen_mask] = 0
    return rate_match(polar_transform(u), code.target_len)


def _prepare(code, llrs):
    llrs = np.asarray(llrs, dtype=np.float64)
    if llrs.shape[-1] != code.target_len:
        raise ValueError(f"expected {code.target_len} LLRs, got {llrs.shape[-1]}")
    lead = llrs.shape[:-1]
    full = rate_dematch(_saturate(llrs), code.mother_len_n)
    return lead, full.reshape(-1, code.mother_len_n)


def sc_decode(code: PolarCode, llrs: np.ndarray, f_node: str = "min_sum"):
    """Successive-cancellation decoding.

    Returns ``(info_bits, codeword)`` where ``codeword`` is the re-encoded
    hard decision, shortened to ``target_len``.  An LLR of exactly zero
    decides bit 0.
    """
    exact = _check_f_node(f_node)
    lead, flat = _prepare(code, llrs)
    u, x = sc_decode_batch(flat, code.frozen_mask, exact)
    info = u[:, code.info_set].reshape(lead + (code.info_len_k,))
    cw = x[:, :code.target_len].reshape(lead + (code.target_len,))
    return info, cw


def soft_decode(code: PolarCode, llrs: np.ndarray, iterations: int = 1,
                f_node: str = "min_sum", output: str = "posterior"):
    """SCAN soft-in/soft-out decoding.

    Returns ``(info_llrs, codebit_llrs)``.  ``output`` selects posterior
    (channel + extrinsic) or extrinsic-only code-bit LLRs.  On the info
    positions the prior is zero, so both choices give the same values there.
    """
    if output not in ("posterior", "extrinsic"):
        raise ValueError(f"output must be 'posterior' or 'extrinsic', got {output!r}")
    exact = _check_f_node(f_node)
    lead, flat = _prepare(code, llrs)
    leaf, root = scan_decode_batch(flat, code.frozen_mask, iterations, exact)
    info = leaf[:, code.info_set].reshape(lead + (code.info_len_k,))
    cb = root[:, :code.target_len]
    if output == "posterior":
        cb = cb + flat[:, :code.target_len]
    return info, cb.reshape(lead + (code.target_len,))


def hard_decision(llrs: np.ndarray) -> np.ndarray:
    """Bit 1 iff the LLR is strictly negative."""
    return (np.asarray(llrs) < 0).astype(np.uint8)


# ---------------------------------------------------------------- oracles


def _codebook(code: PolarCode):
    if code.mother_len_n > MAX_ENUM_N:
        raise ValueError(f"enumeration limited to N <= {MAX_ENUM_N}, got N={code.mother_len_n}")
    msgs = np.array(list(itertools.product((0, 1), repeat=code.info_len_k)), dtype=np.uint8)
    return msgs, encode(code, msgs)


def _log_likelihoods(codewords, llrs):
    # log P(y|c) up to a constant: sum_j (1 - 2 c_j) * llr_j / 2
    signs = 1.0 - 2.0 * codewords.astype(np.float64)
    return 0.5 * np.asarray(llrs, dtype=np.float64) @ signs.T


def _llr_from_loglik(loglik, bits):
    # loglik (..., M), bits (M,) -> log sum_{bit=0} - log sum_{bit=1}
    zero = np.where(bits == 0, loglik, -np.inf)
    one = np.where(bits == 1, loglik, -np.inf)
    return np.logaddexp.reduce(zero, axis=-1) - np.logaddexp.reduce(one, axis=-1)


def exact_bit_posteriors(code: PolarCode, llrs: np.ndarray) -> np.ndarray:
    """Exact posterior LLR of every info bit by summing over all 2^K codewords."""
    msgs, cws = _codebook(code)
    llrs = np.asarray(llrs, dtype=np.float64)
    if llrs.shape[-1] != code.target_len:
        raise ValueError(f"expected {code.target_len} LLRs, got {llrs.shape[-1]}")
    loglik = _log_likelihoods(cws, llrs)
    return np.stack([_llr_from_loglik(loglik, msgs[:, k]) for k in range(code.info_len_k)], axis=-1)


def sequential_map_decisions(code: PolarCode, llrs: np.ndarray) -> np.ndarray:
    """Genie-free sequential bit-MAP decisions on the full input vector.

    Bit ``u_i`` is decided from its exact posterior given the channel and the
    earlier decisions ``u_0..u_{i-1}``, with all later inputs (frozen or not)
    treated as unknown and uniform; frozen bits are then set to zero.  This
    is the decision rule SC implements with exact node updates.  Returns the
    decided info bits.
    """
    big_n = code.mother_len_n
    if big_n > MAX_ENUM_N:
        raise ValueError(f"sequential oracle enumerates 2^N inputs; N <= {MAX_ENUM_N} supported")
    llrs = rate_dematch(_saturate(np.asarray(llrs, dtype=np.float64)), big_n)
    all_u = np.array(list(itertools.product((0, 1), repeat=big_n)), dtype=np.uint8)
    loglik = _log_likelihoods(polar_transform(all_u), llrs)
    decided = np.zeros(big_n, dtype=np.uint8)
    alive = np.ones(len(all_u), dtype=bool)
    for i in range(big_n):
        if code.frozen_mask[i]:
            bit = 0
        else:
            lam = _llr_from_loglik(np.where(alive, loglik, -np.inf), all_u[:, i])
            bit = int(lam < 0)
        decided[i] = bit
        alive &= all_u[:, i] == bit
    return decided[code.info_set]
