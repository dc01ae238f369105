"""Physical-layer chain: Gray QAM, i.i.d. Rayleigh MIMO, MMSE detection, LLR demapping.

Normalization: every transmit antenna sends unit-energy symbols, channel
entries are CN(0, 1), and ``sigma2`` is the complex noise variance per
receive antenna, ``sigma2 = 1 / (R * q * 10**(EbN0/10))`` for overall code
rate ``R``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import lapack

FADING_UNITS = ("per_channel_use", "per_frame")
DEMAPPERS = ("max_log", "exact")
PRECISIONS = {"single": (np.float32, np.complex64), "double": (np.float64, np.complex128)}
# detector regularization when the link is noiseless (sigma2 == 0)
NOISELESS_REG = 1e-6


@dataclass(frozen=True)
class MimoConfig:
    tx_antennas_nt: int = 64
    rx_antennas_nr: int = 128
    modulation_q: int = 4
    fading_unit: str = "per_channel_use"
    demapper: str = "max_log"
    # arithmetic used by transmit_frame; the standalone detector keeps its input dtype
    precision: str = "single"

    def __post_init__(self):
        if self.tx_antennas_nt < 1 or self.rx_antennas_nr < self.tx_antennas_nt:
            raise ValueError(f"need 1 <= nt <= nr, got nt={self.tx_antennas_nt}, nr={self.rx_antennas_nr}")
        if self.modulation_q < 2 or self.modulation_q % 2:
            raise ValueError(f"modulation_q must be even (square QAM), got {self.modulation_q}")
        if self.fading_unit not in FADING_UNITS:
            raise ValueError(f"fading_unit must be one of {FADING_UNITS}")
        if self.demapper not in DEMAPPERS:
            raise ValueError(f"demapper must be one of {DEMAPPERS}")
        if self.precision not in PRECISIONS:
            raise ValueError(f"precision must be one of {tuple(PRECISIONS)}")

    @property
    def layers_l(self) -> int:
        return self.tx_antennas_nt


@dataclass(frozen=True)
class ChannelRealization:
    """``matrix_h`` has shape ``(..., nr, nt)``; leading axes index channel uses."""

    matrix_h: np.ndarray
    noise_var_sigma2: float


@dataclass(frozen=True)
class NoisePoint:
    ebn0_db: float
    sigma2: float

    @classmethod
    def from_ebn0(cls, ebn0_db, modulation_q, overall_rate, cfg=None):
        return cls(float(ebn0_db), ebn0_to_sigma2(ebn0_db, modulation_q, overall_rate, cfg))


def ebn0_to_sigma2(ebn0_db, modulation_q, overall_rate, cfg=None) -> float:
    """Noise variance per receive antenna for a given Eb/N0 in dB.

    ``cfg`` is accepted for interface symmetry; the normalization does not
    depend on the antenna counts.
    """
    if not 0.0 < overall_rate <= 1.0:
        raise ValueError(f"overall_rate must be in (0, 1], got {overall_rate}")
    if not np.isfinite(ebn0_db):
        raise ValueError("ebn0_db must be finite")
    return 1.0 / (overall_rate * modulation_q * 10.0 ** (ebn0_db / 10.0))


# ---------------------------------------------------------------- QAM


def _pam_levels(m):
    """Gray PAM amplitude for every m-bit label (MSB first), unnormalized."""
    labels = np.array([[(v >> (m - 1 - i)) & 1 for i in range(m)] for v in range(1 << m)])
    amp = np.zeros(1 << m)
    # 3GPP-style recursion: (1-2c0) * (2^(m-1) - (1-2c1) * (2^(m-2) - ...))
    for v in range(1 << m):
        acc = 1.0
        for i in range(m - 1, 0, -1):
            acc = 2.0 ** (m - i) - (1 - 2 * labels[v, i]) * acc
        amp[v] = (1 - 2 * labels[v, 0]) * acc
    return amp


@lru_cache(maxsize=None)
def constellation(q: int):
    """``(points, labels)`` of Gray square 2^q-QAM with unit average energy.

    Bit ``labels[s, k]`` belongs to symbol index ``s``; even bit positions
    drive the in-phase axis and odd positions the quadrature axis, so q=2
    label 00 sits at (1+j)/sqrt(2).
    """
    if q < 2 or q % 2:
        raise ValueError(f"q must be even and >= 2, got {q}")
    m = q // 2
    pam = _pam_levels(m)
    labels = np.array([[(s >> (q - 1 - k)) & 1 for k in range(q)] for s in range(1 << q)], dtype=np.uint8)
    weights = 1 << np.arange(m - 1, -1, -1)
    i_idx = labels[:, 0::2] @ weights
    q_idx = labels[:, 1::2] @ weights
    points = pam[i_idx] + 1j * pam[q_idx]
    points /= np.sqrt(np.mean(np.abs(points) ** 2))
    points.setflags(write=False)
    labels.setflags(write=False)
    return points, labels


def qam_modulate(bits, q: int) -> np.ndarray:
    """Map groups of q bits (last axis) to unit-energy Gray QAM symbols."""
    bits = np.asarray(bits, dtype=np.uint8)
    if q < 2 or q % 2:
        raise ValueError(f"q must be even and >= 2, got {q}")
    if bits.shape[-1] % q:
        raise ValueError(f"bit count {bits.shape[-1]} not divisible by q={q}")
    points, _ = constellation(q)
    groups = bits.reshape(bits.shape[:-1] + (-1, q))
    index = groups @ (1 << np.arange(q - 1, -1, -1))
    return points[index]


def qam_llr(equalized, post_sinr, q: int, demapper: str = "max_log") -> np.ndarray:
    """Per-bit LLRs from biased MMSE estimates and their post-detection SINR.

    The estimate is rescaled to its unbiased version ``x / mu`` with
    ``mu = sinr / (1 + sinr)``, whose effective noise variance is
    ``1 / sinr``.  Output has the q bits appended as a new last axis.
    """
    if demapper not in DEMAPPERS:
        raise ValueError(f"demapper must be one of {DEMAPPERS}")
    sinr = np.asarray(post_sinr)
    if np.any(sinr <= 0):
        raise ValueError("post_sinr must be positive")
    points, labels = constellation(q)
    eq = np.asarray(equalized)
    real = np.float32 if eq.dtype == np.complex64 else np.float64
    sinr = sinr.astype(real)
    unbiased = eq * ((1.0 + sinr) / sinr)
    dist = np.abs(unbiased[..., None] - points.astype(eq.dtype if eq.dtype.kind == "c" else complex)) ** 2
    metric = -dist * sinr[..., None]
    out = np.empty(eq.shape + (q,), dtype=np.float64)
    for k in range(q):
        zero = metric[..., labels[:, k] == 0]
        one = metric[..., labels[:, k] == 1]
        if demapper == "max_log":
            out[..., k] = zero.max(axis=-1) - one.max(axis=-1)
        else:
            out[..., k] = np.logaddexp.reduce(zero.astype(np.float64), axis=-1) - np.logaddexp.reduce(
                one.astype(np.float64), axis=-1)
    return out


# ---------------------------------------------------------------- channel and detection


def draw_channel(cfg: MimoConfig, rng: np.random.Generator, sigma2: float = 1.0, shape=(),
                 dtype=np.complex128) -> ChannelRealization:
    """Draw CN(0, 1) i.i.d. channel matrices of shape ``shape + (nr, nt)``."""
    real = np.float32 if np.dtype(dtype) == np.complex64 else np.float64
    dims = tuple(shape) + (cfg.rx_antennas_nr, cfg.tx_antennas_nt)
    h = _complex_normal(rng, dims, real)
    return ChannelRealization(h, float(sigma2))


def _complex_normal(rng, dims, real):
    z = rng.standard_normal(dims + (2,), dtype=real)
    z *= real(np.sqrt(0.5))
    return z.view(np.complex64 if real == np.float32 else np.complex128)[..., 0]


def _hpd_inverse(a):
    """Inverse of a stack of Hermitian positive-definite matrices via Cholesky."""
    potrf, potri = lapack.get_lapack_funcs(("potrf", "potri"), (a,))
    flat = a.reshape((-1,) + a.shape[-2:])
    out = np.empty_like(flat)
    for i, m in enumerate(flat):
        c, info = potrf(m, lower=1, clean=0)
        if info == 0:
            c, info = potri(c, lower=1)
        if info != 0:
            raise np.linalg.LinAlgError(f"matrix {i} is not positive definite (info={info})")
        out[i] = c
    low = np.tril(out)
    out = low + np.conj(np.swapaxes(np.tril(out, -1), -1, -2))
    return out.reshape(a.shape)


def mmse_detect(y, h, sigma2=None):
    """Linear MMSE estimate ``(H^H H + sigma2 I)^-1 H^H y`` and per-layer SINR.

    ``h`` is a :class:`ChannelRealization` or an array of shape
    ``(..., nr, nt)``; ``y`` has shape ``(..., nr)``.  Leading axes broadcast.
    The SINR is the unbiased-MMSE value ``1 / (sigma2 [A^-1]_ll) - 1``.
    """
    if isinstance(h, ChannelRealization):
        sigma2 = h.noise_var_sigma2 if sigma2 is None else sigma2
        h = h.matrix_h
    if sigma2 is None or not sigma2 > 0:
        raise ValueError("sigma2 must be > 0")
    h = np.asarray(h)
    y = np.asarray(y)
    if y.shape[-1] != h.shape[-2]:
        raise ValueError(f"y has {y.shape[-1]} entries but H has {h.shape[-2]} rows")
    hh = np.conj(np.swapaxes(h, -1, -2))
    nt = h.shape[-1]
    a = hh @ h
    a = a + sigma2 * np.eye(nt, dtype=a.dtype)
    a_inv = _hpd_inverse(a)
    x_hat = (a_inv @ (hh @ y[..., None]))[..., 0]
    diag = np.real(np.diagonal(a_inv, axis1=-2, axis2=-1))
    sinr = 1.0 / (sigma2 * diag) - 1.0
    sinr = np.maximum(sinr, np.finfo(sinr.dtype).tiny)
    return x_hat, sinr


def transmit_frame(trellis, cfg: MimoConfig, noise: NoisePoint, rng: np.random.Generator) -> np.ndarray:
    """Send codeword trellises through the MIMO link and return channel LLRs.

    ``trellis`` has shape ``(..., L, M_bit)`` with ``L = nt``.  Layer ``l``
    carries its row as ``M_bit / q`` symbols; channel use ``m`` transmits the
    ``m``-th symbol of every layer.  The draw order is channel matrices first,
    then noise, so results depend only on ``rng``'s state.  A noise point
    with ``sigma2 == 0`` sends the frame without noise (debug mode).
    """
    bits = np.asarray(trellis, dtype=np.uint8)
    q = cfg.modulation_q
    if bits.shape[-2] != cfg.layers_l:
        raise ValueError(f"trellis has {bits.shape[-2]} layers, link has {cfg.layers_l}")
    if bits.shape[-1] % q:
        raise ValueError(f"trellis width {bits.shape[-1]} not divisible by q={q}")
    lead = bits.shape[:-2]
    m_sym = bits.shape[-1] // q
    real, cplx = PRECISIONS[cfg.precision]

    symbols = qam_modulate(bits, q).astype(cplx)  # (..., L, M_sym)
    x = np.swapaxes(symbols, -1, -2)  # (..., M_sym, L)
    uses = 1 if cfg.fading_unit == "per_frame" else m_sym
    h = _complex_normal(rng, lead + (uses, cfg.rx_antennas_nr, cfg.tx_antennas_nt), real)
    y = (h @ x[..., None])[..., 0]
    if noise.sigma2 > 0:
        n = _complex_normal(rng, lead + (m_sym, cfg.rx_antennas_nr), real)
        n *= real(np.sqrt(noise.sigma2))
        y += n
    elif noise.sigma2 < 0:
        raise ValueError("sigma2 must be >= 0")
    x_hat, sinr = mmse_detect(y, h, real(noise.sigma2 if noise.sigma2 > 0 else NOISELESS_REG))
    llr = qam_llr(x_hat, sinr, q, cfg.demapper)  # (..., M_sym, L, q)
    llr = np.swapaxes(llr, -2, -3)
    return llr.reshape(lead + (cfg.layers_l, m_sym * q))
