"""SC and SCAN decoding kernels over a batch of codewords.

Both decoders walk the polar factor graph leaf by leaf.  Messages for the
node ``j`` at depth ``d`` (block size ``s = N >> d``) live in row ``d`` of an
``(n + 1, N)`` array at columns ``[j*s, (j+1)*s)``, so a parent's region is
exactly the union of its two children's regions.

Two implementations exist with identical semantics: numba kernels looping
over the batch, and numpy versions that loop over leaves and vectorize over
the batch.  ``sc_decode_batch``/``scan_decode_batch`` pick one according to
``st2dsim._accel.USE_NUMBA``.
"""

import math

import numpy as np

from .._accel import USE_NUMBA, njit

LLR_CLIP = 300.0

F_MIN_SUM = 0
F_EXACT = 1


def _trailing_zeros(i):
    tz = 0
    while i & 1 == 0:
        i >>= 1
        tz += 1
    return tz


# ---------------------------------------------------------------- numba path


@njit
def _boxplus_nb(a, b, exact):
    m = min(abs(a), abs(b))
    if (a < 0.0) != (b < 0.0):
        m = -m
    if exact:
        m += math.log1p(math.exp(-abs(a + b))) - math.log1p(math.exp(-abs(a - b)))
    return m


@njit
def _sc_nb(llr, frozen, exact):
    nb, big_n = llr.shape
    n = 0
    while (1 << n) < big_n:
        n += 1
    u = np.zeros((nb, big_n), dtype=np.uint8)
    x = np.zeros((nb, big_n), dtype=np.uint8)
    alpha = np.zeros((n + 1, big_n))
    beta = np.zeros((n + 1, big_n), dtype=np.uint8)
    for b in range(nb):
        for k in range(big_n):
            alpha[0, k] = llr[b, k]
        for i in range(big_n):
            if i == 0:
                d0 = 1
            else:
                tz = 0
                t = i
                while t & 1 == 0:
                    t >>= 1
                    tz += 1
                d0 = n - tz
                # right child: g-node using the left sibling's partial sums
                s = big_n >> d0
                ps = ((i >> tz) - 1) * s
                for k in range(s):
                    a0 = alpha[d0 - 1, ps + k]
                    a1 = alpha[d0 - 1, ps + s + k]
                    if beta[d0, ps + k]:
                        alpha[d0, ps + s + k] = a1 - a0
                    else:
                        alpha[d0, ps + s + k] = a1 + a0
                d0 += 1
            for d in range(d0, n + 1):
                s = big_n >> d
                ps = (i >> (n - d)) * s
                for k in range(s):
                    alpha[d, ps + k] = _boxplus_nb(alpha[d - 1, ps + k], alpha[d - 1, ps + s + k], exact)
            bit = 0
            if not frozen[i] and alpha[n, i] < 0.0:
                bit = 1
            u[b, i] = bit
            beta[n, i] = bit
            d = n
            j = i
            while d > 0 and (j & 1) == 1:
                s = big_n >> d
                ps = (j - 1) * s
                for k in range(s):
                    r = beta[d, ps + s + k]
                    beta[d - 1, ps + k] = beta[d, ps + k] ^ r
                    beta[d - 1, ps + s + k] = r
                d -= 1
                j >>= 1
        for k in range(big_n):
            x[b, k] = beta[0, k]
    return u, x


@njit
def _scan_nb(llr, frozen, iterations, exact):
    nb, big_n = llr.shape
    n = 0
    while (1 << n) < big_n:
        n += 1
    leaf = np.zeros((nb, big_n))
    root = np.zeros((nb, big_n))
    lm = np.zeros((n + 1, big_n))
    bm = np.zeros((n + 1, big_n))
    for b in range(nb):
        for d in range(n):
            for k in range(big_n):
                bm[d, k] = 0.0
        for k in range(big_n):
            bm[n, k] = LLR_CLIP if frozen[k] else 0.0
            lm[0, k] = llr[b, k]
        for _ in range(iterations):
            for i in range(big_n):
                if i == 0:
                    d0 = 1
                else:
                    tz = 0
                    t = i
                    while t & 1 == 0:
                        t >>= 1
                        tz += 1
                    d0 = n - tz
                    s = big_n >> d0
                    ps = ((i >> tz) - 1) * s
                    for k in range(s):
                        lm[d0, ps + s + k] = (_boxplus_nb(bm[d0, ps + k], lm[d0 - 1, ps + k], exact)
                                              + lm[d0 - 1, ps + s + k])
                    d0 += 1
                for d in range(d0, n + 1):
                    s = big_n >> d
                    ps = (i >> (n - d)) * s
                    for k in range(s):
                        lm[d, ps + k] = _boxplus_nb(lm[d - 1, ps + k],
                                                    lm[d - 1, ps + s + k] + bm[d, ps + s + k], exact)
                d = n
                j = i
                while d > 0 and (j & 1) == 1:
                    s = big_n >> d
                    ps = (j - 1) * s
                    for k in range(s):
                        bl = bm[d, ps + k]
                        br = bm[d, ps + s + k]
                        bm[d - 1, ps + k] = _boxplus_nb(bl, br + lm[d - 1, ps + s + k], exact)
                        bm[d - 1, ps + s + k] = _boxplus_nb(bl, lm[d - 1, ps + k], exact) + br
                    d -= 1
                    j >>= 1
        for k in range(big_n):
            leaf[b, k] = lm[n, k]
            root[b, k] = bm[0, k]
    return leaf, root


# ---------------------------------------------------------------- numpy path


def _boxplus_np(a, b, exact):
    m = np.minimum(np.abs(a), np.abs(b))
    m = np.where((a < 0) != (b < 0), -m, m)
    if exact:
        m = m + np.log1p(np.exp(-np.abs(a + b))) - np.log1p(np.exp(-np.abs(a - b)))
    return m


def _sc_np(llr, frozen, exact):
    nb, big_n = llr.shape
    n = big_n.bit_length() - 1
    alpha = np.zeros((n + 1, nb, big_n))
    beta = np.zeros((n + 1, nb, big_n), dtype=np.uint8)
    u = np.zeros((nb, big_n), dtype=np.uint8)
    alpha[0] = llr
    for i in range(big_n):
        if i == 0:
            d0 = 1
        else:
            tz = _trailing_zeros(i)
            d0 = n - tz
            s = big_n >> d0
            ps = ((i >> tz) - 1) * s
            a0 = alpha[d0 - 1, :, ps:ps + s]
            a1 = alpha[d0 - 1, :, ps + s:ps + 2 * s]
            alpha[d0, :, ps + s:ps + 2 * s] = np.where(beta[d0, :, ps:ps + s] == 1, a1 - a0, a1 + a0)
            d0 += 1
        for d in range(d0, n + 1):
            s = big_n >> d
            ps = (i >> (n - d)) * s
            alpha[d, :, ps:ps + s] = _boxplus_np(alpha[d - 1, :, ps:ps + s],
                                                 alpha[d - 1, :, ps + s:ps + 2 * s], exact)
        if frozen[i]:
            bit = np.zeros(nb, dtype=np.uint8)
        else:
            bit = (alpha[n, :, i] < 0).astype(np.uint8)
        u[:, i] = bit
        beta[n, :, i] = bit
        d, j = n, i
        while d > 0 and j & 1:
            s = big_n >> d
            ps = (j - 1) * s
            r = beta[d, :, ps + s:ps + 2 * s]
            beta[d - 1, :, ps:ps + s] = beta[d, :, ps:ps + s] ^ r
            beta[d - 1, :, ps + s:ps + 2 * s] = r
            d -= 1
            j >>= 1
    return u, beta[0].copy()


def _scan_np(llr, frozen, iterations, exact):
    nb, big_n = llr.shape
    n = big_n.bit_length() - 1
    lm = np.zeros((n + 1, nb, big_n))
    bm = np.zeros((n + 1, nb, big_n))
    bm[n] = np.where(frozen, LLR_CLIP, 0.0)
    lm[0] = llr
    for _ in range(iterations):
        for i in range(big_n):
            if i == 0:
                d0 = 1
            else:
                tz = _trailing_zeros(i)
                d0 = n - tz
                s = big_n >> d0
                ps = ((i >> tz) - 1) * s
                lm[d0, :, ps + s:ps + 2 * s] = (_boxplus_np(bm[d0, :, ps:ps + s], lm[d0 - 1, :, ps:ps + s], exact)
                                                + lm[d0 - 1, :, ps + s:ps + 2 * s])
                d0 += 1
            for d in range(d0, n + 1):
                s = big_n >> d
                ps = (i >> (n - d)) * s
                lm[d, :, ps:ps + s] = _boxplus_np(lm[d - 1, :, ps:ps + s],
                                                  lm[d - 1, :, ps + s:ps + 2 * s] + bm[d, :, ps + s:ps + 2 * s],
                                                  exact)
            d, j = n, i
            while d > 0 and j & 1:
                s = big_n >> d
                ps = (j - 1) * s
                bl = bm[d, :, ps:ps + s]
                br = bm[d, :, ps + s:ps + 2 * s]
                bm[d - 1, :, ps:ps + s] = _boxplus_np(bl, br + lm[d - 1, :, ps + s:ps + 2 * s], exact)
                bm[d - 1, :, ps + s:ps + 2 * s] = _boxplus_np(bl, lm[d - 1, :, ps:ps + s], exact) + br
                d -= 1
                j >>= 1
    return lm[n].copy(), bm[0].copy()


# ---------------------------------------------------------------- dispatch


def sc_decode_batch(llr, frozen, exact=False, use_numba=None):
    """Hard SC decoding of each row of ``llr`` (shape ``(B, N)``).

    Returns ``(u_hat, x_hat)``, both ``uint8`` of shape ``(B, N)``.
    """
    llr = np.ascontiguousarray(llr, dtype=np.float64)
    frozen = np.ascontiguousarray(frozen, dtype=np.bool_)
    if use_numba is None:
        use_numba = USE_NUMBA
    if use_numba:
        return _sc_nb(llr, frozen, bool(exact))
    return _sc_np(llr, frozen, bool(exact))


def scan_decode_batch(llr, frozen, iterations=1, exact=False, use_numba=None):
    """SCAN soft-output decoding of each row of ``llr``.

    Returns ``(leaf_llr, root_extrinsic)``: the LLR arriving at every input
    position ``u_i`` (for non-frozen positions this is the posterior, the
    prior being zero) and the extrinsic LLR on every code bit.
    """
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    llr = np.ascontiguousarray(llr, dtype=np.float64)
    frozen = np.ascontiguousarray(frozen, dtype=np.bool_)
    if use_numba is None:
        use_numba = USE_NUMBA
    if use_numba:
        return _scan_nb(llr, frozen, int(iterations), bool(exact))
    return _scan_np(llr, frozen, int(iterations), bool(exact))
