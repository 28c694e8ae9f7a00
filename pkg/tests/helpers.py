"""Shared test oracles, independent of the library's production paths."""

import numpy as np


def naive_rank(dense) -> int:
    """GF(2) rank by plain dense elimination on uint8 (no bit packing)."""
    a = np.array(dense, dtype=np.uint8) % 2
    m, n = a.shape
    r = 0
    for c in range(n):
        rows = np.nonzero(a[r:, c])[0]
        if not rows.size:
            continue
        piv = r + rows[0]
        a[[r, piv]] = a[[piv, r]]
        for i in range(m):
            if i != r and a[i, c]:
                a[i] ^= a[r]
        r += 1
        if r == m:
            break
    return r


def ml_codeword(h_dense, llrs) -> np.ndarray:
    """Exhaustive max-likelihood decoding over the code of h (k <= 20)."""
    from cwgldpc.gf2 import BinMatrix, make_encoder

    enc = make_encoder(BinMatrix.from_dense(h_dense))
    best, best_metric = None, -np.inf
    for msg_int in range(1 << enc.k):
        msg = np.array([(msg_int >> i) & 1 for i in range(enc.k)], dtype=np.uint8)
        word = enc.encode(msg)
        metric = -float(word @ llrs)  # log mu(c) up to a constant
        if metric > best_metric:
            best_metric = metric
            best = word
    return best


def batch_ms_extrinsic(llr_matrix, target_slot, alpha=1.0):
    """Vectorized two-hypothesis extrinsic of one slot for many samples.

    llr_matrix: (samples, d); slot types follow slot % 3.  Cross-checked
    against component.cn_update_ms in the tests that use it.
    """
    d = llr_matrix.shape[1]
    t = target_slot % 3

    def signed_min(cols):
        sub = llr_matrix[:, cols]
        sign = np.prod(np.where(sub < 0, -1.0, 1.0), axis=1)
        return sign, np.abs(sub).min(axis=1)

    others = [u for u in range(3) if u != t]
    latent = np.zeros(llr_matrix.shape[0])
    for u in others:
        sg, mg = signed_min([s for s in range(d) if s % 3 == u])
        latent += sg * mg
    own = [s for s in range(d) if s % 3 == t and s != target_slot]
    if not own:
        return alpha * latent
    sg, mg = signed_min(own)
    loo = sg * mg
    sign = np.where(loo < 0, -1.0, 1.0) * np.where(latent < 0, -1.0, 1.0)
    return alpha * sign * np.minimum(np.abs(loo), np.abs(latent))


def snr_at_bler(points_db, blers, target=1e-2):
    """Log-linear interpolation of the SNR where BLER crosses target."""
    for i in range(len(points_db) - 1):
        if blers[i] >= target >= blers[i + 1] and blers[i + 1] > 0:
            y0, y1 = np.log10(blers[i]), np.log10(blers[i + 1])
            frac = (np.log10(target) - y0) / (y1 - y0)
            return points_db[i] + frac * (points_db[i + 1] - points_db[i])
    return None


def wilson_interval(errors: int, trials: int, z: float = 1.96):
    """95% Wilson score interval for a binomial proportion."""
    if trials == 0:
        return 0.0, 1.0
    p = errors / trials
    denom = 1 + z * z / trials
    center = (p + z * z / (2 * trials)) / denom
    half = z * np.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    return max(0.0, center - half), min(1.0, center + half)
