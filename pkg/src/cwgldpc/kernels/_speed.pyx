# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled message-passing kernel; mirrors _fallback.decode_mp.

Min-sum rules (0-2) are bit-exact against the fallback; the box-plus rule
(3) may differ by a few ulps because libm and NumPy transcendentals round
differently.
"""

import numpy as np

from libc.math cimport fabs, fmin, fmax, log1p, exp, INFINITY, isnan


cdef inline double _clip(double x, double c) nogil:
    return fmin(fmax(x, -c), c)


cdef inline double _boxplus(double a, double b) nogil:
    cdef double sign = -1.0 if ((a < 0) != (b < 0)) else 1.0
    cdef double corr = log1p(exp(-fabs(a + b))) - log1p(exp(-fabs(a - b)))
    if isnan(corr):
        corr = 0.0
    return sign * fmin(fabs(a), fabs(b)) + corr


cdef inline double _sgn(double x) nogil:
    return -1.0 if x < 0 else 1.0


cdef void _cn_nms(double* v, double* out, Py_ssize_t d, double clamp) nogil:
    cdef Py_ssize_t s, amin = 0
    cdef double sp = 1.0, min1 = INFINITY, min2 = INFINITY, mag
    if d == 1:
        out[0] = clamp
        return
    for s in range(d):
        sp *= _sgn(v[s])
        mag = fabs(v[s])
        if mag < min1:
            min2 = min1
            min1 = mag
            amin = s
        elif mag < min2:
            min2 = mag
    for s in range(d):
        out[s] = sp * _sgn(v[s]) * (min2 if s == amin else min1)


cdef void _cn_ms_cw(double* v, double* out, Py_ssize_t d, bint latent_form) nogil:
    cdef Py_ssize_t s, t, o1, o2
    cdef Py_ssize_t cnt[3]
    cdef Py_ssize_t am[3]
    cdef double sp[3]
    cdef double m1[3]
    cdef double m2[3]
    cdef double full[3]
    cdef double mag, latent, loo, sign
    for t in range(3):
        cnt[t] = 0
        am[t] = -1
        sp[t] = 1.0
        m1[t] = INFINITY
        m2[t] = INFINITY
    for s in range(d):
        t = s % 3
        cnt[t] += 1
        sp[t] *= _sgn(v[s])
        mag = fabs(v[s])
        if mag < m1[t]:
            m2[t] = m1[t]
            m1[t] = mag
            am[t] = s
        elif mag < m2[t]:
            m2[t] = mag
    for t in range(3):
        full[t] = sp[t] * m1[t]
    for s in range(d):
        t = s % 3
        o1 = 1 if t == 0 else 0
        o2 = 1 if t == 2 else 2
        latent = full[o1] + full[o2]
        if cnt[t] == 1:
            out[s] = latent
            continue
        loo = sp[t] * _sgn(v[s]) * (m2[t] if s == am[t] else m1[t])
        if latent_form:
            sign = _sgn(loo) * _sgn(latent)
            out[s] = sign * fmin(fabs(loo), fabs(latent))
        else:
            out[s] = fmax(loo + latent, 0.0) - fmax(latent, loo)


cdef void _cn_sp(double* v, double* out, Py_ssize_t d,
                 double* prefix, double* suffix, double* loo) nogil:
    # prefix/suffix/loo are caller scratch of length >= d + 1 each; the
    # box-plus chains run per type slice (slots t, t+3, ...).
    cdef Py_ssize_t s, t, j, kt
    cdef double full[3]
    cdef Py_ssize_t o1, o2
    for t in range(3):
        kt = 0
        prefix[0] = INFINITY
        for s in range(t, d, 3):
            prefix[kt + 1] = _boxplus(prefix[kt], v[s])
            kt += 1
        full[t] = prefix[kt]
        suffix[kt] = INFINITY
        j = kt - 1
        for s in range(t + 3 * (kt - 1), t - 1, -3):
            suffix[j] = _boxplus(v[s], suffix[j + 1])
            j -= 1
        j = 0
        for s in range(t, d, 3):
            loo[s] = _boxplus(prefix[j], suffix[j + 1])
            j += 1
    for s in range(d):
        t = s % 3
        o1 = 1 if t == 0 else 0
        o2 = 1 if t == 2 else 2
        out[s] = _boxplus(loo[s], full[o1] + full[o2])


cdef bint _syndrome_zero(unsigned char[::1] hard, long long[::1] hrow_ptr,
                         long long[::1] hrow_col) nogil:
    cdef Py_ssize_t r, i
    cdef unsigned char p
    for r in range(hrow_ptr.shape[0] - 1):
        p = 0
        for i in range(hrow_ptr[r], hrow_ptr[r + 1]):
            p ^= hard[hrow_col[i]]
        if p:
            return False
    return True


def decode_mp(
    cn_ptr_arr,
    edge_col_arr,
    n,
    channel_arr,
    rule,
    schedule,
    max_iters,
    alpha,
    clamp,
    layer_size,
    hrow_ptr_arr,
    hrow_col_arr,
    truth=None,
):
    """Run message passing; returns (hard, app, iters, converged, trace).

    The layered schedule sweeps constraints sequentially; construction
    guarantees no two constraints of one layer share a column, so this is
    exactly the parallel-within-layer update.
    """
    cdef long long[::1] cn_ptr = np.ascontiguousarray(cn_ptr_arr, dtype=np.int64)
    cdef long long[::1] edge_col = np.ascontiguousarray(edge_col_arr, dtype=np.int64)
    cdef double[::1] channel = np.ascontiguousarray(channel_arr, dtype=np.float64)
    cdef long long[::1] hrow_ptr = np.ascontiguousarray(hrow_ptr_arr, dtype=np.int64)
    cdef long long[::1] hrow_col = np.ascontiguousarray(hrow_col_arr, dtype=np.int64)
    cdef Py_ssize_t nn = n
    cdef Py_ssize_t m_cn = cn_ptr.shape[0] - 1
    cdef Py_ssize_t num_edges = edge_col.shape[0]
    cdef int crule = rule
    cdef int csched = schedule
    cdef int citers = max_iters
    cdef double calpha = alpha
    cdef double cclamp = clamp

    app_np = np.empty(nn, dtype=np.float64)
    hard_np = np.zeros(nn, dtype=np.uint8)
    cdef double[::1] app = app_np
    cdef unsigned char[::1] hard = hard_np
    cdef double[::1] acc = np.empty(nn, dtype=np.float64)
    cdef double[::1] c2v = np.zeros(num_edges, dtype=np.float64)
    cdef double[::1] v2c = np.empty(num_edges, dtype=np.float64)
    cdef double[::1] ext = np.empty(num_edges, dtype=np.float64)

    cdef Py_ssize_t max_d = 1, dd
    cdef Py_ssize_t cn, e, s, j
    for cn in range(m_cn):
        dd = cn_ptr[cn + 1] - cn_ptr[cn]
        if dd > max_d:
            max_d = dd
    cdef double[::1] scr_prefix = np.empty(max_d + 1, dtype=np.float64)
    cdef double[::1] scr_suffix = np.empty(max_d + 1, dtype=np.float64)
    cdef double[::1] scr_loo = np.empty(max_d + 1, dtype=np.float64)

    cdef unsigned char[::1] truth_mv
    cdef bint have_truth = truth is not None
    trace = [] if have_truth else None
    if have_truth:
        truth_mv = np.ascontiguousarray(truth, dtype=np.uint8)
    else:
        truth_mv = hard  # placeholder, never read

    cdef int iters = 0
    cdef bint converged = False
    cdef Py_ssize_t lo
    cdef int it
    cdef long long errs

    for it in range(citers):
        iters += 1
        if csched == 0:  # flooding
            with nogil:
                # Sum extrinsics separately, then add the channel once, so
                # rounding matches channel + bincount in the fallback.
                for j in range(nn):
                    acc[j] = 0.0
                for e in range(num_edges):
                    acc[edge_col[e]] += c2v[e]
                for j in range(nn):
                    app[j] = channel[j] + acc[j]
                for cn in range(m_cn):
                    lo = cn_ptr[cn]
                    dd = cn_ptr[cn + 1] - lo
                    for s in range(dd):
                        v2c[lo + s] = _clip(app[edge_col[lo + s]] - c2v[lo + s], cclamp)
                    if crule == 0:
                        _cn_nms(&v2c[lo], &ext[lo], dd, cclamp)
                    elif crule == 1:
                        _cn_ms_cw(&v2c[lo], &ext[lo], dd, False)
                    elif crule == 2:
                        _cn_ms_cw(&v2c[lo], &ext[lo], dd, True)
                    else:
                        _cn_sp(&v2c[lo], &ext[lo], dd,
                               &scr_prefix[0], &scr_suffix[0], &scr_loo[0])
                    for s in range(dd):
                        c2v[lo + s] = _clip(calpha * ext[lo + s], cclamp)
                for j in range(nn):
                    acc[j] = 0.0
                for e in range(num_edges):
                    acc[edge_col[e]] += c2v[e]
                for j in range(nn):
                    app[j] = channel[j] + acc[j]
        else:  # layered
            if it == 0:
                for j in range(nn):
                    app[j] = channel[j]
            with nogil:
                for cn in range(m_cn):
                    lo = cn_ptr[cn]
                    dd = cn_ptr[cn + 1] - lo
                    for s in range(dd):
                        v2c[lo + s] = _clip(app[edge_col[lo + s]] - c2v[lo + s], cclamp)
                    if crule == 0:
                        _cn_nms(&v2c[lo], &ext[lo], dd, cclamp)
                    elif crule == 1:
                        _cn_ms_cw(&v2c[lo], &ext[lo], dd, False)
                    elif crule == 2:
                        _cn_ms_cw(&v2c[lo], &ext[lo], dd, True)
                    else:
                        _cn_sp(&v2c[lo], &ext[lo], dd,
                               &scr_prefix[0], &scr_suffix[0], &scr_loo[0])
                    for s in range(dd):
                        ext[lo + s] = _clip(calpha * ext[lo + s], cclamp)
                        app[edge_col[lo + s]] += ext[lo + s] - c2v[lo + s]
                        c2v[lo + s] = ext[lo + s]
        with nogil:
            for j in range(nn):
                hard[j] = 1 if app[j] < 0 else 0
        if have_truth:
            errs = 0
            for j in range(nn):
                if hard[j] != truth_mv[j]:
                    errs += 1
            trace.append(int(errs))
        if _syndrome_zero(hard, hrow_ptr, hrow_col):
            converged = True
            break
    return hard_np, app_np, iters, bool(converged), trace
