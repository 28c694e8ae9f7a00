"""Pure-NumPy message-passing kernel.

Reference implementation of ``decode_mp``; the compiled extension mirrors
it loop for loop.  Constraint updates are vectorized over groups of equal
degree (flooding) or over one lifted layer at a time (layered).

Constraint-node rules, selected by ``rule``:

  0  normalized min-sum over a single parity check
  1  two-hypothesis rule for the two-row component check (max form)
  2  same quantity evaluated through the latent variable (sign/min form)
  3  exact MAP through the dual code (box-plus chains)

For rules 1-3 the slot type within a constraint is slot index mod 3 (the
canonical X/Y/Z pattern over its columns in increasing order).
"""

from __future__ import annotations

import numpy as np

_INF = np.inf


def _boxplus(a, b):
    sign = np.where((a < 0) != (b < 0), -1.0, 1.0)
    mag = np.minimum(np.abs(a), np.abs(b))
    with np.errstate(over="ignore", invalid="ignore"):
        corr = np.log1p(np.exp(-np.abs(a + b))) - np.log1p(np.exp(-np.abs(a - b)))
    corr = np.where(np.isnan(corr), 0.0, corr)
    return sign * mag + corr


def _sgn(x):
    return np.where(x < 0, -1.0, 1.0)


def _set_stats(v):
    """Per-row sign product, two smallest magnitudes and argmin of |v|."""
    sgn = _sgn(v)
    sp = sgn.prod(axis=1)
    mags = np.abs(v)
    if v.shape[1] == 1:
        return sgn, sp, mags[:, 0], None, np.zeros(v.shape[0], dtype=np.intp)
    part = np.partition(mags, 1, axis=1)
    return sgn, sp, part[:, 0], part[:, 1], mags.argmin(axis=1)


def _cn_update_nms(v, clamp):
    g, d = v.shape
    if d == 1:
        return np.full((g, 1), clamp)
    sgn, sp, min1, min2, amin = _set_stats(v)
    loo_min = np.where(np.arange(d)[None, :] == amin[:, None], min2[:, None], min1[:, None])
    return sp[:, None] * sgn * loo_min


def _cn_update_ms_cw(v, latent_form):
    g, d = v.shape
    out = np.empty_like(v)
    stats = [_set_stats(v[:, t::3]) for t in range(3)]
    full = [st[1] * st[2] for st in stats]  # signed min over the whole set
    for t in range(3):
        sgn, sp, min1, min2, amin = stats[t]
        o1, o2 = (u for u in range(3) if u != t)
        latent = full[o1] + full[o2]
        kt = sgn.shape[1]
        if kt == 1:
            out[:, t::3] = latent[:, None]
            continue
        loo_min = np.where(np.arange(kt)[None, :] == amin[:, None], min2[:, None], min1[:, None])
        loo = (sp[:, None] * sgn) * loo_min
        lat = latent[:, None]
        if latent_form:
            e = _sgn(loo) * _sgn(lat) * np.minimum(np.abs(loo), np.abs(lat))
        else:
            e = np.maximum(loo + lat, 0.0) - np.maximum(lat, loo)
        out[:, t::3] = e
    return out


def _cn_update_sp(v):
    g, d = v.shape
    out = np.empty_like(v)
    loos = []
    fulls = []
    for t in range(3):
        vt = v[:, t::3]
        kt = vt.shape[1]
        prefix = np.full((g, kt + 1), _INF)
        suffix = np.full((g, kt + 1), _INF)
        for j in range(kt):
            prefix[:, j + 1] = _boxplus(prefix[:, j], vt[:, j])
            suffix[:, kt - 1 - j] = _boxplus(vt[:, kt - 1 - j], suffix[:, kt - j])
        fulls.append(prefix[:, kt])
        loos.append(np.stack([_boxplus(prefix[:, j], suffix[:, j + 1]) for j in range(kt)], axis=1))
    for t in range(3):
        o1, o2 = (u for u in range(3) if u != t)
        out[:, t::3] = _boxplus(loos[t], (fulls[o1] + fulls[o2])[:, None])
    return out


def _cn_update(v, rule, clamp):
    if rule == 0:
        return _cn_update_nms(v, clamp)
    if rule == 1:
        return _cn_update_ms_cw(v, latent_form=False)
    if rule == 2:
        return _cn_update_ms_cw(v, latent_form=True)
    if rule == 3:
        return _cn_update_sp(v)
    raise ValueError(f"unknown rule {rule}")


def _syndrome_zero(hard, hrow_ptr, hrow_col):
    par = np.bitwise_xor.reduceat(hard[hrow_col], hrow_ptr[:-1])
    return not par.any()


def decode_mp(
    cn_ptr,
    edge_col,
    n,
    channel,
    rule,
    schedule,
    max_iters,
    alpha,
    clamp,
    layer_size,
    hrow_ptr,
    hrow_col,
    truth=None,
):
    """Run message passing; returns (hard, app, iters, converged, trace)."""
    channel = np.asarray(channel, dtype=np.float64)
    m_cn = len(cn_ptr) - 1
    degrees = np.diff(cn_ptr)
    num_edges = len(edge_col)
    c2v = np.zeros(num_edges)
    app = channel.copy()
    trace = [] if truth is not None else None

    if schedule == 0:  # flooding
        groups = []
        for d in np.unique(degrees):
            cns = np.nonzero(degrees == d)[0]
            eidx = cn_ptr[cns][:, None] + np.arange(d)[None, :]
            groups.append((int(d), eidx, edge_col[eidx]))
    else:  # layered: contiguous CN blocks, constant degree inside a block
        layers = []
        for l0 in range(0, m_cn, layer_size):
            lo, hi = cn_ptr[l0], cn_ptr[min(l0 + layer_size, m_cn)]
            d = int(degrees[l0])
            eidx = np.arange(lo, hi).reshape(-1, d)
            layers.append((eidx, edge_col[lo:hi].reshape(-1, d)))

    iters = 0
    converged = False
    for _ in range(max_iters):
        iters += 1
        if schedule == 0:
            app = channel + np.bincount(edge_col, weights=c2v, minlength=n)
            for d, eidx, cols in groups:
                v2c = np.clip(app[cols] - c2v[eidx], -clamp, clamp)
                e = _cn_update(v2c, rule, clamp)
                c2v[eidx] = np.clip(alpha * e, -clamp, clamp)
            app = channel + np.bincount(edge_col, weights=c2v, minlength=n)
        else:
            for eidx, cols in layers:
                old = c2v[eidx]
                v2c = np.clip(app[cols] - old, -clamp, clamp)
                e = _cn_update(v2c, rule, clamp)
                new = np.clip(alpha * e, -clamp, clamp)
                app[cols] += new - old
                c2v[eidx] = new
        hard = (app < 0).astype(np.uint8)
        if trace is not None:
            trace.append(int((hard != truth).sum()))
        if _syndrome_zero(hard, hrow_ptr, hrow_col):
            converged = True
            break
    hard = (app < 0).astype(np.uint8)
    return hard, app, iters, converged, trace
