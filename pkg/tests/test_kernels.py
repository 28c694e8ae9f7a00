"""Compiled and fallback kernels must agree: bit-exact for the min-sum
rules, a few ulps for the box-plus rule."""

import numpy as np
import pytest

from cwgldpc import kernels
from cwgldpc.decoder import _graph_arrays
from cwgldpc.kernels import _fallback
from cwgldpc.lifting import lift, latent_spc_code, make_scenario_c_like_base

IMPLS = [_fallback]
if kernels.HAVE_COMPILED:
    from cwgldpc.kernels import _speed

    IMPLS.append(_speed)


@pytest.fixture(scope="module")
def graphs():
    code = lift(make_scenario_c_like_base(seed=7))
    spc = lift(code.base, kind="spc")
    lat = latent_spc_code(code)
    out = {}
    out["cw"] = (_graph_arrays(code), code.n)
    out["spc"] = (_graph_arrays(spc), spc.n)
    out["latent"] = (_graph_arrays(lat), lat.n)
    return out


def _run(impl, arrays, channel, rule, sched, iters=8, truth=None):
    cn_ptr, edge_col, n, layer_size, hrow_ptr, hrow_col = arrays
    return impl.decode_mp(
        cn_ptr, edge_col, n, channel, rule, sched, iters, 0.75, 50.0,
        layer_size, hrow_ptr, hrow_col, truth,
    )


@pytest.mark.skipif(len(IMPLS) < 2, reason="compiled kernel unavailable")
@pytest.mark.parametrize("rule,graph,tol", [
    (kernels.RULE_MS_CW, "cw", 0.0),
    (kernels.RULE_MS_CW_LATENT, "cw", 0.0),
    (kernels.RULE_SP_HR, "cw", 1e-9),
    (kernels.RULE_NMS_SPC, "spc", 0.0),
    (kernels.RULE_NMS_SPC, "latent", 0.0),
])
@pytest.mark.parametrize("sched", [0, 1])
def test_compiled_matches_fallback(graphs, rule, graph, tol, sched):
    arrays, n = graphs[graph]
    rng = np.random.default_rng(42)
    for _ in range(15):
        channel = rng.normal(1.5, 2.0, n)
        if graph == "latent":
            channel[-96:] = 0.0
        truth = np.zeros(n, dtype=np.uint8)
        a = _run(IMPLS[1], arrays, channel, rule, sched, truth=truth)
        b = _run(IMPLS[0], arrays, channel, rule, sched, truth=truth)
        assert np.array_equal(a[0], b[0])
        if tol == 0.0:
            assert np.array_equal(a[1], b[1])
        else:
            assert np.abs(a[1] - b[1]).max() <= tol
        assert a[2] == b[2] and a[3] == b[3] and a[4] == b[4]


def test_active_kernel_reported():
    assert kernels.ACTIVE_KERNEL in ("compiled", "fallback")
    assert kernels.HAVE_COMPILED == (kernels.ACTIVE_KERNEL == "compiled")
