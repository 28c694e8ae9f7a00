import numpy as np
import pytest

from cwgldpc import component as comp
from cwgldpc.errors import BaseMatrixFormatError, DegenerateRow
from cwgldpc.gf2 import BinMatrix, make_encoder, rank, syndrome
from cwgldpc.lifting import (
    NO_EDGE,
    BaseMatrix,
    analyze,
    assign_shifts,
    expand_latent_pcm,
    from_pcm,
    latent_spc_code,
    lift,
    make_punctured_baseline_base,
    make_scenario_c_like_base,
)

H9 = comp.canonical(9).pcm()


def base_1xn(n):
    return BaseMatrix(np.zeros((1, n), dtype=int), lift=1)


def test_lift_single_cn_degree3():
    code = lift(base_1xn(3))
    assert np.array_equal(code.h.to_dense(), [[0, 1, 1], [1, 0, 1]])
    assert np.array_equal(code.gamma.to_dense(), [[1, 1, 1]])
    assert code.k == 1
    assert analyze(code)["avg_col_weight"] == pytest.approx(4.0 / 3.0)


def test_lift_reproduces_h9():
    code = lift(base_1xn(9))
    assert np.array_equal(code.h.to_dense(), H9)
    assert code.k == 7


def test_lift_degenerate_row():
    with pytest.raises(DegenerateRow):
        lift(BaseMatrix(np.array([[0, 0, NO_EDGE]]), lift=2))


def test_circulant_shift_convention():
    base = BaseMatrix(np.array([[1]]), lift=4)
    code = lift(base, kind="spc")
    expect = np.zeros((4, 4), dtype=np.uint8)
    for i in range(4):
        expect[i, (i + 1) % 4] = 1
    assert np.array_equal(code.gamma.to_dense(), expect)


def test_scenario_c_dimensions():
    code = lift(make_scenario_c_like_base(seed=7))
    assert code.n == 256
    assert code.m_cn == 96
    assert code.h.rows == 192
    assert code.k == 64
    assert abs(analyze(code)["avg_col_weight"] - 2.63) <= 0.2


def test_cn_substructure_is_canonical():
    code = lift(make_scenario_c_like_base(seed=7))
    dense = code.h.to_dense()
    for cn in (0, 17, 95):
        cols = code.edge_col[code.cn_ptr[cn] : code.cn_ptr[cn + 1]]
        assert np.all(np.diff(cols) > 0)
        sub = dense[2 * cn : 2 * cn + 2, cols]
        assert np.array_equal(sub, comp.canonical(len(cols)).pcm())


def test_cn_set_balance():
    code = lift(make_scenario_c_like_base(seed=3))
    for cc in code.cn_codes:
        sizes = (len(cc.part_x), len(cc.part_y), len(cc.part_z))
        assert sizes[0] - sizes[2] in (0, 1)
        assert sizes[1] - sizes[2] in (0, 1)


def test_base_matrix_roundtrip(tmp_path):
    base = make_scenario_c_like_base(seed=9)
    base = BaseMatrix(base.shifts, base.lift, punctured_cols=(1, 5))
    path = tmp_path / "base.bm"
    base.save(path)
    back = BaseMatrix.load(path)
    assert np.array_equal(back.shifts, base.shifts)
    assert back.lift == base.lift
    assert back.punctured_cols == base.punctured_cols
    assert lift(back).h == lift(base).h


def test_base_matrix_malformed(tmp_path):
    p = tmp_path / "bad.bm"
    p.write_text("2 3\n0 -1 1\n")
    with pytest.raises(BaseMatrixFormatError):
        BaseMatrix.load(p)
    p.write_text("1 3 4\n0 x 1\npunctured:\n")
    with pytest.raises(BaseMatrixFormatError) as exc:
        BaseMatrix.load(p)
    assert exc.value.line == 2 and exc.value.column == 2
    p.write_text("1 3 4\n0 1\npunctured:\n")
    with pytest.raises(BaseMatrixFormatError):
        BaseMatrix.load(p)


def test_assign_shifts_avoids_4cycles_when_possible():
    pattern = np.ones((2, 2), dtype=bool)
    base = assign_shifts(pattern, 8, seed=0)
    s = base.shifts
    assert (s >= 0).all() and (s < 8).all()
    assert (s[0, 0] - s[0, 1] + s[1, 1] - s[1, 0]) % 8 != 0
    again = assign_shifts(pattern, 8, seed=0)
    assert np.array_equal(base.shifts, again.shifts)


def test_punctured_expansion():
    base = BaseMatrix(np.zeros((1, 3), dtype=int), lift=4, punctured_cols=(0,))
    code = lift(base)
    assert list(code.punctured) == [0, 1, 2, 3]
    assert code.n_tx == 8


def test_latent_pcm_single_cn():
    code = lift(base_1xn(9))
    lat = expand_latent_pcm(code).to_dense()
    assert lat.shape == (3, 10)
    c = comp.canonical(9)
    assert np.array_equal(np.nonzero(lat[0])[0], list(c.part_x) + [9])
    assert np.array_equal(np.nonzero(lat[1])[0], list(c.part_y) + [9])
    assert np.array_equal(np.nonzero(lat[2])[0], list(c.part_z) + [9])
    lat3 = expand_latent_pcm(lift(base_1xn(3))).to_dense()
    assert lat3.shape == (3, 4)
    assert (lat3.sum(axis=1) == 2).all()


def test_latent_pcm_scenario_c_shape_and_rank():
    code = lift(make_scenario_c_like_base(seed=7))
    lat = expand_latent_pcm(code)
    assert (lat.rows, lat.cols) == (288, 352)
    assert rank(lat) == rank(code.h) + code.m_cn


def test_latent_pcm_membership():
    code = lift(base_1xn(9))
    lat = expand_latent_pcm(code)
    enc = make_encoder(code.h)
    rng = np.random.default_rng(6)
    for _ in range(20):
        word = enc.encode(rng.integers(0, 2, enc.k).astype(np.uint8))
        v = word[np.asarray(comp.canonical(9).part_x)].sum() % 2
        extended = np.concatenate([word, [v]]).astype(np.uint8)
        assert not syndrome(lat, extended).any()


def test_latent_spc_code_layers():
    code = lift(make_scenario_c_like_base(seed=7))
    lat = latent_spc_code(code)
    assert lat.kind == "spc"
    assert lat.n == code.n + code.m_cn
    assert lat.m_cn == 3 * code.m_cn
    assert lat.num_layers == 3 * code.base.rows
    degs = np.diff(lat.cn_ptr)
    for l0 in range(0, lat.m_cn, lat.layer_size):
        block = degs[l0 : l0 + lat.layer_size]
        assert (block == block[0]).all()
    assert len(lat.punctured) == code.m_cn


def test_from_pcm_spc():
    dense = np.array([[1, 1, 0, 1], [0, 1, 1, 1]], dtype=np.uint8)
    code = from_pcm(BinMatrix.from_dense(dense))
    assert code.kind == "spc"
    assert code.n == 4 and code.m_cn == 2
    assert np.array_equal(code.h.to_dense(), dense)


def test_punctured_baseline_base():
    base = make_punctured_baseline_base()
    code = lift(base, kind="spc")
    assert code.n == 286
    assert code.n_tx == 264
    assert code.punctured.tolist() == list(range(22))
    assert 0.24 <= code.k / code.n_tx <= 0.26


def test_latent_codewords_project_onto_code():
    # every word of the latent expansion restricts to a word of h
    code = lift(base_1xn(9))
    lat = expand_latent_pcm(code)
    enc = make_encoder(lat)
    rng = np.random.default_rng(8)
    for _ in range(20):
        ext = enc.encode(rng.integers(0, 2, enc.k).astype(np.uint8))
        assert not syndrome(code.h, ext[: code.n]).any()


def test_scenario_b_scale_construction():
    # the bit-packed path must stay practical at the largest shipped shape
    pat = random_base_pattern(12, 48, 2, seed=4)
    code = lift(assign_shifts(pat, 120, seed=4))
    assert code.n == 5760
    assert code.h.rows == 2880
    assert code.k == 2880
    assert 2.3 <= analyze(code)["avg_col_weight"] <= 3.0
    enc = make_encoder(code.h)
    word = enc.encode(np.random.default_rng(0).integers(0, 2, enc.k).astype(np.uint8))
    assert not syndrome(code.h, word).any()


def test_analyze_report_fields():
    code = lift(make_scenario_c_like_base(seed=7))
    rep = analyze(code)
    assert sorted(rep["degree_histogram"]) == [5, 6]
    assert len(rep["weight2_cw_per_cn"]) == 96
    assert set(rep["weight2_cw_per_cn"]) == {2, 3}
