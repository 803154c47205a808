import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from cornergrowth.distributions import DomainError, PointMass, Uniform
from cornergrowth.lpp import (
    GridSizeError,
    InvalidParameterError,
    apply_F,
    boundary_increment_rows,
    boundary_last_passage_row,
    cell_weight,
    last_passage,
    last_passage_row,
    last_passage_with_boundary,
    read_field_binary,
    sample_boundary,
    sample_weights,
    write_field_binary,
    write_field_csv,
)
from cornergrowth.sequences import ParameterPair, SequenceModel, generate

from oracles import brute_force_boundary, brute_force_last_passage

UNIFORM = SequenceModel(Uniform(0.5, 1.5))


def pair(m, n, seed=1, model=UNIFORM):
    return generate(model, model, m, n, seed)


def geometric_pair(m, n, seed=1):
    return generate(SequenceModel(Uniform(0.3, 0.8)), SequenceModel(Uniform(0.2, 0.9)), m, n, seed)


# -- recursion examples ----------------------------------------------------------


def test_all_ones_2x2():
    assert last_passage(np.ones((2, 2))).at(2, 2) == 3.0


def test_single_row_is_sum():
    w = np.arange(1.0, 8.0).reshape(7, 1)
    assert last_passage(w).at(7, 1) == w.sum()


def test_6x6_integer_grid_matches_252_paths():
    rng = np.random.default_rng(6)
    W = rng.integers(0, 10, size=(6, 6)).astype(float)
    assert math.comb(10, 5) == 252
    assert last_passage(W).at(6, 6) == brute_force_last_passage(W)


def test_every_cell_matches_enumeration():
    rng = np.random.default_rng(7)
    W = rng.exponential(size=(4, 5))
    G = last_passage(W)
    for i in range(1, 5):
        for j in range(1, 6):
            assert G.at(i, j) == brute_force_last_passage(W[:i, :j])


def test_lean_row_equals_full_field():
    params = pair(37, 23, seed=5)
    full = last_passage(sample_weights(params, "exponential", 99))
    assert np.array_equal(last_passage_row(params, "exponential", 99), full.G[:, -1])
    assert np.array_equal(last_passage_row(params, "exponential", 99, rows=10, cols=20), full.G[:21, 10])


def test_full_field_cap():
    big = ParameterPair(a=np.ones(30_000), b=np.ones(20_000), seed=0)
    with pytest.raises(GridSizeError):
        sample_weights(big, "exponential", 0)


# -- weights --------------------------------------------------------------------


def test_cell_regeneration_is_bit_identical():
    params = pair(20, 15, seed=3)
    grid = sample_weights(params, "exponential", 12)
    for i, j in [(1, 1), (20, 15), (7, 3), (13, 9)]:
        assert cell_weight(params, "exponential", 12, i, j) == grid.values[i - 1, j - 1]
    again = sample_weights(params, "exponential", 12)
    assert np.array_equal(grid.values, again.values)


def test_exponential_mean_one():
    params = ParameterPair(a=np.full(1000, 0.5), b=np.full(1000, 0.5), seed=0)
    w = sample_weights(params, "exponential", 2024).values
    assert w.min() >= 0
    assert abs(w.mean() - 1.0) <= 3 / math.sqrt(w.size)


def test_geometric_tail_probability():
    q = 0.45
    params = ParameterPair(a=np.full(1000, 0.9), b=np.full(1000, q / 0.9), seed=0)
    w = sample_weights(params, "geometric", 31).values
    assert np.all(w == np.floor(w)) and w.min() >= 0
    p1 = np.mean(w >= 1)
    assert abs(p1 - q) <= 3 * math.sqrt(q * (1 - q) / w.size)
    assert abs(np.mean(w >= 2) - q**2) <= 3 * math.sqrt(q**2 * (1 - q**2) / w.size)


def test_geometric_invalid_parameters():
    params = ParameterPair(a=np.full(3, 1.0), b=np.full(3, 1.0), seed=0)
    with pytest.raises(InvalidParameterError):
        sample_weights(params, "geometric", 1)


# -- invariants ------------------------------------------------------------------


def test_monotone_along_rows_and_columns():
    G = last_passage(sample_weights(pair(30, 30), "exponential", 4)).G
    assert np.all(np.diff(G, axis=0) >= 0) and np.all(np.diff(G, axis=1) >= 0)


@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(2, 7), st.integers(2, 7)), elements=st.floats(0, 5)), st.data())
def test_superadditivity(W, data):
    m, n = W.shape
    i = data.draw(st.integers(1, m - 1))
    j = data.draw(st.integers(1, n - 1))
    whole = last_passage(W).at(m, n)
    first = last_passage(W[:i, :j]).at(i, j)
    second = last_passage(W[i:, j:]).at(m - i, n - j)
    assert whole >= first + second


@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(1, 6), st.integers(1, 6)), elements=st.floats(0, 5)), st.data(), st.floats(0, 3))
def test_raising_a_weight_never_lowers_G(W, data, bump):
    m, n = W.shape
    i = data.draw(st.integers(0, m - 1))
    j = data.draw(st.integers(0, n - 1))
    W2 = W.copy()
    W2[i, j] += bump
    assert np.all(last_passage(W2).G >= last_passage(W).G)


@settings(max_examples=30, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(1, 7), st.integers(1, 7)), elements=st.integers(0, 9).map(float)))
def test_dp_matches_enumeration_small(W):
    assert last_passage(W).at(*W.shape) == brute_force_last_passage(W)


# -- boundary model --------------------------------------------------------------


def test_boundary_sums_and_domination():
    params = pair(40, 30, seed=8)
    field, inc = last_passage_with_boundary(params, 0.2, "exponential", 17)
    b = field.boundary
    assert field.at(40, 0) == pytest.approx(b.boundary_row.sum(), rel=1e-15)
    assert field.at(0, 30) == pytest.approx(b.boundary_col.sum(), rel=1e-15)
    plain = last_passage(sample_weights(params, "exponential", 17))
    assert np.all(field.G >= plain.G)
    assert np.all(inc.I >= 0) and np.all(inc.J >= 0)


def test_boundary_matches_path_enumeration():
    params = pair(5, 4, seed=2)
    field, _ = last_passage_with_boundary(params, -0.1, "exponential", 3)
    W = sample_weights(params, "exponential", 3).values
    b = field.boundary
    assert field.at(5, 4) == pytest.approx(brute_force_boundary(W, b.boundary_row, b.boundary_col), rel=1e-14)


@pytest.mark.parametrize("model,z", [("exponential", 0.3), ("geometric", 0.95)])
def test_increment_recursion_holds(model, z):
    params = pair(60, 50, seed=4) if model == "exponential" else geometric_pair(60, 50, seed=4)
    _, inc = last_passage_with_boundary(params, z, model, 21)
    W = sample_weights(params, model, 21).values
    m, n = W.shape
    worst = 0.0
    for i in range(1, m + 1):
        for j in range(1, n + 1):
            Iprev = inc.I_at(i, j - 1)
            Jprev = inc.J_at(i - 1, j)
            mn = min(Iprev, Jprev)
            worst = max(worst, abs(inc.I_at(i, j) - (Iprev - mn + W[i - 1, j - 1])))
            worst = max(worst, abs(inc.J_at(i, j) - (Jprev - mn + W[i - 1, j - 1])))
    tol = 0.0 if model == "geometric" else 1e-12 * max(1.0, inc.I.max())
    assert worst <= tol


def test_streamed_boundary_rows_match_full_field():
    params = pair(80, 40, seed=6)
    field, inc = last_passage_with_boundary(params, 0.1, "exponential", 5)
    rows = boundary_increment_rows(params, 0.1, "exponential", 5, [0, 1, 17, 40])
    for l, I in rows.items():
        assert np.array_equal(I, inc.I[:, l])
    assert np.array_equal(boundary_last_passage_row(params, 0.1, "exponential", 5), field.G[:, -1])


def test_boundary_z_outside_interval():
    params = pair(10, 10)
    with pytest.raises(DomainError):
        last_passage_with_boundary(params, 0.6, "exponential", 1)
    with pytest.raises(DomainError):
        sample_boundary(geometric_pair(10, 10), 0.5, "geometric", 1)


def test_boundary_mean_identity():
    # E[G^(n,n) | a, b] is the sum of the boundary means
    n, z, reps = 40, 0.15, 400
    params = ParameterPair(a=np.full(n, 0.75), b=np.full(n, 1.25), seed=0)
    exact = np.sum(1 / (params.a + z)) + np.sum(1 / (params.b - z))
    vals = np.array([boundary_last_passage_row(params, z, "exponential", s)[-1] for s in range(reps)])
    assert abs(vals.mean() - exact) <= 3 * vals.std(ddof=1) / math.sqrt(reps)


# -- involution ------------------------------------------------------------------


def test_apply_F_example():
    assert tuple(float(v) for v in apply_F(1.0, 1.0, 0.0)) == (0.0, 0.0, 1.0)


def test_apply_F_involution_integers_exact():
    rng = np.random.default_rng(0)
    x, y, w = rng.integers(0, 50, size=(3, 1_000_000)).astype(float)
    xx, yy, ww = apply_F(*apply_F(x, y, w))
    assert np.array_equal(xx, x) and np.array_equal(yy, y) and np.array_equal(ww, w)


def test_apply_F_involution_dyadic_exact():
    rng = np.random.default_rng(1)
    x, y, w = rng.integers(0, 2**20, size=(3, 1_000_000)) / 2.0**10
    xx, yy, ww = apply_F(*apply_F(x, y, w))
    assert np.array_equal(xx, x) and np.array_equal(yy, y) and np.array_equal(ww, w)


def test_apply_F_involution_floats_to_rounding():
    rng = np.random.default_rng(2)
    x, y, w = rng.exponential(size=(3, 1_000_000))
    back = apply_F(*apply_F(x, y, w))
    for orig, new in zip((x, y, w), back):
        assert np.max(np.abs(new - orig)) <= 4 * np.finfo(float).eps * np.max(np.abs(x) + np.abs(y) + np.abs(w))


# -- dumps -----------------------------------------------------------------------


def test_field_csv(tmp_path):
    path = tmp_path / "g.csv"
    write_field_csv(path, np.array([[0.0, 1.5], [2.0, 3.25]]))
    assert path.read_bytes() == b"i,j,value\r\n0,0,0.0\r\n0,1,1.5\r\n1,0,2.0\r\n1,1,3.25\r\n"


def test_field_binary_round_trip(tmp_path):
    G = last_passage(sample_weights(pair(13, 7), "exponential", 2)).G
    path = tmp_path / "g.bin"
    write_field_binary(path, G)
    raw = path.read_bytes()
    assert raw[:6] == b"CGMLPP" and len(raw) == 16 + 8 * G.size
    assert np.array_equal(read_field_binary(path), G)
    path.write_bytes(b"XXXXXX" + raw[6:])
    with pytest.raises(ValueError):
        read_field_binary(path)
