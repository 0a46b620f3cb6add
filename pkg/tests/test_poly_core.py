from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rbriop.field_tower import default_tower
from rbriop.poly_core import (EvalTable, Grid, MultiPoly, PointList, UniPoly, canonical_line,
                              canonical_plane, enumerate_lines, enumerate_planes, field_matmul, lde,
                              line_points, multivariate_vanishing_division, parse_domain, plane_points,
                              rank, solve_linear, split_variable, vanishing_poly)

from conftest import random_tri, random_uni

F16 = default_tower().field(16)
coeff = st.integers(0, 2 ** 16 - 1)


@given(st.lists(coeff, max_size=8), st.lists(coeff, min_size=1, max_size=6))
def test_divmod_identity(a, b):
    f, g = UniPoly(F16, a), UniPoly(F16, b)
    if g.is_zero():
        return
    q, r = f.divmod(g)
    assert q * g + r == f
    assert r.degree < g.degree


@settings(max_examples=60)
@given(st.lists(coeff, min_size=1, max_size=10, unique=True), st.data())
def test_interpolation_roundtrip(xs, data):
    ys = data.draw(st.lists(coeff, min_size=len(xs), max_size=len(xs)))
    p = UniPoly.interpolate(F16, xs, ys)
    assert p.degree < len(xs)
    assert [p(x) for x in xs] == ys


def test_interpolation_rejects_repeated_points():
    with pytest.raises(ValueError):
        UniPoly.interpolate(F16, [1, 1], [2, 3])


def test_vanishing_poly_roots(rng):
    A = [int(v) for v in rng.choice(F16.size, 7, replace=False)]
    V = vanishing_poly(F16, A)
    assert V.degree == 7
    assert all(V(a) == 0 for a in A)
    assert V(np.array(A)).tolist() == [0] * 7


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_split_variable(rng, k):
    f = random_uni(F16, 15, rng)
    Q = split_variable(f, k)
    xs = rng.integers(0, F16.size, 20)
    got = Q.eval_points(np.stack([F16.pow(xs, k), xs], axis=1))
    assert np.array_equal(got, f(xs))
    assert Q.individual_degrees()[1] < k


def test_eval_routes_agree(rng):
    f = random_tri(F16, 5, rng)
    axes = [rng.choice(F16.size, 4, replace=False) for _ in range(3)]
    grid = f.eval_grid(axes)
    pts = Grid(axes).points()
    assert np.array_equal(grid.ravel(), f.eval_points(pts))
    p = pts[7]
    assert f(*p) == grid.ravel()[7]


def test_partial_eval_and_restrictions(rng):
    f = random_tri(F16, 4, rng)
    a = int(rng.integers(0, F16.size))
    g = f.partial_eval(1, a)
    pts = rng.integers(0, F16.size, (10, 3))
    moved = pts.copy()
    moved[:, 1] = a
    assert np.array_equal(g.eval_points(pts), f.eval_points(moved))

    p, d = rng.integers(0, F16.size, 3), rng.integers(1, F16.size, 3)
    line = f.restrict_line(p, d)
    ts = rng.integers(0, F16.size, 12)
    assert np.array_equal(line(ts), f.eval_points(line_points(F16, (p, d), ts)))
    assert line.degree <= 4

    u, w = rng.integers(1, F16.size, 3), rng.integers(1, F16.size, 3)
    plane = f.restrict_plane(p, u, w)
    s, t = rng.integers(0, F16.size, 3), rng.integers(0, F16.size, 4)
    assert np.array_equal(plane.eval_grid([s, t]).ravel(), f.eval_points(plane_points(F16, (p, (u, w)), s, t)))
    assert plane.degree <= 4


def test_to_uni_rejects_mixed():
    f = MultiPoly(F16, 2, {(1, 1): 1})
    with pytest.raises(ValueError):
        f.to_uni(0)


def test_vanishing_division_reconstructs(rng):
    sets = [[1, 2, 3], [5, 6], [7, 8, 9, 10]]
    for _ in range(20):
        f = random_tri(F16, 6, rng)
        R, Qs = multivariate_vanishing_division(f, sets)
        back = R
        for i, (A, Q) in enumerate(zip(sets, Qs)):
            back = back + vanishing_poly(F16, A).to_multi(3, i) * Q
        assert back == f
        assert all(d < len(A) for d, A in zip(R.individual_degrees(), sets))
        # remainder is the interpolant of f on the product set
        ref = lde(EvalTable(F16, Grid(sets), f.eval_grid(sets).ravel()))
        assert R == ref


def test_lde_roundtrip(rng):
    axes = [rng.choice(F16.size, n, replace=False) for n in (3, 4, 2)]
    vals = rng.integers(0, F16.size, 24)
    p = lde(EvalTable(F16, Grid(axes), vals))
    assert np.array_equal(p.eval_grid(axes).ravel(), vals)
    assert all(d < n for d, n in zip(p.individual_degrees(), (3, 4, 2)))


def test_linear_algebra(rng):
    A = rng.integers(0, F16.size, (5, 5))
    x = rng.integers(0, F16.size, 5)
    b = field_matmul(F16, A, x.reshape(-1, 1))[:, 0]
    if rank(F16, A) == 5:
        assert solve_linear(F16, A, b) == x.tolist()
    S = np.array([[1, 2], [2, F16.mul(2, 2)]])
    assert rank(F16, S) == 1
    assert solve_linear(F16, S, [3, F16.mul(3, 2)]) is None
    with pytest.raises(ValueError):
        solve_linear(F16, S, [3, 3])


def _line_set(F, line, elems):
    return frozenset(map(tuple, line_points(F, line, elems).tolist()))


def test_enumerations_count_and_distinct(tower):
    F4 = tower.field(2)
    el = range(4)
    lines = enumerate_lines(F4, el, 2)
    assert len(lines) == 20
    assert len({_line_set(F4, ln, el) for ln in lines}) == 20
    lines3 = enumerate_lines(F4, el, 3)
    assert len(lines3) == 16 * 21
    planes = enumerate_planes(F4, el, 3)
    assert len(planes) == 84
    assert len({frozenset(map(tuple, plane_points(F4, pl, el, el).tolist())) for pl in planes}) == 84


def test_canonical_forms_are_invariant(tower, rng):
    F4 = tower.field(2)
    el = range(4)
    p, d = (1, 2, 3), (2, 0, 1)
    c = canonical_line(F4, p, d)
    # reparametrize: another point on the line, scaled direction
    p2 = tuple(a ^ F4.mul(3, b) for a, b in zip(p, d))
    d2 = tuple(F4.mul(2, b) for b in d)
    assert canonical_line(F4, p2, d2) == c
    assert _line_set(F4, c, el) == _line_set(F4, (p, d), el)
    u, w = (1, 1, 0), (0, 1, 3)
    pl = canonical_plane(F4, p, u, w)
    assert canonical_plane(F4, p, w, tuple(a ^ b for a, b in zip(u, w))) == pl
    with pytest.raises(ValueError):
        canonical_plane(F4, p, u, u)
    with pytest.raises(ValueError):
        canonical_line(F4, p, (0, 0, 0))


def test_table_serialization_roundtrip(tower, enc, rng):
    g = Grid([enc, enc[:5]], ["gf8", None])
    t = EvalTable(F16, g, rng.integers(0, F16.size, g.size))
    back = EvalTable.parse(t.serialize(), tower)
    assert np.array_equal(back.values, t.values)
    assert back.domain.shape == g.shape
    pl = PointList(rng.choice(F16.size, (4, 2), replace=False))
    t2 = EvalTable(F16, pl, [1, 2, 3, 4])
    back2 = EvalTable.parse(t2.serialize(), tower)
    assert np.array_equal(back2(pl.points()[2]), [3])
    for bad in ("grid 16", "grid 16 gq8", "blob 16 x", "points 16 1 oops"):
        with pytest.raises((ValueError, KeyError)):
            parse_domain(bad, tower)


def test_table_lookup_outside_domain(enc):
    t = EvalTable(F16, Grid([enc[:3]]), [1, 2, 3])
    assert int(t(enc[1])[0]) == 2
    with pytest.raises(KeyError):
        t(np.array([int(enc[5])]))


def test_compose_affine_identity(rng):
    f = random_tri(F16, 3, rng)
    eye = [[int(i == j) for j in range(3)] for i in range(3)]
    assert f.compose_affine(eye, (0, 0, 0)) == f


def test_total_degree_of_products(rng):
    f, g = random_tri(F16, 2, rng), random_tri(F16, 3, rng)
    assert (f * g).degree == 5
    exps = [e for e in product(range(3), repeat=3)]
    assert MultiPoly(F16, 3, {e: 1 for e in exps}).individual_degrees() == (2, 2, 2)
