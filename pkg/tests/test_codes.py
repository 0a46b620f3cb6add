from fractions import Fraction

import numpy as np
import pytest

from rbriop.codes import (CapabilityError, CodeSpec, SideCondition, agreement, code_agreement_oracle,
                          decode_exact, is_codeword, isqrt_exact, johnson_list_bound, list_decode,
                          pairwise_delta)
from rbriop.ldt_lab import best_agreement, codebook
from rbriop.poly_core import Grid, MultiPoly, UniPoly


@pytest.fixture(scope="module")
def F4(tower):
    return tower.field(4)


@pytest.fixture(scope="module")
def rs2(F4):
    return CodeSpec("RS", 2, Grid([np.arange(16)]), F4)


def test_monomials_and_dim(F4):
    g2 = Grid([np.arange(4)] * 2)
    assert CodeSpec("RS", 3, Grid([np.arange(16)]), F4).dim == 4
    assert CodeSpec("RM_total", 2, g2, F4).dim == 6
    assert CodeSpec("RM_individual", (1, 2), g2, F4).dim == 6
    assert CodeSpec("RM_total", -1, g2, F4).dim == 0
    with pytest.raises(ValueError):
        CodeSpec("RS", 2, g2, F4)
    with pytest.raises(ValueError):
        CodeSpec("BCH", 2, g2, F4)


def test_contains_poly(F4):
    g2 = Grid([np.arange(4)] * 2)
    tot = CodeSpec("RM_total", 2, g2, F4)
    ind = CodeSpec("RM_individual", (2, 2), g2, F4)
    p = MultiPoly(F4, 2, {(2, 2): 1})
    assert ind.contains_poly(p) and not tot.contains_poly(p)
    assert tot.contains_poly(MultiPoly(F4, 2))


def test_oracle_routes_agree(F4, rs2):
    rng = np.random.default_rng(3)
    book = codebook(rs2)
    for trial in range(15):
        f = rng.integers(0, 16, 16)
        if trial % 3 == 0:
            f[:9] = UniPoly(F4, [3, 1, 7])(np.arange(9))
        a = code_agreement_oracle(f, rs2, method="messages")
        b = code_agreement_oracle(f, rs2, method="subsets")
        assert a.agreement == b.agreement == best_agreement(book, f)
        assert a.coeffs == b.coeffs


def test_oracle_side_condition_routes(F4, rs2):
    rng = np.random.default_rng(4)
    for _ in range(15):
        f = rng.integers(0, 16, 16)
        side = SideCondition([int(rng.integers(0, 16))], [int(rng.integers(0, 16))])
        a = code_agreement_oracle(f, rs2, side, method="messages")
        b = code_agreement_oracle(f, rs2, side, method="subsets")
        assert a.agreement == b.agreement
        assert a.poly(int(side.points[0, 0])) == int(side.values[0])
        # brute force over all codewords satisfying the condition
        best = 0
        for c in np.ndindex(16, 16, 16):
            p = UniPoly(F4, c)
            if p(int(side.points[0, 0])) == int(side.values[0]):
                best = max(best, int(np.count_nonzero(p(np.arange(16)) == f)))
        assert a.agreement == Fraction(best, 16)


def test_oracle_inconsistent_side(F4):
    code = CodeSpec("RS", 0, Grid([np.arange(16)]), F4)
    side = SideCondition([1, 2], [3, 4])
    assert code_agreement_oracle(np.zeros(16), code, side).agreement == 0


def test_oracle_cap(F16, enc):
    code = CodeSpec("RS", 6, Grid([enc]), F16)
    with pytest.raises(CapabilityError):
        code_agreement_oracle(np.zeros(256), code, cap=1000)


@pytest.fixture(scope="module")
def F16(tower):
    return tower.field(16)


def test_list_decode_matches_codebook(F4, rs2):
    rng = np.random.default_rng(9)
    book = codebook(rs2)
    C = Fraction(6, 16)
    for _ in range(10):
        f = rng.integers(0, 16, 16)
        f[:6] = UniPoly(F4, [1, 2, 3])(np.arange(6))
        f[6:12] = UniPoly(F4, [4, 0, 5])(np.arange(6, 12))
        got = list_decode(f, rs2, C)
        counts = (book == f[None, :]).sum(axis=1)
        assert len(got) == int(np.count_nonzero(counts >= 6))
        assert len(got) <= johnson_list_bound(C, pairwise_delta(rs2))


def test_list_decode_radius_guard(F4, rs2):
    with pytest.raises(ValueError):
        list_decode(np.zeros(16), rs2, Fraction(1, 4))


def test_johnson_bound():
    assert johnson_list_bound(Fraction(1, 2), Fraction(1, 8)) == Fraction(4)
    with pytest.raises(ValueError):
        johnson_list_bound(Fraction(1, 4), Fraction(1, 8))


def test_decode_exact(F4, rs2):
    p = UniPoly(F4, [5, 0, 9])
    vals = p(np.arange(16))
    assert decode_exact(vals, rs2) == p
    vals[10] ^= 1
    assert decode_exact(vals, rs2) is None
    g3 = Grid([np.arange(4)] * 3)
    code = CodeSpec("RM_total", 2, g3, F4)
    f = MultiPoly(F4, 3, {(1, 1, 0): 3, (0, 0, 2): 1, (0, 0, 0): 7})
    vals = f.eval_grid(g3.axes).ravel()
    assert decode_exact(vals, code) == f
    g = MultiPoly(F4, 3, {(1, 1, 1): 1})
    assert not is_codeword(g.eval_grid(g3.axes).ravel(), code)


def test_agreement_and_delta(F4, rs2):
    assert agreement([1, 2, 3, 4], [1, 0, 3, 0]) == Fraction(1, 2)
    with pytest.raises(ValueError):
        agreement([1], [1, 2])
    assert pairwise_delta(rs2) == Fraction(2, 16)


def test_isqrt_exact():
    assert isqrt_exact(16) == 4
    with pytest.raises(ValueError):
        isqrt_exact(15)
