from fractions import Fraction
from itertools import product
from math import sqrt

import numpy as np
import pytest
from scipy.linalg import eigvalsh

from rbriop.codes import CapabilityError, CodeSpec, code_agreement_oracle
from rbriop.iop_framework import preset, seed_from_int
from rbriop.ldt_lab import (Profile, Record, affine_flats, best_agreement, codebook, format_report,
                            inclusion_graph, inclusion_graph_sigma, inclusion_matrix, line_agreement_profile,
                            plane_agreement_profile, run_adversary, spectral_sampling_check)
from rbriop.lowrate import run_rs_iopp
from rbriop.poly_core import EvalTable, Grid, MultiPoly


def _codeword(F, m, deg, seed):
    rng = np.random.default_rng(seed)
    terms = {e: int(rng.integers(0, F.size)) for e in product(range(deg + 1), repeat=m) if sum(e) <= deg}
    return EvalTable.from_poly(MultiPoly(F, m, terms), Grid([np.arange(F.size)] * m))


def _second_singular_by_eigen(graph):
    # independent route: eigenvalues of K K^T with K the normalized operator, computed by LAPACK's
    # symmetric solver instead of an SVD
    K = graph.operator()
    ev = np.sort(eigvalsh(K.T @ K))[::-1]
    return sqrt(max(ev[1], 0.0))


def test_sigma_values(tower):
    s1 = inclusion_graph_sigma(1, 0, 2, 2)
    s2 = inclusion_graph_sigma(2, 0, 2, 3)
    assert abs(s1 - 0.5) < 1e-9 and abs(s2 - 0.25) < 1e-9
    assert abs(_second_singular_by_eigen(inclusion_graph(1, 0, 2, 2)) - 0.5) < 1e-9
    assert abs(_second_singular_by_eigen(inclusion_graph(2, 0, 2, 3)) - 0.25) < 1e-9


def test_sigma_genuine_flats():
    # points of AG(2, q) lie on q + 1 lines, points of AG(3, q) on q^2 + q + 1 planes
    assert abs(inclusion_graph_sigma(1, 0, 2, 2, model="flats") - 1 / sqrt(5)) < 1e-9
    assert abs(inclusion_graph_sigma(2, 0, 2, 3, model="flats") - 1 / sqrt(21)) < 1e-9
    assert inclusion_graph_sigma(2, 1, 2, 3) <= 0.5 + 1e-9


def test_top_singular_value_is_one():
    sv = inclusion_graph(1, 0, 2, 2).singular_values()
    assert abs(sv[0] - 1) < 1e-9


def test_inclusion_matrix_degrees(tower):
    F4 = tower.field(2)
    M = inclusion_matrix(F4, range(4), 2, 1, 0)
    assert M.shape == (20, 16)
    assert np.all(M.sum(axis=1) == 4) and np.all(M.sum(axis=0) == 5)
    assert len(affine_flats(F4, range(4), 3, 2)) == 84
    with pytest.raises(ValueError):
        inclusion_matrix(F4, range(4), 2, 0, 1)
    with pytest.raises(ValueError):
        inclusion_graph(2, 1, 2, 3, model="param")


def test_sampling_check_bound():
    g = inclusion_graph(1, 0, 2, 2)
    rng = np.random.default_rng(0)
    for _ in range(30):
        S = rng.random(g.P.shape[0]) < 0.3
        if not S.any():
            continue
        G = rng.random(g.P.shape[1])
        dev, sigma, bound = spectral_sampling_check(S, G, g)
        assert dev <= bound + 1e-12
    with pytest.raises(ValueError):
        spectral_sampling_check(np.zeros(g.P.shape[0], bool), np.zeros(16), g)


def test_line_profile_single_corruption(tower):
    F = tower.field(4)
    t = _codeword(F, 2, 2, 1)
    prof = line_agreement_profile(t, 2)
    assert prof.flats == 16 * 17 and prof.exhaustive
    assert prof.hist == {Fraction(1): 272}
    t.values[5] ^= 3
    prof = line_agreement_profile(t, 2)
    # the corrupted point lies on q + 1 = 17 lines
    assert prof.hist[Fraction(15, 16)] == 17 and prof.hist[Fraction(1)] == 255
    assert prof.tail(Fraction(15, 16)) == (272, Fraction(1))
    sampled = line_agreement_profile(t, 2, sample=50, seed=3)
    assert sampled.flats == 50 and not sampled.exhaustive


def test_plane_profile_single_corruption(tower):
    F = tower.field(2)
    t = _codeword(F, 3, 2, 2)
    t.values[7] ^= 1
    prof = plane_agreement_profile(t, 2)
    assert prof.flats == 84
    assert prof.hist[Fraction(15, 16)] == 21


def test_profile_caps(tower):
    F = tower.field(4)
    t = _codeword(F, 3, 1, 0)
    with pytest.raises(CapabilityError):
        line_agreement_profile(t, 1, cap=100)


def test_codebook_matches_oracle(tower):
    F = tower.field(4)
    code = CodeSpec("RS", 1, Grid([np.arange(16)]), F)
    book = codebook(code)
    assert book.shape == (256, 16)
    rng = np.random.default_rng(2)
    for _ in range(10):
        w = rng.integers(0, 16, 16)
        assert best_agreement(book, w) == code_agreement_oracle(w, code).agreement
    with pytest.raises(CapabilityError):
        codebook(CodeSpec("RS", 5, Grid([np.arange(16)]), F))


def test_record_lines():
    r = Record("sigma", {"q": 4}, 0.5, 0.5, True)
    assert r.line() == "PASS sigma [q=4] value=0.5 bound=0.5"
    r2 = Record("x", {}, Fraction(1, 3), 1, False)
    assert format_report([r, r2]).splitlines()[1].startswith("FAIL x [] value=1/3")
    p = Profile([Fraction(1), Fraction(1, 2), Fraction(1)], True)
    assert p.lines() == ["agreement=1/2 count=1", "agreement=1 count=2"]


def test_run_adversary_tallies(tower):
    F = tower.field(16)
    E = tower.subfield_elements(8, 16)
    far = EvalTable(F, Grid([E], ["gf8"]), np.random.default_rng(1).integers(0, F.size, 256))
    p = preset("desk27")
    stats = run_adversary("far", lambda s: run_rs_iopp(p, s, far, 4, instrument=True), range(10), instrument=True)
    assert stats.runs == 10 and stats.rejected >= 8
    assert sum(stats.reasons.values()) == stats.rejected
    assert stats.lines()[0].startswith("adversary=far runs=10")


@pytest.mark.parametrize("a,b,m", [(2, 0, 2), (1, 1, 3), (3, 0, 3)])
def test_inclusion_graph_rejects_degenerate_dimensions(a, b, m):
    with pytest.raises(ValueError):
        inclusion_graph_sigma(a, b, 2, m)
