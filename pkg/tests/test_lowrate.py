import numpy as np
import pytest

from rbriop.iop_framework import AdversaryScript, Deviation, Transcript, seed_from_int
from rbriop.lowrate import (QueryCount, expected_double, expected_irm, expected_rs, fill_rows, recursion_levels,
                            run_irm_iopp, run_rs_iopp)
from rbriop.poly_core import EvalTable, Grid, MultiPoly

from conftest import counts_of, random_uni, uni_table

ADVERSARIES = [AdversaryScript(k, (Deviation(k),)) for k in
               ("degree_inflation", "fill_corruption", "anchor_equivocation")]

# frozen from a hand evaluation of the recursion (see the closed forms in test_count_recursion)
FROZEN = {("rs", 4): (1, 131072, 4), ("rs", 16): (3, 131107, 88), ("irm", 4): (5, 131097, 72)}


def test_count_recursion(params):
    # independent walk of the recursion: RS(d) reads T points of f and runs iRM(sqrt d) on a
    # virtual bivariate table costing 2 reads per point; iRM(D) reads T points, then runs
    # the halving wrapper (1 extra point) over lines costing 2T+2 reads per point.
    q = 256

    def rs(d):
        if d < 4:
            return (q, 0, 0)
        T = params.T_rs(d)
        i, p, c = irm(int(d ** 0.5))
        return (T, 2 * i + p, 1 + T + (T + 1) ** 2 - (T + 1) + c)

    def irm(D):
        if D < 4:
            return (q * q, 0, 0)
        T = params.T_irm(D)
        i, p, c = rs(D)
        i, p = 1 + i, i + p             # halving wrapper
        return (T, (2 * T + 2) * i + p, T + 7 + (T + 3) ** 2 - (T + 3) + c)

    assert rs(4) == FROZEN[("rs", 4)]
    assert rs(16) == FROZEN[("rs", 16)]
    assert irm(4) == FROZEN[("irm", 4)]
    for key, fn in ((("rs", 4), lambda: expected_rs(params, 4)), (("rs", 16), lambda: expected_rs(params, 16)),
                    (("irm", 4), lambda: expected_irm(params, 4))):
        e = fn()
        assert (e.input, e.proof, e.plain) == FROZEN[key]
    assert expected_rs(params, 2) == QueryCount(256, 0, 0)
    assert expected_double(params, 8).input == 1 + expected_rs(params, 4).input


@pytest.mark.parametrize("d", [4, 16])
def test_rs_honest_counts_replay(params, F, enc_grid1, rng, tower, d):
    table = uni_table(F, random_uni(F, d, rng), enc_grid1)
    for i in range(3):
        res = run_rs_iopp(params, seed_from_int(i), table, d)
        assert res.accepted, res.verdict
        assert counts_of(res) == FROZEN[("rs", d)]
    # answers recorded under seed 2 do not fit the points drawn under seed 0
    rep = run_rs_iopp(params, seed_from_int(0), table, d,
                      replay=Transcript.from_bytes(res.transcript.to_bytes(), tower))
    assert not rep.accepted
    rep = run_rs_iopp(params, seed_from_int(2), table, d,
                      replay=Transcript.from_bytes(res.transcript.to_bytes(), tower))
    assert rep.accepted


def test_rs_lower_degree_accepted(params, F, enc_grid1, rng):
    table = uni_table(F, random_uni(F, 2, rng), enc_grid1)
    assert run_rs_iopp(params, seed_from_int(0), table, 4).accepted


def test_rs_base_case_reads_everything(params, F, enc_grid1, rng):
    good = uni_table(F, random_uni(F, 1, rng), enc_grid1)
    res = run_rs_iopp(params, seed_from_int(0), good, 2)
    assert res.accepted and counts_of(res) == (256, 0, 0)
    bad = uni_table(F, random_uni(F, 3, rng), enc_grid1)
    assert not run_rs_iopp(params, seed_from_int(0), bad, 2).accepted


def test_rs_far_input_rejected(params, F, enc_grid1, rng):
    table = EvalTable(F, enc_grid1, rng.integers(0, F.size, 256))
    rejected = sum(not run_rs_iopp(params, seed_from_int(i), table, 4).accepted for i in range(30))
    assert rejected >= 27


def test_rs_degree_too_high_rejected(params, F, enc_grid1, rng):
    table = uni_table(F, random_uni(F, 5, rng), enc_grid1)
    rejected = sum(not run_rs_iopp(params, seed_from_int(i), table, 4).accepted for i in range(20))
    assert rejected >= 18


@pytest.mark.parametrize("adv", ADVERSARIES, ids=lambda a: a.name)
def test_rs_adversaries_on_codeword_rejected(params, F, enc_grid1, rng, adv):
    table = uni_table(F, random_uni(F, 16, rng), enc_grid1)
    for i in range(3):
        assert not run_rs_iopp(params, seed_from_int(i), table, 16, adversary=adv).accepted


def test_irm_honest_and_far(params, F, tower, rng):
    grid = Grid([tower.subfield_elements(8, 16)] * 2, ["gf8", "gf8"])
    terms = {(i, j): int(rng.integers(0, F.size)) for i in range(5) for j in range(5)}
    table = EvalTable.from_poly(MultiPoly(F, 2, terms), grid)
    res = run_irm_iopp(params, seed_from_int(0), table, 4)
    assert res.accepted and counts_of(res) == FROZEN[("irm", 4)]
    far = table.copy()
    far.values[rng.choice(grid.size, grid.size // 2, replace=False)] ^= 1
    assert sum(not run_irm_iopp(params, seed_from_int(i), far, 4).accepted for i in range(5)) == 5


def test_instrumented_far_run_starts_doomed(params, F, enc_grid1, rng):
    table = EvalTable(F, enc_grid1, rng.integers(0, F.size, 256))
    res = run_rs_iopp(params, seed_from_int(0), table, 4, instrument=True)
    assert res.states[0].doomed is True
    assert res.states[-1].label == "terminal"


def test_recursion_levels(params):
    lv = recursion_levels(params, 16)
    assert [(l.k, l.d, l.T_rs, l.T_irm) for l in lv] == [(2, 16, 3, 29), (1, 4, 1, 5)]
    assert lv[0].eps == pytest.approx(params.eps_k(2))


def test_fill_rows(enc):
    assert fill_rows(enc, [int(enc[5]), 70000 % 65536, int(enc[1])]).tolist() == [int(enc[1]), int(enc[5])]
