import numpy as np
import pytest

from rbriop.iop_framework import AdversaryScript, Deviation, Transcript, TranscriptError, seed_from_int
from rbriop.poly_core import Grid, vanishing_poly
from rbriop.r1cs import (R1csInstance, Witness, algebraize, build_walpha_valpha, expected_r1cs, generate,
                         is_satisfied, prove, read_instance, read_witness, subgroup_for, tri_degrees, verify,
                         write_instance, write_witness)
from rbriop.sumcheck import subgroup_sum

from conftest import counts_of

SUBST = AdversaryScript("subst", (Deviation("witness_substitution"),))
SUBST_MIS = AdversaryScript("subst-mis", (Deviation("witness_substitution"), Deviation("sum_misreport")))


@pytest.fixture(scope="module")
def sat(tower):
    return generate(tower.field(16), 27, seed=5)


@pytest.fixture(scope="module")
def honest_run(params, sat):
    inst, w = sat
    return prove(params, seed_from_int(0), inst, w)


def test_generator(F):
    inst, w = generate(F, 27, seed=1)
    assert is_satisfied(inst, w.v) and inst.certified_unsat() is None
    bad, bw = generate(F, 27, seed=1, unsat=True)
    assert not is_satisfied(bad, bw.v)
    assert bad.certified_unsat() == 0
    with pytest.raises(ValueError):
        is_satisfied(inst, w.v[:5])
    v = w.v.copy()
    v[0] = 2
    assert not is_satisfied(inst, v)


def test_instance_files_roundtrip(sat, tower, tmp_path):
    inst, w = sat
    write_instance(inst, tmp_path / "i.r1cs")
    write_witness(w, inst.field, tmp_path / "i.wit")
    back = read_instance(tmp_path / "i.r1cs", tower)
    assert all(np.array_equal(a, b) for a, b in zip(back.matrices().values(), inst.matrices().values()))
    assert np.array_equal(read_witness(tmp_path / "i.wit", inst.field).v, w.v)
    (tmp_path / "bad").write_text("hello\n")
    with pytest.raises(ValueError):
        read_instance(tmp_path / "bad", tower)


def test_instance_shape_check(F):
    with pytest.raises(ValueError):
        R1csInstance(F, np.zeros((2, 2)), np.zeros((2, 3)), np.zeros((2, 2)))


def test_subgroup_for(F):
    assert len(subgroup_for(F, 27)) == 3
    with pytest.raises(ValueError):
        subgroup_for(F, 26)


def test_algebraization_identities(sat):
    inst, w = sat
    F = inst.field
    H = subgroup_for(F, 27)
    st = algebraize(inst, w.v, H)
    cube = Grid([H] * 3).points()
    assert np.array_equal(st.h.eval_points(cube), w.v)
    assert st.h(1, 1, 1) == 1
    rng = np.random.default_rng(0)
    P = rng.integers(0, F.size, (20, 3))
    lhs = F.mul(st.f["A"].eval_points(P), st.f["B"].eval_points(P)) ^ st.f["C"].eval_points(P)
    rhs = np.zeros(len(P), dtype=np.int64)
    for i, g in enumerate(st.g_parts):
        rhs ^= F.mul(vanishing_poly(F, H)(P[:, i]), g.eval_points(P))
    assert np.array_equal(lhs, rhs)
    degs = tri_degrees(2)
    polys = [st.f["A"], st.f["B"], st.f["C"], *st.h_parts, *st.g_parts]
    assert all(p.degree <= d for p, d in zip(polys, degs))


def test_unsat_witness_is_refused_by_strict_prover(F):
    inst, w = generate(F, 27, seed=2, unsat=True)
    with pytest.raises(ValueError):
        algebraize(inst, w.v, subgroup_for(F, 27))


def test_linear_check_identity(sat):
    # sum over the cube of f_M * w_alpha equals sum of h * v_alpha_M: two routes to sum_i (Mv)_i alpha^i
    inst, w = sat
    F = inst.field
    H = subgroup_for(F, 27)
    st = algebraize(inst, w.v, H)
    alpha = 12345
    wh, vh = build_walpha_valpha(inst, H, alpha)
    powers = [F.pow(alpha, i) for i in range(27)]
    for k, M in inst.matrices().items():
        direct = F.dot(inst.apply(M, w.v), powers)
        assert subgroup_sum(st.f[k] * wh, H, 3) == direct
        assert subgroup_sum(st.h * vh[k], H, 3) == direct


def test_expected_counts_closed_form(params):
    e = expected_r1cs(params)
    # G* costs 27 reads per RM input point, g* 8 per RS input point
    assert e.proof == 160 * 27 + 132307 + 3 * 8 + 131107
    assert e.plain == (9 + 8 + 12 + 10 + 3 * 24 + 6 * 6) + 448 + 88
    assert (e.input, e.proof, e.plain) == (0, 267758, 683)


def test_honest_prove_and_verify(honest_run, sat, tower):
    inst, _ = sat
    assert honest_run.accepted, honest_run.verdict
    assert counts_of(honest_run) == (0, 267758, 683)
    rep = verify(inst, honest_run.transcript.to_bytes(), tower)
    assert rep.accepted
    assert counts_of(rep) == (0, 267758, 683)


def test_verify_rejects_other_instance(honest_run, tower):
    other, _ = generate(tower.field(16), 27, seed=99)
    assert not verify(other, honest_run.transcript.to_bytes(), tower).accepted


def test_verify_rejects_plain_value_flip(honest_run, sat, tower):
    inst, _ = sat
    tr = Transcript.from_bytes(honest_run.transcript.to_bytes(), tower)
    plain = [e for e in tr.entries if e.tag == "P"]
    for idx in (0, len(plain) // 2, len(plain) - 1):
        t2 = Transcript.from_bytes(honest_run.transcript.to_bytes(), tower)
        e = [x for x in t2.entries if x.tag == "P"][idx]
        e.payload = e.payload.copy()
        e.payload[0] ^= 1
        assert not verify(inst, t2.to_bytes(), tower).accepted


def test_verify_malformed(honest_run, sat, tower):
    inst, _ = sat
    data = honest_run.transcript.to_bytes()
    with pytest.raises(TranscriptError):
        verify(inst, data[: len(data) // 2], tower)
    with pytest.raises(TranscriptError):
        verify(inst, b"garbage", tower)


def test_unsat_rejections(params, F):
    inst, w = generate(F, 27, seed=3, unsat=True)
    for adv in (None, SUBST, SUBST_MIS):
        res = prove(params, seed_from_int(1), inst, w, adversary=adv, instrument=True)
        assert not res.accepted
        assert res.states[0].doomed is True


def test_undecided_initial_state_is_partial(params, F):
    inst, w = generate(F, 27, seed=4)
    v = w.v.copy()
    v[5] ^= 1
    res = prove(params, seed_from_int(0), inst, Witness(v), instrument=True)
    assert not res.accepted
    assert res.partial and res.states[0].doomed is None
