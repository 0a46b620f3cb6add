import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rbriop.field_tower import default_tower
from rbriop.iop_framework import AdversaryScript, Deviation, seed_from_int
from rbriop.poly_core import Grid, MultiPoly, UniPoly, vanishing_poly
from rbriop.sumcheck import (run_sumcheck, slice_sum_x, slice_sum_y, subgroup_sum, univar_identity,
                             univar_sumcheck_prover)

from conftest import random_tri

F16 = default_tower().field(16)
MISREPORT = AdversaryScript("misreport", (Deviation("sum_misreport"),))


@pytest.mark.parametrize("order", [3, 5, 15, 17])
def test_subgroup_sum_identity(F, rng, order):
    # sum over H of a polynomial of degree < |H| is |H| * f(0); |H| odd so that is f(0)
    H = F.multiplicative_subgroup(order)
    for _ in range(50):
        f = UniPoly(F, [int(v) for v in rng.integers(0, F.size, order)])
        direct = 0
        for h in H.tolist():
            direct ^= f(h)
        assert subgroup_sum(f, H) == direct == f(0)


def test_subgroup_sum_of_high_powers(F):
    # x^|H| is 1 on H, so it sums to |H| mod 2 = 1
    H = F.multiplicative_subgroup(3)
    assert subgroup_sum(UniPoly.monomial(F, 3), H) == 1
    assert subgroup_sum(UniPoly.monomial(F, 1), H) == 0


@settings(max_examples=40)
@given(st.lists(st.integers(0, 2 ** 16 - 1), min_size=1, max_size=12), st.integers(1, 2 ** 16 - 1))
def test_univariate_prover_identity(coeffs, gamma):
    f = UniPoly(F16, coeffs)
    H = F16.multiplicative_subgroup(3)
    alpha = subgroup_sum(f, H)
    Fh, Rh = univar_sumcheck_prover(f, H, alpha)
    assert Rh.degree <= len(H) - 2
    assert univar_identity(F16, H, alpha, gamma, f(gamma), Fh(gamma), Rh(gamma)) == 0
    assert Fh * vanishing_poly(F16, H) + Rh.shift(1) + UniPoly.constant(F16, alpha) == f


def test_univariate_prover_strict(F):
    H = F.multiplicative_subgroup(3)
    f = UniPoly(F, [1, 2, 3, 4])
    with pytest.raises(ValueError):
        univar_sumcheck_prover(f, H, subgroup_sum(f, H) ^ 1)


def test_slice_sums(F, rng):
    H = F.multiplicative_subgroup(3)
    f = random_tri(F, 4, rng)
    F1 = slice_sum_x(f, H)
    assert subgroup_sum(F1, H) == subgroup_sum(f, H, 3)
    z = int(rng.integers(0, F.size))
    F2 = slice_sum_y(f, H, z)
    assert subgroup_sum(F2, H) == F1(z)


def _case(F, rng, deg=6):
    H = F.multiplicative_subgroup(3)
    f = random_tri(F, deg, rng)
    return f, H, subgroup_sum(f, H, 3)


def test_honest_sumcheck_accepts(params, F, rng):
    f, H, target = _case(F, rng)
    for i in range(5):
        res = run_sumcheck(params, seed_from_int(i), f, H, target)
        assert res.accepted
        # one input point; F1, F2 queried at zeta and gamma, six quotient messages once each
        assert res.counts["input"] == 1
        assert res.counts["proof"] == 2 + 2 + 6


def test_wrong_sum_rejected(params, F, rng):
    f, H, target = _case(F, rng)
    for i in range(10):
        assert not run_sumcheck(params, seed_from_int(i), f, H, target ^ 5).accepted
        res = run_sumcheck(params, seed_from_int(i), f, H, target ^ 5, adversary=MISREPORT, instrument=True)
        assert not res.accepted
        assert res.states[0].doomed is True


def test_instrumented_states_track_doom(params, F, rng):
    f, H, target = _case(F, rng)
    res = run_sumcheck(params, seed_from_int(0), f, H, target, instrument=True)
    assert all(s.doomed is False for s in res.states)
    assert res.transitions() == []
