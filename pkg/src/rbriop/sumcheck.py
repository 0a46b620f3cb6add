"""Sumcheck over a multiplicative subgroup H, univariate and over H^3.

The univariate check rests on the subgroup identity: a polynomial R of
degree < |H| sums to R(0) * |H| over H.  So f sums to alpha over H exactly
when f = alpha/|H| + V_H * F + x * R for some F and some R of degree <= |H| - 2.
"""
from dataclasses import dataclass

import numpy as np

from .codes import CapabilityError, CodeSpec
from .iop_framework import IdealChannel, Session, TableOracle, run_interactive
from .poly_core import Grid, MultiPoly, UniPoly, vanishing_poly


def subgroup_sum(f, H, arity=None):
    """Sum of f over H^arity (arity defaults to the polynomial's own)."""
    H = np.asarray(H, dtype=np.int64)
    if isinstance(f, UniPoly):
        F = f.field
        return int(F.xor_sum(f(H))) if len(H) else 0
    F = f.field
    arity = arity or f.arity
    if f.is_zero():
        return 0
    return int(F.xor_sum(f.eval_grid([H] * arity)))


def field_count(F, n):
    """The integer n as a field element (n mod 2 in characteristic 2)."""
    return n & 1


def univar_sumcheck_prover(f, H, alpha, strict=True):
    """(F_hat, R_hat) with f = alpha/|H| + V_H F_hat + x R_hat.

    With ``strict`` a wrong claimed sum raises ValueError; otherwise the
    constant mismatch is dropped (what a cheating prover sends).
    """
    F = f.field
    size = field_count(F, len(H))
    if size == 0:
        raise ValueError("|H| is zero in the field")
    q, r = f.divmod(vanishing_poly(F, H))
    c0 = F.div(int(alpha), size)
    low = r.coeffs[0] if r.coeffs else 0
    if low != c0 and strict:
        raise ValueError("claimed sum does not match")
    R = UniPoly(F, r.coeffs[1:])
    return q, R


def univar_identity(F, H, alpha, gamma, f_val, Fh_val, Rh_val):
    """Right side minus left side of the univariate check at gamma."""
    VH = vanishing_poly(F, H)
    rhs = F.div(int(alpha), field_count(F, len(H))) ^ F.mul(VH(int(gamma)), int(Fh_val)) ^ F.mul(int(gamma), int(Rh_val))
    return rhs ^ int(f_val)


def enc_line(sess):
    return Grid([sess.enc_axis], [f"gf{sess.params.q_enc_bits}"])


def univar_specs(sess, tag, deg, H, poly_thunk, target_thunk):
    """Message specs (F_hat, R_hat) of one univariate sumcheck."""
    dom = enc_line(sess)
    cache = {}

    def pair():
        if "fr" not in cache:
            u = poly_thunk()
            cache["fr"] = univar_sumcheck_prover(u, H, target_thunk(), strict=False)
        return cache["fr"]

    return [(f"Fhat{tag}", CodeSpec("RS", deg - len(H), dom, sess.F), lambda: pair()[0]),
            (f"Rhat{tag}", CodeSpec("RS", len(H) - 2, dom, sess.F), lambda: pair()[1])]


def univar_sumcheck(ch, u_eval, u_poly, H, deg, target):
    """Standalone univariate sumcheck Poly-IOP; ``u_eval(gamma)`` reads the input."""
    sess = ch.sess
    with sess.scope("usum"):
        sess.state("initial", lambda: _initial_uni(u_poly, H, target))
        Fm, Rm = ch.send_polys(univar_specs(sess, "", deg, H, u_poly, lambda: target))
        gamma = int(sess.draw_fresh("gamma", 1)[0])
        fv = int(u_eval(gamma))
        fh = int(ch.query_poly(Fm, [gamma])[0])
        rh = int(ch.query_poly(Rm, [gamma])[0])
        bad = univar_identity(sess.F, H, target, gamma, fv, fh, rh) != 0
        sess.state("check", lambda: (bad, "identity fails" if bad else ""))
        ch.check(not bad, "univariate sumcheck identity fails")


def _initial_uni(u_poly, H, target):
    u = u_poly()
    if u is None:
        raise CapabilityError("input polynomial unavailable")
    s = subgroup_sum(u, H)
    return s != int(target), f"sum={s:x}"


def slice_sum_x(f, H):
    """F1(x) = sum over (y, z) in H^2 of f(x, y, z), by brute-force slices."""
    F = f.field
    out = UniPoly(F)
    for y in H:
        fy = f.partial_eval(1, int(y))
        for z in H:
            out = out + fy.partial_eval(2, int(z)).to_uni(0)
    return out


def slice_sum_y(f, H, zeta1):
    """F2(y) = sum over z in H of f(zeta1, y, z)."""
    F = f.field
    fx = f.partial_eval(0, int(zeta1))
    out = UniPoly(F)
    for z in H:
        out = out + fx.partial_eval(2, int(z)).to_uni(1)
    return out


@dataclass
class SumcheckOutcome:
    zeta: tuple
    point: tuple
    values: dict


def multivar_sumcheck(ch, f_eval, f_poly, H, deg, target):
    """Sumcheck of a trivariate f over H^3.

    ``f_eval(point)`` gives the verifier's value of f at one ambient point;
    ``f_poly()`` gives the prover's polynomial (never called when replaying).
    """
    sess = ch.sess
    F = sess.F
    H = [int(h) for h in H]
    dom = enc_line(sess)
    st = {}

    def fpoly():
        if "f" not in st:
            st["f"] = f_poly()
        return st["f"]

    with sess.scope("msum"):
        sess.state("initial", lambda: _initial_multi(fpoly, H, target))

        def f1():
            p = slice_sum_x(fpoly(), H)
            if sess.deviates("sum_misreport"):
                gap = subgroup_sum(p, H) ^ int(target)
                p = p + UniPoly.constant(F, F.div(gap, field_count(F, len(H))))
            st["F1"] = p
            return p

        (m1,) = ch.send_polys([("F1", CodeSpec("RS", deg, dom, F), f1)])
        zeta1 = int(sess.draw_fresh("zeta1", 1)[0])
        f1_z = int(ch.query_poly(m1, [zeta1])[0])
        sess.state("round1", lambda: _state1(sess, fpoly, m1, H, zeta1, target))

        def f2():
            p = slice_sum_y(fpoly(), H, zeta1)
            if sess.deviates("sum_misreport"):
                gap = subgroup_sum(p, H) ^ f1_z
                p = p + UniPoly.constant(F, F.div(gap, field_count(F, len(H))))
            st["F2"] = p
            return p

        (m2,) = ch.send_polys([("F2", CodeSpec("RS", deg, dom, F), f2)])
        zeta2 = int(sess.draw_fresh("zeta2", 1)[0])
        f2_z = int(ch.query_poly(m2, [zeta2])[0])
        sess.state("round2", lambda: _state2(sess, fpoly, m1, m2, H, zeta1, zeta2, target, f1_z))

        def u3():
            return fpoly().partial_eval(0, zeta1).partial_eval(1, zeta2).to_uni(2)

        specs = (univar_specs(sess, "1", deg, H, lambda: m1.poly, lambda: target)
                 + univar_specs(sess, "2", deg, H, lambda: m2.poly, lambda: f1_z)
                 + univar_specs(sess, "3", deg, H, u3, lambda: f2_z))
        msgs = ch.send_polys(specs)
        gammas = [int(g) for g in sess.draw_fresh("gamma", 3)]
        point = (zeta1, zeta2, gammas[2])
        lhs = [int(ch.query_poly(m1, [gammas[0]])[0]),
               int(ch.query_poly(m2, [gammas[1]])[0]),
               int(f_eval(point))]
        targets = [int(target), f1_z, f2_z]
        bad = []
        for k in range(3):
            fh = int(ch.query_poly(msgs[2 * k], [gammas[k]])[0])
            rh = int(ch.query_poly(msgs[2 * k + 1], [gammas[k]])[0])
            if univar_identity(F, H, targets[k], gammas[k], lhs[k], fh, rh):
                bad.append(k + 1)
        sess.state("final", lambda: (bool(bad), f"failed {bad}" if bad else ""))
        ch.check(not bad, f"univariate sumcheck {bad} fails")
    return SumcheckOutcome((zeta1, zeta2), point, {"F1(zeta1)": f1_z, "F2(zeta2)": f2_z})


def _need(poly):
    if poly is None:
        raise CapabilityError("prover polynomial unavailable (replay)")
    return poly


def _initial_multi(fpoly, H, target):
    f = _need(fpoly())
    s = subgroup_sum(f, H, 3)
    return s != int(target), f"sum={s:x}"


def _state1(sess, fpoly, m1, H, zeta1, target):
    f = _need(fpoly())
    F1 = _need(m1.poly)
    true = slice_sum_x(f, H)(zeta1)
    c1 = F1(zeta1) != true
    c2 = subgroup_sum(F1, H) != int(target)
    return c1 or c2, f"slice={c1} sum={c2}"


def _state2(sess, fpoly, m1, m2, H, zeta1, zeta2, target, f1_z):
    f = _need(fpoly())
    F1, F2 = _need(m1.poly), _need(m2.poly)
    c1 = F2(zeta2) != slice_sum_y(f, H, zeta1)(zeta2)
    c2 = subgroup_sum(F2, H) != f1_z
    c3 = subgroup_sum(F1, H) != int(target)
    return c1 or c2 or c3, f"slice={c1} sum2={c2} sum1={c3}"


def sumcheck_protocol(f, H, target, deg):
    """Ideal-model protocol over an input polynomial the verifier may evaluate."""

    def protocol(sess: Session):
        ch = IdealChannel(sess)

        def f_eval(pt):
            sess.charge("input", 1)
            return f(*pt)

        multivar_sumcheck(ch, f_eval, lambda: f, H, deg, target)

    return protocol


def run_sumcheck(params, seed, f, H, target, deg=None, adversary=None, instrument=False):
    deg = deg if deg is not None else max(f.degree, 0)
    return run_interactive(sumcheck_protocol(f, H, target, deg), params, seed,
                           adversary=adversary, instrument=instrument)
