"""Low-rate proximity tests for RS and individual-degree bivariate RM codes.

The two tests call each other with shrinking degree:

    rs_iopp(d)   -> split x into (x^s, x) with s = sqrt(d), test the bivariate
                    table against RM_ind(s, s) via irm_iopp(s)
    irm_iopp(D)  -> test total degree 2D plus two axis lines, then restrict the
                    batched quotient to random lines and test RS(2D) through
                    the degree-halving wrapper, which calls rs_iopp(D)

Every test works over the encoding field F_qenc (as an embedded axis of the
ambient field).  Levels with degree below ``params.d_base`` read the whole
table and interpolate.
"""
from dataclasses import dataclass

import numpy as np

from .codes import CodeSpec, decode_exact, isqrt_exact
from .iop_framework import (CompiledChannel, Session, TableOracle, VirtualOracle, belief_poly,
                            evaluate, run_interactive, tabulate)
from .poly_core import EvalTable, Grid, UniPoly, lde, line_points, split_variable, vanishing_poly
from .prox_combine import combine_ind, combine_tot, combine_uni, prox_sample
from .quotient import honest_decompose, quo1, quo_axis


# --------------------------------------------------------------------------
# schedule

@dataclass(frozen=True)
class RecursionLevel:
    k: int
    d: int
    eps: float
    T_rs: int
    T_irm: int
    eps_next: float       # agreement handed to the level below


def recursion_levels(params, d):
    """Levels visited by rs_iopp(d), top first."""
    out = []
    while d >= params.d_base:
        k = params.level(d)
        nxt = params.eps_prime(k) if k >= 1 else float("nan")
        out.append(RecursionLevel(k, d, params.eps_k(k), params.T_rs(d), params.T_irm(d), nxt))
        d = isqrt_exact(d)
    return out


# --------------------------------------------------------------------------
# domains and helpers

def enc_grid(sess, m):
    lab = f"gf{sess.params.q_enc_bits}"
    return Grid([sess.enc_axis] * m, [lab] * m)


def _prover_belief(sess, oracle, code):
    return belief_poly(sess.F, code, sess.peek_domain(oracle, code.domain))


def _membership_state(sess, oracle, code):
    vals = sess.peek_domain(oracle, code.domain)
    ok = decode_exact(vals, code) is not None
    return (not ok), "member" if ok else "not a codeword"


def _distinct_coords(points):
    """Coordinate sets of the smallest subcube containing the points."""
    P = np.asarray(points, dtype=np.int64)
    axes = []
    for j in range(P.shape[1]):
        seen = []
        for v in P[:, j].tolist():
            if v not in seen:
                seen.append(v)
        axes.append(np.array(seen, dtype=np.int64))
    return axes


def complete_side(sess, msg, name="h"):
    """Receive the prover's completion of a side condition to its subcube.

    Only the subcube points outside the side condition are sent; the rest
    are taken from the side condition itself.  Returns (axes, lde poly).
    """
    side = msg.side()
    axes = _distinct_coords(side.points)
    cube = Grid(axes)
    pts = cube.points()
    known = {tuple(p): v for p, v in zip(side.points.tolist(), side.values.tolist())}
    missing = [i for i, p in enumerate(pts.tolist()) if tuple(p) not in known]
    got = sess.send_values(name, len(missing), lambda: evaluate(msg.poly, pts[missing], cube.arity))
    vals = np.array([known.get(tuple(p), 0) for p in pts.tolist()], dtype=np.int64)
    vals[missing] = got
    return axes, lde(EvalTable(sess.F, cube, vals))


def fill_rows(axis, S):
    """Elements of S lying on the domain axis, in axis order."""
    inside = np.isin(axis, np.asarray(S, dtype=np.int64))
    return axis[inside]


# --------------------------------------------------------------------------
# RS

def rs_iopp(sess, f, d):
    """Proximity of ``f`` (an oracle over F_qenc) to RS(d)."""
    dom = enc_grid(sess, 1)
    code = CodeSpec("RS", d, dom, sess.F)
    with sess.scope(f"rs{d}"):
        sess.state("initial", lambda: _membership_state(sess, f, code))
        if d < sess.params.d_base:
            vals = sess.query_all(f, dom)
            sess.check(decode_exact(vals, code) is not None, f"base case: not of degree {d}")
            return
        s = isqrt_exact(d)
        T = sess.params.T_rs(d)
        ch = CompiledChannel(sess)
        with sess.scope("poly"):
            msg = rs_poly(ch, f, d, s, T)
        with sess.scope("batch"):
            rs_batch(sess, msg, s)


def rs_poly(ch, f, d, s, T):
    """Bivariate Q with Q(x^s, x) = f(x), checked on T random curve points."""
    sess = ch.sess
    F = sess.F
    code_f = CodeSpec("RS", d, enc_grid(sess, 1), F)
    code_q = CodeSpec("RM_individual", (s, s), enc_grid(sess, 2), F)
    (msg,) = ch.send_polys([("Q", code_q, lambda: split_variable(_prover_belief(sess, f, code_f), s))])
    alphas = sess.draw_distinct("alpha", sess.enc_axis, T)
    pts = np.stack([F.pow(alphas, s), alphas], axis=1)
    qv = ch.query_poly(msg, pts)
    fv = sess.query(f, alphas)
    bad = int(np.count_nonzero(qv != fv))
    sess.state("curve-check", lambda: (bad > 0, f"{bad} of {T} mismatch"))
    ch.check(bad == 0, "curve point check failed")
    return msg


def rs_batch(sess, msg, s):
    """Quotient out the side conditions of Q and recurse on RM_ind(s, s)."""
    F = sess.F
    E = sess.enc_axis
    (A, B), h_tilde = complete_side(sess, msg)
    deg1 = (s - len(A), s)
    deg2 = (s, s - len(B))
    dec = {}

    def decomposition():
        if "g" not in dec:
            (g1, g2), _ = honest_decompose(msg.poly, [A, B])
            dec["g"] = (g1, g2)
        return dec["g"]

    g1o, _ = sess.send_poly("g1", CodeSpec("RM_individual", deg1, enc_grid(sess, 2), F),
                            lambda: decomposition()[0])
    rows = fill_rows(E, B)
    fill_o = None
    if len(rows):
        fdom = Grid([E, rows])
        fill_o = sess.send_table("fill", fdom, lambda: tabulate(decomposition()[1], fdom),
                                 category="fill", kind="fill")
    xis, xi0 = prox_sample(F, 2, lambda n: sess.draw("combine", n))
    VA = vanishing_poly(F, A)

    def value(P, ctx):
        q = ctx.get(msg.oracle, P)
        g1 = ctx.get(g1o, P)
        num = q ^ F.mul(VA(P[:, 0]), g1) ^ h_tilde.eval_points(P)
        g2 = quo_axis(F, num, P, 1, B, lambda Q: ctx.get(fill_o, Q))
        return combine_ind(F, [g1, g2], [deg1, deg2], (s, s), xis, xi0, P)

    irm_iopp(sess, VirtualOracle("rsb", value, 2), s)


# --------------------------------------------------------------------------
# individual-degree RM

def irm_iopp(sess, f, D):
    """Proximity of ``f`` (an oracle over F_qenc^2) to RM_ind(D, D)."""
    dom = enc_grid(sess, 2)
    code = CodeSpec("RM_individual", (D, D), dom, sess.F)
    with sess.scope(f"irm{D}"):
        sess.state("initial", lambda: _membership_state(sess, f, code))
        if D < sess.params.d_base:
            vals = sess.query_all(f, dom)
            sess.check(decode_exact(vals, code) is not None, f"base case: not of degree ({D},{D})")
            return
        T = sess.params.T_irm(D)
        ch = CompiledChannel(sess)
        with sess.scope("poly"):
            msgs = irm_poly(ch, f, D, T)
        with sess.scope("batch"):
            irm_batch(sess, msgs, D, T)


def irm_poly(ch, f, D, T):
    sess = ch.sess
    F = sess.F
    E = sess.enc_axis
    code_f = CodeSpec("RM_individual", (D, D), enc_grid(sess, 2), F)
    code_q = CodeSpec("RM_total", 2 * D, enc_grid(sess, 2), F)
    code_line = CodeSpec("RS", D, enc_grid(sess, 1), F)
    (mq,) = ch.send_polys([("Q", code_q, lambda: _prover_belief(sess, f, code_f))])
    xs = sess.draw_distinct("x", E, T)
    ys = sess.draw_distinct("y", E, T)
    pts = np.stack([xs, ys], axis=1)
    qv = ch.query_poly(mq, pts)
    fv = sess.query(f, pts)
    bad = int(np.count_nonzero(qv != fv))
    sess.state("point-check", lambda: (bad > 0, f"{bad} of {T} mismatch"))
    ch.check(bad == 0, "point check failed")

    alpha, beta = (int(v) for v in sess.draw_fresh("alpha-beta", 2))
    m1, m2 = ch.send_polys([
        ("F1", code_line, lambda: mq.poly.partial_eval(1, beta).to_uni(0)),
        ("F2", code_line, lambda: mq.poly.partial_eval(0, alpha).to_uni(1)),
    ])
    z1, z2 = (int(v) for v in sess.draw_fresh("zeta", 2))
    a = ch.query_poly(m1, [z1])[0]
    b = ch.query_poly(mq, [(z1, beta)])[0]
    c = ch.query_poly(m2, [z2])[0]
    e = ch.query_poly(mq, [(alpha, z2)])[0]
    bad = (a != b) or (c != e)
    sess.state("line-check", lambda: (bool(bad), "axis line mismatch" if bad else ""))
    ch.check(not bad, "axis line check failed")
    return mq, m1, m2


def _draw_lines(sess, n):
    """n affine lines of F_qenc^2 as (point, direction) index pairs."""
    E = sess.enc_axis
    q = len(E)
    base = sess.draw_ints("line-point", 2 * n, q).reshape(n, 2)
    dirs = sess.draw_ints("line-dir", n, q * q - 1) + 1
    out = []
    for (i, j), dd in zip(base.tolist(), dirs.tolist()):
        out.append(((int(E[i]), int(E[j])), (int(E[dd // q]), int(E[dd % q]))))
    return out


def irm_batch(sess, msgs, D, T):
    F = sess.F
    E = sess.enc_axis
    mq, m1, m2 = msgs
    (X, Y), hq = complete_side(sess, mq)
    deg1 = 2 * D - len(X)
    deg2 = 2 * D - len(Y)
    dec = {}

    def decomposition():
        if "g" not in dec:
            (g1, g2), _ = honest_decompose(mq.poly, [X, Y])
            dec["g"] = (g1, g2)
        return dec["g"]

    g1o, _ = sess.send_poly("g1", CodeSpec("RM_total", deg1, enc_grid(sess, 2), F),
                            lambda: decomposition()[0])
    rows = fill_rows(E, Y)
    fill_o = None
    if len(rows):
        fdom = Grid([E, rows])
        fill_o = sess.send_table("fill", fdom, lambda: tabulate(decomposition()[1], fdom),
                                 category="fill", kind="fill")
    # the univariate side sets are the side points themselves
    s1, s2 = m1.side(), m2.side()
    A1, A2 = s1.points[:, 0], s2.points[:, 0]
    h1 = UniPoly.interpolate(F, A1, s1.values)
    h2 = UniPoly.interpolate(F, A2, s2.values)
    fills1 = _line_fill(sess, "fill1", m1, A1, h1)
    fills2 = _line_fill(sess, "fill2", m2, A2, h2)

    xis, xi0 = prox_sample(F, 2, lambda n: sess.draw("combine-G", n))
    lines = _draw_lines(sess, T)
    zs, z0 = prox_sample(F, T + 2, lambda n: sess.draw("combine-F", n))
    VX = vanishing_poly(F, X)
    target = 2 * D

    def G_at(P, ctx):
        q = ctx.get(mq.oracle, P)
        g1 = ctx.get(g1o, P)
        num = q ^ F.mul(VX(P[:, 0]), g1) ^ hq.eval_points(P)
        g2 = quo_axis(F, num, P, 1, Y, lambda Q: ctx.get(fill_o, Q))
        return combine_tot(F, [g1, g2], [deg1, deg2], target, xis, xi0, P, 2)

    def value(P, ctx):
        t = P[:, 0]
        parts = [G_at(line_points(F, ln, t), ctx) for ln in lines]
        f1 = quo1(F, ctx.get(m1.oracle, P) ^ h1(t), t, A1, lambda Q: ctx.get(fills1, Q))
        f2 = quo1(F, ctx.get(m2.oracle, P) ^ h2(t), t, A2, lambda Q: ctx.get(fills2, Q))
        degs = [target] * T + [D - len(A1), D - len(A2)]
        return combine_uni(F, parts + [f1, f2], degs, target, zs, z0, t)

    double_degree_rs_iopp(sess, VirtualOracle("irmb", value, 1), target)


def _line_fill(sess, name, msg, A, h):
    """Fill values for a univariate quotient; empty unless A meets F_qenc."""
    E = sess.enc_axis
    rows = fill_rows(E, A)
    if not len(rows):
        return None
    dom = Grid([rows])

    def vals():
        q = (msg.poly + h).divmod(vanishing_poly(sess.F, A))[0]
        return tabulate(q, dom)

    return sess.send_table(name, dom, vals, category="fill", kind="fill")


# --------------------------------------------------------------------------
# degree-halving wrapper

def double_degree_rs_iopp(sess, f, d2):
    """Proximity to RS(2s) from RS(s): f = f1 + x^s f2, test f1 + gamma f2."""
    F = sess.F
    s = d2 // 2
    if 2 * s != d2:
        raise ValueError("degree must be even")
    code_line = CodeSpec("RS", s, enc_grid(sess, 1), F)
    with sess.scope(f"rs2x{d2}"):
        sess.state("initial", lambda: _membership_state(sess, f, CodeSpec("RS", d2, enc_grid(sess, 1), F)))
        f0 = int(sess.query(f, [0])[0])

        def low():
            full = _prover_belief(sess, f, CodeSpec("RS", d2, enc_grid(sess, 1), F))
            return UniPoly(F, full.coeffs[: s + 1])

        f1o, _ = sess.send_poly("f1", code_line, low)
        gamma = int(sess.draw("gamma", 1)[0])
        xs_pow = s

        def value(P, ctx):
            x = P[:, 0]
            v1 = ctx.get(f1o, P)
            vf = ctx.get(f, P)
            zero = x == 0
            safe = np.where(zero, 1, x)
            f2 = np.where(zero, 0, F.div(vf ^ v1, F.pow(safe, xs_pow)))
            v1 = np.where(zero, f0, v1)
            return v1 ^ F.mul(f2, gamma)

        rs_iopp(sess, VirtualOracle("rs2x", value, 1), s)


# --------------------------------------------------------------------------
# entry points

def rs_protocol(table, d):
    def protocol(sess: Session):
        rs_iopp(sess, TableOracle("f", table, "input"), d)
    return protocol


def irm_protocol(table, D):
    def protocol(sess: Session):
        irm_iopp(sess, TableOracle("f", table, "input"), D)
    return protocol


def run_rs_iopp(params, seed, table, d, adversary=None, instrument=False, replay=None):
    return run_interactive(rs_protocol(table, d), params, seed, adversary=adversary,
                           instrument=instrument, replay=replay)


def run_irm_iopp(params, seed, table, D, adversary=None, instrument=False, replay=None):
    return run_interactive(irm_protocol(table, D), params, seed, adversary=adversary,
                           instrument=instrument, replay=replay)


# --------------------------------------------------------------------------
# exact query counts

@dataclass(frozen=True)
class QueryCount:
    """Input points read, proof-table reads, plain field elements received."""
    input: int
    proof: int
    plain: int

    def as_input_of(self, per_point):
        """Counts seen by a parent whose virtual input costs ``per_point`` proof reads."""
        return QueryCount(0, self.input * per_point + self.proof, self.plain)


def expected_rs(params, d, enc_size=None):
    q = enc_size or params.q_enc
    if d < params.d_base:
        return QueryCount(q, 0, 0)
    s = isqrt_exact(d)
    T = params.T_rs(d)
    sub = expected_irm(params, s, q).as_input_of(2)
    side = T + 1
    return QueryCount(T, sub.proof, 1 + T + side * side - side + sub.plain)


def expected_irm(params, D, enc_size=None):
    q = enc_size or params.q_enc
    if D < params.d_base:
        return QueryCount(q * q, 0, 0)
    T = params.T_irm(D)
    sub = expected_double(params, 2 * D, q).as_input_of(2 * T + 2)
    side = T + 3
    return QueryCount(T, sub.proof, T + 7 + side * side - side + sub.plain)


def expected_double(params, d2, enc_size=None):
    inner = expected_rs(params, d2 // 2, enc_size)
    return QueryCount(1 + inner.input, inner.input + inner.proof, inner.plain)
