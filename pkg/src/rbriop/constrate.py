"""Constant-rate proximity test for trivariate total-degree RM codes.

The verifier restricts f to random planes and asks for each restriction as
a bivariate polynomial tabled over F_qenc^2.  A random line per plane gives
the point checks.  Each plane message then carries side conditions along one
line.  An affine change of variables moves that line onto the x-axis, so
the side conditions fit a (t+1) x 2 subcube.  The quotients are batched,
restricted to random lines and sent on to the RS test.

Compile mode is "majority": the batched phase starts doomed when at least
half of the plane messages disagree with f.
"""
from dataclasses import dataclass

import numpy as np

from .codes import CodeSpec, SideCondition
from .iop_framework import CompiledChannel, TableOracle, VirtualOracle, belief_poly, run_interactive
from .lowrate import (QueryCount, complete_side, enc_grid, expected_rs, fill_rows, rs_iopp,
                      _membership_state)
from .poly_core import EvalTable, Grid, MultiPoly, lde, line_points, vanishing_poly
from .prox_combine import combine_tot, combine_uni, prox_sample
from .quotient import honest_decompose, quo_axis

COMPILE_MODE = "majority"


@dataclass(frozen=True)
class AffineMap2:
    """(x, y) -> offset + x * u + y * w over the ambient field."""
    offset: tuple
    u: tuple
    w: tuple

    def det(self, F):
        return F.mul(self.u[0], self.w[1]) ^ F.mul(self.u[1], self.w[0])

    def matrix(self):
        return [[self.u[0], self.w[0]], [self.u[1], self.w[1]]]

    def apply(self, F, P):
        P = np.asarray(P, dtype=np.int64).reshape(-1, 2)
        x, y = P[:, 0], P[:, 1]
        return np.stack([self.offset[k] ^ F.mul(x, self.u[k]) ^ F.mul(y, self.w[k]) for k in (0, 1)], axis=1)

    def invert(self, F, P):
        P = np.asarray(P, dtype=np.int64).reshape(-1, 2)
        det = self.det(F)
        if det == 0:
            raise ValueError("affine map is not invertible")
        a = P[:, 0] ^ self.offset[0]
        b = P[:, 1] ^ self.offset[1]
        x = F.div(F.mul(a, self.w[1]) ^ F.mul(b, self.w[0]), det)
        y = F.div(F.mul(b, self.u[0]) ^ F.mul(a, self.u[1]), det)
        return np.stack([x, y], axis=1)

    def compose(self, poly):
        """poly o map as a bivariate polynomial."""
        return poly.compose_affine(self.matrix(), self.offset)

    @classmethod
    def for_line(cls, F, point, direction, elems):
        """Map with the x-axis onto the line; w is the first vector of
        elems^2 in lexicographic order independent of the direction."""
        u = (int(direction[0]), int(direction[1]))
        for a in elems:
            for b in elems:
                if F.mul(u[0], int(b)) ^ F.mul(u[1], int(a)):
                    return cls((int(point[0]), int(point[1])), u, (int(a), int(b)))
        raise ValueError("direction is zero")


# --------------------------------------------------------------------------
# shapes

def trivariate_code(sess, deg):
    lab = f"gf{sess.params.q_bits}"
    return CodeSpec("RM_total", deg, Grid([sess.q_axis] * 3, [lab] * 3), sess.F)


def padded_degree(deg):
    """Smallest degree of the form 2^(2^k) at or above deg."""
    d = 4
    while d < deg:
        d = d * d
    return d


def _draw_planes(sess, n):
    """n planes of F_q^3 as (point, u, w) with u, w independent."""
    F = sess.F
    Q = sess.q_axis
    q = len(Q)
    pts = Q[sess.draw_ints("plane-point", 3 * n, q).reshape(n, 3)]
    out = []
    for i in range(n):
        k = 0
        while True:
            uv = Q[sess.draw_ints(f"plane-dirs{i}" + (f"+{k}" if k else ""), 6, q)]
            u, w = uv[:3], uv[3:]
            cross = [F.mul(int(u[1]), int(w[2])) ^ F.mul(int(u[2]), int(w[1])),
                     F.mul(int(u[2]), int(w[0])) ^ F.mul(int(u[0]), int(w[2])),
                     F.mul(int(u[0]), int(w[1])) ^ F.mul(int(u[1]), int(w[0]))]
            if any(cross):
                break
            k += 1
        out.append((tuple(int(v) for v in pts[i]), tuple(int(v) for v in u), tuple(int(v) for v in w)))
    return out


def plane_map(F, plane, S):
    """Points of F^3 at plane-local coordinates S (n x 2)."""
    p, u, w = plane
    S = np.asarray(S, dtype=np.int64).reshape(-1, 2)
    return np.stack([p[k] ^ F.mul(S[:, 0], u[k]) ^ F.mul(S[:, 1], w[k]) for k in range(3)], axis=1)


def plane_restriction(f_poly, plane, params_axis, deg):
    """Bivariate restriction of f to a plane, by interpolation on a grid."""
    F = f_poly.field
    ax = np.asarray(params_axis[: deg + 1], dtype=np.int64)
    g = Grid([ax, ax])
    vals = f_poly.eval_points(plane_map(F, plane, g.points()))
    p = lde(EvalTable(F, g, vals))
    return MultiPoly(F, 2, {e: c for e, c in p.terms.items() if sum(e) <= deg})


# --------------------------------------------------------------------------
# RM-Poly

@dataclass
class PlaneCheck:
    plane: tuple
    line: tuple            # (point, direction) in plane coordinates
    params: np.ndarray     # the t line parameters
    msg: object


def rm_poly(ch, f, deg):
    sess = ch.sess
    F = sess.F
    P = sess.params
    T, t = P.rm_T, P.rm_t
    code_f = trivariate_code(sess, deg)
    code_q = CodeSpec("RM_total", deg, enc_grid(sess, 2), F)
    planes = _draw_planes(sess, T)
    cache = {}

    def belief():
        if "f" not in cache:
            cache["f"] = belief_poly(F, code_f, sess.peek_domain(f, code_f.domain))
        return cache["f"]

    specs = [(f"Q{i}", code_q, lambda pl=pl: plane_restriction(belief(), pl, sess.enc_axis, deg))
             for i, pl in enumerate(planes)]
    msgs = ch.send_polys(specs)
    sess.state("planes", lambda: _majority_state(sess, f, planes, msgs))

    checks = []
    bad = 0
    for i, (pl, msg) in enumerate(zip(planes, msgs)):
        line, taus = _draw_plane_line(sess, i, msg, t)
        z = line_points(F, line, taus)
        qv = ch.query_poly(msg, z)
        fv = sess.query(f, plane_map(F, pl, z))
        bad += int(np.count_nonzero(qv != fv))
        checks.append(PlaneCheck(pl, line, taus, msg))
    sess.state("line-check", lambda: (bad > 0, f"{bad} mismatches"))
    ch.check(bad == 0, "plane line check failed")
    return checks


def _draw_plane_line(sess, i, msg, t):
    """A line of F_q^2 and t distinct parameters, redrawn until the anchor
    sits off the line and off the parameter set in line coordinates."""
    F = sess.F
    Q = sess.q_axis
    q = len(Q)
    anchor = np.asarray(msg.side_points[0], dtype=np.int64)
    k = 0
    while True:
        sfx = f"+{k}" if k else ""
        pt = Q[sess.draw_ints(f"line{i}-point{sfx}", 2, q)]
        di = int(sess.draw_ints(f"line{i}-dir{sfx}", 1, q * q - 1)[0]) + 1
        dr = (int(Q[di // q]), int(Q[di % q]))
        taus = sess.draw_distinct(f"line{i}-params{sfx}", Q, t)
        amap = AffineMap2.for_line(F, pt, dr, Q)
        a, b = (int(v) for v in amap.invert(F, anchor)[0])
        if b != 0 and a not in set(taus.tolist()):
            return ((int(pt[0]), int(pt[1])), dr), taus
        k += 1


def _majority_state(sess, f, planes, msgs):
    F = sess.F
    sub = Grid([sess.q_axis, sess.q_axis])
    S = sub.points()
    wrong = 0
    for pl, msg in zip(planes, msgs):
        qv = sess.peek(msg.oracle, S)
        fv = sess.peek(f, plane_map(F, pl, S))
        wrong += int(not np.array_equal(qv, fv))
    doomed = 2 * wrong >= len(planes)
    return doomed, f"{wrong}/{len(planes)} planes disagree with f"


# --------------------------------------------------------------------------
# tRMBatch

def trm_batch(sess, checks, deg):
    F = sess.F
    P = sess.params
    parts = []
    for i, chk in enumerate(checks):
        with sess.scope(f"plane{i}"):
            parts.append(_transport_quotient(sess, chk, deg))
    lines = []
    for i in range(len(checks)):
        lines.extend((i, ln) for ln in _draw_enc_lines(sess, f"lines{i}", P.trm_lines))
    r = int(sess.draw("combine-G", 1)[0])
    xis = [1]
    for _ in range(len(lines) - 1):
        xis.append(F.mul(xis[-1], r))
    target = padded_degree(deg)
    pad_xi, pad_xi0 = prox_sample(F, 1, lambda n: sess.draw("pad", n))

    def value(Pts, ctx):
        tt = Pts[:, 0]
        acc = np.zeros(len(tt), dtype=np.int64)
        for xi, (i, ln) in zip(xis, lines):
            acc ^= F.mul(parts[i](line_points(F, ln, tt), ctx), xi)
        if target == deg:
            return acc
        return combine_uni(F, [acc], [deg], target, pad_xi, pad_xi0, tt)

    rs_iopp(sess, VirtualOracle("trmb", value, 1), target)


def _draw_enc_lines(sess, purpose, n):
    E = sess.enc_axis
    q = len(E)
    base = sess.draw_ints(purpose + "-point", 2 * n, q).reshape(n, 2)
    dirs = sess.draw_ints(purpose + "-dir", n, q * q - 1) + 1
    return [((int(E[i]), int(E[j])), (int(E[dd // q]), int(E[dd % q])))
            for (i, j), dd in zip(base.tolist(), dirs.tolist())]


def _transport_quotient(sess, chk, deg):
    """Returns the verifier's function for F_i on points of F_qenc^2."""
    F = sess.F
    E = sess.enc_axis
    msg = chk.msg
    (pt, dr) = chk.line
    amap = AffineMap2.for_line(F, pt, dr, sess.q_axis)
    side = msg.side()
    moved = _MovedMessage(msg, amap, amap.invert(F, side.points), side.values)
    (A, B), h_tilde = complete_side(sess, moved)
    deg1 = deg - len(A)
    deg2 = deg - len(B)
    dec = {}

    def decomposition():
        if "g" not in dec:
            (g1, g2), _ = honest_decompose(moved.poly, [A, B])
            dec["g"] = (g1, g2)
        return dec["g"]

    g1o, _ = sess.send_poly("g1", CodeSpec("RM_total", deg1, enc_grid(sess, 2), F),
                            lambda: decomposition()[0])
    rows = fill_rows(E, B)
    fill_o = None
    if len(rows):
        fdom = Grid([E, rows])
        fill_o = sess.send_table("fill", fdom,
                                 lambda: EvalTable.from_poly(decomposition()[1], fdom).values,
                                 category="fill", kind="fill")
    xis, xi0 = prox_sample(F, 2, lambda n: sess.draw("combine", n))
    VA = vanishing_poly(F, A)

    def value(Pts, ctx):
        q = ctx.get(msg.oracle, amap.apply(F, Pts))
        g1 = ctx.get(g1o, Pts)
        num = q ^ F.mul(VA(Pts[:, 0]), g1) ^ h_tilde.eval_points(Pts)
        g2 = quo_axis(F, num, Pts, 1, B, lambda S: ctx.get(fill_o, S))
        return combine_tot(F, [g1, g2], [deg1, deg2], deg, xis, xi0, Pts, 2)

    return value


class _MovedMessage:
    """A plane message seen through an affine change of variables."""

    def __init__(self, msg, amap, points, values):
        self._msg = msg
        self._amap = amap
        self._points = points
        self._values = values
        self.code = msg.code
        self._poly = None

    @property
    def poly(self):
        if self._poly is None and self._msg.poly is not None:
            self._poly = self._amap.compose(self._msg.poly)
        return self._poly

    def side(self):
        return SideCondition(self._points, self._values)


# --------------------------------------------------------------------------
# entry points

def rm_iopp(sess, f, deg):
    code = trivariate_code(sess, deg)
    with sess.scope(f"rm{deg}"):
        sess.state("initial", lambda: _membership_state(sess, f, code))
        ch = CompiledChannel(sess)
        with sess.scope("poly"):
            checks = rm_poly(ch, f, deg)
        with sess.scope("batch"):
            trm_batch(sess, checks, deg)


def rm_protocol(table, deg):
    def protocol(sess):
        rm_iopp(sess, TableOracle("f", table, "input"), deg)
    return protocol


def run_rm_iopp(params, seed, table, deg, adversary=None, instrument=False, replay=None):
    return run_interactive(rm_protocol(table, deg), params, seed, adversary=adversary,
                           instrument=instrument, replay=replay)


def expected_rm(params, deg):
    T, t, L = params.rm_T, params.rm_t, params.trm_lines
    inner = expected_rs(params, padded_degree(deg))
    per_point = 2 * T * L
    return QueryCount(T * t, per_point * inner.input + inner.proof,
                      T + T * t + T * (t + 1) + inner.plain)
