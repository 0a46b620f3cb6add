"""R1CS satisfiability over H^3: instances, algebraization, the Poly-IOP,
its batched test and the end-to-end prover and verifier.

Variable i (0-based) sits at the cube point (H[i // |H|^2], H[(i // |H|) % |H|],
H[i % |H|]), so the constant variable sits at (1, 1, 1).  The witness LDE
is sent as h = 1 + (x-1) h1 + (y-1) h2 + (z-1) h3, which pins it to 1 there.
"""
from dataclasses import dataclass

import numpy as np

from .codes import CapabilityError, CodeSpec
from .constrate import padded_degree, rm_iopp, trivariate_code, expected_rm
from .iop_framework import (CompiledChannel, Transcript, TranscriptError, VirtualOracle, ParamSet,
                            run_interactive)
from .lowrate import QueryCount, complete_side, expected_rs, fill_rows, rs_iopp
from .poly_core import (EvalTable, Grid, MultiPoly, UniPoly, field_matmul, lde,
                        multivariate_vanishing_division, vanishing_poly)
from .prox_combine import combine_tot, combine_uni, prox_sample
from .quotient import honest_decompose, quo1, quo3
from .sumcheck import multivar_sumcheck


# --------------------------------------------------------------------------
# instances

@dataclass
class R1csInstance:
    field: object
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray

    def __post_init__(self):
        n = self.A.shape[0]
        for M in (self.A, self.B, self.C):
            if M.shape != (n, n):
                raise ValueError("matrices must be n x n")

    @property
    def n(self):
        return self.A.shape[0]

    def matrices(self):
        return {"A": self.A, "B": self.B, "C": self.C}

    def apply(self, M, v):
        return field_matmul(self.field, M, np.asarray(v, dtype=np.int64).reshape(-1, 1))[:, 0]

    def certified_unsat(self):
        """A row that only involves the constant variable and cannot hold."""
        F = self.field
        for r in range(self.n):
            rows = [self.A[r], self.B[r], self.C[r]]
            if all(not np.any(row[1:]) for row in rows):
                if F.mul(int(rows[0][0]), int(rows[1][0])) != int(rows[2][0]):
                    return r
        return None


@dataclass
class Witness:
    v: np.ndarray


def is_satisfied(inst, v):
    v = np.asarray(v, dtype=np.int64)
    if len(v) != inst.n:
        raise ValueError(f"witness has {len(v)} entries, instance has {inst.n}")
    if v[0] != 1:
        return False
    F = inst.field
    a, b, c = (inst.apply(M, v) for M in (inst.A, inst.B, inst.C))
    return bool(np.array_equal(F.mul(a, b), c))


def generate(F, n, seed=0, density=3, unsat=False):
    """Random satisfiable instance and witness.

    Row 0 is the constant constraint 1 * 1 = 1.  Every other row gets random
    A and B entries, and one C entry (in a column where v is nonzero) scaled
    to make the row hold.  ``unsat`` replaces row 0 of C by a constant other
    than 1, which no witness with v_1 = 1 can satisfy.
    """
    rng = np.random.default_rng(seed)
    v = rng.integers(1, F.size, n).astype(np.int64)
    v[0] = 1
    A = np.zeros((n, n), dtype=np.int64)
    B = np.zeros((n, n), dtype=np.int64)
    C = np.zeros((n, n), dtype=np.int64)
    A[0, 0] = B[0, 0] = C[0, 0] = 1
    for r in range(1, n):
        for M in (A, B):
            cols = rng.choice(n, size=min(density, n), replace=False)
            M[r, cols] = rng.integers(1, F.size, len(cols))
    inst = R1csInstance(F, A, B, C)
    prod = F.mul(inst.apply(A, v), inst.apply(B, v))
    for r in range(1, n):
        j = int(rng.integers(0, n))
        C[r, j] = F.div(int(prod[r]), int(v[j]))
    if unsat:
        C[0, 0] = int(rng.integers(2, F.size))
    return inst, Witness(v)


# --------------------------------------------------------------------------
# files

def write_instance(inst, path):
    F = inst.field
    lines = [f"r1cs n={inst.n} field=gf{F.n}"]
    for name, M in inst.matrices().items():
        lines.append(name)
        for r, c in zip(*np.nonzero(M)):
            lines.append(f"{r} {c} {F.to_hex(int(M[r, c]))}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_instance(path, tower):
    with open(path) as fh:
        rows = [ln.strip() for ln in fh if ln.strip()]
    if not rows or not rows[0].startswith("r1cs"):
        raise ValueError("not an R1CS instance file")
    head = dict(kv.split("=", 1) for kv in rows[0].split()[1:])
    n = int(head["n"])
    F = tower.field(int(head["field"].removeprefix("gf")))
    mats = {k: np.zeros((n, n), dtype=np.int64) for k in "ABC"}
    cur = None
    for ln in rows[1:]:
        if ln in mats:
            cur = mats[ln]
            continue
        if cur is None:
            raise ValueError("entry before any matrix section")
        r, c, h = ln.split()
        cur[int(r), int(c)] = F.from_hex(h)
    return R1csInstance(F, mats["A"], mats["B"], mats["C"])


def write_witness(w, F, path):
    with open(path, "w") as fh:
        fh.write("\n".join(F.to_hex(int(x)) for x in w.v) + "\n")


def read_witness(path, F):
    with open(path) as fh:
        return Witness(np.array([F.from_hex(ln.strip()) for ln in fh if ln.strip()], dtype=np.int64))


# --------------------------------------------------------------------------
# algebraization

def subgroup_for(F, n):
    m = round(n ** (1 / 3))
    if m ** 3 != n:
        raise ValueError(f"n = {n} is not a cube")
    return F.multiplicative_subgroup(m)


def cube_lde(F, H, vals):
    return lde(EvalTable(F, Grid([H, H, H]), np.asarray(vals, dtype=np.int64)))


@dataclass
class ProverState:
    f: dict            # "A", "B", "C" -> f_M
    h_parts: list      # h1, h2, h3
    g_parts: list      # g1, g2, g3
    h: MultiPoly


def algebraize(inst, v, H, strict=True, substitute=False):
    """The honest prover's nine polynomials.

    With ``strict`` an unsatisfying witness raises ValueError; otherwise the
    division remainders are dropped.  ``substitute`` replaces f_C by the LDE
    of Av * Bv, so the zero check passes whatever C says.
    """
    F = inst.field
    v = np.asarray(v, dtype=np.int64)
    f = {k: cube_lde(F, H, inst.apply(M, v)) for k, M in inst.matrices().items()}
    if substitute:
        f["C"] = cube_lde(F, H, F.mul(inst.apply(inst.A, v), inst.apply(inst.B, v)))
    h = cube_lde(F, H, v)
    one = MultiPoly.constant(F, 3, 1)
    R, h_parts = multivariate_vanishing_division(h + one, [[1], [1], [1]])
    if strict and not R.is_zero():
        raise ValueError("witness does not start with 1")
    R, g_parts = multivariate_vanishing_division(f["A"] * f["B"] + f["C"], [H, H, H])
    if strict and not R.is_zero():
        raise ValueError("witness does not satisfy the instance")
    h_sent = one
    for i, hp in enumerate(h_parts):
        h_sent = h_sent + hp * _lin(F, i)
    return ProverState(f, h_parts, g_parts, h_sent)


def _lin(F, i):
    """x_i - 1 as a trivariate polynomial."""
    return MultiPoly.variable(F, 3, i) + MultiPoly.constant(F, 3, 1)


def build_walpha_valpha(inst, H, alpha):
    """(w_alpha, {M: v_alpha_M}) with w_alpha the LDE of i -> alpha^i and
    v_alpha_M the LDE of M^T w, so sum_H f_M w = sum_H h v_M for honest h."""
    F = inst.field
    w = np.empty(inst.n, dtype=np.int64)
    cur = 1
    for i in range(inst.n):
        w[i] = cur
        cur = F.mul(cur, int(alpha))
    wh = cube_lde(F, H, w)
    vh = {k: cube_lde(F, H, field_matmul(F, M.T, w.reshape(-1, 1))[:, 0]) for k, M in inst.matrices().items()}
    return wh, vh


def summand_poly(F, f, h, wh, vh, rho):
    out = MultiPoly(F, 3)
    for r, k in zip(rho, "ABC"):
        out = out + (f[k] * wh + h * vh[k]).scale(int(r))
    return out


# --------------------------------------------------------------------------
# R1CS-Poly

TRI_NAMES = ("fA", "fB", "fC", "h1", "h2", "h3", "g1", "g2", "g3")


def tri_degrees(d):
    return (3 * d,) * 3 + (3 * d - 1,) * 3 + (6 * d - 3,) * 3


def r1cs_poly(ch, inst, witness):
    sess = ch.sess
    F = sess.F
    H = subgroup_for(F, inst.n)
    d = len(H) - 1
    top = 6 * d
    cache = {}

    def state():
        if "s" not in cache:
            if witness is None:
                raise CapabilityError("no witness")
            sub = sess.adversary.wants("witness_substitution", sess.msg_path)
            cache["s"] = algebraize(inst, witness.v, H, strict=False, substitute=sub)
        return cache["s"]

    getters = [lambda: state().f["A"], lambda: state().f["B"], lambda: state().f["C"]]
    getters += [lambda i=i: state().h_parts[i] for i in range(3)]
    getters += [lambda i=i: state().g_parts[i] for i in range(3)]
    specs = [(nm, trivariate_code(sess, dg), g) for nm, dg, g in zip(TRI_NAMES, tri_degrees(d), getters)]
    msgs = ch.send_polys(specs)
    m = dict(zip(TRI_NAMES, msgs))
    sess.state("messages", lambda: _messages_state(sess, inst, H, m))

    alpha = int(sess.draw("alpha", 1)[0])
    b = sess.draw_fresh_points("b", 1, 3)
    rho = [int(r) for r in sess.draw("rho", 3)]
    wh, vh = build_walpha_valpha(inst, H, alpha)

    fb = {k: int(ch.query_poly(m["f" + k], b)[0]) for k in "ABC"}
    gb = [int(ch.query_poly(m[f"g{i + 1}"], b)[0]) for i in range(3)]
    VH = vanishing_poly(F, H)
    rhs = 0
    for i in range(3):
        rhs ^= F.mul(VH(int(b[0, i])), gb[i])
    zero_ok = (F.mul(fb["A"], fb["B"]) ^ fb["C"]) == rhs
    sess.state("zero-check", lambda: _zero_state(sess, inst, H, m, zero_ok, wh, vh, rho))
    ch.check(zero_ok, "zero check failed")

    def f_eval(pt):
        P = np.array([pt], dtype=np.int64)
        fc = {k: int(ch.query_poly(m["f" + k], P)[0]) for k in "ABC"}
        hc = 1
        for i in range(3):
            hc ^= F.mul(int(ch.query_poly(m[f"h{i + 1}"], P)[0]), int(pt[i]) ^ 1)
        out = 0
        for r, k in zip(rho, "ABC"):
            term = F.mul(fc[k], int(wh(*pt))) ^ F.mul(hc, int(vh[k](*pt)))
            out ^= F.mul(term, r)
        return out

    def s_poly():
        if any(x.poly is None for x in msgs):
            raise CapabilityError("prover polynomials unavailable")
        f = {k: m["f" + k].poly for k in "ABC"}
        h = MultiPoly.constant(F, 3, 1)
        for i in range(3):
            h = h + m[f"h{i + 1}"].poly * _lin(F, i)
        return summand_poly(F, f, h, wh, vh, rho)

    multivar_sumcheck(ch, f_eval, s_poly, H, top, 0)
    return msgs


def _table_view(sess, msg, H):
    return sess.peek_domain(msg.oracle, Grid([H, H, H]))


def _messages_state(sess, inst, H, m):
    """Doomed when the tables on H^3 are not a satisfying assignment's encoding."""
    F = sess.F
    f = {k: _table_view(sess, m["f" + k], H) for k in "ABC"}
    cube = Grid([H, H, H]).points()
    h = np.ones(len(cube), dtype=np.int64)
    for i in range(3):
        h ^= F.mul(_table_view(sess, m[f"h{i + 1}"], H), cube[:, i] ^ 1)
    consistent = all(np.array_equal(f[k], inst.apply(M, h)) for k, M in inst.matrices().items())
    products = np.array_equal(F.mul(f["A"], f["B"]), f["C"])
    ok = consistent and products
    return (not ok), f"encodings consistent={consistent} products={products}"


def _zero_state(sess, inst, H, m, zero_ok, wh, vh, rho):
    if not zero_ok:
        return True, "zero identity fails at b"
    F = sess.F
    f = {k: _table_view(sess, m["f" + k], H) for k in "ABC"}
    cube = Grid([H, H, H]).points()
    h = np.ones(len(cube), dtype=np.int64)
    for i in range(3):
        h ^= F.mul(_table_view(sess, m[f"h{i + 1}"], H), cube[:, i] ^ 1)
    total = 0
    for r, k in zip(rho, "ABC"):
        s = F.xor_sum(F.mul(f[k], wh.eval_points(cube)) ^ F.mul(h, vh[k].eval_points(cube)))
        total ^= F.mul(int(s), r)
    return total != 0, f"sum={total:x}"


# --------------------------------------------------------------------------
# R1CSBatch

def r1cs_batch(sess, messages):
    F = sess.F
    tri = [msg for msg in messages if msg.code.arity == 3]
    uni = [msg for msg in messages if msg.code.arity == 1]
    top = max(msg.code.degree for msg in tri)
    parts = []
    with sess.scope("tri"):
        for msg in tri:
            with sess.scope(msg.name.rsplit("/", 1)[-1]):
                parts.append(_tri_quotient(sess, msg, top))
    r = int(sess.draw("combine-G", 1)[0])
    xis = [1]
    for _ in range(len(parts) - 1):
        xis.append(F.mul(xis[-1], r))

    def G_star(P, ctx):
        acc = np.zeros(len(P), dtype=np.int64)
        for xi, part in zip(xis, parts):
            acc ^= F.mul(part(P, ctx), xi)
        return acc

    with sess.scope("uni"):
        g_parts, g_degs = [], []
        for msg in uni:
            fn, dg = _uni_quotient(sess, msg)
            g_parts.append(fn)
            g_degs.append(dg)
        zs, z0 = prox_sample(F, len(uni), lambda n: sess.draw("combine-g", n))
        target = padded_degree(top)
        pad, pad0 = prox_sample(F, 1, lambda n: sess.draw("pad", n))

    def g_star(P, ctx):
        t = P[:, 0]
        vals = [fn(P, ctx) for fn in g_parts]
        g = combine_uni(F, vals, g_degs, top, zs, z0, t)
        if target == top:
            return g
        return combine_uni(F, [g], [top], target, pad, pad0, t)

    rm_iopp(sess, VirtualOracle("Gstar", G_star, 3), top)
    rs_iopp(sess, VirtualOracle("gstar", g_star, 1), target)


def _tri_quotient(sess, msg, top):
    F = sess.F
    Q = sess.q_axis
    (A, B, C), h_tilde = complete_side(sess, msg)
    deg = msg.code.degree
    degs = [deg - len(A), deg - len(B), deg - len(C)]
    dec = {}

    def decomposition():
        if "g" not in dec:
            dec["g"], _ = honest_decompose(msg.poly, [A, B, C])
        return dec["g"]

    o1, _ = sess.send_poly("G1", trivariate_code(sess, degs[0]), lambda: decomposition()[0])
    o2, _ = sess.send_poly("G2", trivariate_code(sess, degs[1]), lambda: decomposition()[1])
    rows = fill_rows(Q, C)
    fill_o = None
    if len(rows):
        fdom = Grid([Q, Q, rows])
        fill_o = sess.send_table("fill", fdom, lambda: EvalTable.from_poly(decomposition()[2], fdom).values,
                                 category="fill", kind="fill")
    xis, xi0 = prox_sample(F, 3, lambda n: sess.draw("combine", n))
    VA, VB = vanishing_poly(F, A), vanishing_poly(F, B)

    def value(P, ctx):
        q = ctx.get(msg.oracle, P)
        g1 = ctx.get(o1, P)
        g2 = ctx.get(o2, P)
        num = q ^ F.mul(VA(P[:, 0]), g1) ^ F.mul(VB(P[:, 1]), g2) ^ h_tilde.eval_points(P)
        g3 = quo3(F, num, P, C, lambda S: ctx.get(fill_o, S))
        return combine_tot(F, [g1, g2, g3], degs, top, xis, xi0, P, 3)

    return value


def _uni_quotient(sess, msg):
    F = sess.F
    E = sess.enc_axis
    side = msg.side()
    A = side.points[:, 0]
    h = UniPoly.interpolate(F, A, side.values)
    rows = fill_rows(E, A)
    fill_o = None
    if len(rows):
        fdom = Grid([rows])
        fill_o = sess.send_table("fill:" + msg.name.rsplit("/", 1)[-1], fdom,
                                 lambda: EvalTable.from_poly((msg.poly + h).divmod(vanishing_poly(F, A))[0], fdom).values,
                                 category="fill", kind="fill")

    def value(P, ctx):
        t = P[:, 0]
        return quo1(F, ctx.get(msg.oracle, P) ^ h(t), t, A, lambda S: ctx.get(fill_o, S))

    return value, msg.code.degree - len(A)


# --------------------------------------------------------------------------
# prover and verifier

def r1cs_protocol(inst, witness):
    def protocol(sess):
        ch = CompiledChannel(sess)
        with sess.scope("r1cs"):
            sess.state("initial", lambda: _initial_state(inst, witness))
            with sess.scope("poly"):
                r1cs_poly(ch, inst, witness)
            with sess.scope("batch"):
                r1cs_batch(sess, ch.messages)
    return protocol


def _initial_state(inst, witness):
    row = inst.certified_unsat()
    if row is not None:
        return True, f"row {row} cannot hold"
    if witness is not None and is_satisfied(inst, witness.v):
        return False, "witness satisfies"
    raise CapabilityError("satisfiability not decided")


def prove(params, seed, inst, witness, adversary=None, instrument=False):
    return run_interactive(r1cs_protocol(inst, witness), params, seed,
                           adversary=adversary, instrument=instrument)


def verify(inst, transcript_bytes, tower=None, instrument=False):
    """Re-run the verifier against recorded prover messages."""
    tr = Transcript.from_bytes(transcript_bytes, tower)
    params = ParamSet.from_header(tr.header)
    try:
        seed = bytes.fromhex(tr.header["seed"])
    except (KeyError, ValueError):
        raise TranscriptError("transcript header has no seed") from None
    return run_interactive(r1cs_protocol(inst, None), params, seed, replay=tr,
                           instrument=instrument, tower=tower)


def expected_r1cs(params):
    """Exact query counts of an honest run (there is no input oracle)."""
    d = params.d_r1cs
    top = 6 * d
    side_f = 3 ** 3 - 3        # anchor, b, c
    side_gh = 2 ** 3 - 2       # anchor and one of b, c
    plain = 9 + 8 + 12 + 10 + 3 * side_f + 6 * side_gh
    rm = expected_rm(params, top)
    rs = expected_rs(params, padded_degree(top))
    return QueryCount(0, rm.input * 27 + rm.proof + rs.input * 8 + rs.proof,
                      plain + rm.plain + rs.plain)

