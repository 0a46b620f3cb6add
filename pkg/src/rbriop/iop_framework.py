"""Interactive transcripts, verifier coins, oracles, and the Poly-IOP compiler.

A protocol is an ordinary function of a :class:`Session`.  The function plays
the verifier; prover messages enter through ``sess.send_*`` with a thunk that
computes the honest (or scripted) message.  When a session replays a recorded
transcript the thunks are never called, so verifier code cannot peek at the
prover's private polynomials.

Poly-IOPs talk to a channel instead of the session.  ``IdealChannel`` hands
the verifier exact polynomial evaluations; ``CompiledChannel`` sends tables,
anchors every message with an out-of-domain point, and records all answered
queries as side conditions for the batched proximity test that follows.
"""
import fnmatch
import hashlib
import struct
from collections import Counter
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field, fields
from fractions import Fraction
from math import ceil, isqrt, log2, sqrt

import numpy as np

from .codes import CapabilityError, CodeSpec, SideCondition, decode_exact, pairwise_delta
from .field_tower import default_tower
from .poly_core import EvalTable, Grid, MultiPoly, UniPoly, lde, parse_domain
from .prox_combine import err

MAGIC = b"RBRT1\n"


# --------------------------------------------------------------------------
# parameters

@dataclass(frozen=True)
class ParamSet:
    """Field sizes are given in bits; q is the trivariate encoding field,
    q_enc the field of every low-rate test, q' the ambient field."""
    lam: int = 8
    tau_line: Fraction = Fraction(1, 21)
    q_bits: int = 4
    q_enc_bits: int = 8
    qp_bits: int = 16
    h_size: int = 3
    rm_eps: Fraction = Fraction(1, 2)
    rm_planes: int = 0      # 0: use the formula
    rm_points: int = 0
    trm_lines: int = 10
    d_base: int = 4
    name: str = "custom"

    def __post_init__(self):
        for b in (self.q_bits, self.q_enc_bits):
            if self.qp_bits % b:
                raise ValueError(f"GF(2^{b}) is not a subfield of GF(2^{self.qp_bits})")
        if not 0 < self.tau_line < Fraction(1, 20):
            raise ValueError("tau_line must lie in (0, 1/20)")
        # q' >= 2^lambda * poly(q), with poly(q) = q_enc
        if self.qp_bits < self.lam + self.q_enc_bits:
            raise ValueError(f"q' = 2^{self.qp_bits} is below 2^lambda * q_enc")
        if ((1 << self.q_bits) - 1) % self.h_size:
            raise ValueError("|H| must divide q - 1")

    @property
    def q(self):
        return 1 << self.q_bits

    @property
    def q_enc(self):
        return 1 << self.q_enc_bits

    @property
    def q_prime(self):
        return 1 << self.qp_bits

    # low-rate schedule ------------------------------------------------------

    @staticmethod
    def level(d):
        """k with d = 2^(2^k)."""
        if d < 2 or d & (d - 1):
            raise ValueError(f"{d} is not a power of two")
        e = d.bit_length() - 1
        if e & (e - 1):
            raise ValueError(f"{d} is not of the form 2^(2^k)")
        return e.bit_length() - 1

    def eps_k(self, k):
        return (2 ** (2 ** k + 1) / self.q_enc) ** (float(self.tau_line) / 2)

    def T_formula(self, k):
        # log2(1/eps_k) is rational, so keep it exact: the float route is off by one at k=1
        bits = Fraction(self.tau_line) / 2 * (self.q_enc_bits - 2 ** k - 1)
        if bits <= 0:
            raise ValueError(f"eps_{k} >= 1: no point-check count reaches 2^-{self.lam}")
        return ceil(5 * self.lam / bits)

    def T_rs(self, d):
        """Point checks in RS-Poly, clamped so the side subcube fits the degree."""
        return max(1, min(self.T_formula(self.level(d)), isqrt(d) - 1))

    def T_irm(self, d):
        return max(1, min(self.T_formula(self.level(d)), 2 * d - 3))

    def eps_prime(self, k):
        """Agreement handed to the batched test of level k."""
        return 0.9 * self.eps_k(k - 1) - (self.T_formula(k) + 1) / self.q_enc

    # constant-rate RM ---------------------------------------------------------

    @property
    def rm_T(self):
        if self.rm_planes:
            return self.rm_planes
        e = float(self.rm_eps)
        return ceil(5 * self.lam / (2 * log2(e) + self.q_bits))

    @property
    def rm_t(self):
        if self.rm_points:
            return self.rm_points
        return ceil(2 * self.q_bits / log2(1 / float(self.rm_eps)))

    def eps_test_rm(self, deg):
        return 23 * (deg / self.q_enc) ** (float(self.tau_line) / 2)

    def eps_comp(self, deg):
        return 0.9 * self.eps_test_rm(deg)

    # R1CS ---------------------------------------------------------------------

    @property
    def d_r1cs(self):
        return self.h_size - 1

    @property
    def eps0(self):
        return 2 * sqrt(6 * self.d_r1cs / self.q)

    @property
    def eps0_prime(self):
        return 2 * sqrt(6 * self.d_r1cs / self.q_enc)

    @property
    def eps_test(self):
        return 23 * (6 * self.d_r1cs / self.q) ** (float(self.tau_line) / 2)

    @property
    def eps_test_prime(self):
        return (12 * self.d_r1cs / self.q_enc) ** (float(self.tau_line) / 2)

    def err(self, d):
        return err(d, self.q_enc, self.q_prime)

    def header(self):
        out = {}
        for f in fields(self):
            out[f.name] = str(getattr(self, f.name))
        return out

    @classmethod
    def from_header(cls, hdr):
        kw = {}
        for f in fields(cls):
            if f.name not in hdr:
                continue
            raw = hdr[f.name]
            if f.name == "name":
                kw[f.name] = raw
            elif f.name in ("tau_line", "rm_eps"):
                kw[f.name] = Fraction(raw)
            else:
                kw[f.name] = int(raw)
        return cls(**kw)


PRESETS = {
    "desk27": ParamSet(name="desk27"),
    "quick": ParamSet(rm_planes=4, rm_points=4, trm_lines=2, name="quick"),
}


def preset(name):
    try:
        return PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; known: {', '.join(sorted(PRESETS))}") from None


def describe(params):
    """Derived quantities as (name, value) rows."""
    rows = [("lambda", params.lam), ("tau_line", params.tau_line),
            ("q", params.q), ("q_enc", params.q_enc), ("q'", params.q_prime)]
    for d in (4, 16):
        k = params.level(d)
        rows += [(f"eps_{k}", params.eps_k(k)), (f"T_{k} formula", params.T_formula(k)),
                 (f"T_{k} rs (d={d})", params.T_rs(d)), (f"T_{k} irm (d={d})", params.T_irm(d)),
                 (f"err(d={d})", float(params.err(d)))]
    deg = 6 * params.d_r1cs
    rows += [("rm T", params.rm_T), ("rm t", params.rm_t), ("rm eps", params.rm_eps),
             ("eps_test (rm)", params.eps_test_rm(deg)), ("eps_comp", params.eps_comp(deg)),
             ("eps_0", params.eps0), ("eps'_0", params.eps0_prime),
             ("eps_test (r1cs)", params.eps_test), ("eps'_test (r1cs)", params.eps_test_prime)]
    return rows


# --------------------------------------------------------------------------
# compile requirements

@dataclass
class PolyIopSpec:
    """Per-round code families with their encoding domains and query budgets."""
    name: str
    rounds: list          # list of rounds; each a list of (label, CodeSpec, queries)


@dataclass
class RequirementRow:
    label: str
    eps: float
    delta: Fraction
    delta_hat: Fraction
    k: int
    eps_ok: bool
    eps_margin: float          # eps - 2 sqrt(delta)
    ratio_ok: bool
    ratio: float               # delta_hat / eps
    ratio_bound: float         # 2^(-lambda + 5 log k)
    proof_ratio: float         # 2 delta_hat / eps^2, the quantity the argument uses


def ambient_delta(code, q_prime):
    d = code.degree
    deg = sum(d) if isinstance(d, tuple) else d
    return Fraction(max(deg, 0), q_prime)


def check_compile_requirements(params, spec, eps):
    """One row per message; ``eps`` maps labels (or None for all) to agreement."""
    rows = []
    for rnd in spec.rounds:
        k = len(rnd)
        for label, code, _ in rnd:
            e = float(eps.get(label, eps.get(None)) if isinstance(eps, dict) else eps)
            delta = pairwise_delta(code)
            dhat = ambient_delta(code, params.q_prime)
            bound = 2.0 ** (-params.lam + 5 * log2(k))
            ratio = float(dhat) / e
            rows.append(RequirementRow(
                label, e, delta, dhat, k,
                e * e >= 4 * float(delta), e - 2 * sqrt(float(delta)),
                ratio <= bound, ratio, bound, 2 * float(dhat) / (e * e)))
    return rows


def format_requirements(rows):
    out = []
    for r in rows:
        out.append(f"{r.label}: eps={r.eps:.4f} delta={r.delta} margin={r.eps_margin:+.4f} "
                   f"{'pass' if r.eps_ok else 'FAIL'}; delta_hat/eps={r.ratio:.3e} "
                   f"bound={r.ratio_bound:.3e} {'pass' if r.ratio_ok else 'FAIL'}; "
                   f"2*delta_hat/eps^2={r.proof_ratio:.3e}")
    return out


# --------------------------------------------------------------------------
# verifier coins

class Coins:
    """SHA-256 in counter mode, keyed by a 32-byte seed and a draw label."""

    def __init__(self, seed):
        if len(seed) != 32:
            raise ValueError("seed must be 32 bytes")
        self.seed = bytes(seed)

    def _blocks(self, label):
        ctr = 0
        lab = label.encode()
        while True:
            yield hashlib.sha256(self.seed + struct.pack(">I", len(lab)) + lab + struct.pack(">Q", ctr)).digest()
            ctr += 1

    def uniform(self, label, n, bound):
        """n independent uniform integers in [0, bound), by rejection sampling."""
        if bound < 1:
            raise ValueError("empty range")
        width = max(1, (int(bound - 1).bit_length() + 7) // 8)
        top = 1 << (8 * width)
        limit = top - top % bound
        out = []
        buf = b""
        blocks = self._blocks(label)
        while len(out) < n:
            while len(buf) < width:
                buf += next(blocks)
            v = int.from_bytes(buf[:width], "big")
            buf = buf[width:]
            if v < limit:
                out.append(v % bound)
        return np.array(out, dtype=np.int64)


def seed_from_hex(s):
    b = bytes.fromhex(s)
    if len(b) != 32:
        raise ValueError("seed must be 64 hex digits")
    return b


def seed_from_int(i):
    return hashlib.sha256(b"rbriop-seed" + struct.pack(">Q", i)).digest()


# --------------------------------------------------------------------------
# transcripts

class TranscriptError(ValueError):
    """A transcript that cannot be parsed or does not fit the protocol."""


@dataclass
class Entry:
    tag: str
    name: str
    payload: object


def _pack_values(F, vals):
    width = (F.n + 7) // 8
    dt = {1: ">u1", 2: ">u2", 4: ">u4"}[width]
    return np.asarray(vals, dtype=np.int64).astype(dt).tobytes()


def _unpack_values(F, data):
    width = (F.n + 7) // 8
    if len(data) % width:
        raise TranscriptError("value payload has a ragged length")
    dt = {1: ">u1", 2: ">u2", 4: ">u4"}[width]
    return np.frombuffer(data, dtype=dt).astype(np.int64)


class Transcript:
    """Append-only record of one protocol run."""

    def __init__(self, header, field_):
        self.header = dict(header)
        self.F = field_
        self.entries = []

    def append(self, tag, name, payload):
        if tag not in "OPRQS":
            raise ValueError(f"bad entry tag {tag}")
        self.entries.append(Entry(tag, name, payload))

    def __len__(self):
        return len(self.entries)

    def _encode(self, e):
        F = self.F
        if e.tag == "O":
            table = e.payload
            return table.domain.descriptor(F).encode() + b"\n" + _pack_values(F, table.values)
        if e.tag in "PR":
            return _pack_values(F, e.payload)
        if e.tag == "Q":
            pts, vals = e.payload
            if pts is None:
                return b"*" + struct.pack(">I", len(vals)) + _pack_values(F, vals)
            pts = np.asarray(pts, dtype=np.int64).reshape(len(vals), -1)
            return (struct.pack(">II", len(vals), pts.shape[1]) + _pack_values(F, pts.ravel())
                    + _pack_values(F, vals))
        doomed, witness = e.payload
        flag = {False: 0, True: 1, None: 2}[doomed]
        return bytes([flag]) + str(witness).encode()

    def to_bytes(self):
        hdr = "\n".join(f"{k}={v}" for k, v in sorted(self.header.items())).encode()
        parts = [MAGIC, struct.pack(">I", len(hdr)), hdr]
        for e in self.entries:
            name = e.name.encode()
            body = self._encode(e)
            parts += [e.tag.encode(), struct.pack(">I", len(name)), name, struct.pack(">I", len(body)), body]
        return b"".join(parts)

    @classmethod
    def from_bytes(cls, data, tower=None):
        tower = tower or default_tower()
        if not data.startswith(MAGIC):
            raise TranscriptError("missing transcript magic")
        pos = len(MAGIC)

        def take(n):
            nonlocal pos
            if pos + n > len(data):
                raise TranscriptError("transcript is truncated")
            out = data[pos:pos + n]
            pos += n
            return out

        (hlen,) = struct.unpack(">I", take(4))
        try:
            header = dict(line.split("=", 1) for line in take(hlen).decode().split("\n") if line)
            F = tower.field(int(header["qp_bits"]))
        except (ValueError, KeyError, UnicodeDecodeError) as exc:
            raise TranscriptError(f"bad transcript header: {exc}") from None
        tr = cls(header, F)
        while pos < len(data):
            tag = take(1).decode("latin-1")
            if tag not in "OPRQS":
                raise TranscriptError(f"bad entry tag {tag!r}")
            (nlen,) = struct.unpack(">I", take(4))
            name = take(nlen).decode("utf-8", "replace")
            (blen,) = struct.unpack(">I", take(4))
            body = take(blen)
            try:
                payload = tr._decode(tag, body, tower)
            except (struct.error, IndexError, ValueError) as exc:
                if isinstance(exc, TranscriptError):
                    raise
                raise TranscriptError(f"bad {tag} entry {name}: {exc}") from None
            tr.entries.append(Entry(tag, name, payload))
        return tr

    def _decode(self, tag, body, tower):
        F = self.F
        if tag == "O":
            nl = body.find(b"\n")
            if nl < 0:
                raise TranscriptError("table entry without descriptor")
            try:
                _, domain = parse_domain(body[:nl].decode(), tower)
            except (ValueError, KeyError, UnicodeDecodeError) as exc:
                raise TranscriptError(f"bad table descriptor: {exc}") from None
            vals = _unpack_values(F, body[nl + 1:])
            if len(vals) != domain.size:
                raise TranscriptError("table length does not match its domain")
            return EvalTable(F, domain, vals)
        if tag in "PR":
            return _unpack_values(F, body)
        if tag == "Q":
            if body[:1] == b"*":
                (n,) = struct.unpack(">I", body[1:5])
                return None, _unpack_values(F, body[5:])
            n, m = struct.unpack(">II", body[:8])
            w = (F.n + 7) // 8
            pts = _unpack_values(F, body[8:8 + n * m * w]).reshape(n, m)
            return pts, _unpack_values(F, body[8 + n * m * w:])
        flag = body[0] if body else 2
        return {0: False, 1: True, 2: None}.get(flag), body[1:].decode("utf-8", "replace")

    def messages(self):
        """Prover entries (tables and plain values) in order."""
        return [e for e in self.entries if e.tag in "OP"]


# --------------------------------------------------------------------------
# oracles and query accounting

class Rejected(Exception):
    def __init__(self, reason, where=""):
        super().__init__(f"{where}: {reason}" if where else reason)
        self.reason = reason
        self.where = where


class Oracle:
    name = "?"

    def read(self, points, ctx):
        raise NotImplementedError


class TableOracle(Oracle):
    """Query access to a table; every point read is charged to ``category``."""

    def __init__(self, name, table, category="proof"):
        self.name = name
        self.table = table
        self.category = category

    @property
    def domain(self):
        return self.table.domain

    def read(self, points, ctx):
        P = np.asarray(points, dtype=np.int64).reshape(-1, self.table.domain.arity)
        ctx.charge(self.category, len(P))
        try:
            return self.table(P)
        except KeyError:
            raise Rejected(f"query outside the domain of {self.name}") from None

    def values(self):
        return self.table.values


class VirtualOracle(Oracle):
    """A function the verifier evaluates from other oracles, e.g. a quotient."""

    def __init__(self, name, fn, arity, domain=None):
        self.name = name
        self.fn = fn
        self.arity = arity
        self.domain = domain

    def read(self, points, ctx):
        P = np.asarray(points, dtype=np.int64).reshape(-1, self.arity)
        return ctx.memo(self, P, lambda: np.asarray(self.fn(P, ctx), dtype=np.int64))


class QueryContext:
    """One logical verifier read.  Leaf reads are charged per point with
    multiplicity; a virtual oracle evaluated twice on the same batch inside
    one context is computed (and charged) once.  ``charged=False`` gives the
    prover's free view of the same functions."""

    def __init__(self, sess, charged=True):
        self.sess = sess
        self.charged = charged
        self._memo = {}

    def charge(self, category, n):
        if self.charged:
            self.sess.charge(category, n)

    def memo(self, oracle, P, compute):
        key = (id(oracle), P.shape, P.tobytes())
        if key not in self._memo:
            self._memo[key] = compute()
        return self._memo[key]

    def get(self, oracle, points):
        return oracle.read(points, self)


def oracle_arity(oracle):
    if isinstance(oracle, TableOracle):
        return oracle.table.domain.arity
    return oracle.arity


# --------------------------------------------------------------------------
# adversaries

DEVIATION_KINDS = ("degree_inflation", "fill_corruption", "anchor_equivocation",
                   "witness_substitution", "sum_misreport")


@dataclass(frozen=True)
class Deviation:
    kind: str
    target: str = "*"        # glob over message paths
    params: tuple = ()

    def __post_init__(self):
        if self.kind not in DEVIATION_KINDS:
            raise ValueError(f"unknown deviation {self.kind}")

    def matches(self, path):
        return fnmatch.fnmatchcase(path, self.target)


@dataclass(frozen=True)
class AdversaryScript:
    """A declarative cheating strategy: which messages to alter and how."""
    name: str
    deviations: tuple = ()
    protocol: str = "*"

    def wants(self, kind, path):
        return any(d.kind == kind and d.matches(path) for d in self.deviations)

    def to_text(self):
        lines = [f"adversary {self.name} {self.protocol}"]
        for d in self.deviations:
            lines.append(" ".join([d.kind, d.target] + [str(p) for p in d.params]))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text):
        lines = [ln.split() for ln in text.strip().splitlines() if ln.strip()]
        if not lines or lines[0][0] != "adversary":
            raise ValueError("adversary script must start with an 'adversary' line")
        name, proto = lines[0][1], (lines[0][2] if len(lines[0]) > 2 else "*")
        devs = tuple(Deviation(ln[0], ln[1] if len(ln) > 1 else "*", tuple(ln[2:])) for ln in lines[1:])
        return cls(name, devs, proto)


HONEST = AdversaryScript("honest")


def _inflate(poly, F, tweak):
    """Add one monomial just above the declared degree, keeping the shape."""
    if isinstance(poly, UniPoly):
        return poly + UniPoly.monomial(F, max(poly.degree, 0) + 1, tweak)
    exps = [0] * poly.arity
    exps[0] = max(poly.degree, 0) + 1
    return poly + MultiPoly(F, poly.arity, {tuple(exps): tweak})


# --------------------------------------------------------------------------
# sessions

@dataclass
class StateRecord:
    label: str
    doomed: object          # True / False / None when the state was not computable
    witness: str


class Session:
    def __init__(self, params, seed, *, adversary=None, replay=None, instrument=False, tower=None):
        self.params = params
        self.tower = tower or default_tower()
        self.F = self.tower.field(params.qp_bits)
        self.seed = bytes(seed)
        self.coins = Coins(self.seed)
        hdr = params.header()
        hdr["seed"] = self.seed.hex()
        self.transcript = Transcript(hdr, self.F)
        self.adversary = adversary or HONEST
        self._replay = list(replay.messages()) if replay is not None else None
        self._rpos = 0
        self.instrument = instrument
        self.counts = Counter()
        self.counts_by_path = Counter()
        self.states = []
        self.partial = False
        self._path = []
        self._labels = Counter()
        self.enc_axis = self.tower.subfield_elements(params.q_enc_bits, params.qp_bits)
        self.q_axis = self.tower.subfield_elements(params.q_bits, params.qp_bits)
        self._in_enc = np.zeros(self.F.size, dtype=bool)
        self._in_enc[self.enc_axis] = True
        self._fresh_used = set()
        self.msg_path = ""

    @property
    def replaying(self):
        return self._replay is not None

    # naming ---------------------------------------------------------------

    @contextmanager
    def scope(self, name):
        self._path.append(name)
        try:
            yield
        finally:
            self._path.pop()

    @property
    def path(self):
        return "/".join(self._path)

    def _name(self, purpose):
        base = f"{self.path}/{purpose}" if self._path else purpose
        i = self._labels[base]
        self._labels[base] += 1
        return f"{base}#{i}" if i else base

    # verifier randomness ---------------------------------------------------

    def draw_ints(self, purpose, n, bound):
        label = self._name(purpose)
        vals = self.coins.uniform(label, n, bound)
        self.transcript.append("R", label, vals)
        return vals

    def draw(self, purpose, n):
        """n uniform ambient-field elements."""
        return self.draw_ints(purpose, n, self.F.size)

    def draw_points(self, purpose, n, m):
        return self.draw(purpose, n * m).reshape(n, m)

    def draw_from(self, purpose, elems, n):
        elems = np.asarray(elems, dtype=np.int64)
        return elems[self.draw_ints(purpose, n, len(elems))]

    def draw_distinct(self, purpose, elems, n):
        """n distinct elements of a pool, uniform without replacement."""
        pool = [int(e) for e in elems]
        if n > len(pool):
            raise ValueError("pool too small")
        idx = self.draw_ints(purpose, n, len(pool))
        out = []
        # sequential rejection keeps the draw a pure function of the label
        k = 0
        for i in idx.tolist():
            while pool[i] in out:
                k += 1
                i = int(self.draw_ints(f"{purpose}+{k}", 1, len(pool))[0])
            out.append(pool[i])
        return np.array(out, dtype=np.int64)

    def draw_fresh(self, purpose, n):
        """n ambient elements outside the encoding field, distinct from every
        earlier fresh draw of the session."""
        out = []
        vals = self.draw(purpose, n).tolist()
        k = 0
        for v in vals:
            while v in self._fresh_used or self._in_enc[v]:
                k += 1
                v = int(self.draw(f"{purpose}+{k}", 1)[0])
            self._fresh_used.add(v)
            out.append(v)
        return np.array(out, dtype=np.int64)

    def draw_fresh_points(self, purpose, n, m):
        return self.draw_fresh(purpose, n * m).reshape(n, m)

    # prover messages ---------------------------------------------------------

    def adapt(self, path, kind, obj, **info):
        """Apply the adversary script to a message before it is sent."""
        adv = self.adversary
        F = self.F
        if kind == "poly" and adv.wants("degree_inflation", path):
            tweak = 1 + int(self.coins.uniform("adv/" + path, 1, F.size - 1)[0])
            return _inflate(obj, F, tweak)
        if kind == "fill" and adv.wants("fill_corruption", path) and len(obj):
            noise = self.coins.uniform("adv/" + path, len(obj), F.size)
            return np.asarray(obj, dtype=np.int64) ^ np.where(noise == 0, 1, noise)
        if kind == "anchor" and adv.wants("anchor_equivocation", path):
            noise = self.coins.uniform("adv/" + path, len(obj), F.size - 1) + 1
            return np.asarray(obj, dtype=np.int64) ^ noise
        return obj

    def _next_recorded(self, tag, name):
        if self._rpos >= len(self._replay):
            raise TranscriptError(f"transcript ends before {name}")
        e = self._replay[self._rpos]
        self._rpos += 1
        if e.tag != tag or e.name != name:
            raise TranscriptError(f"expected {tag}:{name}, found {e.tag}:{e.name}")
        return e.payload

    def send_table(self, name, domain, thunk, category="proof", kind="table"):
        """Receive a prover table over a domain fixed by the verifier."""
        full = self._name(name)
        self.msg_path = full
        if self.replaying:
            table = self._next_recorded("O", full)
            if table.domain.descriptor(self.F) != domain.descriptor(self.F):
                raise TranscriptError(f"{full} was sent over the wrong domain")
        else:
            vals = thunk()
            vals = self.adapt(full, kind, vals)
            vals = np.asarray(getattr(vals, "values", vals))
            self._validate(full, vals, domain.size)
            table = EvalTable(self.F, domain, vals.astype(np.int64))
        self.transcript.append("O", full, table)
        return TableOracle(full, table, category)

    def send_poly(self, name, code, thunk, category="proof"):
        """Receive the table of a polynomial message; returns (oracle, poly).

        The adversary may alter the polynomial before it is tabulated, so the
        returned poly is the one the prover actually committed to.
        """
        holder = {}

        def produce():
            poly = self.adapt(self.msg_path, "poly", thunk())
            holder["poly"] = poly
            return tabulate(poly, code.domain)

        oracle = self.send_table(name, code.domain, produce, category=category)
        return oracle, holder.get("poly")

    def send_values(self, name, n, thunk, kind="values"):
        """Receive n plain field elements; each one read counts as a proof query."""
        full = self._name(name)
        self.msg_path = full
        if self.replaying:
            vals = self._next_recorded("P", full)
            if len(vals) != n:
                raise TranscriptError(f"{full} has {len(vals)} values, expected {n}")
        else:
            vals = self.adapt(full, kind, np.asarray(thunk(), dtype=np.int64).reshape(-1))
            vals = np.asarray(vals)
            self._validate(full, vals, n)
            vals = vals.astype(np.int64)
        self.transcript.append("P", full, vals)
        self.charge("plain", n)
        return vals

    def _validate(self, name, vals, n):
        if vals.ndim != 1 or len(vals) != n:
            raise Rejected(f"malformed message: {len(vals) if vals.ndim == 1 else vals.shape} values, expected {n}", name)
        if not np.issubdtype(vals.dtype, np.integer) or (n and (vals.min() < 0 or vals.max() >= self.F.size)):
            raise Rejected("malformed message: values outside the field", name)

    # queries -----------------------------------------------------------------

    def charge(self, category, n):
        self.counts[category] += n
        self.counts_by_path[(self.path, category)] += n

    def query(self, oracle, points, log=True):
        ctx = QueryContext(self)
        vals = oracle.read(points, ctx)
        if log:
            self.transcript.append("Q", self._name("q:" + oracle.name), (np.asarray(points), vals))
        return vals

    def peek(self, oracle, points):
        """Prover-side evaluation: free of charge and not logged."""
        return oracle.read(points, QueryContext(self, charged=False))

    def peek_domain(self, oracle, domain):
        return self.peek(oracle, domain.points())

    def deviates(self, kind):
        return self.adversary.wants(kind, self.msg_path)

    def query_all(self, oracle, domain):
        """Read an oracle over a whole domain (base-case checks)."""
        ctx = QueryContext(self)
        vals = oracle.read(domain.points(), ctx)
        self.transcript.append("Q", self._name("q:" + oracle.name), (None, vals))
        return vals

    def check(self, cond, reason):
        if not cond:
            raise Rejected(reason, self.path)

    # round-by-round instrumentation -------------------------------------------

    def state(self, label, fn):
        if not self.instrument:
            return None
        try:
            doomed, witness = fn()
        except CapabilityError as exc:
            self.partial = True
            doomed, witness = None, f"capability: {exc}"
        rec = StateRecord(self._name("state:" + label), doomed, witness)
        self.states.append(rec)
        self.transcript.append("S", rec.label, (doomed, witness))
        return doomed

    def finish_replay(self):
        if self.replaying and self._rpos != len(self._replay):
            raise TranscriptError("transcript has trailing prover messages")


@dataclass
class Verdict:
    accepted: bool
    reason: str = ""
    where: str = ""


@dataclass
class RunResult:
    verdict: Verdict
    transcript: Transcript
    states: list
    counts: Counter
    partial: bool
    session: Session = field(repr=False, default=None)

    @property
    def accepted(self):
        return self.verdict.accepted

    def transitions(self):
        return doomed_transitions(self.states)


def run_interactive(protocol, params, seed, *, adversary=None, instrument=False, replay=None, tower=None):
    """Run a protocol function to a verdict.  Deterministic in (protocol, seed, adversary)."""
    sess = Session(params, seed, adversary=adversary, replay=replay, instrument=instrument, tower=tower)
    try:
        protocol(sess)
        sess.finish_replay()
        verdict = Verdict(True)
    except Rejected as r:
        verdict = Verdict(False, r.reason, r.where)
    if instrument:
        sess.states.append(StateRecord("terminal", not verdict.accepted, verdict.reason))
        sess.transcript.append("S", "terminal", (not verdict.accepted, verdict.reason))
    return RunResult(verdict, sess.transcript, sess.states, sess.counts, sess.partial, sess)


def doomed_transitions(states):
    """Indices i where state i-1 was doomed and state i is not."""
    out = []
    for i in range(1, len(states)):
        if states[i - 1].doomed is True and states[i].doomed is False:
            out.append(i)
    return out


# --------------------------------------------------------------------------
# Poly-IOP channels

@dataclass
class PolyMessage:
    name: str
    code: CodeSpec
    poly: object = None          # prover's polynomial; None when replaying
    oracle: TableOracle = None
    side_points: list = field(default_factory=list)
    side_values: list = field(default_factory=list)

    def add_side(self, pts, vals):
        P = np.asarray(pts, dtype=np.int64).reshape(-1, self.code.arity)
        for p, v in zip(P.tolist(), np.asarray(vals).tolist()):
            self.side_points.append(tuple(p))
            self.side_values.append(int(v))

    def side(self):
        return SideCondition(np.array(self.side_points, dtype=np.int64).reshape(-1, self.code.arity),
                             np.array(self.side_values, dtype=np.int64))


def evaluate(poly, pts, arity):
    P = np.asarray(pts, dtype=np.int64).reshape(-1, arity)
    if isinstance(poly, UniPoly):
        return np.asarray(poly(P[:, 0]), dtype=np.int64)
    return np.asarray(poly.eval_points(P), dtype=np.int64)


def tabulate(poly, domain):
    return EvalTable.from_poly(poly, domain).values


class IdealChannel:
    """The Poly-IOP model: the verifier may evaluate each sent polynomial anywhere."""
    compiled = False

    def __init__(self, sess):
        self.sess = sess
        self.messages = []

    def send_polys(self, specs):
        sess = self.sess
        out = []
        for name, code, thunk in specs:
            full = sess._name(name)
            sess.msg_path = full
            if sess.replaying:
                raise TranscriptError("ideal channels cannot replay")
            poly = sess.adapt(full, "poly", thunk())
            if not code.contains_poly(poly):
                raise Rejected(f"{name} exceeds its declared degree", sess.path)
            msg = PolyMessage(full, code, poly)
            self.messages.append(msg)
            out.append(msg)
        return out

    def send_poly(self, name, code, thunk):
        return self.send_polys([(name, code, thunk)])[0]

    def query_poly(self, msg, pts):
        pts = np.asarray(pts, dtype=np.int64).reshape(-1, msg.code.arity)
        self.sess.charge("proof", len(pts))
        vals = evaluate(msg.poly, pts, msg.code.arity)
        msg.add_side(pts, vals)
        return vals

    def query_input(self, oracle, pts):
        return self.sess.query(oracle, pts)

    def check(self, cond, reason):
        self.sess.check(cond, reason)


class CompiledChannel(IdealChannel):
    """Tables over the encoding domain, an anchor per message, and prover-answered queries."""
    compiled = True

    def send_polys(self, specs):
        sess = self.sess
        msgs = []
        for name, code, thunk in specs:
            oracle, poly = sess.send_poly(name, code, thunk)
            msgs.append(PolyMessage(oracle.name, code, poly, oracle))
        # anchors are drawn after every message of the round is on the table
        for msg in msgs:
            short = msg.name.rsplit("/", 1)[-1]
            z = sess.draw_fresh_points("anchor:" + short, 1, msg.code.arity)
            zeta = sess.send_values("zeta:" + short, 1,
                                    lambda msg=msg, z=z: evaluate(msg.poly, z, msg.code.arity), kind="anchor")
            msg.add_side(z, zeta)
        self.messages.extend(msgs)
        return msgs

    def query_poly(self, msg, pts):
        pts = np.asarray(pts, dtype=np.int64).reshape(-1, msg.code.arity)
        vals = self.sess.send_values("ans:" + msg.name.rsplit("/", 1)[-1], len(pts),
                                     lambda: evaluate(msg.poly, pts, msg.code.arity), kind="answer")
        msg.add_side(pts, vals)
        return vals


def compile_run(sess, poly_iop, batch, *args, **kwargs):
    """Simulate a Poly-IOP over a compiled channel, then run the batched test
    on every message with its accumulated side conditions."""
    ch = CompiledChannel(sess)
    with sess.scope("poly"):
        poly_iop(ch, *args, **kwargs)
    with sess.scope("batch"):
        return batch(sess, ch.messages)


# --------------------------------------------------------------------------
# a reference Poly-IOP and an exhaustive batched test

def identity_poly_iop(ch, f_oracle, code, n_checks):
    """Prover sends the low-degree extension of f; verifier spot-checks n points."""
    sess = ch.sess
    F = sess.F
    belief = {}

    def honest():
        if "p" not in belief:
            belief["p"] = _belief_poly(F, code, sess.peek_domain(f_oracle, code.domain))
        return belief["p"]

    (msg,) = ch.send_polys([("Q", code, honest)])
    idx = sess.draw_ints("points", n_checks, code.domain.size)
    pts = code.domain.points()[idx]
    qv = ch.query_poly(msg, pts)
    fv = ch.query_input(f_oracle, pts)
    sess.state("spot-check", lambda: (bool(np.any(qv != fv)), "mismatch" if np.any(qv != fv) else ""))
    ch.check(np.array_equal(qv, fv), "spot check failed")
    return msg


def _belief_poly(F, code, values):
    """Honest-shaped prover belief: interpolate on the leading degree box."""
    p = decode_exact(values, code)
    if p is not None:
        return p
    grid = code.domain
    if code.kind == "RS":
        xs = grid.axes[0][: code.degree + 1]
        return UniPoly.interpolate(F, xs, np.asarray(values)[: code.degree + 1])
    box = code.degree if code.kind == "RM_individual" else (code.degree,) * grid.arity
    box = tuple(max(0, min(b, len(a) - 1)) for b, a in zip(box, grid.axes))
    vals = np.asarray(values).reshape(grid.shape)[tuple(slice(0, b + 1) for b in box)]
    sub = Grid([a[: b + 1] for a, b in zip(grid.axes, box)])
    p = lde(EvalTable(F, sub, vals.ravel()))
    if code.kind == "RM_total" and p.degree > code.degree:
        # drop monomials beyond the total degree
        p = MultiPoly(F, p.arity, {e: c for e, c in p.terms.items() if sum(e) <= code.degree})
    return p


def belief_poly(F, code, values):
    return _belief_poly(F, code, values)


def exhaustive_batch(sess, messages):
    """Read every table in full and check exact side-conditioned membership."""
    for msg in messages:
        vals = sess.query_all(msg.oracle, msg.code.domain)
        poly = decode_exact(vals, msg.code)
        sess.check(poly is not None, f"{msg.name} is not a codeword")
        side = msg.side()
        got = evaluate(poly, side.points, msg.code.arity)
        sess.check(np.array_equal(got, side.values), f"{msg.name} violates its side conditions")


def identity_iopp(sess, f_oracle, code, n_checks=2):
    return compile_run(sess, identity_poly_iop, exhaustive_batch, f_oracle, code, n_checks)
