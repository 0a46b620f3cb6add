"""Empirical low-degree-testing lab: line and plane agreement profiles,
spectra of inclusion graphs, sampling checks and adversary statistics.

Reports are line-oriented: one record per measurement.
"""
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from math import sqrt

import numpy as np

from .codes import CapabilityError, CodeSpec
from .field_tower import default_tower
from .poly_core import Grid, enumerate_lines, enumerate_planes, line_points, plane_points

GRAPH_CAP = 10_000
CODEBOOK_CAP = 1 << 16


# --------------------------------------------------------------------------
# records

@dataclass
class Record:
    name: str
    params: dict
    value: object
    bound: object
    passed: bool

    def line(self):
        ps = " ".join(f"{k}={v}" for k, v in self.params.items())
        verdict = "PASS" if self.passed else "FAIL"
        return f"{verdict} {self.name} [{ps}] value={_fmt(self.value)} bound={_fmt(self.bound)}"


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.6g}"
    if isinstance(v, Fraction):
        return f"{v} ({float(v):.4g})"
    return str(v)


def format_report(records):
    return "\n".join(r.line() for r in records)


# --------------------------------------------------------------------------
# codebooks: every codeword of a small code, for vectorized best agreement

def codebook(code, cap=CODEBOOK_CAP):
    """All codewords of a small code as rows (message-enumeration route)."""
    F = code.field
    E = code.eval_matrix(code.domain.points())
    dim = E.shape[1]
    if F.size ** dim > cap:
        raise CapabilityError(f"codebook of {F.size}^{dim} words exceeds cap {cap}")
    msgs = np.array(list(product(range(F.size), repeat=dim)), dtype=np.int64).reshape(-1, dim)
    out = np.zeros((len(msgs), E.shape[0]), dtype=np.int64)
    for j in range(dim):
        out ^= F.mul(msgs[:, j:j + 1], E[:, j][None, :])
    return out


def best_agreement(book, word):
    word = np.asarray(word, dtype=np.int64).ravel()
    return Fraction(int((book == word[None, :]).sum(axis=1).max()), len(word))


# --------------------------------------------------------------------------
# profiles

@dataclass
class Profile:
    """Best agreement of the restriction to each enumerated (or sampled) flat."""
    agreements: list
    exhaustive: bool
    flats: int = 0
    hist: Counter = field(default_factory=Counter)

    def __post_init__(self):
        self.hist = Counter(self.agreements)
        self.flats = len(self.agreements)

    def tail(self, threshold):
        """(count, fraction) of flats with agreement at least threshold."""
        c = sum(n for a, n in self.hist.items() if a >= threshold)
        return c, Fraction(c, self.flats) if self.flats else Fraction(0)

    def lines(self):
        return [f"agreement={a} count={n}" for a, n in sorted(self.hist.items())]


def _table_grid(table):
    dom = table.domain
    if not isinstance(dom, Grid):
        raise ValueError("profiles need a product domain")
    axes = dom.axes
    if any(not np.array_equal(a, axes[0]) for a in axes):
        raise ValueError("profiles need the same axis in every coordinate")
    return np.asarray(axes[0], dtype=np.int64)


def line_agreement_profile(table, d, sample=None, seed=0, cap=200_000):
    """Best RS(d) agreement of f restricted to every line of F^m.

    ``sample`` draws that many lines (with replacement) instead of
    enumerating; without it more than ``cap`` lines is a CapabilityError.
    """
    F = table.field
    elems = _table_grid(table)
    m = table.domain.arity
    q = len(elems)
    n_lines = q ** (m - 1) * sum(q ** i for i in range(m))
    if sample is None and n_lines > cap:
        raise CapabilityError(f"{n_lines} lines exceed cap {cap}; pass a sample size")
    book = codebook(CodeSpec("RS", d, Grid([elems]), F))
    if sample is None:
        lines = enumerate_lines(F, elems, m)
    else:
        rng = np.random.default_rng(seed)
        lines = []
        while len(lines) < sample:
            p = tuple(int(v) for v in rng.choice(elems, m))
            dr = tuple(int(v) for v in rng.choice(elems, m))
            if any(dr):
                lines.append((p, dr))
    out = [best_agreement(book, table(line_points(F, ln, elems))) for ln in lines]
    return Profile(out, sample is None)


def plane_agreement_profile(table, d, cap=50_000):
    """Best total-degree-d agreement of f restricted to every plane of F^3."""
    F = table.field
    elems = _table_grid(table)
    planes = enumerate_planes(F, elems, table.domain.arity)
    if len(planes) > cap:
        raise CapabilityError(f"{len(planes)} planes exceed cap {cap}")
    book = codebook(CodeSpec("RM_total", d, Grid([elems, elems]), F))
    out = [best_agreement(book, table(plane_points(F, pl, elems, elems))) for pl in planes]
    return Profile(out, True)


# --------------------------------------------------------------------------
# inclusion graphs

def affine_flats(F, elems, m, dim):
    """Point sets (frozensets of tuples) of every dim-flat of elems^m."""
    elems = [int(e) for e in elems]
    if dim == 0:
        return [frozenset([p]) for p in product(elems, repeat=m)]
    if dim == 1:
        return [frozenset(map(tuple, line_points(F, ln, elems).tolist())) for ln in enumerate_lines(F, elems, m)]
    if dim == 2:
        return [frozenset(map(tuple, plane_points(F, pl, elems, elems).tolist()))
                for pl in enumerate_planes(F, elems, m)]
    raise ValueError("flats of dimension 0, 1, 2 only")


def inclusion_matrix(F, elems, m, a_dim, b_dim):
    """0/1 matrix with rows the a_dim-flats and columns the b_dim-flats, b inside a."""
    if b_dim > a_dim:
        raise ValueError("b must be the smaller flat")
    A = affine_flats(F, elems, m, a_dim)
    B = affine_flats(F, elems, m, b_dim)
    if len(A) + len(B) > GRAPH_CAP:
        raise CapabilityError(f"graph has {len(A) + len(B)} vertices, cap {GRAPH_CAP}")
    M = np.zeros((len(A), len(B)))
    for i, a in enumerate(A):
        for j, b in enumerate(B):
            if b <= a:
                M[i, j] = 1.0
    return M


def _spanning_tuples(q, a, k):
    """Number of a-tuples of vectors in F_q^k that span F_q^k."""
    out = 1
    for i in range(k):
        out *= q ** a - q ** i
    return out


@dataclass
class InclusionGraph:
    """Left vertices with a probability measure, right vertices uniform, and
    the averaging operator P (row a = uniform over the right vertices in a)."""
    P: np.ndarray
    left_weight: np.ndarray
    model: str

    def operator(self):
        n_right = self.P.shape[1]
        return np.sqrt(self.left_weight)[:, None] * self.P * np.sqrt(n_right)

    def singular_values(self):
        return np.linalg.svd(self.operator(), compute_uv=False)

    def sigma(self):
        return float(self.singular_values()[1])


def inclusion_graph(a_dim, b_dim, q_bits, m, model="param", tower=None):
    """The inclusion graph of a_dim-flats and b_dim-flats of GF(2^q_bits)^m.

    model "flats": every genuine a_dim-flat once, uniform weight.
    model "param": the flat a + sum t_i b_i with a and every b_i uniform, so
    degenerate (lower-dimensional) flats carry their probability; b_dim must
    be 0 here.
    """
    F = (tower or default_tower()).field(q_bits)
    elems = range(F.size)
    q = F.size
    if not 0 <= b_dim < a_dim < m:
        raise ValueError(f"need 0 <= small flat < large flat < ambient dimension, got {b_dim}, {a_dim}, {m}")
    if model == "flats":
        M = inclusion_matrix(F, elems, m, a_dim, b_dim)
        return InclusionGraph(M / M.sum(axis=1, keepdims=True), np.full(len(M), 1 / len(M)), model)
    if model != "param":
        raise ValueError(f"unknown model {model!r}")
    if b_dim != 0:
        raise ValueError("the parametrized model is defined against points")
    rows, weights = [], []
    for k in range(a_dim + 1):
        M = inclusion_matrix(F, elems, m, k, 0)
        # Pr[directions span one given k-space] * Pr[base point in the flat]
        w = Fraction(_spanning_tuples(q, a_dim, k), q ** (m * a_dim)) * Fraction(q ** k, q ** m)
        rows.append(M / M.sum(axis=1, keepdims=True))
        weights += [float(w)] * len(M)
    W = np.array(weights)
    if abs(W.sum() - 1) > 1e-12:
        raise AssertionError("parametrization weights do not sum to 1")
    return InclusionGraph(np.vstack(rows), W, model)


def inclusion_graph_sigma(a_dim, b_dim, q_bits, m, model=None, tower=None):
    """Second singular value of the normalized inclusion operator.

    Defaults to the parametrized model against points and to genuine flats
    otherwise.
    """
    model = model or ("param" if b_dim == 0 else "flats")
    return inclusion_graph(a_dim, b_dim, q_bits, m, model, tower).sigma()


def spectral_sampling_check(S, G, graph):
    """|E_{a in S, b ~ a} G(b) - E_b G(b)| with a drawn by the left measure.

    ``S`` is a boolean mask over the left vertices, ``G`` values in [0, 1]
    on the right vertices.  Returns (deviation, sigma, bound) with
    bound = sigma / sqrt(measure of S).
    """
    S = np.asarray(S, dtype=bool)
    G = np.asarray(G, dtype=float)
    w = graph.left_weight
    eps = float(w[S].sum())
    if eps <= 0:
        raise ValueError("S has measure zero")
    local = float((w[S] * (graph.P[S] @ G)).sum() / eps)
    dev = abs(local - float(G.mean()))
    sigma = graph.sigma()
    return dev, sigma, sigma / sqrt(eps)


# --------------------------------------------------------------------------
# adversary statistics

@dataclass
class AdversaryStats:
    name: str
    runs: int
    rejected: int
    transitions: Counter        # state label (numbering stripped) -> count
    reasons: Counter

    @property
    def rejection_rate(self):
        return self.rejected / self.runs if self.runs else 0.0

    def lines(self):
        out = [f"adversary={self.name} runs={self.runs} rejected={self.rejected} rate={self.rejection_rate:.4f}"]
        for lab, n in sorted(self.transitions.items()):
            out.append(f"  transition {lab} count={n} freq={n / self.runs:.4f}")
        for why, n in self.reasons.most_common():
            out.append(f"  reason {why!r} count={n}")
        return out


def run_adversary(name, run, seeds, instrument=False):
    """Run ``run(seed_bytes)`` -> RunResult for every seed and tally verdicts.

    With ``instrument`` the runs must record states; a transition is a
    doomed state followed by a non-doomed one.
    """
    rejected = 0
    trans = Counter()
    reasons = Counter()
    for s in seeds:
        seed = s if isinstance(s, bytes) else int(s).to_bytes(32, "big")
        res = run(seed)
        if not res.accepted:
            rejected += 1
            reasons[res.verdict.reason] += 1
        if instrument:
            for i in res.transitions():
                trans[res.states[i].label.split("#")[0]] += 1
    return AdversaryStats(name, len(seeds), rejected, trans, reasons)
