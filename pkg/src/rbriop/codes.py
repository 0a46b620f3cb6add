"""Reed-Solomon and Reed-Muller codes, side conditions, and exhaustive agreement oracles."""
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from itertools import combinations, product
from math import comb, isqrt

import numpy as np

from .poly_core import (Grid, MultiPoly, UniPoly, field_matmul, interpolation_matrix,
                        power_matrix, solve_linear)

DEFAULT_CAP = 1 << 24


class CapabilityError(RuntimeError):
    """An exhaustive computation would exceed its enumeration cap."""


@dataclass(frozen=True, eq=False)
class CodeSpec:
    """kind is "RS", "RM_total" or "RM_individual"; degree is an int or per-variable tuple.

    A negative degree describes the zero code.
    """
    kind: str
    degree: object
    domain: Grid
    field: object

    def __post_init__(self):
        if self.kind not in ("RS", "RM_total", "RM_individual"):
            raise ValueError(f"unknown code kind {self.kind}")
        if self.kind == "RS" and self.domain.arity != 1:
            raise ValueError("RS codes live on one axis")
        if self.kind == "RM_individual" and len(self.degree) != self.domain.arity:
            raise ValueError("individual degrees must match the arity")

    @property
    def arity(self):
        return self.domain.arity

    def monomials(self):
        m = self.arity
        if self.kind == "RS":
            return [(e,) for e in range(self.degree + 1)]
        if self.kind == "RM_total":
            d = self.degree
            return [e for e in product(range(max(d, -1) + 1), repeat=m) if sum(e) <= d]
        if any(d < 0 for d in self.degree):
            return []
        return list(product(*[range(d + 1) for d in self.degree]))

    @property
    def dim(self):
        return len(self.monomials())

    def contains_poly(self, poly):
        if isinstance(poly, UniPoly):
            return poly.degree <= self.degree
        if poly.is_zero():
            return True
        if self.kind == "RM_total":
            return poly.degree <= self.degree
        if self.kind == "RS":
            return poly.individual_degrees()[0] <= self.degree
        return all(a <= b for a, b in zip(poly.individual_degrees(), self.degree))

    def poly_from_coeffs(self, coeffs):
        terms = dict(zip(self.monomials(), coeffs))
        if self.kind == "RS":
            n = self.degree + 1
            return UniPoly(self.field, [terms.get((e,), 0) for e in range(max(n, 0))])
        return MultiPoly(self.field, self.arity, terms)

    def eval_matrix(self, points):
        """Rows: points; columns: monomials."""
        F = self.field
        P = np.asarray(points, dtype=np.int64).reshape(-1, self.arity)
        mons = self.monomials()
        if not mons:
            return np.zeros((len(P), 0), dtype=np.int64)
        maxe = [max(e[i] for e in mons) for i in range(self.arity)]
        pw = [power_matrix(F, P[:, i], maxe[i]) for i in range(self.arity)]
        E = np.empty((len(P), len(mons)), dtype=np.int64)
        for j, e in enumerate(mons):
            col = np.ones(len(P), dtype=np.int64)
            for i, k in enumerate(e):
                if k:
                    col = F.mul(col, pw[i][:, k])
            E[:, j] = col
        return E


@dataclass
class SideCondition:
    points: np.ndarray
    values: np.ndarray = dc_field(default=None)

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=np.int64)
        if self.points.ndim == 1:
            self.points = self.points.reshape(-1, 1)
        self.values = np.asarray(self.values if self.values is not None else [], dtype=np.int64)
        if len(self.values) != len(self.points):
            raise ValueError("side condition needs one value per point")


def agreement(f, g):
    """Fraction of positions where two equal-length value vectors agree."""
    f = np.asarray(f).ravel()
    g = np.asarray(g).ravel()
    if f.shape != g.shape:
        raise ValueError("length mismatch")
    return Fraction(int(np.count_nonzero(f == g)), len(f))


def pairwise_delta(code):
    """Upper bound on the agreement of two distinct codewords."""
    n = len(code.domain.axes[0])
    if code.kind == "RS":
        return Fraction(code.degree, n)
    if code.kind == "RM_total":
        return Fraction(code.degree, n)
    return Fraction(sum(code.degree), n)


def johnson_list_bound(C, delta):
    C, delta = Fraction(C), Fraction(delta)
    if C * C <= delta:
        raise ValueError("agreement must exceed sqrt(delta)")
    return C / (C * C - delta)


def _affine_solutions(F, A, b):
    """Particular solution and kernel basis of A c = b, or None when inconsistent."""
    A = [list(map(int, r)) for r in A]
    n = len(A[0]) if A else 0
    rows = [r + [int(v)] for r, v in zip(A, b)]
    pivots = []
    r = 0
    for col in range(n):
        piv = next((i for i in range(r, len(rows)) if rows[i][col]), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = F.inv(rows[r][col])
        rows[r] = [F.mul(inv, v) for v in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][col]:
                c = rows[i][col]
                rows[i] = [v ^ F.mul(c, w) for v, w in zip(rows[i], rows[r])]
        pivots.append(col)
        r += 1
    if any(row[-1] for row in rows[r:]):
        return None
    part = [0] * n
    for i, col in enumerate(pivots):
        part[col] = rows[i][-1]
    kernel = []
    for free in (c for c in range(n) if c not in pivots):
        v = [0] * n
        v[free] = 1
        for i, col in enumerate(pivots):
            v[col] = rows[i][free]
        kernel.append(v)
    return part, kernel


@dataclass
class OracleResult:
    agreement: Fraction
    coeffs: tuple
    poly: object
    method: str


def _domain_points(code):
    return code.domain.points()


def code_agreement_oracle(f, code, side=None, cap=DEFAULT_CAP, method="auto"):
    """Exact max agreement of f with codewords satisfying the side condition.

    Two exhaustive routes: enumerate the affine message space directly, or
    enumerate agreement sets of size dim - rank(side) and solve for the
    unique codeword through each.  Ties break to the lexicographically
    smallest coefficient vector.
    """
    F = code.field
    fv = np.asarray(getattr(f, "values", f), dtype=np.int64).ravel()
    pts = _domain_points(code)
    N = len(pts)
    if len(fv) != N:
        raise ValueError("word length does not match the code domain")
    E = code.eval_matrix(pts)
    dim = E.shape[1]
    if side is not None and len(side.points):
        ES = code.eval_matrix(side.points)
        hv = side.values
    else:
        ES = np.zeros((0, dim), dtype=np.int64)
        hv = np.zeros(0, dtype=np.int64)
    if dim == 0:
        if np.any(hv):
            return OracleResult(Fraction(0), None, None, "empty")
        return OracleResult(agreement(fv, np.zeros(N, dtype=np.int64)), (), code.poly_from_coeffs([]), "zero")
    sol = _affine_solutions(F, ES, hv) if len(hv) else ([0] * dim, [[int(i == j) for j in range(dim)] for i in range(dim)])
    if sol is None:
        return OracleResult(Fraction(0), None, None, "empty")
    part, kernel = sol
    r = len(kernel)
    n_messages = F.size ** r
    n_subsets = comb(N, r)
    if method == "auto":
        method = "messages" if n_messages <= n_subsets else "subsets"
    if method == "messages":
        if n_messages > cap:
            raise CapabilityError(f"message space {F.size}^{r} exceeds cap {cap}")
        best = _oracle_messages(F, fv, E, part, kernel)
    else:
        if n_subsets > cap:
            raise CapabilityError(f"C({N},{r}) subsets exceed cap {cap}")
        best = _oracle_subsets(F, fv, E, ES, hv, r)
    count, coeffs = best
    return OracleResult(Fraction(count, N), coeffs, code.poly_from_coeffs(coeffs), method)


def _oracle_messages(F, fv, E, part, kernel):
    base = field_matmul(F, E, np.array(part, dtype=np.int64).reshape(-1, 1))[:, 0]
    kv = [field_matmul(F, E, np.array(k, dtype=np.int64).reshape(-1, 1))[:, 0] for k in kernel]
    best_count, best = -1, None
    elems = range(F.size)
    for combo in product(elems, repeat=len(kernel)):
        vals = base.copy()
        for c, v in zip(combo, kv):
            if c:
                vals ^= F.mul(v, c)
        cnt = int(np.count_nonzero(vals == fv))
        if cnt >= best_count:
            coeffs = list(part)
            for c, k in zip(combo, kernel):
                if c:
                    coeffs = [a ^ F.mul(c, b) for a, b in zip(coeffs, k)]
            coeffs = tuple(coeffs)
            if cnt > best_count or coeffs < best:
                best_count, best = cnt, coeffs
    return best_count, best


def _oracle_subsets(F, fv, E, ES, hv, r):
    N = len(fv)
    best_count, best = -1, None
    seen = set()
    for U in combinations(range(N), r):
        A = np.vstack([ES, E[list(U)]]) if len(ES) else E[list(U)]
        b = np.concatenate([hv, fv[list(U)]])
        try:
            c = solve_linear(F, A, b)
        except ValueError:
            continue
        if c is None:
            continue
        c = tuple(c)
        if c in seen:
            continue
        seen.add(c)
        vals = field_matmul(F, E, np.array(c, dtype=np.int64).reshape(-1, 1))[:, 0]
        cnt = int(np.count_nonzero(vals == fv))
        if cnt > best_count or (cnt == best_count and c < best):
            best_count, best = cnt, c
    if best is None:
        # no unisolvent subset: side conditions pin the codeword completely
        best, best_count = None, 0
    return best_count, best


def list_decode(f, code, C, cap=DEFAULT_CAP):
    """All codewords (as coefficient tuples) with agreement at least C."""
    delta = pairwise_delta(code)
    C = Fraction(C)
    if C * C <= delta:
        raise ValueError("list decoding radius needs C > sqrt(delta)")
    F = code.field
    fv = np.asarray(getattr(f, "values", f), dtype=np.int64).ravel()
    pts = _domain_points(code)
    N = len(pts)
    E = code.eval_matrix(pts)
    dim = E.shape[1]
    if comb(N, dim) > cap:
        raise CapabilityError(f"C({N},{dim}) subsets exceed cap {cap}")
    need = C * N
    found = {}
    for U in combinations(range(N), dim):
        try:
            c = solve_linear(F, E[list(U)], fv[list(U)])
        except ValueError:
            continue
        if c is None or tuple(c) in found:
            continue
        vals = field_matmul(F, E, np.array(c, dtype=np.int64).reshape(-1, 1))[:, 0]
        cnt = int(np.count_nonzero(vals == fv))
        found[tuple(c)] = cnt
    return sorted(c for c, cnt in found.items() if cnt >= need)


def decode_exact(values, code):
    """The polynomial behind values if they form a codeword, else None.

    Interpolates on the leading subgrid of the degree box and compares
    against every entry, so it reads the whole table.
    """
    F = code.field
    grid = code.domain
    vals = np.asarray(values, dtype=np.int64).reshape(grid.shape)
    if code.kind == "RS":
        box = (code.degree,)
    elif code.kind == "RM_total":
        box = (code.degree,) * grid.arity
    else:
        box = tuple(code.degree)
    if any(b < 0 for b in box):
        return MultiPoly(F, grid.arity) if np.all(vals == 0) and grid.arity > 1 else (
            UniPoly(F) if np.all(vals == 0) else None)
    box = tuple(min(b, len(ax) - 1) for b, ax in zip(box, grid.axes))
    sub = vals[tuple(slice(0, b + 1) for b in box)]
    C = sub
    for i, b in enumerate(box):
        M = interpolation_matrix(F, grid.axes[i][: b + 1])
        Cm = np.moveaxis(C, i, 0)
        rest = Cm.shape[1:]
        R = field_matmul(F, M, Cm.reshape(Cm.shape[0], -1))
        C = np.moveaxis(R.reshape((b + 1,) + rest), 0, i)
    poly = UniPoly(F, C) if grid.arity == 1 else MultiPoly.from_dense(F, C)
    if not code.contains_poly(poly):
        return None
    full = poly(grid.axes[0]) if grid.arity == 1 else poly.eval_grid(grid.axes)
    if not np.array_equal(np.asarray(full).reshape(vals.shape), vals):
        return None
    return poly


def is_codeword(values, code):
    return decode_exact(values, code) is not None


def isqrt_exact(d):
    r = isqrt(d)
    if r * r != d:
        raise ValueError(f"{d} is not a perfect square")
    return r
