"""Polynomials over a binary field, evaluation tables, and low-degree extensions.

All polynomials live over one ambient field (a ``GF`` instance) and store
coefficients as ints.  Univariate polynomials are dense, lowest degree first.
Multivariate polynomials are sparse ``{exponent tuple: coefficient}`` maps.
"""
from functools import lru_cache
from itertools import product

import numpy as np

from .field_tower import GF


# --------------------------------------------------------------------------
# field linear algebra helpers

def field_matmul(F, A, B):
    """Matrix product over F for int arrays A (n, k) and B (k, m)."""
    A = np.asarray(A, dtype=np.int64)
    B = np.asarray(B, dtype=np.int64)
    out = np.zeros((A.shape[0], B.shape[1]), dtype=np.int64)
    for j in range(A.shape[1]):
        out ^= F.mul(A[:, j:j + 1], B[j:j + 1, :])
    return out


def power_matrix(F, xs, max_exp):
    """Columns x^0 .. x^max_exp for each x in xs."""
    xs = np.asarray(xs, dtype=np.int64)
    out = np.empty((len(xs), max_exp + 1), dtype=np.int64)
    cur = np.ones(len(xs), dtype=np.int64)
    for e in range(max_exp + 1):
        out[:, e] = cur
        cur = F.mul(cur, xs)
    return out


def solve_linear(F, A, b):
    """Unique solution of A c = b over F, or None if A has a nontrivial kernel.

    Raises ValueError when the system is inconsistent.
    """
    rows = [list(map(int, r)) + [int(v)] for r, v in zip(A, b)]
    n = len(rows[0]) - 1 if rows else 0
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
        raise ValueError("inconsistent linear system")
    if r < n:
        return None
    sol = [0] * n
    for i, col in enumerate(pivots):
        sol[col] = rows[i][-1]
    return sol


def rank(F, A):
    rows = [list(map(int, r)) for r in A]
    if not rows:
        return 0
    r = 0
    for col in range(len(rows[0])):
        piv = next((i for i in range(r, len(rows)) if rows[i][col]), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = F.inv(rows[r][col])
        rows[r] = [F.mul(inv, v) for v in rows[r]]
        for i in range(r + 1, len(rows)):
            if rows[i][col]:
                c = rows[i][col]
                rows[i] = [v ^ F.mul(c, w) for v, w in zip(rows[i], rows[r])]
        r += 1
    return r


# --------------------------------------------------------------------------
# univariate

class UniPoly:
    __slots__ = ("field", "coeffs")

    def __init__(self, field, coeffs=()):
        c = [int(x) for x in coeffs]
        while c and c[-1] == 0:
            c.pop()
        self.field = field
        self.coeffs = c

    @classmethod
    def zero(cls, field):
        return cls(field)

    @classmethod
    def constant(cls, field, c):
        return cls(field, [c])

    @classmethod
    def monomial(cls, field, e, c=1):
        return cls(field, [0] * e + [c])

    @classmethod
    def from_roots(cls, field, roots):
        p = cls(field, [1])
        for r in roots:
            p = p * cls(field, [int(r), 1])
        return p

    @classmethod
    def interpolate(cls, field, xs, ys):
        M = interpolation_matrix(field, tuple(int(x) for x in xs))
        c = field_matmul(field, M, np.asarray(ys, dtype=np.int64).reshape(-1, 1))[:, 0]
        return cls(field, c)

    @property
    def degree(self):
        """Degree, with -1 standing for the zero polynomial."""
        return len(self.coeffs) - 1

    def is_zero(self):
        return not self.coeffs

    def __eq__(self, other):
        return isinstance(other, UniPoly) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(tuple(self.coeffs))

    def __repr__(self):
        return f"UniPoly({self.coeffs})"

    def _lift(self, other):
        if isinstance(other, UniPoly):
            return other
        return UniPoly(self.field, [other])

    def __add__(self, other):
        other = self._lift(other)
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, v in enumerate(b):
            out[i] ^= v
        return UniPoly(self.field, out)

    __radd__ = __sub__ = __rsub__ = __add__

    def scale(self, c):
        if not c:
            return UniPoly(self.field)
        return UniPoly(self.field, self.field.mul(np.array(self.coeffs, dtype=np.int64), c)
                       if self.coeffs else [])

    def shift(self, k):
        """x^k * self"""
        return UniPoly(self.field, [0] * k + self.coeffs) if self.coeffs else self

    def __mul__(self, other):
        if not isinstance(other, UniPoly):
            return self.scale(int(other))
        if not self.coeffs or not other.coeffs:
            return UniPoly(self.field)
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = np.zeros(len(a) + len(b) - 1, dtype=np.int64)
        av = np.array(a, dtype=np.int64)
        for i, c in enumerate(b):
            if c:
                out[i:i + len(a)] ^= self.field.mul(av, c)
        return UniPoly(self.field, out)

    __rmul__ = __mul__

    def divmod(self, other):
        if other.is_zero():
            raise ZeroDivisionError("division by the zero polynomial")
        F = self.field
        rem = list(self.coeffs)
        dq = len(rem) - len(other.coeffs)
        if dq < 0:
            return UniPoly(F), UniPoly(F, rem)
        q = [0] * (dq + 1)
        lead_inv = F.inv(other.coeffs[-1])
        oc = other.coeffs
        for i in range(dq, -1, -1):
            c = rem[i + len(oc) - 1]
            if not c:
                continue
            c = F.mul(c, lead_inv)
            q[i] = c
            for j, v in enumerate(oc):
                if v:
                    rem[i + j] ^= F.mul(c, v)
        return UniPoly(F, q), UniPoly(F, rem)

    def __call__(self, x):
        F = self.field
        if isinstance(x, (int, np.integer)):
            acc = 0
            for c in reversed(self.coeffs):
                acc = F.mul(acc, int(x)) ^ c
            return acc
        x = np.asarray(x, dtype=np.int64)
        acc = np.zeros(x.shape, dtype=np.int64)
        for c in reversed(self.coeffs):
            acc = F.mul(acc, x) ^ c
        return acc

    def to_multi(self, arity=1, var=0):
        terms = {}
        for e, c in enumerate(self.coeffs):
            if c:
                exp = [0] * arity
                exp[var] = e
                terms[tuple(exp)] = c
        return MultiPoly(self.field, arity, terms)


@lru_cache(maxsize=256)
def _interp_cached(field, xs):
    F = field
    n = len(xs)
    if len(set(xs)) != n:
        raise ValueError("interpolation points must be distinct")
    master = UniPoly.from_roots(F, xs)
    M = np.zeros((n, n), dtype=np.int64)
    for i, a in enumerate(xs):
        # synthetic division of master by (x - a)
        mc = master.coeffs
        q = [0] * n
        carry = 0
        for j in range(n, 0, -1):
            carry = mc[j] ^ F.mul(carry, a) if j < n else mc[j]
            q[j - 1] = carry
        qi = UniPoly(F, q)
        scale = F.inv(qi(a))
        col = F.mul(np.array(q, dtype=np.int64), scale)
        M[:, i] = col
    M.setflags(write=False)
    return M


def interpolation_matrix(field, xs):
    """M with coeffs = M @ values for the degree < len(xs) interpolant."""
    return _interp_cached(field, tuple(int(x) for x in xs))


def vanishing_poly(field, A):
    return UniPoly.from_roots(field, sorted(set(int(a) for a in A)))


def divide_by_vanishing_uni(f, A):
    """f / V_A; raises ValueError when f does not vanish on A."""
    q, r = f.divmod(vanishing_poly(f.field, A))
    if not r.is_zero():
        raise ValueError("polynomial does not vanish on the given set")
    return q


def split_variable(f, k):
    """Bivariate Q with Q(x^k, x) == f, exponent e = k*s + t -> x^s y^t (t < k)."""
    if k < 1:
        raise ValueError("split factor must be positive")
    terms = {}
    for e, c in enumerate(f.coeffs):
        if c:
            terms[(e // k, e % k)] = c
    return MultiPoly(f.field, 2, terms)


# --------------------------------------------------------------------------
# multivariate

class MultiPoly:
    __slots__ = ("field", "arity", "terms")

    def __init__(self, field, arity, terms=None):
        self.field = field
        self.arity = arity
        self.terms = {tuple(int(e) for e in k): int(v) for k, v in (terms or {}).items() if v}
        for k in self.terms:
            if len(k) != arity:
                raise ValueError("exponent arity mismatch")

    @classmethod
    def constant(cls, field, arity, c):
        return cls(field, arity, {(0,) * arity: c})

    @classmethod
    def variable(cls, field, arity, i):
        e = [0] * arity
        e[i] = 1
        return cls(field, arity, {tuple(e): 1})

    @classmethod
    def from_dense(cls, field, arr):
        arr = np.asarray(arr)
        terms = {idx: int(arr[idx]) for idx in zip(*np.nonzero(arr))}
        return cls(field, arr.ndim, terms)

    @property
    def degree(self):
        """Total degree, -1 for the zero polynomial."""
        return max((sum(k) for k in self.terms), default=-1)

    def individual_degrees(self):
        return tuple(max((k[i] for k in self.terms), default=-1) for i in range(self.arity))

    def is_zero(self):
        return not self.terms

    def __eq__(self, other):
        return isinstance(other, MultiPoly) and self.arity == other.arity and self.terms == other.terms

    def __repr__(self):
        return f"MultiPoly({self.arity}, {self.terms})"

    def __add__(self, other):
        if not isinstance(other, MultiPoly):
            other = MultiPoly.constant(self.field, self.arity, int(other))
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, 0) ^ v
        return MultiPoly(self.field, self.arity, out)

    __radd__ = __sub__ = __rsub__ = __add__

    def scale(self, c):
        F = self.field
        return MultiPoly(F, self.arity, {k: F.mul(v, int(c)) for k, v in self.terms.items()})

    def __mul__(self, other):
        if not isinstance(other, MultiPoly):
            return self.scale(int(other))
        F = self.field
        out = {}
        for k1, v1 in self.terms.items():
            for k2, v2 in other.terms.items():
                k = tuple(a + b for a, b in zip(k1, k2))
                out[k] = out.get(k, 0) ^ F.mul(v1, v2)
        return MultiPoly(F, self.arity, out)

    __rmul__ = __mul__

    def shift(self, exps):
        """Multiply by the monomial x^exps."""
        return MultiPoly(self.field, self.arity,
                         {tuple(a + b for a, b in zip(k, exps)): v for k, v in self.terms.items()})

    def __call__(self, *point):
        if len(point) == 1 and np.ndim(point[0]) == 1 and len(point[0]) == self.arity:
            point = tuple(point[0])
        F = self.field
        acc = 0
        for k, v in self.terms.items():
            t = v
            for x, e in zip(point, k):
                if e:
                    t = F.mul(t, F.pow(int(x), e))
            acc ^= t
        return acc

    def eval_points(self, points):
        """Evaluate at an (n, arity) array of points."""
        F = self.field
        P = np.asarray(points, dtype=np.int64).reshape(-1, self.arity)
        if not self.terms:
            return np.zeros(len(P), dtype=np.int64)
        degs = self.individual_degrees()
        pw = [power_matrix(F, P[:, i], max(degs[i], 0)) for i in range(self.arity)]
        acc = np.zeros(len(P), dtype=np.int64)
        for k, v in self.terms.items():
            t = np.full(len(P), v, dtype=np.int64)
            for i, e in enumerate(k):
                if e:
                    t = F.mul(t, pw[i][:, e])
            acc ^= t
        return acc

    def to_dense(self, shape=None):
        if shape is None:
            shape = tuple(max(d, 0) + 1 for d in self.individual_degrees())
        arr = np.zeros(shape, dtype=np.int64)
        for k, v in self.terms.items():
            arr[k] = v
        return arr

    def eval_grid(self, axes):
        """Values on the product of the given axes, shape (len(a) for a in axes)."""
        F = self.field
        C = self.to_dense()
        for i, ax in enumerate(axes):
            V = power_matrix(F, ax, C.shape[i] - 1)
            Cm = np.moveaxis(C, i, 0)
            rest = Cm.shape[1:]
            R = field_matmul(F, V, Cm.reshape(Cm.shape[0], -1))
            C = np.moveaxis(R.reshape((len(ax),) + rest), 0, i)
        return C

    def partial_eval(self, var, value):
        """Fix one variable; the result keeps the arity (that exponent becomes 0)."""
        F = self.field
        out = {}
        for k, v in self.terms.items():
            nk = list(k)
            e = nk[var]
            nk[var] = 0
            nk = tuple(nk)
            out[nk] = out.get(nk, 0) ^ F.mul(v, F.pow(int(value), e))
        return MultiPoly(F, self.arity, out)

    def to_uni(self, var):
        """View a polynomial that only involves one variable as a UniPoly."""
        coeffs = {}
        for k, v in self.terms.items():
            if any(e for i, e in enumerate(k) if i != var):
                raise ValueError("polynomial involves other variables")
            coeffs[k[var]] = v
        n = max(coeffs, default=-1) + 1
        return UniPoly(self.field, [coeffs.get(i, 0) for i in range(n)])

    def compose_affine(self, matrix, offset):
        """g(y) = f(offset + matrix @ y), matrix of shape (arity, k)."""
        F = self.field
        matrix = [[int(v) for v in row] for row in matrix]
        k = len(matrix[0]) if matrix else 0
        forms = []
        for i in range(self.arity):
            terms = {(0,) * k: int(offset[i])}
            for j in range(k):
                e = [0] * k
                e[j] = 1
                terms[tuple(e)] = matrix[i][j]
            forms.append(MultiPoly(F, k, terms))
        degs = self.individual_degrees()
        powers = []
        for i in range(self.arity):
            pw = [MultiPoly.constant(F, k, 1)]
            for _ in range(max(degs[i], 0)):
                pw.append(pw[-1] * forms[i])
            powers.append(pw)
        out = MultiPoly(F, k)
        for exps, v in self.terms.items():
            t = MultiPoly.constant(F, k, v)
            for i, e in enumerate(exps):
                if e:
                    t = t * powers[i][e]
            out = out + t
        return out

    def restrict_line(self, point, direction):
        """Univariate t -> f(point + t * direction)."""
        g = self.compose_affine([[d] for d in direction], point)
        return g.to_uni(0)

    def restrict_plane(self, point, u, w):
        """Bivariate (s, t) -> f(point + s * u + t * w)."""
        return self.compose_affine([[a, b] for a, b in zip(u, w)], point)


def multivariate_vanishing_division(f, sets):
    """Write f = sum_i V_{A_i}(x_i) Q_i + R with deg_{x_i} R < |A_i|.

    ``sets`` gives one point set per variable (None skips that variable).
    Variables are eliminated in order, so Q_i has x_j-degree < |A_j| for j < i.
    """
    F = f.field
    quotients = []
    rem = f
    for var, A in enumerate(sets):
        if A is None:
            quotients.append(MultiPoly(F, f.arity))
            continue
        V = vanishing_poly(F, A)
        groups = {}
        for k, v in rem.terms.items():
            rest = k[:var] + (0,) + k[var + 1:]
            groups.setdefault(rest, {})[k[var]] = v
        Q = {}
        R = {}
        for rest, coeffs in groups.items():
            n = max(coeffs) + 1
            uni = UniPoly(F, [coeffs.get(i, 0) for i in range(n)])
            q, r = uni.divmod(V)
            for e, c in enumerate(q.coeffs):
                if c:
                    Q[rest[:var] + (e,) + rest[var + 1:]] = c
            for e, c in enumerate(r.coeffs):
                if c:
                    R[rest[:var] + (e,) + rest[var + 1:]] = c
        quotients.append(MultiPoly(F, f.arity, Q))
        rem = MultiPoly(F, f.arity, R)
    return rem, quotients


def vanishing_multi(field, arity, var, A):
    """V_A(x_var) as a MultiPoly."""
    return vanishing_poly(field, A).to_multi(arity, var)


# --------------------------------------------------------------------------
# domains and evaluation tables

class AxisIndex:
    def __init__(self, values):
        self.values = np.asarray(values, dtype=np.int64)
        self.order = np.argsort(self.values, kind="stable")
        self.sorted = self.values[self.order]
        if len(self.sorted) > 1 and np.any(self.sorted[1:] == self.sorted[:-1]):
            raise ValueError("axis values must be distinct")

    def __call__(self, xs):
        xs = np.asarray(xs, dtype=np.int64)
        pos = np.searchsorted(self.sorted, xs)
        pos = np.minimum(pos, len(self.sorted) - 1)
        if np.any(self.sorted[pos] != xs):
            raise KeyError("point outside the table domain")
        return self.order[pos]

    def contains(self, xs):
        xs = np.asarray(xs, dtype=np.int64)
        pos = np.minimum(np.searchsorted(self.sorted, xs), len(self.sorted) - 1)
        return self.sorted[pos] == xs


class Grid:
    """Product domain; each axis is an ordered array of ambient elements.

    ``labels`` records how each axis was built (``"gf8"`` for an embedded
    subfield in its natural order, ``None`` for an explicit list).
    """

    def __init__(self, axes, labels=None):
        self.axes = tuple(np.asarray(a, dtype=np.int64) for a in axes)
        self.labels = tuple(labels) if labels is not None else (None,) * len(self.axes)
        self._index = [AxisIndex(a) for a in self.axes]

    @property
    def arity(self):
        return len(self.axes)

    @property
    def shape(self):
        return tuple(len(a) for a in self.axes)

    @property
    def size(self):
        return int(np.prod(self.shape))

    def points(self):
        mesh = np.meshgrid(*self.axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    def flat_index(self, points):
        P = np.asarray(points, dtype=np.int64).reshape(-1, self.arity)
        idx = [self._index[i](P[:, i]) for i in range(self.arity)]
        return np.ravel_multi_index(idx, self.shape)

    def contains(self, points):
        P = np.asarray(points, dtype=np.int64).reshape(-1, self.arity)
        ok = np.ones(len(P), dtype=bool)
        for i in range(self.arity):
            ok &= self._index[i].contains(P[:, i])
        return ok

    def descriptor(self, field):
        parts = []
        for lab, ax in zip(self.labels, self.axes):
            parts.append(lab if lab else "[" + ",".join(field.to_hex(v) for v in ax) + "]")
        return f"grid {field.n} " + ";".join(parts)


class PointList:
    def __init__(self, points):
        self.pts = np.asarray(points, dtype=np.int64)
        if self.pts.ndim == 1:
            self.pts = self.pts.reshape(-1, 1)
        self._pos = {tuple(p): i for i, p in enumerate(self.pts.tolist())}
        if len(self._pos) != len(self.pts):
            raise ValueError("points must be distinct")

    @property
    def arity(self):
        return self.pts.shape[1]

    @property
    def shape(self):
        return (len(self.pts),)

    @property
    def size(self):
        return len(self.pts)

    def points(self):
        return self.pts

    def flat_index(self, points):
        P = np.asarray(points, dtype=np.int64).reshape(-1, self.arity)
        try:
            return np.array([self._pos[tuple(p)] for p in P.tolist()], dtype=np.int64)
        except KeyError:
            raise KeyError("point outside the table domain") from None

    def contains(self, points):
        P = np.asarray(points, dtype=np.int64).reshape(-1, self.arity)
        return np.array([tuple(p) in self._pos for p in P.tolist()], dtype=bool)

    def descriptor(self, field):
        body = ";".join(",".join(field.to_hex(v) for v in p) for p in self.pts.tolist())
        return f"points {field.n} {self.arity} [{body}]"


def subfield_axis(tower, small, big):
    return tower.subfield_elements(small, big)


def subfield_grid(tower, small, big, arity):
    ax = tower.subfield_elements(small, big)
    return Grid([ax] * arity, [f"gf{small}"] * arity)


class EvalTable:
    """Values of a function on a domain, stored flat in row-major domain order."""

    def __init__(self, field, domain, values):
        self.field = field
        self.domain = domain
        v = np.asarray(values, dtype=np.int64).reshape(-1)
        if len(v) != domain.size:
            raise ValueError("value count does not match the domain")
        self.values = v

    @classmethod
    def from_poly(cls, poly, domain):
        if isinstance(domain, Grid):
            if isinstance(poly, UniPoly):
                vals = poly(domain.axes[0])
            else:
                vals = poly.eval_grid(domain.axes)
        else:
            pts = domain.points()
            vals = poly(pts[:, 0]) if isinstance(poly, UniPoly) else poly.eval_points(pts)
        return cls(poly.field, domain, np.asarray(vals).reshape(-1))

    def __call__(self, points):
        return self.values[self.domain.flat_index(points)]

    def grid_values(self):
        return self.values.reshape(self.domain.shape)

    def copy(self):
        return EvalTable(self.field, self.domain, self.values.copy())

    def serialize(self):
        F = self.field
        return self.domain.descriptor(F) + "\n" + "".join(F.to_hex(v) + "\n" for v in self.values)

    @classmethod
    def parse(cls, text, tower):
        lines = text.strip("\n").split("\n")
        if not lines or not lines[0]:
            raise ValueError("table needs a descriptor line")
        field, domain = parse_domain(lines[0], tower)
        vals = [field.from_hex(v) for line in lines[1:] for v in line.split()]
        return cls(field, domain, vals)


def parse_domain(desc, tower):
    """Inverse of ``descriptor``; returns (field, domain)."""
    parts = desc.split(" ", 2)
    if len(parts) != 3:
        raise ValueError(f"bad domain descriptor {desc!r}")
    kind = parts[0]
    field = tower.field(int(parts[1]))
    if kind == "grid":
        axes, labels = [], []
        for part in parts[2].split(";"):
            if part.startswith("gf"):
                axes.append(tower.subfield_elements(int(part[2:]), field.n))
                labels.append(part)
            elif part.startswith("[") and part.endswith("]"):
                axes.append([field.from_hex(v) for v in part[1:-1].split(",") if v])
                labels.append(None)
            else:
                raise ValueError(f"bad axis descriptor {part!r}")
        return field, Grid(axes, labels)
    if kind == "points":
        m, body = parts[2].split(" ", 1)
        body = body.strip()
        if not (body.startswith("[") and body.endswith("]")):
            raise ValueError("bad point list")
        pts = [[field.from_hex(v) for v in p.split(",")] for p in body[1:-1].split(";") if p]
        return field, PointList(np.array(pts, dtype=np.int64).reshape(-1, int(m)))
    raise ValueError(f"unknown domain kind {kind!r}")


def lde(table):
    """Low-degree extension of a table on a grid (individual degree |A_i| - 1)."""
    if not isinstance(table.domain, Grid):
        raise ValueError("lde needs a product domain")
    F = table.field
    C = table.grid_values()
    for i, ax in enumerate(table.domain.axes):
        M = interpolation_matrix(F, ax)
        Cm = np.moveaxis(C, i, 0)
        rest = Cm.shape[1:]
        R = field_matmul(F, M, Cm.reshape(Cm.shape[0], -1))
        C = np.moveaxis(R.reshape((len(ax),) + rest), 0, i)
    if table.domain.arity == 1:
        return UniPoly(F, C)
    return MultiPoly.from_dense(F, C)


# --------------------------------------------------------------------------
# affine lines and planes in F^m, canonical forms

def _normalize(F, v):
    piv = next(i for i, x in enumerate(v) if x)
    inv = F.inv(int(v[piv]))
    return tuple(F.mul(int(x), inv) for x in v), piv


def canonical_line(F, point, direction):
    """(point, direction): direction has leading 1, point has 0 at the pivot."""
    if not any(direction):
        raise ValueError("zero direction")
    d, piv = _normalize(F, direction)
    t = int(point[piv])
    p = tuple(int(a) ^ F.mul(t, b) for a, b in zip(point, d))
    return p, d


def _rref(F, rows):
    rows = [list(map(int, r)) for r in rows]
    pivots = []
    r = 0
    for col in range(len(rows[0])):
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
    return rows[:r], pivots


def canonical_plane(F, point, u, w):
    """(point, (u, w)) with (u, w) in reduced row echelon form and point zero at both pivots."""
    rows, pivots = _rref(F, [u, w])
    if len(rows) != 2:
        raise ValueError("directions are dependent")
    p = [int(a) for a in point]
    for row, piv in zip(rows, pivots):
        t = p[piv]
        if t:
            p = [a ^ F.mul(t, b) for a, b in zip(p, row)]
    return tuple(p), (tuple(rows[0]), tuple(rows[1]))


def line_points(F, line, params):
    p, d = line
    params = np.asarray(params, dtype=np.int64)
    return np.stack([np.full(len(params), a, dtype=np.int64) ^ F.mul(params, b)
                     for a, b in zip(p, d)], axis=1)


def plane_points(F, plane, s, t):
    """Points point + s*u + t*w for the grid of (s, t), row-major in s."""
    p, (u, w) = plane
    S, T = np.meshgrid(np.asarray(s, dtype=np.int64), np.asarray(t, dtype=np.int64), indexing="ij")
    S, T = S.ravel(), T.ravel()
    return np.stack([np.full(len(S), a, dtype=np.int64) ^ F.mul(S, b) ^ F.mul(T, c)
                     for a, b, c in zip(p, u, w)], axis=1)


def enumerate_lines(F, elems, m):
    """Every line of elems^m exactly once, in canonical form."""
    elems = [int(e) for e in elems]
    out = []
    for piv in range(m):
        for tail in product(elems, repeat=m - piv - 1):
            d = (0,) * piv + (1,) + tuple(tail)
            for rest in product(elems, repeat=m - 1):
                p = rest[:piv] + (0,) + rest[piv:]
                out.append((p, d))
    return out


def enumerate_planes(F, elems, m):
    """Every 2-flat of elems^m exactly once, in canonical form."""
    elems = [int(e) for e in elems]
    out = []
    for p1 in range(m):
        for p2 in range(p1 + 1, m):
            # row 1: 1 at p1, 0 at p2, free after p1; row 2: 1 at p2, free after p2
            free1 = [i for i in range(p1 + 1, m) if i != p2]
            free2 = list(range(p2 + 1, m))
            for v1 in product(elems, repeat=len(free1)):
                u = [0] * m
                u[p1] = 1
                for i, v in zip(free1, v1):
                    u[i] = v
                for v2 in product(elems, repeat=len(free2)):
                    w = [0] * m
                    w[p2] = 1
                    for i, v in zip(free2, v2):
                        w[i] = v
                    for rest in product(elems, repeat=m - 2):
                        p = list(rest)
                        p.insert(p1, 0)
                        p.insert(p2, 0)
                        out.append((tuple(p), (tuple(u), tuple(w))))
    return out
