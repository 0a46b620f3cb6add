"""Binary extension fields GF(2^n) and the tower of embeddings between them.

Elements are plain Python ints (bit i is the coefficient of x^i).  Every
arithmetic method accepts either ints or integer numpy arrays; arrays are
processed elementwise.  Fields up to GF(2^16) use log/antilog tables, GF(2^32)
falls back to carry-less multiplication.
"""
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

import numpy as np

SUPPORTED = (2, 4, 8, 16, 32)
TABLE_LIMIT = 16


def _clmul_mod(a, b, n, modulus):
    r = 0
    while b:
        if b & 1:
            r ^= a
        b >>= 1
        a <<= 1
        if a >> n:
            a ^= modulus
    return r


class GF:
    """GF(2^n) in polynomial basis modulo an irreducible bit mask."""

    def __init__(self, n, modulus, generator=2):
        if n not in SUPPORTED:
            raise ValueError(f"unsupported field size 2^{n}")
        if modulus >> n != 1:
            raise ValueError("modulus degree does not match field size")
        self.n = n
        self.size = 1 << n
        self.order = self.size - 1
        self.modulus = modulus
        self.generator = generator
        self.width = (n + 3) // 4
        self._exp = self._log = None
        if n <= TABLE_LIMIT:
            self._build_tables()

    def _build_tables(self):
        exp = [0] * (2 * self.order + 1)
        log = [0] * self.size
        x = 1
        for i in range(self.order):
            exp[i] = x
            if i and x == 1:
                raise ValueError("generator is not primitive")
            log[x] = i
            x = _clmul_mod(x, self.generator, self.n, self.modulus)
        if x != 1:
            raise ValueError("generator is not primitive")
        for i in range(self.order, len(exp)):
            exp[i] = exp[i - self.order]
        self._exp_list, self._log_list = exp, log
        self._exp = np.array(exp, dtype=np.int64)
        self._log = np.array(log, dtype=np.int64)

    def __eq__(self, other):
        return isinstance(other, GF) and (self.n, self.modulus, self.generator) == (
            other.n, other.modulus, other.generator)

    def __hash__(self):
        return hash(("GF", self.n, self.modulus, self.generator))

    def __repr__(self):
        return f"GF(2^{self.n})"

    # arithmetic ------------------------------------------------------------

    @staticmethod
    def add(a, b):
        return a ^ b

    sub = add

    def mul(self, a, b):
        if isinstance(a, (int, np.integer)) and isinstance(b, (int, np.integer)):
            a, b = int(a), int(b)
            if not a or not b:
                return 0
            if self._exp is None:
                return _clmul_mod(a, b, self.n, self.modulus)
            return self._exp_list[self._log_list[a] + self._log_list[b]]
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        if self._exp is None:
            return self._mul_wide(a, b)
        r = self._exp[self._log[a] + self._log[b]]
        return np.where((a == 0) | (b == 0), 0, r)

    def _mul_wide(self, a, b):
        a, b = np.broadcast_arrays(a.astype(np.uint64), b.astype(np.uint64))
        acc = np.zeros(a.shape, dtype=np.uint64)
        for i in range(self.n):
            acc ^= np.where((b >> np.uint64(i)) & np.uint64(1), a << np.uint64(i), np.uint64(0))
        mod = np.uint64(self.modulus)
        for i in range(2 * self.n - 2, self.n - 1, -1):
            hit = (acc >> np.uint64(i)) & np.uint64(1)
            acc ^= np.where(hit == 1, mod << np.uint64(i - self.n), np.uint64(0))
        return acc.astype(np.int64)

    def log(self, a):
        if self._exp is None:
            raise NotImplementedError("discrete log needs tables")
        if np.any(np.asarray(a) == 0):
            raise ZeroDivisionError("log of zero")
        if isinstance(a, (int, np.integer)):
            return self._log_list[int(a)]
        return self._log[np.asarray(a, dtype=np.int64)]

    def exp(self, e):
        """generator ** e"""
        if isinstance(e, (int, np.integer)):
            return self.pow(self.generator, int(e))
        e = np.asarray(e, dtype=np.int64) % self.order
        if self._exp is None:
            return np.array([self.pow(self.generator, int(x)) for x in e.ravel()],
                            dtype=np.int64).reshape(e.shape)
        return self._exp[e]

    def pow(self, a, e):
        if isinstance(a, (int, np.integer)):
            a = int(a)
            if e == 0:
                return 1
            if a == 0:
                if e < 0:
                    raise ZeroDivisionError("zero to a negative power")
                return 0
            if self._exp is not None:
                return self._exp_list[(self._log_list[a] * e) % self.order]
            e %= self.order
            r = 1
            while e:
                if e & 1:
                    r = _clmul_mod(r, a, self.n, self.modulus)
                a = _clmul_mod(a, a, self.n, self.modulus)
                e >>= 1
            return r
        a = np.asarray(a, dtype=np.int64)
        if e == 0:
            return np.ones_like(a)
        if self._exp is None:
            return np.array([self.pow(int(x), e) for x in a.ravel()], dtype=np.int64).reshape(a.shape)
        if e < 0 and np.any(a == 0):
            raise ZeroDivisionError("zero to a negative power")
        r = self._exp[(self._log[a] * (e % self.order)) % self.order]
        return np.where(a == 0, 0, r)

    def inv(self, a):
        if isinstance(a, (int, np.integer)):
            if a == 0:
                raise ZeroDivisionError("inverse of zero")
            return self.pow(a, -1)
        a = np.asarray(a, dtype=np.int64)
        if np.any(a == 0):
            raise ZeroDivisionError("inverse of zero")
        return self.pow(a, -1)

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    def xor_sum(self, values, axis=None):
        return np.bitwise_xor.reduce(np.asarray(values, dtype=np.int64), axis=axis)

    def dot(self, a, b):
        """sum_i a_i * b_i"""
        return int(self.xor_sum(self.mul(np.asarray(a), np.asarray(b)))) if len(a) else 0

    # enumeration and sampling --------------------------------------------------

    def elements(self):
        if self.n > 24:
            raise ValueError("field too large to enumerate")
        return np.arange(self.size, dtype=np.int64)

    def sample(self, rng, size=None):
        """Uniform elements from a numpy Generator (or an int seed)."""
        if not isinstance(rng, np.random.Generator):
            rng = np.random.default_rng(rng)
        if size is None:
            return int(rng.integers(0, self.size))
        return rng.integers(0, self.size, size=size, dtype=np.int64)

    def multiplicative_subgroup(self, order):
        if order < 1 or self.order % order:
            raise ValueError(f"{order} does not divide {self.order}")
        step = self.order // order
        return np.array([self.pow(self.generator, step * k) for k in range(order)], dtype=np.int64)

    # serialization ---------------------------------------------------------

    def to_hex(self, a):
        return format(int(a), f"0{self.width}x")

    def from_hex(self, s):
        s = s.strip()
        if len(s) != self.width or s != s.lower():
            raise ValueError(f"expected {self.width} lowercase hex digits, got {s!r}")
        v = int(s, 16)
        if v >= self.size:
            raise ValueError("value outside field")
        return v


@dataclass(frozen=True)
class FieldElem:
    """A field element carrying its field, for scalar code and serialization."""
    bits: int
    field: GF

    def __post_init__(self):
        if not 0 <= self.bits < self.field.size:
            raise ValueError("bits outside field")

    def _other(self, other):
        if isinstance(other, FieldElem):
            if other.field != self.field:
                raise ValueError("elements from different fields")
            return other.bits
        return int(other)

    def __add__(self, other):
        return FieldElem(self.bits ^ self._other(other), self.field)

    __radd__ = __sub__ = __rsub__ = __add__

    def __neg__(self):
        return self

    def __mul__(self, other):
        return FieldElem(self.field.mul(self.bits, self._other(other)), self.field)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return FieldElem(self.field.div(self.bits, self._other(other)), self.field)

    def __pow__(self, e):
        return FieldElem(self.field.pow(self.bits, e), self.field)

    def inverse(self):
        return FieldElem(self.field.inv(self.bits), self.field)

    def __bool__(self):
        return bool(self.bits)

    def hex(self):
        return self.field.to_hex(self.bits)

    @classmethod
    def from_hex(cls, s, field):
        return cls(field.from_hex(s), field)


class Tower:
    """The chain GF(4) < GF(16) < GF(256) < GF(2^16) < GF(2^32) with fixed embeddings."""

    def __init__(self, fields, vectors=()):
        self.fields = dict(fields)
        self.vectors = list(vectors)
        self._embed_tables = {}

    @classmethod
    def from_text(cls, text):
        fields, vectors = {}, []
        for raw in text.splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if parts[0] == "field" and len(parts) == 4:
                n = int(parts[1])
                fields[n] = GF(n, int(parts[2], 16), int(parts[3], 16))
            elif parts[0] == "vector" and len(parts) == 5:
                vectors.append((int(parts[1]), parts[2], parts[3], parts[4]))
            else:
                raise ValueError(f"bad tower config line: {raw!r}")
        return cls(fields, vectors)

    @classmethod
    def load(cls, path=None):
        if path is None:
            text = resources.files("rbriop").joinpath("data/tower.cfg").read_text()
        else:
            with open(path) as fh:
                text = fh.read()
        return cls.from_text(text)

    def field(self, n):
        try:
            return self.fields[n]
        except KeyError:
            raise ValueError(f"no field of size 2^{n} in the tower") from None

    def self_test(self):
        for n, a, b, c in self.vectors:
            F = self.field(n)
            if F.mul(F.from_hex(a), F.from_hex(b)) != F.from_hex(c):
                raise ValueError(f"self-test vector failed in GF(2^{n})")
        for small in self.fields:
            for big in self.fields:
                if small < big and big % small == 0:
                    img = self.embed(self.field(small).generator, small, big)
                    if not self.in_subfield(img, small, big):
                        raise ValueError("embedding leaves the subfield")
        return True

    def embedding_matrix(self, small, big):
        """Images of the basis monomials x^i of GF(2^small) inside GF(2^big)."""
        if big % small:
            raise ValueError(f"GF(2^{small}) is not a subfield of GF(2^{big})")
        S, B = self.field(small), self.field(big)
        image_gen = B.pow(B.generator, B.order // S.order)
        cols = []
        for i in range(small):
            x = 1 << i
            cols.append(0 if x == 0 else B.pow(image_gen, self._log_small(S, x)))
        return cols

    @staticmethod
    def _log_small(S, x):
        if S._exp is not None:
            return S.log(x)
        acc, e = 1, 0
        while acc != x:
            acc = S.mul(acc, S.generator)
            e += 1
        return e

    def embed(self, a, small, big):
        if small == big:
            return a
        key = (small, big)
        if key not in self._embed_tables:
            cols = self.embedding_matrix(small, big)
            if small <= TABLE_LIMIT:
                table = np.zeros(1 << small, dtype=np.int64)
                for i, c in enumerate(cols):
                    table[1 << i: 2 << i] = table[: 1 << i] ^ c
                self._embed_tables[key] = ("table", table)
            else:
                self._embed_tables[key] = ("cols", cols)
        kind, data = self._embed_tables[key]
        if kind == "table":
            if isinstance(a, (int, np.integer)):
                return int(data[int(a)])
            return data[np.asarray(a, dtype=np.int64)]
        arr = np.asarray(a, dtype=np.int64)
        out = np.zeros(arr.shape, dtype=np.int64)
        for i, c in enumerate(data):
            out ^= np.where((arr >> i) & 1, c, 0)
        return int(out) if np.ndim(a) == 0 else out

    def in_subfield(self, a, small, big):
        """a^(2^small) == a inside GF(2^big)."""
        B = self.field(big)
        x = a
        for _ in range(small):
            x = B.mul(x, x)
        return x == a if isinstance(a, (int, np.integer)) else np.asarray(x) == np.asarray(a)

    def subfield_elements(self, small, big):
        """Embedded copy of GF(2^small), ordered by the small field's own encoding."""
        return self.embed(np.arange(1 << small, dtype=np.int64), small, big)


@lru_cache(maxsize=None)
def default_tower():
    tower = Tower.load()
    tower.self_test()
    return tower
