"""Random linear combinations of codewords with degree correction.

``combine`` lifts every input to a common target degree by pairing it with a
shifted copy ``x^(target - d_i) * f_i`` and then mixes the results with
coefficients from the proximity generator.  Each combine has a value form
(used by verifiers on queried points) and a polynomial form (used by honest
provers).
"""
from fractions import Fraction

import numpy as np

from .poly_core import MultiPoly, UniPoly


def err(d, q, q_prime):
    """Failure probability of the proximity generator: q^4 / (d^2 q')."""
    return Fraction(q ** 4, d * d * q_prime)


def prox_sample(F, k, draw):
    """Coefficients (xi_1..xi_k) and the shift coefficient xi_0.

    ``draw(n)`` must return n independent uniform ambient elements.  One
    input gets one element, two inputs an independent pair, more inputs the
    powers 1, r, ..., r^(k-1) of a single element.
    """
    if k < 1:
        raise ValueError("need at least one input")
    if k <= 2:
        xis = [int(v) for v in draw(k)]
    else:
        r = int(draw(1)[0])
        xis = [1]
        for _ in range(k - 1):
            xis.append(F.mul(xis[-1], r))
    xi0 = int(draw(1)[0])
    return xis, xi0


def _shift_uni(F, x, e):
    return F.pow(np.asarray(x, dtype=np.int64), e) if e else np.ones(np.shape(x), dtype=np.int64)


def combine_uni(F, values, degrees, target, xis, xi0, xs):
    """sum_i xi_i (f_i(x) + xi_0 x^(target - d_i) f_i(x)) at the points xs."""
    xs = np.asarray(xs, dtype=np.int64)
    acc = np.zeros(xs.shape, dtype=np.int64)
    for v, d, xi in zip(values, degrees, xis):
        v = np.asarray(v, dtype=np.int64)
        shift = target - max(d, -1)
        term = v ^ F.mul(F.mul(_shift_uni(F, xs, shift), xi0), v)
        acc ^= F.mul(term, xi)
    return acc


def combine_uni_poly(F, polys, degrees, target, xis, xi0):
    out = UniPoly(F)
    for p, d, xi in zip(polys, degrees, xis):
        shift = target - max(d, -1)
        out = out + (p + p.shift(shift).scale(xi0)).scale(xi)
    return out


def _check_points(points, arity):
    P = np.asarray(points, dtype=np.int64).reshape(-1, arity)
    return P


def combine_ind(F, values, degrees, target, xis, xi0, points):
    """Individual-degree version; the shift is x1^(t1 - d_i1) x2^(t2 - d_i2)."""
    P = _check_points(points, len(target))
    acc = np.zeros(len(P), dtype=np.int64)
    for v, degs, xi in zip(values, degrees, xis):
        mon = np.ones(len(P), dtype=np.int64)
        for j, (t, d) in enumerate(zip(target, degs)):
            e = t - max(d, -1)
            if e:
                mon = F.mul(mon, F.pow(P[:, j], e))
        v = np.asarray(v, dtype=np.int64)
        acc ^= F.mul(v ^ F.mul(F.mul(mon, xi0), v), xi)
    return acc


def combine_ind_poly(F, polys, degrees, target, xis, xi0):
    arity = len(target)
    out = MultiPoly(F, arity)
    for p, degs, xi in zip(polys, degrees, xis):
        shift = tuple(t - max(d, -1) for t, d in zip(target, degs))
        out = out + (p + p.shift(shift).scale(xi0)).scale(xi)
    return out


def combine_tot(F, values, degrees, target, xis, xi0, points, arity):
    """Total-degree version; the shift is x1^(target - d_i)."""
    if arity not in (2, 3):
        raise ValueError("total-degree combine is defined for 2 or 3 variables")
    P = _check_points(points, arity)
    acc = np.zeros(len(P), dtype=np.int64)
    for v, d, xi in zip(values, degrees, xis):
        e = target - max(d, -1)
        mon = F.pow(P[:, 0], e) if e else np.ones(len(P), dtype=np.int64)
        v = np.asarray(v, dtype=np.int64)
        acc ^= F.mul(v ^ F.mul(F.mul(mon, xi0), v), xi)
    return acc


def combine_tot_poly(F, polys, degrees, target, xis, xi0, arity):
    out = MultiPoly(F, arity)
    for p, d, xi in zip(polys, degrees, xis):
        shift = (target - max(d, -1),) + (0,) * (arity - 1)
        out = out + (p + p.shift(shift).scale(xi0)).scale(xi)
    return out
