"""Quotients by vanishing polynomials, with prover-supplied fill values.

A quotient oracle divides by V_S along one coordinate wherever that
coordinate avoids S; on the rows where it does not, the value comes from a
fill function sent by the prover.
"""
import numpy as np

from .poly_core import EvalTable, Grid, UniPoly, lde, multivariate_vanishing_division, vanishing_poly


def quo_axis(F, values, points, axis, S, fill):
    """values / V_S(points[:, axis]) off S, fill(points) on S."""
    P = np.asarray(points, dtype=np.int64)
    if P.ndim == 1:
        P = P.reshape(-1, 1)
    coord = P[:, axis]
    V = vanishing_poly(F, S)
    den = V(coord)
    on_s = den == 0
    out = np.zeros(len(P), dtype=np.int64)
    off = ~on_s
    if np.any(off):
        out[off] = F.div(np.asarray(values, dtype=np.int64)[off], den[off])
    if np.any(on_s):
        out[on_s] = fill(P[on_s])
    return out


def quo1(F, values, xs, A, fill):
    return quo_axis(F, values, np.asarray(xs).reshape(-1, 1), 0, A, fill)


def quo2(F, values, points, B, fill):
    return quo_axis(F, values, points, 1, B, fill)


def quo3(F, values, points, C, fill):
    return quo_axis(F, values, points, 2, C, fill)


def side_condition_lde(F, axes, hvalues):
    """Interpolant of individual degree (|A_i| - 1) through values on the side cube."""
    return lde(EvalTable(F, Grid(axes), hvalues))


def fill_region(domain_axis, S):
    """Elements of S that lie on the domain axis (rows that need fill values)."""
    dom = set(int(v) for v in domain_axis)
    return sorted(int(s) for s in set(int(v) for v in S) if s in dom)


def honest_decompose(poly, sets):
    """(quotients, h_hat) with poly = sum V_{S_i}(x_i) g_i + h_hat.

    h_hat is the interpolant of poly on the product of the sets, so the
    division leaves no remainder.
    """
    F = poly.field
    if isinstance(poly, UniPoly):
        (A,) = sets
        A = sorted(set(int(a) for a in A))
        h_hat = UniPoly.interpolate(F, A, poly(np.array(A, dtype=np.int64)))
        q, r = (poly - h_hat).divmod(vanishing_poly(F, A))
        if not r.is_zero():
            raise ArithmeticError("remainder after removing the side interpolant")
        return [q], h_hat
    axes = [sorted(set(int(a) for a in S)) for S in sets]
    h_vals = poly.eval_grid(axes)
    h_hat = lde(EvalTable(F, Grid(axes), h_vals.ravel()))
    R, qs = multivariate_vanishing_division(poly - h_hat, axes)
    if not R.is_zero():
        raise ArithmeticError("remainder after removing the side interpolant")
    return qs, h_hat


def as_multi(poly, arity=1):
    return poly.to_multi(arity) if isinstance(poly, UniPoly) else poly

