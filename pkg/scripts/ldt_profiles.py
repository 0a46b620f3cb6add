"""Agreement profiles of corrupted codewords and inclusion-graph spectra.

Prints, for a range of corruption counts, how many lines (or planes) keep
each level of agreement with the code, and the second singular values of
the small inclusion graphs under both graph models.
"""
import argparse
from fractions import Fraction
from itertools import product

import numpy as np

from rbriop.field_tower import default_tower
from rbriop.ldt_lab import inclusion_graph_sigma, line_agreement_profile, plane_agreement_profile
from rbriop.poly_core import EvalTable, Grid, MultiPoly


def corrupted(q_bits, m, degree, corrupt, rng):
    F = default_tower().field(q_bits)
    terms = {e: int(rng.integers(0, F.size)) for e in product(range(degree + 1), repeat=m) if sum(e) <= degree}
    table = EvalTable.from_poly(MultiPoly(F, m, terms), Grid([np.arange(F.size)] * m))
    idx = rng.choice(table.domain.size, size=corrupt, replace=False)
    table.values[idx] ^= rng.integers(1, F.size, corrupt)
    return table


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--degree", type=int, default=2)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)

    print("# lines of F_16^2, RS degree", args.degree)
    for corrupt in (0, 1, 2, 8, 32, 64, 128):
        prof = line_agreement_profile(corrupted(4, 2, args.degree, corrupt, rng), args.degree)
        mean = sum(prof.agreements, Fraction(0)) / prof.flats
        hi = prof.tail(Fraction(15, 16))[1]
        print(f"corrupt={corrupt:>3} lines={prof.flats} mean_agreement={float(mean):.4f} "
              f"frac>=15/16={float(hi):.4f}")

    print("# planes of F_4^3, total degree", args.degree)
    for corrupt in (0, 1, 4, 16, 32):
        prof = plane_agreement_profile(corrupted(2, 3, args.degree, corrupt, rng), args.degree)
        mean = sum(prof.agreements, Fraction(0)) / prof.flats
        print(f"corrupt={corrupt:>3} planes={prof.flats} mean_agreement={float(mean):.4f} "
              f"hist={{{', '.join(f'{a}: {n}' for a, n in sorted(prof.hist.items()))}}}")

    print("# second singular values over F_4")
    for a, b, m in ((1, 0, 2), (2, 0, 3), (1, 0, 3), (2, 1, 3)):
        row = [f"flat={a} small={b} m={m}"]
        for model in (("param", "flats") if b == 0 else ("flats",)):
            row.append(f"{model}={inclusion_graph_sigma(a, b, 2, m, model=model):.6f}")
        print(" ".join(row))


if __name__ == "__main__":
    main()
