"""Rejection rates and doomed-state transitions for the scripted adversaries.

    python3 scripts/adversary_suite.py rs --runs 100
    python3 scripts/adversary_suite.py rm --runs 20
    python3 scripts/adversary_suite.py r1cs --runs 50

rs and rm run every strategy on planted-far inputs (a codeword kept on a
fraction of the domain); r1cs runs them on unsatisfiable instances.
"""
import argparse
import time

import numpy as np

from rbriop.constrate import run_rm_iopp, trivariate_code
from rbriop.field_tower import default_tower
from rbriop.iop_framework import AdversaryScript, Deviation, Session, preset, seed_from_int
from rbriop.ldt_lab import run_adversary
from rbriop.lowrate import run_rs_iopp
from rbriop.poly_core import EvalTable, Grid, MultiPoly, UniPoly
from rbriop.r1cs import generate, prove

TABLE_KINDS = ("degree_inflation", "fill_corruption", "anchor_equivocation")


def suite(kinds):
    return [AdversaryScript("honest-strategy")] + [AdversaryScript(k, (Deviation(k),)) for k in kinds]


def rs_case(params, keep, rng):
    tower = default_tower()
    F = tower.field(params.qp_bits)
    enc = tower.subfield_elements(params.q_enc_bits, params.qp_bits)
    word = UniPoly(F, [int(v) for v in rng.integers(0, F.size, 5)])(enc)
    vals = np.where(rng.random(len(enc)) < keep, word, rng.integers(0, F.size, len(enc)))
    table = EvalTable(F, Grid([enc], [f"gf{params.q_enc_bits}"]), vals)
    return lambda adv: (lambda s: run_rs_iopp(params, s, table, 4, adversary=adv, instrument=True))


def rm_case(params, keep, rng):
    from itertools import product
    F = default_tower().field(params.qp_bits)
    code = trivariate_code(Session(params, bytes(32)), 12)
    terms = {e: int(rng.integers(0, F.size)) for e in product(range(13), repeat=3) if sum(e) <= 12}
    table = EvalTable.from_poly(MultiPoly(F, 3, terms), code.domain)
    mask = rng.random(code.domain.size) >= keep
    table.values[mask] ^= rng.integers(1, F.size, int(mask.sum()))
    return lambda adv: (lambda s: run_rm_iopp(params, s, table, 12, adversary=adv, instrument=True))


def r1cs_case(params, rng):
    F = default_tower().field(params.qp_bits)
    inst, w = generate(F, 27, seed=int(rng.integers(0, 1 << 30)), unsat=True)
    return lambda adv: (lambda s: prove(params, s, inst, w, adversary=adv, instrument=True))


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("protocol", choices=["rs", "rm", "r1cs"])
    ap.add_argument("--runs", type=int, default=50)
    ap.add_argument("--keep", type=float, default=0.1, help="fraction of the planted codeword kept (rs, rm)")
    ap.add_argument("--preset", default="desk27")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    params = preset(args.preset)
    rng = np.random.default_rng(args.seed)
    if args.protocol == "rs":
        make, strategies = rs_case(params, args.keep, rng), suite(TABLE_KINDS)
    elif args.protocol == "rm":
        make, strategies = rm_case(params, args.keep, rng), suite(TABLE_KINDS)
    else:
        make = r1cs_case(params, rng)
        strategies = [AdversaryScript("plain"),
                      AdversaryScript("witness_substitution", (Deviation("witness_substitution"),)),
                      AdversaryScript("substitution+misreport",
                                      (Deviation("witness_substitution"), Deviation("sum_misreport")))]
    print(f"protocol={args.protocol} preset={params.name} runs={args.runs} keep={args.keep}")
    for adv in strategies:
        t0 = time.perf_counter()
        seeds = [seed_from_int(args.seed * 1_000_000 + i) for i in range(args.runs)]
        stats = run_adversary(adv.name, make(adv), seeds, instrument=True)
        for ln in stats.lines():
            print(ln)
        print(f"  seconds={time.perf_counter() - t0:.1f}")


if __name__ == "__main__":
    main()
