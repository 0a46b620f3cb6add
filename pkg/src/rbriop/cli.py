"""Command line: gen, prove, verify, selftest, ldt, params.

verify exits 0 on accept, 1 on reject and 2 on malformed input.
"""
import sys
import time
from dataclasses import replace

import click
import numpy as np

from .codes import CodeSpec
from .field_tower import default_tower
from .iop_framework import (AdversaryScript, PolyIopSpec, TranscriptError, check_compile_requirements,
                            describe, format_requirements, preset, seed_from_hex, seed_from_int)
from .poly_core import Grid

DEFAULT_SEED = "00" * 32


def _params(preset_name, lam):
    try:
        p = preset(preset_name)
    except ValueError as e:
        raise click.BadParameter(str(e), param_hint="--preset") from None
    if lam is not None:
        try:
            p = replace(p, lam=lam)
        except ValueError as e:
            raise click.BadParameter(str(e), param_hint="--lambda") from None
    return p


def _seed(text):
    try:
        return seed_from_hex(text)
    except ValueError as e:
        raise click.BadParameter(str(e), param_hint="--seed") from None


preset_opt = click.option("--preset", "preset_name", default="desk27", show_default=True,
                          help="Parameter preset.")
lambda_opt = click.option("--lambda", "lam", type=int, default=None, help="Override the security parameter.")
seed_opt = click.option("--seed", default=DEFAULT_SEED, show_default=True, help="Verifier seed, 64 hex digits.")


@click.group()
def main():
    """Round-by-round sound IOPs for low-degree codes and R1CS."""


# --------------------------------------------------------------------------
# gen / prove / verify

@main.command()
@click.option("--n", type=int, default=27, show_default=True, help="Number of variables, |H|^3.")
@seed_opt
@click.option("--unsat", is_flag=True, help="Make the constant constraint unsatisfiable.")
@click.option("--out", required=True, help="Instance file.")
@click.option("--witness-out", default=None, help="Witness file (default: <out>.wit).")
def gen(n, seed, unsat, out, witness_out):
    """Generate an R1CS instance and a witness."""
    from .r1cs import generate, subgroup_for, write_instance, write_witness
    tower = default_tower()
    F = tower.field(16)
    try:
        subgroup_for(F, n)
    except ValueError as e:
        raise click.BadParameter(str(e), param_hint="--n") from None
    rng_seed = int.from_bytes(_seed(seed), "big")
    inst, w = generate(F, n, seed=rng_seed, unsat=unsat)
    write_instance(inst, out)
    write_witness(w, F, witness_out or out + ".wit")
    click.echo(f"wrote {out} and {witness_out or out + '.wit'}")


@main.command()
@click.argument("instance")
@click.argument("witness")
@seed_opt
@preset_opt
@lambda_opt
@click.option("--adversary", "adv_path", default=None, help="Adversary script file.")
@click.option("--out", required=True, help="Transcript file.")
def prove(instance, witness, seed, preset_name, lam, adv_path, out):
    """Run the prover against the verifier and write the transcript."""
    from .r1cs import prove as run_prove, read_instance, read_witness
    params = _params(preset_name, lam)
    tower = default_tower()
    inst = read_instance(instance, tower)
    w = read_witness(witness, inst.field)
    adv = None
    if adv_path:
        with open(adv_path) as fh:
            adv = AdversaryScript.from_text(fh.read())
    t0 = time.perf_counter()
    res = run_prove(params, _seed(seed), inst, w, adversary=adv)
    with open(out, "wb") as fh:
        fh.write(res.transcript.to_bytes())
    verdict = "accept" if res.accepted else f"reject ({res.verdict.where}: {res.verdict.reason})"
    click.echo(f"{verdict}; queries {dict(sorted(res.counts.items()))}; {time.perf_counter() - t0:.2f}s")


@main.command()
@click.argument("instance")
@click.argument("proof")
def verify(instance, proof):
    """Replay the verifier on a transcript.  Exit 0 accept, 1 reject, 2 malformed."""
    from .r1cs import read_instance, verify as run_verify
    tower = default_tower()
    try:
        inst = read_instance(instance, tower)
        with open(proof, "rb") as fh:
            data = fh.read()
        res = run_verify(inst, data, tower)
    except (TranscriptError, ValueError, KeyError, OSError) as e:
        click.echo(f"malformed: {e}", err=True)
        sys.exit(2)
    if res.accepted:
        click.echo("accept")
        sys.exit(0)
    click.echo(f"reject: {res.verdict.where}: {res.verdict.reason}")
    sys.exit(1)


# --------------------------------------------------------------------------
# selftest

@main.command()
@click.argument("tier", type=click.Choice(["fast", "full"]), default="fast")
def selftest(tier):
    """Run a quick battery of checks and print one line per check."""
    records = run_selftest(tier)
    for r in records:
        click.echo(r.line())
    sys.exit(0 if all(r.passed for r in records) else 1)


def run_selftest(tier):
    from .ldt_lab import Record, inclusion_graph_sigma
    from .lowrate import expected_rs, run_rs_iopp
    from .poly_core import EvalTable, MultiPoly, UniPoly
    from .r1cs import expected_r1cs, generate, prove as run_prove, verify as run_verify
    from .sumcheck import run_sumcheck, subgroup_sum

    full = tier == "full"
    p = preset("desk27")
    tower = default_tower()
    F = tower.field(p.qp_bits)
    rng = np.random.default_rng(7)
    out = []

    for bits in (2, 4):
        G = tower.field(bits)
        a, b, c = (x.ravel() for x in np.meshgrid(*[np.arange(G.size)] * 3, indexing="ij"))
        ok = (np.array_equal(G.mul(a, G.mul(b, c)), G.mul(G.mul(a, b), c))
              and np.array_equal(G.mul(a, b ^ c), G.mul(a, b) ^ G.mul(a, c))
              and all(G.mul(x, G.inv(x)) == 1 for x in range(1, G.size)))
        out.append(Record("field-laws", {"q": G.size}, ok, True, ok))

    H = F.multiplicative_subgroup(p.h_size)
    n = 2000 if full else 200
    bad = 0
    for _ in range(n):
        f = UniPoly(F, [int(v) for v in rng.integers(0, F.size, len(H))])
        bad += subgroup_sum(f, H) != F.mul(f(0), len(H) & 1)
    out.append(Record("subgroup-sum", {"polys": n}, bad, 0, bad == 0))

    f = MultiPoly(F, 3, {(1, 2, 0): 5, (0, 0, 2): 9, (0, 0, 0): 3})
    target = subgroup_sum(f, H, 3)
    runs = 20 if full else 5
    acc = sum(run_sumcheck(p, seed_from_int(i), f, H, target).accepted for i in range(runs))
    out.append(Record("sumcheck-honest", {"runs": runs}, acc, runs, acc == runs))
    rej = sum(not run_sumcheck(p, seed_from_int(i), f, H, target ^ 1).accepted for i in range(runs))
    out.append(Record("sumcheck-wrong-sum", {"runs": runs}, rej, runs, rej == runs))

    E = tower.subfield_elements(p.q_enc_bits, p.qp_bits)
    dom = Grid([E], [f"gf{p.q_enc_bits}"])
    for d in ((4, 16) if full else (4,)):
        poly = UniPoly(F, [int(v) for v in rng.integers(0, F.size, d + 1)])
        table = EvalTable(F, dom, poly(E))
        exp = expected_rs(p, d)
        res = [run_rs_iopp(p, seed_from_int(i), table, d) for i in range(runs)]
        ok = all(r.accepted for r in res)
        counts = all((r.counts["input"], r.counts["proof"], r.counts["plain"]) == (exp.input, exp.proof, exp.plain)
                     for r in res)
        out.append(Record("rs-honest", {"d": d, "runs": runs}, sum(r.accepted for r in res), runs, ok))
        out.append(Record("rs-query-counts", {"d": d}, (exp.input, exp.proof, exp.plain), "formula", counts))
        far = EvalTable(F, dom, rng.integers(0, F.size, len(E)))
        rej = sum(not run_rs_iopp(p, seed_from_int(i), far, d).accepted for i in range(runs))
        out.append(Record("rs-far", {"d": d, "runs": runs}, rej, runs, rej == runs))

    s1 = inclusion_graph_sigma(1, 0, 2, 2)
    out.append(Record("sigma-lines-points", {"q": 4, "m": 2}, s1, 0.5, abs(s1 - 0.5) < 1e-9))
    s2 = inclusion_graph_sigma(2, 0, 2, 3)
    out.append(Record("sigma-planes-points", {"q": 4, "m": 3}, s2, 0.25, abs(s2 - 0.25) < 1e-9))

    inst, w = generate(F, 27, seed=1)
    t0 = time.perf_counter()
    res = run_prove(p, seed_from_int(0), inst, w)
    dt = time.perf_counter() - t0
    exp = expected_r1cs(p)
    out.append(Record("r1cs-honest", {"n": 27, "seconds": f"{dt:.2f}"}, res.accepted, True, res.accepted))
    out.append(Record("r1cs-query-counts", {"n": 27}, (res.counts["proof"], res.counts["plain"]),
                      (exp.proof, exp.plain), (res.counts["proof"], res.counts["plain"]) == (exp.proof, exp.plain)))
    rep = run_verify(inst, res.transcript.to_bytes(), tower)
    out.append(Record("r1cs-replay", {"n": 27}, rep.accepted, True, rep.accepted))
    bad_inst, bad_w = generate(F, 27, seed=1, unsat=True)
    r = run_prove(p, seed_from_int(0), bad_inst, bad_w)
    out.append(Record("r1cs-unsat", {"n": 27}, r.accepted, False, not r.accepted))

    if full:
        from itertools import product as prod

        from .constrate import run_rm_iopp, trivariate_code
        from .iop_framework import Session
        sess = Session(p, seed_from_int(0))
        code = trivariate_code(sess, 12)
        terms = {e: int(rng.integers(0, F.size)) for e in prod(range(13), repeat=3) if sum(e) <= 12}
        table = EvalTable.from_poly(MultiPoly(F, 3, terms), code.domain)
        acc = sum(run_rm_iopp(p, seed_from_int(i), table, 12).accepted for i in range(3))
        out.append(Record("rm-honest", {"deg": 12, "runs": 3}, acc, 3, acc == 3))
    return out


# --------------------------------------------------------------------------
# ldt

@main.command()
@click.argument("kind", type=click.Choice(["lines", "planes", "sigma"]))
@click.option("--q-bits", type=int, default=None, help="Field GF(2^b) (lines: 4, planes and sigma: 2).")
@click.option("--m", type=int, default=None, help="Ambient dimension (lines: 2, planes: 3, sigma: flat-dim + 1).")
@click.option("--degree", type=int, default=2, show_default=True)
@click.option("--corrupt", type=int, default=0, show_default=True, help="Points of a codeword to corrupt.")
@click.option("--flat-dim", type=int, default=1, show_default=True, help="sigma: dimension of the larger flat.")
@click.option("--small-dim", type=int, default=0, show_default=True, help="sigma: dimension of the smaller flat.")
@click.option("--model", type=click.Choice(["param", "flats"]), default=None, help="sigma: graph model.")
@click.option("--seed", type=int, default=0, show_default=True)
def ldt(kind, q_bits, m, degree, corrupt, flat_dim, small_dim, model, seed):
    """Agreement profiles of a corrupted codeword, or inclusion-graph spectra."""
    from .ldt_lab import inclusion_graph_sigma, line_agreement_profile, plane_agreement_profile
    if kind == "sigma":
        qb, mm = q_bits or 2, m or flat_dim + 1
        try:
            s = inclusion_graph_sigma(flat_dim, small_dim, qb, mm, model=model)
        except ValueError as e:
            raise click.UsageError(str(e))
        click.echo(f"sigma flat={flat_dim} small={small_dim} q={1 << qb} m={mm} "
                   f"model={model or ('param' if small_dim == 0 else 'flats')} value={s:.12f}")
        return
    qb = q_bits or (4 if kind == "lines" else 2)
    mm = m or (2 if kind == "lines" else 3)
    table = _corrupted_codeword(qb, mm, degree, corrupt, seed)
    prof = line_agreement_profile(table, degree) if kind == "lines" else plane_agreement_profile(table, degree)
    click.echo(f"{kind} q={1 << qb} m={mm} degree={degree} corrupt={corrupt} seed={seed} flats={prof.flats}")
    for ln in prof.lines():
        click.echo(ln)


def _corrupted_codeword(q_bits, m, degree, corrupt, seed):
    from itertools import product
    from .poly_core import EvalTable, MultiPoly
    F = default_tower().field(q_bits)
    rng = np.random.default_rng(seed)
    terms = {e: int(rng.integers(0, F.size)) for e in product(range(degree + 1), repeat=m) if sum(e) <= degree}
    table = EvalTable.from_poly(MultiPoly(F, m, terms), Grid([np.arange(F.size)] * m))
    idx = rng.choice(table.domain.size, size=min(corrupt, table.domain.size), replace=False)
    table.values[idx] ^= rng.integers(1, F.size, len(idx))
    return table


# --------------------------------------------------------------------------
# params

def requirement_specs(params, tower):
    """(spec, eps) for every Poly-IOP the compiler is applied to."""
    F = tower.field(params.qp_bits)
    enc = tower.subfield_elements(params.q_enc_bits, params.qp_bits)
    qax = tower.subfield_elements(params.q_bits, params.qp_bits)
    e1, e2, q3 = Grid([enc]), Grid([enc, enc]), Grid([qax] * 3)
    out = []
    for d in (16, 4):
        k = params.level(d)
        s = int(round(d ** 0.5))
        out.append((PolyIopSpec(f"RS-Poly d={d}", [[("Q", CodeSpec("RM_individual", (s, s), e2, F), params.T_rs(d))]]),
                    params.eps_k(k)))
        out.append((PolyIopSpec(f"iRM-Poly D={d}", [
            [("Q", CodeSpec("RM_total", 2 * d, e2, F), params.T_irm(d) + 2)],
            [("F1", CodeSpec("RS", d, e1, F), 1), ("F2", CodeSpec("RS", d, e1, F), 1)]]), params.eps_k(k)))
    deg = 6 * params.d_r1cs
    out.append((PolyIopSpec("RM-Poly", [[(f"Q{i}", CodeSpec("RM_total", deg, e2, F), params.rm_t)
                                         for i in range(params.rm_T)]]), params.eps_comp(deg)))
    d = params.d_r1cs
    tri = [(nm, CodeSpec("RM_total", dg, q3, F), 2) for nm, dg in zip(
        ("fA", "fB", "fC", "h1", "h2", "h3", "g1", "g2", "g3"),
        (3 * d,) * 3 + (3 * d - 1,) * 3 + (6 * d - 3,) * 3)]
    H = params.h_size
    uni = [(f"{nm}{i}", CodeSpec("RS", dg, e1, F), 1) for i in (1, 2, 3)
           for nm, dg in (("Fhat", 6 * d - H), ("Rhat", H - 2))]
    out.append((PolyIopSpec("R1CS-Poly", [tri, [("F1", CodeSpec("RS", 6 * d, e1, F), 2)],
                                          [("F2", CodeSpec("RS", 6 * d, e1, F), 2)], uni]),
                {None: params.eps0_prime, **{nm: params.eps0 for nm, _, _ in tri}}))
    return out


@main.command()
@preset_opt
@lambda_opt
def params(preset_name, lam):
    """Print a preset's derived quantities and compile-requirement margins."""
    p = _params(preset_name, lam)
    click.echo(f"preset {p.name}")
    for name, val in describe(p):
        click.echo(f"  {name} = {val:.6g}" if isinstance(val, float) else f"  {name} = {val}")
    tower = default_tower()
    for spec, eps in requirement_specs(p, tower):
        click.echo(f"requirements {spec.name}")
        rows = check_compile_requirements(p, spec, eps)
        for ln in format_requirements(rows):
            click.echo(f"  {ln}")


if __name__ == "__main__":
    main()
