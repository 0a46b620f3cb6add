"""How often does replay verification catch one altered transcript value?

Takes honest R1CS transcripts, flips a single value in either a table
message (tag O) or a plain message (tag P), and replays the verifier.
Table entries are mostly never queried, so a single flip there is usually
invisible; plain values are all read and checked.
"""
import argparse
from collections import Counter

import numpy as np

from rbriop.field_tower import default_tower
from rbriop.iop_framework import Transcript, TranscriptError, preset, seed_from_int
from rbriop.r1cs import generate, prove, verify


def flip_one(data, tag, rng, tower):
    tr = Transcript.from_bytes(data, tower)
    entries = [e for e in tr.entries if e.tag == tag]
    e = entries[int(rng.integers(0, len(entries)))]
    if tag == "O":
        vals = e.payload.values.copy()
        vals[int(rng.integers(0, len(vals)))] ^= int(rng.integers(1, tr.F.size))
        e.payload.values = vals
    else:
        vals = e.payload.copy()
        vals[int(rng.integers(0, len(vals)))] ^= int(rng.integers(1, tr.F.size))
        e.payload = vals
    return tr.to_bytes(), e.name


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--transcripts", type=int, default=5)
    ap.add_argument("--flips", type=int, default=20, help="flips per transcript and tag")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    tower = default_tower()
    F = tower.field(16)
    params = preset("desk27")
    rng = np.random.default_rng(args.seed)
    tally = {tag: Counter() for tag in "OP"}
    caught_at = Counter()
    for t in range(args.transcripts):
        inst, w = generate(F, 27, seed=t)
        data = prove(params, seed_from_int(t), inst, w).transcript.to_bytes()
        for tag in "OP":
            for _ in range(args.flips):
                bad, name = flip_one(data, tag, rng, tower)
                try:
                    res = verify(inst, bad, tower)
                    outcome = "accept" if res.accepted else "reject"
                    if not res.accepted:
                        caught_at[(tag, res.verdict.reason)] += 1
                except TranscriptError:
                    outcome = "malformed"
                tally[tag][outcome] += 1
    for tag, label in (("O", "table value"), ("P", "plain value")):
        n = sum(tally[tag].values())
        rej = tally[tag]["reject"] + tally[tag]["malformed"]
        print(f"flip {label}: runs={n} rejected={rej} rate={rej / n:.3f} {dict(tally[tag])}")
    for (tag, why), n in caught_at.most_common(8):
        print(f"  {tag} caught by {why!r}: {n}")


if __name__ == "__main__":
    main()
