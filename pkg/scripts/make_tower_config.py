"""Regenerate the checked-in tower configuration.

The top field GF(2^32) uses a fixed primitive polynomial with generator x.
Every subfield GF(2^b) is defined by the minimal polynomial of
x^((2^32 - 1) / (2^b - 1)), again with generator x, so the generator maps
g_b -> g_B^((2^B - 1) / (2^b - 1)) are field homomorphisms along the tower.
"""
import sys
from pathlib import Path

TOP = 32
TOP_MODULUS = (1 << 32) | (1 << 22) | (1 << 2) | (1 << 1) | 1
SUBFIELDS = (2, 4, 8, 16)
FACTORS_2_32_MINUS_1 = (3, 5, 17, 257, 65537)


def clmul_mod(a, b, n, modulus):
    r = 0
    while b:
        if b & 1:
            r ^= a
        b >>= 1
        a <<= 1
        if a >> n:
            a ^= modulus
    return r


def power(a, e, n, modulus):
    r = 1
    while e:
        if e & 1:
            r = clmul_mod(r, a, n, modulus)
        a = clmul_mod(a, a, n, modulus)
        e >>= 1
    return r


def minimal_polynomial(gamma, b):
    # product of (X - gamma^(2^i)) for i < b, coefficients land in GF(2)
    poly = [1]
    conj = gamma
    for _ in range(b):
        nxt = [0] * (len(poly) + 1)
        for i, c in enumerate(poly):
            nxt[i + 1] ^= c
            nxt[i] ^= clmul_mod(c, conj, TOP, TOP_MODULUS)
        poly = nxt
        conj = clmul_mod(conj, conj, TOP, TOP_MODULUS)
    mask = 0
    for i, c in enumerate(poly):
        if c not in (0, 1):
            raise RuntimeError("minimal polynomial left GF(2)")
        mask |= c << i
    return mask


def main(out):
    order = (1 << TOP) - 1
    for p in FACTORS_2_32_MINUS_1:
        if power(2, order // p, TOP, TOP_MODULUS) == 1:
            raise RuntimeError("top modulus is not primitive")
    lines = ["# binary tower: log2_size irreducible_mask generator_hex"]
    for b in SUBFIELDS:
        gamma = power(2, order // ((1 << b) - 1), TOP, TOP_MODULUS)
        lines.append(f"field {b} {minimal_polynomial(gamma, b):#x} 2")
    lines.append(f"field {TOP} {TOP_MODULUS:#x} 2")
    # self-test vectors: products in each field and generator images
    lines.append("# vector log2_size a b a*b")
    for b in SUBFIELDS + (TOP,):
        mod = TOP_MODULUS if b == TOP else None
        if mod is None:
            gamma = power(2, order // ((1 << b) - 1), TOP, TOP_MODULUS)
            mod = minimal_polynomial(gamma, b)
        width = (b + 3) // 4
        a = 0x9E3779B9 & ((1 << b) - 1) or 1
        c = 0x7F4A7C15 & ((1 << b) - 1) or 1
        lines.append(f"vector {b} {a:0{width}x} {c:0{width}x} {clmul_mod(a, c, b, mod):0{width}x}")
    Path(out).write_text("\n".join(lines) + "\n")
    print("\n".join(lines))


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "src/rbriop/data/tower.cfg")
