import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rbriop.field_tower import GF, FieldElem, Tower, default_tower


def schoolbook_mul(a, b, n, modulus):
    """Independent reference: full carry-less product, then long division."""
    prod = 0
    for i in range(n):
        if (b >> i) & 1:
            prod ^= a << i
    for i in range(2 * n - 2, n - 1, -1):
        if (prod >> i) & 1:
            prod ^= modulus << (i - n)
    return prod


def all_triples(G):
    return (x.ravel() for x in np.meshgrid(*[np.arange(G.size)] * 3, indexing="ij"))


@pytest.mark.parametrize("bits", [2, 4])
def test_field_laws_exhaustive(tower, bits):
    G = tower.field(bits)
    a, b, c = all_triples(G)
    assert np.array_equal(G.mul(a, G.mul(b, c)), G.mul(G.mul(a, b), c))
    assert np.array_equal(G.mul(a, b ^ c), G.mul(a, b) ^ G.mul(a, c))
    assert np.array_equal(G.mul(a, b), G.mul(b, a))
    for x in range(1, G.size):
        assert G.mul(x, G.inv(x)) == 1


@pytest.mark.parametrize("bits", [2, 4, 8, 16])
def test_table_mul_matches_schoolbook(tower, bits):
    G = tower.field(bits)
    rng = np.random.default_rng(bits)
    for a, b in rng.integers(0, G.size, (300, 2)):
        assert G.mul(int(a), int(b)) == schoolbook_mul(int(a), int(b), G.n, G.modulus)


def test_wide_field_matches_schoolbook(tower):
    G = tower.field(32)
    assert G.modulus == 0x100400007
    rng = np.random.default_rng(5)
    a = rng.integers(0, G.size, 200, dtype=np.int64)
    b = rng.integers(0, G.size, 200, dtype=np.int64)
    got = G.mul(a, b)
    for x, y, z in zip(a, b, got):
        assert int(z) == schoolbook_mul(int(x), int(y), 32, G.modulus)
        assert G.mul(int(x), int(y)) == int(z)


@given(st.integers(1, 2 ** 16 - 1), st.integers(0, 2 ** 16 - 1))
def test_division_inverts_multiplication(a, b):
    F = default_tower().field(16)
    assert F.div(F.mul(a, b), a) == b


@given(st.integers(0, 2 ** 16 - 1), st.integers(-50, 200))
def test_pow_matches_repeated_multiplication(a, e):
    F = default_tower().field(16)
    if a == 0 and e < 0:
        with pytest.raises(ZeroDivisionError):
            F.pow(a, e)
        return
    acc = 1
    base = a if e >= 0 else F.inv(a)
    for _ in range(abs(e)):
        acc = F.mul(acc, base)
    assert F.pow(a, e) == acc


def test_frobenius_fixes_every_element(tower):
    F = tower.field(16)
    x = F.elements()
    y = x
    for _ in range(16):
        y = F.mul(y, y)
    assert np.array_equal(x, y)


def test_inverse_of_zero_raises(F):
    with pytest.raises(ZeroDivisionError):
        F.inv(0)
    with pytest.raises(ZeroDivisionError):
        F.inv(np.array([1, 0]))


@pytest.mark.parametrize("small,big", [(2, 4), (2, 16), (4, 8), (4, 16), (8, 16), (16, 32)])
def test_embedding_is_injective_homomorphism(tower, small, big):
    S, B = tower.field(small), tower.field(big)
    rng = np.random.default_rng(small * 100 + big)
    a = rng.integers(0, S.size, 400, dtype=np.int64)
    b = rng.integers(0, S.size, 400, dtype=np.int64)
    e = lambda v: tower.embed(v, small, big)
    assert np.array_equal(e(S.mul(a, b)), B.mul(e(a), e(b)))
    assert np.array_equal(e(a ^ b), e(a) ^ e(b))
    assert tower.embed(1, small, big) == 1
    if small <= 8:
        img = tower.subfield_elements(small, big)
        assert len(set(img.tolist())) == S.size
        assert np.all(tower.in_subfield(img, small, big))


def test_subfield_count(tower):
    F = tower.field(16)
    assert int(np.count_nonzero(tower.in_subfield(F.elements(), 8, 16))) == 256
    assert int(np.count_nonzero(tower.in_subfield(F.elements(), 4, 16))) == 16


def test_embedding_commutes_through_tower(tower):
    x = np.arange(16, dtype=np.int64)
    direct = tower.embed(x, 4, 16)
    stepped = tower.embed(tower.embed(x, 4, 8), 8, 16)
    assert np.array_equal(direct, stepped)


def test_not_a_subfield(tower):
    with pytest.raises(ValueError):
        tower.embedding_matrix(8, 4)


def test_subgroup_orders(F):
    for order in (1, 3, 5, 15, 17, 255, 257):
        H = F.multiplicative_subgroup(order)
        assert len(set(H.tolist())) == order
        assert all(F.pow(int(h), order) == 1 for h in H)
    with pytest.raises(ValueError):
        F.multiplicative_subgroup(7)


def test_hex_roundtrip_and_strictness(F):
    assert F.to_hex(0xab) == "00ab"
    assert F.from_hex("00ab") == 0xab
    for bad in ("ab", "00AB", "10000", "zzzz"):
        with pytest.raises(ValueError):
            F.from_hex(bad)


def test_field_elem_arithmetic(F):
    a, b = FieldElem(7, F), FieldElem(300, F)
    assert (a * b).bits == F.mul(7, 300)
    assert (a + b).bits == 7 ^ 300
    assert ((a / b) * b).bits == 7
    assert (a ** 3).bits == F.pow(7, 3)
    assert FieldElem.from_hex(a.hex(), F) == a
    with pytest.raises(ValueError):
        FieldElem(1 << 16, F)
    G = default_tower().field(8)
    with pytest.raises(ValueError):
        a + FieldElem(1, G)


def test_tower_config_errors():
    with pytest.raises(ValueError):
        Tower.from_text("field 4 13\n")
    t = Tower.from_text("field 4 13 2\nvector 4 2 3 5\n")
    with pytest.raises(ValueError):
        t.self_test()


def test_tower_self_test_vectors(tower):
    assert tower.vectors
    assert tower.self_test()


def test_bad_generator_rejected():
    # x^4 + x^3 + x^2 + x + 1 is irreducible but x has order 5
    with pytest.raises(ValueError):
        GF(4, 0b11111, 2)


@settings(max_examples=50)
@given(st.lists(st.integers(0, 2 ** 16 - 1), min_size=1, max_size=20))
def test_xor_sum_matches_fold(vals):
    F = default_tower().field(16)
    acc = 0
    for v in vals:
        acc = F.add(acc, v)
    assert int(F.xor_sum(vals)) == acc
