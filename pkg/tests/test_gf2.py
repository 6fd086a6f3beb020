"""Field arithmetic tests.

The reference oracle here is an independent schoolbook implementation
(naive shift-and-add multiply, bit-by-bit long division) so every fast-path
result is cross-checked against a second route.
"""

import pytest
from hypothesis import given, settings, strategies as st

from prekem.errors import FieldMismatchError
from prekem.gf2 import (
    EXTRA_POLYS,
    POLY_TABLE,
    Fe,
    FieldCtx,
    block,
    field,
    find_irreducible,
)


def naive_mul(a: int, b: int, m: int, poly: int) -> int:
    """Schoolbook carryless multiply then bit-by-bit reduction."""
    prod = 0
    for i in range(b.bit_length()):
        if (b >> i) & 1:
            prod ^= a << i
    for i in range(prod.bit_length() - 1, m - 1, -1):
        if (prod >> i) & 1:
            prod ^= poly << (i - m)
    return prod


class TestMulOracle:
    def test_full_table_m3(self):
        f = field(3)
        for a in range(8):
            for b in range(8):
                assert f.mul(a, b) == naive_mul(a, b, 3, f.poly)

    def test_full_table_m4(self):
        f = field(4)
        for a in range(16):
            for b in range(16):
                assert f.mul(a, b) == naive_mul(a, b, 4, f.poly)

    def test_spec_values_m3(self):
        f = field(3)
        assert f.poly == 0b1011
        assert f.mul(0b010, 0b011) == 0b110
        assert f.mul(0b010, 0b101) == 0b001
        assert f.pow(0b010, 3) == 0b011

    @given(a=st.integers(0, 2**61 - 1), b=st.integers(0, 2**61 - 1))
    @settings(max_examples=60)
    def test_against_naive_m61(self, a, b):
        f = field(61)
        assert f.mul(a, b) == naive_mul(a, b, 61, f.poly)


class TestInverse:
    def test_exhaustive_search_m3(self):
        f = field(3)
        for a in range(1, 8):
            # independent route: scan for the inverse
            inverses = [b for b in range(8) if naive_mul(a, b, 3, f.poly) == 1]
            assert inverses == [f.inv(a)]

    @pytest.mark.parametrize("m", [1, 2, 5, 8])
    def test_all_inverses(self, m):
        f = field(m)
        for a in range(1, 1 << m):
            assert f.mul(a, f.inv(a)) == 1

    def test_inv_one(self):
        assert field(7).inv(1) == 1

    def test_inv_zero_rejected(self):
        with pytest.raises(ZeroDivisionError):
            field(7).inv(0)


class TestFieldLaws:
    @pytest.mark.parametrize("m", [2, 3, 4])
    def test_exhaustive_ring_laws(self, m):
        f = field(m)
        els = range(1 << m)
        for a in els:
            for b in els:
                assert f.add(a, b) == f.add(b, a)
                assert f.mul(a, b) == f.mul(b, a)
                for c in els:
                    assert f.mul(a, f.mul(b, c)) == f.mul(f.mul(a, b), c)
                    assert f.mul(a, f.add(b, c)) == f.add(f.mul(a, b), f.mul(a, c))

    @given(
        a=st.integers(0, 2**16 - 1),
        b=st.integers(0, 2**16 - 1),
        c=st.integers(0, 2**16 - 1),
    )
    @settings(max_examples=60)
    def test_property_laws_m16(self, a, b, c):
        f = field(16)
        assert f.mul(a, f.mul(b, c)) == f.mul(f.mul(a, b), c)
        assert f.mul(a, f.add(b, c)) == f.add(f.mul(a, b), f.mul(a, c))
        assert f.add(a, a) == 0
        assert f.mul(a, 1) == a

    @pytest.mark.parametrize("m", [2, 3, 4])
    def test_pow_matches_iterated_mul(self, m):
        f = field(m)
        for a in range(1 << m):
            acc = 1
            for e in range(17):
                assert f.pow(a, e) == acc
                acc = f.mul(acc, a)

    def test_pow_identities(self):
        f = field(9)
        assert f.pow(0x1AB, 0) == 1
        assert f.pow(0x1AB, 1) == 0x1AB


class TestBlock:
    def test_full_range(self):
        assert block(0b1101, 4, 1, 4) == 0b1101

    def test_msb_first(self):
        assert block(0b1101, 4, 1, 2) == 0b11
        assert block(0b1101, 4, 3, 4) == 0b01

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            block(0b1101, 4, 0, 2)
        with pytest.raises(ValueError):
            block(0b1101, 4, 3, 5)
        with pytest.raises(ValueError):
            block(0b10000, 4, 1, 2)

    @given(x=st.integers(0, 2**12 - 1), t=st.integers(1, 12))
    @settings(max_examples=50)
    def test_truncation_idempotent(self, x, t):
        head = block(x, 12, 1, t)
        # zero-extend back to 12 bits, truncate again
        assert block(head << (12 - t), 12, 1, t) == head


class TestContexts:
    def test_mismatch_rejected(self):
        with pytest.raises(FieldMismatchError):
            Fe(field(3), 1) + Fe(field(4), 1)
        with pytest.raises(FieldMismatchError):
            Fe(field(3), 1) * Fe(field(3, 0b1101), 1)

    def test_fe_operators(self):
        f = field(3)
        a, b = f.fe(0b010), f.fe(0b011)
        assert int(a + b) == 0b001
        assert int(a * b) == 0b110
        assert int(a**3) == 0b011
        assert int(a.inv()) == 0b101

    def test_out_of_range_element(self):
        with pytest.raises(ValueError):
            field(3).mul(8, 1)

    def test_bad_poly_rejected(self):
        with pytest.raises(ValueError):
            FieldCtx(3, 0b1111)  # x^3+x^2+x+1 = (x+1)(x^2+1): reducible
        with pytest.raises(ValueError):
            FieldCtx(3, 0b10011)  # degree 4, not 3

    def test_custom_poly_accepted(self):
        # x^3 + x^2 + 1, the other degree-3 irreducible
        f = field(3, 0b1101)
        assert all(f.mul(a, f.inv(a)) == 1 for a in range(1, 8))


class TestSerialization:
    @pytest.mark.parametrize("m", [3, 8, 13, 61])
    def test_round_trip(self, m):
        f = field(m)
        for a in (0, 1, (1 << m) - 1, 0b1010101 % (1 << m)):
            data = f.to_bytes(a)
            assert len(data) == (m + 7) // 8
            assert f.from_bytes(data) == a

    def test_big_endian(self):
        assert field(16).to_bytes(0x0102) == b"\x01\x02"

    def test_wrong_length(self):
        with pytest.raises(ValueError):
            field(16).from_bytes(b"\x01")


class TestPolyTable:
    def test_known_anchors(self):
        # published low-weight values: AES field, GCM field
        assert POLY_TABLE[8] == 0x11B
        assert POLY_TABLE[128] == (1 << 128) | 0x87

    def test_table_polys_irreducible_sympy(self):
        from sympy.polys.domains import ZZ
        from sympy.polys.galoistools import gf_irreducible_p

        for m in (2, 3, 8, 16, 31, 32, 48, 64, 80, 96, 128, 256):
            f = POLY_TABLE[m]
            coeffs = [ZZ((f >> i) & 1) for i in range(m, -1, -1)]
            assert gf_irreducible_p(coeffs, 2, ZZ), m

    def test_extra_polys_irreducible_frobenius(self):
        # Independent route (Rabin's criterion with this file's own schoolbook
        # arithmetic): x^(2^m) == x mod f, and gcd(x^(2^(m/p)) + x, f) = 1 for
        # every prime p | m.
        def sq_mod(r, f, m):
            prod = 0
            for i in range(r.bit_length()):
                if (r >> i) & 1:
                    prod ^= r << i
            for i in range(prod.bit_length() - 1, m - 1, -1):
                if (prod >> i) & 1:
                    prod ^= f << (i - m)
            return prod

        def poly_gcd(a, b):
            while b:
                while a.bit_length() >= b.bit_length() and a:
                    a ^= b << (a.bit_length() - b.bit_length())
                a, b = b, a
            return a

        def primes(m):
            out, d = set(), 2
            while d * d <= m:
                while m % d == 0:
                    out.add(d)
                    m //= d
                d += 1
            if m > 1:
                out.add(m)
            return out

        for m, f in EXTRA_POLYS.items():
            assert f.bit_length() - 1 == m
            r, chain = 2, {0: 2}
            for k in range(1, m + 1):
                r = sq_mod(r, f, m)
                chain[k] = r
            assert chain[m] == 2, f"x^(2^{m}) != x"
            for p in primes(m):
                assert poly_gcd(f, chain[m // p] ^ 2) == 1, f"subfield gcd at {m}/{p}"

    def test_table_minimality_small(self):
        # no irreducible candidate below the table entry at equal or lower weight
        for m in (4, 8, 12):
            entry = POLY_TABLE[m]
            weight = bin(entry).count("1")
            for cand in range((1 << m) + 1, entry, 2):
                if cand.bit_length() - 1 != m:
                    continue
                if _trial_irreducible(cand):
                    assert bin(cand).count("1") > weight, (m, bin(cand))

    def test_search_for_gap_width(self):
        # a width outside the table: search result must be irreducible per an
        # independent route and usable as a context
        from sympy.polys.domains import ZZ
        from sympy.polys.galoistools import gf_irreducible_p

        f = find_irreducible(66)
        assert f.bit_length() - 1 == 66
        coeffs = [ZZ((f >> i) & 1) for i in range(66, -1, -1)]
        assert gf_irreducible_p(coeffs, 2, ZZ)
        ctx = field(66)
        assert ctx.mul(3, ctx.inv(3)) == 1


def _trial_irreducible(f: int) -> bool:
    m = f.bit_length() - 1
    for d in range(2, 1 << (m // 2 + 1)):
        if d.bit_length() - 1 < 1 or d.bit_length() - 1 > m // 2:
            continue
        r = f
        while r.bit_length() >= d.bit_length():
            r ^= d << (r.bit_length() - d.bit_length())
        if r == 0:
            return False
    return True
