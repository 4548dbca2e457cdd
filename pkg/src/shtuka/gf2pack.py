"""Bit-packed polynomial arithmetic over GF(2^d) for characteristic 2.

A polynomial over F_(2^d) in theta is stored as d Python integers: the
m-th integer is the bit vector of theta-exponents whose coefficient has
a 1 in the m-th F_2-coordinate.  Addition is XOR; multiplication uses
carry-less integer products recombined through the field's structure
constants.  Element indices of the tower fields are already their
F_2-coordinate bitmasks, so packing is direct.

Used to verify huge sums of factored monomials exactly at q = 2^e.
"""

from __future__ import annotations

_SPREAD = [0] * 256
for _b in range(256):
    _v = 0
    for _i in range(8):
        if _b >> _i & 1:
            _v |= 1 << (2 * _i)
    _SPREAD[_b] = _v


def _clmul(x, y):
    if x.bit_count() > y.bit_count():
        x, y = y, x
    acc = 0
    while x:
        lsb = x & -x
        acc ^= y << (lsb.bit_length() - 1)
        x &= x - 1
    return acc


def _spread(x):
    """Insert a zero bit after every bit: the square map on exponents."""
    if not x:
        return 0
    bs = x.to_bytes((x.bit_length() + 7) // 8, "little")
    out = bytearray(2 * len(bs))
    for i, b in enumerate(bs):
        v = _SPREAD[b]
        out[2 * i] = v & 0xFF
        out[2 * i + 1] = v >> 8
    return int.from_bytes(bytes(out), "little")


class PackedRing:
    """GF(2^d)[theta] with the field given by a tower level (char 2 only)."""

    def __init__(self, fld):
        # fld: an ExtField over (an ExtField over) PrimeField(2); indices
        # are F_2-coordinate masks of dimension d
        self.fld = fld
        d = 0
        size = fld.size
        while 1 << d < size:
            d += 1
        self.d = d
        self.mul_table = [[fld.mul(1 << i, 1 << j) for j in range(d)] for i in range(d)]
        self.sq_table = [fld.mul(1 << i, 1 << i) for i in range(d)]

    def zero(self):
        return [0] * self.d

    def from_poly_dict(self, d):
        comps = [0] * self.d
        for e, c in d.items():
            idx = c.i
            m = 0
            while idx:
                if idx & 1:
                    comps[m] |= 1 << e
                idx >>= 1
                m += 1
        return comps

    def add(self, A, B):
        return [a ^ b for a, b in zip(A, B)]

    def iadd(self, A, B):
        for m in range(self.d):
            A[m] ^= B[m]
        return A

    def mul(self, A, B):
        out = [0] * self.d
        for i, x in enumerate(A):
            if not x:
                continue
            for j, y in enumerate(B):
                if not y:
                    continue
                prod = _clmul(x, y)
                idx = self.mul_table[i][j]
                m = 0
                while idx:
                    if idx & 1:
                        out[m] ^= prod
                    idx >>= 1
                    m += 1
        return out

    def square(self, A):
        out = [0] * self.d
        for i, x in enumerate(A):
            if not x:
                continue
            s = _spread(x)
            idx = self.sq_table[i]
            m = 0
            while idx:
                if idx & 1:
                    out[m] ^= s
                idx >>= 1
                m += 1
        return out

    def pow(self, A, n):
        result = None
        base = A
        while n:
            if n & 1:
                result = base if result is None else self.mul(result, base)
            n >>= 1
            if n:
                base = self.square(base)
        if result is None:
            one = [0] * self.d
            one[0] = 1
            return one
        return result

    def scale(self, A, c):
        """Multiply by a constant field element (index c)."""
        const = [0] * self.d
        m = 0
        while c:
            if c & 1:
                const[m] = 1
            c >>= 1
            m += 1
        return self.mul(A, const)

    def is_zero(self, A):
        return all(x == 0 for x in A)


def packed_sum_is_zero(ring: PackedRing, monomials):
    """monomials: list of (unit_index, [(poly_dict, exponent), ...]); exact
    test that the sum of the expanded products vanishes."""
    total = ring.zero()
    for unit, factors in monomials:
        piece = None
        for pd, e in factors:
            base = ring.from_poly_dict(pd)
            p = ring.pow(base, e)
            piece = p if piece is None else ring.mul(piece, p)
        if piece is None:
            piece = ring.zero()
            piece[0] = 1  # the constant 1
        ring.iadd(total, ring.scale(piece, unit))
    return ring.is_zero(total)
