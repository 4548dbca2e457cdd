"""Twisted polynomials sum a_i tau^i with the commutation tau a = a^q tau.

Coefficients may live in any field-like ring supporting powers (H, the
narrow class field, or truncated series); `q` fixes the twist.
"""

from __future__ import annotations

from .errors import DomainError


class OrePoly:
    """Twisted polynomial; coeffs[i] multiplies tau^i, trailing zeros trimmed."""

    __slots__ = ("coeffs", "q", "one")

    def __init__(self, coeffs, q, one):
        zero = one - one
        coeffs = list(coeffs)
        while coeffs and coeffs[-1] == zero:
            coeffs.pop()
        self.coeffs = coeffs
        self.q = q
        self.one = one

    @classmethod
    def zero(cls, q, one):
        return cls([], q, one)

    @classmethod
    def const(cls, c, q, one):
        return cls([c], q, one)

    @classmethod
    def tau(cls, q, one, k=1):
        zero = one - one
        return cls([zero] * k + [one], q, one)

    def degree(self):
        return len(self.coeffs) - 1

    def is_zero(self):
        return not self.coeffs

    def constant_term(self):
        """The derivative at the origin: coefficient of tau^0."""
        return self.coeffs[0] if self.coeffs else self.one - self.one

    def leading(self):
        if not self.coeffs:
            raise DomainError("zero twisted polynomial has no leading term")
        return self.coeffs[-1]

    def coeff(self, i):
        return self.coeffs[i] if 0 <= i < len(self.coeffs) else self.one - self.one

    def __add__(self, other):
        if not isinstance(other, OrePoly):
            other = OrePoly.const(other, self.q, self.one)
        n = max(len(self.coeffs), len(other.coeffs))
        return OrePoly(
            [self.coeff(i) + other.coeff(i) for i in range(n)], self.q, self.one
        )

    def __neg__(self):
        return OrePoly([-c for c in self.coeffs], self.q, self.one)

    def __sub__(self, other):
        if not isinstance(other, OrePoly):
            other = OrePoly.const(other, self.q, self.one)
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, OrePoly):
            return self.scale_left(other)
        zero = self.one - self.one
        out = [zero] * (len(self.coeffs) + len(other.coeffs))
        for i, a in enumerate(self.coeffs):
            if a == zero:
                continue
            for j, b in enumerate(other.coeffs):
                if b == zero:
                    continue
                out[i + j] = out[i + j] + a * b ** (self.q**i)
        return OrePoly(out, self.q, self.one)

    def __rmul__(self, other):
        # scalar * P
        return OrePoly([other * c for c in self.coeffs], self.q, self.one)

    def scale_left(self, c):
        return OrePoly([c * v for v in self.coeffs], self.q, self.one)

    def scale_right(self, c):
        """P * c as twisted polynomials (c twisted through each tau power)."""
        return OrePoly([v * c ** (self.q**i) for i, v in enumerate(self.coeffs)], self.q, self.one)

    def __pow__(self, n):
        if n < 0:
            raise DomainError("negative power of a twisted polynomial")
        r = OrePoly.const(self.one, self.q, self.one)
        b = self
        while n:
            if n & 1:
                r = r * b
            if n > 1:
                b = b * b
            n >>= 1
        return r

    def __eq__(self, other):
        if not isinstance(other, OrePoly):
            other = OrePoly.const(other, self.q, self.one)
        return len(self.coeffs) == len(other.coeffs) and all(
            a == b for a, b in zip(self.coeffs, other.coeffs)
        )

    def monic(self):
        if self.is_zero():
            return self
        lt = self.leading()
        if lt == self.one:
            return self
        return self.scale_left(self.one / lt)

    def right_divmod(self, other, simplify=None):
        """(quot, rem) with self = quot * other + rem, deg rem < deg other."""
        if other.is_zero():
            raise DomainError("twisted division by zero")
        q, one = self.q, self.one
        zero = one - one
        rem = list(self.coeffs)
        dq = len(rem) - len(other.coeffs)
        if dq < 0:
            return OrePoly.zero(q, one), self
        quot = [zero] * (dq + 1)
        db = other.degree()
        b = other.leading()
        while len(rem) - 1 >= db and rem:
            k = len(rem) - 1 - db
            c = rem[-1] / b ** (q**k)
            if simplify is not None:
                c = simplify(c)
            quot[k] = c
            for j, bc in enumerate(other.coeffs):
                rem[k + j] = rem[k + j] - c * bc ** (q**k)
            if simplify is not None:
                for j in range(k, k + db + 1):
                    rem[j] = simplify(rem[j])
            while rem and rem[-1] == zero:
                rem.pop()
        return OrePoly(quot, q, one), OrePoly(rem, q, one)

    def apply(self, xi, embed=None):
        """Evaluate the tau-action: sum a_i xi^(q^i)."""
        acc = None
        for i, a in enumerate(self.coeffs):
            coef = embed(a) if embed else a
            term = coef * xi ** (self.q**i)
            acc = term if acc is None else acc + term
        if acc is None:
            return xi - xi
        return acc

    def __repr__(self):
        if not self.coeffs:
            return "0"
        return " + ".join(
            f"({c!r})*tau^{i}" if i else f"({c!r})" for i, c in enumerate(self.coeffs) if c != self.one - self.one
        )


def gcrd(polys, simplify=None):
    """Monic greatest common right divisor via the right Euclidean scheme.

    `simplify` (e.g. rational-function reduction) is applied to remainder
    coefficients between steps to keep Euclidean growth in check.
    """
    polys = [p for p in polys if not p.is_zero()]
    if not polys:
        raise DomainError("gcrd of an empty or all-zero family")

    def clean(p):
        if simplify is None:
            return p
        return OrePoly([simplify(c) for c in p.coeffs], p.q, p.one)

    g = clean(polys[0].monic())
    for p in polys[1:]:
        a, b = g, clean(p.monic())
        while not b.is_zero():
            a, b = b, clean(a.right_divmod(b, simplify=simplify)[1].monic())
        g = a
        if g.degree() == 0:
            break
    return g.monic()
