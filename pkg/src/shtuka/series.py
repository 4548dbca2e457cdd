"""Truncated Puiseux series: the computational stand-in for C_infinity.

Series live in the uniformizer x = theta - eta with coefficients in the
field tower and exponents in Q (denominators only enter through
(q-1)-th roots).  Every series carries an absolute precision: exponents
at or above `prec` are unknown.  v_eta(theta - eta) = 1.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import DomainError, PrecisionError
from .fields import FF
from .ratfunc import Poly, RatFunc, _binom_mod_p

DEFAULT_PREC = 64
EQ_SLACK = 2


class PuiseuxSeries:
    """Sparse truncated series sum c_e x^e + O(x^prec)."""

    __slots__ = ("tower", "terms", "prec")

    def __init__(self, tower, terms, prec, trusted=False):
        self.tower = tower
        prec = Fraction(prec)
        if trusted:
            self.terms = terms
        else:
            lvl = 1
            for e, c in terms.items():
                lvl = _lcm(lvl, max(tower.level_of(c), 1))
            self.terms = {}
            for e, c in terms.items():
                e = Fraction(e)
                if e >= prec:
                    continue
                c = tower.lift(c, lvl)
                if c:
                    self.terms[e] = c
        self.prec = prec

    # -- constructors -------------------------------------------------------
    @classmethod
    def zero(cls, tower, prec):
        return cls(tower, {}, prec, trusted=True)

    @classmethod
    def const(cls, tower, c: FF, prec):
        return cls(tower, {Fraction(0): c}, prec)

    @classmethod
    def x_pow(cls, tower, e, prec, c=None):
        c = c if c is not None else tower.FqN.one()
        return cls(tower, {Fraction(e): c}, prec)

    # -- structure ----------------------------------------------------------
    def level(self):
        m = 1
        for c in self.terms.values():
            m = _lcm(m, max(self.tower.level_of(c), 1))
        return m

    def valuation(self):
        """Smallest known exponent; None when indistinguishable from zero."""
        return min(self.terms) if self.terms else None

    def valuation_or_prec(self):
        v = self.valuation()
        return v if v is not None else self.prec

    def is_zero_to_prec(self):
        return not self.terms

    def truncate(self, prec):
        prec = Fraction(prec)
        if prec >= self.prec:
            return self
        return PuiseuxSeries(self.tower, {e: c for e, c in self.terms.items() if e < prec}, prec, trusted=True)

    def coeff(self, e):
        e = Fraction(e)
        c = self.terms.get(e)
        return c if c is not None else self.tower.FqN.zero()

    # -- arithmetic ----------------------------------------------------------
    def _common(self, other):
        if not isinstance(other, PuiseuxSeries):
            if isinstance(other, FF):
                other = PuiseuxSeries.const(self.tower, other, self.prec)
            elif isinstance(other, int):
                other = PuiseuxSeries.const(self.tower, self.tower.FqN.coerce(other), self.prec)
            else:
                return NotImplemented
        return other

    def __add__(self, other):
        other = self._common(other)
        prec = min(self.prec, other.prec)
        tw = self.tower
        la, lb = self.level(), other.level()
        lvl = _lcm(la, lb)
        out = {}
        for src, lsrc in ((self.terms, la), (other.terms, lb)):
            for e, c in src.items():
                if e >= prec:
                    continue
                c = tw.lift(c, lvl) if lsrc != lvl else c
                if e in out:
                    s = out[e] + c
                    if s:
                        out[e] = s
                    else:
                        del out[e]
                else:
                    out[e] = c
        return PuiseuxSeries(tw, out, prec, trusted=True)

    __radd__ = __add__

    def __neg__(self):
        return PuiseuxSeries(self.tower, {e: -c for e, c in self.terms.items()}, self.prec, trusted=True)

    def __sub__(self, other):
        other = self._common(other)
        return self + (-other)

    def __rsub__(self, other):
        return self._common(other) - self

    def __mul__(self, other):
        if isinstance(other, FF):
            if not other:
                return PuiseuxSeries.zero(self.tower, self.prec)
            tw = self.tower
            lvl = _lcm(self.level(), max(tw.level_of(other), 1))
            o = tw.lift(other, lvl)
            return PuiseuxSeries(
                tw, {e: tw.lift(c, lvl) * o for e, c in self.terms.items()}, self.prec, trusted=True
            )
        other = self._common(other)
        tw = self.tower
        va, vb = self.valuation_or_prec(), other.valuation_or_prec()
        prec = min(self.prec + vb, other.prec + va)
        la, lb = self.level(), other.level()
        lvl = _lcm(la, lb)
        a = {e: tw.lift(c, lvl) for e, c in self.terms.items()} if la != lvl else self.terms
        b = {e: tw.lift(c, lvl) for e, c in other.terms.items()} if lb != lvl else other.terms
        out = {}
        for ea, ca in a.items():
            for eb, cb in b.items():
                e = ea + eb
                if e >= prec:
                    continue
                v = ca * cb
                if e in out:
                    s = out[e] + v
                    if s:
                        out[e] = s
                    else:
                        del out[e]
                elif v:
                    out[e] = v
        return PuiseuxSeries(tw, out, prec, trusted=True)

    __rmul__ = __mul__

    def shift(self, e):
        """Multiply by x^e exactly."""
        e = Fraction(e)
        return PuiseuxSeries(self.tower, {k + e: c for k, c in self.terms.items()}, self.prec + e, trusted=True)

    def inverse(self):
        v = self.valuation()
        if v is None:
            raise PrecisionError("inverting a series indistinguishable from zero", achievable=self.prec)
        rel = self.prec - v
        lead = self.terms[v]
        ilead = lead.inv()
        # u = 1 + w with positive-valuation w; Newton y -> 2y - u y^2
        u = self.shift(-v) * ilead
        tw = self.tower
        one = PuiseuxSeries.const(tw, tw.FqN.one(), rel)
        w = (u - one).truncate(rel)
        vw = w.valuation_or_prec()
        if vw <= 0:
            raise PrecisionError("unit part is not a 1-unit (internal)", achievable=self.prec)
        y = one
        good = vw  # error valuation doubles per step
        while good < rel:
            y = (y + y - (u * y * y)).truncate(rel)
            good *= 2
        return y.shift(-v) * ilead

    def __truediv__(self, other):
        other = self._common(other)
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self._common(other) / self

    def qpow(self, k=1):
        """Exact q^k power (Frobenius); k >= 0."""
        tw = self.tower
        n = tw.q**k
        return PuiseuxSeries(tw, {e * n: c**n for e, c in self.terms.items()}, self.prec * n, trusted=True)

    def __pow__(self, n):
        if n < 0:
            return self.inverse() ** (-n)
        tw = self.tower
        if n == 0:
            return PuiseuxSeries.const(tw, tw.FqN.one(), self.prec)
        p = tw.p
        result = None
        base = self
        while n:
            n, dig = divmod(n, p)
            if dig:
                acc = base
                for _ in range(dig - 1):
                    acc = acc * base
                result = acc if result is None else result * acc
            if n:
                base = PuiseuxSeries(tw, {e * p: c**p for e, c in base.terms.items()}, base.prec * p, trusted=True)
        return result

    def nth_root_leading(self, n):
        """Deterministic t with t^n = self; n must be q - 1."""
        tw = self.tower
        if n != tw.q - 1:
            raise DomainError("only (q-1)-th roots are supported")
        if n == 1:
            return self
        v = self.valuation()
        if v is None:
            raise PrecisionError("root of a series indistinguishable from zero", achievable=self.prec)
        lead = self.terms[v]
        r0 = tw.root_q_minus_1(lead)
        rel = self.prec - v
        u = self.shift(-v) * lead.inv()
        one = PuiseuxSeries.const(tw, tw.FqN.one(), rel)
        w = (u - one).truncate(rel)
        # Hensel iteration for y^n = u starting at y = 1
        y = one
        if not w.is_zero_to_prec():
            n_inv = tw.FqN.coerce(n).inv()
            while True:
                f = (y**n - u).truncate(rel)
                if f.is_zero_to_prec():
                    break
                step = f * y ** (1 - n) * n_inv
                y = (y - step).truncate(rel)
        return y.shift(Fraction(v, n)) * r0

    def __repr__(self):
        items = sorted(self.terms)
        body = " + ".join(f"({self.terms[e]!r})*x^{e}" for e in items[:6])
        more = " + ..." if len(items) > 6 else ""
        return f"{body or '0'}{more} + O(x^{self.prec})"


def _lcm(a, b):
    from math import gcd

    return a // gcd(a, b) * b


def agree_to_slack(a: PuiseuxSeries, b: PuiseuxSeries, slack=EQ_SLACK):
    """Equality up to the shared precision minus slack."""
    d = a - b
    floor = min(a.prec, b.prec) - slack
    v = d.valuation()
    return v is None or v >= floor


class EmbeddingH:
    """Embedding of H = F_(q^N)(theta) into the series field by theta = eta + x."""

    def __init__(self, tower):
        self.tower = tower

    def poly_multiplicity(self, p: Poly):
        """Order of vanishing of p(theta) at theta = eta."""
        if p.is_zero():
            return None
        eta = self.tower.eta
        j = 0
        while True:
            if self._shift_coeff(p, j):
                return j
            j += 1

    def _shift_coeff(self, p: Poly, j):
        """Coefficient of x^j in p(eta + x)."""
        tw = self.tower
        acc = tw.FqN.zero()
        pp = tw.p
        eta = tw.eta
        for e, c in p.d.items():
            if e < j:
                continue
            bc = _binom_mod_p(e, j, pp)
            if bc:
                term = c * eta ** (e - j)
                for _ in range(bc):
                    acc = acc + term
        return acc

    def embed_poly(self, p: Poly, prec):
        """p(eta + x) to absolute precision prec."""
        tw = self.tower
        prec = Fraction(prec)
        out = {}
        pp = tw.p
        eta = tw.eta
        for e, c in p.d.items():
            top = min(e, int(prec) if prec > 0 else -1)
            for j in range(0, top + 1):
                if Fraction(j) >= prec:
                    break
                bc = _binom_mod_p(e, j, pp)
                if not bc:
                    continue
                term = c * eta ** (e - j)
                cur = out.get(Fraction(j), tw.FqN.zero())
                for _ in range(bc):
                    cur = cur + term
                if cur:
                    out[Fraction(j)] = cur
                else:
                    out.pop(Fraction(j), None)
        return PuiseuxSeries(tw, out, prec, trusted=True)

    def embed_ratfunc(self, r: RatFunc, prec):
        """Laurent expansion of r at theta = eta to absolute precision prec."""
        if r.num.is_zero():
            return PuiseuxSeries.zero(self.tower, prec)
        vn = self.poly_multiplicity(r.num)
        vd = self.poly_multiplicity(r.den)
        depth = Fraction(prec) + vd + max(vd - vn, 0) + 2
        num = self.embed_poly(r.num, depth)
        den = self.embed_poly(r.den, depth)
        return (num / den).truncate(prec)

    def embed_factored(self, fm, prec):
        """Embed a FactoredH monomial: per-atom expansion then exact powers.

        Relative precision is preserved by products and exact powers, so a
        pad of (prec - valuation) suffices for the per-atom expansions.
        """
        tw = self.tower
        pad = Fraction(prec) + max(0, -fm.valuation()) + 4
        acc = PuiseuxSeries.const(tw, fm.unit, pad)
        for key, e in sorted(fm.e.items()):
            base = self.embed_ratfunc(fm.atom_ratfunc(key), pad)
            acc = acc * (base**e if e >= 0 else base.inverse() ** (-e))
        return acc.truncate(prec)
