"""Sparse univariate polynomials and rational functions over any field.

Coefficients only need the usual operator protocol (+, -, *, /, **, ==),
a `char` attribute and `ring_one()`; finite-field elements, rational
functions and narrow-class-field elements all qualify, so rings nest
(rational functions in t over rational functions in theta, etc.).

The module also hosts the named functions of the construction: the
shtuka function f and its twists, the s-basis, the logarithm
differentials, brackets <k> = Theta^(q^k) - Theta^(sigma^k), and a
factored-monomial representation used to verify large identities
exactly without expanding huge polynomials.
"""

from __future__ import annotations

from .errors import DomainError
from .fields import FF

REDUCE_TERMS = 48
REDUCE_DEG = 240


from functools import lru_cache


@lru_cache(maxsize=1 << 18)
def _binom_mod_p(n, k, p):
    """C(n, k) mod p by Lucas' theorem."""
    r = 1
    while k:
        n, nd = divmod(n, p)
        k, kd = divmod(k, p)
        if kd > nd:
            return 0
        num, den = 1, 1
        for i in range(kd):
            num = num * (nd - i) % p
            den = den * (i + 1) % p
        r = r * num * pow(den, p - 2, p) % p if p > 2 else r * num % p
    return r


class Poly:
    """Sparse polynomial: dict {exponent: coefficient}, no zero entries."""

    __slots__ = ("d", "one")

    def __init__(self, d, one, trusted=False):
        if not trusted:
            d = {e: c for e, c in d.items() if c != one - one}
        self.d = d
        self.one = one

    # -- constructors ------------------------------------------------------
    @classmethod
    def const(cls, c, one):
        return cls({0: c} if c != one - one else {}, one, trusted=True)

    @classmethod
    def x(cls, one, e=1):
        return cls({e: one}, one, trusted=True)

    @property
    def char(self):
        return self.one.char

    def ring_one(self):
        return Poly.const(self.one, self.one)

    # -- basic structure ----------------------------------------------------
    def is_zero(self):
        return not self.d

    def __bool__(self):
        return bool(self.d)

    def degree(self):
        return max(self.d) if self.d else -1

    def lead(self):
        if not self.d:
            raise DomainError("zero polynomial has no leading coefficient")
        return self.d[max(self.d)]

    def coeff(self, e):
        zero = self.one - self.one
        return self.d.get(e, zero)

    def monic(self):
        if not self.d:
            return self
        lc = self.lead()
        if lc == self.one:
            return self
        inv = self.one / lc
        return Poly({e: c * inv for e, c in self.d.items()}, self.one, trusted=True)

    # -- ring operations ----------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, Poly):
            return other
        if isinstance(other, int):
            return Poly.const(self.one * _int_in(self.one, other), self.one)
        return Poly.const(other, self.one)

    def __add__(self, other):
        other = self._coerce(other)
        if type(self.one) is FF and self.d and other.d:
            fld = self.one.fld
            fadd = fld.add
            out = {e: c.i for e, c in self.d.items()}
            for e, c in other.d.items():
                cur = out.get(e)
                if cur is None:
                    out[e] = c.i
                else:
                    s = fadd(cur, c.i)
                    if s:
                        out[e] = s
                    else:
                        del out[e]
            return Poly({e: FF(fld, v) for e, v in out.items()}, self.one, trusted=True)
        d = dict(self.d)
        zero = self.one - self.one
        for e, c in other.d.items():
            s = d.get(e, zero) + c
            if s == zero:
                d.pop(e, None)
            else:
                d[e] = s
        return Poly(d, self.one, trusted=True)

    __radd__ = __add__

    def __neg__(self):
        return Poly({e: -c for e, c in self.d.items()}, self.one, trusted=True)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        if not self.d or not other.d:
            return Poly({}, self.one, trusted=True)
        if type(self.one) is FF:
            return self._mul_ff(other)
        a, b = (self.d, other.d) if len(self.d) <= len(other.d) else (other.d, self.d)
        zero = self.one - self.one
        out = {}
        for ea, ca in a.items():
            for eb, cb in b.items():
                e = ea + eb
                s = out.get(e, zero) + ca * cb
                if s == zero:
                    out.pop(e, None)
                else:
                    out[e] = s
        return Poly(out, self.one, trusted=True)

    def _mul_ff(self, other):
        # raw index arithmetic over the finite field: avoids element churn
        fld = self.one.fld
        fmul, fadd = fld.mul, fld.add
        a = [(e, c.i) for e, c in self.d.items()]
        b = [(e, c.i) for e, c in other.d.items()]
        if len(a) > len(b):
            a, b = b, a
        out = {}
        get = out.get
        for ea, ca in a:
            for eb, cb in b:
                e = ea + eb
                v = fmul(ca, cb)
                cur = get(e)
                if cur is None:
                    out[e] = v
                else:
                    s = fadd(cur, v)
                    if s:
                        out[e] = s
                    else:
                        del out[e]
        return Poly({e: FF(fld, v) for e, v in out.items() if v}, self.one, trusted=True)

    __rmul__ = __mul__

    def scale(self, c):
        zero = self.one - self.one
        if c == zero:
            return Poly({}, self.one, trusted=True)
        return Poly({e: v * c for e, v in self.d.items()}, self.one, trusted=True)

    def __pow__(self, n):
        if n < 0:
            raise DomainError("negative power of a polynomial")
        if n == 0:
            return self.ring_one()
        p = self.char
        # char-p ladder: f^n = prod (f^(p^k))^(digit_k)
        result = None
        base = self
        while n:
            n, dig = divmod(n, p)
            if dig:
                piece = base
                acc = piece
                for _ in range(dig - 1):
                    acc = acc * piece
                result = acc if result is None else result * acc
            if n:
                base = Poly({e * p: c**p for e, c in base.d.items()}, self.one, trusted=True)
        return result

    def frob_all(self, fn):
        """Apply fn to every coefficient (must be a ring map)."""
        return Poly({e: fn(c) for e, c in self.d.items()}, self.one)

    def shift_exp(self, k):
        """Multiply by x^k (k may be negative if all exponents allow it)."""
        return Poly({e + k: c for e, c in self.d.items()}, self.one, trusted=True)

    def __eq__(self, other):
        if isinstance(other, (int,)) or not isinstance(other, Poly):
            other = self._coerce(other)
        return self.d == other.d

    def __hash__(self):
        return hash(frozenset(self.d.items()))

    # -- euclidean layer ----------------------------------------------------
    def divmod(self, other):
        if not other.d:
            raise DomainError("polynomial division by zero")
        if not self.d:
            return self, self
        q = {}
        rem = dict(self.d)
        zero = self.one - self.one
        do = other.degree()
        lo = other.lead()
        dr = max(rem) if rem else -1
        while rem and dr >= do:
            c = rem[dr] / lo
            q[dr - do] = c
            for e, v in other.d.items():
                ee = e + dr - do
                s = rem.get(ee, zero) - c * v
                if s == zero:
                    rem.pop(ee, None)
                else:
                    rem[ee] = s
            dr = max(rem) if rem else -1
        return Poly(q, self.one), Poly(rem, self.one)

    def gcd(self, other):
        a, b = self, other
        while b.d:
            a, b = b, a.divmod(b)[1]
        return a.monic()

    def ext_gcd(self, other):
        """(g, s, t) with s*self + t*other = g, g monic."""
        one = self.ring_one()
        zero = Poly({}, self.one, trusted=True)
        r0, r1 = self, other
        s0, s1 = one, zero
        t0, t1 = zero, one
        while r1.d:
            q, r = r0.divmod(r1)
            r0, r1 = r1, r
            s0, s1 = s1, s0 - q * s1
            t0, t1 = t1, t0 - q * t1
        if r0.d:
            lc = r0.lead()
            inv = self.one / lc
            r0, s0, t0 = r0.scale(inv), s0.scale(inv), t0.scale(inv)
        return r0, s0, t0

    def evaluate(self, v):
        """Evaluate at v (any object multiplying with the coefficients)."""
        if not self.d:
            return self.one - self.one
        acc = None
        # Horner on sorted exponents (sparse-aware power steps)
        exps = sorted(self.d, reverse=True)
        acc = self.d[exps[0]]
        for prev, e in zip(exps, exps[1:]):
            acc = acc * v ** (prev - e) + self.d[e]
        if exps[-1]:
            acc = acc * v ** exps[-1]
        return acc

    def taylor_coeff(self, alpha, j):
        """Coefficient of (x - alpha)^j in the expansion at alpha."""
        p = self.char
        zero = self.one - self.one
        acc = zero
        for e, c in self.d.items():
            if e < j:
                continue
            bc = _binom_mod_p(e, j, p)
            if bc:
                acc = acc + c * alpha ** (e - j) * _int_in(self.one, bc)
        return acc

    def multiplicity(self, alpha):
        """Order of vanishing at alpha.

        Uses greedy division by (x - alpha)^(p^s) = x^(p^s) - alpha^(p^s)
        (two terms in characteristic p), so large multiplicities cost only
        O(log) exact divisions.
        """
        if not self.d:
            raise DomainError("zero polynomial vanishes to infinite order")
        zero = self.one - self.one
        if self.taylor_coeff(alpha, 0) != zero:
            return 0
        p = self.char
        cur = self
        m = 0
        while True:
            deg = cur.degree()
            s = 0
            while p ** (s + 1) <= deg:
                s += 1
            advanced = False
            while s >= 0:
                e = p**s
                chunk = Poly({0: -(alpha**e), e: self.one}, self.one, trusted=True)
                quo, rem = cur.divmod(chunk)
                if rem.is_zero():
                    cur = quo
                    m += e
                    advanced = True
                    break
                s -= 1
            if not advanced:
                return m
            if cur.is_zero() or cur.taylor_coeff(alpha, 0) != zero:
                return m

    def __repr__(self):
        if not self.d:
            return "0"
        return " + ".join(f"({self.d[e]!r})*X^{e}" if e else f"({self.d[e]!r})" for e in sorted(self.d, reverse=True))


def _int_in(one, n):
    """The image of the integer n in the coefficient ring of `one`."""
    p = one.char
    n %= p
    zero = one - one
    acc = zero
    for _ in range(n):
        acc = acc + one
    return acc


class RatFunc:
    """Quotient of two sparse polynomials; reduction is lazy above a size cap."""

    __slots__ = ("num", "den")

    def __init__(self, num: Poly, den: Poly, reduce="auto"):
        if den.is_zero():
            raise DomainError("rational function with zero denominator")
        if num.is_zero():
            den = num.ring_one()
        self.num = num
        self.den = den
        if reduce == "auto":
            self._maybe_reduce()
        elif reduce is True:
            self._reduce()

    @classmethod
    def const(cls, c, one):
        p = Poly.const(c, one)
        return cls(p, p.ring_one(), reduce=False)

    @classmethod
    def from_poly(cls, p: Poly):
        return cls(p, p.ring_one(), reduce=False)

    @property
    def one(self):
        return self.num.one

    @property
    def char(self):
        return self.num.char

    def ring_one(self):
        return RatFunc.from_poly(self.num.ring_one())

    def _maybe_reduce(self):
        # strip common monomial factor in all cases
        if self.num.d and self.den.d:
            k = min(min(self.num.d), min(self.den.d))
            if k > 0:
                self.num = self.num.shift_exp(-k)
                self.den = self.den.shift_exp(-k)
        if not isinstance(self.one, FF):
            # nested coefficients: Euclidean remainders blow up; fractions
            # stay formal and equality goes through cross-multiplication
            return
        if len(self.den.d) == 1:
            # monomial denominator: only normalize the leading unit
            e = next(iter(self.den.d))
            c = self.den.d[e]
            if c != self.one:
                inv = self.one / c
                self.num = self.num.scale(inv)
                self.den = Poly({e: self.one}, self.one, trusted=True)
            return
        big = (
            len(self.num.d) + len(self.den.d) > REDUCE_TERMS
            or self.num.degree() + self.den.degree() > REDUCE_DEG
        )
        if not big:
            self._reduce()

    def _reduce(self):
        if self.den.degree() == 0:
            c = self.den.coeff(0)
            if c != self.one:
                self.num = self.num.scale(self.one / c)
                self.den = self.num.ring_one()
            return
        g = self.num.gcd(self.den)
        if g.degree() > 0:
            self.num = self.num.divmod(g)[0]
            self.den = self.den.divmod(g)[0]
        lc = self.den.lead()
        if lc != self.one:
            inv = self.one / lc
            self.num = self.num.scale(inv)
            self.den = self.den.scale(inv)

    def reduced(self):
        r = RatFunc(self.num, self.den, reduce=False)
        r._reduce()
        return r

    def is_zero(self):
        return self.num.is_zero()

    def __bool__(self):
        return not self.is_zero()

    def _coerce(self, other):
        if isinstance(other, RatFunc):
            return other
        if isinstance(other, Poly):
            return RatFunc.from_poly(other)
        if isinstance(other, int):
            return RatFunc.from_poly(Poly.const(_int_in(self.one, other), self.one))
        return RatFunc.from_poly(Poly.const(other, self.one))

    def __add__(self, other):
        other = self._coerce(other)
        if self.den == other.den:
            return RatFunc(self.num + other.num, self.den)
        return RatFunc(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self):
        return RatFunc(-self.num, self.den, reduce=False)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        return RatFunc(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other.is_zero():
            raise DomainError("division by zero rational function")
        return RatFunc(self.num * other.den, self.den * other.num)

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def inv(self):
        if self.is_zero():
            raise DomainError("inverse of zero")
        return RatFunc(self.den, self.num, reduce=False)

    def __pow__(self, n):
        if n == 0:
            return self.ring_one()
        if n < 0:
            return self.inv() ** (-n)
        return RatFunc(self.num**n, self.den**n, reduce=False)

    def __eq__(self, other):
        other = self._coerce(other)
        return (self.num * other.den - other.num * self.den).is_zero()

    def __hash__(self):
        r = self.reduced()
        return hash((r.num, r.den))

    def frob_all(self, fn):
        return RatFunc(self.num.frob_all(fn), self.den.frob_all(fn))

    def evaluate(self, v):
        dv = self.den.evaluate(v)
        if isinstance(dv, FF) and not dv:
            raise DomainError("evaluation at a pole")
        return self.num.evaluate(v) * _generic_inv(dv)

    def __repr__(self):
        return f"({self.num!r})/({self.den!r})"


def _generic_inv(x):
    if isinstance(x, FF):
        return x.inv()
    if isinstance(x, RatFunc):
        return x.inv()
    return x ** (-1)


def eta_reduce(ctx, h: RatFunc) -> RatFunc:
    """Cheap partial reduction of an H element: cancel the shared powers of
    (theta - eta^(j)), which dominate common factors in this setting, then
    run the generic reduction only if the remainder is small."""
    num, den = h.num, h.den
    if num.is_zero():
        return RatFunc.from_poly(num)
    one = ctx.c_one
    for j in range(ctx.N):
        alpha = ctx.tower.eta_pow(j)
        mn = num.multiplicity(alpha)
        if not mn:
            continue
        md = den.multiplicity(alpha)
        m = min(mn, md)
        if m:
            lin = Poly({0: -alpha, 1: one}, one, trusted=True) ** m
            num = num.divmod(lin)[0]
            den = den.divmod(lin)[0]
    out = RatFunc(num, den, reduce=False)
    out._reduce()
    return out


# -- residues --------------------------------------------------------------


def residue_at(r: RatFunc, alpha, budget_extra=4):
    """Residue of r dx at x = alpha (higher-order poles via local expansion)."""
    one = r.one
    zero = one - one
    m_num = r.num.multiplicity(alpha) if r.num.d else None
    if m_num is None:
        return zero
    m_den = r.den.multiplicity(alpha)
    k = m_den - m_num
    if k <= 0:
        return zero
    # local Taylor data of num and den/(x-alpha)^m_den up to order k-1
    need = k
    ncoef = [r.num.taylor_coeff(alpha, m_num + j) for j in range(need)]
    dcoef = [r.den.taylor_coeff(alpha, m_den + j) for j in range(need)]
    # series division ncoef/dcoef, want coefficient of index k-1
    inv0 = _generic_inv(dcoef[0])
    out = []
    for j in range(need):
        acc = ncoef[j]
        for i in range(j):
            acc = acc - out[i] * dcoef[j - i]
        out.append(acc * inv0)
    return out[k - 1]


def _local_coeffs(r: RatFunc, alpha, length):
    """(start, coeffs): r = sum coeffs[j] (x-alpha)^(start+j) + higher."""
    one = r.one
    zero = one - one
    vn = r.num.multiplicity(alpha)
    vd = r.den.multiplicity(alpha)
    ncoef = [r.num.taylor_coeff(alpha, vn + j) for j in range(length)]
    dcoef = [r.den.taylor_coeff(alpha, vd + j) for j in range(length)]
    inv0 = _generic_inv(dcoef[0])
    out = []
    for j in range(length):
        acc = ncoef[j]
        for i in range(j):
            acc = acc - out[i] * dcoef[j - i]
        out.append(acc * inv0)
    return vn - vd, out


def residue_of_product(factors, alpha):
    """Residue at alpha of dx times a product of rational-function powers.

    `factors` is a list of (RatFunc, integer exponent); expanding factors
    locally keeps coefficient growth linear, unlike combining first.
    """
    first = factors[0][0]
    one = first.one
    zero = one - one
    starts = []
    for r, e in factors:
        if r.num.is_zero():
            return zero
        v = r.num.multiplicity(alpha) - r.den.multiplicity(alpha)
        starts.append(v * e)
    total = sum(starts)
    if total >= 0:
        return zero
    length = -total
    acc_start, acc = 0, [one] + [zero] * (length - 1)
    for (r, e), _v in zip(factors, starts):
        s, cs = _local_coeffs(r, alpha, length)
        if e < 0:
            inv0 = _generic_inv(cs[0])
            inv = []
            for j in range(length):
                a = one if j == 0 else zero
                for i in range(j):
                    a = a - inv[i] * cs[j - i]
                inv.append(a * inv0)
            s, cs = -s, inv
        for _ in range(abs(e)):
            acc = _trunc_mul(acc, cs, length)
            acc_start += s
    idx = -1 - acc_start
    return acc[idx] if 0 <= idx < length else zero


def _trunc_mul(a, b, length):
    zero = a[0] - a[0]
    out = [zero] * length
    for i, x in enumerate(a):
        if x == zero:
            continue
        for j, y in enumerate(b):
            if i + j >= length:
                break
            out[i + j] = out[i + j] + x * y
    return out


def residue_at_infinity(r: RatFunc):
    """Residue of r dx at x = infinity."""
    one = r.one
    zero = one - one
    _, rem = r.num.divmod(r.den)
    if rem.is_zero():
        return zero
    if rem.degree() == r.den.degree() - 1:
        return -(rem.lead() / r.den.lead())
    return zero


# -- sigma-exponents (group-ring powers) ------------------------------------


class SigmaExp:
    """Element sum a_i sigma^i of the group ring Z{sigma}, sigma^N = 1."""

    __slots__ = ("N", "coeffs")

    def __init__(self, N, coeffs=None):
        self.N = N
        self.coeffs = [0] * N
        if coeffs:
            for i, a in coeffs.items() if isinstance(coeffs, dict) else enumerate(coeffs):
                self.coeffs[i % N] += a

    @classmethod
    def sigma(cls, N, i=1, mult=1):
        return cls(N, {i: mult})

    @classmethod
    def const(cls, N, n):
        return cls(N, {0: n})

    def __add__(self, other):
        if isinstance(other, int):
            other = SigmaExp.const(self.N, other)
        return SigmaExp(self.N, {i: a + b for i, (a, b) in enumerate(zip(self.coeffs, other.coeffs))})

    __radd__ = __add__

    def __neg__(self):
        return SigmaExp(self.N, {i: -a for i, a in enumerate(self.coeffs)})

    def __sub__(self, other):
        if isinstance(other, int):
            other = SigmaExp.const(self.N, other)
        return self + (-other)

    def __rsub__(self, other):
        return SigmaExp.const(self.N, other) - self

    def __mul__(self, other):
        if isinstance(other, int):
            return SigmaExp(self.N, {i: a * other for i, a in enumerate(self.coeffs)})
        out = {}
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                out[(i + j) % self.N] = out.get((i + j) % self.N, 0) + a * b
        return SigmaExp(self.N, out)

    __rmul__ = __mul__

    def __eq__(self, other):
        if isinstance(other, int):
            other = SigmaExp.const(self.N, other)
        return self.N == other.N and self.coeffs == other.coeffs

    def __repr__(self):
        return " + ".join(f"{a}*s^{i}" for i, a in enumerate(self.coeffs) if a) or "0"


def twisted_power(x, P: SigmaExp, sigma_fn):
    """prod_i sigma^i(x)^(a_i) with sigma_fn(x, i) the twist map."""
    result = None
    for i, a in enumerate(P.coeffs):
        if a == 0:
            continue
        t = sigma_fn(x, i)
        piece = t**a
        result = piece if result is None else result * piece
    if result is None:
        return x.ring_one() if hasattr(x, "ring_one") else x**0
    return result


# -- the named functions of one (q, rho) instance ---------------------------


class ShtukaContext:
    """Symbolic home of one instance: H = F_(q^N)(theta) and functions of t.

    H elements are RatFunc in theta over F_(q^N); functions of t are
    RatFunc in t with H coefficients.
    """

    def __init__(self, tower):
        self.tower = tower
        self.q = tower.q
        self.N = tower.N
        one_c = tower.FqN.one()
        self.c_one = one_c
        self.theta_poly_one = one_c
        self.theta = RatFunc.from_poly(Poly.x(one_c))
        self.H_one = self.theta.ring_one()
        self.t = RatFunc.from_poly(Poly.x(self.H_one))
        self.T_one = self.t.ring_one()
        self._s_cache = [self.T_one]
        self._f_cache = {}
        self._D_cache = None
        self._L_cache = None

    # -- H-level helpers ----------------------------------------------------
    def h_const(self, c: FF):
        """Constant of H from an F_(q^N) element."""
        return RatFunc.const(c, self.c_one)

    def eta_H(self, k=0):
        return self.h_const(self.tower.eta_pow(k))

    def theta_minus_eta(self, k=0):
        return self.theta - self.eta_H(k)

    @property
    def Theta(self):
        return self.theta_minus_eta(0).inv()

    def Theta_sig(self, k):
        """sigma^k(Theta) = 1/(theta - eta^(k))."""
        return self.theta_minus_eta(k).inv()

    def sigma_H(self, h: RatFunc, k=1):
        """Coefficient-wise eta -> eta^(q^k); fixes theta."""
        tw = self.tower
        return h.frob_all(lambda c: tw.frob(c, k))

    def qpow_H(self, h: RatFunc, k=1):
        return h ** (self.q**k)

    def sigma_fn_H(self):
        return lambda h, i: self.sigma_H(h, i)

    def twisted_theta(self, P: SigmaExp):
        """Theta^(P(sigma)) as an H element."""
        return twisted_power(self.Theta, P, self.sigma_fn_H())

    def gamma_exp(self, k):
        """gamma_k(sigma) = sum_{i=0}^{k-1} q^i sigma^(k-1-i); gamma_0 = 0."""
        acc = {}
        for i in range(k):
            key = (k - 1 - i) % self.N
            acc[key] = acc.get(key, 0) + self.q**i
        return SigmaExp(self.N, acc)

    def zeta_exp(self, i):
        """(q^i - 1)(sigma - 1) + W_i (sigma^2 - 1)."""
        s1 = SigmaExp.sigma(self.N, 1) - 1
        s2 = SigmaExp.sigma(self.N, 2) - 1
        return s1 * (self.q**i - 1) + s2 * self.W(i)

    def W(self, i):
        return (self.q**i - 1) // (self.q - 1)

    # -- t-level constructions ----------------------------------------------
    def t_const(self, h: RatFunc):
        return RatFunc.const(h, self.H_one)

    def t_minus_eta(self, k):
        return self.t - self.t_const(self.eta_H(k))

    def rho_t(self):
        """rho(t) as a t-polynomial over H."""
        acc = self.T_one
        for k in range(self.N):
            acc = acc * self.t_minus_eta(k)
        return acc

    def rho_theta(self):
        """rho(theta) in H."""
        acc = self.H_one
        for k in range(self.N):
            acc = acc * self.theta_minus_eta(k)
        return acc

    def T_i_t(self, i):
        """T_i = t^i / rho(t) as a rational function of t."""
        return self.t**i / self.rho_t()

    def T_i_theta(self, i):
        return self.theta**i / self.rho_theta()

    def f_twist(self, i):
        """f^(i)(t) = 1/(t - eta^(i)) - Theta^(q^i)."""
        if ("f", i) not in self._f_cache:
            val = self.t_minus_eta(i).inv() - self.t_const(self.Theta ** (self.q**i))
            self._f_cache[("f", i)] = val
        return self._f_cache[("f", i)]

    def f_sigma(self, i):
        """f^(sigma^i)(t) = 1/(t - eta^(i)) - 1/(theta - eta^(i))."""
        return self.t_minus_eta(i).inv() - self.t_const(self.Theta_sig(i))

    def s_basis(self, i):
        """s_i(t) = f^(0) f^(1) ... f^(i-1); s_0 = 1."""
        while len(self._s_cache) <= i:
            k = len(self._s_cache)
            self._s_cache.append(self._s_cache[-1] * self.f_twist(k - 1))
        return self._s_cache[i]

    def h_diff(self, j):
        """h^(j)(t): density of the logarithm differential, j >= 1."""
        if j < 1:
            raise DomainError("h^(j) is only used for j >= 1")
        th_j1 = self.theta ** (self.q ** (j - 1))
        c = -(th_j1 - self.eta_H(j - 2)) / (th_j1 - self.eta_H(j - 1))
        return self.t_const(c) / (self.t_minus_eta(j - 2) * self.t_minus_eta(j - 1))

    def bracket_H(self, k):
        """<k> = Theta^(q^k) - sigma^k(Theta) as an H element, k >= 0."""
        return self.Theta ** (self.q**k) - self.Theta_sig(k)

    def upsilon(self, k):
        """Upsilon_k(t): the ladder of shifted linear factors."""
        if k >= 0:
            acc = self.T_one
            for i in range(-1, k):
                acc = acc * self.t_minus_eta(-i)
            return acc
        acc = self.t_minus_eta(1)
        for i in range(k, 0):
            acc = acc / self.t_minus_eta(-i)
        return acc

    def q_n(self, n):
        """Q_n(t) for the Pellarin-type generating function."""
        thn = self.theta ** (self.q**n)
        pref = ((thn - self.eta_H(0)) * self.Theta ** (self.q**n)) ** 2
        inner = self.t_const((thn - self.eta_H(0)).inv()) - self.t_minus_eta(0).inv()
        return self.t_const(pref) * inner

    def b_coeffs(self):
        """b_i in F_(q^N) with sum b_i T_i = 1/(t - eta): rho(t)/(t - eta)."""
        fqn = self.tower.FqN
        one = fqn.one()
        cof = Poly.const(one, one)
        for k in range(1, self.N):
            cof = cof * (Poly.x(one) - Poly.const(self.tower.eta_pow(k), one))
        return [cof.coeff(i) for i in range(self.N)]

    def twist_t(self, r: RatFunc, k=1):
        """Raise every H coefficient of a t-function to the q^k power."""
        if k < 0:
            raise DomainError("negative twists only for finite-field coefficients")
        return r.frob_all(lambda h: h ** (self.q**k))

    def sigma_t(self, r: RatFunc, k=1):
        """Apply sigma^k to every H coefficient of a t-function."""
        return r.frob_all(lambda h: self.sigma_H(h, k))

    def evaluate_t(self, r: RatFunc, h):
        """Evaluate a t-function at an H point (exact)."""
        return r.evaluate(h)


# -- factored monomials over H ----------------------------------------------


class FactoredH:
    """Monomial unit * prod atoms^e over H; atoms are (theta - theta^(q^k))
    keyed ('a', k) and (theta - eta^(k)) keyed ('b', k mod N).

    Closed under multiplication, q-powers and sigma-twists, which keeps the
    large coefficient sequences (D_n, L_n, brackets, partial products)
    exactly representable with integer exponent bookkeeping.
    """

    __slots__ = ("ctx", "unit", "e")

    def __init__(self, ctx: ShtukaContext, unit: FF, e=None):
        if not unit:
            raise DomainError("factored monomials are nonzero by construction")
        self.ctx = ctx
        self.unit = unit
        self.e = {k: v for k, v in (e or {}).items() if v}

    @classmethod
    def one(cls, ctx):
        return cls(ctx, ctx.c_one)

    @classmethod
    def atom_a(cls, ctx, k, power=1):
        if k < 1:
            raise DomainError("atom a_k requires k >= 1")
        return cls(ctx, ctx.c_one, {("a", k): power})

    @classmethod
    def atom_b(cls, ctx, m, power=1):
        return cls(ctx, ctx.c_one, {("b", m % ctx.N): power})

    @classmethod
    def bracket(cls, ctx, k):
        """<k> = (theta - theta^(q^k)) / ((theta-eta)^(q^k) (theta-eta^(k)))."""
        return cls(ctx, ctx.c_one, _merge({("a", k): 1}, {("b", 0): -(ctx.q**k)}, {("b", k % ctx.N): -1}))

    @classmethod
    def theta_power(cls, ctx, P: SigmaExp):
        """Theta^(P(sigma)) = prod (theta - eta^(i))^(-a_i)."""
        return cls(ctx, ctx.c_one, {("b", i): -a for i, a in enumerate(P.coeffs) if a})

    @classmethod
    def from_unit(cls, ctx, unit: FF):
        return cls(ctx, unit)

    def atom_ratfunc(self, key):
        ctx = self.ctx
        kind, k = key
        if kind == "a":
            return ctx.theta - ctx.theta ** (ctx.q**k)
        return ctx.theta_minus_eta(k)

    def __mul__(self, other):
        if isinstance(other, FactoredH):
            return FactoredH(self.ctx, self.unit * other.unit, _merge(self.e, other.e))
        if isinstance(other, FF):
            return FactoredH(self.ctx, self.unit * other, self.e)
        raise DomainError("factored monomials multiply with monomials or units")

    def __truediv__(self, other):
        return self * other.inv()

    def inv(self):
        return FactoredH(self.ctx, self.unit.inv(), {k: -v for k, v in self.e.items()})

    def __pow__(self, n):
        return FactoredH(self.ctx, self.unit**n, {k: v * n for k, v in self.e.items()})

    def qpow(self, k=1):
        n = self.ctx.q**k
        return self**n

    def sigma(self, j=1):
        """eta -> eta^(q^j): shifts b-atoms, fixes a-atoms, twists the unit."""
        e = {}
        for (kind, k), v in self.e.items():
            key = (kind, k) if kind == "a" else ("b", (k + j) % self.ctx.N)
            e[key] = e.get(key, 0) + v
        return FactoredH(self.ctx, self.ctx.tower.frob(self.unit, j), e)

    def valuation(self):
        """v_eta: a_k and b_m contribute exactly when N | k (resp. m = 0)."""
        v = 0
        for (kind, k), ex in self.e.items():
            if kind == "a" and k % self.ctx.N == 0:
                v += ex
            elif kind == "b" and k % self.ctx.N == 0:
                v += ex
        return v

    def split_num_den(self):
        """(numerator Poly, denominator Poly) over F_(q^N) in theta."""
        one = self.ctx.c_one
        num = Poly.const(self.unit, one)
        den = Poly.const(one, one)
        for key, v in sorted(self.e.items()):
            p = self.atom_ratfunc(key).num
            if v > 0:
                num = num * p**v
            else:
                den = den * p ** (-v)
        return num, den

    def as_ratfunc(self):
        num, den = self.split_num_den()
        return RatFunc(num, den, reduce=False)

    def __eq__(self, other):
        if isinstance(other, FactoredH):
            if self.unit == other.unit and self.e == other.e:
                return True
            return (self / other).is_one()
        return NotImplemented

    def is_one(self):
        if not self.e:
            return self.unit == self.ctx.c_one
        num, den = self.split_num_den()
        return (num - den).is_zero()

    def __repr__(self):
        parts = [repr(self.unit)]
        for (kind, k), v in sorted(self.e.items()):
            parts.append(f"{kind}{k}^{v}")
        return "*".join(parts)


def _merge(*dicts):
    out = {}
    for d in dicts:
        for k, v in d.items():
            out[k] = out.get(k, 0) + v
            if not out[k]:
                del out[k]
    return out


_packed_rings = {}


def factored_sum_is_zero(terms):
    """Exact check that a sum of factored monomials vanishes.

    Divides out the common monomial part, then expands the (polynomial)
    cofactors and sums.  In characteristic 2 the expansion runs on
    bit-packed integers, which keeps the deepest identity checks fast.
    """
    terms = list(terms)
    if not terms:
        return True
    ctx = terms[0].ctx
    keys = set()
    for t in terms:
        keys |= set(t.e)
    low = {k: min(t.e.get(k, 0) for t in terms) for k in keys}
    one = ctx.c_one
    if ctx.tower.p == 2:
        from .gf2pack import PackedRing, packed_sum_is_zero

        fld = ctx.tower.FqN
        ring = _packed_rings.get(id(fld))
        if ring is None:
            ring = _packed_rings[id(fld)] = PackedRing(fld)
        monos = []
        for t in terms:
            factors = []
            for k in keys:
                v = t.e.get(k, 0) - low[k]
                if v:
                    factors.append((t.atom_ratfunc(k).num.d, v))
            monos.append((t.unit.i, factors))
        return packed_sum_is_zero(ring, monos)
    total = Poly.const(one - one, one)
    for t in terms:
        piece = Poly.const(t.unit, one)
        for k in keys:
            v = t.e.get(k, 0) - low[k]
            if v:
                piece = piece * t.atom_ratfunc(k).num ** v
        total = total + piece
    return total.is_zero()


def factored_equal(a: FactoredH, b: FactoredH):
    return factored_sum_is_zero([a, FactoredH(b.ctx, -b.unit, b.e)])
