"""Finite-field tower F_p <= F_q <= F_{q^N} <= F_{q^{Nm}} with Frobenius.

Elements are stored as a single integer index (mixed-radix vector of
base-field indices, low coefficient first).  Small fields additionally
carry discrete-log tables so multiplication and inversion are table
lookups.  The tower grows on demand: root extraction adjoins the minimal
extension F_{q^{Nd}} in which x^(q-1) = c becomes solvable.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .errors import DomainError, ParameterError

ZECH_LIMIT = 1 << 16  # build log tables only for fields up to this size


def factor_prime_power(q):
    """Return (p, e) with q = p^e, or raise ParameterError."""
    if q < 2:
        raise ParameterError(f"q must be at least 2, got {q}")
    for p in range(2, q + 1):
        if p * p > q:
            return q, 1
        if q % p == 0:
            e = 0
            m = q
            while m % p == 0:
                m //= p
                e += 1
            if m != 1:
                raise ParameterError(f"q = {q} is not a prime power")
            return p, e
    raise ParameterError(f"q = {q} is not a prime power")


def _trial_factor(n):
    """Prime factors of n by trial division (tower orders stay tiny)."""
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


class FF:
    """Element of a finite field, identified by (field, index)."""

    __slots__ = ("fld", "i")

    def __init__(self, fld, i):
        self.fld = fld
        self.i = i

    def __add__(self, other):
        other = self.fld.coerce(other)
        return FF(self.fld, self.fld.add(self.i, other.i))

    __radd__ = __add__

    def __sub__(self, other):
        other = self.fld.coerce(other)
        return FF(self.fld, self.fld.add(self.i, self.fld.neg(other.i)))

    def __rsub__(self, other):
        return self.fld.coerce(other).__sub__(self)

    def __neg__(self):
        return FF(self.fld, self.fld.neg(self.i))

    def __mul__(self, other):
        other = self.fld.coerce(other)
        return FF(self.fld, self.fld.mul(self.i, other.i))

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self.fld.coerce(other)
        return FF(self.fld, self.fld.mul(self.i, self.fld.inv(other.i)))

    def __rtruediv__(self, other):
        return self.fld.coerce(other).__truediv__(self)

    def __pow__(self, n):
        return FF(self.fld, self.fld.pow(self.i, n))

    def __eq__(self, other):
        if isinstance(other, int):
            return self.i == self.fld.from_int(other)
        return isinstance(other, FF) and self.fld is other.fld and self.i == other.i

    def __hash__(self):
        return hash((id(self.fld), self.i))

    def __bool__(self):
        return self.i != 0

    def __repr__(self):
        return self.fld.render(self.i)

    def inv(self):
        return FF(self.fld, self.fld.inv(self.i))

    @property
    def char(self):
        return self.fld.char

    def ring_one(self):
        return FF(self.fld, self.fld.from_int(1))


class PrimeField:
    """F_p with integer arithmetic mod p."""

    def __init__(self, p):
        self.p = p
        self.size = p
        self.char = p

    def coerce(self, x):
        if isinstance(x, FF):
            if x.fld is self:
                return x
            raise DomainError("cannot mix elements of different fields")
        if isinstance(x, int):
            return FF(self, x % self.p)
        return NotImplemented

    def from_int(self, n):
        return n % self.p

    def add(self, a, b):
        return (a + b) % self.p

    def neg(self, a):
        return (-a) % self.p

    def mul(self, a, b):
        return (a * b) % self.p

    def inv(self, a):
        if a == 0:
            raise DomainError("division by zero in prime field")
        return pow(a, self.p - 2, self.p)

    def pow(self, a, n):
        if a == 0:
            if n < 0:
                raise DomainError("zero to a negative power")
            return 0 if n else 1
        return pow(a, n % (self.p - 1), self.p) if self.p > 2 else a

    def zero(self):
        return FF(self, 0)

    def one(self):
        return FF(self, 1)

    def elements(self):
        return [FF(self, i) for i in range(self.p)]

    def render(self, i):
        return str(i)


class ExtField:
    """F_B[x]/(m(x)) for a monic irreducible m over the base field B.

    Element index = sum coeff_index_k * |B|^k, coefficients low-first.
    """

    def __init__(self, base, modulus, gen_name):
        # modulus: list of base-field indices, low-first, monic (last == 1)
        self.base = base
        self.mod = list(modulus)
        self.deg = len(modulus) - 1
        self.size = base.size ** self.deg
        self.char = base.char
        self.name = gen_name
        bs = base.size
        self._pows = [bs**k for k in range(self.deg + 1)]
        # reduction rows: x^(deg+k) mod m as digit vectors, for k < deg
        self._red = []
        top = [base.neg(c) for c in self.mod[:-1]]
        row = top
        for _ in range(self.deg):
            self._red.append(row)
            carry = row[-1]
            row = [0] + row[:-1]
            if carry:
                row = [base.add(rc, base.mul(carry, tc)) for rc, tc in zip(row, top)]
        self._log = None
        self._add = None
        if self.size <= ZECH_LIMIT:
            self._build_tables()
        if self.size <= 1024:
            self._add = [
                [self._add_digits(a, b) for b in range(self.size)] for a in range(self.size)
            ]
            self._neg = [self._add_digits(0, a, neg=True) for a in range(self.size)]

    # -- index <-> digit vector ------------------------------------------
    def digits(self, i):
        bs = self.base.size
        out = []
        for _ in range(self.deg):
            i, r = divmod(i, bs)
            out.append(r)
        return out

    def index(self, digs):
        i = 0
        for d in reversed(digs):
            i = i * self.base.size + d
        return i

    def gen(self):
        """The residue class of x (the adjoined generator)."""
        return FF(self, self._pows[1])

    def coerce(self, x):
        if isinstance(x, FF):
            if x.fld is self:
                return x
            if x.fld is self.base:
                return FF(self, x.i)
            raise DomainError("cannot mix elements of different fields; lift explicitly")
        if isinstance(x, int):
            return FF(self, self.from_int(x))
        return NotImplemented

    def from_int(self, n):
        return self.base.from_int(n)

    def from_base(self, idx):
        """Embed a base-field index as a constant."""
        return idx

    def zero(self):
        return FF(self, 0)

    def one(self):
        return FF(self, self.from_int(1))

    def elements(self):
        return [FF(self, i) for i in range(self.size)]

    # -- arithmetic on indices -------------------------------------------
    def _add_digits(self, a, b, neg=False):
        da, db = self.digits(a), self.digits(b)
        if neg:
            return self.index([self.base.neg(y) for y in db])
        return self.index([self.base.add(x, y) for x, y in zip(da, db)])

    def add(self, a, b):
        if a == 0:
            return b
        if b == 0:
            return a
        if self._add is not None:
            return self._add[a][b]
        return self._add_digits(a, b)

    def neg(self, a):
        if a == 0:
            return 0
        if self._add is not None:
            return self._neg[a]
        return self._add_digits(0, a, neg=True)

    def mul(self, a, b):
        if a == 0 or b == 0:
            return 0
        if self._log is not None:
            return self._exp[(self._log[a] + self._log[b]) % (self.size - 1)]
        return self._mul_poly(a, b)

    def _mul_poly(self, a, b):
        base = self.base
        da, db = self.digits(a), self.digits(b)
        conv = [0] * (2 * self.deg - 1)
        for i, x in enumerate(da):
            if x == 0:
                continue
            for j, y in enumerate(db):
                if y == 0:
                    continue
                conv[i + j] = base.add(conv[i + j], base.mul(x, y))
        digs = conv[: self.deg]
        for k in range(self.deg, 2 * self.deg - 1):
            c = conv[k]
            if c:
                row = self._red[k - self.deg]
                digs = [base.add(d, base.mul(c, r)) for d, r in zip(digs, row)]
        return self.index(digs)

    def inv(self, a):
        if a == 0:
            raise DomainError("division by zero in extension field")
        if self._log is not None:
            return self._exp[(self.size - 1 - self._log[a]) % (self.size - 1)]
        return self.pow(a, self.size - 2)

    def pow(self, a, n):
        if a == 0:
            if n < 0:
                raise DomainError("zero to a negative power")
            return 0 if n else self.from_int(1)
        n %= self.size - 1
        if self._log is not None:
            return self._exp[(self._log[a] * n) % (self.size - 1)]
        r = self.from_int(1)
        b = a
        while n:
            if n & 1:
                r = self.mul(r, b)
            b = self.mul(b, b)
            n >>= 1
        return r

    def _build_tables(self):
        n = self.size - 1
        factors = _trial_factor(n)
        g = None
        for cand in range(2, self.size):
            if all(self.pow(cand, n // f) != self.from_int(1) for f in factors):
                g = cand
                break
        exp = [0] * n
        log = {}
        cur = self.from_int(1)
        for k in range(n):
            exp[k] = cur
            log[cur] = k
            cur = self._mul_poly(cur, g)
        self._exp = exp
        self._log = log

    def render(self, i):
        digs = self.digits(i)
        parts = []
        for k in range(self.deg - 1, -1, -1):
            d = digs[k]
            if d == 0:
                continue
            c = self.base.render(d)
            mono = "1" if k == 0 else (self.name if k == 1 else f"{self.name}^{k}")
            if k == 0:
                parts.append(c)
            elif c == "1":
                parts.append(mono)
            elif any(s in c for s in "+-"):
                parts.append(f"({c})*{mono}")
            else:
                parts.append(f"{c}*{mono}")
        return " + ".join(parts) if parts else "0"


# -- dense polynomial helpers over a field (internal) ---------------------
# Polynomials are lists of FF, low coefficient first, no trailing zeros.


def _ptrim(f):
    while f and not f[-1]:
        f.pop()
    return f


def _pmul(f, g, zero):
    if not f or not g:
        return []
    out = [zero] * (len(f) + len(g) - 1)
    for i, a in enumerate(f):
        if not a:
            continue
        for j, b in enumerate(g):
            out[i + j] = out[i + j] + a * b
    return _ptrim(out)


def _pmod(f, m):
    f = list(f)
    dm = len(m) - 1
    lead = m[-1]
    while len(f) - 1 >= dm and f:
        c = f[-1] / lead
        off = len(f) - 1 - dm
        for k in range(dm + 1):
            f[off + k] = f[off + k] - c * m[k]
        _ptrim(f)
    return f


def _ppowmod(f, n, m, one):
    r = [one]
    b = _pmod(f, m)
    while n:
        if n & 1:
            r = _pmod(_pmul(r, b, one - one), m)
        b = _pmod(_pmul(b, b, one - one), m)
        n >>= 1
    return r


def _pgcd(f, g):
    f, g = list(f), list(g)
    while g:
        f = _pmod(f, g)
        f, g = g, f
    if f:
        lead = f[-1]
        f = [c / lead for c in f]
    return f


def poly_is_irreducible(coeffs, fld):
    """Test irreducibility of a monic polynomial over fld (dense FF list)."""
    f = [c if isinstance(c, FF) else fld.coerce(c) for c in coeffs]
    n = len(f) - 1
    if n < 1 or not f[-1]:
        return False
    one = fld.one()
    x = [fld.zero(), one]
    # x^(|F|^n) == x mod f, and x^(|F|^(n/l)) - x coprime to f for prime l | n
    xp = _ppowmod(x, fld.size**n, f, one)
    if _ptrim([a - b for a, b in _zip_pad(xp, x, fld.zero())]):
        return False
    for ell in set(_trial_factor(n)):
        xe = _ppowmod(x, fld.size ** (n // ell), f, one)
        diff = _ptrim([a - b for a, b in _zip_pad(xe, x, fld.zero())])
        g = _pgcd(f, diff)
        if len(g) != 1:
            return False
    return True


def find_irreducible(fld, degree, rng_seed=0):
    """Deterministic monic irreducible of given degree over fld."""
    if degree == 1:
        return [fld.one(), fld.one()]  # x + 1
    for idx in range(fld.size**degree):
        digs = []
        i = idx
        for _ in range(degree):
            i, r = divmod(i, fld.size)
            digs.append(FF(fld, r))
        cand = digs + [fld.one()]
        if poly_is_irreducible(cand, fld):
            return cand
    raise ParameterError("no irreducible polynomial found (impossible)")


def poly_roots(coeffs, fld, rng):
    """All roots in fld of a polynomial with coefficients in fld.

    Cantor-Zassenhaus splitting of the linear-root part; exhaustive scan
    for very small fields.
    """
    f = _ptrim([c for c in coeffs])
    if len(f) <= 1:
        return []
    one = fld.one()
    f = [c / f[-1] for c in f]
    if fld.size <= 512:
        return [a for a in fld.elements() if not _peval_is_nonzero(f, a)]
    x = [fld.zero(), one]
    xq = _ppowmod(x, fld.size, f, one)
    lin = _pgcd(f, _ptrim([a - b for a, b in _zip_pad(xq, x, fld.zero())]))
    roots = []
    _cz_split(lin, fld, rng, roots)
    return roots


def _zip_pad(f, g, zero):
    n = max(len(f), len(g))
    f = f + [zero] * (n - len(f))
    g = g + [zero] * (n - len(g))
    return zip(f, g)


def _peval_is_nonzero(f, a):
    acc = f[-1]
    for c in reversed(f[:-1]):
        acc = acc * a + c
    return bool(acc)


def _cz_split(g, fld, rng, out):
    if len(g) <= 1:
        return
    if len(g) == 2:
        out.append(-g[0] / g[1])
        return
    one = fld.one()
    p = fld.char
    n = fld.size
    while True:
        a = FF(fld, rng.randrange(n))
        if p == 2:
            # trace map sum_{i} (a x)^{2^i}
            k = n.bit_length() - 1
            t = _pmod([fld.zero(), a], g)
            acc = t
            for _ in range(k - 1):
                t = _pmod(_pmul(t, t, fld.zero()), g)
                acc = _ptrim([u + v for u, v in _zip_pad(acc, t, fld.zero())])
            h = _pgcd(g, acc)
        else:
            b = _ppowmod([a, one], (n - 1) // 2, g, one)
            b = _ptrim([u - v for u, v in _zip_pad(b, [one], fld.zero())])
            h = _pgcd(g, b)
        if 1 < len(h) < len(g):
            break
    _cz_split(h, fld, rng, out)
    # exact division g / h
    q, r = _pdivmod(g, h)
    assert not r
    _cz_split(q, fld, rng, out)


def _pdivmod(f, g):
    f = list(f)
    q = []
    dg = len(g) - 1
    lead = g[-1]
    while len(f) - 1 >= dg and f:
        c = f[-1] / lead
        off = len(f) - 1 - dg
        q.append((off, c))
        for k in range(dg + 1):
            f[off + k] = f[off + k] - c * g[k]
        _ptrim(f)
    if not q:
        return [], f
    qq = [g[0].fld.zero()] * (q[0][0] + 1)
    for off, c in q:
        qq[off] = c
    return _ptrim(qq), f


@dataclass(frozen=True)
class FieldParams:
    """Tower parameters: q and the coefficients of rho, low to high."""

    q: int
    rho: tuple

    def __post_init__(self):
        factor_prime_power(self.q)
        if len(self.rho) < 3:
            raise ParameterError("rho must have degree at least 2")
        if self.rho[-1] != 1:
            raise ParameterError("rho must be monic")


class Tower:
    """The field tower of one (q, rho) instance, with eta and Frobenius."""

    def __init__(self, params: FieldParams):
        self.params = params
        self.q = params.q
        p, e = factor_prime_power(self.q)
        self.p, self.e = p, e
        self.N = len(params.rho) - 1
        self.Fp = PrimeField(p)
        if e == 1:
            self.Fq = self.Fp
        else:
            self.Fq = ExtField(self.Fp, [c.i for c in find_irreducible(self.Fp, e)], "a")
        rho = []
        for c in params.rho:
            if isinstance(c, FF):
                rho.append(c)
            else:
                if not 0 <= c < self.q:
                    raise ParameterError(f"rho coefficient {c} out of range for F_{self.q}")
                rho.append(FF(self.Fq, c))  # integers are element indices
        if not poly_is_irreducible(rho, self.Fq):
            raise ParameterError("rho is reducible over F_q")
        self.rho = rho
        self.FqN = ExtField(self.Fq, [c.i for c in rho], "eta")
        self.eta = self.FqN.gen()
        self._levels = {1: self.FqN}
        self._level_of = {id(self.FqN): 1}
        self._embeds = {}
        self._eta_pows = {}
        import random

        self._rng = random.Random(20240801)

    # -- structural helpers ------------------------------------------------
    def level_field(self, m):
        if m not in self._levels:
            h = find_irreducible(self.FqN, m)
            fld = ExtField(self.FqN, [c.i for c in h], f"w{m}")
            self._levels[m] = fld
            self._level_of[id(fld)] = m
        return self._levels[m]

    def level_of(self, x: FF):
        if x.fld is self.Fq or x.fld is self.Fp:
            return 0
        m = self._level_of.get(id(x.fld))
        if m is None:
            raise DomainError("element does not belong to this tower")
        return m

    def lift(self, x: FF, m):
        """Lift x to tower level m (m = 0 means F_q itself)."""
        cur = self.level_of(x)
        if cur == m:
            return x
        if cur == 0:
            y = FF(self.FqN, self.FqN.from_base(x.i if x.fld is self.Fq else self.Fq.coerce(x).i))
            return y if m == 1 else self.lift(y, m)
        if m % cur != 0:
            raise DomainError(f"no embedding of level {cur} into level {m}")
        emb = self._embedding(cur, m)
        return emb(x)

    def _embedding(self, m_from, m_to):
        key = (m_from, m_to)
        if key in self._embeds:
            return self._embeds[key]
        src = self.level_field(m_from)
        dst = self.level_field(m_to)
        if m_from == 1:

            def emb(x, dst=dst):
                return FF(dst, dst.from_base(x.i))

        else:
            # image of the level generator: smallest root of its minimal
            # polynomial in the destination field
            hm = [self.lift(FF(self.FqN, c), m_to) for c in src.mod]
            roots = poly_roots(hm, dst, self._rng)
            if not roots:
                raise DomainError("embedding root not found (tower corrupted)")
            r = min(roots, key=lambda t: t.i)
            pows = [dst.one()]
            for _ in range(src.deg - 1):
                pows.append(pows[-1] * r)

            def emb(x, dst=dst, pows=pows, src=src):
                digs = src.digits(x.i)
                acc = dst.zero()
                for d, pw in zip(digs, pows):
                    if d:
                        acc = acc + FF(dst, dst.from_base(d)) * pw
                return acc

        self._embeds[key] = emb
        return emb

    def common(self, x: FF, y: FF):
        """Lift both elements to the smallest common level."""
        mx, my = max(self.level_of(x), 1), max(self.level_of(y), 1)
        m = mx * my // _gcd(mx, my)
        return self.lift(x, m), self.lift(y, m)

    # -- named elements -----------------------------------------------------
    def eta_pow(self, k):
        """eta^(k) = eta^(q^k), exact for any integer k (wraps mod N)."""
        k %= self.N
        if k not in self._eta_pows:
            self._eta_pows[k] = self.eta ** (self.q**k)
        return self._eta_pows[k]

    def frob(self, x: FF, k=1):
        """x -> x^(q^k); negative k uses Frobenius periodicity of the level."""
        m = max(self.level_of(x), 1)
        period = self.N * m
        k %= period
        return x ** (self.q**k)

    def eta_star(self):
        """eta^((1-q)/q): the unique q-th root of eta^(1-q)."""
        y = self.eta ** (1 - self.q)
        return self.frob(y, self.N - 1)

    def roots_of_unity(self, n):
        """All solutions of mu^n = 1 in F_{q^N} (requires n | q^N - 1)."""
        if (self.FqN.size - 1) % n != 0:
            raise ParameterError(f"no full set of {n}-th roots of unity in F_(q^N)")
        g = FF(self.FqN, self.FqN._exp[1]) if self.FqN._log is not None else None
        if g is None:
            # fall back: scan (fields beyond the table limit never need this)
            return [x for x in self.FqN.elements() if x and x**n == self.FqN.one()]
        h = g ** ((self.FqN.size - 1) // n)
        out, cur = [], self.FqN.one()
        for _ in range(n):
            out.append(cur)
            cur = cur * h
        return out

    # -- root extraction ----------------------------------------------------
    def root_q_minus_1(self, c: FF):
        """Deterministic r with r^(q-1) = c, extending the tower if needed."""
        if not c:
            raise DomainError("(q-1)-th root of zero is not defined")
        if self.q == 2:
            return c
        m = max(self.level_of(c), 1)
        c = self.lift(c, m)
        order_bound = self.FqN.size**m - 1 if m > 1 else self.FqN.size - 1
        fld_size = c.fld.size
        d = 1
        while True:
            target_order = fld_size**d - 1
            exp = (target_order // (self.q - 1)) % (fld_size - 1)
            if c**exp == self.lift(self.FqN.one(), m):
                break
            d += 1
            if d > 2 * (self.q - 1) * self.N:
                raise DomainError("no (q-1)-th root found in any admissible extension")
        target = self.level_field(m * d) if d > 1 else c.fld
        ct = self.lift(c, m * d)
        f = [-ct] + [target.zero()] * (self.q - 2) + [target.one()]
        roots = poly_roots(f, target, self._rng)
        if not roots:
            raise DomainError("root search failed despite solvability check")
        return min(roots, key=lambda t: t.i)


def _gcd(a, b):
    while b:
        a, b = b, a % b
    return a


@lru_cache(maxsize=None)
def _tower_cache(q, rho):
    return Tower(FieldParams(q, rho))


def make_tower(params: FieldParams) -> Tower:
    """Build (or fetch) the field tower for the given parameters."""
    return _tower_cache(params.q, tuple(params.rho))
