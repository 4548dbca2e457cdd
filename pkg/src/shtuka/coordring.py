"""The coordinate ring A of P^1 minus the degree-N place of rho.

Elements are p(t)/rho(t)^m with deg p <= N m (regularity at the other
places), kept canonical with m minimal.  Generators T_i = t^i/rho.
"""

from __future__ import annotations

from .errors import DomainError, ParameterError
from .fields import FF
from .ratfunc import Poly, RatFunc


class AElem:
    """p(t)/rho(t)^m over F_q, canonical: m = 0 or rho does not divide p."""

    __slots__ = ("tower", "p", "m")

    def __init__(self, tower, p: Poly, m: int, canonical=False):
        if m < 0:
            raise DomainError("negative rho-power")
        if not canonical:
            rho = _rho_poly(tower)
            while m > 0 and not p.is_zero():
                q, r = p.divmod(rho)
                if r.is_zero():
                    p, m = q, m - 1
                else:
                    break
            if p.is_zero():
                m = 0
        if p.degree() > tower.N * m:
            raise DomainError("not regular away from the rho place (deg p > N m)")
        self.tower = tower
        self.p = p
        self.m = m

    # -- constructors -------------------------------------------------------
    @classmethod
    def zero(cls, tower):
        one = tower.Fq.one()
        return cls(tower, Poly.const(one - one, one), 0, canonical=True)

    @classmethod
    def const(cls, tower, c):
        c = tower.Fq.coerce(c)
        return cls(tower, Poly.const(c, tower.Fq.one()), 0, canonical=True)

    @classmethod
    def T(cls, tower, i):
        if not 0 <= i < tower.N:
            raise ParameterError(f"T_i needs 0 <= i < N, got {i}")
        return cls(tower, Poly.x(tower.Fq.one(), i), 1, canonical=True)

    @classmethod
    def from_poly_over_rho(cls, tower, coeffs, m):
        one = tower.Fq.one()
        p = Poly({e: tower.Fq.coerce(c) for e, c in enumerate(coeffs)}, one)
        return cls(tower, p, m)

    # -- structure ------------------------------------------------------------
    def is_zero(self):
        return self.p.is_zero()

    def deg(self):
        """deg(a) = -N v_rho(a); N m for canonical nonzero elements."""
        if self.is_zero():
            raise DomainError("zero has no degree")
        return self.tower.N * self.m

    def __add__(self, other):
        other = self._coerce(other)
        m = max(self.m, other.m)
        rho = _rho_poly(self.tower)
        p = self.p * rho ** (m - self.m) + other.p * rho ** (m - other.m)
        return AElem(self.tower, p, m)

    __radd__ = __add__

    def __neg__(self):
        return AElem(self.tower, -self.p, self.m, canonical=True)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __mul__(self, other):
        other = self._coerce(other)
        return AElem(self.tower, self.p * other.p, self.m + other.m)

    __rmul__ = __mul__

    def __pow__(self, n):
        if n < 0:
            raise DomainError("A is a ring; negative powers leave it")
        return AElem(self.tower, self.p**n, self.m * n)

    def __eq__(self, other):
        other = self._coerce(other)
        return self.m == other.m and self.p == other.p

    def __hash__(self):
        return hash((self.m, self.p))

    def _coerce(self, other):
        if isinstance(other, AElem):
            return other
        if isinstance(other, (int, FF)):
            return AElem.const(self.tower, other)
        raise DomainError("cannot coerce into A")

    # -- the sign function ------------------------------------------------------
    def sgn_eta(self) -> FF:
        """Sgn_eta(a) = p(eta) in F_(q^N)^* (canonical form makes this exact)."""
        if self.is_zero():
            raise DomainError("Sgn of zero is undefined")
        tw = self.tower
        acc = tw.FqN.zero()
        for e, c in self.p.d.items():
            acc = acc + tw.lift(c, 1) * tw.eta**e
        return acc

    # -- images in H and in H(t) --------------------------------------------------
    def at_theta(self, ctx):
        """iota(a) = p(theta)/rho(theta)^m in H."""
        num = Poly({e: ctx.tower.lift(c, 1) for e, c in self.p.d.items()}, ctx.c_one)
        return RatFunc.from_poly(num) / ctx.rho_theta() ** self.m

    def as_t_function(self, ctx):
        """a(t) as a rational function of t over H."""
        num = Poly(
            {e: ctx.h_const(ctx.tower.lift(c, 1)) for e, c in self.p.d.items()}, ctx.H_one
        )
        return RatFunc.from_poly(num) / ctx.rho_t() ** self.m

    def __repr__(self):
        return f"({self.p!r})/rho^{self.m}"


def _rho_poly(tower):
    one = tower.Fq.one()
    return Poly({e: c for e, c in enumerate(tower.rho)}, one)


def rho_at_zero(tower) -> FF:
    return tower.rho[0]


def gens_I_infinity(tower):
    """Generators T_0, ..., T_(N-1) of the ideal above the infinite place."""
    return [AElem.T(tower, i) for i in range(tower.N)]


def gens_I_zero(tower):
    """Generators T_0 - 1/rho(0), T_1, ..., T_(N-1)."""
    out = [AElem.T(tower, 0) - AElem.const(tower, rho_at_zero(tower).inv())]
    out.extend(AElem.T(tower, i) for i in range(1, tower.N))
    return out


def ideal_generator_products(tower, n_zero, n_inf):
    """Generators of I_0^(n_zero) I_infinity^(n_inf): all generator products."""
    from itertools import combinations_with_replacement

    g0 = gens_I_zero(tower)
    gi = gens_I_infinity(tower)
    out = []
    for picks0 in combinations_with_replacement(g0, n_zero):
        for picksi in combinations_with_replacement(gi, n_inf):
            acc = AElem.const(tower, 1)
            for g in picks0 + picksi:
                acc = acc * g
            out.append(acc)
    return out


def elements_up_to_degree(tower, bound_m, include_zero=False):
    """All a in A with deg(a) <= N * bound_m, listed as p/rho^bound_m."""
    q, N = tower.q, tower.N
    dim = N * bound_m + 1
    one = tower.Fq.one()
    rho_m = _rho_poly(tower) ** bound_m
    out = []
    for idx in range(q**dim):
        digs = []
        i = idx
        for _ in range(dim):
            i, r = divmod(i, q)
            digs.append(r)
        if not include_zero and all(d == 0 for d in digs):
            continue
        p = Poly({e: FF(tower.Fq, tower.Fq.from_int(0)) + _fq_from_index(tower, d) for e, d in enumerate(digs)}, one)
        out.append(AElem(tower, p, bound_m))
    return out


def _fq_from_index(tower, d):
    return FF(tower.Fq, d)


def random_element(tower, rng, max_m=2):
    """Random nonzero element of A (uniform over p of degree <= N max_m)."""
    q, N = tower.q, tower.N
    while True:
        m = rng.randint(0, max_m)
        one = tower.Fq.one()
        coeffs = {e: FF(tower.Fq, rng.randrange(q)) for e in range(N * m + 1)}
        p = Poly(coeffs, one)
        if not p.is_zero():
            return AElem(tower, p, m)
