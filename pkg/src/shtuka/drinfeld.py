"""Rank-one Drinfeld modules: standard models, Hayes modules, annihilators,
Galois action on the narrow class field, and isogenies between twists.

The standard module comes out of the Anderson motive two ways (residue
formula and linear-factor factorization); Hayes modules live over the
narrow class field H+ = H[u]/(u^W - (-Theta)^(gamma_N)) and are reached
from the standard module by the scalar isogeny with ell^(q-1) = -u/Theta,
which turns into exact H+ arithmetic through (q-1)-power bookkeeping.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .coordring import AElem, ideal_generator_products
from .errors import DomainError, ParameterError
from .fields import FF
from .motive import expand_by_residues, expand_in_s_basis
from .ore import OrePoly, gcrd
from .ratfunc import Poly, RatFunc, ShtukaContext, SigmaExp, eta_reduce, twisted_power


@dataclass
class DrinfeldModule:
    """Images of the generators T_0..T_(N-1), plus provenance."""

    ctx: ShtukaContext
    images: list
    route: str
    base: str = "H"
    twist: int = 0

    def image(self, i):
        return self.images[i]

    def leading(self, i):
        return self.images[i].leading()

    def type_constant(self):
        """LT(T_1)/LT(T_0): a root of rho identifying the module type."""
        return self.leading(1) / self.leading(0)


# -- the bracketed Theta quantities and the standard module -----------------


def ft_theta(ctx: ShtukaContext, i, l):
    """The H-quantities entering the linear-factor form of the standard module."""
    q = ctx.q
    base = ctx.twisted_theta(ctx.gamma_exp(i) * (1 - q)) * ctx.Theta ** (q**i)
    if i < l:
        return base
    e = -(q**i) if i == l else q ** (i - 1) * (1 - q) * (i - l) - q**i
    return ctx.theta * ctx.h_const(ctx.tower.eta**e) * base


def psi_via_residue(ctx: ShtukaContext) -> DrinfeldModule:
    """Standard module from the residue formula of the motive."""
    images = []
    for n in range(ctx.N):
        a_t = AElem.T(ctx.tower, n).as_t_function(ctx)
        cs = expand_by_residues(ctx, a_t, ctx.N)
        images.append(OrePoly(cs, ctx.q, ctx.H_one))
    return DrinfeldModule(ctx, images, route="residue")


def annihilator_closed_form(ctx: ShtukaContext, n, j) -> OrePoly:
    """Annihilator of I_0^n I_infinity^(j-n) for the standard module."""
    if not 0 <= n <= j:
        raise ParameterError("need 0 <= n <= j")
    acc = OrePoly.const(ctx.H_one, ctx.q, ctx.H_one)
    for i in range(j):
        factor = OrePoly([ft_theta(ctx, i, j - n), ctx.H_one], ctx.q, ctx.H_one)
        acc = factor * acc
    return acc


def psi_via_factorization(ctx: ShtukaContext, k=0) -> DrinfeldModule:
    """Standard module (sigma^k twist) from the linear-factor formula."""
    q, N = ctx.q, ctx.N
    images = []
    lead = ctx.twisted_theta(ctx.gamma_exp(N) - SigmaExp.const(N, ctx.W(N)))
    for n in range(N):
        scal = ctx.h_const(ctx.tower.eta ** (n * q ** (N - 1))) * lead
        img = annihilator_closed_form(ctx, n, N).scale_left(scal)
        images.append(img)
    mod = DrinfeldModule(ctx, images, route="factorization")
    return sigma_twist_module(mod, k) if k % N else mod


def sigma_twist_module(mod: DrinfeldModule, k) -> DrinfeldModule:
    ctx = mod.ctx
    images = [
        OrePoly([ctx.sigma_H(c, k) for c in img.coeffs], ctx.q, ctx.H_one) for img in mod.images
    ]
    return DrinfeldModule(ctx, images, route=mod.route, base=mod.base, twist=(mod.twist + k) % ctx.N)


def psi_of(ctx: ShtukaContext, a: AElem, route="greedy") -> OrePoly:
    """Image of an arbitrary element of A under the standard module."""
    if a.is_zero():
        return OrePoly.zero(ctx.q, ctx.H_one)
    a_t = a.as_t_function(ctx)
    cs = (
        expand_in_s_basis(ctx, a_t)
        if route == "greedy"
        else expand_by_residues(ctx, a_t, a.deg())
    )
    return OrePoly(cs, ctx.q, ctx.H_one)


def psi_of_ideal(ctx: ShtukaContext, n, j, route="ore") -> OrePoly:
    """Annihilator of I_0^n I_infinity^(j-n) as a gcrd of generator images.

    Generator products map to products of generator images (Psi is a ring
    homomorphism, which the axioms suite verifies independently).
    """
    if route == "ore":
        from .coordring import gens_I_infinity, gens_I_zero
        from itertools import combinations_with_replacement

        base = {i: psi_of(ctx, g) for i, g in enumerate(gens_I_zero(ctx.tower))}
        basei = {i: psi_of(ctx, g) for i, g in enumerate(gens_I_infinity(ctx.tower))}
        imgs = []
        for picks0 in combinations_with_replacement(range(ctx.N), n):
            for picksi in combinations_with_replacement(range(ctx.N), j - n):
                acc = OrePoly.const(ctx.H_one, ctx.q, ctx.H_one)
                for i in picks0:
                    acc = acc * base[i]
                for i in picksi:
                    acc = acc * basei[i]
                imgs.append(acc)
    else:
        gens = ideal_generator_products(ctx.tower, n, j - n)
        imgs = [psi_of(ctx, g, route) for g in gens]
    return gcrd(imgs, simplify=lambda c: eta_reduce(ctx, c))


# -- the narrow class field --------------------------------------------------


class HPlus:
    """H[u]/(u^W_N - (-Theta)^(gamma_N)): the coefficient field of Hayes modules."""

    def __init__(self, ctx: ShtukaContext):
        self.ctx = ctx
        self.W = ctx.W(ctx.N)
        self.rel = twisted_power(-ctx.Theta, ctx.gamma_exp(ctx.N), ctx.sigma_fn_H())
        self._mod = Poly({0: -self.rel, self.W: ctx.H_one}, ctx.H_one)
        self.one = UElem(self, Poly.const(ctx.H_one, ctx.H_one))
        self.zero = UElem(self, Poly({}, ctx.H_one))
        self.u = UElem(self, Poly.x(ctx.H_one))
        self._sig_u = None
        self._ell_pows = None

    def const(self, h: RatFunc):
        return UElem(self, Poly.const(h, self.ctx.H_one))

    def reduce(self, p: Poly):
        if p.degree() >= self.W:
            p = p.divmod(self._mod)[1]
        return p

    def sigma_inf(self, x: "UElem", k=1):
        """sigma_infinity: u -> (theta-eta)^(q-1) u^q, eta -> eta^q."""
        for _ in range(k % (self.ctx.N * self.W) if k else 0):
            x = self._sigma_inf_once(x)
        return x

    def _sigma_inf_once(self, x: "UElem"):
        ctx = self.ctx
        if self._sig_u is None:
            img = (self.u**ctx.q).scale(ctx.theta_minus_eta(0) ** (ctx.q - 1))
            pows = [self.one]
            for _ in range(self.W - 1):
                pows.append(pows[-1] * img)
            self._sig_u = pows
        acc = self.zero
        for e, c in x.p.d.items():
            acc = acc + self._sig_u[e].scale(ctx.sigma_H(c, 1))
        return acc

    def m_mu(self, x: "UElem", mu: FF):
        ctx = self.ctx
        out = {}
        for e, c in x.p.d.items():
            out[e] = c * ctx.h_const(mu**e)
        return UElem(self, Poly(out, ctx.H_one))

    def sigma_0(self, x: "UElem", k=1):
        """sigma_0 = sigma_infinity composed with the eta_*-rotation."""
        es = self.ctx.tower.eta_star()
        for _ in range(k):
            x = self._sigma_inf_once(self.m_mu(x, es))
        return x

    def u_k_mu(self, k, mu: FF):
        """The Hayes parameter sigma_infinity^k (mu-rotation of u)."""
        return self.sigma_inf(self.m_mu(self.u, mu), k)

    def delta_const(self, k):
        """theta / eta^(k) as an H constant (the delta-multiplier for eta_x = eta^(k))."""
        return self.ctx.theta * self.ctx.h_const(self.ctx.tower.eta_pow(k).inv())

    def minus_theta_over_u(self):
        """(-Theta)/u = ell^(1-q): the (q-1)-power of the standard isogeny scalar."""
        return self.const(-self.ctx.Theta) * self.u.inv()

    def ell_power(self, m):
        """ell^(1 - q^m) = (ell^(1-q))^(W_m) in H+, branch-free."""
        if self._ell_pows is None:
            self._ell_pows = [self.one]
        while len(self._ell_pows) <= m:
            k = len(self._ell_pows)
            self._ell_pows.append(self._ell_pows[-1] ** self.ctx.q * self.minus_theta_over_u())
        return self._ell_pows[m]


class UElem:
    """Element of the narrow class field: a u-polynomial of degree < W_N over H."""

    __slots__ = ("hp", "p")

    def __init__(self, hp: HPlus, p: Poly):
        self.hp = hp
        self.p = hp.reduce(p)

    @property
    def char(self):
        return self.hp.ctx.c_one.char

    def ring_one(self):
        return self.hp.one

    def is_zero(self):
        return self.p.is_zero()

    def __bool__(self):
        return not self.is_zero()

    def _coerce(self, other):
        if isinstance(other, UElem):
            return other
        if isinstance(other, RatFunc):
            return self.hp.const(other)
        if isinstance(other, int):
            one = self.hp.ctx.H_one
            from .ratfunc import _int_in

            return self.hp.const(RatFunc.const(_int_in(one.one, other), one.one))
        raise DomainError("cannot coerce into the narrow class field")

    def __add__(self, other):
        other = self._coerce(other)
        return UElem(self.hp, self.p + other.p)

    __radd__ = __add__

    def __neg__(self):
        return UElem(self.hp, -self.p)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        return UElem(self.hp, self.p * other.p)

    __rmul__ = __mul__

    def scale(self, h: RatFunc):
        return UElem(self.hp, self.p.scale(h))

    def inv(self):
        if self.is_zero():
            raise DomainError("inverse of zero in the narrow class field")
        g, s, _ = self.p.ext_gcd(self.hp._mod)
        if g.degree() != 0:
            raise DomainError("non-invertible element (relation polynomial reducible?)")
        c = g.coeff(0)
        return UElem(self.hp, s.scale(self.hp.ctx.H_one / c))

    def __truediv__(self, other):
        return self * self._coerce(other).inv()

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def __pow__(self, n):
        if n < 0:
            return self.inv() ** (-n)
        r = self.hp.one
        b = self
        while n:
            if n & 1:
                r = r * b
            if n > 1:
                b = b * b
            n >>= 1
        return r

    def __eq__(self, other):
        try:
            other = self._coerce(other)
        except DomainError:
            return NotImplemented
        return (self.p - other.p).is_zero()

    def reduced(self):
        return UElem(self.hp, self.p.frob_all(lambda h: h.reduced()))

    def __repr__(self):
        return f"U({self.p!r})"


# -- Hayes modules ------------------------------------------------------------


def hayes_of_a(ctx: ShtukaContext, hp: HPlus, a: AElem) -> OrePoly:
    """psi^u_a = ell Psi_a ell^(-1): coefficients Psi_a[m] * ell^(1-q^m)."""
    base = psi_of(ctx, a)
    coeffs = [hp.ell_power(m).scale(c) for m, c in enumerate(base.coeffs)]
    return OrePoly(coeffs, ctx.q, hp.one)


def galois_apply_ore(hp: HPlus, g, P: OrePoly) -> OrePoly:
    return OrePoly([galois_apply(hp, g, c) for c in P.coeffs], P.q, hp.one)


@dataclass(frozen=True)
class GaloisAut:
    """sigma_infinity^k followed by the mu-rotation; the full Galois group."""

    k: int
    mu_index: int  # index of mu in F_(q^N)


def galois_apply(hp: HPlus, g: GaloisAut, x: UElem) -> UElem:
    mu = FF(hp.ctx.tower.FqN, g.mu_index)
    return hp.sigma_inf(hp.m_mu(x, mu), g.k)


def hayes_module(ctx: ShtukaContext, hp: HPlus, k=0, mu: FF = None) -> DrinfeldModule:
    """The Hayes module attached to the parameter u_(k,mu)."""
    tw = ctx.tower
    mu = mu if mu is not None else tw.FqN.one()
    if mu ** hp.W != tw.FqN.one():
        raise ParameterError("mu must be a W_N-th root of unity")
    images = []
    for n in range(ctx.N):
        img = hayes_of_a(ctx, hp, AElem.T(tw, n))
        g = GaloisAut(k % ctx.N, mu.i)
        images.append(galois_apply_ore(hp, g, img))
    return DrinfeldModule(ctx, images, route="hayes", base="H+", twist=k % ctx.N)


def hayes_image_factored(ctx: ShtukaContext, hp: HPlus, k, mu: FF, n) -> OrePoly:
    """psi^(u_(k,mu))_(T_n) from the explicit linear-factor formula."""
    scal = hp.const(ctx.h_const(ctx.tower.eta_pow(k - 1) ** n))
    return psi_subset_factorization(ctx, hp, k, mu, ctx.N, set(range(ctx.N - n, ctx.N))).scale_left(
        scal
    )


def psi_subset_factorization(ctx, hp: HPlus, k, mu: FF, j, S) -> OrePoly:
    """psi_(j,S) for the Hayes module of u_(k,mu): the subset-indexed product."""
    x0 = hp.u_k_mu(k, mu)
    acc = OrePoly.const(hp.one, ctx.q, hp.one)
    for i in range(j):
        s_minus = sum(1 for s in S if s < i)
        in_S = 1 if i in S else 0
        y = hp.sigma_inf(x0, i - s_minus)
        y = hp.sigma_0(y, s_minus)
        if in_S:
            # the eta-index of the current conjugate is k + i
            y = y.scale(hp.delta_const(k + i))
        acc = OrePoly([-y, hp.one], ctx.q, hp.one) * acc
    return acc


def hayes_annihilator(ctx, hp: HPlus, k, mu: FF, n, j) -> OrePoly:
    """Annihilator of I_0^n I_infinity^(j-n) for psi^(u_(k,mu)) via gcrd."""
    gens = ideal_generator_products(ctx.tower, n, j - n)
    g = GaloisAut(k % ctx.N, mu.i)
    imgs = [galois_apply_ore(hp, g, hayes_of_a(ctx, hp, a)) for a in gens]
    return gcrd(imgs, simplify=lambda c: c.reduced())


# -- isogenies between the twists ---------------------------------------------


@dataclass
class IsogenyData:
    """lambda = C * P with C^(q-1) = radicand * hfactor^(q-1) in H."""

    i: int
    j: int
    monic_part: OrePoly
    radicand: RatFunc  # Theta^(sigma^j - sigma^i)
    hfactor: RatFunc  # Theta^(sigma^i (gamma_(j-i) - W_(j-i)))
    d_radicand: RatFunc  # same radicand, for the constant term of lambda
    d_hfactor: RatFunc  # Theta^(sum_(l=i..j-1) sigma^l)


def isogeny(ctx: ShtukaContext, i, j) -> IsogenyData:
    if not j > i >= 0:
        raise ParameterError("isogeny needs j > i >= 0")
    acc = OrePoly.const(ctx.H_one, ctx.q, ctx.H_one)
    for l in range(j - i):
        c = ctx.sigma_H(ft_theta(ctx, l, j - i), i)
        acc = OrePoly([c, ctx.H_one], ctx.q, ctx.H_one) * acc
    radicand = ctx.Theta_sig(j) / ctx.Theta_sig(i)
    hfactor = ctx.sigma_H(
        ctx.twisted_theta(ctx.gamma_exp(j - i) - SigmaExp.const(ctx.N, ctx.W(j - i))), i
    )
    d_h = ctx.H_one
    for l in range(i, j):
        d_h = d_h * ctx.Theta_sig(l)
    return IsogenyData(i, j, acc, radicand, hfactor, radicand, d_h)


def isogeny_identity_holds(ctx: ShtukaContext, iso: IsogenyData, a: AElem) -> bool:
    """lambda Psi^(i)_a = Psi^(j)_a lambda, checked branch-free in H.

    Conjugating by the scalar C turns the identity into
    P * Psi^(i)_a == (C^(-1) Psi^(j)_a C) * P, whose coefficients pick up
    only integer powers of C^(q-1).
    """
    q = ctx.q
    base = psi_of(ctx, a)
    psi_i = OrePoly([ctx.sigma_H(c, iso.i) for c in base.coeffs], q, ctx.H_one)
    psi_j = OrePoly([ctx.sigma_H(c, iso.j) for c in base.coeffs], q, ctx.H_one)
    cq1 = iso.radicand * iso.hfactor ** (q - 1)
    conj = OrePoly(
        [c * cq1 ** ctx.W(m) for m, c in enumerate(psi_j.coeffs)], q, ctx.H_one
    )
    return iso.monic_part * psi_i == conj * iso.monic_part
