"""Exponential and logarithm coefficient sequences and their evaluations.

D_n and L_n are carried as factored monomials over H, which keeps the
deep recursions (n up to 12 and beyond) exact without expanding the
underlying rational functions.  Series evaluation goes through the
Puiseux embedding with an explicit tail-domination rule.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import DomainError, PrecisionError
from .ratfunc import (
    FactoredH,
    Poly,
    RatFunc,
    ShtukaContext,
    SigmaExp,
    factored_equal,
    factored_sum_is_zero,
)
from .series import EmbeddingH, PuiseuxSeries


@dataclass
class CoeffSeq:
    """A named sequence of H-coefficients in factored form."""

    kind: str
    values: list  # FactoredH, index 0..n_max

    def __getitem__(self, i):
        return self.values[i]

    def __len__(self):
        return len(self.values)

    def ratfunc(self, i) -> RatFunc:
        return self.values[i].as_ratfunc()


def d_coeffs(ctx: ShtukaContext, n_max) -> CoeffSeq:
    """D_n by the recursion D_n = D_(n-1)^q (theta-theta^(q^n)) /
    ((theta^(q^n)-eta)(theta-eta))."""
    q = ctx.q
    vals = [FactoredH.one(ctx)]
    for n in range(1, n_max + 1):
        step = (
            FactoredH.atom_a(ctx, n)
            * FactoredH.atom_b(ctx, -n, -(q**n))
            * FactoredH.atom_b(ctx, 0, -1)
        )
        vals.append(vals[-1].qpow() * step)
    return CoeffSeq("D", vals)


def d_closed_form(ctx: ShtukaContext, n) -> FactoredH:
    """The explicit product for D_n: brackets of theta times a Theta power."""
    q, N = ctx.q, ctx.N
    acc = FactoredH.one(ctx)
    for k in range(1, n + 1):
        acc = acc * FactoredH.atom_a(ctx, k, q ** (n - k))
    e = SigmaExp(N, {k: (q**n) * ((n + k) // N) for k in range(N)}) + SigmaExp.const(N, ctx.W(n))
    return acc * FactoredH.theta_power(ctx, e)


def l_coeffs(ctx: ShtukaContext, n_max) -> CoeffSeq:
    """L_n by the recursion with denominator
    (theta-eta^(n-2)) (theta-eta)^(q^(n-1)) (theta-eta^(-1))^(q^n - q^(n-1))."""
    q = ctx.q
    vals = [FactoredH.one(ctx)]
    for n in range(1, n_max + 1):
        step = (
            FactoredH.atom_a(ctx, n)
            * FactoredH.atom_b(ctx, n - 2, -1)
            * FactoredH.atom_b(ctx, 0, -(q ** (n - 1)))
            * FactoredH.atom_b(ctx, -1, -(q**n - q ** (n - 1)))
        )
        vals.append(vals[-1] * step)
    return CoeffSeq("L", vals)


def l_closed_form(ctx: ShtukaContext, j) -> FactoredH:
    """L_j = prod (theta - theta^(q^k)) times the floor-pattern Theta power."""
    q, N = ctx.q, ctx.N
    acc = FactoredH.one(ctx)
    for k in range(1, j + 1):
        acc = acc * FactoredH.atom_a(ctx, k)
    e = SigmaExp(N, {N - 1: q**j})
    e = e + SigmaExp(N, {k: (j + N - k - 2) // N for k in range(N)})
    e = e + SigmaExp.const(N, ctx.W(j))
    return acc * FactoredH.theta_power(ctx, e)


def l_bracket_form(ctx: ShtukaContext, j, twist2=False) -> FactoredH:
    """L_j = <1>...<j> Theta^(q^j(sigma^(N-1)-1) - sigma^j - sigma^(j-1) + 2),
    or the sigma^2-twisted variant with exponent zeta_j-style bookkeeping."""
    q, N = ctx.q, ctx.N
    acc = FactoredH.one(ctx)
    for k in range(1, j + 1):
        acc = acc * FactoredH.bracket(ctx, k)
    if twist2:
        e = SigmaExp(N, {1: q**j - 1, 0: -(q**j - 1)})
        e = e + SigmaExp(N, {2: ctx.W(j), 0: -ctx.W(j)})
    else:
        e = SigmaExp(N, {N - 1: q**j, 0: 2 - q**j})
        e = e + SigmaExp(N, {j % N: -1, (j - 1) % N: -1})
    return acc * FactoredH.theta_power(ctx, e)


def l_by_residue(ctx: ShtukaContext, j) -> FactoredH:
    """(-1)^j / L_j as the residue at t = theta of w^(j+1)/(f^(0)..f^(j)),
    written in closed factored form (the pole at theta is simple)."""
    q, N = ctx.q, ctx.N
    one = ctx.c_one
    # -(theta-eta)^2 h^(j+1)(theta) / prod_{i=1..j} f^(i)(theta)
    h = (
        FactoredH.atom_b(ctx, N - 1, q**j)
        * FactoredH.atom_b(ctx, 0, -(q**j))
        * FactoredH.atom_b(ctx, j - 1, -1)
        * FactoredH.atom_b(ctx, j, -1)
    ) * (-one)
    acc = FactoredH.atom_b(ctx, 0, 2) * h * (-one)
    for i in range(1, j + 1):
        acc = acc / (FactoredH.bracket(ctx, i) * (-one))
    return acc


def convolution_holds(ctx: ShtukaContext, n, D: CoeffSeq, L: CoeffSeq) -> bool:
    """sum_{j=0..n} (-1)^(n-j) / (D_j L_(n-j)^(q^j)) = 0, exactly."""
    one = ctx.c_one
    q = ctx.q
    terms = []
    for j in range(n + 1):
        sign = one if (n - j) % 2 == 0 else -one
        terms.append((D[j] * (L[n - j] ** (q**j))).inv() * sign)
    return factored_sum_is_zero(terms)


def log_exp_formal_identity(ctx: ShtukaContext, k, D: CoeffSeq, L: CoeffSeq) -> bool:
    """Coefficient of xi^(q^k) in log(exp(xi)): sum (-1)^m / (L_m D_n^(q^m))."""
    one = ctx.c_one
    q = ctx.q
    terms = []
    for m in range(k + 1):
        n = k - m
        sign = one if m % 2 == 0 else -one
        terms.append((L[m] * (D[n] ** (q**m))).inv() * sign)
    return factored_sum_is_zero(terms)


def d_twist_formula_holds(ctx: ShtukaContext, n, j, D: CoeffSeq) -> bool:
    """D_n^(sigma^j) = D_n ((theta-eta^(0))..(theta-eta^(j-1)))^(q^n sigma^(-n) - q^n)
    (Theta^(sigma^j - 1))^(W_n)."""
    q, N = ctx.q, ctx.N
    lhs = D[n].sigma(j)
    prod = FactoredH.one(ctx)
    for k in range(j):
        prod = prod * (
            FactoredH.atom_b(ctx, k - n, q**n) * FactoredH.atom_b(ctx, k, -(q**n))
        )
    tpow = FactoredH.theta_power(ctx, SigmaExp(N, {j % N: -ctx.W(n), 0: ctx.W(n)}))
    return factored_equal(lhs, D[n] * prod * tpow)


def d_phi_coeffs(ctx: ShtukaContext, n_max, D: CoeffSeq = None) -> CoeffSeq:
    """Coefficients of the exponential of the dual module:
    D_n^Phi = (theta-eta)/(theta-eta^(1)) D_n Theta^(2q^n)
              (theta^(q^n)-eta)(theta^(q^n)-eta^(1))."""
    q = ctx.q
    D = D or d_coeffs(ctx, n_max)
    pref = FactoredH.atom_b(ctx, 0) * FactoredH.atom_b(ctx, 1, -1)
    vals = []
    for n in range(n_max + 1):
        v = (
            pref
            * D[n]
            * FactoredH.atom_b(ctx, 0, -2 * q**n)
            * FactoredH.atom_b(ctx, -n, q**n)
            * FactoredH.atom_b(ctx, 1 - n, q**n)
        )
        vals.append(v)
    return CoeffSeq("D_Phi", vals)


def exp_phi_vs_square_identity(ctx: ShtukaContext, n, D: CoeffSeq, DPhi: CoeffSeq) -> bool:
    """Termwise form of exp_Phi(U) = (tau + Theta)^2 exp_(0)(U / Theta^2)."""
    q = ctx.q
    one = ctx.c_one
    terms = [DPhi[n].inv() * (-one)]
    # tau^2 part
    if n >= 2:
        piece = (D[n - 2] * FactoredH.atom_b(ctx, 0, -2 * q ** (n - 2))).qpow(2).inv()
        terms.append(piece)
    # (Theta + Theta^q) tau part
    if n >= 1:
        base = (D[n - 1] * FactoredH.atom_b(ctx, 0, -2 * q ** (n - 1))).qpow(1).inv()
        terms.append(base * FactoredH.atom_b(ctx, 0, -1))
        terms.append(base * FactoredH.atom_b(ctx, 0, -q))
    # Theta^2 part
    terms.append((D[n] * FactoredH.atom_b(ctx, 0, -2 * q**n)).inv() * FactoredH.atom_b(ctx, 0, -2))
    return factored_sum_is_zero(terms)


def log_phi_coeff(ctx: ShtukaContext, n) -> FactoredH:
    """Coefficient of xi^(q^n) in log_Phi: 1/(f^(1)(theta)...f^(n)(theta))."""
    one = ctx.c_one
    acc = FactoredH.one(ctx)
    for i in range(1, n + 1):
        acc = acc / (FactoredH.bracket(ctx, i) * (-one))
    return acc


def log_phi_conjugation_holds(ctx: ShtukaContext, n, L: CoeffSeq) -> bool:
    """log_Phi = C^(-1) log_(2)(C .) termwise, branch-free:
    (-1)^n (C^(q-1))^(W_n) / L_n^(sigma^2) = 1/(f^(1)...f^(n))(theta)."""
    q, N = ctx.q, ctx.N
    one = ctx.c_one
    # C^(q-1) = Theta^(sigma^2-1) (Theta^(sigma-1))^(q-1)
    cq1 = FactoredH.theta_power(
        ctx, SigmaExp(N, {2: 1, 0: -1}) + SigmaExp(N, {1: q - 1, 0: -(q - 1)})
    )
    sign = one if n % 2 == 0 else -one
    lhs = (cq1 ** ctx.W(n)) * L[n].sigma(2).inv() * sign
    return factored_equal(lhs, log_phi_coeff(ctx, n))


def e_k_poly(ctx: ShtukaContext, k, D: CoeffSeq = None, L: CoeffSeq = None):
    """The separable polynomial with zero set = elements of degree <= Nk.

    Returns the coefficients of z^(q^j) for j = 0..Nk+1 as H elements.
    """
    n_top = ctx.N * k + 1
    D = D or d_coeffs(ctx, n_top)
    L = L or l_coeffs(ctx, n_top)
    one = ctx.c_one
    out = []
    for j in range(n_top + 1):
        sign = one if j % 2 == 0 else -one
        c = L[n_top] / (D[j] * (L[n_top - j] ** (ctx.q**j)))
        out.append(c.as_ratfunc().reduced() * ctx.h_const(sign))
    return out


# -- series evaluation --------------------------------------------------------


class ExpEvaluator:
    """Truncated exponential/logarithm evaluation with tail certificates."""

    def __init__(self, ctx: ShtukaContext, emb: EmbeddingH, n_max=24):
        self.ctx = ctx
        self.emb = emb
        self.D = d_coeffs(ctx, n_max)
        self.L = l_coeffs(ctx, n_max)
        self.DPhi = d_phi_coeffs(ctx, n_max, self.D)
        self._cache = {}

    def coeff_series(self, kind, n, j, prec):
        key = (kind, n, j, prec)
        if key not in self._cache:
            seq = {"D": self.D, "L": self.L, "DPhi": self.DPhi}[kind]
            fm = seq[n].sigma(j) if j else seq[n]
            self._cache[key] = self.emb.embed_factored(fm, prec)
        return self._cache[key]

    def _sum_series(self, kind, j, xi: PuiseuxSeries, prec, signs=False):
        seq = {"D": self.D, "L": self.L, "DPhi": self.DPhi}[kind]
        vxi = xi.valuation_or_prec()
        if xi.is_zero_to_prec():
            return PuiseuxSeries.zero(xi.tower, prec), prec
        if kind == "L" and vxi < 0:
            # tail domination for the logarithm needs v(xi) >= 0
            raise PrecisionError("logarithm argument outside the convergence rule")
        acc = PuiseuxSeries.zero(xi.tower, prec)
        threshold = max(prec, 2)
        n = 0
        while True:
            if n >= len(seq):
                raise PrecisionError(
                    f"series tail not dominated within {len(seq)} terms",
                    achievable=None,
                )
            fm = seq[n].sigma(j) if j else seq[n]
            tail_val = (self.ctx.q**n) * vxi - fm.valuation()
            if tail_val >= threshold:
                return acc.truncate(prec), tail_val
            den = self.coeff_series(kind, n, j, prec + max(0, -fm.valuation()) + 2)
            term = xi.qpow(n) / den
            if signs and n % 2 == 1:
                term = -term
            acc = acc + term
            n += 1

    def exp(self, j, xi: PuiseuxSeries, prec):
        """exp of the sigma^j twist of the standard module at xi."""
        return self._sum_series("D", j, xi, prec)[0]

    def log(self, j, xi: PuiseuxSeries, prec):
        return self._sum_series("L", j, xi, prec, signs=True)[0]

    def exp_phi(self, xi: PuiseuxSeries, prec):
        return self._sum_series("DPhi", 0, xi, prec)[0]
