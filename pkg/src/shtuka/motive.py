"""Expansion in the s-basis of the Anderson motive.

A_L is free over the twisted polynomials on s_0 = 1 with monomials
s_i = f^(0) ... f^(i-1); expanding a(t) in this basis reads off the
twisted-polynomial image of a.  The expansion is computed by greedy
elimination of the deepest pole, and cross-checked against the residue
formula, which is the central two-route consistency of the build.
"""

from __future__ import annotations

from .errors import DomainError, ShtukaError
from .ratfunc import RatFunc, ShtukaContext, residue_of_product


def _pole_profile(ctx: ShtukaContext, g: RatFunc):
    """Normalize g to numerator/(eta-part) by exact division.

    Returns (orders, num, eta_orders) with den = prod (t-eta^(j))^(orders_j)
    implicitly; raises if g has a pole outside the eta-conjugate locus.
    """
    num, den = g.num, g.den
    if num.is_zero():
        return [0] * ctx.N, num, [0] * ctx.N
    eta_ord = []
    eta_part = ctx.T_one.num
    for j in range(ctx.N):
        kd = den.multiplicity(ctx.eta_H(j))
        eta_ord.append(kd)
        if kd:
            eta_part = eta_part * ctx.t_minus_eta(j).num ** kd
    rest, rem = den.divmod(eta_part)
    if not rem.is_zero():
        raise ShtukaError("internal: eta-part division failed")
    if rest.degree() > 0:
        num, rem = num.divmod(rest)
        if not rem.is_zero():
            raise DomainError("pole outside the eta-conjugate locus")
    else:
        num = num.scale(ctx.H_one / rest.coeff(0))
    if num.degree() > sum(eta_ord):
        raise DomainError("pole at infinity: not an element of A_L")
    orders = [eta_ord[j] - (num.multiplicity(ctx.eta_H(j)) if num.d else eta_ord[j]) for j in range(ctx.N)]
    return orders, num, eta_ord


def _staircase_order(ctx, i, j):
    """Pole order of s_i at eta^(j)."""
    if i <= j:
        return 0
    return (i - 1 - j) // ctx.N + 1


def _lead_laurent(ctx, r: RatFunc, alpha, order):
    """Leading Laurent coefficient of r at alpha, given its pole order."""
    kn = r.num.multiplicity(alpha)
    kd = r.den.multiplicity(alpha)
    if kd - kn != order:
        raise ShtukaError("internal: pole order mismatch in s-basis elimination")
    return r.num.taylor_coeff(alpha, kn) / r.den.taylor_coeff(alpha, kd)


def _principal_part(ctx, num, den_ord, alphas, depth):
    """Principal-part table [j][o] = coeff of (t-eta^(j))^(-o), o = 1..depth[j],
    for the function num / prod (t-eta^(j))^(den_ord_j)."""
    zero = ctx.H_one - ctx.H_one
    den = ctx.T_one.num
    for jj, d in enumerate(den_ord):
        if d:
            den = den * ctx.t_minus_eta(jj).num ** d
    r = RatFunc(num, den, reduce=False)
    out = []
    for j, alpha in enumerate(alphas):
        dj = depth[j]
        if dj <= 0 or num.is_zero():
            out.append([])
            continue
        start, cs = _rf_local(r, alpha, den_ord[j] + 1)
        row = [None] * (dj + 1)
        for o in range(1, dj + 1):
            idx = -o - start
            row[o] = cs[idx] if 0 <= idx < len(cs) else zero
        out.append(row)
    return out


def _rf_local(r, alpha, length):
    from .ratfunc import _local_coeffs

    return _local_coeffs(r, alpha, max(length, 1))


def expand_in_s_basis(ctx: ShtukaContext, g: RatFunc):
    """Coefficients c_0..c_n in H with g = sum c_i s_i(t).

    Works entirely on local Laurent principal parts at the eta-conjugate
    points: greedy elimination of the deepest pole is then list arithmetic
    over H, and the constant term is fixed by evaluation at t = theta.
    Vanishing of every principal part certifies the identity exactly.
    """
    orders, gnum, com_ord = _pole_profile(ctx, g)
    alphas = [ctx.eta_H(j) for j in range(ctx.N)]
    zero = ctx.H_one - ctx.H_one
    gpp = _principal_part(ctx, gnum, com_ord, alphas, orders)
    top0 = max((ctx.N * (d - 1) + j + 1 for j, d in enumerate(orders) if d > 0), default=0)
    spp = _s_basis_local_data(ctx, top0, orders, alphas)
    coeffs = {}
    cur = [row[:] if row else [] for row in gpp]
    orders = [max((o for o in range(1, len(cur[j])) if cur[j][o] != zero), default=0) for j in range(ctx.N)]
    guard = 0
    while any(orders):
        guard += 1
        if guard > 10000:
            raise ShtukaError("s-basis elimination failed to terminate (basis bug)")
        top = max(ctx.N * (d - 1) + j + 1 for j, d in enumerate(orders) if d > 0)
        j_star = (top - 1) % ctx.N
        o_star = _staircase_order(ctx, top, j_star)
        if orders[j_star] != o_star:
            raise ShtukaError("internal: staircase does not dominate the profile")
        c = (cur[j_star][o_star] / spp[top][j_star][o_star]).reduced()
        coeffs[top] = c
        for j in range(ctx.N):
            srow = spp[top][j]
            for o in range(1, min(len(cur[j]), len(srow))):
                if srow[o] is not None and srow[o] != zero:
                    cur[j][o] = cur[j][o] - c * srow[o]
        orders = [
            max((o for o in range(1, len(cur[j])) if cur[j][o] != zero), default=0) for j in range(ctx.N)
        ]
    # constant term: evaluate at t = theta, where s_i vanishes for i >= 1
    # (f^(0)(theta) = 0), leaving c_0 = g(theta) -- the Drinfeld condition
    den_val = ctx.H_one
    for j, d in enumerate(com_ord):
        if d:
            den_val = den_val * ctx.theta_minus_eta(j) ** d
    c0 = (gnum.evaluate(ctx.theta) / den_val).reduced() if gnum.d else zero
    if c0:
        coeffs[0] = c0
    n = max(coeffs) if coeffs else 0
    return [coeffs.get(i, zero) for i in range(n + 1)]


def _s_basis_local_data(ctx, top, depth, alphas):
    """Principal parts of s_0..s_top: spp[i][j][o] = coeff of (t-eta^(j))^(-o).

    Built by incremental truncated products of the local expansions of the
    f-twists, which keeps every list at principal-part length.
    """
    zero = ctx.H_one - ctx.H_one
    one = ctx.H_one
    N = ctx.N
    lengths = [2 * d + 2 for d in depth]
    f_loc = [
        [_rf_local(ctx.f_twist(k), alphas[j], lengths[j]) for j in range(N)] for k in range(top)
    ]
    spp = [[None] * N for _ in range(top + 1)]
    cur = []
    for j in range(N):
        cs = [one] + [zero] * (lengths[j] - 1)
        cur.append((0, cs))
        spp[0][j] = [None] + [zero] * depth[j]
    for i in range(1, top + 1):
        nxt = []
        for j in range(N):
            s0, cs0 = cur[j]
            s1, cs1 = f_loc[i - 1][j]
            length = lengths[j]
            prod = [zero] * length
            for a, x in enumerate(cs0):
                if x == zero:
                    continue
                for b, y in enumerate(cs1):
                    if a + b >= length:
                        break
                    prod[a + b] = prod[a + b] + x * y
            nxt.append((s0 + s1, prod))
        cur = nxt
        for j in range(N):
            start, cs = cur[j]
            row = [None] * (depth[j] + 1)
            for o in range(1, depth[j] + 1):
                idx = -o - start
                row[o] = cs[idx] if 0 <= idx < len(cs) else zero
            spp[i][j] = row
    return spp


def coeff_by_residue(ctx: ShtukaContext, a_t: RatFunc, k):
    """-Res over the rho place of a(t) w^(k+1) / (f^(0)...f^(k))."""
    factors = [(a_t, 1), (ctx.h_diff(k + 1), 1)]
    factors += [(ctx.f_twist(i), -1) for i in range(k + 1)]
    acc = None
    for j in range(ctx.N):
        v = residue_of_product(factors, ctx.eta_H(j))
        acc = v if acc is None else acc + v
    return (-acc).reduced()


def expand_by_residues(ctx: ShtukaContext, a_t: RatFunc, deg):
    return [coeff_by_residue(ctx, a_t, k) for k in range(deg + 1)]


def verify_motive_identity(ctx: ShtukaContext, a) -> bool:
    """Check a(t) = sum_k c_k s_k(t) with c_k from the residue formula.

    The greedy elimination proves the expansion identity for its own
    coefficients (the remainder reaches zero exactly), so the check
    reduces to coefficient-wise equality of the two routes.
    """
    a_t = a.as_t_function(ctx)
    deg = a.deg() if not a.is_zero() else 0
    by_res = expand_by_residues(ctx, a_t, deg)
    by_greedy = expand_in_s_basis(ctx, a_t)
    if len(by_greedy) > len(by_res):
        return False
    by_greedy += [ctx.H_one - ctx.H_one] * (len(by_res) - len(by_greedy))
    return all(x == y for x, y in zip(by_res, by_greedy))
