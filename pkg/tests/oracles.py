"""Independent reference solvers for tiny planning instances.

``dense_program`` writes the co-optimized model for a small scenario from
scratch (its own variable order, its own discounting loops) and
``vertex_minimum`` minimizes it by enumerating every basic solution. Neither
touches the package's model assembly or LP solver.
"""

from __future__ import annotations

import itertools

import numpy as np
from scipy.linalg import null_space


def discount_sum(r: float, first: int, last: int) -> float:
    total = 0.0
    for t in range(first, last + 1):
        total += 1.0 / (1.0 + r) ** t
    return total


def dense_program(sc):
    """(c, A_eq, b_eq, A_le, b_le) for a single-epoch scenario without policies.

    Variables are x >= 0 except corridor flows, which are free. Unserved
    energy is a variable tied down by the balance equalities.
    """
    assert len(sc.epochs) == 1
    ep = sc.epochs[0]
    r = sc.options.discount_rate
    weight = discount_sum(r, ep.start_year_offset, ep.start_year_offset + ep.duration - 1)
    invest = discount_sum(r, ep.start_year_offset, sc.epochs[-1].start_year_offset + sc.epochs[-1].duration - 1)
    rsv = 0.0 if sc.options.reliability_mode == "elcc_market" else sc.options.rsv
    Z, H = len(sc.zones), sc.load.shape[2]
    names = []
    cost = []
    free = []

    def var(name, c=0.0, is_free=False):
        names.append(name)
        cost.append(c)
        free.append(is_free)
        return len(names) - 1

    X = {(z, g.id): var(("X", z, g.id), invest * g.capital_cost[0, z] * g.crf[0, z])
         for z in range(Z) for g in sc.gen_techs}
    XS = {(z, s.id): var(("XS", z, s.id), invest * s.capital_cost[0, z] * s.crf[0, z])
          for z in range(Z) for s in sc.stor_techs}
    XL = {c.id: var(("XL", c.id), invest * c.cost_per_mw_mile * c.length * c.crf) for c in sc.corridors}
    Q = {(z, g.id, h): var(("Q", z, g.id, h), weight * g.var_cost[0, z])
         for z in range(Z) for g in sc.gen_techs for h in range(H)}
    D, C, S = {}, {}, {}
    for z in range(Z):
        for s in sc.stor_techs:
            for h in range(H):
                D[z, s.id, h] = var(("D", z, s.id, h))
                C[z, s.id, h] = var(("C", z, s.id, h))
                S[z, s.id, h] = var(("S", z, s.id, h))
    U = {(z, h): var(("U", z, h), weight * sc.options.voll) for z in range(Z) for h in range(H)}
    F = {(c.id, h): var(("F", c.id, h), is_free=True) for c in sc.corridors for h in range(H)}

    n = len(names)
    eq_rows, eq_rhs, le_rows, le_rhs = [], [], [], []

    def row(terms):
        a = np.zeros(n)
        for j, v in terms:
            a[j] += v
        return a

    def le(terms, rhs):
        le_rows.append(row(terms))
        le_rhs.append(rhs)

    def eq(terms, rhs):
        eq_rows.append(row(terms))
        eq_rhs.append(rhs)

    for j in range(n):
        if not free[j]:
            le([(j, -1.0)], 0.0)
    for z in range(Z):
        for g in sc.gen_techs:
            for h in range(H):
                cf = g.cap_factor[0, z, h]
                le([(Q[z, g.id, h], 1.0), (X[z, g.id], -cf)], g.capacity[0, z] * cf)
        for s in sc.stor_techs:
            P, E, dur, eta = s.power_capacity[0, z], s.energy_capacity[0, z], s.duration, s.efficiency
            for h in range(H):
                le([(D[z, s.id, h], 1.0), (XS[z, s.id], -1.0)], P)
                le([(C[z, s.id, h], 1.0), (XS[z, s.id], -1.0)], P)
                le([(S[z, s.id, h], 1.0), (XS[z, s.id], -dur)], E)
            eq([(S[z, s.id, 0], 1.0), (C[z, s.id, 0], -eta), (D[z, s.id, 0], 1.0), (XS[z, s.id], -dur / 2)], E / 2)
            for h in range(1, H):
                eq([(S[z, s.id, h], 1.0), (S[z, s.id, h - 1], -1.0), (C[z, s.id, h], -eta), (D[z, s.id, h], 1.0)], 0.0)
            eq([(S[z, s.id, H - 1], 1.0), (XS[z, s.id], -dur / 2)], E / 2)
        for h in range(H):
            le([(U[z, h], 1.0)], sc.load[0, z, h])
    for c in sc.corridors:
        for h in range(H):
            le([(F[c.id, h], 1.0), (XL[c.id], -1.0)], c.cap_forward)
            le([(F[c.id, h], -1.0), (XL[c.id], -1.0)], c.cap_reverse)
    zid = [z.id for z in sc.zones]
    for z in range(Z):
        for h in range(H):
            terms = [(U[z, h], 1.0)]
            terms += [(Q[z, g.id, h], 1.0) for g in sc.gen_techs]
            terms += [(D[z, s.id, h], 1.0) for s in sc.stor_techs]
            terms += [(C[z, s.id, h], -1.0) for s in sc.stor_techs]
            for c in sc.corridors:
                if c.to_zone == zid[z]:
                    terms.append((F[c.id, h], 1.0))
                if c.from_zone == zid[z]:
                    terms.append((F[c.id, h], -1.0))
            eq(terms, sc.load[0, z, h] * (1 + rsv))
    return (np.array(cost), np.array(eq_rows).reshape(-1, n), np.array(eq_rhs),
            np.array(le_rows), np.array(le_rhs))


def free_dimension(sc) -> int:
    c, A_eq, b_eq, A_le, b_le = dense_program(sc)
    return len(c) - (np.linalg.matrix_rank(A_eq) if len(A_eq) else 0)


def vertex_minimum(c, A_eq, b_eq, A_le, b_le, tol: float = 1e-7, batch: int = 20000) -> float:
    """Minimum of c.x over {A_eq x = b_eq, A_le x <= b_le} by vertex enumeration.

    Equalities are removed by a null-space parameterization x = x0 + N y; every
    choice of k = dim(y) inequality rows is solved as a square system and the
    feasible solutions are compared. Returns inf when no vertex is feasible.
    """
    n = len(c)
    if len(A_eq):
        x0 = np.linalg.lstsq(A_eq, b_eq, rcond=None)[0]
        if np.abs(A_eq @ x0 - b_eq).max() > 1e-8 * (1 + np.abs(b_eq).max()):
            return np.inf
        N = null_space(A_eq)
    else:
        x0, N = np.zeros(n), np.eye(n)
    k = N.shape[1]
    G = A_le @ N
    h = b_le - A_le @ x0
    scale = 1.0 + np.abs(b_le)
    best = np.inf
    if k == 0:
        return float(c @ x0) if np.all(A_le @ x0 - b_le <= tol * scale) else np.inf
    combos = itertools.combinations(range(len(G)), k)
    while True:
        chunk = np.array(list(itertools.islice(combos, batch)))
        if not len(chunk):
            break
        M = G[chunk]
        rhs = h[chunk]
        det = np.linalg.det(M)
        ok = np.abs(det) > 1e-10
        if not ok.any():
            continue
        y = np.linalg.solve(M[ok], rhs[ok][..., None])[..., 0]
        x = x0 + y @ N.T
        feasible = np.all(x @ A_le.T - b_le <= tol * scale, axis=1)
        if feasible.any():
            best = min(best, float((x[feasible] @ c).min()))
    return best


def brute_force_objective(sc) -> float:
    return vertex_minimum(*dense_program(sc))
