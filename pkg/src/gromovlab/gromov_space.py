"""Gromov-Hausdorff distances and entourage bounds for finite pointed spaces.

All three quantities here reduce to one search: pick a relation ``W`` between
``M`` and ``N`` that covers prescribed points on each side (and possibly a
forced base pair), minimising its distortion.  Gluing along ``W`` with
parameter ``dis(W)/2`` gives an admissible metric meeting the bound, and
conversely any admissible metric with objective ``< r`` yields a relation of
distortion ``< 2r`` (keep the pairs at cross distance ``< r``).  The
independent check is :func:`oracle_min_objective`, which never looks at
relations.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from typing import Optional

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp

from .coupling import (
    Correspondence,
    Coupling,
    coupling_from_correspondence,
    coupling_objective,
    tighten_coupling,
    validate_coupling,
)
from .metric_core import DomainError, FiniteMetricSpace, PointedSpace, PreconditionError, ball
from .scalars import Scalar, half, to_scalar

log = logging.getLogger(__name__)

EXHAUSTIVE_LIMIT = 8
ORACLE_MAX_POINTS = 3


class SizeError(ValueError):
    pass


@dataclass(frozen=True)
class RelationSearch:
    distortion: Scalar
    pairs: tuple
    nodes: int


def _profile(space: FiniteMetricSpace, i: int) -> list:
    return sorted(space.dist[i])


def _profile_gap(M, N, u, v):
    pu, pv = _profile(M, u), _profile(N, v)
    k = min(len(pu), len(pv))
    return max((abs(a - b) for a, b in zip(pu[-k:], pv[-k:])), default=0)


def search_relation(M: FiniteMetricSpace, N: FiniteMetricSpace, left_cover=None, right_cover=None,
                    forced=(), lower_bound=None, exhaustive: Optional[bool] = None) -> RelationSearch:
    """Least-distortion relation containing ``forced`` and covering the given points.

    Every point of ``left_cover`` gets at least one partner in ``N`` and
    every point of ``right_cover`` one in ``M``.  Defaults cover everything,
    i.e. a correspondence.  Small instances are enumerated outright; larger
    ones use depth-first branch and bound, pruning any partial relation
    whose distortion already reaches the incumbent.  The search is
    sequential, so ties resolve to the first optimum in enumeration order.
    """
    if not len(M) or not len(N):
        raise DomainError("spaces must be non-empty")
    left_cover = sorted(M.points if left_cover is None else left_cover)
    right_cover = sorted(N.points if right_cover is None else right_cover)
    forced = tuple(sorted(set(forced)))
    if exhaustive is None:
        exhaustive = len(M) + len(N) <= EXHAUSTIVE_LIMIT
    if exhaustive:
        return _enumerate_relations(M, N, left_cover, right_cover, forced)
    return _branch_and_bound(M, N, left_cover, right_cover, forced, lower_bound)


def _enumerate_relations(M, N, left_cover, right_cover, forced):
    # every map pair (f, g) is visited; a candidate is abandoned as soon as
    # its partial distortion can no longer beat the incumbent
    best, best_pairs, nodes = None, None, 0

    def grow(pairs, dis, new, cap):
        for p in new:
            if p in pairs:
                continue
            for q in pairs:
                gap = abs(M.dist[p[0]][q[0]] - N.dist[p[1]][q[1]])
                if gap > dis:
                    dis = gap
                    if cap is not None and dis >= cap:
                        return None
            pairs.append(p)
        return dis

    for f in itertools.product(N.points, repeat=len(left_cover)):
        base = []
        dis_f = grow(base, M.zero(), list(forced) + list(zip(left_cover, f)), best)
        if dis_f is None:
            nodes += 1
            continue
        for g in itertools.product(M.points, repeat=len(right_cover)):
            nodes += 1
            pairs = list(base)
            dis = grow(pairs, dis_f, [(u, v) for v, u in zip(right_cover, g)], best)
            if dis is not None and (best is None or dis < best):
                best, best_pairs = dis, tuple(sorted(pairs))
    return RelationSearch(best, best_pairs, nodes)


def _branch_and_bound(M, N, left_cover, right_cover, forced, lower_bound):
    # decision list: (side, point); side 0 picks a partner in N for u in M
    decisions = [(0, u) for u in left_cover] + [(1, v) for v in right_cover]
    cand_left = {u: sorted(N.points, key=lambda v: (_profile_gap(M, N, u, v), v)) for u in left_cover}
    cand_right = {v: sorted(M.points, key=lambda u: (_profile_gap(M, N, u, v), u)) for v in right_cover}
    state = {"best": None, "pairs": None, "nodes": 0, "done": False}

    def extend(pairs, dis, new):
        if new in pairs:
            return dis
        u, v = new
        for u2, v2 in pairs:
            gap = abs(M.dist[u][u2] - N.dist[v][v2])
            if gap > dis:
                dis = gap
        return dis

    start_pairs: list = []
    dis0 = M.zero()
    for p in forced:
        dis0 = extend(start_pairs, dis0, p)
        if p not in start_pairs:
            start_pairs.append(p)

    def dfs(k, pairs, dis):
        if state["done"]:
            return
        state["nodes"] += 1
        best = state["best"]
        if best is not None and dis >= best:
            return
        if k == len(decisions):
            state["best"], state["pairs"] = dis, tuple(sorted(set(pairs)))
            if lower_bound is not None and dis <= lower_bound:
                state["done"] = True
            return
        side, p = decisions[k]
        options = cand_left[p] if side == 0 else cand_right[p]
        # a point already matched needs no new partner; try that branch first
        if side == 0 and any(u == p for u, _ in pairs) or side == 1 and any(v == p for _, v in pairs):
            dfs(k + 1, pairs, dis)
            return
        for q in options:
            new = (p, q) if side == 0 else (q, p)
            nd = extend(pairs, dis, new)
            pairs.append(new)
            dfs(k + 1, pairs, nd)
            pairs.pop()

    dfs(0, start_pairs, dis0)
    return RelationSearch(state["best"], state["pairs"], state["nodes"])


def gh_correspondence(M: FiniteMetricSpace, N: FiniteMetricSpace, exhaustive=None):
    """Return ``(gh_distance, optimal correspondence)``."""
    lower = abs(M.diameter() - N.diameter())
    res = search_relation(M, N, lower_bound=lower, exhaustive=exhaustive)
    return half(res.distortion), Correspondence(M, N, frozenset(res.pairs))


def gh_distance(M: FiniteMetricSpace, N: FiniteMetricSpace, exhaustive=None) -> Scalar:
    """Gromov-Hausdorff distance: half the least distortion of a correspondence."""
    return gh_correspondence(M, N, exhaustive=exhaustive)[0]


@dataclass(frozen=True)
class PointedBounds:
    upper: Scalar
    lower: Scalar
    correspondence: Correspondence


def pointed_gh_bounds(M: PointedSpace, N: PointedSpace, exhaustive=None) -> PointedBounds:
    """Certified bounds on the pointed GH distance.

    ``upper`` is half the least distortion of a correspondence containing the
    base pair; gluing at that parameter realises it (in the limit when it is
    0).  ``lower`` is the plain GH distance.
    """
    res = search_relation(M.space, N.space, forced=[(M.base, N.base)], exhaustive=exhaustive)
    return PointedBounds(
        upper=half(res.distortion),
        lower=gh_distance(M.space, N.space, exhaustive=exhaustive),
        correspondence=Correspondence(M.space, N.space, frozenset(res.pairs)),
    )


def pointed_gh_distance(M: PointedSpace, N: PointedSpace, exhaustive=None) -> Scalar:
    return pointed_gh_bounds(M, N, exhaustive=exhaustive).upper


@dataclass(frozen=True)
class EntourageCertificate:
    """An admissible coupling witnessing ``objective`` at radius ``R``.

    ``infimum`` is the value approached by gluings as the witness parameter
    shrinks; it equals ``objective`` unless the optimal relation has zero
    distortion, where no admissible coupling attains 0.
    """

    coupling: Coupling
    x: int
    y: int
    R: Scalar
    objective: Scalar
    infimum: Scalar
    r: Optional[Scalar] = None

    def certifies(self, r) -> bool:
        return self.objective < to_scalar(r)

    def check(self) -> list[str]:
        problems = [str(v) for v in validate_coupling(self.coupling)]
        if coupling_objective(self.coupling, self.x, self.y, self.R) != self.objective:
            problems.append("recorded objective does not match the coupling")
        if self.r is not None and not self.objective < self.r:
            problems.append("objective is not below r")
        return problems


def _default_witness(M: FiniteMetricSpace, N: FiniteMetricSpace) -> Scalar:
    scale = max(M.diameter(), N.diameter())
    if not scale:
        scale = Decimal(1) if M.is_decimal else Fraction(1)
    return scale / 1000


def entourage_bound(M: PointedSpace, N: PointedSpace, R, r=None, floor=0, witness=None,
                    exhaustive=None):
    """Least objective ``max(d(x,y), H_{d,R})`` over glued couplings.

    Returns ``(upper, certificate)``.  ``upper`` is ``max(dis/2, floor)`` for
    the best relation containing the base pair and covering both R-balls;
    when that is 0 the certificate is built at a small ``witness`` gluing
    parameter (default ``r/2`` if ``r`` is given).  The glued coupling is
    then tightened by coordinate descent.  Membership of the pair in
    ``U_{R,r}`` is certified when ``certificate.objective < r``.
    """
    R = to_scalar(R)
    if R <= 0:
        raise PreconditionError("R must be positive")
    A, B = M.space, N.space
    left = ball(A, M.base, R)
    right = ball(B, N.base, R)
    res = search_relation(A, B, left_cover=left, right_cover=right,
                          forced=[(M.base, N.base)], exhaustive=exhaustive)
    floor = to_scalar(floor)
    upper = max(half(res.distortion), floor)
    if upper > 0:
        glue = upper
    else:
        if witness is None:
            witness = half(to_scalar(r)) if r is not None else _default_witness(A, B)
        glue = to_scalar(witness)
    rel = Correspondence(A, B, frozenset(res.pairs), partial=True)
    coupling = coupling_from_correspondence(rel, glue)
    objective = coupling_objective(coupling, M.base, N.base, R)
    tightened = tighten_coupling(coupling)
    t_obj = coupling_objective(tightened, M.base, N.base, R)
    if t_obj < objective:
        coupling, objective = tightened, t_obj
    cert = EntourageCertificate(coupling, M.base, N.base, R, objective, upper,
                                None if r is None else to_scalar(r))
    return upper, cert


def entourage_member(M: PointedSpace, N: PointedSpace, R, r, grid=None):
    """Decide membership in ``U_{R,r}`` where it can be certified.

    Returns ``(True, certificate)`` when a coupling with objective ``< r``
    is found.  A negative answer ``(False, None)`` is only given for
    oracle-sized spaces where the oracle minimum is at least ``r``;
    otherwise ``(None, None)``.
    """
    r = to_scalar(r)
    upper, cert = entourage_bound(M, N, R, r=r)
    if cert.objective < r:
        return True, cert
    if len(M) <= ORACLE_MAX_POINTS and len(N) <= ORACLE_MAX_POINTS:
        grid = grid if grid is not None else float(max(M.space.diameter(), N.space.diameter(), r)) / 200
        if oracle_min_objective(M, N, R, grid) >= float(r):
            return False, None
    return None, None


def _float_matrix(space: FiniteMetricSpace) -> np.ndarray:
    return np.array([[float(v) for v in row] for row in space.dist], dtype=float)


def oracle_min_objective(M: PointedSpace, N: PointedSpace, R, grid, box=None, method="milp") -> float:
    """Brute-force minimum of ``max(d(x,y), H_{d,R})`` over admissible cross matrices.

    Only for spaces of at most three points.  Cross entries range over
    ``[grid, box]``.  ``method="milp"`` solves the problem exactly as a
    mixed-integer program (binaries choose, for each ball point, which
    cross entry realises its distance to the other space).
    ``method="grid"`` literally enumerates matrices with entries in
    ``{grid, 2 grid, ..., box}``; it is only practical for one or two cross
    entries or coarse grids.
    """
    if len(M) > ORACLE_MAX_POINTS or len(N) > ORACLE_MAX_POINTS:
        raise SizeError("oracle is limited to spaces of at most 3 points")
    grid = float(grid)
    if grid <= 0:
        raise PreconditionError("grid must be positive")
    dM, dN = _float_matrix(M.space), _float_matrix(N.space)
    if box is None:
        box = dM.max() + dN.max() + max(dM.max(), dN.max()) + 2 * grid
    box = float(box)
    left = sorted(ball(M.space, M.base, R))
    right = sorted(ball(N.space, N.base, R))
    if method == "grid":
        return _oracle_grid(dM, dN, M.base, N.base, left, right, grid, box)
    if method != "milp":
        raise ValueError(f"unknown oracle method {method!r}")
    return _oracle_milp(dM, dN, M.base, N.base, left, right, grid, box)


def _objective_float(c, x, y, left, right):
    return max(c[x][y], max(min(c[u]) for u in left), max(min(c[:, v]) for v in right))


def _admissible_float(c, dM, dN, tol=1e-12):
    m, n = c.shape
    for v in range(n):
        for u in range(m):
            for u2 in range(m):
                if u2 != u and (c[u][v] > dM[u][u2] + c[u2][v] + tol or dM[u][u2] > c[u][v] + c[u2][v] + tol):
                    return False
    for u in range(m):
        for v in range(n):
            for v2 in range(n):
                if v2 != v and (c[u][v] > dN[v][v2] + c[u][v2] + tol or dN[v][v2] > c[u][v] + c[u][v2] + tol):
                    return False
    return True


def _oracle_grid(dM, dN, x, y, left, right, grid, box):
    m, n = len(dM), len(dN)
    steps = int(box // grid + 1e-9)
    values = [grid * k for k in range(1, steps + 1)]
    if len(values) ** (m * n) > 5_000_000:
        raise SizeError("grid enumeration too large; coarsen the grid or use method='milp'")
    best = float("inf")
    for flat in itertools.product(values, repeat=m * n):
        c = np.array(flat).reshape(m, n)
        obj = _objective_float(c, x, y, left, right)
        if obj < best and _admissible_float(c, dM, dN):
            best = obj
    return best


def _oracle_milp(dM, dN, x, y, left, right, grid, box):
    m, n = len(dM), len(dN)
    nc = m * n
    t = nc
    zl = {(u, v): nc + 1 + k for k, (u, v) in enumerate((u, v) for u in left for v in range(n))}
    off = nc + 1 + len(zl)
    zr = {(u, v): off + k for k, (u, v) in enumerate((u, v) for v in right for u in range(m))}
    nvar = off + len(zr)
    big = box + 1.0

    def c(u, v):
        return u * n + v

    rows, lo, hi = [], [], []

    def add(coeffs, lower, upper):
        row = np.zeros(nvar)
        for idx, val in coeffs:
            row[idx] += val
        rows.append(row)
        lo.append(lower)
        hi.append(upper)

    for v in range(n):
        for u in range(m):
            for u2 in range(m):
                if u2 != u:
                    add([(c(u, v), 1), (c(u2, v), -1)], -np.inf, dM[u][u2])
                    if u < u2:
                        add([(c(u, v), 1), (c(u2, v), 1)], dM[u][u2], np.inf)
    for u in range(m):
        for v in range(n):
            for v2 in range(n):
                if v2 != v:
                    add([(c(u, v), 1), (c(u, v2), -1)], -np.inf, dN[v][v2])
                    if v < v2:
                        add([(c(u, v), 1), (c(u, v2), 1)], dN[v][v2], np.inf)
    add([(c(x, y), 1), (t, -1)], -np.inf, 0)
    for u in left:
        for v in range(n):
            add([(c(u, v), 1), (t, -1), (zl[u, v], big)], -np.inf, big)
        add([(zl[u, v], 1) for v in range(n)], 1, np.inf)
    for v in right:
        for u in range(m):
            add([(c(u, v), 1), (t, -1), (zr[u, v], big)], -np.inf, big)
        add([(zr[u, v], 1) for u in range(m)], 1, np.inf)

    cost = np.zeros(nvar)
    cost[t] = 1
    lb = np.zeros(nvar)
    ub = np.ones(nvar)
    lb[:nc], ub[:nc] = grid, box
    lb[t], ub[t] = 0, box
    integrality = np.zeros(nvar)
    integrality[nc + 1:] = 1
    res = milp(cost, constraints=LinearConstraint(np.array(rows), lo, hi),
               integrality=integrality, bounds=Bounds(lb, ub))
    if not res.success:
        raise RuntimeError(f"oracle MILP failed: {res.message}")
    cmat = res.x[:nc].reshape(m, n)
    return float(_objective_float(cmat, x, y, left, right))


def oracle_gh_distance(M: FiniteMetricSpace, N: FiniteMetricSpace, grid, box=None, method="milp") -> float:
    """Plain GH distance from the oracle: minimise over all base pairs, with R past both diameters."""
    R = M.diameter() + N.diameter() + 1
    return min(oracle_min_objective(PointedSpace(M, x), PointedSpace(N, y), R, grid, box, method)
               for x in M.points for y in N.points)
