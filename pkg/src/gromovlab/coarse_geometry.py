"""Bi-Lipschitz bijections, quasi-isometry search and the four relations."""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from typing import NamedTuple, Optional

from .coupling import Coupling
from .gromov_space import gh_correspondence
from .metric_core import (
    DomainError,
    FiniteMetricSpace,
    PointedSpace,
    PreconditionError,
    greedy_net,
    is_net,
)
from .scalars import Scalar, leq, to_scalar

log = logging.getLogger(__name__)

OPTIMAL_LIMIT = 9


def _one(space: FiniteMetricSpace) -> Scalar:
    return Decimal(1) if space.is_decimal else Fraction(1)


@dataclass(frozen=True)
class Bijection:
    """Index pairing between subsets of ``left`` and ``right``."""

    left: FiniteMetricSpace
    right: FiniteMetricSpace
    pairs: tuple

    def __post_init__(self):
        pairs = tuple(sorted((int(a), int(b)) for a, b in self.pairs))
        src = [a for a, _ in pairs]
        dst = [b for _, b in pairs]
        if len(set(src)) != len(src) or len(set(dst)) != len(dst):
            raise DomainError("pairing is not a bijection")
        object.__setattr__(self, "pairs", pairs)

    @property
    def source(self) -> frozenset:
        return frozenset(a for a, _ in self.pairs)

    @property
    def target(self) -> frozenset:
        return frozenset(b for _, b in self.pairs)

    def __call__(self, a: int) -> int:
        for s, t in self.pairs:
            if s == a:
                return t
        raise KeyError(a)

    def as_dict(self) -> dict:
        return dict(self.pairs)

    def inverse(self) -> "Bijection":
        return Bijection(self.right, self.left, tuple((b, a) for a, b in self.pairs))

    def then(self, other: "Bijection") -> "Bijection":
        """Composite ``other ∘ self``; ``self.target`` must equal ``other.source``."""
        if self.target != other.source:
            raise DomainError("bijections do not compose")
        return Bijection(self.left, other.right, tuple((a, other(b)) for a, b in self.pairs))


def _pair_ratio(dm, dn):
    return dn / dm if dn > dm else dm / dn


def distortion(phi: Bijection) -> Scalar:
    """Least ``lam >= 1`` with ``d_M/lam <= d_N(phi) <= lam d_M`` on the source."""
    worst = _one(phi.left)
    pairs = phi.pairs
    M, N = phi.left, phi.right
    for k, (a, b) in enumerate(pairs):
        for a2, b2 in pairs[k + 1:]:
            r = _pair_ratio(M.dist[a][a2], N.dist[b][b2])
            if r > worst:
                worst = r
    return worst


class BijectionSearch(NamedTuple):
    bijection: Bijection
    distortion: Scalar
    optimal: bool


def _match(M, N, src, dst, fixed=(), bound=None, node_limit=None):
    """Depth-first matching of ``src`` onto ``dst`` extending ``fixed``.

    With ``bound`` set, returns the first matching (in index order) whose
    distortion is at most ``bound``.  Otherwise branch and bound for the
    least distortion, pruning partial matchings that cannot beat the
    incumbent.  Returns ``(value, pairs, complete)``.
    """
    fixed = dict(fixed)
    src = [a for a in src if a not in fixed]
    free_dst = [b for b in dst if b not in fixed.values()]
    start = list(fixed.items())
    value = _one(M)
    for k, (a, b) in enumerate(start):
        for a2, b2 in start[k + 1:]:
            value = max(value, _pair_ratio(M.dist[a][a2], N.dist[b][b2]))
    state = {"best": None, "pairs": None, "nodes": 0, "stop": False, "truncated": False}

    def viable(val):
        if bound is not None:
            return leq(val, bound)
        return state["best"] is None or val < state["best"]

    def dfs(i, pairs, used, val):
        if state["stop"]:
            return
        state["nodes"] += 1
        if node_limit is not None and state["nodes"] > node_limit:
            state["stop"] = state["truncated"] = True
            return
        if not viable(val):
            return
        if i == len(src):
            state["best"], state["pairs"] = val, tuple(pairs)
            if bound is not None or val == 1:
                state["stop"] = True
            return
        a = src[i]
        for b in free_dst:
            if b in used:
                continue
            nv = val
            for a2, b2 in pairs:
                r = _pair_ratio(M.dist[a][a2], N.dist[b][b2])
                if r > nv:
                    nv = r
            pairs.append((a, b))
            used.add(b)
            dfs(i + 1, pairs, used, nv)
            used.discard(b)
            pairs.pop()

    if len(src) != len(free_dst):
        return None, None, True
    dfs(0, start, set(), value)
    return state["best"], state["pairs"], not state["truncated"]


def best_bijection(M: FiniteMetricSpace, N: FiniteMetricSpace, fixed=(), node_limit=None) -> BijectionSearch:
    """Bijection ``M -> N`` of least distortion, by branch and bound.

    ``fixed`` pins pairs (e.g. base to base).  Up to nine points the search
    runs to completion; beyond that it stops after ``node_limit`` nodes
    (default two million) and reports ``optimal=False`` if it was cut short.
    """
    if len(M) != len(N):
        raise DomainError(f"no bijection between spaces of sizes {len(M)} and {len(N)}")
    if node_limit is None and len(M) > OPTIMAL_LIMIT:
        node_limit = 2_000_000
    best, pairs, complete = _match(M, N, list(M.points), list(N.points), fixed, node_limit=node_limit)
    if pairs is None:
        raise DomainError("fixed pairs admit no bijection")
    if not complete:
        log.warning("best_bijection stopped after %s nodes; result may not be optimal", node_limit)
    return BijectionSearch(Bijection(M, N, pairs), best, complete)


def bijection_within(M, N, src, dst, lam, fixed=()) -> Optional[Bijection]:
    """First bijection ``src -> dst`` (in index order) with distortion ``<= lam``, or None."""
    src, dst = sorted(src), sorted(dst)
    if len(src) != len(dst):
        return None
    if any(a not in src or b not in dst for a, b in fixed):
        return None
    _, pairs, _ = _match(M, N, src, dst, fixed, bound=to_scalar(lam))
    return None if pairs is None else Bijection(M, N, pairs)


@dataclass(frozen=True)
class QICertificate:
    C: Scalar
    lam: Scalar
    netA: frozenset
    netB: frozenset
    phi: Bijection
    pointed: bool = True

    def check(self, M: PointedSpace, N: PointedSpace) -> list[str]:
        problems = []
        if not is_net(M.space, self.netA, self.C):
            problems.append("netA is not a C-net")
        if not is_net(N.space, self.netB, self.C):
            problems.append("netB is not a C-net")
        if self.phi.source != self.netA or self.phi.target != self.netB:
            problems.append("phi does not map netA onto netB")
        if not leq(distortion(self.phi), self.lam):
            problems.append("distortion exceeds lambda")
        if self.pointed:
            if M.base not in self.netA or N.base not in self.netB:
                problems.append("base points are not in the nets")
            elif self.phi(M.base) != N.base:
                problems.append("phi does not preserve base points")
        return problems


def _nets(space: FiniteMetricSpace, C, must_contain=None):
    pts = list(space.points)
    for k in range(1, len(pts) + 1):
        for A in itertools.combinations(pts, k):
            if must_contain is not None and must_contain not in A:
                continue
            if is_net(space, A, C):
                yield frozenset(A)


def qi_search(M: PointedSpace, N: PointedSpace, C, lam, pointed: bool = True) -> Optional[QICertificate]:
    """Search for a (pointed) quasi-isometry within budget ``(C, lam)``.

    Enumerates C-nets of each space by size then lexicographically and looks
    for a bijection between equal-size nets with distortion at most ``lam``.
    Returns the first certificate found, or None when the budget is
    exhausted.  For finite spaces the enumeration is complete, so None
    proves that no certificate exists within the budget.
    """
    C, lam = to_scalar(C), to_scalar(lam)
    if C < 0:
        raise PreconditionError("C must be nonnegative")
    if lam < 1:
        raise PreconditionError("lambda must be at least 1")
    netsB = list(_nets(N.space, C, N.base if pointed else None))
    for A in _nets(M.space, C, M.base if pointed else None):
        for B in netsB:
            if len(B) != len(A):
                continue
            fixed = [(M.base, N.base)] if pointed else []
            phi = bijection_within(M.space, N.space, A, B, lam, fixed)
            if phi is not None:
                return QICertificate(C, lam, A, B, phi, pointed)
    return None


def qi_from_bijection(phi: Bijection, M: PointedSpace, N: PointedSpace) -> QICertificate:
    """A bijection of whole spaces is a quasi-isometry with ``C = 0``."""
    if phi.source != frozenset(M.space.points) or phi.target != frozenset(N.space.points):
        raise DomainError("bijection must be between whole spaces")
    pointed = phi(M.base) == N.base
    zero = M.space.zero()
    return QICertificate(zero, distortion(phi), phi.source, phi.target, phi, pointed)


def qi_from_coupling(c: Coupling, x: int, y: int) -> QICertificate:
    """Pointed quasi-isometry from an admissible coupling.

    With ``D = max(cross(x,y), H_d(M,N))``, take a greedy ``4D``-separated
    net ``B`` of ``N`` started at ``y``, send ``y`` to ``x`` and every other
    net point to a nearest point of ``M``.  Those images are distinct, they
    form a ``6D``-net of ``M``, and distances move by at most ``2D`` against
    gaps of at least ``4D``, so the distortion is at most 2.
    """
    M, N = c.left, c.right
    D = max([c.cross[x][y]] + [c.dist_to_right(u) for u in M.points]
            + [c.dist_to_left(v) for v in N.points])
    order = [y] + [v for v in N.points if v != y]
    B = greedy_net(N, 4 * D, order)
    pairs = []
    for v in sorted(B):
        if v == y:
            pairs.append((x, y))
        else:
            u = min(M.points, key=lambda u: (c.cross[u][v], u))
            pairs.append((u, v))
    phi = Bijection(M, N, pairs)
    return QICertificate(6 * D, distortion(phi), phi.source, frozenset(B), phi, True)


@dataclass(frozen=True)
class Budget:
    D: Optional[Scalar] = None
    lam: Optional[Scalar] = None
    C: Optional[Scalar] = None


@dataclass(frozen=True)
class Verdict:
    kind: str
    related: bool
    value: Optional[Scalar] = None
    certificate: object = None


RELATION_KINDS = ("can", "GH", "Lip", "QI")


def relation_check(kind: str, M: PointedSpace, N: PointedSpace, budget: Budget = Budget()) -> Verdict:
    """Budgeted finite surrogate of ``E_can``, ``E_GH``, ``E_Lip`` or ``E_QI``.

    ``can`` asks for an isometry with any image of the base point; ``GH``
    compares the GH distance with ``budget.D``; ``Lip`` compares the least
    bijection distortion with ``budget.lam``; ``QI`` runs :func:`qi_search`.
    """
    if kind not in RELATION_KINDS:
        raise ValueError(f"unknown relation kind {kind!r}; expected one of {RELATION_KINDS}")
    if kind in ("can", "Lip"):
        if len(M) != len(N):
            return Verdict(kind, False)
        found = best_bijection(M.space, N.space)
        if kind == "can":
            return Verdict(kind, found.distortion == 1, found.distortion, found.bijection)
        if budget.lam is None:
            raise PreconditionError("Lip check needs budget.lam")
        return Verdict(kind, leq(found.distortion, budget.lam), found.distortion, found.bijection)
    if kind == "GH":
        if budget.D is None:
            raise PreconditionError("GH check needs budget.D")
        value, corr = gh_correspondence(M.space, N.space)
        return Verdict(kind, leq(value, budget.D), value, corr)
    if budget.C is None or budget.lam is None:
        raise PreconditionError("QI check needs budget.C and budget.lam")
    cert = qi_search(M, N, budget.C, budget.lam)
    return Verdict(kind, cert is not None, None, cert)
