"""Admissible metrics on a disjoint union ``M ⊔ N``, stored as cross matrices."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .metric_core import (
    DomainError,
    FiniteMetricSpace,
    PreconditionError,
    ShapeError,
    Violation,
    ball,
    validate_metric,
)
from .scalars import Scalar, half, lt, to_scalar


@dataclass(frozen=True)
class Coupling:
    """Cross distances ``cross[u][v] = d(u, v)`` for ``u in left``, ``v in right``.

    Construction only checks shapes; use :func:`validate_coupling` to check
    that the assembled matrix is a metric.
    """

    left: FiniteMetricSpace
    right: FiniteMetricSpace
    cross: tuple

    def __post_init__(self):
        rows = tuple(tuple(to_scalar(v) for v in row) for row in self.cross)
        if len(rows) != len(self.left) or any(len(r) != len(self.right) for r in rows):
            raise ShapeError(
                f"cross matrix must be {len(self.left)}x{len(self.right)}")
        object.__setattr__(self, "cross", rows)

    def assembled(self) -> list[list[Scalar]]:
        m = len(self.left)
        out = [list(row) + list(self.cross[i]) for i, row in enumerate(self.left.dist)]
        for j, row in enumerate(self.right.dist):
            out.append([self.cross[i][j] for i in range(m)] + list(row))
        return out

    def transpose(self) -> "Coupling":
        return Coupling(self.right, self.left,
                        tuple(zip(*self.cross)) if self.cross else ())

    def dist_to_right(self, u: int) -> Scalar:
        return min(self.cross[u])

    def dist_to_left(self, v: int) -> Scalar:
        return min(row[v] for row in self.cross)


def validate_coupling(c: Coupling) -> list[Violation]:
    """Empty iff the cross matrix makes an admissible metric on ``M ⊔ N``.

    Indices in the returned violations refer to the assembled matrix, where
    right-hand points are offset by ``len(c.left)``.
    """
    if len(c.cross) != len(c.left):
        raise ShapeError("cross matrix row count does not match left space")
    return validate_metric(c.assembled())


@dataclass(frozen=True)
class Correspondence:
    """A relation between two spaces; full projections unless ``partial``."""

    left: FiniteMetricSpace
    right: FiniteMetricSpace
    pairs: frozenset
    partial: bool = False

    def __post_init__(self):
        pairs = frozenset((int(u), int(v)) for u, v in self.pairs)
        if not pairs:
            raise DomainError("a relation needs at least one pair")
        for u, v in pairs:
            if not (0 <= u < len(self.left) and 0 <= v < len(self.right)):
                raise DomainError(f"pair {(u, v)} out of range")
        if not self.partial:
            if {u for u, _ in pairs} != set(self.left.points):
                raise DomainError("relation does not project onto the left space")
            if {v for _, v in pairs} != set(self.right.points):
                raise DomainError("relation does not project onto the right space")
        object.__setattr__(self, "pairs", pairs)

    def sorted_pairs(self) -> list[tuple[int, int]]:
        return sorted(self.pairs)


def relation_distortion(M: FiniteMetricSpace, N: FiniteMetricSpace, pairs: Iterable) -> Scalar:
    pairs = list(pairs)
    worst = M.zero()
    for k, (u, v) in enumerate(pairs):
        for u2, v2 in pairs[k + 1:]:
            gap = abs(M.dist[u][u2] - N.dist[v][v2])
            if gap > worst:
                worst = gap
    return worst


def correspondence_distortion(R: Correspondence) -> Scalar:
    return relation_distortion(R.left, R.right, R.sorted_pairs())


def coupling_from_correspondence(R: Correspondence, r) -> Coupling:
    """Glue along ``R``: ``cross(u, v) = min_{(a,b) in R} d(u,a) + r + d(b,v)``.

    Admissible whenever ``2 r >= distortion(R)``; this also holds for partial
    relations.
    """
    r = to_scalar(r)
    if r <= 0:
        raise PreconditionError("gluing parameter r must be positive")
    if lt(r, half(correspondence_distortion(R))):
        raise PreconditionError("r is below half the distortion; the gluing is not a metric")
    M, N = R.left, R.right
    pairs = R.sorted_pairs()
    cross = [[min(M.dist[u][a] + r + N.dist[b][v] for a, b in pairs)
              for v in N.points] for u in M.points]
    return Coupling(M, N, cross)


def compose_couplings(d: Coupling, dbar: Coupling) -> Coupling:
    """Compose ``d`` on ``M ⊔ P`` with ``dbar`` on ``N ⊔ P`` through ``P``.

    ``cross(u, v) = min_w d(u, w) + dbar(w, v)``.
    """
    if d.right != dbar.right:
        raise DomainError("couplings do not share the same middle space P")
    P = d.right
    cross = [[min(d.cross[u][w] + dbar.cross[v][w] for w in P.points)
              for v in dbar.left.points] for u in d.left.points]
    return Coupling(d.left, dbar.left, cross)


def restricted_hausdorff(c: Coupling, x: int, y: int, R) -> Scalar:
    """``max(sup_{u in B_M(x,R)} d(u,N), sup_{v in B_N(y,R)} d(v,M))``."""
    left_ball = ball(c.left, x, R)
    right_ball = ball(c.right, y, R)
    # both balls contain their centers, so neither max is empty
    return max(max(c.dist_to_right(u) for u in left_ball),
               max(c.dist_to_left(v) for v in right_ball))


def coupling_objective(c: Coupling, x: int, y: int, R) -> Scalar:
    return max(c.cross[x][y], restricted_hausdorff(c, x, y, R))


def tighten_coupling(c: Coupling, sweeps: int = 3) -> Coupling:
    """Coordinate descent: lower each cross entry to its least admissible value.

    Each entry is dropped to ``max(|d_M(u,u') - cross(u',v)|, |d_N(v,v') -
    cross(u,v')|)`` over the other entries, which keeps the matrix
    admissible and never increases any objective.  Entries stay positive.
    """
    M, N = c.left, c.right
    cross = [list(row) for row in c.cross]
    for _ in range(sweeps):
        changed = False
        for u in M.points:
            for v in N.points:
                floor = None
                for u2 in M.points:
                    if u2 != u:
                        g = abs(M.dist[u][u2] - cross[u2][v])
                        floor = g if floor is None or g > floor else floor
                for v2 in N.points:
                    if v2 != v:
                        g = abs(N.dist[v][v2] - cross[u][v2])
                        floor = g if floor is None or g > floor else floor
                if floor is not None and 0 < floor < cross[u][v]:
                    cross[u][v] = floor
                    changed = True
        if not changed:
            break
    return Coupling(M, N, cross)
