"""Finite metric spaces held as exact distance matrices."""

from __future__ import annotations

from dataclasses import dataclass
from decimal import Decimal
from typing import Iterable, Sequence

from .scalars import Scalar, lt, to_scalar


class ShapeError(ValueError):
    pass


class DomainError(ValueError):
    pass


class PreconditionError(ValueError):
    pass


class MetricError(ValueError):
    def __init__(self, violations):
        self.violations = list(violations)
        head = "; ".join(str(v) for v in self.violations[:3])
        more = f" (+{len(self.violations) - 3} more)" if len(self.violations) > 3 else ""
        super().__init__(f"not a metric: {head}{more}")


@dataclass(frozen=True)
class Violation:
    axiom: str
    indices: tuple
    message: str

    def __str__(self):
        return self.message


def _square(matrix) -> list[list[Scalar]]:
    rows = [list(row) for row in matrix]
    n = len(rows)
    for i, row in enumerate(rows):
        if len(row) != n:
            raise ShapeError(f"row {i} has length {len(row)}, expected {n}")
    return [[to_scalar(v) for v in row] for row in rows]


def validate_metric(matrix) -> list[Violation]:
    """Return every violated metric axiom, with witnesses.

    An empty list means the matrix is a metric.  Triangle violations are
    reported as ``(i, k, j)`` meaning ``d[i][k] > d[i][j] + d[j][k]``.
    """
    d = _square(matrix)
    n = len(d)
    out: list[Violation] = []
    for i in range(n):
        if d[i][i] != 0:
            out.append(Violation("diagonal", (i,), f"nonzero diagonal at {i}"))
    symmetric = True
    for i in range(n):
        for j in range(i + 1, n):
            if d[i][j] != d[j][i]:
                symmetric = False
                out.append(Violation("symmetry", (i, j),
                                     f"asymmetric at ({i},{j}): {d[i][j]} != {d[j][i]}"))
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            if d[i][j] < 0:
                out.append(Violation("nonnegativity", (i, j), f"negative distance at ({i},{j})"))
            elif d[i][j] == 0 and (i < j or not symmetric):
                out.append(Violation("separation", (i, j), f"zero distance between distinct points ({i},{j})"))
    for i in range(n):
        for k in range(n):
            if i == k or (symmetric and k < i):
                continue
            for j in range(n):
                if j == i or j == k:
                    continue
                if lt(d[i][j] + d[j][k], d[i][k]):
                    out.append(Violation(
                        "triangle", (i, k, j),
                        f"triangle violated at ({i},{k},{j}): {d[i][k]} > {d[i][j]}+{d[j][k]}"))
    return out


@dataclass(frozen=True)
class FiniteMetricSpace:
    labels: tuple
    dist: tuple

    def __init__(self, labels: Sequence, dist, validate: bool = True):
        d = _square(dist)
        labels = tuple(labels)
        if len(labels) != len(d):
            raise ShapeError(f"{len(labels)} labels for a {len(d)}x{len(d)} matrix")
        if len(set(labels)) != len(labels):
            raise DomainError("labels must be distinct")
        kinds = {type(v) for row in d for v in row}
        if len(kinds) > 1:
            raise DomainError("distance matrix mixes rational and decimal scalars")
        if validate:
            bad = validate_metric(d)
            if bad:
                raise MetricError(bad)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "dist", tuple(tuple(row) for row in d))

    @classmethod
    def from_function(cls, points: Sequence, fn, labels: Sequence | None = None, validate: bool = True):
        points = list(points)
        labels = list(range(len(points))) if labels is None else labels
        return cls(labels, [[fn(p, q) for q in points] for p in points], validate=validate)

    @classmethod
    def line(cls, coords: Iterable, labels: Sequence | None = None):
        """Points on the real line, with ``|a - b|`` distances."""
        coords = [to_scalar(c) for c in coords]
        return cls.from_function(coords, lambda a, b: abs(a - b), labels=labels)

    def __len__(self):
        return len(self.labels)

    def d(self, i: int, j: int) -> Scalar:
        return self.dist[i][j]

    @property
    def points(self) -> range:
        return range(len(self.labels))

    @property
    def is_decimal(self) -> bool:
        return bool(self.dist) and isinstance(self.dist[0][0], Decimal)

    def zero(self) -> Scalar:
        return self.dist[0][0]

    def diameter(self) -> Scalar:
        return max((v for row in self.dist for v in row), default=self.zero())

    def index(self, label) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise DomainError(f"unknown label {label!r}") from None

    def subspace(self, indices: Iterable[int]) -> "FiniteMetricSpace":
        idx = sorted(indices)
        return FiniteMetricSpace([self.labels[i] for i in idx],
                                 [[self.dist[i][j] for j in idx] for i in idx], validate=False)

    def dist_to_set(self, i: int, subset: Iterable[int]) -> Scalar:
        return min(self.dist[i][j] for j in subset)


@dataclass(frozen=True)
class PointedSpace:
    space: FiniteMetricSpace
    base: int = 0

    def __post_init__(self):
        if not 0 <= self.base < len(self.space):
            raise DomainError(f"base index {self.base} out of range")

    def __len__(self):
        return len(self.space)

    def rebased(self, base: int) -> "PointedSpace":
        return PointedSpace(self.space, base)


PointSubset = frozenset


def _check_subset(space: FiniteMetricSpace, subset, name: str = "subset", nonempty: bool = True):
    subset = frozenset(subset)
    if nonempty and not subset:
        raise DomainError(f"{name} must be non-empty")
    for i in subset:
        if not 0 <= i < len(space):
            raise DomainError(f"{name} index {i} out of range")
    return subset


def ball(space: FiniteMetricSpace, center: int, radius) -> PointSubset:
    """Open ball ``{p : d(center, p) < radius}``."""
    radius = to_scalar(radius)
    if not 0 <= center < len(space):
        raise DomainError(f"center {center} out of range")
    if radius <= 0:
        raise PreconditionError("radius must be positive")
    row = space.dist[center]
    return frozenset(p for p in space.points if row[p] < radius)


def hausdorff_distance(space: FiniteMetricSpace, A, B) -> Scalar:
    A = _check_subset(space, A, "A")
    B = _check_subset(space, B, "B")
    forward = max(space.dist_to_set(a, B) for a in A)
    backward = max(space.dist_to_set(b, A) for b in B)
    return max(forward, backward)


def is_net(space: FiniteMetricSpace, A, C) -> bool:
    """True iff every point lies within ``C`` of ``A``."""
    A = _check_subset(space, A, "A")
    C = to_scalar(C)
    if C < 0:
        raise PreconditionError("C must be nonnegative")
    return all(space.dist_to_set(p, A) <= C for p in space.points)


def is_separated(space: FiniteMetricSpace, A, delta) -> bool:
    A = sorted(_check_subset(space, A, "A", nonempty=False))
    delta = to_scalar(delta)
    if delta <= 0:
        raise PreconditionError("delta must be positive")
    return all(space.dist[a][b] >= delta for k, a in enumerate(A) for b in A[k + 1:])


def greedy_net(space: FiniteMetricSpace, delta, order: Sequence[int] | None = None) -> PointSubset:
    """Scan ``order`` and keep each point at distance >= delta from those kept.

    The result is delta-separated and, being maximal, a delta-net.
    """
    delta = to_scalar(delta)
    if delta <= 0:
        raise PreconditionError("delta must be positive")
    order = list(space.points) if order is None else list(order)
    if sorted(order) != list(space.points):
        raise PreconditionError("order must be a permutation of the points")
    kept: list[int] = []
    for p in order:
        if all(space.dist[p][q] >= delta for q in kept):
            kept.append(p)
    return frozenset(kept)
