"""Spike spaces over a real tree, and finite checks of the reduction.

A truncated sequence ``x = (x_2, ..., x_N)`` with ``1 <= x_n <= n`` is sent
to the pointed space ``M_x`` of points ``P±_n = (u_n, ±b**x_n)`` where the
stations are ``u_n = sum_{i=2}^n b**(i*i)``, measured with the real-tree
metric on the plane.  Two arithmetic modes are supported:

* ``integer``: ``b = 2``, exact rationals.  Every magnitude comparison the
  arguments use survives the change of base.
* ``paper``: ``b = e``, Decimals at (at least) 50 significant digits.

Functions taking a config run inside ``config.context()`` so Decimal
arithmetic uses the configured precision.
"""

from __future__ import annotations

import itertools
import math
from contextlib import contextmanager
from dataclasses import dataclass, field
from decimal import Decimal, localcontext
from fractions import Fraction
from typing import Iterator, Optional

from .coarse_geometry import (
    Bijection,
    QICertificate,
    best_bijection,
    distortion,
    qi_search,
)
from .coupling import Correspondence, coupling_from_correspondence, coupling_objective
from .gromov_space import EntourageCertificate
from .metric_core import (
    DomainError,
    FiniteMetricSpace,
    PointedSpace,
    PreconditionError,
    ball,
    is_net,
)
from .scalars import Scalar, close, leq, lt, to_scalar

MAX_PAPER_DEPTH = 26


@dataclass(frozen=True)
class SpikeSequence:
    values: tuple

    def __post_init__(self):
        vals = tuple(int(v) for v in self.values)
        if not vals:
            raise DomainError("a spike sequence needs depth >= 2")
        for n, v in enumerate(vals, start=2):
            if not 1 <= v <= n:
                raise DomainError(f"x_{n} = {v} is outside 1..{n}")
        object.__setattr__(self, "values", vals)

    @classmethod
    def of(cls, *values) -> "SpikeSequence":
        return cls(values)

    @property
    def depth(self) -> int:
        return len(self.values) + 1

    def __getitem__(self, n: int) -> int:
        if not 2 <= n <= self.depth:
            raise IndexError(n)
        return self.values[n - 2]

    def indices(self) -> range:
        return range(2, self.depth + 1)

    def __str__(self):
        return ",".join(map(str, self.values))


def all_sequences(depth: int) -> Iterator[SpikeSequence]:
    for vals in itertools.product(*(range(1, n + 1) for n in range(2, depth + 1))):
        yield SpikeSequence(vals)


def _same_depth(x: SpikeSequence, y: SpikeSequence):
    if x.depth != y.depth:
        raise DomainError(f"depth mismatch: {x.depth} vs {y.depth}")


def e1_related(x: SpikeSequence, y: SpikeSequence, threshold: int) -> bool:
    """Agreement at every index ``n >= threshold``."""
    _same_depth(x, y)
    if threshold > x.depth:
        raise DomainError("threshold exceeds depth")
    return all(x[n] == y[n] for n in x.indices() if n >= threshold)


def ksigma_deviation(x: SpikeSequence, y: SpikeSequence) -> int:
    _same_depth(x, y)
    return max(abs(a - b) for a, b in zip(x.values, y.values))


@dataclass(frozen=True)
class ConstructionConfig:
    mode: str = "integer"
    precision: int = 50

    def __post_init__(self):
        if self.mode not in ("integer", "paper"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode == "paper" and self.precision < 50:
            raise ValueError("paper mode needs at least 50 digits")

    def digits(self, depth: int = 0) -> int:
        return max(self.precision, depth * depth + 30)

    @contextmanager
    def context(self, depth: int = 0):
        if self.mode == "integer":
            yield
            return
        with localcontext() as ctx:
            ctx.prec = max(ctx.prec, self.digits(depth))
            yield

    @property
    def base(self) -> Scalar:
        if self.mode == "integer":
            return Fraction(2)
        return Decimal(1).exp()

    def power(self, k) -> Scalar:
        """``b**k`` exactly (integer mode) or at context precision (paper mode)."""
        if self.mode == "integer":
            k = Fraction(k)
            if k.denominator != 1:
                raise ValueError("integer mode only takes integer exponents")
            return Fraction(2) ** int(k)
        return Decimal(k).exp() if not isinstance(k, Decimal) else k.exp()

    def log(self, value) -> Scalar:
        """Logarithm to base ``b``; exact when ``value`` is a power of 2 in integer mode."""
        if self.mode == "integer":
            v = Fraction(value)
            if v.denominator == 1 and v.numerator > 0 and v.numerator & (v.numerator - 1) == 0:
                return Fraction(v.numerator.bit_length() - 1)
            return Fraction(math.log2(v))
        return Decimal(value).ln()

    def scalar(self, value) -> Scalar:
        if self.mode == "integer":
            return to_scalar(value)
        return Decimal(value) if not isinstance(value, Fraction) else Decimal(value.numerator) / value.denominator


INTEGER = ConstructionConfig("integer")
PAPER = ConstructionConfig("paper")


@dataclass(frozen=True)
class TreePoint:
    u: Scalar
    v: Scalar


def tree_distance(p: TreePoint, q: TreePoint) -> Scalar:
    """Real-tree metric: vertical drop, horizontal travel, vertical climb."""
    if p.u == q.u:
        return abs(p.v - q.v)
    return abs(p.v) + abs(p.u - q.u) + abs(q.v)


def station(n: int, config: ConstructionConfig) -> Scalar:
    return sum((config.power(i * i) for i in range(3, n + 1)), config.power(4))


def spike_points(x: SpikeSequence, config: ConstructionConfig, variant: str = "qi") -> list[TreePoint]:
    """Points ``P+_2, P-_2, P+_3, P-_3, ...`` for the QI or GH variant."""
    pts = []
    with config.context(x.depth):
        for n in x.indices():
            u = station(n, config)
            h = config.power(x[n]) if variant == "qi" else config.scalar(x[n])
            pts.append(TreePoint(u, h))
            pts.append(TreePoint(u, -h))
    return pts


def spike_labels(depth: int) -> list[str]:
    return [f"P{s}{n}" for n in range(2, depth + 1) for s in "+-"]


def spike_index(n: int, sign: str = "+") -> int:
    return 2 * (n - 2) + (0 if sign == "+" else 1)


def spike_pair(n: int) -> frozenset:
    return frozenset((spike_index(n, "+"), spike_index(n, "-")))


def _build(x: SpikeSequence, config: ConstructionConfig, variant: str) -> PointedSpace:
    if config.mode == "paper" and x.depth > MAX_PAPER_DEPTH:
        raise DomainError(f"paper mode supports depth <= {MAX_PAPER_DEPTH}")
    pts = spike_points(x, config, variant)
    with config.context(x.depth):
        space = FiniteMetricSpace.from_function(pts, tree_distance, labels=spike_labels(x.depth))
    return PointedSpace(space, spike_index(2, "+"))


def build_qi_instance(x: SpikeSequence, config: ConstructionConfig = INTEGER) -> PointedSpace:
    return _build(x, config, "qi")


def build_gh_instance(x: SpikeSequence, config: ConstructionConfig = INTEGER) -> PointedSpace:
    """Same stations, spike heights ``±x_n`` instead of ``±b**x_n``."""
    return _build(x, config, "gh")


def canonical_bilipschitz(x: SpikeSequence, y: SpikeSequence, config: ConstructionConfig = INTEGER):
    """The pairing ``P±_{x,n} -> P±_{y,n}`` and its distortion."""
    _same_depth(x, y)
    M, N = build_qi_instance(x, config), build_qi_instance(y, config)
    phi = Bijection(M.space, N.space, tuple((i, i) for i in M.space.points))
    with config.context(x.depth):
        return phi, distortion(phi)


@dataclass
class Report:
    name: str
    checked: int = 0
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok


def net_membership_facts(x: SpikeSequence, A, C, config: ConstructionConfig = INTEGER) -> Report:
    """Check the two forced-membership implications for a C-net ``A`` of ``M_x``.

    For each station n: ``b**(n*n) >= C`` forces ``A`` to meet the pair at
    n, and additionally ``b**x_n > C/2`` forces both spike points into ``A``.
    """
    inst = build_qi_instance(x, config)
    A = frozenset(A)
    with config.context(x.depth):
        C = config.scalar(C)
        if not is_net(inst.space, A, C):
            raise PreconditionError("A is not a C-net of the instance")
        rep = Report("net membership")
        for n in x.indices():
            pair = spike_pair(n)
            if leq(C, config.power(n * n)):
                rep.checked += 1
                if not A & pair:
                    rep.violations.append(f"n={n}: A misses M_(x,n)")
                if lt(C / 2, config.power(x[n])) and not pair <= A:
                    rep.violations.append(f"n={n}: M_(x,n) not contained in A")
    return rep


def claim4_qualifies(n: int, C, lam, config: ConstructionConfig) -> bool:
    """The three hypotheses under which the map must respect station ``n``."""
    return (leq(C, config.power(n * n))
            and lt(lam, config.power(2 * n + 1) / n)
            and lt(3 * lam, config.power((n + 2) ** 2 - (n + 1) ** 2)))


def _require_certificate(M, N, cert):
    problems = cert.check(M, N)
    if problems or not cert.pointed:
        raise PreconditionError("invalid pointed QI certificate: " + "; ".join(problems or ["not pointed"]))


def claim4_structure_check(x: SpikeSequence, y: SpikeSequence, cert: QICertificate,
                           config: ConstructionConfig = INTEGER) -> Report:
    """For qualifying n, ``phi`` must send ``M_(x,n) ∩ A`` into ``M_(y,n)``, onto ``M_(y,n) ∩ B``."""
    _same_depth(x, y)
    M, N = build_qi_instance(x, config), build_qi_instance(y, config)
    rep = Report("station structure")
    with config.context(x.depth):
        _require_certificate(M, N, cert)
        mapping = cert.phi.as_dict()
        for n in x.indices():
            if not claim4_qualifies(n, cert.C, cert.lam, config):
                continue
            rep.checked += 1
            pair = spike_pair(n)
            image = frozenset(mapping[a] for a in pair & cert.netA)
            if not image <= pair:
                rep.violations.append(f"n={n}: phi(M_(x,n) ∩ A) leaves M_(y,n)")
            elif image != pair & cert.netB:
                rep.violations.append(f"n={n}: phi(M_(x,n) ∩ A) != M_(y,n) ∩ B")
    return rep


def deviation_bound_check(x: SpikeSequence, y: SpikeSequence, cert: QICertificate,
                          config: ConstructionConfig = INTEGER) -> Report:
    """For qualifying n, ``|x_n - y_n| <= max(log_b lam, log_b(C/2))``.

    The second term is dropped when ``C = 0``.  Compared as
    ``b**|x_n - y_n| <= max(lam, C/2)`` to stay exact in integer mode.
    """
    _same_depth(x, y)
    M, N = build_qi_instance(x, config), build_qi_instance(y, config)
    rep = Report("deviation bound")
    with config.context(x.depth):
        _require_certificate(M, N, cert)
        ceiling = cert.lam if cert.C == 0 else max(cert.lam, cert.C / 2)
        for n in x.indices():
            if not claim4_qualifies(n, cert.C, cert.lam, config):
                continue
            rep.checked += 1
            gap = abs(x[n] - y[n])
            if not leq(config.power(gap), ceiling):
                rep.violations.append(f"n={n}: |x_n - y_n| = {gap} exceeds the bound")
    return rep


def prefix_horizon(x: SpikeSequence, n0: int, config: ConstructionConfig = INTEGER) -> Optional[Scalar]:
    """Distance from the base point to the nearest point past station ``n0`` (None if none)."""
    if n0 >= x.depth:
        return None
    inst = build_qi_instance(x, config)
    row = inst.space.dist[inst.base]
    return min(row[i] for i in range(spike_index(n0 + 1), len(inst.space)))


def ambient_restricted_hausdorff(x: SpikeSequence, y: SpikeSequence, R, config: ConstructionConfig = INTEGER,
                                 variant: str = "qi") -> Scalar:
    """``H_{d,R}`` with both spaces placed in the plane under the tree metric."""
    P, Q = spike_points(x, config, variant), spike_points(y, config, variant)
    M = _build(x, config, variant)
    N = _build(y, config, variant)
    with config.context(max(x.depth, y.depth)):
        left = ball(M.space, M.base, R)
        right = ball(N.space, N.base, R)
        fwd = max(min(tree_distance(P[i], q) for q in Q) for i in left)
        bwd = max(min(tree_distance(p, Q[j]) for p in P) for j in right)
        return max(fwd, bwd)


def neighborhood_certificate(x: SpikeSequence, y: SpikeSequence, n0: int, R,
                             config: ConstructionConfig = INTEGER, r=1, witness=None) -> EntourageCertificate:
    """Entourage certificate for sequences sharing the prefix up to ``n0``.

    Both spaces sit in the plane, where the shared spike points coincide, so
    the restricted Hausdorff part is exactly 0 there; ``infimum`` records
    that.  An admissible coupling on the disjoint union cannot put points
    at distance 0, so the attached coupling glues matched prefix points at
    ``witness`` (default ``r/2``), giving objective ``witness < r``.
    """
    _same_depth(x, y)
    if not 2 <= n0 <= x.depth:
        raise PreconditionError("n0 must lie in 2..depth")
    if any(x[n] != y[n] for n in range(2, n0 + 1)):
        raise PreconditionError(f"sequences differ at some n <= {n0}")
    with config.context(x.depth):
        R, r = config.scalar(R), config.scalar(r)
        for seq in (x, y):
            horizon = prefix_horizon(seq, n0, config)
            if horizon is not None and R > horizon:
                raise PreconditionError(f"R = {R} reaches past station {n0}")
        witness = r / 2 if witness is None else config.scalar(witness)
        M, N = build_qi_instance(x, config), build_qi_instance(y, config)
        shared = range(spike_index(n0, "-") + 1)
        rel = Correspondence(M.space, N.space, frozenset((i, i) for i in shared), partial=True)
        coupling = coupling_from_correspondence(rel, witness)
        objective = coupling_objective(coupling, M.base, N.base, R)
        infimum = ambient_restricted_hausdorff(x, y, R, config)
        return EntourageCertificate(coupling, M.base, N.base, R, objective, infimum, r)


def rigidity_check(x: SpikeSequence, y: SpikeSequence, config: ConstructionConfig = INTEGER) -> bool:
    """True iff a base-preserving isometry ``M_x -> M_y`` exists."""
    _same_depth(x, y)
    M, N = build_qi_instance(x, config), build_qi_instance(y, config)
    with config.context(x.depth):
        found = best_bijection(M.space, N.space, fixed=[(M.base, N.base)])
        return close(found.distortion, 1)


def qi_dichotomy(x: SpikeSequence, y: SpikeSequence, config: ConstructionConfig = INTEGER,
                 below=Fraction(999, 1000)):
    """Run ``qi_search`` with ``C = 0`` just below and at ``b**dev``.

    Returns ``(certificate_below, certificate_at)``; the expected outcome is
    ``(None, <certificate>)``.  ``below`` scales the threshold for the first
    search (when ``dev = 0`` the first search uses ``lam = 1`` too, and is
    expected to succeed).
    """
    M, N = build_qi_instance(x, config), build_qi_instance(y, config)
    dev = ksigma_deviation(x, y)
    with config.context(x.depth):
        target = config.power(dev)
        zero = config.scalar(0)
        low = max(target * config.scalar(below), config.scalar(1))
        return qi_search(M, N, zero, low), qi_search(M, N, zero, target)


@dataclass
class ClaimRow:
    claim: str
    passed: bool
    checked: int
    detail: str = ""


def verify_claims(depth: int, config: ConstructionConfig = INTEGER, max_dev: Optional[int] = None) -> list[ClaimRow]:
    """Run every finite check of the reduction over all sequence pairs of a depth."""
    seqs = list(all_sequences(depth))
    pairs = [(x, y) for x in seqs for y in seqs
             if max_dev is None or ksigma_deviation(x, y) <= max_dev]
    rows = []

    # continuity: shared prefixes give objective-0 entourage certificates
    fails, count = [], 0
    for x, y in pairs:
        for n0 in range(2, depth + 1):
            if any(x[n] != y[n] for n in range(2, n0 + 1)):
                break
            with config.context(depth):
                horizons = [h for h in (prefix_horizon(x, n0, config), prefix_horizon(y, n0, config))
                            if h is not None]
                R = min(horizons) if horizons else config.scalar(10) ** 6
                cert = neighborhood_certificate(x, y, n0, R, config)
                count += 1
                if cert.infimum != 0 or cert.check():
                    fails.append(f"{x}|{y}|n0={n0}")
    rows.append(ClaimRow("continuity", not fails, count, ", ".join(fails[:3])))

    fails = []
    for x, y in pairs:
        _, lam = canonical_bilipschitz(x, y, config)
        with config.context(depth):
            if not leq(lam, config.power(ksigma_deviation(x, y))):
                fails.append(f"{x}|{y}")
    rows.append(ClaimRow("forward bi-Lipschitz", not fails, len(pairs), ", ".join(fails[:3])))

    fails, certs = [], []
    for x, y in pairs:
        low, at = qi_dichotomy(x, y, config)
        expect_low = ksigma_deviation(x, y) == 0
        if (low is not None) != expect_low or at is None:
            fails.append(f"{x}|{y}")
        if at is not None:
            certs.append((x, y, at))
    rows.append(ClaimRow("QI dichotomy", not fails, len(pairs), ", ".join(fails[:3])))

    fails = [f"{x}|{y}" for x, y, c in certs if not claim4_structure_check(x, y, c, config)]
    rows.append(ClaimRow("station structure", not fails, len(certs), ", ".join(fails[:3])))
    fails = [f"{x}|{y}" for x, y, c in certs if not deviation_bound_check(x, y, c, config)]
    rows.append(ClaimRow("deviation bound", not fails, len(certs), ", ".join(fails[:3])))

    fails = [f"{x}|{y}" for x, y in pairs if rigidity_check(x, y, config) != (x == y)]
    rows.append(ClaimRow("rigidity", not fails, len(pairs), ", ".join(fails[:3])))

    fails, count = [], 0
    net_budgets = [0, 1, 2 ** 4, 2 ** 9]
    for x in seqs:
        inst = build_qi_instance(x, config)
        pts = list(inst.space.points)
        for C in net_budgets:
            with config.context(depth):
                Cs = config.scalar(C)
                nets = [A for k in range(1, len(pts) + 1) for A in itertools.combinations(pts, k)
                        if is_net(inst.space, A, Cs)]
            for A in nets:
                count += 1
                if not net_membership_facts(x, A, C, config):
                    fails.append(f"{x}|C={C}|A={sorted(A)}")
    rows.append(ClaimRow("net membership", not fails, count, ", ".join(fails[:3])))
    return rows
