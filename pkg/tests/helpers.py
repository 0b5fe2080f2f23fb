"""Random instances and brute-force oracles shared by the tests.

Nothing here calls into the search code it is used to check.
"""

import itertools
import random
from fractions import Fraction

from hypothesis import strategies as st

from gromovlab import FiniteMetricSpace, PointedSpace


def closure(weights):
    """Shortest-path closure of a symmetric positive weight matrix."""
    n = len(weights)
    d = [[Fraction(0) if i == j else Fraction(weights[i][j]) for j in range(n)] for i in range(n)]
    for k in range(n):
        for i in range(n):
            for j in range(n):
                if d[i][k] + d[k][j] < d[i][j]:
                    d[i][j] = d[i][k] + d[k][j]
    return d


def random_space(rng: random.Random, n: int, hi: int = 12) -> FiniteMetricSpace:
    w = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            w[i][j] = w[j][i] = rng.randint(1, hi)
    return FiniteMetricSpace(range(n), closure(w))


@st.composite
def metric_spaces(draw, min_size=1, max_size=4, hi=12):
    n = draw(st.integers(min_size, max_size))
    w = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            w[i][j] = w[j][i] = draw(st.integers(1, hi))
    return FiniteMetricSpace(range(n), closure(w))


@st.composite
def pointed_spaces(draw, min_size=1, max_size=4, hi=12):
    space = draw(metric_spaces(min_size, max_size, hi))
    return PointedSpace(space, draw(st.integers(0, len(space) - 1)))


def triple_loop_is_metric(d) -> bool:
    n = len(d)
    for i in range(n):
        if len(d[i]) != n:
            return False
        for j in range(n):
            if d[i][j] != d[j][i] or (i == j) != (d[i][j] == 0) or d[i][j] < 0:
                return False
            for k in range(n):
                if d[i][k] > d[i][j] + d[j][k]:
                    return False
    return True


def brute_force_gh(M, N, forced=None):
    """Half the least distortion over every subset of M x N with full projections."""
    cells = [(u, v) for u in M.points for v in N.points]
    best = None
    for mask in range(1, 1 << len(cells)):
        R = [cells[k] for k in range(len(cells)) if mask >> k & 1]
        if {u for u, _ in R} != set(M.points) or {v for _, v in R} != set(N.points):
            continue
        if forced is not None and forced not in R:
            continue
        dis = max((abs(M.d(a, a2) - N.d(b, b2)) for a, b in R for a2, b2 in R), default=0)
        best = dis if best is None or dis < best else best
    return Fraction(best) / 2


def brute_force_bijection(M, N, fixed=None):
    best = None
    for perm in itertools.permutations(N.points):
        if fixed is not None and perm[fixed[0]] != fixed[1]:
            continue
        lam = Fraction(1)
        for a, b in itertools.combinations(M.points, 2):
            dm, dn = M.d(a, b), N.d(perm[a], perm[b])
            lam = max(lam, dm / dn, dn / dm)
        best = lam if best is None or lam < best else best
    return best
