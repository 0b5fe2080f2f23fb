import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from gromovlab.coupling import validate_coupling
from gromovlab.gromov_space import (
    SizeError,
    entourage_bound,
    entourage_member,
    gh_correspondence,
    gh_distance,
    oracle_gh_distance,
    oracle_min_objective,
    pointed_gh_bounds,
    pointed_gh_distance,
    search_relation,
)
from gromovlab.metric_core import FiniteMetricSpace, PointedSpace
from gromovlab.coarse_geometry import best_bijection
from tests.helpers import brute_force_gh, metric_spaces, pointed_spaces, random_space

POINT = FiniteMetricSpace.line([0])


def pointed(space, base=0):
    return PointedSpace(space, base)


class TestGH:
    def test_isometric(self):
        M = FiniteMetricSpace.line([0, 2, 7])
        N = FiniteMetricSpace.line([3, 10, 8])
        assert gh_distance(M, N) == 0

    @pytest.mark.parametrize("D", [1, 6, Fraction(7, 3)])
    def test_point_vs_pair(self, D):
        N = FiniteMetricSpace.line([0, D])
        assert brute_force_gh(POINT, N) == Fraction(D) / 2
        assert gh_distance(POINT, N) == Fraction(D) / 2

    @pytest.mark.parametrize("D1,D2", [(3, 7), (5, 5), (1, 10)])
    def test_two_point_spaces(self, D1, D2):
        M, N = FiniteMetricSpace.line([0, D1]), FiniteMetricSpace.line([0, D2])
        assert brute_force_gh(M, N) == Fraction(abs(D1 - D2), 2)
        assert gh_distance(M, N) == Fraction(abs(D1 - D2), 2)

    @given(metric_spaces(max_size=3), metric_spaces(max_size=3))
    def test_matches_subset_enumeration(self, M, N):
        assert gh_distance(M, N) == brute_force_gh(M, N)

    @settings(max_examples=25)
    @given(metric_spaces(max_size=5), metric_spaces(max_size=5))
    def test_branch_and_bound_matches_enumeration(self, M, N):
        assert gh_distance(M, N, exhaustive=False) == gh_distance(M, N, exhaustive=True)

    @settings(max_examples=30)
    @given(metric_spaces(max_size=3), metric_spaces(max_size=3), metric_spaces(max_size=3))
    def test_metric_properties(self, A, B, C):
        assert gh_distance(A, B) == gh_distance(B, A)
        assert gh_distance(A, C) <= gh_distance(A, B) + gh_distance(B, C)
        assert gh_distance(A, A) == 0

    def test_larger_instance_runs(self):
        rng = random.Random(5)
        M, N = random_space(rng, 6), random_space(rng, 6)
        value, corr = gh_correspondence(M, N)
        assert value >= abs(M.diameter() - N.diameter()) / 2
        assert value <= max(M.diameter(), N.diameter()) / 2


class TestPointed:
    def test_isometric_bases(self):
        M = FiniteMetricSpace.line([0, 2, 7])
        N = FiniteMetricSpace.line([7, 5, 0])
        assert pointed_gh_distance(pointed(M, 0), pointed(N, 0)) == 0
        assert pointed_gh_distance(pointed(M, 0), pointed(N, 2)) > 0

    def test_point_vs_pair(self):
        D = 8
        N = FiniteMetricSpace.line([0, D])
        assert pointed_gh_distance(pointed(POINT), pointed(N)) == Fraction(D, 2)
        grid = D / 100
        assert oracle_min_objective(pointed(POINT), pointed(N), D + 1, grid) == pytest.approx(D / 2, abs=2 * grid)

    @given(pointed_spaces(max_size=3), pointed_spaces(max_size=3))
    def test_symmetric_and_bounded(self, M, N):
        b = pointed_gh_bounds(M, N)
        assert b.upper == pointed_gh_distance(N, M)
        assert b.lower <= b.upper
        assert b.upper == brute_force_gh(M.space, N.space, forced=(M.base, N.base))

    @given(pointed_spaces(max_size=4))
    def test_zero_under_base_preserving_isometry(self, M):
        assert pointed_gh_distance(M, M) == 0


class TestEntourage:
    def test_identical_spaces(self):
        M = pointed(FiniteMetricSpace.line([0, 2, 7]))
        upper, cert = entourage_bound(M, M, 100, r=Fraction(1, 10))
        assert upper == 0 and cert.infimum == 0
        assert 0 < cert.objective < Fraction(1, 10)
        assert cert.check() == []

    @settings(max_examples=30)
    @given(pointed_spaces(max_size=4), pointed_spaces(max_size=4), st.integers(1, 30))
    def test_monotone_in_R_and_valid(self, M, N, R):
        u1, c1 = entourage_bound(M, N, R)
        u2, c2 = entourage_bound(M, N, R + 7)
        assert u1 <= u2
        assert validate_coupling(c1.coupling) == []
        assert c1.objective >= u1

    @settings(max_examples=40)
    @given(pointed_spaces(max_size=3), pointed_spaces(max_size=3))
    def test_zero_infimum_means_isometry_when_balls_cover(self, M, N):
        R = M.space.diameter() + N.space.diameter() + 1
        upper, _ = entourage_bound(M, N, R)
        if upper == 0:
            assert len(M) == len(N)
            found = best_bijection(M.space, N.space, fixed=[(M.base, N.base)])
            assert found.distortion == 1

    def test_membership_decisions(self):
        M = pointed(POINT)
        N = pointed(FiniteMetricSpace.line([0, 6]))
        assert entourage_member(M, N, 10, 4)[0] is True
        assert entourage_member(M, N, 10, 3)[0] is False
        # radius 1 sees only the bases
        assert entourage_member(M, N, 1, Fraction(1, 2))[0] is True


class TestOracle:
    def test_point_vs_point_is_grid(self):
        assert oracle_min_objective(pointed(POINT), pointed(POINT), 1, 0.25) == pytest.approx(0.25)
        assert oracle_min_objective(pointed(POINT), pointed(POINT), 1, 0.25, box=1, method="grid") == 0.25

    def test_grid_and_milp_agree_on_point_vs_pair(self):
        D = 4
        N = pointed(FiniteMetricSpace.line([0, D]))
        g = D / 100
        lit = oracle_min_objective(pointed(POINT), N, D + 1, g, box=3 * D, method="grid")
        mip = oracle_min_objective(pointed(POINT), N, D + 1, g, box=3 * D)
        assert lit == pytest.approx(D / 2)
        assert mip == pytest.approx(lit, abs=2 * g)

    def test_grid_and_milp_agree_on_two_by_two(self):
        M = pointed(FiniteMetricSpace.line([0, 2]))
        N = pointed(FiniteMetricSpace.line([0, 3]))
        lit = oracle_min_objective(M, N, 10, 0.5, box=4, method="grid")
        mip = oracle_min_objective(M, N, 10, 0.5, box=4)
        assert mip <= lit + 1e-9
        assert lit - mip <= 2 * 0.5

    def test_size_limit(self):
        big = pointed(FiniteMetricSpace.line([0, 1, 2, 3]))
        with pytest.raises(SizeError):
            oracle_min_objective(big, big, 1, 0.1)

    @settings(max_examples=15)
    @given(pointed_spaces(max_size=3, hi=8), pointed_spaces(max_size=3, hi=8), st.integers(1, 20))
    def test_entourage_matches_oracle(self, M, N, R):
        grid = float(max(M.space.diameter(), N.space.diameter(), 1)) / 200
        upper, _ = entourage_bound(M, N, R)
        assert abs(float(upper) - oracle_min_objective(M, N, R, grid)) <= 2 * grid

    @settings(max_examples=10)
    @given(metric_spaces(max_size=3, hi=8), metric_spaces(max_size=3, hi=8))
    def test_gh_matches_oracle(self, M, N):
        grid = float(max(M.diameter(), N.diameter(), 1)) / 200
        assert abs(float(gh_distance(M, N)) - oracle_gh_distance(M, N, grid)) <= 2 * grid


def test_search_relation_respects_cover_and_forced():
    M = FiniteMetricSpace.line([0, 1, 10])
    N = FiniteMetricSpace.line([0, 1])
    res = search_relation(M, N, left_cover=[0, 1], right_cover=[0, 1], forced=[(2, 1)])
    pairs = set(res.pairs)
    assert (2, 1) in pairs
    assert {0, 1} <= {u for u, _ in pairs}
