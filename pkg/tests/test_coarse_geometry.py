import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from gromovlab.coarse_geometry import (
    Bijection,
    Budget,
    best_bijection,
    distortion,
    qi_from_bijection,
    qi_from_coupling,
    qi_search,
    relation_check,
)
from gromovlab.coupling import Correspondence, coupling_from_correspondence, correspondence_distortion
from gromovlab.metric_core import DomainError, FiniteMetricSpace, PointedSpace
from tests.helpers import brute_force_bijection, metric_spaces, pointed_spaces, random_space


def identity(space):
    return Bijection(space, space, [(i, i) for i in space.points])


def scaled(space, s):
    return FiniteMetricSpace(space.labels, [[v * s for v in row] for row in space.dist])


class TestDistortion:
    @given(metric_spaces())
    def test_identity(self, M):
        assert distortion(identity(M)) == 1

    @given(metric_spaces(min_size=2), st.fractions(min_value=Fraction(1, 5), max_value=5))
    def test_uniform_scaling(self, M, s):
        phi = Bijection(M, scaled(M, s), [(i, i) for i in M.points])
        assert distortion(phi) == max(s, 1 / s)

    @given(metric_spaces(min_size=2), st.randoms())
    def test_inverse_and_composition(self, M, rnd):
        N = scaled(M, Fraction(rnd.randint(1, 4), rnd.randint(1, 4)))
        perm = list(N.points)
        rnd.shuffle(perm)
        P = random_space(rnd, len(M))
        phi = Bijection(M, N, list(enumerate(perm)))
        psi = Bijection(N, P, [(i, i) for i in N.points])
        assert distortion(phi.inverse()) == distortion(phi)
        assert distortion(phi.then(psi)) <= distortion(phi) * distortion(psi)

    def test_bad_pairing(self):
        M = FiniteMetricSpace.line([0, 1])
        with pytest.raises(DomainError):
            Bijection(M, M, [(0, 0), (1, 0)])


class TestBestBijection:
    def test_isometric(self):
        M = FiniteMetricSpace.line([0, 2, 7])
        N = FiniteMetricSpace.line([7, 5, 0])
        assert best_bijection(M, N).distortion == 1

    def test_two_point(self):
        assert best_bijection(FiniteMetricSpace.line([0, 2]), FiniteMetricSpace.line([0, 6])).distortion == 3

    def test_size_mismatch(self):
        with pytest.raises(DomainError):
            best_bijection(FiniteMetricSpace.line([0]), FiniteMetricSpace.line([0, 1]))

    @pytest.mark.parametrize("seed", range(20))
    def test_matches_all_24_permutations(self, seed):
        rng = random.Random(seed)
        M, N = random_space(rng, 4), random_space(rng, 4)
        assert best_bijection(M, N).distortion == brute_force_bijection(M, N)
        assert best_bijection(M, N, fixed=[(0, 1)]).distortion == brute_force_bijection(M, N, fixed=(0, 1))

    @settings(max_examples=30)
    @given(metric_spaces(min_size=3, max_size=5), st.randoms())
    def test_invariant_under_relabel_and_swap(self, M, rnd):
        N = random_space(rnd, len(M))
        value = best_bijection(M, N).distortion
        perm = list(M.points)
        rnd.shuffle(perm)
        relabeled = FiniteMetricSpace(M.labels, [[M.d(perm[i], perm[j]) for j in M.points] for i in M.points])
        assert best_bijection(relabeled, N).distortion == value
        assert best_bijection(N, M).distortion == value


class TestQISearch:
    def test_identity_certificate(self):
        M = PointedSpace(FiniteMetricSpace.line([0, 3, 4]))
        cert = qi_search(M, M, 0, 1)
        assert cert.netA == cert.netB == {0, 1, 2}
        assert cert.phi.pairs == ((0, 0), (1, 1), (2, 2))
        assert cert.check(M, M) == []

    def test_cardinality_mismatch_exhausts(self):
        M = PointedSpace(FiniteMetricSpace.line([0, 3, 4]))
        N = PointedSpace(FiniteMetricSpace.line([0, 3]))
        assert qi_search(M, N, 0, 1000) is None

    def test_bigger_net_budget(self):
        M = PointedSpace(FiniteMetricSpace.line([0, 1, 10]))
        N = PointedSpace(FiniteMetricSpace.line([0, 10]))
        cert = qi_search(M, N, 1, 1)
        assert cert is not None and cert.netA == {0, 2}

    @settings(max_examples=25)
    @given(pointed_spaces(min_size=2, max_size=4), st.randoms())
    def test_succeeds_at_best_distortion_and_is_monotone(self, M, rnd):
        N = PointedSpace(random_space(rnd, len(M)), rnd.randrange(len(M)))
        lam = best_bijection(M.space, N.space, fixed=[(M.base, N.base)]).distortion
        assert qi_search(M, N, 0, lam) is not None
        assert qi_search(M, N, 3, lam + 1) is not None
        if lam > 1:
            assert qi_search(M, N, 0, lam * Fraction(99, 100)) is None


class TestRelationCheck:
    def test_can(self):
        M = FiniteMetricSpace.line([0, 3, 4])
        v = relation_check("can", PointedSpace(M, 0), PointedSpace(M, 2))
        assert v.related and v.certificate.pairs == ((0, 0), (1, 1), (2, 2))

    def test_gh_with_generous_budget(self):
        rng = random.Random(2)
        M, N = random_space(rng, 3), random_space(rng, 4)
        D = M.diameter() + N.diameter()
        assert relation_check("GH", PointedSpace(M), PointedSpace(N), Budget(D=D)).related

    def test_lip_cardinality(self):
        v = relation_check("Lip", PointedSpace(FiniteMetricSpace.line([0])),
                           PointedSpace(FiniteMetricSpace.line([0, 1])), Budget(lam=100))
        assert not v.related

    def test_unknown_kind(self):
        M = PointedSpace(FiniteMetricSpace.line([0]))
        with pytest.raises(ValueError):
            relation_check("Borel", M, M)


class TestQIGeneration:
    @settings(max_examples=30)
    @given(pointed_spaces(max_size=4), pointed_spaces(max_size=4), st.randoms())
    def test_from_gh_coupling(self, M, N, rnd):
        pairs = {(u, rnd.choice(list(N.space.points))) for u in M.space.points}
        pairs |= {(rnd.choice(list(M.space.points)), v) for v in N.space.points}
        pairs.add((M.base, N.base))
        R = Correspondence(M.space, N.space, pairs)
        c = coupling_from_correspondence(R, max(correspondence_distortion(R) / 2, Fraction(1, 2)))
        cert = qi_from_coupling(c, M.base, N.base)
        assert cert.check(M, N) == []
        assert cert.lam <= 2

    @given(metric_spaces(min_size=2, max_size=5), st.randoms())
    def test_from_bijection(self, M, rnd):
        N = random_space(rnd, len(M))
        phi = best_bijection(M, N, fixed=[(0, 0)]).bijection
        cert = qi_from_bijection(phi, PointedSpace(M), PointedSpace(N))
        assert cert.C == 0 and cert.pointed
        assert cert.check(PointedSpace(M), PointedSpace(N)) == []
