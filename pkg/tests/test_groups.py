"""Group models: exact arithmetic, word metrics, ball enumeration.

Brute-force oracle: balls of radius <= 4 are re-derived as the set of
all products of at most 4 generators, with no visited-set pruning.
"""
import itertools
import random
from fractions import Fraction

import pytest

from coarsecover.errors import AboveCap, ResourceLimit
from coarsecover.groups import (
    DiscreteHeisenberg,
    EngelLattice,
    FreeAbelian,
    FreeGroup,
    GeneratingSet,
    SL2Z,
    ball,
    distance_matrix,
    growth_function,
    word_distance,
)

ALL_MODELS = [
    FreeAbelian(1),
    FreeAbelian(2),
    DiscreteHeisenberg(1),
    DiscreteHeisenberg(2),
    FreeGroup(2),
    SL2Z(),
    EngelLattice(),
]


def random_element(model, rng, length=6):
    gens = model.default_generators().elements
    g = model.identity()
    for _ in range(length):
        g = model.multiply(g, gens[rng.randrange(len(gens))])
    return g


def brute_force_ball(model, radius):
    gens = model.default_generators().elements
    out = {model.identity()}
    frontier = {model.identity()}
    for _ in range(radius):
        frontier = {model.multiply(g, s) for g in frontier for s in gens}
        out |= frontier
    return out


class TestGroupAxioms:
    @pytest.mark.parametrize("model", ALL_MODELS, ids=lambda m: m.name)
    def test_associativity_and_inverses(self, model):
        rng = random.Random(17)
        e = model.identity()
        for _ in range(60):
            g = random_element(model, rng)
            h = random_element(model, rng)
            k = random_element(model, rng)
            assert model.multiply(model.multiply(g, h), k) == model.multiply(
                g, model.multiply(h, k)
            )
            assert model.multiply(g, model.inverse(g)) == e
            assert model.multiply(model.inverse(g), g) == e
            assert model.multiply(g, e) == g and model.multiply(e, g) == g

    @pytest.mark.parametrize("model", ALL_MODELS, ids=lambda m: m.name)
    def test_generating_set_symmetric_with_identity(self, model):
        gens = model.default_generators()
        elems = set(gens.elements)
        assert model.identity() in elems
        for g in elems:
            assert model.inverse(g) in elems

    @pytest.mark.parametrize("model", ALL_MODELS, ids=lambda m: m.name)
    def test_serialization_roundtrip(self, model):
        rng = random.Random(23)
        for _ in range(40):
            g = random_element(model, rng)
            assert model.parse_element(model.format_element(g)) == g

    def test_asymmetric_generating_set_rejected(self):
        model = FreeAbelian(1)
        bad = GeneratingSet((model.identity(), (1,)))
        with pytest.raises(ValueError):
            ball(model, bad, 2)
        no_id = GeneratingSet(((1,), (-1,)))
        with pytest.raises(ValueError):
            ball(model, no_id, 2)


class TestHeisenberg:
    def test_product_law(self):
        model = DiscreteHeisenberg(1)
        g = ((2,), (3,), 1)
        h = ((-1,), (4,), 0)
        # third coordinate picks up the cross term a . b'
        assert model.multiply(g, h) == ((1,), (7,), 1 + 0 + 2 * 4)

    def test_commutator_is_central_generator(self):
        model = DiscreteHeisenberg(1)
        x = ((1,), (0,), 0)
        y = ((0,), (1,), 0)
        comm = model.multiply(
            model.multiply(x, y), model.multiply(model.inverse(x), model.inverse(y))
        )
        assert comm == ((0,), (0,), 1)

    def test_center_reached_in_linear_length(self):
        # x^k y^k x^-k y^-k multiplies out to (0, 0, k^2) exactly, so the
        # central element (0, 0, k^2) has word length at most 4k <= 6k
        model = DiscreteHeisenberg(1)
        x = ((1,), (0,), 0)
        y = ((0,), (1,), 0)
        for k in range(1, 11):
            word = model.identity()
            for gen, reps in [(x, k), (y, k), (model.inverse(x), k), (model.inverse(y), k)]:
                for _ in range(reps):
                    word = model.multiply(word, gen)
            assert word == ((0,), (0,), k * k)
        # BFS cross-check at small k
        gens = model.default_generators()
        for k in (1, 2, 3):
            d = word_distance(model, gens, model.identity(), ((0,), (0,), k * k), 6 * k)
            assert d <= 6 * k

    def test_ball_sizes_small(self):
        model = DiscreteHeisenberg(1)
        profile = growth_function(model, model.default_generators(), 3)
        assert profile.sizes == [1, 5, 17, 53]


class TestFreeGroup:
    def test_reduction(self):
        model = FreeGroup(2)
        a, b = (1,), (2,)
        assert model.multiply(a, model.inverse(a)) == ()
        assert model.multiply((1, 2), (-2, -1)) == ()
        assert model.multiply((1, 2), (-2, 1)) == (1, 1)

    def test_exact_ball_sizes(self):
        model = FreeGroup(2)
        profile = growth_function(model, model.default_generators(), 10)
        assert profile.sizes == [2 * 3**n - 1 for n in range(11)]


class TestSL2Z:
    def test_generators(self):
        model = SL2Z()
        s = model.S
        assert model.multiply(s, s) == ((-1, 0), (0, -1))  # S^2 = -I
        s4 = model.multiply(model.multiply(s, s), model.multiply(s, s))
        assert s4 == model.identity()

    def test_parse_rejects_non_unimodular(self):
        with pytest.raises(ValueError):
            SL2Z().parse_element("[[1,0],[0,2]]")


class TestEngel:
    def test_denominators_bounded_on_words(self):
        model = EngelLattice()
        gens = [g for g in model.default_generators().elements]
        rng = random.Random(31)
        bound = 12**12
        for _ in range(200):
            g = model.identity()
            for _ in range(12):
                g = model.multiply(g, gens[rng.randrange(len(gens))])
            for coord in g:
                assert bound % coord.denominator == 0

    def test_central_series_data(self):
        assert EngelLattice().lower_central_ranks() == (2, 1, 1)

    def test_commutators_realize_grading(self):
        model = EngelLattice()
        x1 = (Fraction(1), Fraction(0), Fraction(0), Fraction(0))
        x2 = (Fraction(0), Fraction(1), Fraction(0), Fraction(0))

        def comm(g, h):
            return model.multiply(
                model.multiply(g, h), model.multiply(model.inverse(g), model.inverse(h))
            )

        c12 = comm(x1, x2)
        assert c12[0] == 0 and c12[1] == 0 and c12[2] == 1
        c13 = comm(x1, c12)
        assert c13[:3] == (0, 0, 0) and c13[3] == 1
        # one step deeper vanishes: class 3
        assert comm(x1, c13) == model.identity()
        assert comm(x2, c13) == model.identity()


class TestWordMetric:
    def test_z2_example(self):
        model = FreeAbelian(2)
        gens = model.default_generators()
        assert word_distance(model, gens, model.identity(), (3, -2), 10) == 5

    def test_symmetry_and_invariance(self):
        model = DiscreteHeisenberg(1)
        gens = model.default_generators()
        rng = random.Random(13)
        for _ in range(10):
            g = random_element(model, rng, length=3)
            h = random_element(model, rng, length=3)
            d = word_distance(model, gens, g, h, 14)
            assert d == word_distance(model, gens, h, g, 14)
            k = random_element(model, rng, length=2)
            assert d == word_distance(
                model, gens, model.multiply(k, g), model.multiply(k, h), 14
            )

    def test_above_cap(self):
        model = FreeAbelian(1)
        gens = model.default_generators()
        with pytest.raises(AboveCap):
            word_distance(model, gens, (0,), (30,), 10)

    def test_bounded_group_search_terminates(self):
        # the subgroup generated by S in SL2Z has order 4; searching past
        # it must stop rather than loop
        model = SL2Z()
        gens = GeneratingSet((model.identity(), model.S, model.inverse(model.S)))
        with pytest.raises(AboveCap):
            word_distance(model, gens, model.identity(), model.T, 50)


class TestBallEnumeration:
    @pytest.mark.parametrize("model", ALL_MODELS, ids=lambda m: m.name)
    def test_bfs_matches_brute_force(self, model):
        got = ball(model, model.default_generators(), 4)
        assert set(got) == brute_force_ball(model, 4)

    def test_word_lengths_correct(self):
        model = FreeAbelian(2)
        got = ball(model, model.default_generators(), 6)
        for g, d in got.items():
            assert d == abs(g[0]) + abs(g[1])

    def test_budget_exhaustion(self):
        model = FreeGroup(2)
        with pytest.raises(ResourceLimit) as exc:
            ball(model, model.default_generators(), 10, budget=100)
        assert exc.value.partial is not None
        assert len(exc.value.partial) > 100


class TestDistanceMatrix:
    def test_matches_word_distance(self):
        model = FreeAbelian(2)
        gens = model.default_generators()
        elems = [(0, 0), (1, 0), (2, 2), (-1, 3)]
        M, above = distance_matrix(model, gens, elems, cap=10)
        assert not above
        for a, g in enumerate(elems):
            for b, h in enumerate(elems):
                assert M[a][b] == word_distance(model, gens, g, h, 10)

    def test_above_cap_flagged(self):
        model = FreeAbelian(1)
        M, above = distance_matrix(model, model.default_generators(), [(0,), (9,)], cap=3)
        assert above
        assert M[0][1] is None and M[0][0] == 0
