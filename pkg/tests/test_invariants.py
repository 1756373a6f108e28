"""Growth classification, four-point delta, dimension formulas, probes.

Independent oracle for the four-point defect: maximize
min((x|z)_w, (z|y)_w) - (x|y)_w over all ordered quadruples, written
directly from the Gromov-product definition.
"""
import itertools
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coarsecover import groups as G
from coarsecover.errors import DegenerateSample, NotAMetric
from coarsecover.invariants import (
    GrowthClassification,
    TrendClassification,
    bass_guivarch,
    box_multiplicity_probe,
    classify_growth,
    coarse_connected,
    four_point_delta,
    homogeneous_dimension,
    hyperbolicity_trend,
    qi_obstruction_report,
    truncated_max_metric,
)
from coarsecover.profiles import GrowthProfile, HyperbolicityProfile


def oracle_delta(D):
    n = len(D)

    def gp(a, b, w):
        return 0.5 * (D[a][w] + D[b][w] - D[a][b])

    best = 0.0
    for x, y, z, w in itertools.product(range(n), repeat=4):
        best = max(best, min(gp(x, z, w), gp(z, y, w)) - gp(x, y, w))
    return best


def random_metric(rng, n):
    # shortest-path metric of a random weighted complete graph
    W = [[0.0] * n for _ in range(n)]
    for a in range(n):
        for b in range(a + 1, n):
            W[a][b] = W[b][a] = rng.uniform(1.0, 4.0)
    for k in range(n):
        for a in range(n):
            for b in range(n):
                W[a][b] = min(W[a][b], W[a][k] + W[k][b])
    return np.array(W)


class TestClassifyGrowth:
    def test_abelian_degrees(self):
        for k, r_max in [(1, 30), (2, 20), (3, 12)]:
            model = G.FreeAbelian(k)
            profile = G.growth_function(model, model.default_generators(), r_max)
            cls = classify_growth(profile)
            assert cls.kind == "polynomial"
            assert abs(cls.degree - k) <= 0.2

    def test_free_group_exponential(self):
        model = G.FreeGroup(2)
        profile = G.growth_function(model, model.default_generators(), 12)
        cls = classify_growth(profile)
        assert cls.kind == "exponential"
        assert abs(cls.rate - np.log(3)) <= 0.05

    def test_bounded(self):
        profile = GrowthProfile(source="finite", radii=list(range(8)), sizes=[1, 3, 4] + [4] * 5)
        assert classify_growth(profile).kind == "bounded"
        assert classify_growth(profile).bound == 4

    def test_inconclusive_on_superexponential(self):
        radii = list(range(1, 11))
        sizes = [int(np.exp(0.35 * r * r)) for r in radii]
        profile = GrowthProfile(source="weird", radii=radii, sizes=sizes)
        assert classify_growth(profile).kind == "inconclusive"

    @given(scale=st.integers(min_value=1, max_value=1000))
    @settings(max_examples=20, deadline=None)
    def test_scale_invariance(self, scale):
        radii = list(range(1, 21))
        sizes = [2 * r * r + 2 * r + 1 for r in radii]
        base = classify_growth(GrowthProfile(source="q", radii=radii, sizes=sizes))
        scaled = classify_growth(
            GrowthProfile(source="q", radii=radii, sizes=[scale * s for s in sizes])
        )
        assert scaled.kind == base.kind
        assert abs(scaled.degree - base.degree) < 1e-9

    def test_too_short_profile(self):
        with pytest.raises(DegenerateSample):
            classify_growth(GrowthProfile(source="s", radii=[0, 1], sizes=[1, 3]))


class TestFourPointDelta:
    def test_line_is_zero(self):
        idx = np.arange(12)
        D = np.abs(np.subtract.outer(idx, idx)).astype(float)
        assert four_point_delta(D) == 0.0

    def test_tree_is_zero(self):
        model = G.FreeGroup(2)
        dist = G.ball(model, model.default_generators(), 6)
        elems = [g for g, d in dist.items() if d <= 3]
        D = np.empty((len(elems), len(elems)))
        for a, g in enumerate(elems):
            for b, h in enumerate(elems):
                D[a][b] = dist[model.multiply(model.inverse(g), h)]
        assert four_point_delta(D) == 0.0

    def test_square_corners(self):
        r = 6
        pts = [(0, 0), (r, 0), (0, r), (r, r)]
        D = np.array(
            [[abs(a[0] - b[0]) + abs(a[1] - b[1]) for b in pts] for a in pts], dtype=float
        )
        assert four_point_delta(D) == r / 2 * 2 / 2 + r / 2  # = r
        assert four_point_delta(D) == oracle_delta(D)

    def test_matches_definition_oracle(self):
        rng = random.Random(41)
        for n in (5, 6, 7):
            D = random_metric(rng, n)
            assert four_point_delta(D) == pytest.approx(oracle_delta(D), abs=1e-12)

    def test_permutation_invariance(self):
        rng = random.Random(43)
        D = random_metric(rng, 8)
        perm = np.random.default_rng(0).permutation(8)
        assert four_point_delta(D[np.ix_(perm, perm)]) == pytest.approx(
            four_point_delta(D), abs=1e-12
        )

    def test_monotone_under_subspaces(self):
        rng = random.Random(47)
        D = random_metric(rng, 9)
        sub = D[np.ix_(range(6), range(6))]
        assert four_point_delta(sub) <= four_point_delta(D) + 1e-12

    def test_subsample_deterministic(self):
        rng = random.Random(53)
        D = random_metric(rng, 30)
        a = four_point_delta(D, full_limit=10, samples=5000, seed=9)
        b = four_point_delta(D, full_limit=10, samples=5000, seed=9)
        assert a == b
        full = four_point_delta(D)
        assert a <= full + 1e-12

    def test_rejects_non_metric(self):
        bad = np.array([[0, 1], [2, 0]], dtype=float)
        with pytest.raises(NotAMetric):
            four_point_delta(bad)
        bad2 = np.array([[0.0, 5.0, 1.0], [5.0, 0.0, 1.0], [1.0, 1.0, 0.0]])
        with pytest.raises(NotAMetric):
            four_point_delta(bad2)


class TestHyperbolicityTrend:
    def test_line_bounded_zero(self):
        model = G.FreeAbelian(1)
        trend = hyperbolicity_trend(model, radii=range(2, 13, 2))
        assert trend.kind == "bounded"
        assert trend.delta_max == 0.0

    def test_plane_growing(self):
        model = G.FreeAbelian(2)
        trend = hyperbolicity_trend(model, radii=range(2, 9))
        assert trend.kind == "growing"
        assert trend.slope > 0.25


class TestDimensionFormulas:
    def test_examples(self):
        assert bass_guivarch((2, 1)) == 4
        assert bass_guivarch((2, 1, 1)) == 7
        for n in (1, 2, 3):
            assert bass_guivarch((2 * n, 1)) == 2 * n + 2
        assert homogeneous_dimension((2, 1, 1)) == 7

    def test_from_group_models(self):
        assert bass_guivarch(G.DiscreteHeisenberg(1).lower_central_ranks()) == 4
        assert bass_guivarch(G.DiscreteHeisenberg(3).lower_central_ranks()) == 8
        assert bass_guivarch(G.EngelLattice().lower_central_ranks()) == 7
        assert bass_guivarch(G.FreeAbelian(3).lower_central_ranks()) == 3

    def test_rejects_bad_input(self):
        with pytest.raises(ValueError):
            bass_guivarch(())
        with pytest.raises(ValueError):
            bass_guivarch((2, -1))


class TestCoarseConnected:
    def test_line_connected(self):
        idx = np.arange(25)
        D = np.abs(np.subtract.outer(idx, idx)).astype(float)
        assert coarse_connected(D, 1)

    def test_truncated_max_space_disconnects(self):
        # d(n, m) = max(n, m): beyond the scale c the points fall apart
        D = truncated_max_metric(40)
        for c in (1, 3, 10):
            assert not coarse_connected(D, c)
        assert coarse_connected(D, 39)

    @given(c=st.integers(min_value=0, max_value=10))
    @settings(max_examples=15, deadline=None)
    def test_monotone_in_scale(self, c):
        idx = np.arange(12)
        D = (3.0 * np.abs(np.subtract.outer(idx, idx))).astype(float)
        if coarse_connected(D, c):
            assert coarse_connected(D, c + 1)


class TestBoxProbe:
    def test_examples(self):
        assert box_multiplicity_probe(1, 2, 10) == 2
        assert box_multiplicity_probe(2, 2, 12) == 3

    def test_single_brick_window(self):
        assert box_multiplicity_probe(2, 1, 10, window=5) == 1

    def test_requires_separated_scales(self):
        with pytest.raises(ValueError):
            box_multiplicity_probe(1, 5, 10)


def _poly(deg):
    return GrowthClassification(kind="polynomial", degree=float(deg), residual=0.01)


def _trend(kind, slope, dmax):
    return TrendClassification(kind=kind, slope=slope, delta_max=dmax)


class TestObstructionReport:
    def test_degree_mismatch(self):
        rep = qi_obstruction_report(
            {"name": "A", "growth": _poly(4.0)}, {"name": "B", "growth": _poly(3.0)}
        )
        assert rep.verdict == "not_quasi_isometric"

    def test_type_mismatch(self):
        rep = qi_obstruction_report(
            {"name": "A", "growth": GrowthClassification(kind="exponential", rate=1.1)},
            {"name": "B", "growth": _poly(2.0)},
        )
        assert rep.verdict == "not_quasi_isometric"

    def test_hyperbolic_target_blocks_flat_source(self):
        rep = qi_obstruction_report(
            {"name": "A", "growth": _poly(2.0), "trend": _trend("growing", 0.5, 6.0)},
            {"name": "B", "growth": _poly(2.0), "trend": _trend("bounded", 0.0, 2.0)},
        )
        assert rep.verdict == "no_embedding_into_hyperbolic"

    def test_agreement_is_inconclusive(self):
        rep = qi_obstruction_report(
            {"name": "A", "growth": _poly(2.0)}, {"name": "B", "growth": _poly(2.1)}
        )
        assert rep.verdict == "inconclusive"
        assert "certify" in rep.note
