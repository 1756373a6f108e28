"""Quasi-isometry parameter fits and concrete embedding checks."""
import math
from fractions import Fraction

import numpy as np
import pytest

from coarsecover.coverings import UniformGrid, as_point, build_nerve
from coarsecover.decomposition import SampledFunction, build_bapu, gaussian
from coarsecover.embeddings import (
    adapted_support,
    dyadic_power_embedding,
    fit_qi_parameters,
    geometric_condition_check,
    induced_index_map,
    tensor_embedding,
)
from coarsecover.errors import DegenerateSample, EmptySupport


class TestQIFit:
    def test_identity_sample(self):
        pairs = [(d, d) for d in range(1, 20)]
        fit = fit_qi_parameters(pairs, l_max=8.0, c_max=4.0)
        assert fit.feasible
        assert fit.L == pytest.approx(1.0, abs=1e-9)
        assert fit.C == pytest.approx(0.0, abs=1e-9)

    def test_doubling_sample(self):
        pairs = [(d, 2 * d) for d in range(1, 20)]
        fit = fit_qi_parameters(pairs, l_max=8.0, c_max=0.0)
        assert fit.feasible
        assert fit.L == 2.0
        assert fit.C == 0.0

    def test_additive_offset_absorbed(self):
        pairs = [(d, d + 3) for d in range(1, 20)]
        fit = fit_qi_parameters(pairs, l_max=8.0, c_max=3.0)
        assert fit.feasible
        assert fit.L == pytest.approx(1.0, abs=1e-9)
        assert fit.C == pytest.approx(3.0, abs=1e-9)

    def test_infeasible_with_witness(self):
        pairs = [(d, d) for d in range(1, 10)] + [(1.0, 100.0)]
        fit = fit_qi_parameters(pairs, l_max=4.0, c_max=10.0)
        assert not fit.feasible
        assert fit.witness == (1.0, 100.0)
        assert fit.violation > 0

    def test_needed_c_monotone_in_l(self):
        rng = np.random.default_rng(3)
        pairs = [(float(a), float(b)) for a, b in rng.uniform(0.5, 30.0, size=(60, 2))]
        prev = None
        for L in np.linspace(1.0, 10.0, 40):
            fit = fit_qi_parameters(pairs, l_max=float(L), c_max=1e9)
            if prev is not None:
                assert fit.C <= prev + 1e-9
            prev = fit.C

    def test_degenerate_samples(self):
        with pytest.raises(DegenerateSample):
            fit_qi_parameters([], l_max=2.0, c_max=1.0)
        with pytest.raises(DegenerateSample):
            fit_qi_parameters([(0.0, 0.0), (0.0, 0.0)], l_max=2.0, c_max=1.0)
        with pytest.raises(ValueError):
            fit_qi_parameters([(1.0, 1.0)], l_max=0.5, c_max=1.0)


class TestAdaptedSupport:
    def test_single_cell_function(self):
        bump = lambda x: np.maximum(0.0, 1.0 - np.abs(2.0 * np.asarray(x) - 1.0))
        f = SampledFunction.from_callable(bump, -6.0, 6.0, 1200)
        bapu = build_bapu(UniformGrid(1), indices=range(-7, 7), order=1)
        supp = adapted_support(f, bapu, p=2)
        # supp f = [0, 1] meets only the bumps of cells -1 and 0
        assert supp == {(-1,), (0,)}
        nerve = build_nerve(UniformGrid(1), 7)
        assert supp <= nerve.star((0,))

    def test_local_pieces_live_in_double_star(self):
        f = gaussian(dim=1, halfwidth=8.0, n=512)
        bapu = build_bapu(UniformGrid(1), indices=range(-9, 9), order=1)
        nerve = build_nerve(UniformGrid(1), 9)
        for i in [(-2,), (0,), (3,)]:
            phi = bapu.evaluate(i, f.mesh())
            piece = SampledFunction(lo=f.lo, h=f.h, values=f.values * phi)
            supp = adapted_support(piece, bapu, p=2)
            for j in supp:
                cells = set()
                for c in bapu.support_cells(j):
                    cells |= nerve.star_in_window(c)
                assert set(bapu.support_cells(i)) & cells

    def test_empty_support(self):
        f = SampledFunction(lo=(-3.0,), h=0.01, values=np.zeros(600, dtype=complex))
        bapu = build_bapu(UniformGrid(1), indices=range(-4, 4), order=1)
        with pytest.raises(EmptySupport):
            adapted_support(f, bapu, p=2)


class TestGeometricCondition:
    def test_identity_map(self):
        nerve = build_nerve(UniformGrid(2), 10)
        pts = [as_point([a, b]) for a in (-6, -2, 0, 3, 6) for b in (-5, 0, 4)]
        rep = geometric_condition_check(lambda p: p, nerve, nerve, pts, L=1.0, C=0.0)
        assert rep.ok
        assert rep.fitted.feasible
        assert rep.fitted.L == pytest.approx(1.0, abs=1e-9)
        assert rep.pair_count == len(pts) * (len(pts) - 1) // 2

    def test_collapsing_map_fails(self):
        nerve = build_nerve(UniformGrid(1), 12)
        pts = [as_point([a]) for a in (-10, -5, 0, 5, 10)]
        rep = geometric_condition_check(
            lambda p: as_point([0]), nerve, nerve, pts, L=1.0, C=0.0
        )
        assert not rep.ok
        assert rep.worst_lower > 0


class TestInducedIndexMap:
    def test_identity_is_bijection(self):
        nerve = build_nerve(UniformGrid(1), 6)
        reps = {i: as_point([Fraction(2 * i[0] + 1, 2)]) for i in nerve.indices}
        rep = induced_index_map(lambda p: p, nerve, nerve, reps)
        assert rep.kind == "bijection"
        assert all(rep.mapping[i] == i for i in nerve.indices)

    def test_folding_map_collides(self):
        nerve = build_nerve(UniformGrid(1), 6)
        reps = {i: as_point([Fraction(2 * i[0] + 1, 2)]) for i in nerve.indices}
        rep = induced_index_map(lambda p: as_point([abs(p[0])]), nerve, nerve, reps)
        assert rep.kind == "not_bijection"
        assert rep.collisions


class TestDyadicPowerEmbedding:
    @pytest.mark.parametrize("n", [1, 2])
    @pytest.mark.parametrize("p", [1.0, 2.0])
    def test_norm_scaling_constant(self, n, p):
        rep = dyadic_power_embedding(n, p=p)
        expected = (math.pi ** (n / 2) / math.gamma(1 + n / 2)) ** (1.0 / p)
        assert rep.expected_ratio == pytest.approx(expected)
        assert rep.ratio_error <= 1e-3

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_qi_constants_dominated(self, n):
        rep = dyadic_power_embedding(n)
        assert rep.qi_fit.feasible
        assert rep.qi_dominated

    @pytest.mark.parametrize("n", [2, 3])
    def test_index_map_needs_rescaled_covering(self, n):
        rep = dyadic_power_embedding(n)
        assert rep.scaled_map.kind == "bijection"
        assert rep.unscaled_map.kind == "not_bijection"
        assert rep.unscaled_map.missing  # indices skipped by the plain covering

    def test_n1_both_coverings_match(self):
        rep = dyadic_power_embedding(1)
        assert rep.scaled_map.kind == "bijection"
        assert rep.unscaled_map.kind == "bijection"


class TestTensorEmbedding:
    @pytest.mark.parametrize("pq", [1.0, 2.0])
    def test_factorization(self, pq):
        f = gaussian(dim=1, halfwidth=8.0, n=128)
        shifted = lambda x: np.exp(-np.pi * (np.asarray(x) - 0.5) ** 2)
        eta = SampledFunction.from_callable(shifted, -8.0, 8.0, 128)
        rep = tensor_embedding(f, eta, p=pq, q=pq)
        assert rep.factor_error <= 1e-4
        assert rep.norm_tensor == pytest.approx(rep.norm_f * rep.norm_eta, rel=1e-4)

    def test_composition_coherence(self):
        f = gaussian(dim=1, halfwidth=8.0, n=64)
        eta = gaussian(dim=1, halfwidth=8.0, n=64)
        rep = tensor_embedding(f, eta)
        assert rep.composition_error <= 1e-6

    def test_grid_mismatch_rejected(self):
        f = gaussian(dim=1, halfwidth=8.0, n=128)
        eta = gaussian(dim=1, halfwidth=8.0, n=64)
        with pytest.raises(ValueError):
            tensor_embedding(f, eta)
