"""Quasi-isometry fits, adapted supports, and concrete embedding checks."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import coverings as _cov
from .coverings import DyadicAnnuli, as_point, build_nerve, chain_distance
from .decomposition import SampledFunction, gaussian, local_norm, modulation_norm, stft
from .errors import DegenerateSample, EmptySupport

QI_FIT_RESOLUTION = 1e-3


@dataclass
class QIFitResult:
    feasible: bool
    L: float = None
    C: float = None
    witness: tuple = None  # worst pair (d_x, d_z) when infeasible
    violation: float = None


def _needed_c(pairs, L):
    worst = 0.0
    for dx, dz in pairs:
        worst = max(worst, dz - L * dx, dx / L - dz)
    return max(worst, 0.0)


def fit_qi_parameters(pairs, l_max, c_max, resolution=QI_FIT_RESOLUTION):
    """Least multiplicative constant L (ties broken by least C) such that
    d_X / L - C <= d_Z <= L d_X + C holds for every sampled pair.

    pairs: iterable of (d_X, d_Z).  The needed additive constant C(L) is
    non-increasing in L, so a coarse grid scan brackets the least
    feasible L and bisection refines it to the requested resolution.
    When even (l_max, c_max) fails, the result is infeasible and carries
    the worst-violation pair.
    """
    pairs = [(float(a), float(b)) for a, b in pairs]
    if not pairs:
        raise DegenerateSample("empty sample")
    if all(a == 0.0 for a, _ in pairs) and all(b == 0.0 for _, b in pairs):
        raise DegenerateSample("sample contains only coincident pairs")
    if l_max < 1.0:
        raise ValueError("l_max must be >= 1")
    if _needed_c(pairs, l_max) > c_max:
        worst = max(pairs, key=lambda p: max(p[1] - l_max * p[0], p[0] / l_max - p[1]))
        violation = max(worst[1] - l_max * worst[0], worst[0] / l_max - worst[1]) - c_max
        return QIFitResult(feasible=False, witness=worst, violation=violation)
    lo, hi = 1.0, l_max
    if _needed_c(pairs, lo) <= c_max:
        hi = lo
    else:
        # coarse grid scan to shrink the bracket before bisecting
        grid = np.linspace(lo, hi, 33)
        for g in grid[1:]:
            if _needed_c(pairs, float(g)) <= c_max:
                hi = float(g)
                break
            lo = float(g)
        while hi - lo > resolution:
            mid = 0.5 * (lo + hi)
            if _needed_c(pairs, mid) <= c_max:
                hi = mid
            else:
                lo = mid
    L = hi
    # prefer the clean grid value just below the bisection bracket
    for snapped in (math.floor(L / resolution) * resolution, round(L / resolution) * resolution):
        if 1.0 <= snapped <= L and _needed_c(pairs, snapped) <= c_max:
            L = snapped
            break
    return QIFitResult(feasible=True, L=L, C=_needed_c(pairs, L))


def adapted_support(f, bapu, p=2, mode="Lp", tol=1e-10):
    """Indices whose local norm exceeds tol times the largest local norm."""
    locals_dict = {i: local_norm(f, bapu, i, p, mode) for i in bapu.indices}
    top = max(locals_dict.values(), default=0.0)
    if top <= 0.0:
        raise EmptySupport("every local norm vanishes")
    return frozenset(i for i, v in locals_dict.items() if v > tol * top)


@dataclass
class GeometricConditionReport:
    ok: bool
    fitted: QIFitResult
    worst_upper: float  # max of d_tgt - (L d_src + C) over pairs
    worst_lower: float  # max of (d_src / L - C) - d_tgt over pairs
    pair_count: int


def geometric_condition_check(point_map, source_nerve, target_nerve, points, L, C):
    """Two-sided comparison of chain distances through a point map.

    Checks d_src / L - C <= d_tgt <= L d_src + C on all sampled pairs
    and also reports the best-fitting constants for the same sample.
    """
    images = [point_map(p) for p in points]
    n = len(points)
    pairs = []
    worst_upper = worst_lower = -math.inf
    for a in range(n):
        for b in range(a + 1, n):
            ds = chain_distance(source_nerve, points[a], points[b])
            dt = chain_distance(target_nerve, images[a], images[b])
            pairs.append((ds, dt))
            worst_upper = max(worst_upper, dt - (L * ds + C))
            worst_lower = max(worst_lower, ds / L - C - dt)
    if not pairs:
        raise DegenerateSample("need at least two sample points")
    fitted = fit_qi_parameters(pairs, l_max=max(L, 1.0) * 4 + 4, c_max=C + 16)
    return GeometricConditionReport(
        ok=worst_upper <= 0 and worst_lower <= 0,
        fitted=fitted,
        worst_upper=worst_upper,
        worst_lower=worst_lower,
        pair_count=len(pairs),
    )


@dataclass
class IndexMapReport:
    kind: str  # "bijection" | "not_bijection"
    mapping: dict
    missing: list
    collisions: list


def induced_index_map(point_map, source_nerve, target_nerve, rep_points):
    """Index map induced by a point map between covered spaces.

    Each source index j maps through a representative point of Q_j; when
    the image lies in several target sets the median containing index
    (in sorted order) is selected.  The map is a bijection when it is
    injective on the source window and hits every interior index of the
    target window.
    """
    mapping = {}
    for j, pt in rep_points.items():
        hits = sorted(_cov.containing_indices(target_nerve, point_map(pt)))
        if not hits:
            raise DegenerateSample(
                f"image of representative of {j!r} lies outside the target window"
            )
        mapping[j] = hits[len(hits) // 2]
    seen = {}
    collisions = []
    for j, i in mapping.items():
        if i in seen:
            collisions.append((seen[i], j, i))
        else:
            seen[i] = j
    image = set(mapping.values())
    missing = sorted(i for i in target_nerve.interior if i not in image)
    kind = "bijection" if not collisions and not missing else "not_bijection"
    return IndexMapReport(kind=kind, mapping=mapping, missing=missing, collisions=collisions)


def _rational_near(value, bits=24):
    return Fraction(round(value * (1 << bits)), 1 << bits)


@dataclass
class DyadicPowerReport:
    n: int
    p: float
    norm_ratio: float
    expected_ratio: float
    ratio_error: float
    qi_fit: QIFitResult
    qi_dominated: bool
    scaled_map: IndexMapReport
    unscaled_map: IndexMapReport


def dyadic_power_embedding(n, p=2.0, box=None, grid_n=None, m_max=10, exponents=None):
    """Checks for the power map x -> |x|^n between R^n and the half line.

    Pulling back f along the map scales every L^p norm by the fixed
    constant (pi^(n/2) / Gamma(1 + n/2))^(1/p); on the large-scale side
    the map is a quasi-isometry for the dyadic chain metrics with
    constants dominated by (n, 1), and it matches the dyadic covering of
    the half line with the 1/n-rescaled dyadic covering of R^n index by
    index, while the plain dyadic covering only hits every n-th index.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    # --- L^p pull-back constant, f(u) = exp(-u) on the half line
    if box is None:
        box = {1: 14.0, 2: 5.0, 3: 3.2}.get(n, 3.0)
    if grid_n is None:
        grid_n = {1: 4096, 2: 1024, 3: 220}.get(n, 160)
    axes = [np.linspace(-box, box, grid_n, endpoint=False) + box / grid_n for _ in range(n)]
    mesh = np.meshgrid(*axes, indexing="ij", sparse=True)
    r = np.sqrt(sum(np.asarray(a) ** 2 for a in mesh))
    h = axes[0][1] - axes[0][0]
    pulled = np.exp(-(r**n))
    num = float((pulled**p).sum() * h**n) ** (1.0 / p)
    den = (1.0 / p) ** (1.0 / p)  # ||exp(-u)||_p on the half line
    ratio = num / den
    expected = (math.pi ** (n / 2.0) / math.gamma(1.0 + n / 2.0)) ** (1.0 / p)

    # --- chain-metric QI fit on the net 2^a along the first axis
    if exponents is None:
        exponents = range(1, m_max - 1)
    src_spec = DyadicAnnuli(n)
    tgt_spec = DyadicAnnuli(1)
    src_nerve = build_nerve(src_spec, m_max + 2)
    tgt_nerve = build_nerve(tgt_spec, n * (m_max + 2) + 2)
    pts = []
    for a in exponents:
        coords = [Fraction(2) ** a] + [Fraction(0)] * (n - 1)
        pts.append(as_point(coords))
    pairs = []
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            ds = chain_distance(src_nerve, pts[i], pts[j])
            x, y = pts[i][0] ** n, pts[j][0] ** n
            dt = chain_distance(tgt_nerve, as_point([x]), as_point([y]))
            pairs.append((ds, dt))
    fit = fit_qi_parameters(pairs, l_max=float(n), c_max=1.0)
    dominated = fit.feasible and fit.L <= n + 1e-9 and fit.C <= 1.0 + 1e-9

    # --- induced index maps: rescaled covering matches, plain one does not
    def power_map(pt):
        rad = pt[0]
        return as_point([rad**n])

    scaled_spec = DyadicAnnuli(n, subdivision=n)
    scaled_nerve = build_nerve(scaled_spec, n * m_max)
    # representatives sit in the lower half of each annulus (exponent
    # m - 0.3) so their images never touch an annulus boundary
    reps_scaled = {
        m: as_point(
            [_rational_near(2.0 ** ((m - 0.3) / n))] + [Fraction(0)] * (n - 1)
        )
        for m in scaled_nerve.indices
    }
    tgt_small = build_nerve(tgt_spec, n * m_max)
    scaled_map = induced_index_map(power_map, scaled_nerve, tgt_small, reps_scaled)

    plain_nerve = build_nerve(src_spec, m_max)
    reps_plain = {
        m: as_point([_rational_near(2.0 ** (m - 0.3))] + [Fraction(0)] * (n - 1))
        for m in plain_nerve.indices
    }
    unscaled_map = induced_index_map(power_map, plain_nerve, tgt_small, reps_plain)

    return DyadicPowerReport(
        n=n,
        p=p,
        norm_ratio=ratio,
        expected_ratio=expected,
        ratio_error=abs(ratio - expected) / expected,
        qi_fit=fit,
        qi_dominated=dominated,
        scaled_map=scaled_map,
        unscaled_map=unscaled_map,
    )


@dataclass
class TensorReport:
    norm_f: float
    norm_eta: float
    norm_tensor: float
    factor_error: float
    composition_error: float


def tensor_embedding(f, eta, p=2.0, q=2.0):
    """Window-tensor embedding checks on sampled functions of one variable.

    The modulation norm of f (x) eta factorizes as the product of the
    one-variable norms; tensoring is also coherent under composition:
    tensoring with eta twice equals tensoring with eta (x) eta once.
    """
    if f.dim != 1 or eta.dim != 1:
        raise ValueError("f and eta must be one-dimensional samples")
    if f.shape != eta.shape or abs(f.h - eta.h) > 1e-12:
        raise ValueError("f and eta must share one grid")
    nf = modulation_norm(f, p, q)
    ne = modulation_norm(eta, p, q)
    tensor_vals = np.multiply.outer(f.values, eta.values)
    tensor = SampledFunction(lo=(f.lo[0], eta.lo[0]), h=f.h, values=tensor_vals)
    nt = modulation_norm(tensor, p, q)
    factor_error = abs(nt - nf * ne) / max(nf * ne, 1e-300)
    # composition: (f x eta) x eta against f x (eta x eta), sampled pointwise
    once = np.multiply.outer(tensor_vals, eta.values)
    eta2 = np.multiply.outer(eta.values, eta.values)
    twice = np.multiply.outer(f.values, eta2)
    composition_error = float(np.max(np.abs(once - twice)))
    return TensorReport(
        norm_f=nf,
        norm_eta=ne,
        norm_tensor=nt,
        factor_error=factor_error,
        composition_error=composition_error,
    )
