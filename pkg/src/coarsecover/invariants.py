"""Quasi-isometry invariants: growth type, hyperbolicity, nilpotent dimensions."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import groups as _groups
from .errors import DegenerateSample, NotAMetric
from .profiles import GrowthProfile, HyperbolicityProfile

FULL_ENUM_LIMIT = 400
QUADRUPLE_SAMPLES = 200_000
DEFAULT_SEED = 0
RESIDUAL_THRESHOLD = 0.05
TAIL_FRACTION = 0.5


@dataclass
class GrowthClassification:
    kind: str  # "bounded" | "polynomial" | "exponential" | "inconclusive"
    degree: float = None
    rate: float = None
    bound: int = None
    residual: float = None
    detail: dict = field(default_factory=dict)


def _tail(profile, tail_fraction):
    radii = np.asarray(profile.radii, dtype=float)
    sizes = np.asarray(profile.sizes, dtype=float)
    keep = radii >= 1
    radii, sizes = radii[keep], sizes[keep]
    if len(radii) < 3:
        raise DegenerateSample("growth profile needs at least 3 positive radii")
    start = int(np.floor(len(radii) * (1.0 - tail_fraction)))
    start = min(start, len(radii) - 3)
    return radii[start:], sizes[start:]


def _linear_fit(x, y):
    A = np.vstack([x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    rms = float(np.sqrt(np.mean(resid**2)))
    return float(coef[0]), float(coef[1]), rms


def classify_growth(profile, tail_fraction=TAIL_FRACTION, residual_threshold=RESIDUAL_THRESHOLD):
    """Classify beta(r) as bounded, polynomial, exponential, or inconclusive.

    Fits log beta against log r (polynomial) and against r (exponential)
    on the tail of the profile by least squares; the fit with the smaller
    RMS log-residual wins, provided it clears the residual threshold.
    The classification is invariant under rescaling beta by a constant,
    since that only shifts the fitted intercept.
    """
    sizes = profile.sizes
    if len(sizes) >= 3 and sizes[-1] == sizes[len(sizes) // 2]:
        return GrowthClassification(kind="bounded", bound=sizes[-1], residual=0.0)
    radii, tail_sizes = _tail(profile, tail_fraction)
    logb = np.log(tail_sizes)
    p_slope, p_icept, p_rms = _linear_fit(np.log(radii), logb)
    e_slope, e_icept, e_rms = _linear_fit(radii, logb)
    detail = {
        "poly_slope": p_slope,
        "poly_residual": p_rms,
        "exp_rate": e_slope,
        "exp_residual": e_rms,
        "tail_radii": [int(r) for r in radii],
    }
    poly_ok = p_rms <= residual_threshold
    exp_ok = e_rms <= residual_threshold and e_slope > 0
    if poly_ok and (not exp_ok or p_rms <= e_rms):
        return GrowthClassification(kind="polynomial", degree=p_slope, residual=p_rms, detail=detail)
    if exp_ok:
        return GrowthClassification(kind="exponential", rate=e_slope, residual=e_rms, detail=detail)
    return GrowthClassification(kind="inconclusive", residual=min(p_rms, e_rms), detail=detail)


def check_metric(dm, tol=1e-9):
    D = np.asarray(dm, dtype=float)
    if D.ndim != 2 or D.shape[0] != D.shape[1]:
        raise NotAMetric("distance matrix must be square")
    if not np.all(np.isfinite(D)):
        raise NotAMetric("distance matrix has non-finite entries")
    if np.any(np.abs(np.diag(D)) > tol):
        raise NotAMetric("diagonal must vanish")
    if np.any(D < -tol):
        raise NotAMetric("distances must be non-negative")
    if np.any(np.abs(D - D.T) > tol):
        raise NotAMetric("distance matrix must be symmetric")
    n = D.shape[0]
    for k in range(n):
        if np.any(D > D[:, k][:, None] + D[k, :][None, :] + tol):
            raise NotAMetric(f"triangle inequality fails through point {k}")
    return D


def _delta_exact(D):
    n = D.shape[0]
    best = 0.0
    for i in range(n - 3):
        di = D[i]
        for j in range(i + 1, n - 2):
            tail = slice(j + 1, n)
            dkl = D[tail, tail]
            s1 = D[i, j] + dkl
            s2 = np.add.outer(di[tail], D[j, tail])  # d(i,k) + d(j,l)
            s3 = s2.T  # d(i,l) + d(j,k)
            mx = np.maximum(np.maximum(s1, s2), s3)
            mn = np.minimum(np.minimum(s1, s2), s3)
            v = float((2.0 * mx + mn - (s1 + s2 + s3)).max())
            if v > best:
                best = v
    return best / 2.0


def _delta_sampled(D, samples, seed):
    n = D.shape[0]
    rng = np.random.default_rng(seed)
    best = 0.0
    chunk = 50_000
    remaining = samples
    while remaining > 0:
        m = min(chunk, remaining)
        remaining -= m
        q = rng.integers(0, n, size=(m, 4))
        i, j, k, l = q.T
        s1 = D[i, j] + D[k, l]
        s2 = D[i, k] + D[j, l]
        s3 = D[i, l] + D[j, k]
        mx = np.maximum(np.maximum(s1, s2), s3)
        mn = np.minimum(np.minimum(s1, s2), s3)
        mid = s1 + s2 + s3 - mx - mn
        v = float((mx - mid).max())
        if v > best:
            best = v
    return best / 2.0


def four_point_delta(
    dm,
    full_limit=FULL_ENUM_LIMIT,
    samples=QUADRUPLE_SAMPLES,
    seed=DEFAULT_SEED,
    return_info=False,
):
    """Four-point hyperbolicity defect of a finite metric space.

    For a quadruple, sort the three pairings d(x,y)+d(z,w),
    d(x,z)+d(y,w), d(x,w)+d(y,z); the defect is half the gap between the
    largest and the middle sum, which equals the worst Gromov-product
    defect over labelings of the quadruple.  Exact enumeration up to
    full_limit points, seeded uniform quadruple sampling beyond that.
    """
    D = check_metric(dm)
    n = D.shape[0]
    if n < 4:
        delta, subsampled, count = 0.0, False, 0
    elif n <= full_limit:
        delta = _delta_exact(D)
        subsampled = False
        count = n * (n - 1) * (n - 2) * (n - 3) // 24
    else:
        delta = _delta_sampled(D, samples, seed)
        subsampled = True
        count = samples
    if return_info:
        return delta, {"subsampled": subsampled, "quadruples": count, "points": n}
    return delta


@dataclass
class TrendClassification:
    kind: str  # "growing" | "bounded"
    slope: float
    delta_max: float
    profile: HyperbolicityProfile = None


def hyperbolicity_trend(
    model,
    gens=None,
    radii=(2, 4, 6, 8),
    budget=_groups.DEFAULT_BUDGET,
    full_limit=FULL_ENUM_LIMIT,
    samples=QUADRUPLE_SAMPLES,
    seed=DEFAULT_SEED,
    slope_threshold=0.15,
):
    """delta measured on word-metric balls of increasing radius.

    Classified as growing when the least-squares slope of delta against
    the radius exceeds the threshold and the last delta exceeds the
    first; otherwise bounded with the observed maximum.
    """
    if gens is None:
        gens = model.default_generators()
    radii = sorted(set(int(r) for r in radii))
    if len(radii) < 2:
        raise DegenerateSample("need at least two radii for a trend")
    r_max = radii[-1]
    dist = _groups.ball(model, gens, 2 * r_max, budget=budget)
    by_radius = sorted(dist.items(), key=lambda kv: kv[1])
    deltas, sizes, counts, flags = [], [], [], []
    for r in radii:
        elems = [g for g, d in by_radius if d <= r]
        n = len(elems)
        inv = [model.inverse(g) for g in elems]
        D = np.empty((n, n))
        for a in range(n):
            ga = inv[a]
            row = D[a]
            for b in range(n):
                row[b] = dist[model.multiply(ga, elems[b])]
        delta, info = four_point_delta(
            D, full_limit=full_limit, samples=samples, seed=seed, return_info=True
        )
        deltas.append(delta)
        sizes.append(n)
        counts.append(info["quadruples"])
        flags.append(info["subsampled"])
    profile = HyperbolicityProfile(
        source=model.name,
        radii=radii,
        deltas=deltas,
        sample_sizes=sizes,
        quadruple_counts=counts,
        subsampled=flags,
    )
    slope, _, _ = _linear_fit(np.asarray(radii, float), np.asarray(deltas))
    growing = slope > slope_threshold and deltas[-1] > deltas[0]
    return TrendClassification(
        kind="growing" if growing else "bounded",
        slope=slope,
        delta_max=max(deltas),
        profile=profile,
    )


def bass_guivarch(ranks):
    """Homogeneous growth degree of a nilpotent group from the ranks n_k of
    the abelianized lower central series quotients: sum of k * n_k."""
    if not ranks or any(int(n) < 0 for n in ranks):
        raise ValueError("ranks must be non-negative integers")
    return sum((k + 1) * int(n) for k, n in enumerate(ranks))


def homogeneous_dimension(strata):
    """Homogeneous dimension of a graded Lie group: sum of j * dim(V_j)."""
    return bass_guivarch(strata)


def coarse_connected(dm, c):
    """Whether the space is c-chain connected: the graph with edges
    d <= c is connected."""
    D = check_metric(dm)
    n = D.shape[0]
    if n == 0:
        return True
    adj = D <= c
    seen = np.zeros(n, dtype=bool)
    seen[0] = True
    frontier = seen.copy()
    while frontier.any():
        reach = adj[frontier].any(axis=0) & ~seen
        seen |= reach
        frontier = reach
    return bool(seen.all())


def truncated_max_metric(n_points):
    """Distance matrix of {0..n_points-1} with d(n, m) = max(n, m) for
    n != m: a metric space that is not coarsely connected at any scale
    once the window grows."""
    idx = np.arange(n_points)
    D = np.maximum.outer(idx, idx).astype(float)
    np.fill_diagonal(D, 0.0)
    return D


def _brick_ids(points, k, R, D):
    """Staircase brick id for each integer point (points: (N, k) array).

    Bricks are cubes of side D; the grid of dimension i is shifted by
    (D / (k + 1)) * sum of the higher brick coordinates, so a ball of
    radius R (Chebyshev) crossing a face in one layer cannot also cross
    one in the adjacent layer when D > 2 R (k + 1) / ... in practice
    D > 2R(k+1)/k suffices for the probe windows used here.
    """
    pts = np.asarray(points)
    n = pts.shape[0]
    ids = np.zeros((n, k), dtype=np.int64)
    shift_unit = D // (k + 1) if k > 1 else 0
    acc = np.zeros(n, dtype=np.int64)
    for i in range(k - 1, -1, -1):
        m = np.floor_divide(pts[:, i] - shift_unit * acc, D)
        ids[:, i] = m
        acc += m
    return ids


def box_multiplicity_probe(k, R, D, window=None):
    """Largest number of shifted bricks of side D met by an R-ball of the
    integer lattice Z^k, scanned over a finite window.

    Requires D > 2R.  The achieved value minus one bounds the asymptotic
    dimension of Z^k from above on the window scale.
    """
    if D <= 2 * R:
        raise ValueError(f"need D > 2R, got D={D}, R={R}")
    if k < 1:
        raise ValueError("k must be >= 1")
    if window is None:
        window = (k + 1) * D
    axis = np.arange(0, window)
    grids = np.meshgrid(*([axis] * k), indexing="ij")
    centers = np.stack([g.ravel() for g in grids], axis=1)
    offs_axis = np.arange(-R, R + 1)
    off_grids = np.meshgrid(*([offs_axis] * k), indexing="ij")
    offsets = np.stack([g.ravel() for g in off_grids], axis=1)
    def keys_of(pts):
        ids = _brick_ids(pts, k, R, D)
        key = ids[:, 0].astype(np.int64)
        for i in range(1, k):
            key = key * 1_000_003 + ids[:, i]
        return key

    # balls are clipped to the window: the probed space is the window itself
    key_center = keys_of(centers)
    columns = []
    for off in offsets:
        pts = centers + off
        valid = ((pts >= 0) & (pts < window)).all(axis=1)
        key = np.where(valid, keys_of(pts), key_center)
        columns.append(key[:, None])
    id_sets = np.concatenate(columns, axis=1)
    id_sets.sort(axis=1)
    distinct = 1 + (np.diff(id_sets, axis=1) != 0).sum(axis=1)
    return int(distinct.max())


@dataclass
class ObstructionReport:
    verdict: str  # "not_quasi_isometric" | "no_embedding_into_hyperbolic" | "inconclusive"
    evidence: dict
    note: str = ""


def qi_obstruction_report(profile_a, profile_b, degree_tol=0.5, rate_tol=0.05):
    """Compare two spaces' invariants and report a QI verdict.

    Each argument is a dict with keys 'name', 'growth'
    (GrowthClassification) and optionally 'trend' (TrendClassification).
    Agreement of every invariant never certifies quasi-isometry; the
    verdict is then inconclusive by construction.
    """
    ga, gb = profile_a["growth"], profile_b["growth"]
    ev = {
        "growth_a": ga.kind,
        "growth_b": gb.kind,
    }
    if ga.kind == "polynomial":
        ev["degree_a"] = ga.degree
    if gb.kind == "polynomial":
        ev["degree_b"] = gb.degree
    ta, tb = profile_a.get("trend"), profile_b.get("trend")
    if ta is not None and tb is not None:
        ev["trend_a"] = ta.kind
        ev["trend_b"] = tb.kind
        # checked before growth: ruling out every quasi-isometric
        # embedding is stronger than ruling out a quasi-isometry
        if ta.kind == "growing" and tb.kind == "bounded":
            return ObstructionReport(
                verdict="no_embedding_into_hyperbolic",
                evidence=ev,
                note=(
                    f"{profile_a['name']} has growing four-point delta "
                    f"(slope {ta.slope:.2f}) but {profile_b['name']} looks "
                    f"hyperbolic (delta <= {tb.delta_max:.2f})"
                ),
            )
    kinds = {ga.kind, gb.kind}
    if "inconclusive" not in kinds:
        if ga.kind != gb.kind:
            return ObstructionReport(
                verdict="not_quasi_isometric",
                evidence=ev,
                note=f"growth types differ: {ga.kind} vs {gb.kind}",
            )
        if ga.kind == "polynomial" and abs(ga.degree - gb.degree) > degree_tol:
            return ObstructionReport(
                verdict="not_quasi_isometric",
                evidence=ev,
                note=f"polynomial degrees differ: {ga.degree:.2f} vs {gb.degree:.2f}",
            )
    return ObstructionReport(
        verdict="inconclusive",
        evidence=ev,
        note="matching invariants do not certify a quasi-isometry",
    )
