"""Coverings restricted to finite windows: nerve graphs and the chain metric.

All intersection tests are exact.  Euclidean covering kinds take points
with rational coordinates (ints or fractions.Fraction) and decide set
membership and pairwise intersection by integer arithmetic, so boundary
contact (closed sets touching in a sphere or a face) is detected reliably.

The chain distance d_Q(x, y) is the least number of covering sets in a
chain Q_1, ..., Q_k with x in Q_1, y in Q_k and consecutive sets
intersecting; d_Q(x, x) = 0.
"""
from __future__ import annotations

import csv
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import groups as _groups
from .errors import (
    Disconnected,
    UnsupportedCovering,
    UnsupportedWindow,
    WindowOverflow,
)
from .profiles import GrowthProfile


def _frac(x):
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    raise TypeError(f"point coordinates must be int or Fraction, got {type(x).__name__}")


def as_point(coords):
    return tuple(_frac(c) for c in coords)


class CoveringSpec:
    """Base interface for covering families."""

    kind = "covering"

    def window_indices(self, window):
        """All covering indices in the finite window (window: int size)."""
        raise NotImplementedError

    def intersects(self, i, j):
        raise NotImplementedError

    def star_candidates(self, i):
        """Indices of the full covering that meet Q_i (including i)."""
        raise NotImplementedError

    def contains(self, i, point):
        raise NotImplementedError

    def candidate_containers(self, point):
        """Small superset of the indices containing the point, or None to
        fall back to scanning the window."""
        return None

    def format_index(self, i):
        return str(i)

    def parse_index(self, s):
        raise NotImplementedError


class UniformGrid(CoveringSpec):
    """Unit cubes Q_n = n + [0, 1]^k over integer offsets n in Z^k."""

    def __init__(self, k):
        if k < 1:
            raise ValueError("dimension must be >= 1")
        self.k = k
        self.kind = f"uniform_grid(k={k})"

    def window_indices(self, window):
        if window < 0:
            raise UnsupportedWindow(f"window radius {window} < 0")
        rng = range(-window, window + 1)
        idx = [()]
        for _ in range(self.k):
            idx = [t + (v,) for t in idx for v in rng]
        return idx

    def intersects(self, i, j):
        return all(abs(a - b) <= 1 for a, b in zip(i, j))

    def star_candidates(self, i):
        out = [()]
        for c in i:
            out = [t + (c + d,) for t in out for d in (-1, 0, 1)]
        return out

    def contains(self, i, point):
        return all(n <= x <= n + 1 for n, x in zip(i, point))

    def candidate_containers(self, point):
        import math as _math

        out = [()]
        for x in point:
            lo, hi = _math.ceil(x) - 1, _math.floor(x)
            out = [t + (v,) for t in out for v in range(lo, hi + 1)]
        return out

    def interior_in(self, window, i):
        return all(abs(c) <= window - 1 for c in i)

    def format_index(self, i):
        return ",".join(str(c) for c in i)

    def parse_index(self, s):
        i = tuple(int(p) for p in s.split(","))
        if len(i) != self.k:
            raise ValueError(f"expected {self.k} components in index {s!r}")
        return i


class DyadicAnnuli(CoveringSpec):
    """Dyadic annuli of R^n: D_0 = {|x| <= 2^(1/s)} and for m >= 1
    D_m = {2^((m-1)/s) <= |x| <= 2^((m+1)/s)} with |.| the Euclidean norm.

    subdivision s = 1 gives the plain dyadic covering with boundaries at
    powers of 2; s > 1 refines the radial scale (used when matching
    coverings across the power map between R^n and the half line).
    Two annuli intersect exactly when their indices differ by at most 2;
    indices 2 apart touch in the shared boundary sphere.
    """

    def __init__(self, n, subdivision=1):
        if n < 1:
            raise ValueError("ambient dimension must be >= 1")
        if subdivision < 1:
            raise ValueError("subdivision must be >= 1")
        self.n = n
        self.subdivision = subdivision
        self.kind = f"dyadic_annuli(n={n})" if subdivision == 1 else (
            f"dyadic_annuli(n={n},subdivision={subdivision})"
        )

    def window_indices(self, window):
        if window < 0:
            raise UnsupportedWindow(f"window m_max {window} < 0")
        return list(range(window + 1))

    def intersects(self, i, j):
        return abs(i - j) <= 2

    def star_candidates(self, i):
        return [m for m in range(i - 2, i + 3) if m >= 0]

    def _norm_sq_power(self, point):
        # |x|^(2s) as an exact rational, for comparison against powers of 4
        q = sum(c * c for c in point)
        return q**self.subdivision

    def contains(self, i, point):
        r = self._norm_sq_power(point)
        upper = Fraction(4) ** (i + 1)
        if i == 0:
            return r <= upper
        lower = Fraction(4) ** (i - 1)
        return lower <= r <= upper

    def interior_in(self, window, i):
        return i + 2 <= window

    def parse_index(self, s):
        return int(s)


class GroupTranslates(CoveringSpec):
    """Covering of a group by translates g . B(e, r) of a word-metric ball."""

    def __init__(self, model, gens=None, r=1):
        if r < 1:
            raise ValueError("ball radius must be >= 1")
        self.model = model
        self.gens = gens if gens is not None else model.default_generators()
        self.r = r
        self.kind = f"group_translates({model.name},r={r})"
        self._dist_cache = {}
        self._dist_cache_radius = -1

    def _dist_from_identity(self, radius):
        if radius > self._dist_cache_radius:
            self._dist_cache = _groups.ball(self.model, self.gens, radius)
            self._dist_cache_radius = radius
        return self._dist_cache

    def window_indices(self, window):
        if window < 0:
            raise UnsupportedWindow(f"window radius {window} < 0")
        dist = dict(self._dist_from_identity(max(window, 2 * self.r)))
        return [g for g, d in dist.items() if d <= window]

    def _dist(self, g, h):
        dist = self._dist_from_identity(2 * self.r)
        return dist.get(self.model.multiply(self.model.inverse(g), h))

    def intersects(self, i, j):
        d = self._dist(i, j)
        return d is not None and d <= 2 * self.r

    def star_candidates(self, i):
        dist = self._dist_from_identity(2 * self.r)
        return [self.model.multiply(i, s) for s, d in dist.items() if d <= 2 * self.r]

    def contains(self, i, point):
        d = self._dist(i, point)
        return d is not None and d <= self.r

    def interior_in(self, window, i):
        dist = self._dist_from_identity(max(window, 2 * self.r))
        return dist[i] <= window - 2 * self.r

    def format_index(self, i):
        return self.model.format_element(i)

    def parse_index(self, s):
        return self.model.parse_element(s)


class HeisenbergCubes(CoveringSpec):
    """Left translates P_(n,m,l) = (n,m,l) * [0,1]^3 of the unit cube under
    the Heisenberg product (n,m,l)(n',m',l') = (n+n', m+m', l+l'+n m').

    P_(n,m,l) is the sheared cube {x1 in [n, n+1], x2 in [m, m+1],
    x3 - n (x2 - m) in [l, l+1]}.
    """

    kind = "heisenberg_cubes"

    def window_indices(self, window):
        if window < 0:
            raise UnsupportedWindow(f"window radius {window} < 0")
        rng = range(-window, window + 1)
        return [(n, m, l) for n in rng for m in rng for l in rng]

    @staticmethod
    def _shear_gap(i, j):
        """Range (gmin, gmax) of the lower-face gap over the shared x2 span,
        or None when the x1/x2 shadows are disjoint."""
        n, m, l = i
        n2, m2, l2 = j
        if abs(n - n2) > 1 or abs(m - m2) > 1:
            return None
        lo, hi = max(m, m2), min(m, m2) + 1
        c = l - l2 - n * m + n2 * m2
        a, b = c + (n - n2) * lo, c + (n - n2) * hi
        return (min(a, b), max(a, b))

    def intersects(self, i, j):
        gap = self._shear_gap(i, j)
        return gap is not None and gap[0] <= 1 and gap[1] >= -1

    def star_candidates(self, i):
        n, m, l = i
        out = []
        for dn in (-1, 0, 1):
            for dm in (-1, 0, 1):
                n2, m2 = n + dn, m + dm
                span = 2 + abs(n - n2) * (max(abs(m), abs(m2)) + 1)
                base = l - n * m + n2 * m2
                for l2 in range(base - span, base + span + 1):
                    if self.intersects(i, (n2, m2, l2)):
                        out.append((n2, m2, l2))
        return out

    def contains(self, i, point):
        n, m, l = i
        x1, x2, x3 = point
        if not (n <= x1 <= n + 1 and m <= x2 <= m + 1):
            return False
        t = x3 - n * (x2 - m)
        return l <= t <= l + 1

    def candidate_containers(self, point):
        import math as _math

        x1, x2, x3 = point
        out = []
        for n in range(_math.ceil(x1) - 1, _math.floor(x1) + 1):
            for m in range(_math.ceil(x2) - 1, _math.floor(x2) + 1):
                t = x3 - n * (x2 - m)
                for l in range(_math.ceil(t) - 1, _math.floor(t) + 1):
                    out.append((n, m, l))
        return out

    def interior_in(self, window, i):
        return all(
            max(abs(c) for c in j) <= window for j in self.star_candidates(i)
        )

    def translate_point(self, gamma, point):
        """Left action of gamma = (n, m, l) on a point of R^3."""
        n, m, l = gamma
        x1, x2, x3 = point
        return (x1 + n, x2 + m, x3 + l + n * x2)

    def translate_index(self, gamma, i):
        n, m, l = gamma
        n2, m2, l2 = i
        return (n + n2, m + m2, l + l2 + n * m2)

    def format_index(self, i):
        return ",".join(str(c) for c in i)

    def parse_index(self, s):
        i = tuple(int(p) for p in s.split(","))
        if len(i) != 3:
            raise ValueError(f"expected 3 components in index {s!r}")
        return i


class ExplicitFinite(CoveringSpec):
    """Covering given extensionally: index -> finite set of points."""

    kind = "explicit_finite"

    def __init__(self, sets):
        if not sets:
            raise UnsupportedWindow("empty covering")
        self.sets = {i: frozenset(pts) for i, pts in sets.items()}

    def window_indices(self, window=None):
        return sorted(self.sets)

    def intersects(self, i, j):
        return bool(self.sets[i] & self.sets[j])

    def star_candidates(self, i):
        return [j for j in self.sets if self.intersects(i, j)]

    def contains(self, i, point):
        return point in self.sets[i]

    def interior_in(self, window, i):
        return True

    def parse_index(self, s):
        return s


@dataclass
class NerveGraph:
    """Nerve of a covering on a finite window.

    adj[i] includes i itself (every set meets itself); interior holds the
    indices whose full star is known to lie inside the window, so star
    sizes and the admissibility constant are only trusted there.
    """

    spec: CoveringSpec
    window: object
    indices: list
    adj: dict
    interior: frozenset

    def star(self, i, k=1):
        """k-fold iterated star of index i, as a frozenset of indices."""
        if i not in self.adj:
            raise UnsupportedWindow(f"index {i} not in window")
        current = {i}
        for _ in range(k):
            grown = set()
            for j in current:
                if j not in self.interior:
                    raise WindowOverflow(
                        f"star of {self.spec.format_index(i)} reached non-interior "
                        f"index {self.spec.format_index(j)}"
                    )
                grown.update(self.adj[j])
            current = grown
        return frozenset(current)

    def star_in_window(self, i, k=1):
        """Iterated star clipped to the window; never raises WindowOverflow."""
        current = {i}
        for _ in range(k):
            grown = set()
            for j in current:
                grown.update(self.adj[j])
            current = grown
        return frozenset(current)

    def admissibility_constant(self):
        """max |i*| over window-interior indices (a lower bound for the
        full covering's constant)."""
        if not self.interior:
            raise UnsupportedWindow("window has no interior indices")
        return max(len(self.adj[i]) for i in self.interior)

    def is_connected(self):
        if not self.indices:
            return True
        seen = {self.indices[0]}
        queue = deque(seen)
        while queue:
            i = queue.popleft()
            for j in self.adj[i]:
                if j not in seen:
                    seen.add(j)
                    queue.append(j)
        return len(seen) == len(self.indices)

    def index_hops(self, sources, targets):
        """Least edge count in the nerve between two index sets, or None."""
        sources = set(sources)
        targets = set(targets)
        if sources & targets:
            return 0
        seen = set(sources)
        queue = deque((i, 0) for i in sources)
        while queue:
            i, d = queue.popleft()
            for j in self.adj[i]:
                if j in targets:
                    return d + 1
                if j not in seen:
                    seen.add(j)
                    queue.append((j, d + 1))
        return None

    def write_edge_csv(self, path):
        """Edge list CSV with header index_a,index_b, one row per unordered
        edge (self-loops omitted)."""
        fmt = self.spec.format_index
        pos = {i: p for p, i in enumerate(self.indices)}
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["index_a", "index_b"])
            for i in self.indices:
                for j in self.adj[i]:
                    if pos[j] > pos[i]:
                        w.writerow([fmt(i), fmt(j)])


def build_nerve(spec, window=None):
    indices = spec.window_indices(window)
    if not indices:
        raise UnsupportedWindow(f"window {window!r} produced no indices")
    index_set = set(indices)
    adj = {}
    if isinstance(spec, ExplicitFinite):
        for i in indices:
            adj[i] = tuple(j for j in indices if spec.intersects(i, j))
    else:
        for i in indices:
            adj[i] = tuple(j for j in spec.star_candidates(i) if j in index_set)
    interior = frozenset(i for i in indices if spec.interior_in(window, i))
    return NerveGraph(spec=spec, window=window, indices=indices, adj=adj, interior=interior)


def containing_indices(nerve, point):
    """Window indices whose set contains the point."""
    spec = nerve.spec
    candidates = spec.candidate_containers(point)
    if candidates is None:
        return [i for i in nerve.indices if spec.contains(i, point)]
    return [i for i in candidates if i in nerve.adj and spec.contains(i, point)]


def chain_distance(nerve, x, y):
    """Chain metric d_Q(x, y) inside the window.

    Raises Disconnected when no in-window chain joins the points and
    UnsupportedWindow when a point lies outside every window set.
    """
    if x == y:
        return 0
    sx = containing_indices(nerve, x)
    sy = containing_indices(nerve, y)
    if not sx or not sy:
        raise UnsupportedWindow("point lies outside the covering window")
    hops = nerve.index_hops(sx, sy)
    if hops is None:
        raise Disconnected("no chain joins the points inside the window")
    return hops + 1


def is_concatenation(nerve, chain, x, y):
    """Whether the index sequence witnesses a chain from x to y."""
    if not chain:
        return False
    spec = nerve.spec
    if any(i not in nerve.adj for i in chain):
        return False
    if not spec.contains(chain[0], x) or not spec.contains(chain[-1], y):
        return False
    return all(spec.intersects(a, b) for a, b in zip(chain, chain[1:]))


def net_distance_matrix(nerve, points):
    """All-pairs chain distances for a list of points, as a numpy array.

    Uses one BFS per nerve vertex (scipy csgraph) and then minimizes over
    the containing-index sets; entries with no connecting chain come back
    as inf.  Distinct points sharing a covering set get distance 1 and
    identical points distance 0, matching chain_distance pairwise.
    """
    from scipy.sparse import csr_matrix
    from scipy.sparse.csgraph import shortest_path

    idx_pos = {i: p for p, i in enumerate(nerve.indices)}
    nv = len(nerve.indices)
    rows, cols = [], []
    for i in nerve.indices:
        for j in nerve.adj[i]:
            if i != j:
                rows.append(idx_pos[i])
                cols.append(idx_pos[j])
    adj = csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(nv, nv))
    hops = shortest_path(adj, method="D", unweighted=True, directed=False)

    memberships = []
    for p in points:
        hits = [idx_pos[i] for i in containing_indices(nerve, p)]
        if not hits:
            raise UnsupportedWindow(f"point {p!r} lies outside the covering window")
        memberships.append(hits)

    npts = len(points)
    point_to_vertex = np.full((npts, nv), np.inf)
    for a, hits in enumerate(memberships):
        point_to_vertex[a] = hops[hits].min(axis=0)

    out = np.full((npts, npts), np.inf)
    for b, hits in enumerate(memberships):
        out[:, b] = point_to_vertex[:, hits].min(axis=1) + 1
    for a, p in enumerate(points):
        for b, q in enumerate(points):
            if p == q:
                out[a, b] = 0.0
    return out


def nerve_growth_profile(nerve, base_index, r_max):
    """Ball sizes of the nerve graph metric around a base index."""
    if base_index not in nerve.adj:
        raise UnsupportedWindow(f"base index {base_index!r} not in window")
    dist = {base_index: 0}
    queue = deque([base_index])
    while queue:
        i = queue.popleft()
        if dist[i] >= r_max:
            continue
        for j in nerve.adj[i]:
            if j not in dist:
                dist[j] = dist[i] + 1
                queue.append(j)
    sizes = [0] * (r_max + 1)
    for d in dist.values():
        sizes[d] += 1
    total, cumulative = 0, []
    for s in sizes:
        total += s
        cumulative.append(total)
    return GrowthProfile(
        source=f"nerve[{nerve.spec.kind}]", radii=list(range(r_max + 1)), sizes=cumulative
    )
