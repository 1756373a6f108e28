"""Bounded admissible partitions of unity and decomposition-space norms.

Functions live on uniform sample grids (SampledFunction).  A Bapu holds
one bump per covering index; the decomposition norm measures each local
piece f . phi_i in L^p or FL^p and aggregates the results in a weighted
little l^q over the index set.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import BSpline

from .coverings import DyadicAnnuli, UniformGrid
from .errors import (
    EmptySupport,
    GridTooCoarse,
    IndexMismatch,
    TruncationDominates,
    UnsupportedCovering,
)

SUM_TOLERANCE = 1e-12


@dataclass
class SampledFunction:
    """Complex samples on a uniform node grid over a box.

    Nodes along axis d are lo[d] + j * h for j = 0..shape[d]-1; the
    rectangle rule with weight h^dim is the default quadrature.  When a
    generating callable is attached the grid can be refined for
    convergence checks.
    """

    lo: tuple
    h: float
    values: np.ndarray
    source: object = None
    tail_bound: object = None
    name: str = ""

    @property
    def dim(self):
        return self.values.ndim

    @property
    def shape(self):
        return self.values.shape

    def axis(self, d):
        return self.lo[d] + self.h * np.arange(self.shape[d])

    def mesh(self):
        """Sparse meshgrid of node coordinates, broadcastable to values."""
        return np.meshgrid(*[self.axis(d) for d in range(self.dim)], indexing="ij", sparse=True)

    @classmethod
    def from_callable(cls, fn, lo, hi, n, dim=1, name="", tail_bound=None):
        lo = tuple(float(x) for x in (lo if hasattr(lo, "__len__") else [lo] * dim))
        hi = tuple(float(x) for x in (hi if hasattr(hi, "__len__") else [hi] * dim))
        if len(lo) != dim or len(hi) != dim:
            raise ValueError("lo/hi must match dim")
        spans = [b - a for a, b in zip(lo, hi)]
        if any(s <= 0 for s in spans):
            raise ValueError("box must have positive extent")
        h = spans[0] / n
        shape = []
        for s in spans:
            m = round(s / h)
            if abs(m * h - s) > 1e-9 * s:
                raise ValueError("box extents must be commensurate with the grid step")
            shape.append(m)
        axes = np.meshgrid(
            *[a + h * np.arange(m) for a, m in zip(lo, shape)], indexing="ij", sparse=True
        )
        values = np.asarray(fn(*axes), dtype=complex) + np.zeros(tuple(shape), dtype=complex)
        return cls(lo=lo, h=h, values=values, source=fn, tail_bound=tail_bound, name=name)

    def refined(self):
        if self.source is None:
            raise GridTooCoarse(0.0, 0.0, 0.0) from None
        hi = tuple(a + self.h * m for a, m in zip(self.lo, self.shape))
        return SampledFunction.from_callable(
            self.source, self.lo, hi, 2 * self.shape[0], dim=self.dim,
            name=self.name, tail_bound=self.tail_bound,
        )

    def quadrature_norm(self, p):
        """Rectangle-rule L^p norm of the samples."""
        a = np.abs(self.values)
        if math.isinf(p):
            return float(a.max())
        return float((a**p).sum() ** (1.0 / p) * self.h ** (self.dim / p))

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([f"x{d}" for d in range(self.dim)] + ["re", "im"])
            mesh = np.meshgrid(*[self.axis(d) for d in range(self.dim)], indexing="ij")
            flat = [m.ravel() for m in mesh]
            vals = self.values.ravel()
            for row in zip(*flat, vals):
                *coords, v = row
                w.writerow(
                    [repr(float(c)) for c in coords]
                    + [repr(float(v.real)), repr(float(v.imag))]
                )

    @classmethod
    def read_csv(cls, path, name=""):
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            dim = len(header) - 2
            if dim < 1 or header[-2:] != ["re", "im"]:
                raise ValueError(f"unexpected function CSV header: {header}")
            coords = [[] for _ in range(dim)]
            vals = []
            for row in reader:
                for d in range(dim):
                    coords[d].append(float(row[d]))
                vals.append(complex(float(row[dim]), float(row[dim + 1])))
        axes = [np.unique(np.asarray(c)) for c in coords]
        shape = tuple(len(a) for a in axes)
        if np.prod(shape) != len(vals):
            raise ValueError("CSV samples do not form a full grid")
        steps = [np.diff(a) for a in axes]
        h = float(steps[0][0])
        for st in steps:
            if st.size and (np.abs(st - h) > 1e-9 * abs(h)).any():
                raise ValueError("CSV grid is not uniform with a common step")
        order = np.lexsort(tuple(reversed([np.asarray(c) for c in coords])))
        values = np.asarray(vals)[order].reshape(shape)
        return cls(lo=tuple(float(a[0]) for a in axes), h=h, values=values, name=name)


def gaussian(dim=1, halfwidth=8.0, n=256):
    """exp(-pi |x|^2) sampled on [-halfwidth, halfwidth)^dim."""

    def fn(*axes):
        s = sum(np.asarray(a) ** 2 for a in axes)
        return np.exp(-np.pi * s)

    return SampledFunction.from_callable(
        fn, -halfwidth, halfwidth, n, dim=dim, name="gaussian",
        tail_bound=lambda: math.erfc(math.sqrt(math.pi) * halfwidth) ** dim,
    )


def constant_one(lo, hi, n, dim=1):
    return SampledFunction.from_callable(
        lambda *axes: np.ones(np.broadcast_shapes(*[np.shape(a) for a in axes])),
        lo, hi, n, dim=dim, name="one",
    )


def _smoothstep(order):
    """Polynomial smoothstep of the given order: 0 below 0, 1 above 1,
    C^order at the joints.  Order 1 is 3t^2 - 2t^3."""
    n = order
    coeffs = [
        math.comb(n + k, k) * math.comb(2 * n + 1, n - k) * (-1) ** k for k in range(n + 1)
    ]

    def step(t):
        t = np.clip(t, 0.0, 1.0)
        acc = np.zeros_like(t)
        for k in reversed(range(n + 1)):
            acc = acc * t + coeffs[k]
        return acc * t ** (n + 1)

    return step


@dataclass
class Bapu:
    """Bounded admissible partition of unity subordinate to a covering.

    phi_i >= 0, sum_i phi_i = 1 on the covered window, and each phi_i is
    supported in the union of the cells listed by support_cells(i),
    always contained in the one-star neighborhood of cell i.
    """

    spec: object
    indices: list
    order: int
    _axis_bump: object = field(default=None, repr=False)
    _radial: object = field(default=None, repr=False)

    def evaluate(self, i, mesh):
        """Sample phi_i on a sparse coordinate mesh."""
        if self._radial is not None:
            r = np.sqrt(sum(np.asarray(a, float) ** 2 for a in mesh))
            return self._radial(i, r)
        out = 1.0
        for d, a in enumerate(mesh):
            out = out * self._axis_bump(np.asarray(a, float) - i[d])
        return out

    def support_cells(self, i):
        """Covering indices whose union contains supp phi_i."""
        if self._radial is not None:
            return frozenset([i])
        width = self.order  # supp of the axis bump is [0, order + 1]
        out = [()]
        for c in i:
            out = [t + (c + d,) for t in out for d in range(width + 1)]
        return frozenset(out)

    def check_partition(self, mesh, tol=SUM_TOLERANCE):
        total = 0.0
        for i in self.indices:
            phi = self.evaluate(i, mesh)
            if np.any(phi < -tol):
                raise ValueError(f"phi_{i} takes negative values")
            total = total + phi
        return float(np.max(np.abs(total - 1.0)))


def build_bapu(spec, window=None, indices=None, order=1):
    """Partition of unity for a covering window.

    UniformGrid: tensor products of the cardinal B-spline of the given
    order; the bump of cell n is supported on n + [0, order + 1]^k, so
    integer translates sum to one exactly.

    DyadicAnnuli: telescoped radial smoothstep ramps; phi_m lives
    strictly inside annulus m and the family sums to one up to the outer
    ramp of the window.
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    if isinstance(spec, UniformGrid):
        if indices is None:
            indices = spec.window_indices(window)
        indices = [i if isinstance(i, tuple) else (int(i),) for i in indices]
        if any(len(i) != spec.k for i in indices):
            raise IndexMismatch("index arity does not match the grid dimension")
        knots = np.arange(order + 2, dtype=float)
        basis = BSpline.basis_element(knots, extrapolate=False)

        def axis_bump(t):
            return np.nan_to_num(basis(t), nan=0.0)

        return Bapu(spec=spec, indices=list(indices), order=order, _axis_bump=axis_bump)
    if isinstance(spec, DyadicAnnuli):
        if indices is None:
            indices = spec.window_indices(window)
        step = _smoothstep(order)
        s = spec.subdivision

        def ramp(m, r):
            # 0 below 2^((m-1)/s), 1 above 2^(m/s)
            if m <= 0:
                return np.ones_like(r)
            a = 2.0 ** ((m - 1) / s)
            b = 2.0 ** (m / s)
            return step((r - a) / (b - a))

        def radial(m, r):
            return ramp(m, r) - ramp(m + 1, r)

        return Bapu(spec=spec, indices=list(indices), order=order, _radial=radial)
    raise UnsupportedCovering(f"no partition construction for {spec.kind}")


def local_norm(f, bapu, i, p, mode="Lp"):
    """Norm of the local piece f . phi_i.

    mode "Lp": rectangle-rule L^p norm on f's grid.
    mode "FLp": L^p norm of the inverse Fourier transform of f . phi_i,
    sampled on the dual grid of f's box.
    """
    piece = f.values * bapu.evaluate(i, f.mesh())
    d = f.dim
    if mode == "Lp":
        a = np.abs(piece)
        if math.isinf(p):
            return float(a.max())
        return float((a**p).sum() ** (1.0 / p) * f.h ** (d / p))
    if mode == "FLp":
        n_total = piece.size
        spect = np.abs(np.fft.ifftn(piece)) * n_total * f.h**d
        dual_step = 1.0 / (f.h * f.shape[0])
        if math.isinf(p):
            return float(spect.max())
        return float((spect**p).sum() ** (1.0 / p) * dual_step ** (d / p))
    raise ValueError(f"unknown mode {mode!r}")


@dataclass
class NormResult:
    value: float
    locals: dict
    p: float
    q: float
    mode: str
    warnings: list = field(default_factory=list)


def _aggregate(locals_dict, q, weights=None):
    vals = []
    for i, v in locals_dict.items():
        w = 1.0 if weights is None else float(weights(i))
        vals.append(w * v)
    arr = np.asarray(vals, float)
    if math.isinf(q):
        return float(arr.max()) if arr.size else 0.0
    return float((arr**q).sum() ** (1.0 / q))


def decomposition_norm(f, bapu, p, q, mode="Lp", weights=None, refine_tol=None):
    """Weighted l^q aggregation of local L^p (or FL^p) norms.

    weights: optional callable index -> positive weight.
    refine_tol: when set and f carries a generating callable, the value
    is recomputed on a half-step grid; a relative move beyond refine_tol
    raises GridTooCoarse.
    """
    locals_dict = {i: local_norm(f, bapu, i, p, mode) for i in bapu.indices}
    value = _aggregate(locals_dict, q, weights)
    warnings = []
    if refine_tol is not None:
        if f.source is None:
            warnings.append("refinement check skipped: function has no generator")
        else:
            f2 = f.refined()
            locals2 = {i: local_norm(f2, bapu, i, p, mode) for i in bapu.indices}
            value2 = _aggregate(locals2, q, weights)
            scale = max(abs(value2), 1e-300)
            if abs(value2 - value) > refine_tol * scale:
                raise GridTooCoarse(value, value2, refine_tol)
            value = value2
            locals_dict = locals2
    return NormResult(value=value, locals=locals_dict, p=p, q=q, mode=mode, warnings=warnings)


def clustering_map(coeffs, nerve):
    """Gamma_Q: a'_i = sum of a_j over the star of i (within the window).

    The l^q operator norm of this map is at most the admissibility
    constant of the covering.
    """
    unknown = set(coeffs) - set(nerve.adj)
    if unknown:
        raise IndexMismatch(f"coefficients at indices outside the window: {sorted(unknown)[:5]}")
    out = {}
    for i in nerve.indices:
        out[i] = sum(coeffs.get(j, 0) for j in nerve.adj[i])
    return out


def besov_norm(f, s, p, q, window=None, order=1, refine_tol=None):
    """Inhomogeneous Besov-type norm via the dyadic frequency partition:
    l^q over j of 2^(j s) ||inverse transform of (phi_j . Ff)||_p.

    The frequency window defaults to the largest dyadic index resolved by
    f's grid.
    """
    d = f.dim
    n_total = f.values.size
    fhat = np.fft.fftn(f.values) * f.h**d  # |Ff| on the unsorted dual grid
    freqs = [np.fft.fftfreq(m, d=f.h) for m in f.shape]
    mesh = np.meshgrid(*freqs, indexing="ij", sparse=True)
    nyquist = 0.5 / f.h
    if window is None:
        window = max(1, int(math.floor(math.log2(nyquist))))
    spec = DyadicAnnuli(d)
    bapu = build_bapu(spec, window=window, order=order)
    dual_lo = tuple(float(fr.min()) for fr in freqs)
    dual_step = 1.0 / (f.h * f.shape[0])
    locals_dict = {}
    for m in bapu.indices:
        phi = bapu.evaluate(m, mesh)
        block = np.fft.ifftn(fhat * phi) / f.h**d  # back to the spatial grid
        a = np.abs(block)
        if math.isinf(p):
            locals_dict[m] = float(a.max())
        else:
            locals_dict[m] = float((a**p).sum() ** (1.0 / p) * f.h ** (d / p))
    value = _aggregate(locals_dict, q, weights=lambda m: 2.0 ** (m * s))
    result = NormResult(value=value, locals=locals_dict, p=p, q=q, mode="besov")
    if 2.0 ** (window + 1) > nyquist:
        result.warnings.append(
            f"outer annulus {window} reaches beyond the Nyquist frequency {nyquist:g}"
        )
    if refine_tol is not None and f.source is not None:
        f2 = f.refined()
        value2 = besov_norm(f2, s, p, q, window=window, order=order).value
        if abs(value2 - value) > refine_tol * max(abs(value2), 1e-300):
            raise GridTooCoarse(value, value2, refine_tol)
    return result


def stft(f, g, x_step):
    """Short-time Fourier transform V_g f on a shift/frequency lattice.

    x_step: stride in grid nodes between window positions (per axis).
    Returns (V, x_lattices, freq_axes): V has one axis per spatial shift
    axis followed by one per frequency axis; |V| approximates
    |integral of f(t) conj(g(t - x)) exp(-2 pi i t . omega) dt|.
    """
    if f.dim != g.dim or f.shape != g.shape or abs(f.h - g.h) > 1e-12:
        raise ValueError("f and g must share one grid")
    d = f.dim
    n = f.shape
    steps = x_step if hasattr(x_step, "__len__") else (x_step,) * d
    shift_counts = [m // st for m, st in zip(n, steps)]
    x_lattices = [
        f.axis(ax)[: shift_counts[ax] * steps[ax] : steps[ax]] - f.lo[ax] - 0.5 * (f.h * n[ax])
        for ax in range(d)
    ]
    gv = g.values
    V = np.empty(tuple(shift_counts) + tuple(n), dtype=float)
    center = [m // 2 for m in n]
    for flat in range(int(np.prod(shift_counts))):
        rem = flat
        pos = []
        for c in reversed(shift_counts):
            pos.append(rem % c)
            rem //= c
        pos = tuple(reversed(pos))
        shift = [p * st - c for p, st, c in zip(pos, steps, center)]
        gs = gv
        for ax, sh in enumerate(shift):
            gs = _shift_zero(gs, sh, ax)
        V[pos] = np.abs(np.fft.fftn(f.values * np.conj(gs))) * f.h**d
    freq_axes = [np.fft.fftfreq(m, d=f.h) for m in n]
    return V, x_lattices, freq_axes


def _shift_zero(arr, k, axis):
    """Shift along an axis, filling with zeros (no wrap-around)."""
    if k == 0:
        return arr
    out = np.zeros_like(arr)
    src = [slice(None)] * arr.ndim
    dst = [slice(None)] * arr.ndim
    if k > 0:
        dst[axis] = slice(k, None)
        src[axis] = slice(None, -k)
    else:
        dst[axis] = slice(None, k)
        src[axis] = slice(-k, None)
    out[tuple(dst)] = arr[tuple(src)]
    return out


def modulation_norm(f, p, q, g=None, x_step=None, refine_tol=None):
    """Mixed-norm modulation space norm M^{p,q}:
    outer L^q over frequency of the inner L^p over translations of |V_g f|.

    The analysis window g defaults to the Gaussian exp(-pi |t|^2) on f's
    grid.  x_step defaults to a stride giving shift spacing about 1/4.
    """
    d = f.dim
    if g is None:
        gauss = lambda *axes: np.exp(-np.pi * sum(np.asarray(a) ** 2 for a in axes))
        hi = tuple(a + f.h * m for a, m in zip(f.lo, f.shape))
        g = SampledFunction.from_callable(gauss, f.lo, hi, f.shape[0], dim=d)
    if x_step is None:
        x_step = max(1, round(0.25 / f.h))
    V, x_lattices, freq_axes = stft(f, g, x_step)
    dx = (f.h * (x_step if not hasattr(x_step, "__len__") else x_step[0])) ** d
    dw = (1.0 / (f.h * f.shape[0])) ** d
    shift_axes = tuple(range(d))
    if math.isinf(p):
        inner = V.max(axis=shift_axes)
    else:
        inner = (V**p).sum(axis=shift_axes) ** (1.0 / p) * dx ** (1.0 / p)
    if math.isinf(q):
        value = float(inner.max())
    else:
        value = float((inner**q).sum() ** (1.0 / q) * dw ** (1.0 / q))
    if refine_tol is not None:
        if f.source is None:
            return value
        f2 = f.refined()
        st = x_step if not hasattr(x_step, "__len__") else x_step[0]
        value2 = modulation_norm(f2, p, q, g=None, x_step=2 * st)
        if abs(value2 - value) > refine_tol * max(abs(value2), 1e-300):
            raise GridTooCoarse(value, value2, refine_tol)
        value = value2
    return value


def sl2_l1_norm(
    fn,
    x_max,
    y_max,
    n_theta=64,
    n_x=400,
    n_y=800,
    tail_bound=None,
    tol=1e-3,
):
    """Integral of |f| against the left Haar measure y^-2 dtheta dx dy on
    the Iwasawa coordinates (theta, x, y) of SL(2, R), truncated to
    theta in [0, 2 pi), x in [-x_max, x_max], y in (0, y_max].

    fn(theta, x, y) must accept broadcast arrays.  Midpoint product rule
    with a mandatory refinement-by-2 check; a declared tail bound larger
    than tol times the value raises TruncationDominates.
    """

    def midpoint(nt, nx, ny):
        ht = 2.0 * math.pi / nt
        hx = 2.0 * x_max / nx
        hy = y_max / ny
        theta = (np.arange(nt) + 0.5) * ht
        x = -x_max + (np.arange(nx) + 0.5) * hx
        y = (np.arange(ny) + 0.5) * hy
        tt, xx, yy = np.meshgrid(theta, x, y, indexing="ij", sparse=True)
        vals = np.abs(fn(tt, xx, yy)) / yy**2
        return float(vals.sum() * ht * hx * hy)

    coarse = midpoint(n_theta, n_x, n_y)
    fine = midpoint(2 * n_theta, 2 * n_x, 2 * n_y)
    if abs(fine - coarse) > tol * max(abs(fine), 1e-300):
        raise GridTooCoarse(coarse, fine, tol)
    if tail_bound is not None:
        tail = float(tail_bound(x_max, y_max))
        if tail > tol * max(abs(fine), 1e-300):
            raise TruncationDominates(
                f"declared tail bound {tail:.3g} exceeds tolerance for value {fine:.6g}"
            )
    return fine


def iwasawa_example():
    """The model integrand f(theta, x, y) = y^3 exp(-y - x^2), whose Haar
    integral over the full group is 2 pi^(3/2)."""

    def fn(theta, x, y):
        return y**3 * np.exp(-y - x * x) * np.ones_like(theta)

    def tail(x_max, y_max):
        # int_{y > Y} y e^-y dy + 2 pi int_{|x| > X} e^-x^2 dx envelope
        y_tail = (y_max + 1.0) * math.exp(-y_max) * 2.0 * math.pi * math.sqrt(math.pi)
        x_tail = 2.0 * math.pi * math.sqrt(math.pi) * math.erfc(x_max)
        return y_tail + x_tail

    return fn, tail
