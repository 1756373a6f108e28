"""Finitely generated group models with exact arithmetic and word metrics.

Elements are immutable hashable tuples in a canonical form per model, so
dictionary-based ball enumeration never revisits an element.
"""
from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass
from fractions import Fraction

from .errors import AboveCap, ResourceLimit
from .profiles import GrowthProfile

DEFAULT_BUDGET = 5_000_000


@dataclass(frozen=True)
class GeneratingSet:
    """Symmetric generating set that contains the identity."""

    elements: tuple

    def __len__(self):
        return len(self.elements)


def _check_generating_set(model, gens):
    elems = set(gens.elements)
    if model.identity() not in elems:
        raise ValueError("generating set must contain the identity")
    for g in gens.elements:
        if model.inverse(g) not in elems:
            raise ValueError(f"generating set not symmetric: missing inverse of {model.format_element(g)}")


class GroupModel:
    """Base interface: exact product, inverse, identity, serialization."""

    name = "group"

    def identity(self):
        raise NotImplementedError

    def multiply(self, g, h):
        raise NotImplementedError

    def inverse(self, g):
        raise NotImplementedError

    def default_generators(self):
        raise NotImplementedError

    def format_element(self, g):
        raise NotImplementedError

    def parse_element(self, s):
        raise NotImplementedError

    def lower_central_ranks(self):
        """Ranks of the abelianized lower central quotients, or None."""
        return None


class FreeAbelian(GroupModel):
    def __init__(self, k):
        if k < 1:
            raise ValueError("rank must be >= 1")
        self.k = k
        self.name = f"Z^{k}"

    def identity(self):
        return (0,) * self.k

    def multiply(self, g, h):
        return tuple(a + b for a, b in zip(g, h))

    def inverse(self, g):
        return tuple(-a for a in g)

    def default_generators(self):
        gens = [self.identity()]
        for i in range(self.k):
            e = [0] * self.k
            e[i] = 1
            gens.append(tuple(e))
            e[i] = -1
            gens.append(tuple(e))
        return GeneratingSet(tuple(gens))

    def format_element(self, g):
        return "(" + ",".join(str(a) for a in g) + ")"

    def parse_element(self, s):
        parts = s.strip().strip("()").split(",")
        g = tuple(int(p) for p in parts)
        if len(g) != self.k:
            raise ValueError(f"expected {self.k} coordinates, got {len(g)}")
        return g

    def lower_central_ranks(self):
        return (self.k,)


class DiscreteHeisenberg(GroupModel):
    """H_{2n+1} over Z: elements (a, b, c) with a, b in Z^n, c in Z.

    (a, b, c)(a', b', c') = (a + a', b + b', c + c' + a . b')
    """

    def __init__(self, n=1):
        if n < 1:
            raise ValueError("n must be >= 1")
        self.n = n
        self.name = f"H_{2 * n + 1}(Z)"

    def identity(self):
        return ((0,) * self.n, (0,) * self.n, 0)

    def multiply(self, g, h):
        a, b, c = g
        a2, b2, c2 = h
        dot = sum(x * y for x, y in zip(a, b2))
        return (
            tuple(x + y for x, y in zip(a, a2)),
            tuple(x + y for x, y in zip(b, b2)),
            c + c2 + dot,
        )

    def inverse(self, g):
        a, b, c = g
        dot = sum(x * y for x, y in zip(a, b))
        return (tuple(-x for x in a), tuple(-x for x in b), -c + dot)

    def default_generators(self):
        gens = [self.identity()]
        zero = (0,) * self.n
        for i in range(self.n):
            e = [0] * self.n
            e[i] = 1
            gens.append((tuple(e), zero, 0))
            gens.append((zero, tuple(e), 0))
            e[i] = -1
            gens.append((tuple(e), zero, 0))
            gens.append((zero, tuple(e), 0))
        return GeneratingSet(tuple(gens))

    def format_element(self, g):
        a, b, c = g
        return "(%s;%s;%d)" % (",".join(map(str, a)), ",".join(map(str, b)), c)

    def parse_element(self, s):
        body = s.strip().strip("()")
        pa, pb, pc = body.split(";")
        a = tuple(int(x) for x in pa.split(","))
        b = tuple(int(x) for x in pb.split(","))
        if len(a) != self.n or len(b) != self.n:
            raise ValueError(f"expected {self.n} coordinates per stratum in {s!r}")
        return (a, b, int(pc))

    def lower_central_ranks(self):
        return (2 * self.n, 1)


class FreeGroup(GroupModel):
    """Free group of finite rank; elements are reduced words.

    A word is a tuple of nonzero ints: i stands for the i-th letter,
    -i for its inverse (1-based).
    """

    def __init__(self, rank):
        if rank < 1:
            raise ValueError("rank must be >= 1")
        if rank > 26:
            raise ValueError("at most 26 letters supported in text form")
        self.rank = rank
        self.name = f"F_{rank}"

    def identity(self):
        return ()

    def multiply(self, g, h):
        word = list(g)
        for letter in h:
            if word and word[-1] == -letter:
                word.pop()
            else:
                word.append(letter)
        return tuple(word)

    def inverse(self, g):
        return tuple(-x for x in reversed(g))

    def default_generators(self):
        gens = [()]
        for i in range(1, self.rank + 1):
            gens.append((i,))
            gens.append((-i,))
        return GeneratingSet(tuple(gens))

    def format_element(self, g):
        if not g:
            return "e"
        letters = "abcdefghijklmnopqrstuvwxyz"
        return "".join(letters[abs(x) - 1] + ("'" if x < 0 else "") for x in g)

    def parse_element(self, s):
        s = s.strip()
        if s in ("e", ""):
            return ()
        letters = "abcdefghijklmnopqrstuvwxyz"
        word = []
        idx = 0
        while idx < len(s):
            ch = s[idx]
            if ch not in letters[: self.rank]:
                raise ValueError(f"bad letter {ch!r} in {s!r}")
            val = letters.index(ch) + 1
            idx += 1
            if idx < len(s) and s[idx] == "'":
                val = -val
                idx += 1
            word.append(val)
        out = ()
        for letter in word:
            out = self.multiply(out, (letter,))
        return out

    def lower_central_ranks(self):
        return None  # not nilpotent


class SL2Z(GroupModel):
    """SL(2, Z) as integer matrix tuples ((a, b), (c, d)) with det 1."""

    name = "SL2(Z)"

    S = ((0, -1), (1, 0))
    T = ((1, 1), (0, 1))

    def identity(self):
        return ((1, 0), (0, 1))

    def multiply(self, g, h):
        (a, b), (c, d) = g
        (e, f), (p, q) = h
        return ((a * e + b * p, a * f + b * q), (c * e + d * p, c * f + d * q))

    def inverse(self, g):
        (a, b), (c, d) = g
        return ((d, -b), (-c, a))

    def default_generators(self):
        return GeneratingSet(
            (self.identity(), self.S, self.inverse(self.S), self.T, self.inverse(self.T))
        )

    def format_element(self, g):
        (a, b), (c, d) = g
        return f"[[{a},{b}],[{c},{d}]]"

    def parse_element(self, s):
        nums = [int(x) for x in re.findall(r"-?\d+", s)]
        if len(nums) != 4:
            raise ValueError(f"expected 4 integers in {s!r}")
        a, b, c, d = nums
        if a * d - b * c != 1:
            raise ValueError(f"determinant of {s!r} is not 1")
        return ((a, b), (c, d))


class EngelLattice(GroupModel):
    """Lattice of the Engel group in exponential (Malcev) coordinates.

    The Engel Lie algebra has basis X1..X4 with [X1, X2] = X3,
    [X1, X3] = X4 and all other basis brackets zero, so strata have
    dimensions (2, 1, 1).  Group elements are exp-coordinates
    (u1, u2, u3, u4) with exact rational entries, multiplied with the
    degree-3 Baker-Campbell-Hausdorff formula, which is exact here
    because the algebra is nilpotent of class 3.
    """

    name = "Engel(Z)"

    _HALF = Fraction(1, 2)
    _TWELFTH = Fraction(1, 12)

    def identity(self):
        return (Fraction(0), Fraction(0), Fraction(0), Fraction(0))

    def multiply(self, g, h):
        u1, u2, u3, u4 = g
        v1, v2, v3, v4 = h
        w12 = u1 * v2 - u2 * v1  # X3 part of [u, v]
        w13 = u1 * v3 - u3 * v1  # X4 part of [u, v]
        p1 = u1 + v1
        p2 = u2 + v2
        p3 = u3 + v3 + self._HALF * w12
        p4 = u4 + v4 + self._HALF * w13 + self._TWELFTH * (u1 - v1) * w12
        return (p1, p2, p3, p4)

    def inverse(self, g):
        return tuple(-x for x in g)

    def default_generators(self):
        e = self.identity()
        one = Fraction(1)
        x1 = (one, Fraction(0), Fraction(0), Fraction(0))
        x2 = (Fraction(0), one, Fraction(0), Fraction(0))
        return GeneratingSet((e, x1, self.inverse(x1), x2, self.inverse(x2)))

    def format_element(self, g):
        return "(" + ",".join(str(x) for x in g) + ")"

    def parse_element(self, s):
        parts = s.strip().strip("()").split(",")
        if len(parts) != 4:
            raise ValueError(f"expected 4 coordinates in {s!r}")
        return tuple(Fraction(p) for p in parts)

    def lower_central_ranks(self):
        return (2, 1, 1)


def ball(model, gens, radius, budget=DEFAULT_BUDGET):
    """All elements of word length <= radius, as {element: word_length}."""
    _check_generating_set(model, gens)
    e = model.identity()
    dist = {e: 0}
    frontier = [e]
    nontrivial = [g for g in gens.elements if g != e]
    for r in range(1, radius + 1):
        new = []
        for g in frontier:
            for s in nontrivial:
                h = model.multiply(g, s)
                if h not in dist:
                    dist[h] = r
                    new.append(h)
                    if len(dist) > budget:
                        raise ResourceLimit(
                            f"ball enumeration exceeded budget {budget} at radius {r}",
                            partial=dist,
                        )
        if not new:
            break
        frontier = new
    return dist


def word_distance(model, gens, g, h, cap):
    """Word length of g^{-1} h; raises AboveCap beyond the cap."""
    sigma = model.multiply(model.inverse(g), h)
    _check_generating_set(model, gens)
    if sigma == model.identity():
        return 0
    e = model.identity()
    seen = {e}
    frontier = [e]
    nontrivial = [x for x in gens.elements if x != e]
    for r in range(1, cap + 1):
        new = []
        for x in frontier:
            for s in nontrivial:
                y = model.multiply(x, s)
                if y == sigma:
                    return r
                if y not in seen:
                    seen.add(y)
                    new.append(y)
        if not new:
            break
        frontier = new
    raise AboveCap(cap)


def growth_function(model, gens, r_max, budget=DEFAULT_BUDGET):
    """GrowthProfile beta(r) = |ball(r)| for r = 0..r_max."""
    dist = ball(model, gens, r_max, budget=budget)
    sizes = [0] * (r_max + 1)
    for d in dist.values():
        sizes[d] += 1
    total = 0
    cumulative = []
    for s in sizes:
        total += s
        cumulative.append(total)
    return GrowthProfile(source=model.name, radii=list(range(r_max + 1)), sizes=cumulative)


def distance_matrix(model, gens, elements, cap, budget=DEFAULT_BUDGET):
    """Pairwise word distances; entries above the cap come back as None.

    Returns (matrix, above_cap_flag).  The matrix is a list of lists so
    that None entries stay representable.
    """
    dist = ball(model, gens, cap, budget=budget)
    n = len(elements)
    inverses = [model.inverse(g) for g in elements]
    out = [[0] * n for _ in range(n)]
    above = False
    for i in range(n):
        for j in range(n):
            d = dist.get(model.multiply(inverses[i], elements[j]))
            if d is None:
                above = True
            out[i][j] = d
    return out, above
