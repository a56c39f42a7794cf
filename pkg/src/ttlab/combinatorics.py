"""Catalan-family primitives and exact arithmetic.

Non-crossing pairings and outerplanar triangulations are the two tree-like
families everything else is assembled from.  Both are enumerated in a fixed
deterministic order so test fixtures are stable across runs.  Polynomial and
power-series arithmetic is exact (integers and fractions throughout).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator


def catalan(k: int) -> int:
    """Exact Catalan number Cat(k) = binom(2k, k) / (k + 1)."""
    if k < 0:
        raise ValueError("catalan requires k >= 0")
    return math.comb(2 * k, k) // (k + 1)


class DisjointSets:
    """Union-find over m elements (single-owner scratch structure)."""

    def __init__(self, m: int):
        self.parent = list(range(m))
        self.rank = [0] * m
        self.components = m

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, x: int, y: int) -> bool:
        """Merge the classes of x and y; returns True if they were distinct."""
        rx, ry = self.find(x), self.find(y)
        if rx == ry:
            return False
        if self.rank[rx] < self.rank[ry]:
            rx, ry = ry, rx
        self.parent[ry] = rx
        if self.rank[rx] == self.rank[ry]:
            self.rank[rx] += 1
        self.components -= 1
        return True

    def canonical_labels(self) -> list[int]:
        """Class id per element, numbered by first appearance."""
        labels = {}
        out = []
        for x in range(len(self.parent)):
            r = self.find(x)
            if r not in labels:
                labels[r] = len(labels)
            out.append(labels[r])
        return out


# ---------------------------------------------------------------------------
# Non-crossing pairings
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NonCrossingPairing:
    """Fixed-point-free involution of {0..2n-1} with no crossing arcs.

    partner[i] is the position paired with i.  Arcs always join an odd and
    an even position (any arc encloses an even number of positions).
    """

    n: int
    partner: tuple[int, ...]

    def __post_init__(self):
        m = 2 * self.n
        if self.n < 1 or len(self.partner) != m:
            raise ValueError("partner must have length 2n, n >= 1")
        for i, j in enumerate(self.partner):
            if not 0 <= j < m or j == i or self.partner[j] != i:
                raise ValueError("partner is not a fixed-point-free involution")
            if (i + j) % 2 == 0:
                raise ValueError("arcs must join positions of opposite parity")
        if self._has_crossing():
            raise ValueError("pairing has crossing arcs")

    def _has_crossing(self) -> bool:
        # Stack scan: a closing position must match the most recent open one.
        stack: list[int] = []
        for i, j in enumerate(self.partner):
            if j > i:
                stack.append(i)
            else:
                if not stack or stack[-1] != j:
                    return True
                stack.pop()
        return bool(stack)

    def arcs(self) -> list[tuple[int, int]]:
        return [(i, j) for i, j in enumerate(self.partner) if i < j]

    def to_json(self) -> dict:
        return {"n": self.n, "partner": list(self.partner)}

    @staticmethod
    def from_json(data: dict) -> "NonCrossingPairing":
        return NonCrossingPairing(int(data["n"]), tuple(int(v) for v in data["partner"]))


def _pairing_partners(n: int) -> Iterator[list[int]]:
    """Yield partner arrays of all non-crossing pairings of {0..2n-1}.

    For the first unmatched position i the candidate partners j are tried in
    ascending order, which makes the stream lexicographic in partner[0],
    then in the partner of the next unmatched position, and so on.
    """
    partner = [-1] * (2 * n)

    def fill(segments: list[tuple[int, int]]) -> Iterator[None]:
        if not segments:
            yield None
            return
        lo, hi = segments[-1]
        rest = segments[:-1]
        if lo > hi:
            yield from fill(rest)
            return
        for j in range(lo + 1, hi + 1, 2):
            partner[lo], partner[j] = j, lo
            # Arc (lo, j) splits the segment; inner part is matched first.
            yield from fill(rest + [(j + 1, hi), (lo + 1, j - 1)])
        partner[lo] = -1

    for _ in fill([(0, 2 * n - 1)]):
        yield partner[:]


def enumerate_pairings(n: int) -> Iterator[NonCrossingPairing]:
    """All non-crossing pairings of size n, Cat(n) in total."""
    if n < 1:
        raise ValueError("enumerate_pairings requires n >= 1")
    for partner in _pairing_partners(n):
        yield NonCrossingPairing(n, tuple(partner))


# ---------------------------------------------------------------------------
# Outerplanar triangulations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OuterplanarTriangulation:
    """Rooted outerplanar triangulation of the 2n-gon.

    Boundary vertices are 0..2n-1 clockwise, boundary edge k joins k and
    k+1 (mod 2n) and is oriented k -> k+1; edge 0 is the root edge.  Each
    of the 2n-2 triangles is stored as its oriented dart cycle (u0, u1, u2),
    i.e. darts u0->u1, u1->u2, u2->u0, so a boundary edge k appears as a
    consecutive pair (k, k+1) in exactly one triangle.
    """

    n: int
    triangles: tuple[tuple[int, int, int], ...]

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("outerplanar triangulation needs n >= 2")
        if len(self.triangles) != 2 * self.n - 2:
            raise ValueError("expected 2n-2 triangles")
        # Normal form: rotate each dart cycle to start at its smallest
        # vertex and sort the cycles, so equal maps compare equal.
        normed = []
        for tri in self.triangles:
            k = tri.index(min(tri))
            normed.append((tri[k], tri[(k + 1) % 3], tri[(k + 2) % 3]))
        object.__setattr__(self, "triangles", tuple(sorted(normed)))

    @property
    def boundary_size(self) -> int:
        return 2 * self.n

    def boundary_incidence(self) -> list[tuple[int, int]]:
        """(triangle index, dart position) of boundary edge k, for each k."""
        m = self.boundary_size
        where: list[tuple[int, int] | None] = [None] * m
        for ti, tri in enumerate(self.triangles):
            for pos in range(3):
                u, v = tri[pos], tri[(pos + 1) % 3]
                if (u + 1) % m == v:
                    if where[u] is not None:
                        raise ValueError("boundary edge on two triangles")
                    where[u] = (ti, pos)
        if any(w is None for w in where):
            raise ValueError("missing boundary edge")
        return where  # type: ignore[return-value]

    def dual_tree_string(self) -> str:
        """Nested-parenthesis encoding of the dual tree of the dissection."""
        m = self.boundary_size
        # Triangle with base chord (a, b) has dart b -> a.
        by_base = {}
        for ti, tri in enumerate(self.triangles):
            for pos in range(3):
                u, v = tri[pos], tri[(pos + 1) % 3]
                by_base[(u, v)] = tri[(pos + 2) % 3]

        def enc(a: int, b: int) -> str:
            # Region with vertices a..b (cyclically) and base dart b -> a,
            # encoded as "(left)right" so empty children stay unambiguous.
            if (a + 1) % m == b:
                return ""
            c = by_base[(b, a)]
            return "(" + enc(a, c) + ")" + enc(c, b)

        return enc(1, 0)

    def to_json(self) -> dict:
        return {"n": self.n, "t": self.dual_tree_string()}

    @staticmethod
    def from_json(data: dict) -> "OuterplanarTriangulation":
        return outerplanar_from_string(int(data["n"]), str(data["t"]))


def _fan_triangulations(a: int, b: int) -> Iterator[list[tuple[int, int, int]]]:
    """Triangulations of the fan a..b (unrolled labels) with base chord (a, b)."""
    if b == a + 1:
        yield []
        return
    for c in range(a + 1, b):
        for left in _fan_triangulations(a, c):
            for right in _fan_triangulations(c, b):
                yield left + [(a, c, b)] + right


def enumerate_outerplanar(n: int) -> Iterator[OuterplanarTriangulation]:
    """All rooted outerplanar triangulations of the 2n-gon, Cat(2n-2) in total."""
    if n < 2:
        raise ValueError("enumerate_outerplanar requires n >= 2")
    m = 2 * n
    for tris in _fan_triangulations(1, m):
        yield OuterplanarTriangulation(
            n, tuple((a % m, c % m, b % m) for (a, c, b) in tris)
        )


def outerplanar_from_string(n: int, s: str) -> OuterplanarTriangulation:
    """Parse the nested-parenthesis dual-tree encoding back to a triangulation."""
    m = 2 * n
    pos = 0

    def parse_shape():
        nonlocal pos
        if pos < len(s) and s[pos] == "(":
            pos += 1
            left = parse_shape()
            if pos >= len(s) or s[pos] != ")":
                raise ValueError("malformed dual tree string")
            pos += 1
            right = parse_shape()
            return (left, right)
        return None

    def size(shape) -> int:
        return 0 if shape is None else 1 + size(shape[0]) + size(shape[1])

    def assign(shape, a: int, b: int) -> list[tuple[int, int, int]]:
        if shape is None:
            if b != a + 1:
                raise ValueError("dual tree string does not fit size n")
            return []
        left, right = shape
        c = a + size(left) + 1
        return assign(left, a, c) + [(a, c, b)] + assign(right, c, b)

    shape = parse_shape()
    if pos != len(s):
        raise ValueError("trailing characters in dual tree string")
    tris = assign(shape, 1, m)
    return OuterplanarTriangulation(n, tuple((a % m, c % m, b % m) for a, c, b in tris))


# ---------------------------------------------------------------------------
# Exact polynomial / series arithmetic
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BivariatePolynomial:
    """Polynomial in z and x with exact integer coefficients.

    coeffs maps (power of z, power of x) to a nonzero integer.
    """

    coeffs: dict[tuple[int, int], int] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(
            self, "coeffs", {k: v for k, v in self.coeffs.items() if v != 0}
        )

    def __add__(self, other: "BivariatePolynomial") -> "BivariatePolynomial":
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = out.get(k, 0) + v
        return BivariatePolynomial(out)

    def __mul__(self, other: "BivariatePolynomial") -> "BivariatePolynomial":
        out: dict[tuple[int, int], int] = {}
        for (za, xa), va in self.coeffs.items():
            for (zb, xb), vb in other.coeffs.items():
                k = (za + zb, xa + xb)
                out[k] = out.get(k, 0) + va * vb
        return BivariatePolynomial(out)

    def coefficient(self, z_pow: int, x_pow: int) -> int:
        return self.coeffs.get((z_pow, x_pow), 0)

    def x_poly(self, z_pow: int) -> dict[int, int]:
        """Coefficients of z^z_pow as a map x-power -> count."""
        return {x: v for (z, x), v in self.coeffs.items() if z == z_pow}

    def eval_x(self, z_pow: int, x: Fraction | int) -> Fraction | int:
        return sum(v * x**k for k, v in self.x_poly(z_pow).items())


class TruncatedSeries:
    """Power series in one variable, exact rational coefficients, order K.

    All arithmetic silently truncates at order K.  Composition is not
    needed here; the algebraic systems are solved by fixed-point iteration.
    """

    def __init__(self, coeffs, order: int):
        if order < 0:
            raise ValueError("order must be >= 0")
        c = [Fraction(v) for v in coeffs[: order + 1]]
        c += [Fraction(0)] * (order + 1 - len(c))
        self.coeffs = c
        self.order = order

    @staticmethod
    def constant(value, order: int) -> "TruncatedSeries":
        return TruncatedSeries([Fraction(value)], order)

    @staticmethod
    def z(order: int) -> "TruncatedSeries":
        return TruncatedSeries([0, 1], order)

    def __getitem__(self, k: int) -> Fraction:
        return self.coeffs[k] if 0 <= k <= self.order else Fraction(0)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, TruncatedSeries)
            and self.order == other.order
            and self.coeffs == other.coeffs
        )

    def __add__(self, other) -> "TruncatedSeries":
        other = self._coerce(other)
        return TruncatedSeries(
            [a + b for a, b in zip(self.coeffs, other.coeffs)], self.order
        )

    __radd__ = __add__

    def __sub__(self, other) -> "TruncatedSeries":
        other = self._coerce(other)
        return TruncatedSeries(
            [a - b for a, b in zip(self.coeffs, other.coeffs)], self.order
        )

    def __rsub__(self, other) -> "TruncatedSeries":
        return self._coerce(other) - self

    def __neg__(self) -> "TruncatedSeries":
        return TruncatedSeries([-a for a in self.coeffs], self.order)

    def __mul__(self, other) -> "TruncatedSeries":
        if not isinstance(other, TruncatedSeries):
            return TruncatedSeries([a * other for a in self.coeffs], self.order)
        out = [Fraction(0)] * (self.order + 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j in range(self.order + 1 - i):
                b = other.coeffs[j]
                if b != 0:
                    out[i + j] += a * b
        return TruncatedSeries(out, self.order)

    __rmul__ = __mul__

    def shift(self, k: int = 1) -> "TruncatedSeries":
        """Multiply by z^k."""
        return TruncatedSeries([Fraction(0)] * k + self.coeffs, self.order)

    def sqrt(self) -> "TruncatedSeries":
        """Square root of a series with constant term 1."""
        if self.coeffs[0] != 1:
            raise ValueError("sqrt implemented for constant term 1 only")
        out = [Fraction(1)] + [Fraction(0)] * self.order
        for k in range(1, self.order + 1):
            acc = sum(out[i] * out[k - i] for i in range(1, k))
            out[k] = (self.coeffs[k] - acc) / 2
        return TruncatedSeries(out, self.order)

    def _coerce(self, other) -> "TruncatedSeries":
        if isinstance(other, TruncatedSeries):
            if other.order != self.order:
                raise ValueError("order mismatch")
            return other
        return TruncatedSeries.constant(other, self.order)

    def integer_coefficients(self) -> list[int]:
        out = []
        for c in self.coeffs:
            if c.denominator != 1:
                raise ValueError("coefficient is not an integer")
            out.append(c.numerator)
        return out

    def __repr__(self) -> str:
        return f"TruncatedSeries({self.coeffs!r}, order={self.order})"
