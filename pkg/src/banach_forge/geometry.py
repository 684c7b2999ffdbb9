"""Exact polytopes in V- and H-representation.

V->H and H->V both reduce to extreme-ray enumeration of a polyhedral cone
``{y : R y >= 0}``, done here with the double description method on
primitive integer vectors.  Redundancy of points is decided by LP.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import DegenerateSpace, DimensionMismatch, Infeasible, UnboundedInput
from .lp import solve_lp
from .rational import ONE, ZERO, Matrix, Q, dot, primitive_integer, vec, vsub


@dataclass(frozen=True)
class VPolytope:
    ambient_dim: int
    vertices: tuple

    def __post_init__(self):
        if not self.vertices:
            raise ValueError("a V-polytope needs at least one point")
        for v in self.vertices:
            if len(v) != self.ambient_dim:
                raise DimensionMismatch(f"point {v} is not in dimension {self.ambient_dim}")

    @classmethod
    def of(cls, points: Iterable[Sequence]) -> "VPolytope":
        pts = [vec(p) for p in points]
        if not pts:
            raise ValueError("a V-polytope needs at least one point")
        return cls(len(pts[0]), tuple(sorted(set(pts))))

    def contains(self, x: Sequence) -> bool:
        return in_hull(vec(x), self.vertices)


@dataclass(frozen=True)
class HPolytope:
    """Intersection of halfspaces ``normal . x <= offset``."""

    ambient_dim: int
    halfspaces: tuple

    def contains(self, x: Sequence) -> bool:
        x = vec(x)
        return all(dot(a, x) <= b for a, b in self.halfspaces)

    def canonical(self) -> "HPolytope":
        return HPolytope(self.ambient_dim, tuple(sorted({canonical_halfspace(a, b) for a, b in self.halfspaces})))


def canonical_halfspace(normal: Sequence, offset) -> tuple:
    normal, offset = vec(normal), Q(offset)
    if offset != 0:
        s = abs(offset)
        return tuple(a / s for a in normal), offset / s
    return tuple(Q(v) for v in primitive_integer(normal)), ZERO


def in_hull(x: tuple, points: Sequence[tuple]) -> bool:
    """Exact membership of ``x`` in the convex hull of ``points``."""
    if not points:
        return False
    if x in points:
        return True
    d = len(x)
    A = [[p[k] for p in points] for k in range(d)] + [[ONE] * len(points)]
    b = list(x) + [ONE]
    try:
        solve_lp([0] * len(points), A_eq=A, b_eq=b, nonneg=True)
    except Infeasible:
        return False
    return True


def convex_hull(points: Iterable[Sequence]) -> VPolytope:
    """The minimal point set with the same convex hull, in lexicographic order."""
    pts = [vec(p) for p in points]
    if not pts:
        raise ValueError("convex hull of an empty set")
    d = len(pts[0])
    if any(len(p) != d for p in pts):
        raise DimensionMismatch("points of different dimensions")
    keep = sorted(set(pts))
    i = 0
    while i < len(keep) and len(keep) > 1:
        others = keep[:i] + keep[i + 1:]
        if in_hull(keep[i], others):
            keep = others
        else:
            i += 1
    return VPolytope(d, tuple(keep))


def linear_image(p: VPolytope, T: Matrix) -> VPolytope:
    if T.ncols != p.ambient_dim:
        raise DimensionMismatch(f"map with {T.ncols} columns applied to polytope in dimension {p.ambient_dim}")
    return convex_hull(T.apply(v) for v in p.vertices)


# --- double description -------------------------------------------------

def _int_dot(a, b) -> int:
    return sum(x * y for x, y in zip(a, b))


def _primitive(v: list) -> tuple:
    from math import gcd
    g = 0
    for x in v:
        g = gcd(g, x)
    if g > 1:
        return tuple(x // g for x in v)
    return tuple(v)


def extreme_rays(rows: Sequence[Sequence], dim: int) -> list[tuple]:
    """Extreme rays of the pointed cone ``{y in Q^dim : r . y >= 0 for r in rows}``.

    Rays come back as primitive integer vectors.  Raises ``ValueError`` if
    the cone has a nontrivial lineality space.
    """
    irows = [primitive_integer(r) for r in rows]
    irows = [r for r in irows if any(r)]
    # greedy choice of an independent initial set
    basis_idx: list[int] = []
    ech: list[list] = []
    for idx, r in enumerate(irows):
        v = [Q(x) for x in r]
        for piv, er in ech:
            if v[piv]:
                f = v[piv] / er[piv]
                v = [a - f * b for a, b in zip(v, er)]
        piv = next((k for k, a in enumerate(v) if a), None)
        if piv is not None:
            ech.append((piv, v))
            basis_idx.append(idx)
            if len(basis_idx) == dim:
                break
    if len(basis_idx) < dim:
        raise ValueError("cone is not pointed")
    B = Matrix([irows[i] for i in basis_idx])
    Binv = B.inverse()
    rays = [_primitive(list(primitive_integer(Binv.column(j)))) for j in range(dim)]
    # zero sets as bitmasks over processed constraint positions
    full = (1 << dim) - 1
    zsets = [full & ~(1 << j) for j in range(dim)]
    order = basis_idx + [i for i in range(len(irows)) if i not in set(basis_idx)]
    for pos in range(dim, len(order)):
        a = irows[order[pos]]
        bit = 1 << pos
        vals = [_int_dot(a, r) for r in rays]
        P = [k for k, v in enumerate(vals) if v > 0]
        N = [k for k, v in enumerate(vals) if v < 0]
        Z = [k for k, v in enumerate(vals) if v == 0]
        if not N:
            for k in Z:
                zsets[k] |= bit
            continue
        new_rays = [rays[k] for k in P] + [rays[k] for k in Z]
        new_z = [zsets[k] for k in P] + [zsets[k] | bit for k in Z]
        for p in P:
            zp = zsets[p]
            for n in N:
                common = zp & zsets[n]
                if bin(common).count("1") < dim - 2:
                    continue
                if any(k != p and k != n and (zsets[k] & common) == common for k in range(len(rays))):
                    continue
                vp, vn = vals[p], -vals[n]
                r = [vp * y + vn * x for x, y in zip(rays[p], rays[n])]
                new_rays.append(_primitive(r))
                new_z.append(common | bit)
        rays, zsets = new_rays, new_z
    return rays


def h_to_v(p: HPolytope) -> VPolytope:
    d = p.ambient_dim
    if d == 0:
        return VPolytope(0, ((),))
    rows = [tuple(-a for a in normal) + (Q(b),) for normal, b in p.halfspaces]
    rows.append((ZERO,) * d + (ONE,))
    try:
        rays = extreme_rays(rows, d + 1)
    except ValueError:
        raise UnboundedInput("halfspace system has a nontrivial lineality space") from None
    verts = []
    for r in rays:
        t = r[-1]
        if t == 0:
            raise UnboundedInput(f"recession direction {r[:-1]}")
        verts.append(tuple(Q(x, t) for x in r[:-1]))
    if not verts:
        raise Infeasible("halfspace system is empty")
    return VPolytope.of(verts)


def v_to_h(p: VPolytope) -> HPolytope:
    """Irredundant facet description of a full-dimensional V-polytope."""
    d = p.ambient_dim
    if d == 0:
        return HPolytope(0, ())
    n = len(p.vertices)
    c = tuple(sum(v[k] for v in p.vertices) / n for k in range(d))
    shifted = [vsub(v, c) for v in p.vertices]
    if Matrix(shifted).rank() < d:
        raise DegenerateSpace("polytope is not full-dimensional")
    rows = [tuple(-x for x in s) + (ONE,) for s in shifted]
    rows.append((ZERO,) * d + (ONE,))
    rays = extreme_rays(rows, d + 1)
    hs = []
    for r in rays:
        t = r[-1]
        if t == 0:
            raise DegenerateSpace("polytope is not full-dimensional")
        a = tuple(Q(x, t) for x in r[:-1])
        hs.append(canonical_halfspace(a, ONE + dot(a, c)))
    return HPolytope(d, tuple(sorted(set(hs))))
