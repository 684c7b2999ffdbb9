"""Finite-dimensional spaces with polyhedral unit balls, and their operators."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

from .errors import DegenerateSpace, DimensionMismatch
from .geometry import HPolytope, VPolytope, in_hull, v_to_h
from .lp import solve_lp
from .rational import ONE, ZERO, Matrix, Q, dot, is_zero_vector, vec, vneg


def _direction_key(x: tuple) -> tuple[tuple, object]:
    """Scale-free key of a nonzero vector and the scale that was divided out."""
    s = next(abs(c) for c in x if c != 0)
    return tuple(c / s for c in x), s


def symmetric_hull(points: Iterable[Sequence], dim: int) -> tuple:
    """Extreme points of conv(P u -P), lexicographically sorted."""
    pts = {vec(p) for p in points}
    pts = {p for p in pts if not is_zero_vector(p)}
    for p in pts:
        if len(p) != dim:
            raise DimensionMismatch(f"point {p} is not in dimension {dim}")
    pts |= {vneg(p) for p in pts}
    # one representative per +- pair; testing p against the rest minus -p is enough
    reps = sorted(p for p in pts if p > vneg(p))
    keep = list(reps)
    i = 0
    while i < len(keep):
        p = keep[i]
        rest = keep[:i] + keep[i + 1:]
        others = rest + [vneg(q) for q in rest]
        if others and in_hull(p, others):
            keep = rest
        else:
            i += 1
    return tuple(sorted(keep + [vneg(q) for q in keep]))


@dataclass(frozen=True)
class PolyBanachSpace:
    """R^dim normed by the gauge of a symmetric rational polytope.

    ``vertices`` is the canonical (sorted, irredundant, symmetric) vertex
    list of the unit ball.  The trivial space has ``dim == 0`` and no
    vertices.
    """

    dim: int
    vertices: tuple
    name: str = field(default="", compare=False)

    def __post_init__(self):
        if self.dim == 0:
            if self.vertices:
                raise DegenerateSpace("the trivial space has no ball vertices")
            return
        if not self.vertices:
            raise DegenerateSpace("unit ball has no vertices")
        if Matrix(self.vertices).rank() < self.dim:
            raise DegenerateSpace("unit ball is not full-dimensional")

    # constructors ---------------------------------------------------------

    @classmethod
    def from_points(cls, points: Iterable[Sequence], dim: int | None = None, name: str = "") -> "PolyBanachSpace":
        """Space whose unit ball is the symmetric convex hull of ``points``."""
        pts = [vec(p) for p in points]
        if dim is None:
            if not pts:
                raise ValueError("dimension required when no points are given")
            dim = len(pts[0])
        if dim == 0:
            return cls.trivial(name)
        return cls(dim, symmetric_hull(pts, dim), name)

    @classmethod
    def trivial(cls, name: str = "") -> "PolyBanachSpace":
        return cls(0, (), name)

    @classmethod
    def cube(cls, dim: int, radius=1, name: str = "") -> "PolyBanachSpace":
        """l_inf ball of the given radius."""
        r = Q(radius)
        if dim == 0:
            return cls.trivial(name)
        verts = tuple(sorted(tuple(r * s for s in signs) for signs in itertools.product((1, -1), repeat=dim)))
        return cls(dim, verts, name)

    @classmethod
    def cross(cls, dim: int, radius=1, name: str = "") -> "PolyBanachSpace":
        """l_1 ball of the given radius."""
        r = Q(radius)
        if dim == 0:
            return cls.trivial(name)
        verts = []
        for k in range(dim):
            for s in (r, -r):
                v = [ZERO] * dim
                v[k] = s
                verts.append(tuple(v))
        return cls(dim, tuple(sorted(verts)), name)

    def renamed(self, name: str) -> "PolyBanachSpace":
        new = PolyBanachSpace(self.dim, self.vertices, name)
        for attr in ("facets", "_directions"):
            if attr in self.__dict__:
                new.__dict__[attr] = self.__dict__[attr]
        return new

    # geometry -------------------------------------------------------------

    @property
    def ball(self) -> VPolytope:
        if self.dim == 0:
            return VPolytope(0, ((),))
        return VPolytope(self.dim, self.vertices)

    @property
    def half_vertices(self) -> tuple:
        """One vertex from each +-pair."""
        return tuple(v for v in self.vertices if v > vneg(v))

    @cached_property
    def facets(self) -> HPolytope:
        """Facets ``a . x <= 1`` of the unit ball, computed once on demand."""
        return v_to_h(self.ball)

    @cached_property
    def _directions(self) -> dict:
        out = {}
        for v in self.vertices:
            key, s = _direction_key(v)
            out[key] = s
        return out

    def max_denominator(self) -> int:
        d = 1
        for v in self.vertices:
            for c in v:
                d = max(d, int(c.denominator))
        return d

    def is_rational(self, max_denominator: int | None = None) -> bool:
        return max_denominator is None or self.max_denominator() <= max_denominator


@dataclass(frozen=True)
class Operator:
    """A linear map between two spaces, as a codomain.dim x domain.dim matrix."""

    domain: PolyBanachSpace
    codomain: PolyBanachSpace
    matrix: Matrix

    def __post_init__(self):
        if self.matrix.shape != (self.codomain.dim, self.domain.dim):
            raise DimensionMismatch(
                f"matrix shape {self.matrix.shape} does not match {self.codomain.dim}x{self.domain.dim}")

    @classmethod
    def identity(cls, space: PolyBanachSpace) -> "Operator":
        return cls(space, space, Matrix.identity(space.dim))

    @classmethod
    def zero(cls, domain: PolyBanachSpace, codomain: PolyBanachSpace) -> "Operator":
        return cls(domain, codomain, Matrix.zeros(codomain.dim, domain.dim))

    @classmethod
    def of(cls, domain, codomain, rows) -> "Operator":
        return cls(domain, codomain, Matrix(rows, ncols=domain.dim))

    def __call__(self, x: Sequence) -> tuple:
        return self.matrix.apply(vec(x))

    def __matmul__(self, other: "Operator") -> "Operator":
        """Composition ``self o other``."""
        if other.codomain.dim != self.domain.dim:
            raise DimensionMismatch("operators are not composable")
        return Operator(other.domain, self.codomain, self.matrix @ other.matrix)

    def __sub__(self, other: "Operator") -> "Operator":
        return Operator(self.domain, self.codomain, self.matrix - other.matrix)

    def __add__(self, other: "Operator") -> "Operator":
        return Operator(self.domain, self.codomain, self.matrix + other.matrix)

    def scale(self, c) -> "Operator":
        return Operator(self.domain, self.codomain, self.matrix.scale(c))

    def retarget(self, domain: PolyBanachSpace | None = None, codomain: PolyBanachSpace | None = None) -> "Operator":
        """Same matrix viewed between other spaces of the same dimensions."""
        return Operator(domain or self.domain, codomain or self.codomain, self.matrix)


# --- norms --------------------------------------------------------------

def _check_point(space: PolyBanachSpace, x) -> tuple:
    x = vec(x)
    if len(x) != space.dim:
        raise DimensionMismatch(f"vector of length {len(x)} in a space of dimension {space.dim}")
    return x


def norm_with_witness(space: PolyBanachSpace, x) -> tuple:
    """The norm of ``x`` and nonnegative weights ``{vertex: mu}`` with sum(mu v) = x."""
    x = _check_point(space, x)
    if is_zero_vector(x):
        return ZERO, {}
    verts = space.vertices
    A = [[v[k] for v in verts] for k in range(space.dim)]
    res = solve_lp([ONE] * len(verts), A_eq=A, b_eq=list(x), nonneg=True)
    return res.optimum, {v: m for v, m in zip(verts, res.witness) if m}


def norm(space: PolyBanachSpace, x) -> object:
    """Minkowski functional of the unit ball at ``x``, exactly."""
    x = _check_point(space, x)
    if is_zero_vector(x):
        return ZERO
    key, s = _direction_key(x)
    hit = space._directions.get(key)
    if hit is not None:
        return s / hit
    if "facets" in space.__dict__:
        return max(dot(a, x) for a, _ in space.facets.halfspaces)
    return norm_with_witness(space, x)[0]


def op_norm_with_witness(T: Operator) -> tuple:
    """Operator norm and a domain-ball vertex attaining it (None on {0})."""
    best, arg = ZERO, None
    for v in T.domain.half_vertices:
        val = norm(T.codomain, T.matrix.apply(v))
        if arg is None or val > best:
            best, arg = val, v
    return best, arg


def op_norm(T: Operator):
    return op_norm_with_witness(T)[0]


def lower_isometry_bound_with_witness(T: Operator) -> tuple:
    """min ||T x|| over the unit sphere of the domain, with a minimizing x.

    Solved facet by facet: for a facet F with vertices v_i the LP is
    min sum(mu) s.t. sum(mu_k u_k) = T(sum(lambda_i v_i)), sum(lambda) = 1,
    where u_k are the codomain ball vertices.  By symmetry one facet of each
    +- pair suffices.  The trivial domain returns 1 (vacuous bound).
    """
    dom, cod = T.domain, T.codomain
    if dom.dim == 0:
        return ONE, ()
    if cod.dim == 0:
        return ZERO, dom.vertices[0]
    best, arg = None, None
    Tv = {v: T.matrix.apply(v) for v in dom.vertices}
    for a, _ in dom.facets.halfspaces:
        if a < vneg(a):
            continue
        face = [v for v in dom.vertices if dot(a, v) == 1]
        nu = len(cod.vertices)
        A = []
        for k in range(cod.dim):
            A.append([u[k] for u in cod.vertices] + [-Tv[v][k] for v in face])
        A.append([ZERO] * nu + [ONE] * len(face))
        b = [ZERO] * cod.dim + [ONE]
        res = solve_lp([ONE] * nu + [ZERO] * len(face), A_eq=A, b_eq=b, nonneg=True)
        if best is None or res.optimum < best:
            lam = res.witness[nu:]
            x = tuple(sum((l * v[k] for l, v in zip(lam, face)), ZERO) for k in range(dom.dim))
            best, arg = res.optimum, x
            if best == 0:
                break
    return best, arg


def lower_isometry_bound(T: Operator):
    return lower_isometry_bound_with_witness(T)[0]


def is_one_bounded(T: Operator) -> bool:
    return op_norm(T) <= 1


def is_eps_isometry(T: Operator, eps) -> bool:
    """1-bounded with ||T x|| >= (1 - eps)||x||.  False whenever ||T|| > 1."""
    if not is_one_bounded(T):
        return False
    return lower_isometry_bound(T) >= 1 - Q(eps)


def is_isometric_embedding(T: Operator) -> bool:
    return is_eps_isometry(T, 0)


def isometry_via_left_inverse(T: Operator, L: Operator) -> bool:
    """Exact isometry test through a 1-bounded left inverse.

    If ||T|| <= 1, ||L|| <= 1 and L T = id then ||x|| = ||L T x|| <= ||T x|| <= ||x||,
    so T is an isometric embedding with lower bound exactly 1.
    """
    if (L.matrix @ T.matrix) != Matrix.identity(T.domain.dim):
        return False
    return is_one_bounded(T) and is_one_bounded(L)
