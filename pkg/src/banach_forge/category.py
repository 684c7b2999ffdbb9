"""Operator pairs: unconstrained pairs and projection-embedding pairs.

A projection-embedding pair (``KArrow``) is ``(e, P)`` with ``e`` an
isometric embedding, ``P`` 1-bounded and ``P e = id``.  Chains of spaces
with such bonds model monotone finite-dimensional decompositions.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .errors import DomainMismatch, NotOneBounded, P1Violated, P2Violated, ChainInvalid
from .rational import ONE, ZERO, Matrix, Rational, fmt
from .spaces import (Operator, PolyBanachSpace, lower_isometry_bound_with_witness,
                     op_norm_with_witness)


@dataclass(frozen=True)
class LArrow:
    forward: Operator
    backward: Operator

    def __post_init__(self):
        if self.forward.domain != self.backward.codomain or self.forward.codomain != self.backward.domain:
            raise DomainMismatch("forward and backward maps are not between the same two spaces")


@dataclass(frozen=True)
class KArrow:
    embed: Operator
    proj: Operator

    def __post_init__(self):
        if self.embed.domain.dim != self.proj.codomain.dim or self.embed.codomain.dim != self.proj.domain.dim:
            raise DomainMismatch("embedding and projection shapes are not dual")

    @property
    def source(self) -> PolyBanachSpace:
        return self.embed.domain

    @property
    def target(self) -> PolyBanachSpace:
        return self.embed.codomain

    @classmethod
    def identity(cls, space: PolyBanachSpace) -> "KArrow":
        return cls(Operator.identity(space), Operator.identity(space))

    def inverse(self) -> "KArrow":
        """The reversed pair; only meaningful when ``embed`` is onto."""
        return KArrow(self.proj, self.embed)

    def same_as(self, other: "KArrow") -> bool:
        return self.embed.matrix == other.embed.matrix and self.proj.matrix == other.proj.matrix


@dataclass(frozen=True)
class Check:
    name: str
    value: object
    relation: str
    bound: object

    @property
    def passed(self) -> bool:
        v, b = self.value, self.bound
        return {
            "<=": lambda: v <= b,
            "<": lambda: v < b,
            ">=": lambda: v >= b,
            "==": lambda: v == b,
        }[self.relation]()

    def to_dict(self) -> dict:
        enc = lambda x: x if isinstance(x, (bool, str)) else fmt(x)
        return {"name": self.name, "value": enc(self.value), "relation": self.relation,
                "bound": enc(self.bound), "passed": self.passed}

    def __str__(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        show = lambda x: str(x) if isinstance(x, (bool, str)) else fmt(x)
        return f"{mark} {self.name}: {show(self.value)} {self.relation} {show(self.bound)}"


@dataclass(frozen=True)
class Certificate:
    """Exact record of the postconditions a construction claims."""

    claim: str
    checks: tuple
    notes: tuple = field(default=())

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list:
        return [c for c in self.checks if not c.passed]

    def value(self, name: str):
        for c in self.checks:
            if c.name == name:
                return c.value
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {"claim": self.claim, "ok": self.ok, "checks": [c.to_dict() for c in self.checks],
                "notes": list(self.notes)}

    def merged(self, claim: str, *others: "Certificate", prefix: bool = True) -> "Certificate":
        checks = list(self.checks)
        notes = list(self.notes)
        for o in others:
            checks += [Check(f"{o.claim}: {c.name}" if prefix else c.name, c.value, c.relation, c.bound)
                       for c in o.checks]
            notes += list(o.notes)
        return Certificate(claim, tuple(checks), tuple(notes))


def matrix_identity_check(name: str, lhs: Matrix, rhs: Matrix) -> Check:
    return Check(name, lhs == rhs, "==", True)


def verify_karrow(a: KArrow) -> Certificate:
    """Check (P1), (P2) and 1-boundedness exactly; raise naming the first failure."""
    e, P = a.embed, a.proj
    if e.domain != P.codomain or e.codomain != P.domain:
        raise DomainMismatch("embedding and projection are not between the same spaces")
    ne, we = op_norm_with_witness(e)
    if ne > 1:
        raise NotOneBounded(f"embedding has norm {fmt(ne)} > 1", witness=we, value=ne)
    nP, wP = op_norm_with_witness(P)
    if nP > 1:
        raise NotOneBounded(f"projection has norm {fmt(nP)} > 1", witness=wP, value=nP)
    n = e.domain.dim
    PE = P.matrix @ e.matrix
    ident = Matrix.identity(n)
    notes = []
    if PE == ident:
        lib = ONE
        notes.append("lower bound of embed = 1 from the 1-bounded left inverse proj")
    else:
        lib, x = lower_isometry_bound_with_witness(e)
        if lib < 1:
            raise P1Violated(f"embedding shrinks a unit vector to norm {fmt(lib)}", witness=x, value=lib)
        k = next(j for j in range(n) if PE.column(j) != ident.column(j))
        raise P2Violated("proj o embed differs from the identity", witness=ident.column(k))
    expected_norm = ONE if n > 0 else ZERO
    checks = (
        Check("op_norm(embed)", ne, "==", expected_norm),
        Check("op_norm(proj)", nP, "<=", ONE),
        Check("lower_isometry_bound(embed)", lib, "==", ONE),
        matrix_identity_check("proj o embed = id", PE, ident),
    )
    return Certificate("karrow", checks, tuple(notes))


def is_valid_karrow(a: KArrow) -> bool:
    try:
        return verify_karrow(a).ok
    except (NotOneBounded, P1Violated, P2Violated, DomainMismatch):
        return False


def compose_k(a: KArrow, b: KArrow) -> KArrow:
    """``b o a``: embed = b.embed o a.embed, proj = a.proj o b.proj."""
    if a.target != b.source:
        raise DomainMismatch("codomain of the first arrow is not the domain of the second")
    return KArrow(b.embed @ a.embed, a.proj @ b.proj)


def is_rational_arrow(a: KArrow, max_denominator: int | None = None) -> bool:
    """Both operators and both end spaces have rational data (within a denominator cap)."""
    mats = (a.embed.matrix, a.proj.matrix)
    spaces = (a.source, a.target)
    if not all(isinstance(x, Rational) for m in mats for x in m.entries()):
        return False
    if max_denominator is None:
        return True
    return all(m.max_denominator() <= max_denominator for m in mats) and \
        all(s.is_rational(max_denominator) for s in spaces)


def coordinate_arrow(small: PolyBanachSpace, big: PolyBanachSpace) -> KArrow:
    """Inclusion of the first ``small.dim`` coordinates with the matching projection."""
    k, n = small.dim, big.dim
    e = Matrix.block([[Matrix.identity(k)], [Matrix.zeros(n - k, k)]]) if k else Matrix.zeros(n, 0)
    P = Matrix.block([[Matrix.identity(k), Matrix.zeros(k, n - k)]]) if k else Matrix.zeros(0, n)
    return KArrow(Operator(small, big, e), Operator(big, small, P))


@dataclass(frozen=True)
class Chain:
    """Stages X_0, X_1, ... with bonding arrows ``bonds[k] : X_k -> X_{k+1}``."""

    stages: tuple
    bonds: tuple

    def __post_init__(self):
        if len(self.bonds) != len(self.stages) - 1:
            raise ChainInvalid("a chain with n stages needs n - 1 bonds")

    def bond(self, m: int, n: int) -> KArrow:
        """Bonding arrow X_m -> X_n for m <= n."""
        if m > n:
            raise ValueError("bonds go upward only")
        arrow = KArrow.identity(self.stages[m])
        for k in range(m, n):
            arrow = KArrow(self.bonds[k].embed @ arrow.embed, arrow.proj @ self.bonds[k].proj)
        return arrow

    def check(self) -> Certificate:
        """Trivial first stage, valid bonds, and P^n_m o P^m_k = P^n_k."""
        checks = [Check("X_0 is trivial", self.stages[0].dim == 0, "==", True)]
        for k, b in enumerate(self.bonds):
            if b.source != self.stages[k] or b.target != self.stages[k + 1]:
                raise ChainInvalid(f"bond {k} does not connect stages {k} and {k + 1}")
            try:
                c = verify_karrow(b)
            except (NotOneBounded, P1Violated, P2Violated) as exc:
                raise ChainInvalid(f"bond {k}: {exc}") from exc
            checks += [Check(f"bond {k}: {x.name}", x.value, x.relation, x.bound) for x in c.checks]
        n = len(self.stages)
        for kk in range(n):
            for m in range(kk + 1, n):
                for nn in range(m + 1, n):
                    direct = self.bond(kk, nn)
                    lhs = self.bond(kk, m).proj @ self.bond(m, nn).proj
                    checks.append(matrix_identity_check(f"P^{nn}_{m} o P^{m}_{kk} = P^{nn}_{kk}",
                                                        lhs.matrix, direct.proj.matrix))
        return Certificate("chain", tuple(checks))


def chain_of(stages: Sequence[PolyBanachSpace]) -> Chain:
    """Chain of coordinate inclusions between successive stages."""
    stages = tuple(stages)
    return Chain(stages, tuple(coordinate_arrow(stages[k], stages[k + 1]) for k in range(len(stages) - 1)))


def linf_chain(n: int) -> Chain:
    """{0} < l_inf^1 < ... < l_inf^n."""
    return chain_of([PolyBanachSpace.trivial("X0")] +
                    [PolyBanachSpace.cube(k, name=f"X{k}") for k in range(1, n + 1)])


def l1_chain(n: int) -> Chain:
    """{0} < l_1^1 < ... < l_1^n."""
    return chain_of([PolyBanachSpace.trivial("X0")] +
                    [PolyBanachSpace.cross(k, name=f"X{k}") for k in range(1, n + 1)])


def trivial_chain(n: int) -> Chain:
    return chain_of([PolyBanachSpace.trivial(f"X{k}") for k in range(n + 1)])
