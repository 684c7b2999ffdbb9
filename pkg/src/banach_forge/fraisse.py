"""Finite prefixes of a generic (Fraisse) sequence of rational spaces.

A run is a chain U_0 = {0} <= U_1 <= ... <= U_N whose bonds are coordinate
inclusions with coordinate projections, plus an append-only ledger of
requirements ``f : U_n -> Y``.  Requirements are discovered by a bounded
enumeration (see :func:`enumerate_arrows`) over a ladder of growing
budgets and served first-in first-out; serving one amalgamates ``Y`` with
the top stage over ``U_n``, which yields the new top stage and an arrow
``g : Y -> U_{N+1}`` with ``g o f`` equal to the bond ``U_n -> U_{N+1}``.
"""
from __future__ import annotations

import dataclasses
import os
import random
from dataclasses import dataclass, field
from typing import Iterable

from .category import (Certificate, Check, KArrow, compose_k, coordinate_arrow,
                       matrix_identity_check, verify_karrow)
from .constructions import amalgamate
from .errors import BudgetExhausted, DomainMismatch
from .rational import Q, ZERO
from .spaces import PolyBanachSpace

CAP_ENV = "BANACH_FORGE_BUDGET_CAP"


@dataclass(frozen=True)
class ComplexityBudget:
    """Bounds on the arrows a run is asked to absorb.

    A coordinate is within budget when its denominator and its absolute
    value are both at most ``max_denominator``.
    """

    max_dim: int
    max_denominator: int
    max_vertex_count: int = 64

    def __post_init__(self):
        if min(self.max_dim, self.max_denominator, self.max_vertex_count) < 1:
            raise ValueError("budget components must be positive")

    def admits_value(self, x) -> bool:
        return x.denominator <= self.max_denominator and abs(x) <= self.max_denominator

    def admits_space(self, space: PolyBanachSpace) -> bool:
        return (space.dim <= self.max_dim and len(space.vertices) <= self.max_vertex_count
                and all(self.admits_value(c) for v in space.vertices for c in v))

    def contains(self, other: "ComplexityBudget") -> bool:
        return (other.max_dim <= self.max_dim and other.max_denominator <= self.max_denominator
                and other.max_vertex_count <= self.max_vertex_count)

    def capped(self, cap: "ComplexityBudget") -> "ComplexityBudget":
        return ComplexityBudget(min(self.max_dim, cap.max_dim), min(self.max_denominator, cap.max_denominator),
                                min(self.max_vertex_count, cap.max_vertex_count))

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def budget_for_epoch(k: int, cap: ComplexityBudget) -> ComplexityBudget:
    """Epoch k allows dimension k+1 and denominators up to 2^k, within ``cap``."""
    return ComplexityBudget(k + 1, 2 ** k, cap.max_vertex_count).capped(cap)


def final_epoch(cap: ComplexityBudget) -> int:
    k = 0
    while budget_for_epoch(k, cap) != cap:
        k += 1
    return k


def effective_cap(cap: ComplexityBudget) -> ComplexityBudget:
    """Apply the ``BANACH_FORGE_BUDGET_CAP`` ceiling ("dim,den[,vertices]") if set."""
    raw = os.environ.get(CAP_ENV)
    if not raw:
        return cap
    parts = [int(p) for p in raw.replace(" ", "").split(",") if p]
    ceiling = ComplexityBudget(parts[0], parts[1] if len(parts) > 1 else cap.max_denominator,
                               parts[2] if len(parts) > 2 else cap.max_vertex_count)
    return cap.capped(ceiling)


def arrow_key(n: int, f: KArrow) -> tuple:
    return (n, f.target.dim, f.target.vertices, f.embed.matrix.rows, f.proj.matrix.rows)


@dataclass(frozen=True)
class Requirement:
    index: int
    stage: int
    arrow: KArrow
    key: tuple
    epoch: int
    enqueued_step: int
    queue_length: int
    origin: str = "enumerated"
    status: str = "pending"
    realized_stage: int | None = None
    g: KArrow | None = None
    realized_step: int | None = None
    certificate: Certificate | None = None

    @property
    def realized(self) -> bool:
        return self.status == "realized"


@dataclass(frozen=True)
class GenericRun:
    stages: tuple
    bonds: tuple
    ledger: tuple
    queue: tuple
    seed: int
    cap: ComplexityBudget
    epoch: int = -1
    completed_epochs: tuple = ()  # (epoch, number of stages when it drained)
    _bond_cache: dict = field(default_factory=dict, compare=False, repr=False)

    @classmethod
    def fresh(cls, seed: int, cap: ComplexityBudget) -> "GenericRun":
        return cls((PolyBanachSpace.trivial("U0"),), (), (), (), seed, cap)

    @property
    def top(self) -> int:
        return len(self.stages) - 1

    @property
    def step(self) -> int:
        return self.top

    @property
    def budget(self) -> ComplexityBudget:
        return budget_for_epoch(max(self.epoch, 0), self.cap)

    def bond(self, n: int, m: int) -> KArrow:
        """Bonding arrow U_n -> U_m (n <= m)."""
        if n > m:
            raise ValueError("bonds go upward only")
        hit = self._bond_cache.get((n, m))
        if hit is not None:
            return hit
        if n == m:
            arrow = KArrow.identity(self.stages[n])
        else:
            prev = self.bond(n, m - 1)
            b = self.bonds[m - 1]
            arrow = KArrow(b.embed @ prev.embed, prev.proj @ b.proj)
        self._bond_cache[(n, m)] = arrow
        return arrow

    def pending(self) -> list:
        return [r for r in self.ledger if not r.realized]

    def realized_keys(self) -> set:
        return {r.key for r in self.ledger if r.realized}

    def _replace(self, **kw) -> "GenericRun":
        kw.setdefault("_bond_cache", dict(self._bond_cache))
        return dataclasses.replace(self, **kw)


# --- enumeration ----------------------------------------------------------

def radii(max_denominator: int) -> list:
    """All p/q with 1 <= p, q <= max_denominator, ascending."""
    return sorted({Q(p, q) for p in range(1, max_denominator + 1) for q in range(1, max_denominator + 1)})


def _catalog(d: int, max_denominator: int) -> list:
    seen, out = set(), []
    for r in radii(max_denominator):
        for kind, maker in (("cube", PolyBanachSpace.cube), ("cross", PolyBanachSpace.cross)):
            Z = maker(d, r)
            if Z.vertices not in seen:
                seen.add(Z.vertices)
                out.append((f"{kind}{d}[{r}]", Z))
    return out


def _extension(U: PolyBanachSpace, Z: PolyBanachSpace, kind: str) -> PolyBanachSpace:
    k, d = U.dim, Z.dim
    if kind == "sum1":
        pts = [tuple(v) + (ZERO,) * d for v in U.vertices] + [(ZERO,) * k + tuple(z) for z in Z.vertices]
    else:
        pts = [tuple(v) + tuple(z) for v in U.vertices for z in Z.vertices]
    return PolyBanachSpace.from_points(pts, dim=k + d)


def enumerate_arrows(run: GenericRun, n: int, budget: ComplexityBudget) -> list:
    """Budgeted arrows out of U_n, in a seeded deterministic order.

    The window consists of the identity of U_n and the coordinate
    inclusions of U_n into U_n (+)_1 Z and U_n (+)_inf Z, where Z runs over
    cubes and cross-polytopes of radius p/q (p, q <= max_denominator) in
    the dimensions the budget leaves free.  Codomains are presented in
    canonical coordinates, so equal keys mean equal requirements.
    """
    if n > run.top:
        raise IndexError(f"stage {n} does not exist (top is {run.top})")
    U = run.stages[n]
    if not budget.admits_space(U):
        return []
    out = [KArrow.identity(U)]
    seen = {U.vertices}
    for d in range(1, budget.max_dim - U.dim + 1):
        group = []
        for label, Z in _catalog(d, budget.max_denominator):
            kinds = ("sum1",) if U.dim == 0 else ("sum1", "suminf")
            for kind in kinds:
                Y = _extension(U, Z, kind)
                if Y.vertices in seen or not budget.admits_space(Y):
                    continue
                seen.add(Y.vertices)
                group.append(coordinate_arrow(U, Y))
        random.Random(f"{run.seed}/{n}/{d}").shuffle(group)
        out += group
    return out


# --- ledger mechanics -----------------------------------------------------

def _is_iso(n: int, f: KArrow) -> bool:
    return f.target.dim == f.source.dim


def _matching_bond(run: GenericRun, n: int, f: KArrow):
    for m in range(n + 1, run.top + 1):
        if run.stages[m].dim == f.target.dim and run.stages[m] == f.target and run.bond(n, m).same_as(f):
            return m
    return None


def _realization_certificate(run: GenericRun, n: int, m: int, f: KArrow, g: KArrow, how: str) -> Certificate:
    b = run.bond(n, m)
    checks = (
        Check("m > n", m > n, "==", True),
        matrix_identity_check("embed(g o f) = bond embed", g.embed.matrix @ f.embed.matrix, b.embed.matrix),
        matrix_identity_check("proj(g o f) = bond proj", f.proj.matrix @ g.proj.matrix, b.proj.matrix),
    )
    return Certificate("condition_A", checks, (how,))


def _cheap_realization(run: GenericRun, n: int, f: KArrow):
    """(m, g, how) when f is realized without a new stage, else None."""
    m = _matching_bond(run, n, f)
    if m is not None:
        return m, KArrow.identity(run.stages[m]), "f is already the bond U_n -> U_m"
    if _is_iso(n, f) and n < run.top:
        return run.top, compose_k(f.inverse(), run.bond(n, run.top)), "f is invertible; g = bond o f^-1"
    return None


def _mark(run: GenericRun, idx: int, m: int, g: KArrow, cert: Certificate) -> GenericRun:
    ledger = list(run.ledger)
    ledger[idx] = dataclasses.replace(ledger[idx], status="realized", realized_stage=m, g=g,
                                      realized_step=run.step, certificate=cert)
    return run._replace(ledger=tuple(ledger), queue=tuple(i for i in run.queue if i != idx))


def _settle(run: GenericRun) -> GenericRun:
    for idx in list(run.queue):
        r = run.ledger[idx]
        hit = _cheap_realization(run, r.stage, r.arrow)
        if hit:
            m, g, how = hit
            run = _mark(run, idx, m, g, _realization_certificate(run, r.stage, m, r.arrow, g, how))
    return run


def _enqueue(run: GenericRun, stages: Iterable[int], budget: ComplexityBudget) -> GenericRun:
    known = {r.key for r in run.ledger}
    ledger, queue = list(run.ledger), list(run.queue)
    for n in stages:
        for f in enumerate_arrows(run, n, budget):
            key = arrow_key(n, f)
            if key in known:
                continue
            known.add(key)
            queue.append(len(ledger))
            ledger.append(Requirement(len(ledger), n, f, key, run.epoch, run.step, len(queue)))
    return run._replace(ledger=tuple(ledger), queue=tuple(queue))


def _append_stage(run: GenericRun, n: int, f: KArrow):
    """Amalgamate f with the bond U_n -> U_N; returns (run, m, g, certificate)."""
    N = run.top
    am = amalgamate(run.bond(n, N), f, verify_inputs=False)
    V = am.space.renamed(f"U{N + 1}")
    xv = KArrow(am.xv.embed.retarget(codomain=V), am.xv.proj.retarget(domain=V))
    g = KArrow(am.yv.embed.retarget(codomain=V), am.yv.proj.retarget(domain=V))
    run = run._replace(stages=run.stages + (V,), bonds=run.bonds + (xv,))
    cert = _realization_certificate(run, n, N + 1, f, g, "amalgamated with the top stage").merged(
        "condition_A", am.certificate)
    return run, N + 1, g, cert


def _poppable(run: GenericRun):
    for idx in run.queue:
        r = run.ledger[idx]
        if not (_is_iso(r.stage, r.arrow) and r.stage == run.top):
            return idx
    return None


def _advance_epoch(run: GenericRun) -> GenericRun:
    last = final_epoch(run.cap)
    while _poppable(run) is None:
        if run.epoch >= last:
            stuck = run.ledger[run.queue[0]] if run.queue else None
            what = f"requirement #{stuck.index} at stage {stuck.stage}" if stuck else "no pending requirement"
            raise BudgetExhausted(f"budget ladder exhausted at epoch {run.epoch} ({what})")
        done = run.completed_epochs + ((run.epoch, len(run.stages)),) if run.epoch >= 0 else ()
        run = run._replace(epoch=run.epoch + 1, completed_epochs=done)
        run = _enqueue(run, range(len(run.stages)), run.budget)
        run = _settle(run)
    return run


def extend_generic(run: GenericRun, steps: int) -> GenericRun:
    """Append ``steps`` stages, each realizing the oldest servable requirement."""
    if steps < 0:
        raise ValueError("steps must be nonnegative")
    for _ in range(steps):
        run = _settle(run)
        run = _advance_epoch(run)
        idx = _poppable(run)
        r = run.ledger[idx]
        run, m, g, cert = _append_stage(run, r.stage, r.arrow)
        run = _mark(run, idx, m, g, cert)
        run = _enqueue(run, [run.top], run.budget)
        run = _settle(run)
    return run


def realize(run: GenericRun, n: int, f: KArrow):
    """Some m > n and g : Y -> U_m with g o f = bond U_n -> U_m.

    Returns ``(m, g, run)``; the run is extended only when no existing
    stage already does the job.
    """
    if n > run.top:
        raise IndexError(f"stage {n} does not exist")
    if f.source != run.stages[n]:
        raise DomainMismatch(f"arrow does not start at U_{n}")
    verify_karrow(f)
    key = arrow_key(n, f)
    for r in run.ledger:
        if r.key == key and r.realized:
            return r.realized_stage, r.g, run
    hit = _cheap_realization(run, n, f)
    if hit:
        m, g, how = hit
        cert = _realization_certificate(run, n, m, f, g, how)
    else:
        run, m, g, cert = _append_stage(run, n, f)
    idx = next((r.index for r in run.ledger if r.key == key), None)
    if idx is None:
        idx = len(run.ledger)
        req = Requirement(idx, n, f, key, run.epoch, run.step, 0, origin="external")
        run = run._replace(ledger=run.ledger + (req,))
    run = _mark(run, idx, m, g, cert)
    if not hit and run.epoch >= 0:
        run = _enqueue(run, [run.top], run.budget)
    run = _settle(run)
    return m, g, run


@dataclass(frozen=True)
class ConditionAReport:
    budget: ComplexityBudget
    entries: tuple  # (stage, ledger index or None, status)

    def count(self, status: str) -> int:
        return sum(1 for e in self.entries if e[2] == status)

    @property
    def pending(self) -> int:
        return self.count("pending")

    @property
    def realized(self) -> int:
        return self.count("realized")

    @property
    def frontier(self) -> int:
        return self.count("frontier")

    def realized_set(self) -> set:
        return {(e[0], e[1]) for e in self.entries if e[2] == "realized"}


def verify_condition_A(run: GenericRun, budget: ComplexityBudget) -> ConditionAReport:
    """Audit every budgeted arrow out of every stage against the ledger.

    Arrows out of the top stage cannot be realized inside a finite prefix;
    they are reported as ``frontier`` rather than ``pending``.
    """
    by_key = {r.key: r for r in run.ledger}
    entries = []
    for n in range(len(run.stages)):
        for f in enumerate_arrows(run, n, budget):
            r = by_key.get(arrow_key(n, f))
            if r is not None and r.realized:
                entries.append((n, r.index, "realized"))
            elif n == run.top:
                entries.append((n, None if r is None else r.index, "frontier"))
            else:
                entries.append((n, None if r is None else r.index, "pending"))
    return ConditionAReport(budget, tuple(entries))


def audit_run(run: GenericRun) -> Certificate:
    """Re-verify bonds, chain coherence and every realized requirement."""
    checks = [Check("U_0 is trivial", run.stages[0].dim == 0, "==", True)]
    for k, b in enumerate(run.bonds):
        c = verify_karrow(b)
        checks += [Check(f"bond {k}->{k + 1}: {x.name}", x.value, x.relation, x.bound) for x in c.checks]
        checks.append(Check(f"dim U_{k + 1} >= dim U_{k}", run.stages[k + 1].dim >= run.stages[k].dim, "==", True))
    for m in range(1, len(run.stages)):
        for n in range(m):
            b = run.bond(n, m)
            checks.append(matrix_identity_check(f"P^{m}_{n} o e^{m}_{n} = id",
                                                b.proj.matrix @ b.embed.matrix,
                                                KArrow.identity(run.stages[n]).embed.matrix))
    for r in run.ledger:
        if r.realized:
            c = _realization_certificate(run, r.stage, r.realized_stage, r.arrow, r.g, "recheck")
            checks += [Check(f"requirement #{r.index}: {x.name}", x.value, x.relation, x.bound) for x in c.checks]
    return Certificate("generic_run", tuple(checks))
