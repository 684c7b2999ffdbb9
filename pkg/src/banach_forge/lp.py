"""Exact two-phase simplex over the rationals (Bland's rule)."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .errors import DimensionMismatch, Infeasible, Unbounded
from .rational import ONE, ZERO, Q, dot


@dataclass(frozen=True)
class LPResult:
    optimum: object
    witness: tuple


def _pivot(tab: list, obj: list, r: int, c: int) -> None:
    prow = tab[r]
    inv = ONE / prow[c]
    prow = [x * inv if x else x for x in prow]
    tab[r] = prow
    nz = [k for k, x in enumerate(prow) if x]
    for i, row in enumerate(tab):
        if i != r:
            f = row[c]
            if f:
                for k in nz:
                    row[k] -= f * prow[k]
    f = obj[c]
    if f:
        for k in nz:
            obj[k] -= f * prow[k]


def _run(tab: list, basis: list, obj: list, ncols: int) -> bool:
    """Pivot until optimal.  Returns False if the objective is unbounded below."""
    m = len(tab)
    while True:
        enter = next((j for j in range(ncols) if obj[j] < 0), None)
        if enter is None:
            return True
        leave = None
        best = None
        for i in range(m):
            a = tab[i][enter]
            if a > 0:
                ratio = tab[i][-1] / a
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    best, leave = ratio, i
        if leave is None:
            return False
        _pivot(tab, obj, leave, enter)
        basis[leave] = enter


def solve_lp(objective: Sequence, A_ub: Sequence[Sequence] = (), b_ub: Sequence = (),
             A_eq: Sequence[Sequence] = (), b_eq: Sequence = (), sense: str = "min",
             nonneg=False) -> LPResult:
    """Optimize ``objective . x`` subject to ``A_ub x <= b_ub`` and ``A_eq x = b_eq``.

    ``nonneg`` is a bool or one bool per variable; variables not marked
    nonnegative are free.  Raises :class:`Infeasible` or :class:`Unbounded`.
    """
    n = len(objective)
    c = [Q(v) for v in objective]
    if sense == "max":
        c = [-v for v in c]
    elif sense != "min":
        raise ValueError(f"sense must be 'min' or 'max', not {sense!r}")
    if isinstance(nonneg, bool):
        nonneg = [nonneg] * n
    if len(nonneg) != n:
        raise DimensionMismatch("nonneg flags do not match the number of variables")
    for row in list(A_ub) + list(A_eq):
        if len(row) != n:
            raise DimensionMismatch(f"constraint row of length {len(row)} for {n} variables")
    if len(A_ub) != len(b_ub) or len(A_eq) != len(b_eq):
        raise DimensionMismatch("constraint matrix and right-hand side lengths differ")

    # column layout: one column per nonnegative variable, two per free variable
    colmap = []
    for j in range(n):
        colmap.append((j, 1))
        if not nonneg[j]:
            colmap.append((j, -1))
    nx = len(colmap)
    nub = len(A_ub)

    def expand(row):
        row = [Q(v) for v in row]
        return [row[j] * s if s == 1 else -row[j] for j, s in colmap]

    tab = []
    basis = []
    needs_art = []
    for i, (row, b) in enumerate(zip(A_ub, b_ub)):
        r = expand(row) + [ZERO] * nub
        r[nx + i] = ONE
        b = Q(b)
        if b < 0:
            r = [-x for x in r]
            b = -b
            needs_art.append(len(tab))
            basis.append(None)
        else:
            basis.append(nx + i)
        tab.append(r + [b])
    for row, b in zip(A_eq, b_eq):
        r = expand(row) + [ZERO] * nub
        b = Q(b)
        if b < 0:
            r = [-x for x in r]
            b = -b
        needs_art.append(len(tab))
        basis.append(None)
        tab.append(r + [b])

    ncore = nx + nub
    nart = len(needs_art)
    for row in tab:
        row[-1:-1] = [ZERO] * nart
    for k, i in enumerate(needs_art):
        tab[i][ncore + k] = ONE
        basis[i] = ncore + k

    if nart:
        obj = [ZERO] * (ncore + nart + 1)
        for k in range(nart):
            obj[ncore + k] = ONE
        for i in needs_art:
            obj = [o - x for o, x in zip(obj, tab[i])]
        _run(tab, basis, obj, ncore + nart)
        if obj[-1] != 0:
            raise Infeasible("constraint system has no solution")
        # drive zero-level artificials out of the basis, dropping redundant rows
        i = 0
        while i < len(tab):
            if basis[i] >= ncore:
                c_in = next((j for j in range(ncore) if tab[i][j] != 0), None)
                if c_in is None:
                    del tab[i]
                    del basis[i]
                    continue
                _pivot(tab, [ZERO] * (ncore + nart + 1), i, c_in)
                basis[i] = c_in
            i += 1
        tab = [row[:ncore] + [row[-1]] for row in tab]

    cost = [c[j] if s == 1 else -c[j] for j, s in colmap] + [ZERO] * nub
    obj = cost + [ZERO]
    for i, bv in enumerate(basis):
        cb = cost[bv]
        if cb:
            obj = [o - cb * x for o, x in zip(obj, tab[i])]
    if not _run(tab, basis, obj, ncore):
        raise Unbounded("objective is unbounded over the feasible set")

    y = [ZERO] * ncore
    for i, bv in enumerate(basis):
        y[bv] = tab[i][-1]
    x = [ZERO] * n
    for k, (j, s) in enumerate(colmap):
        if y[k]:
            x[j] += y[k] if s == 1 else -y[k]
    x = tuple(x)
    value = dot([Q(v) for v in objective], x)
    return LPResult(value, x)


def feasible_point(A_ub=(), b_ub=(), A_eq=(), b_eq=(), nvars=None, nonneg=False):
    """A feasible point of the system, or None when it is infeasible."""
    if nvars is None:
        nvars = len((list(A_ub) + list(A_eq))[0])
    try:
        return solve_lp([0] * nvars, A_ub, b_ub, A_eq, b_eq, nonneg=nonneg).witness
    except Infeasible:
        return None
