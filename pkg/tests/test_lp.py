import itertools

import pytest

from banach_forge.errors import Infeasible, Unbounded
from banach_forge.lp import solve_lp
from banach_forge.rational import Matrix, Q, dot
from generators import rat, rng_for


def test_min_on_interval():
    r = solve_lp([1], [[1], [-1]], [1, 0])
    assert r.optimum == 0 and r.witness == (0,)


def test_max_on_square():
    r = solve_lp([1, 1], [[1, 0], [-1, 0], [0, 1], [0, -1]], [1, 1, 1, 1], sense="max")
    assert r.optimum == 2 and r.witness == (1, 1)


def test_infeasible_and_unbounded_are_distinct():
    with pytest.raises(Infeasible):
        solve_lp([1], [[1], [-1]], [-1, -1])
    with pytest.raises(Unbounded):
        solve_lp([1], [[1]], [1])


def test_equalities_and_nonneg():
    r = solve_lp([1, 2], A_eq=[[1, 1]], b_eq=[1], nonneg=True)
    assert r.optimum == 1 and r.witness == (1, 0)


def brute_force(c, A, b):
    """Best objective over all basic solutions (3 tight constraints)."""
    best = None
    for rows in itertools.combinations(range(len(A)), 3):
        M = Matrix([A[i] for i in rows])
        if M.rank() < 3:
            continue
        x = M.inverse().apply([b[i] for i in rows])
        if all(dot(a, x) <= bi for a, bi in zip(A, b)):
            v = dot(c, x)
            best = v if best is None else min(best, v)
    return best


@pytest.mark.parametrize("seed", range(25))
def test_random_lp_matches_basis_enumeration(seed):
    rng = rng_for("lp", seed)
    A = [[1 if k == j else 0 for k in range(3)] for j in range(3)]
    A += [[-a for a in row] for row in A]
    b = [rng.randint(1, 3) for _ in range(6)]
    for _ in range(rng.randint(1, 4)):
        A.append([rat(rng) for _ in range(3)])
        b.append(rat(rng, 0, 2))
    c = [rat(rng) for _ in range(3)]
    oracle = brute_force(c, A, b)
    if oracle is None:
        with pytest.raises(Infeasible):
            solve_lp(c, A, b)
        return
    r = solve_lp(c, A, b)
    assert r.optimum == oracle
    assert all(dot(a, r.witness) <= bi for a, bi in zip(A, b))
    assert dot(c, r.witness) == r.optimum
