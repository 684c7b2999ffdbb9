import pytest

from banach_forge.category import KArrow, compose_k, verify_karrow
from banach_forge.errors import BudgetExhausted, NotOneBounded
from banach_forge.fraisse import (CAP_ENV, ComplexityBudget, GenericRun, audit_run, budget_for_epoch,
                                  effective_cap, enumerate_arrows, extend_generic, realize, verify_condition_A)
from banach_forge.rational import Matrix, Q
from banach_forge.spaces import Operator, PolyBanachSpace
from generators import random_karrow, rng_for

CAP = ComplexityBudget(3, 2)


@pytest.fixture(scope="module")
def run20():
    return extend_generic(GenericRun.fresh(0, CAP), 20)


def test_enumeration_from_trivial_stage():
    run = GenericRun.fresh(0, CAP)
    got = enumerate_arrows(run, 0, ComplexityBudget(1, 2))
    balls = {f.target.vertices for f in got}
    expect = {()} | {PolyBanachSpace.cube(1, r).vertices for r in (Q(1, 2), 1, 2)}
    assert balls == expect and len(got) == 4
    assert all(verify_karrow(f).ok for f in got)


def test_enumeration_is_deterministic(run20):
    b = ComplexityBudget(3, 2)
    for n in (0, 2, 4):
        a1, a2 = enumerate_arrows(run20, n, b), enumerate_arrows(run20, n, b)
        assert [(f.target, f.embed.matrix, f.proj.matrix) for f in a1] == \
               [(f.target, f.embed.matrix, f.proj.matrix) for f in a2]


def test_enumeration_includes_identity(run20):
    n = 3
    U = run20.stages[n]
    got = enumerate_arrows(run20, n, ComplexityBudget(U.dim, 2))
    assert any(f.same_as(KArrow.identity(U)) and f.target == U for f in got)


def test_enumeration_respects_budget(run20):
    b = ComplexityBudget(3, 2)
    for f in enumerate_arrows(run20, 2, b):
        assert f.target.dim <= 3 and b.admits_space(f.target)


def test_zero_steps_is_identity():
    run = GenericRun.fresh(3, CAP)
    assert extend_generic(run, 0) == run
    with pytest.raises(ValueError):
        extend_generic(run, -1)


def test_first_step_is_the_line():
    run = extend_generic(GenericRun.fresh(0, CAP), 1)
    assert run.stages[1].dim == 1
    b = run.bonds[0]
    assert b.embed.matrix.shape == (1, 0) and b.proj.matrix.shape == (0, 1)
    assert run.ledger[0].realized and run.ledger[0].realized_stage == 1


def test_run_audits_and_dims_grow(run20):
    assert len(run20.stages) == 21
    assert audit_run(run20).ok
    dims = [s.dim for s in run20.stages]
    assert dims == sorted(dims)
    for r in run20.ledger:
        if r.realized:
            assert r.certificate.ok


def test_completed_epochs_have_no_pending(run20):
    assert run20.completed_epochs
    for k, _ in run20.completed_epochs:
        rep = verify_condition_A(run20, budget_for_epoch(k, CAP))
        assert rep.pending == 0 and rep.realized > 0


def test_fairness(run20):
    for r in run20.ledger:
        if r.realized and r.origin == "enumerated":
            assert r.realized_step <= r.enqueued_step + r.queue_length


def test_realized_set_only_grows():
    b = ComplexityBudget(2, 2)
    run, prev = GenericRun.fresh(5, CAP), set()
    for _ in range(6):
        run = extend_generic(run, 2)
        cur = verify_condition_A(run, b).realized_set()
        assert prev <= cur
        prev = cur


def test_fresh_run_is_all_pending_or_frontier():
    rep = verify_condition_A(GenericRun.fresh(0, CAP), ComplexityBudget(1, 2))
    assert rep.realized == 0 and rep.pending + rep.frontier == len(rep.entries)


def test_determinism():
    a = extend_generic(GenericRun.fresh(11, CAP), 8)
    b = extend_generic(extend_generic(GenericRun.fresh(11, CAP), 5), 3)
    assert a == b


def test_realize_existing_bond(run20):
    n, N = 2, run20.top
    m, g, run = realize(run20, n, run20.bond(n, N))
    assert m == N and g.same_as(KArrow.identity(run20.stages[N])) and run.top == N


def test_realize_identity(run20):
    n = 4
    m, g, _ = realize(run20, n, KArrow.identity(run20.stages[n]))
    b = run20.bond(n, m)
    assert m > n and g.embed.matrix == b.embed.matrix and g.proj.matrix == b.proj.matrix


@pytest.mark.parametrize("n", [1, 3, 6])
def test_realize_new_arrow(run20, n):
    f = random_karrow(rng_for("realize", n), run20.stages[n], 1)
    m, g, run = realize(run20, n, f)
    gf = compose_k(f, g)
    assert m > n and gf.same_as(run.bond(n, m))
    assert audit_run(run).ok


def test_realize_rejects_invalid_arrow(run20):
    U = run20.stages[1]
    Y = PolyBanachSpace.cube(2)
    bad = KArrow(Operator(U, Y, Matrix([[2], [0]])), Operator(Y, U, Matrix([[Q(1, 2), 0]])))
    with pytest.raises(NotOneBounded):
        realize(run20, 1, bad)


def test_ladder_and_cap_env(monkeypatch):
    assert budget_for_epoch(0, CAP) == ComplexityBudget(1, 1)
    assert budget_for_epoch(1, CAP) == ComplexityBudget(2, 2)
    assert budget_for_epoch(5, CAP) == CAP
    monkeypatch.setenv(CAP_ENV, "2,1")
    assert effective_cap(CAP) == ComplexityBudget(2, 1)
    monkeypatch.delenv(CAP_ENV)
    assert effective_cap(CAP) == CAP


def test_budget_exhaustion_names_requirement():
    run = GenericRun.fresh(0, ComplexityBudget(1, 1))
    with pytest.raises(BudgetExhausted):
        extend_generic(run, 50)
