import pytest

from banach_forge.category import KArrow, coordinate_arrow, l1_chain, linf_chain, trivial_chain, chain_of
from banach_forge.errors import BadInput, BadSeedIsometry, ChainInvalid, HypothesisFailed
from banach_forge.fraisse import ComplexityBudget, GenericRun, audit_run, extend_generic
from banach_forge.rational import Matrix, Q
from banach_forge.spaces import Operator, PolyBanachSpace, lower_isometry_bound
from banach_forge.universal import back_and_forth, embed_chain, extend_property_E, one_step_improve, schedule

CAP = ComplexityBudget(3, 2)
HALF = Q(1, 2)


@pytest.fixture(scope="module")
def run():
    return extend_generic(GenericRun.fresh(0, CAP), 6)


def test_trivial_chain_ladder(run):
    lad = embed_chain(run, trivial_chain(3), 3)
    assert lad.certificate.ok and lad.cauchy().ok
    assert list(lad.ks) == sorted(set(lad.ks))
    for c in lad.certificates:
        for name in ("(1)", "(2)", "(3)"):
            assert next(x for x in c.checks if x.name.startswith(name)).value == 0


@pytest.mark.parametrize("chain", [linf_chain(3), l1_chain(3)], ids=["linf", "l1"])
def test_chain_ladders(run, chain):
    lad = embed_chain(run, chain, 3)
    assert lad.certificate.ok
    assert lad.cauchy().ok
    for n, c in enumerate(lad.certificates):
        d1 = next(x for x in c.checks if x.name.startswith("(1)"))
        assert d1.bound == Q(1, 2 ** (n + 1)) and d1.value < d1.bound
        assert next(x for x in c.checks if x.name.startswith(f"e_{n + 1} isometric")).passed
    assert audit_run(lad.run).ok


def test_embed_chain_rejects_short_chain(run):
    with pytest.raises(ChainInvalid):
        embed_chain(run, linf_chain(1), 3)
    with pytest.raises(ChainInvalid):
        embed_chain(run, chain_of([PolyBanachSpace.cube(1), PolyBanachSpace.cube(2)]), 1)


def test_property_E_trivial_into_line(run):
    Z, L = PolyBanachSpace.trivial(), PolyBanachSpace.cube(1)
    ext = extend_property_E(run, coordinate_arrow(Z, L), Operator.zero(Z, run.stages[0]), HALF,
                            proj=Operator.zero(run.stages[0], Z), stage=0)
    assert ext.certificate.ok
    assert ext.stage > 0 and ext.g.codomain == ext.run.stages[ext.stage]


def test_property_E_identity_inclusion(run):
    n = 3
    U = run.stages[n]
    ext = extend_property_E(run, KArrow.identity(U), Operator.identity(U), HALF, proj=Operator.identity(U), stage=n)
    assert ext.certificate.ok and ext.stage == n
    assert ext.certificate.value("||g|E - i||") == 0 and ext.g.matrix == Matrix.identity(U.dim)


def test_property_E_line_in_plane(run):
    n, N = 1, run.top
    E = run.stages[n]
    F = PolyBanachSpace.from_points([v + (0,) for v in E.vertices] + [(0, 1)])
    b = run.bond(n, N)
    ext = extend_property_E(run, coordinate_arrow(E, F), b.embed, Q(1, 4), proj=b.proj, stage=N)
    assert ext.certificate.ok
    assert ext.certificate.value("||t g - g||") <= Q(1, 4)


def test_property_E_needs_projection(run):
    U = run.stages[2]
    with pytest.raises(BadInput):
        extend_property_E(run, KArrow.identity(U), Operator.identity(U), HALF)


def test_property_E_monotone_in_eps(run):
    n, N = 1, run.top
    E = run.stages[n]
    F = PolyBanachSpace.from_points([v + (0,) for v in E.vertices] + [(HALF, 1)])
    b = run.bond(n, N)
    prev = None
    for eps in (HALF, Q(1, 4), Q(1, 8)):
        ext = extend_property_E(run, coordinate_arrow(E, F), b.embed, eps, proj=b.proj, stage=N)
        d = ext.certificate.value("||g|E - i||")
        assert prev is None or d <= prev
        prev = d


def _stage_pair(run, n):
    b = run.bond(n, run.top)
    E = run.stages[n]
    F = PolyBanachSpace.from_points([v + (0,) for v in E.vertices] + [(0,) * E.dim + (1,)])
    return b, coordinate_arrow(E, F)


def test_one_step_isometric_input(run):
    b, EF = _stage_pair(run, 2)
    ext = one_step_improve(run, EF, b.embed, HALF, HALF, back=b.proj, stage=run.top)
    assert ext.certificate.ok


def test_one_step_strictly_improves(run):
    eps = HALF
    b, EF = _stage_pair(run, 2)
    f = b.embed.scale(1 - eps / 2)
    assert lower_isometry_bound(f) == 1 - eps / 2
    ext = one_step_improve(run, EF, f, eps, eps / 4, back=b.proj, stage=run.top)
    assert ext.certificate.ok
    assert ext.certificate.value("lower_isometry_bound(g)") >= 1 - eps / 4 > lower_isometry_bound(f)
    assert ext.certificate.value("||g|E - i||") < eps


def test_one_step_same_domain(run):
    eps = HALF
    b = run.bond(2, run.top)
    E = run.stages[2]
    f = b.embed.scale(1 - eps / 2)
    ext = one_step_improve(run, KArrow.identity(E), f, eps, eps / 4, back=b.proj, stage=run.top)
    assert ext.certificate.ok and ext.certificate.value("lower_isometry_bound(g)") >= 1 - eps / 4


def test_one_step_hypothesis_failure(run):
    b, EF = _stage_pair(run, 2)
    with pytest.raises(HypothesisFailed) as info:
        one_step_improve(run, EF, b.embed.scale(Q(3, 8)), HALF, Q(1, 4), back=b.proj, stage=run.top)
    assert info.value.value == Q(5, 8)
    with pytest.raises(BadInput):
        one_step_improve(run, EF, b.embed, HALF, HALF)


def test_schedule():
    s = schedule(HALF, 4)
    assert s == (Q(1, 4), Q(1, 32), Q(1, 64), Q(1, 128), Q(1, 256))
    assert 2 * sum(s[1:]) + 2 * s[-1] < HALF - s[0]


@pytest.fixture(scope="module")
def two_runs():
    return (extend_generic(GenericRun.fresh(1, CAP), 4), extend_generic(GenericRun.fresh(2, CAP), 4))


def test_back_and_forth_trivial_seed(two_runs):
    P, K = two_runs
    h = Operator.zero(P.stages[0], K.stages[0])
    st = back_and_forth(P, K, h, HALF, 2)
    assert st.certificate.ok
    assert st.drift() < st.eps - st.eps0
    dims_a = [st.runP.stages[k].dim for k in st.a_idx]
    dims_b = [st.runK.stages[k].dim for k in st.b_idx]
    assert dims_a == sorted(set(dims_a)) and dims_b == sorted(set(dims_b))


def test_back_and_forth_same_run_identity(run):
    U = run.stages[1]
    st = back_and_forth(run, run, Operator.identity(U), HALF, 2, a=1, b=1)
    assert st.certificate.ok and st.drift() == 0


def test_back_and_forth_is_deterministic(two_runs):
    P, K = two_runs
    h = Operator.zero(P.stages[0], K.stages[0])
    s1, s2 = back_and_forth(P, K, h, HALF, 2), back_and_forth(P, K, h, HALF, 2)
    assert [f.matrix for f in s1.fs] == [f.matrix for f in s2.fs]
    assert [g.matrix for g in s1.gs] == [g.matrix for g in s2.gs]
    assert s1.a_idx == s2.a_idx and s1.b_idx == s2.b_idx


def test_back_and_forth_rejects_non_isometry(run):
    U = run.stages[1]
    with pytest.raises(BadSeedIsometry):
        back_and_forth(run, run, Operator.identity(U).scale(HALF), HALF, 1, a=1, b=1)
