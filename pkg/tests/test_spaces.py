import pytest
from hypothesis import given, strategies as st

from banach_forge.errors import DegenerateSpace, DimensionMismatch
from banach_forge.rational import Matrix, Q, vadd, vscale
from banach_forge.spaces import (Operator, PolyBanachSpace, is_eps_isometry, is_isometric_embedding,
                                 is_one_bounded, lower_isometry_bound, norm, norm_with_witness, op_norm)
from generators import random_matrix, random_space, rat, rng_for
from oracles import brute_facets, facet_norm

LINF2 = PolyBanachSpace.cube(2)


def test_linf_norm():
    assert norm(LINF2, (Q(1, 2), Q(1, 3))) == Q(1, 2)
    assert norm(LINF2, (0, 0)) == 0


def test_norm_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        norm(LINF2, (1,))


def test_degenerate_ball_rejected():
    with pytest.raises(DegenerateSpace):
        PolyBanachSpace.from_points([(1, 1)], dim=2)


def test_ball_is_symmetric():
    X = PolyBanachSpace.from_points([(1, 0), (Q(1, 2), 1)])
    assert set(X.vertices) == {tuple(-c for c in v) for v in X.vertices}


@pytest.mark.parametrize("seed", range(40))
def test_norm_matches_facet_oracle(seed):
    rng = rng_for("norm", seed)
    X = random_space(rng, rng.choice((2, 3)))
    facets = brute_facets(X.vertices, X.dim)
    for _ in range(5):
        x = tuple(rat(rng) for _ in range(X.dim))
        oracle = facet_norm(facets, x)
        assert norm_with_witness(X, x)[0] == oracle
        assert norm(X, x) == oracle


def test_identity_and_zero_operator_norms():
    X = PolyBanachSpace.from_points([(1, 0), (Q(1, 2), 1)])
    assert op_norm(Operator.identity(X)) == 1
    assert op_norm(Operator.zero(X, LINF2)) == 0
    assert lower_isometry_bound(Operator.identity(X)) == 1


def test_half_scaling():
    half = Operator(LINF2, LINF2, Matrix.identity(2).scale(Q(1, 2)))
    assert lower_isometry_bound(half) == Q(1, 2)
    assert not is_eps_isometry(half, Q(1, 4))
    assert is_eps_isometry(half, Q(1, 2))
    assert is_eps_isometry(Operator.identity(LINF2), 0)


def test_eps_isometry_false_when_not_one_bounded():
    double = Operator(LINF2, LINF2, Matrix.identity(2).scale(2))
    assert not is_one_bounded(double) and not is_eps_isometry(double, 1)


@pytest.mark.parametrize("seed", range(6))
def test_op_norm_sampling_oracle(seed):
    rng = rng_for("opnorm", seed)
    X, Y = random_space(rng, 2), random_space(rng, rng.choice((1, 2, 3)))
    T = Operator(X, Y, random_matrix(rng, Y.dim, 2))
    exact = op_norm(T)
    fx, fy = brute_facets(X.vertices, 2), brute_facets(Y.vertices, Y.dim)
    best = Q(0)
    for _ in range(10_000):
        x = (rat(rng, den=50), rat(rng, den=50))
        nx = facet_norm(fx, x)
        if nx:
            best = max(best, facet_norm(fy, T.matrix.apply(x)) / nx)
    assert best <= exact
    assert max(facet_norm(fy, T.matrix.apply(v)) for v in X.vertices) == exact


@pytest.mark.parametrize("seed", range(6))
def test_lower_bound_grid_oracle(seed):
    rng = rng_for("lib", seed)
    X, Y = random_space(rng, 2), random_space(rng, rng.choice((2, 3)))
    T = Operator(X, Y, random_matrix(rng, Y.dim, 2))
    lib = lower_isometry_bound(T)
    fx, fy = brute_facets(X.vertices, 2), brute_facets(Y.vertices, Y.dim)
    N, grid_min, step = 40, None, Q(0)
    for a in fx:
        face = [v for v in X.vertices if sum(p * q for p, q in zip(a, v)) == 1]
        u, w = face[0], face[-1]
        step = max(step, facet_norm(fx, tuple(p - q for p, q in zip(u, w))) / N)
        for k in range(N + 1):
            x = vadd(vscale(Q(k, N), u), vscale(1 - Q(k, N), w))
            val = facet_norm(fy, T.matrix.apply(x))
            grid_min = val if grid_min is None else min(grid_min, val)
    assert lib <= grid_min
    assert grid_min - lib <= op_norm(T) * step / 2
    assert all(lib <= facet_norm(fy, T.matrix.apply(v)) for v in X.vertices)


@given(st.integers(0, 10_000), st.fractions(-3, 3, max_denominator=5))
def test_norm_axioms(seed, lam):
    rng = rng_for("axioms", seed)
    X = random_space(rng, rng.choice((1, 2, 3)))
    x = tuple(rat(rng) for _ in range(X.dim))
    y = tuple(rat(rng) for _ in range(X.dim))
    lam = Q(lam.numerator, lam.denominator)
    assert norm(X, vscale(lam, x)) == abs(lam) * norm(X, x)
    assert norm(X, vadd(x, y)) <= norm(X, x) + norm(X, y)
    assert (norm(X, x) == 0) == all(c == 0 for c in x)


@given(st.integers(0, 10_000))
def test_submultiplicative_and_lower_bound(seed):
    rng = rng_for("submult", seed)
    X, Y, Z = (random_space(rng, rng.choice((1, 2))) for _ in range(3))
    S = Operator(Y, Z, random_matrix(rng, Z.dim, Y.dim))
    T = Operator(X, Y, random_matrix(rng, Y.dim, X.dim))
    assert op_norm(S @ T) <= op_norm(S) * op_norm(T)
    assert lower_isometry_bound(T) <= op_norm(T)


def test_trivial_space_conventions():
    Z = PolyBanachSpace.trivial()
    e = Operator(Z, LINF2, Matrix.zeros(2, 0))
    assert op_norm(e) == 0 and lower_isometry_bound(e) == 1
    assert is_isometric_embedding(Operator.identity(LINF2))
