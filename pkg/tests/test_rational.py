import pytest
from hypothesis import given, strategies as st

from banach_forge.errors import ParseError
from banach_forge.rational import Matrix, Q, fmt, parse_rational

rationals = st.fractions(min_value=-5, max_value=5, max_denominator=6).map(lambda f: Q(f.numerator, f.denominator))


def matrices(rows, cols):
    return st.lists(st.lists(rationals, min_size=cols, max_size=cols), min_size=rows, max_size=rows).map(
        lambda r: Matrix(r, ncols=cols))


def test_lowest_terms():
    x = Q(6, -4)
    assert (x.numerator, x.denominator) == (-3, 2)


def test_parse_and_format_round_trip():
    assert parse_rational("-3/6") == Q(-1, 2)
    assert fmt(Q(-1, 2)) == "-1/2"
    assert fmt(Q(4)) == "4"


@pytest.mark.parametrize("bad", ["0.5", "1/0", "abc", "", "1e3"])
def test_parse_rejects(bad):
    with pytest.raises(ParseError):
        parse_rational(bad)


def test_floats_rejected():
    with pytest.raises((TypeError, ValueError)):
        Q(0.5)


@given(st.integers(1, 3).flatmap(lambda n: matrices(n, n)))
def test_inverse(A):
    n = A.nrows
    if A.rank() < n:
        with pytest.raises(Exception):
            A.inverse()
    else:
        assert A @ A.inverse() == Matrix.identity(n)
        assert A.inverse() @ A == Matrix.identity(n)


@given(st.tuples(st.integers(1, 3), st.integers(1, 4)).flatmap(lambda s: matrices(*s)))
def test_rank_nullity(A):
    K, free = A.nullspace()
    assert A.rank() + len(free) == A.ncols
    assert (A @ K).is_zero()
    if free:
        assert K.rank() == len(free)


@given(matrices(2, 3), matrices(3, 2), matrices(2, 2))
def test_matmul_associative(A, B, C):
    assert (A @ B) @ C == A @ (B @ C)
