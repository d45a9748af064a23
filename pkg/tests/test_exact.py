from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from hilbheis.errors import FormatError
from hilbheis.exact import (
    LaurentPoly,
    RationalMatrix,
    format_rational,
    laurent_arith,
    parse_rational,
    solve_linear,
    truncated_series_quotient,
)

t, z, q = (LaurentPoly.var(v) for v in "tzq")
qinv = LaurentPoly.monomial(1, q=-1)


def test_parse_and_format_rationals():
    assert parse_rational("6/4") == Fraction(3, 2)
    assert parse_rational(-3) == -3
    assert format_rational(Fraction(4, 2)) == 2
    assert format_rational(Fraction(-1, 3)) == "-1/3"
    for bad in ["1.5", "1/0", True, 0.5, "x", "1/-2"]:
        with pytest.raises(FormatError):
            parse_rational(bad)


def test_laurent_examples():
    assert laurent_arith(1 - q, 1 - q, "mul") == 1 - 2 * q + q * q
    assert (qinv - 2 + q) * q == 1 - 2 * q + q ** 2
    assert (1 + t * z) ** 2 == 1 + 2 * t * z + t ** 2 * z ** 2
    assert laurent_arith(q, q, "sub").is_zero()


def test_no_zero_coefficients_stored():
    p = (1 + q) - q
    assert p == LaurentPoly.const(1)
    assert len(list(p.terms())) == 1


def test_negative_exponents_only_in_q():
    with pytest.raises(ValueError):
        LaurentPoly.monomial(1, t=-1)


def test_degree_queries():
    p = 3 * qinv + q ** 4 * t
    assert p.min_degree("q") == -1 and p.max_degree("q") == 4
    assert p.max_degree("t") == 1


def test_series_quotient_examples():
    got = truncated_series_quotient(LaurentPoly.const(1), (1 - z) * (1 - t * t * z), "z", 2)
    assert got == 1 + (1 + t ** 2) * z + (1 + t ** 2 + t ** 4) * z ** 2
    assert truncated_series_quotient(LaurentPoly.const(1), (1 - q) ** 2, "q", 3).to_list("q", 4) == [1, 2, 3, 4]
    assert truncated_series_quotient(q, (1 - q) ** 2, "q", 4).to_list("q", 5) == [0, 1, 2, 3, 4]


def test_series_quotient_requires_unit():
    with pytest.raises(ZeroDivisionError, match="not a unit for series division"):
        truncated_series_quotient(LaurentPoly.const(1), t + z, "z", 3)


def test_solve_linear_examples():
    s = solve_linear(RationalMatrix.identity(3), [1, 2, 3])
    assert s.solution == (1, 2, 3) and s.rank == 3 and s.consistent
    s = solve_linear(RationalMatrix.zeros(2, 2), [0, 0])
    assert s.consistent and s.rank == 0
    s = solve_linear(RationalMatrix([[1, 1], [2, 2]]), [1, 3])
    assert not s.consistent
    with pytest.raises(ValueError):
        solve_linear(RationalMatrix.identity(2), [1, 2, 3])


def test_matrix_shapes_are_explicit():
    m = RationalMatrix.zeros(0, 3)
    assert m.shape == (0, 3)
    assert (RationalMatrix.zeros(2, 0) @ m).shape == (2, 3)
    with pytest.raises(ValueError):
        RationalMatrix.identity(2) @ RationalMatrix.identity(3)


polys = st.dictionaries(
    st.tuples(st.integers(0, 2), st.integers(0, 2), st.integers(-2, 2)), st.integers(-4, 4), max_size=5
).map(lambda d: LaurentPoly.from_table(d, ("t", "z", "q")))


@given(polys, polys, polys)
def test_ring_axioms(a, b, c):
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a + b == b + a and a * b == b * a
    assert (a - b) + b == a


@given(polys, st.integers(0, 4))
def test_series_quotient_inverts_multiplication(a, order):
    den = 1 - z - 2 * t * z ** 2
    prod = (a * den).truncate("z", order + 5)
    back = truncated_series_quotient(prod, den, "z", order)
    assert back == a.truncate("z", order)


matrices = st.integers(1, 4).flatmap(
    lambda r: st.integers(1, 4).flatmap(
        lambda c: st.lists(st.lists(st.integers(-3, 3), min_size=c, max_size=c), min_size=r, max_size=r)
    )
)


@settings(max_examples=60)
@given(matrices)
def test_rank_and_nullspace_against_sympy(rows):
    A = RationalMatrix(rows)
    S = sympy.Matrix(rows)
    assert A.rank() == S.rank()
    ns = A.nullspace()
    assert len(ns) == A.cols - S.rank()
    for v in ns:
        assert all(x == 0 for x in A.matvec(v))


@settings(max_examples=60)
@given(matrices, st.data())
def test_solve_linear_residual(rows, data):
    A = RationalMatrix(rows)
    b = data.draw(st.lists(st.integers(-3, 3), min_size=A.rows, max_size=A.rows))
    sol = solve_linear(A, b)
    consistent = sympy.Matrix(rows).rank() == sympy.Matrix(rows).row_join(sympy.Matrix(b)).rank()
    assert sol.consistent == consistent
    if consistent:
        assert list(A.matvec(sol.solution)) == b


@given(matrices, matrices)
def test_matmul_against_sympy(r1, r2):
    A, B = RationalMatrix(r1), RationalMatrix(r2)
    if A.cols != B.rows:
        return
    assert (A @ B).tolist() == (sympy.Matrix(r1) * sympy.Matrix(r2)).tolist()
