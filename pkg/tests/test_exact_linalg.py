from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import sympy_nullity
from stlab.errors import StructuralError
from stlab.exact_linalg import (CommutatorMap, FormPreservingMap, RationalMatrix, SubspaceBasis,
                                algebra_closure, common_kernel, coordinates, kernel,
                                linear_map_matrix, rref, solve, to_fraction)

J = RationalMatrix([[0, -1], [1, 0]])
PSI = RationalMatrix([[0, 1], [-1, 0]])


def apply(m: RationalMatrix, v):
    return [sum(m[i, j] * v[j] for j in range(m.cols)) for i in range(m.rows)]


def test_to_fraction_forms():
    assert to_fraction("3/6") == Fraction(1, 2)
    assert to_fraction(-4) == Fraction(-4)
    with pytest.raises(TypeError):
        to_fraction(0.5)


def test_matrix_is_canonical_and_immutable():
    m = RationalMatrix([["2/4", 1], [0, "-3/9"]])
    assert m[0, 0] == Fraction(1, 2) and m[1, 1] == Fraction(-1, 3)
    assert m.to_json() == [["1/2", "1"], ["0", "-1/3"]]
    with pytest.raises(AttributeError):
        m.rows = 3
    with pytest.raises(StructuralError):
        RationalMatrix([[1, 2], [3]])


def test_arithmetic():
    a = RationalMatrix([[1, 2], [3, 4]])
    assert a @ RationalMatrix.identity(2) == a
    assert (a - a).is_zero()
    assert a.T == RationalMatrix([[1, 3], [2, 4]])
    assert a * Fraction(1, 2) == RationalMatrix([["1/2", 1], ["3/2", 2]])
    assert RationalMatrix.from_flat([1, 2, 3, 4], 2) == a
    assert a.flatten() == tuple(Fraction(x) for x in (1, 2, 3, 4))


def test_kernel_examples():
    k = kernel(RationalMatrix([[1, 2], [2, 4]]))
    assert k.vectors == ((Fraction(-2), Fraction(1)),)
    assert kernel(RationalMatrix.identity(3)).dim == 0
    assert kernel(RationalMatrix.zeros(2)).dim == 2


def test_rref_first_nonzero_pivot():
    rows, piv = rref([[0, 2, 4], [1, 1, 1]])
    assert piv == [0, 1]
    assert rows == [[1, 0, -1], [0, 1, 2]]


def test_solve_and_coordinates():
    x = solve([[1, 1], [1, -1]], [3, 1])
    assert list(x) == [2, 1]
    assert solve([[1, 1], [1, 1]], [0, 1]) is None
    assert coordinates([(1, 0), (1, 1)], (3, 2)) == (1, 2)
    assert coordinates([(1, 0)], (0, 1)) is None


def test_algebra_closure_examples():
    assert algebra_closure([J], 2) == [RationalMatrix.identity(2), J]
    assert algebra_closure([], 2) == [RationalMatrix.identity(2)]
    e11 = RationalMatrix.unit(2, 0, 0)
    assert algebra_closure([e11], 2) == [RationalMatrix.identity(2), e11]
    e12 = RationalMatrix.unit(2, 0, 1)
    assert len(algebra_closure([e12, e12.T], 2)) == 4


def test_algebra_closure_is_closed():
    gens = [RationalMatrix([[1, 1, 0], [0, 1, 0], [0, 0, 2]]), RationalMatrix.unit(3, 2, 0)]
    basis = algebra_closure(gens, 3)
    span = SubspaceBasis(9, tuple(b.flatten() for b in basis))
    assert span.rank() == len(basis)
    for a in basis:
        for b in basis:
            assert span.contains((a @ b).flatten())


def test_common_kernel_examples():
    assert common_kernel([CommutatorMap(J, J), FormPreservingMap(PSI)], 2).dim == 1
    assert common_kernel([], 2).dim == 4
    units = [RationalMatrix.unit(2, i, j) for i in range(2) for j in range(2)]
    ck = common_kernel([CommutatorMap(b, b) for b in units], 2)
    assert ck.dim == 1 and ck.contains(RationalMatrix.identity(2).flatten())


def test_structured_maps_match_generic_matrix():
    a = RationalMatrix([[1, 2], ["1/3", 0]])
    b = RationalMatrix([[0, 1], [5, -1]])
    cm = CommutatorMap(a, b)
    assert cm.matrix_rows(2) == linear_map_matrix(cm, 2)
    fp = FormPreservingMap(PSI)
    assert fp.matrix_rows(2) == linear_map_matrix(fp, 2)


def test_common_kernel_accepts_plain_callables():
    sp = common_kernel([lambda x: x @ J - J @ x], 2)
    assert sp.same_span(SubspaceBasis(4, (RationalMatrix.identity(2).flatten(), J.flatten())))


small = st.fractions(min_value=-5, max_value=5, max_denominator=4)


@st.composite
def rational_matrices(draw):
    r = draw(st.integers(1, 5))
    c = draw(st.integers(1, 5))
    # sprinkle zeros so rank deficiency actually occurs
    entry = st.one_of(st.just(Fraction(0)), small)
    return RationalMatrix([[draw(entry) for _ in range(c)] for _ in range(r)])


@settings(max_examples=200, deadline=None)
@given(rational_matrices())
def test_kernel_rank_nullity(m):
    k = kernel(m)
    assert k.dim + m.rank() == m.cols
    assert k.dim == sympy_nullity(m.tolist())
    assert k.rank() == k.dim
    for v in k.vectors:
        assert all(x == 0 for x in apply(m, v))
