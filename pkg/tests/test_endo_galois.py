import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from stlab.endo_galois import (EndAlgebra, GaloisTwistGroup, frobenius_class, is_ramified,
                               kronecker_odd, validate_action)
from stlab.errors import RamifiedPrimeError, StructuralError, UnknownElementError, UnlabelableError
from stlab.exact_linalg import RationalMatrix

J = RationalMatrix([[0, -1], [1, 0]])
ID2 = RationalMatrix.identity(2)
CONJ = RationalMatrix([[1, 0], [0, -1]])


def gaussian():
    return EndAlgebra.generated_by([J], 2)


def test_algebra_structure_constants():
    d = gaussian()
    assert d.dim == 2 and d.basis[0] == ID2
    # J * J = -Id
    assert d.structure_constants[1][1] == (-1, 0)
    for i in range(d.dim):
        for j in range(d.dim):
            assert d.element(d.structure_constants[i][j]) == d.basis[i] @ d.basis[j]
    assert d.coords(J * 3 + ID2) == (1, 3)
    assert d.coords(RationalMatrix.unit(2, 0, 0)) is None


def test_algebra_rejects_bad_bases():
    with pytest.raises(StructuralError):
        EndAlgebra(2, [J])  # first element must be Id
    with pytest.raises(StructuralError):
        # E12 E21 = E11 is outside the span
        EndAlgebra(2, [ID2, RationalMatrix.unit(2, 0, 1), RationalMatrix.unit(2, 1, 0)])
    with pytest.raises(StructuralError):
        EndAlgebra(2, [ID2, ID2 * 2])


def test_validate_action_examples():
    d = gaussian()
    g = GaloisTwistGroup.multiquadratic([-1], (ID2, CONJ))
    assert validate_action(d, g) == []
    bad = GaloisTwistGroup.multiquadratic([-1], (ID2, RationalMatrix([[1, 0], [0, 2]])))
    report = validate_action(d, bad)
    assert any("automorphism" in r for r in report)
    triv = GaloisTwistGroup.trivial(d.dim)
    assert validate_action(d, triv) == []
    m2 = EndAlgebra.generated_by([RationalMatrix.unit(2, i, j) for i in range(2) for j in range(2)], 2)
    assert validate_action(m2, GaloisTwistGroup.trivial(4)) == []


def test_validate_action_dimension_mismatch():
    g = GaloisTwistGroup.multiquadratic([-1], (RationalMatrix.identity(3),) * 2)
    with pytest.raises(StructuralError):
        validate_action(gaussian(), g)


def test_validate_action_flags_non_homomorphism_and_identity():
    d = gaussian()
    g = GaloisTwistGroup.multiquadratic([-1], (CONJ, CONJ))
    report = validate_action(d, g)
    assert any("identity element" in r for r in report)
    assert any("homomorphism" in r for r in report)


def test_abstract_group_table_checked():
    t = ((0, 1, 2), (1, 2, 0), (2, 0, 1))
    g = GaloisTwistGroup(("e", "a", "b"), t, None, (RationalMatrix.identity(1),) * 3)
    assert validate_action(EndAlgebra.generated_by([], 1), g) == []
    broken = GaloisTwistGroup(("e", "a"), ((0, 1), (1, 1)), None, (RationalMatrix.identity(1),) * 2)
    assert validate_action(EndAlgebra.generated_by([], 1), broken)


def test_group_element_lookup():
    g = GaloisTwistGroup.multiquadratic([-1, 2])
    assert g.labels == ("id", "g1", "g2", "g1g2")
    assert g.mul("g1", "g2") == g.index("g1g2")
    assert g.inverse(3) == 3
    with pytest.raises(UnknownElementError):
        g.index("h")


def test_descriptor_validation():
    for bad in (0, 1, 4, -12):
        with pytest.raises(StructuralError):
            GaloisTwistGroup.multiquadratic([bad])


def test_frobenius_class_examples():
    g = GaloisTwistGroup.multiquadratic([-1])
    assert frobenius_class(5, g) == "id"
    assert frobenius_class(7, g) == "g1"
    t = GaloisTwistGroup.trivial()
    assert all(frobenius_class(p, t) == "id" for p in (3, 5, 7, 11, 13))


def test_frobenius_class_errors():
    g = GaloisTwistGroup.multiquadratic([-3])
    with pytest.raises(RamifiedPrimeError):
        frobenius_class(3, g)
    with pytest.raises(RamifiedPrimeError):
        frobenius_class(2, g)
    abstract = GaloisTwistGroup(("e", "a"), ((0, 1), (1, 0)))
    with pytest.raises(UnlabelableError):
        frobenius_class(5, abstract)
    assert is_ramified(3, g) and not is_ramified(5, g)


@settings(max_examples=60, deadline=None)
@given(st.integers(-60, 60), st.sampled_from(list(sympy.primerange(3, 200))))
def test_kronecker_matches_sympy(d, p):
    expect = sympy.jacobi_symbol(d % p, p) if d % p else 0
    assert kronecker_odd(d, p) == expect


def test_frobenius_class_multiplicative_in_descriptor():
    g12 = GaloisTwistGroup.multiquadratic([-1, 5])
    g1 = GaloisTwistGroup.multiquadratic([-1])
    g2 = GaloisTwistGroup.multiquadratic([5])
    for p in sympy.primerange(7, 400):
        lab = frobenius_class(p, g12)
        a, b = frobenius_class(p, g1), frobenius_class(p, g2)
        expect = {("id", "id"): "id", ("g1", "id"): "g1", ("id", "g1"): "g2", ("g1", "g1"): "g1g2"}[(a, b)]
        assert lab == expect


def test_dirichlet_density():
    g = GaloisTwistGroup.multiquadratic([-1])
    primes = list(sympy.primerange(3, 10 ** 4))
    frac = sum(frobenius_class(p, g) == "id" for p in primes) / len(primes)
    assert abs(frac - 0.5) <= 0.02


def test_action_inverses():
    d = EndAlgebra.generated_by([J], 2)
    g = GaloisTwistGroup.multiquadratic([-1], (ID2, CONJ))
    for i in range(g.order):
        assert g.action(i) @ g.action(g.inverse(i)) == RationalMatrix.identity(d.dim)
