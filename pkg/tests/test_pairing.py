from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stlab.errors import InvalidPairingError
from stlab.exact_linalg import RationalMatrix, block_diag
from stlab.pairing import PolarizedSpace, direct_sum, is_isometry, similitude_factor

SP2 = PolarizedSpace.standard(2)
SP4 = PolarizedSpace.standard(4)


def test_standard_pairing():
    assert SP2.pairing == RationalMatrix([[0, 1], [-1, 0]])
    assert SP4.pairing.rank() == 4


def test_invalid_pairings():
    with pytest.raises(InvalidPairingError):
        PolarizedSpace(2, 1, RationalMatrix([[0, 1], [1, 0]]))
    with pytest.raises(InvalidPairingError):
        PolarizedSpace(2, 1, RationalMatrix.zeros(2))
    with pytest.raises(InvalidPairingError):
        PolarizedSpace(2, 2, SP2.pairing)
    with pytest.raises(InvalidPairingError):
        PolarizedSpace.standard(3)


def test_from_json_accepts_strings_and_flat():
    a = PolarizedSpace.from_json({"pairing": [["0", "1/2"], ["-1/2", "0"]]})
    b = PolarizedSpace.from_json({"n": 2, "pairing": [0, "1/2", "-1/2", 0], "weight": 3})
    assert a.pairing == b.pairing and b.weight == 3


def test_similitude_examples():
    assert similitude_factor(RationalMatrix.identity(2), SP2) == 1
    assert similitude_factor(RationalMatrix.identity(2) * 3, SP2) == 9
    assert similitude_factor(RationalMatrix([[2, 0], [0, 1]]), SP2) == 2
    assert is_isometry(RationalMatrix.identity(2), SP2)
    assert is_isometry(RationalMatrix([[1, 1], [0, 1]]), SP2)
    assert not is_isometry(RationalMatrix([[2, 0], [0, 1]]), SP2)


def test_non_similitude_has_no_factor():
    g = block_diag(RationalMatrix([[2, 0], [0, 1]]), RationalMatrix.identity(2))
    # on the 4-dim standard space this scales the two hyperbolic planes differently
    assert similitude_factor(g, SP4) is None
    assert not is_isometry(g, SP4)


def test_power_and_direct_sum():
    p2 = SP2.power(2)
    assert p2.n == 4 and p2.pairing == block_diag(SP2.pairing, SP2.pairing)
    assert direct_sum(SP2, SP2) == p2


rationals = st.fractions(min_value=-20, max_value=20, max_denominator=12)


@settings(max_examples=100, deadline=None)
@given(rationals)
def test_chi_of_scalar(alpha):
    assert similitude_factor(RationalMatrix.identity(4) * alpha, SP4) == alpha * alpha


# generators of GSp_4(Q): elementary symplectic transvections, a similitude of
# multiplier c, and the standard form itself
def _catalog(c: Fraction):
    h = 2
    out = [SP4.pairing]
    for i in range(h):
        for j in range(h):
            e = [[0] * 4 for _ in range(4)]
            e[i][h + j] += 1
            e[j][h + i] += 1
            out.append(RationalMatrix.identity(4) + RationalMatrix(e))
    out.append(RationalMatrix([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, c, 0], [0, 0, 0, c]]))
    return out


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(0, 5), min_size=1, max_size=4),
       st.lists(st.integers(0, 5), min_size=1, max_size=4),
       rationals.filter(lambda x: x != 0))
def test_chi_multiplicative(word_g, word_h, c):
    cat = _catalog(c)
    g = RationalMatrix.identity(4)
    for i in word_g:
        g = g @ cat[i]
    h = RationalMatrix.identity(4)
    for i in word_h:
        h = h @ cat[i]
    cg, ch = similitude_factor(g, SP4), similitude_factor(h, SP4)
    assert cg is not None and ch is not None
    assert similitude_factor(g @ h, SP4) == cg * ch
    assert is_isometry(g, SP4) == (cg == 1)
