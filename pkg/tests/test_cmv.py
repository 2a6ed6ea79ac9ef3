import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cmvlab.cmv import chi, cmv_exponent, cmv_index, from_cmv, laurent_of_upsilon, multiplication_matrix, to_cmv, upsilon
from cmvlab.errors import ZeroArgument
from cmvlab.laurent import LaurentPoly


def test_exponent_map():
    assert [cmv_exponent(l) for l in range(6)] == [0, -1, 1, -2, 2, -3]
    assert cmv_exponent(4) == 2


@given(st.integers(-500, 500))
def test_index_inverse(e):
    assert cmv_exponent(cmv_index(e)) == e


def test_chi_values():
    assert np.allclose(chi(2, 3), [1, 0.5, 2])
    assert np.allclose(chi(1, 4), [1, 1, 1, 1])
    assert np.allclose(chi(2, 2, 1), [0, -0.25])
    with pytest.raises(ZeroArgument):
        chi(0, 3)


def test_upsilon_orthogonal():
    U = upsilon(40).data
    inner = (U @ U.T)[:30, :30]
    assert np.allclose(inner, np.eye(30))
    assert np.all(np.isreal(U))


@settings(max_examples=25, deadline=None)
@given(st.complex_numbers(min_magnitude=0.5, max_magnitude=2, allow_nan=False, allow_infinity=False))
def test_upsilon_shift(z):
    M = 12
    U = upsilon(M + 2).data
    v = chi(z, M + 2)
    assert np.allclose((U @ v)[:M], z * v[:M])


def test_laurent_of_upsilon_matches_multiplication():
    L = LaurentPoly.from_dict({1: 1, 0: -2.5, -1: 1})
    assert np.allclose(laurent_of_upsilon(LaurentPoly.constant(1.0), 5).data, np.eye(5))
    A = laurent_of_upsilon(L, 10).data
    B = multiplication_matrix(L, 10, 10)
    assert np.allclose(A, B)


def test_round_trip_coefficients():
    p = LaurentPoly.from_dict({-2: 1, 0: 3, 1: -1j})
    row = to_cmv(p, 6)
    assert from_cmv(row).coeffs == p.coeffs
