from math import factorial

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cmvlab.errors import ZeroRoot
from cmvlab.jets import (
    CircleMatrix,
    DiagonalCircle,
    GeneralMass,
    bell_matrix,
    ell_matrix,
    jet_values,
    mass_from_json,
    mass_pair,
    zero_mass,
)
from cmvlab.laurent import LaurentPoly, prepared_from_zeros


def ev(p):
    return lambda z, r: p(z, r)


def test_jet_examples(L_simple, L_double):
    assert np.allclose(jet_values(ev(LaurentPoly.monomial(1, 1.0)), L_simple), [2, 0.5])
    assert np.allclose(jet_values(ev(LaurentPoly.monomial(2, 1.0)), L_double), [4, 4])
    assert np.allclose(jet_values(L_double, L_double), 0)


def test_ell_examples(L_simple, L_double):
    # oracle: L_[1](2) = 3/4, L_[2](1/2) = -3; for the double zero L_[1] = 1/z
    assert np.allclose(ell_matrix(L_simple), np.diag([0.75, -3]))
    assert np.allclose(ell_matrix(L_double), [[0, 0.5], [0.5, -0.25]])


def test_bell():
    assert np.allclose(bell_matrix(1.0, 1), [[1]])
    assert np.allclose(bell_matrix(1.0, 2), [[1, 0], [0, -1]])
    with pytest.raises(ZeroRoot):
        bell_matrix(0, 2)


@settings(max_examples=25, deadline=None)
@given(st.complex_numbers(min_magnitude=0.4, max_magnitude=2.5, allow_nan=False, allow_infinity=False))
def test_bell_chain_rule(zeta):
    # d^k/dz^k g(1/z) = sum_j g^(j)(1/z) B[k, j], with g(w) = w^2 + 3w^-1
    g = LaurentPoly.from_dict({2: 1.0, -1: 3.0})
    h = LaurentPoly.from_dict({-2: 1.0, 1: 3.0})  # g(1/z)
    B = bell_matrix(zeta, 3)
    for k in range(3):
        want = h(zeta, k)
        got = sum(g(1 / zeta, j) * B[k, j] for j in range(3))
        assert abs(got - want) <= 1e-12 * (1 + abs(want))


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000))
def test_jet_linearity(seed):
    r = np.random.default_rng(seed)
    L = prepared_from_zeros(1, [(2, 2), (0.5 + 0.5j, 1), (-3, 1)])
    p = LaurentPoly.from_dict({k: complex(*r.normal(size=2)) for k in range(-2, 3)})
    q = LaurentPoly.from_dict({k: complex(*r.normal(size=2)) for k in range(-3, 2)})
    a, b = complex(*r.normal(size=2)), complex(*r.normal(size=2))
    lhs = jet_values(ev(p * a + q * b), L)
    assert np.allclose(lhs, a * jet_values(ev(p), L) + b * jet_values(ev(q), L))
    # a function carrying the full multiplicity of each zero has a vanishing jet
    assert np.allclose(jet_values(ev(L.poly * p), L), 0, atol=1e-9)


def test_zero_and_identity_mass(L_simple):
    p = LaurentPoly.from_dict({0: 1.0, 1: 2.0})
    vals = lambda z, o: np.array([p(z, o)])
    assert np.allclose(mass_pair(zero_mass(L_simple), vals), 0)
    gm = CircleMatrix(np.eye(2)).to_general(L_simple, 2)
    assert np.allclose(mass_pair(gm, vals)[0], jet_values(ev(p), L_simple))


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000))
def test_diagonal_expansion(seed):
    r = np.random.default_rng(seed)
    zeta = complex(*r.uniform(0.5, 2, 2))
    m = 3
    xi = tuple(complex(*r.normal(size=2)) for _ in range(m))
    L = prepared_from_zeros(1, [(zeta, m), (-2.0, 1)])
    M1 = LaurentPoly.from_dict({k: complex(*r.normal(size=2)) for k in range(-2, 3)})
    M2 = LaurentPoly.from_dict({k: complex(*r.normal(size=2)) for k in range(-2, 3)})
    M2s = M2.bar()
    M2s = LaurentPoly.from_dict({-k: c for k, c in M2s.terms})  # conj-coefficient poly at 1/z
    # direct: sum_l xi_l / l! (M1 M2_*)^(l)(zeta)
    want = sum(xi[l] * (M1 * M2s)(zeta, l) / factorial(l) for l in range(m))
    Xi = DiagonalCircle((xi, (0,))).to_circle_matrix(L).Xi
    J1 = np.array([M1(zeta, n) / factorial(n) for n in range(m)])
    J2 = np.array([M2.bar()(1 / zeta, j) / factorial(j) for j in range(m)])
    assert abs(J1 @ Xi[:m, :m] @ J2 - want) <= 1e-10 * (1 + abs(want))
    # the same through the side-2 general functionals
    gm = CircleMatrix(Xi).to_general(L, 2)
    row = mass_pair(gm, lambda z, o: np.array([M1(z, o)]))[0]
    assert abs(row[:m] @ J2 - want) <= 1e-10 * (1 + abs(want))


def test_mass_json_round_trip(L_double):
    for mass in (CircleMatrix(np.array([[0.1, 0.2j], [0, 0.05]])), DiagonalCircle(((0.3, 0.1),)),
                 GeneralMass((((2.0, 1, 0.5),), ()))):
        back = mass_from_json(mass.to_json())
        a = mass_pair(mass if isinstance(mass, GeneralMass) else mass.to_general(L_double, 2),
                      lambda z, o: np.array([z ** 3 if o == 0 else 3 * z ** 2 if o == 1 else 6 * z]))
        b = mass_pair(back if isinstance(back, GeneralMass) else back.to_general(L_double, 2),
                      lambda z, o: np.array([z ** 3 if o == 0 else 3 * z ** 2 if o == 1 else 6 * z]))
        assert np.allclose(a, b)
