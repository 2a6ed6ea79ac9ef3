from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cmvlab import _arith as ar
from cmvlab.errors import SupportCollision
from cmvlab.functional import (
    Atom,
    PointMasses,
    bernstein_szego,
    cauchy_pair,
    divide,
    divide_by_residues,
    from_config,
    gram,
    lebesgue,
    lebesgue_moments,
    lebesgue_plus_sobolev_mass,
    multiply,
    one_plus_cos,
    one_plus_cos_moments,
    pair,
    uniform_segment,
)
from cmvlab.laurent import LaurentPoly

z = LaurentPoly.monomial


def test_lebesgue_pairings():
    u = lebesgue()
    assert pair(u, z(3), z(3)) == pytest.approx(1)
    assert abs(pair(u, z(2), z(3))) < 1e-14


def test_one_plus_cos_pairing():
    # oracle: sympy integral of (1 + cos t) e^{-it} / 2pi = 1/2
    assert pair(one_plus_cos(), z(0), z(1)) == pytest.approx(0.5)


def test_gram_examples():
    assert np.allclose(gram(lebesgue(), 4).data, np.eye(4))
    assert np.allclose(gram(one_plus_cos(), 2).data, [[1, 0.5], [0.5, 1]])
    atom = PointMasses((Atom(2.0),))
    assert np.allclose(gram(atom, 2).data, [[1, 0.5], [0.5, 0.25]])


def test_exact_moments_match_density():
    G = gram(one_plus_cos_moments(True), 9, exact=True).data
    assert np.allclose(ar.to_complex_array(G), gram(one_plus_cos(), 9).data, atol=1e-14)
    G = gram(lebesgue_moments(True), 5, exact=True).data
    assert all(G[i, j] == ar.exact(int(i == j)) for i in range(5) for j in range(5))


def test_cauchy_lebesgue():
    one = LaurentPoly.constant(1.0)
    assert cauchy_pair(lebesgue(), one, 2) == pytest.approx(0.5)
    assert abs(cauchy_pair(lebesgue(), one, 0.5)) < 1e-14
    with pytest.raises(SupportCollision):
        cauchy_pair(lebesgue(), one, 1.0)


def _trapezoid_cauchy(w, p, zz, n=4096):
    t = 2 * np.pi * np.arange(n) / n
    x = np.exp(1j * t)
    return np.mean(w(t) * 2 * np.pi * p(x) * np.conj(1 / (np.conj(zz) - x)))


@pytest.mark.parametrize("zz", [2.5, -1.7j, 0.3 + 0.2j, 0.6j])
@pytest.mark.parametrize("name", ["one_plus_cos", "bernstein_szego(0.5)"])
def test_cauchy_against_quadrature(name, zz):
    spec = from_config(name)
    p = LaurentPoly.from_dict({-2: 0.5, 1: 1j, 2: -1})
    assert cauchy_pair(spec, p, zz) == pytest.approx(_trapezoid_cauchy(spec.weight, p, zz), abs=1e-11)


def test_cauchy_derivative_by_finite_difference():
    spec = one_plus_cos()
    p = LaurentPoly.from_dict({-1: 1, 2: 0.3})
    zz, h = 2.2 + 0.4j, 1e-5
    fd = (cauchy_pair(spec, p, zz + h) - cauchy_pair(spec, p, zz - h)) / (2 * h)
    assert cauchy_pair(spec, p, zz, order=1) == pytest.approx(fd, rel=1e-6)


def test_first_slot_via_adjoint():
    spec = bernstein_szego(0.4)
    p = LaurentPoly.from_dict({1: 1, -1: 2j})
    zz = 1.8
    want = np.conj(cauchy_pair(spec.adjoint(), p, zz))
    assert cauchy_pair(spec, p, zz, side="first") == pytest.approx(want)


def test_real_line_segment():
    u = uniform_segment(1.0, 2.0)
    assert pair(u, z(1), z(0)) == pytest.approx(1.5)
    assert pair(u, z(-1), z(0)) == pytest.approx(np.log(2))
    with pytest.raises(SupportCollision):
        cauchy_pair(u, LaurentPoly.constant(1.0), 1.5)


def test_sobolev_adjoint_gram():
    spec = lebesgue_plus_sobolev_mass()
    G = gram(spec, 10).data
    assert not np.allclose(G, G.conj().T)
    assert np.allclose(gram(spec.adjoint(), 10).data, G.conj().T)


def test_divide_multiply_inverse():
    L = LaurentPoly.from_dict({1: 1, 0: -2.5, -1: 1})
    from cmvlab.laurent import prepared_from_zeros

    Lp = prepared_from_zeros(1, [(2, 1), (0.5, 1)])
    for side in (1, 2):
        back = multiply(divide(one_plus_cos(), Lp, side), Lp, side)
        assert np.allclose(gram(back, 8).data, gram(one_plus_cos(), 8).data, atol=1e-12)
    assert L.coeffs == Lp.poly.coeffs
    with pytest.raises(SupportCollision):
        divide(lebesgue(), prepared_from_zeros(1, [(1, 1), (0.5, 1)]))


@settings(max_examples=25, deadline=None)
@given(st.lists(st.complex_numbers(max_magnitude=2, allow_nan=False, allow_infinity=False), min_size=3, max_size=3),
       st.lists(st.complex_numbers(max_magnitude=2, allow_nan=False, allow_infinity=False), min_size=3, max_size=3))
def test_sesquilinearity(a, b):
    spec = bernstein_szego(0.5)
    p = LaurentPoly.from_dict({-1: a[0], 0: a[1], 1: a[2]})
    q = LaurentPoly.from_dict({-1: b[0], 0: b[1], 2: b[2]})
    c = 0.7 - 1.3j
    assert abs(pair(spec, p * c, q) - c * pair(spec, p, q)) < 1e-10 * (1 + abs(pair(spec, p, q)))
    assert abs(pair(spec, p, q * c) - np.conj(c) * pair(spec, p, q)) < 1e-10 * (1 + abs(pair(spec, p, q)))


def test_config_round_trip():
    for name in ("lebesgue", "one_plus_cos", "bernstein_szego(0.5)", "lebesgue_plus_sobolev_mass"):
        spec = from_config(name)
        again = from_config(spec.to_config())
        assert np.allclose(gram(spec, 6).data, gram(again, 6).data)
    with pytest.raises(ValueError):
        from_config("no_such_measure")


@pytest.mark.parametrize("side", [1, 2])
def test_residue_division_matches_quadrature(side):
    from cmvlab.laurent import prepared_from_zeros
    E = ar.exact
    L = prepared_from_zeros(E((2, 1)), [(E(2), 2), (E((Fraction(1, 3), Fraction(1, 4))), 1), (E((0, 3)), 1)], exact=True)
    D = divide_by_residues(one_plus_cos_moments(True), L, side)
    Ge = gram(D, 9, exact=True).data
    Gq = gram(divide(one_plus_cos(), L, side), 9).data
    assert np.abs(ar.to_complex_array(Ge) - Gq).max() < 1e-13
    # the adjoint form carries the conjugate transpose Gram
    Ga = gram(D.adjoint(), 9, exact=True).data
    assert (ar.conj(Ga).T == Ge).all()
