from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cmvlab import _arith as ar
from cmvlab.errors import QuasidefiniteViolation
from cmvlab.functional import bernstein_szego, gram, lebesgue, one_plus_cos, one_plus_cos_moments
from cmvlab.gaussborel import (
    abc_kernel,
    biorthogonality_matrix,
    biorthogonality_residual,
    cd_kernel,
    factorize,
    phi,
)

F = Fraction


def test_identity_gram():
    s = factorize(gram(lebesgue(), 6))
    assert np.allclose(s.S1, np.eye(6)) and np.allclose(s.S2, np.eye(6))
    assert np.allclose(s.H, 1)
    assert phi(s, 1, 3, 2.0) == pytest.approx(0.25)


def test_two_by_two_exact():
    # oracle: hand elimination of [[1, 1/2], [1/2, 1]]
    G = ar.exact_array([[1, F(1, 2)], [F(1, 2), 1]])
    s = factorize(G)
    assert list(s.H) == [ar.exact(1), ar.exact(F(3, 4))]
    assert list(s.S1[1]) == [ar.exact(F(-1, 2)), ar.exact(1)]
    assert list(s.S2[1]) == [ar.exact(F(-1, 2)), ar.exact(1)]
    assert phi(s.to_double(), 1, 1, 2.0) == pytest.approx(0.5 - 0.5)


def test_vanishing_minor():
    with pytest.raises(QuasidefiniteViolation) as exc:
        factorize(np.array([[0, 1], [1, 0]], dtype=complex))
    assert exc.value.index == 0


def test_reconstruct():
    G = gram(bernstein_szego(0.5), 10).data
    assert np.allclose(factorize(G).reconstruct(), G)


def test_kernels_lebesgue():
    s = factorize(gram(lebesgue(), 6))
    assert cd_kernel(s, 1, 0.3, 2.0) == pytest.approx(1)
    assert cd_kernel(s, 3, 1, 1) == pytest.approx(3)
    z1, z2 = 0.7 + 0.2j, -1.3j
    assert cd_kernel(s, 2, z1, z2) == pytest.approx(1 + np.conj(1 / z1) / z2)


@pytest.mark.parametrize("spec", [lebesgue(), one_plus_cos(), bernstein_szego(0.5)])
def test_biorthogonality(spec):
    s = factorize(gram(spec, 12))
    assert biorthogonality_residual(spec, s) < 1e-12


def test_biorthogonality_exact():
    spec = one_plus_cos_moments(True)
    s = factorize(gram(spec, 6, exact=True))
    assert biorthogonality_matrix(spec, s).max() == 0


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10), st.integers(0, 10_000))
def test_abc_equals_cd(l, seed):
    r = np.random.default_rng(seed)
    G = gram(one_plus_cos(), 12)
    s = factorize(G)
    z1, z2 = r.uniform(0.5, 1.5, 2) * np.exp(1j * r.uniform(0, 6.3, 2))
    k = cd_kernel(s, l, z1, z2)
    assert abs(k - abc_kernel(G, l, z1, z2)) < 1e-10 * (1 + abs(k))


@settings(max_examples=15, deadline=None)
@given(st.integers(2, 8), st.integers(0, 10_000))
def test_random_hermitian_positive(n, seed):
    r = np.random.default_rng(seed)
    A = r.normal(size=(n, n)) + 1j * r.normal(size=(n, n))
    G = A @ A.conj().T + n * np.eye(n)
    s = factorize(G)
    assert np.allclose(s.reconstruct(), G)
    assert np.allclose(s.S1, s.S2)
    assert np.all(np.real(s.H) > 0)
