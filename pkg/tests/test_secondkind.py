import numpy as np
import pytest

from cmvlab.errors import DomainViolation, TailTooLarge
from cmvlab.functional import cauchy_pair, gram, lebesgue, lebesgue_plus_sobolev_mass, one_plus_cos
from cmvlab.gaussborel import cd_kernel, factorize
from cmvlab.laurent import LaurentPoly
from cmvlab.secondkind import c_pairing, c_series, mixed_kernel


@pytest.fixture(scope="module")
def leb():
    G = gram(lebesgue(), 30)
    return G, factorize(G)


def test_lebesgue_values(leb):
    G, s = leb
    u = lebesgue()
    assert c_series(s, G, 1, 0, 2) == pytest.approx(0.5)
    assert c_pairing(u, s, 1, 0, 2) == pytest.approx(0.5)
    assert abs(c_pairing(u, s, 1, 0, 0.5)) < 1e-14
    assert c_pairing(u, s, 2, 0, 2) == pytest.approx(0.5)
    # oracle: residue of w/(2w - 1) at 1/2
    assert c_series(s, G, 1, 2, 2) == pytest.approx(0.25)
    assert c_pairing(u, s, 1, 2, 2) == pytest.approx(0.25)


def test_domain(leb):
    G, s = leb
    with pytest.raises(DomainViolation):
        c_series(s, G, 1, 0, 1.0)


def test_tail_detection():
    G = gram(one_plus_cos(), 6)
    with pytest.raises(TailTooLarge):
        c_series(factorize(G), G, 1, 0, 1.05)


@pytest.mark.parametrize("family", [1, 2])
def test_series_equals_pairing(family):
    spec = one_plus_cos()
    G = gram(spec, 40)
    s = factorize(G)
    for z in (3, 3j, -3, 0.3, -0.25j):
        for k in range(13):
            a, b = c_series(s, G, family, k, z), c_pairing(spec, s, family, k, z)
            assert abs(a - b) < 1e-8 * (1 + abs(b))


def test_derivative_finite_difference():
    spec = lebesgue_plus_sobolev_mass()
    s = factorize(gram(spec, 10))
    z, h = 2.3 - 0.5j, 1e-5
    fd = (c_pairing(spec, s, 1, 4, z + h) - c_pairing(spec, s, 1, 4, z - h)) / (2 * h)
    assert c_pairing(spec, s, 1, 4, z, order=1) == pytest.approx(fd, rel=1e-6)


def test_mixed_kernel(leb):
    G, s = leb
    u = lebesgue()
    assert mixed_kernel(s, u, "phi,C", 1, 0.7, 2) == pytest.approx(0.5)
    assert mixed_kernel(s, u, "C,phi", 0, 2, 0.7) == 0


def test_mixed_kernel_is_cauchy_of_cd():
    spec = one_plus_cos()
    s = factorize(gram(spec, 12))
    x1, x2 = 0.8 + 0.3j, 1.9 - 0.4j
    for l in (1, 4, 9):
        # the CD kernel as a Laurent polynomial in its second slot
        a = np.conj([complex(s.poly(2, k)(x1)) / s.H[k] for k in range(l)])
        K = sum((s.poly(1, k) * complex(a[k]) for k in range(1, l)), s.poly(1, 0) * complex(a[0]))
        assert K(0.4 + 1j) == pytest.approx(cd_kernel(s, l, x1, 0.4 + 1j))
        assert mixed_kernel(s, spec, "phi,C", l, x1, x2) == pytest.approx(cauchy_pair(spec, K, x2), rel=1e-10)
    assert isinstance(K, LaurentPoly)
