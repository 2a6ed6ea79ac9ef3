import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cmvlab import _arith as ar
from cmvlab.errors import SingularLeadingBlock
from cmvlab.quasidet import BlockMatrix, theta_star


def test_examples():
    assert theta_star(BlockMatrix.build([[2]], [1], [4], [3])) == pytest.approx(1)
    bm = BlockMatrix.build(np.eye(2), [1, 1], [1, 1], [5])
    assert theta_star(bm) == pytest.approx(3)
    assert theta_star(bm, mode="det_quotient") == pytest.approx(3)


def test_empty_leading_block():
    bm = BlockMatrix.build(np.zeros((0, 0)), np.zeros((0, 1)), np.zeros((1, 0)), [7.0])
    assert theta_star(bm) == 7.0


def test_singular():
    with pytest.raises(SingularLeadingBlock):
        theta_star(BlockMatrix.build([[1, 2], [2, 4]], [1, 1], [1, 1], [0]))


def test_exact():
    A = ar.exact_array([[2, 1], [1, 3]])
    bm = BlockMatrix.build(A, ar.exact_array([1, 0]), ar.exact_array([0, 1]), ar.exact_array([1]))
    rep = theta_star(bm, report=True)
    assert rep.discrepancy == 0
    assert rep.value == ar.exact(1) - ar.exact(__import__("fractions").Fraction(-1, 5))


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 6), st.integers(0, 10_000))
def test_routes_agree(p, seed):
    r = np.random.default_rng(seed)
    A = r.normal(size=(p, p)) + 1j * r.normal(size=(p, p)) + 3 * np.eye(p)
    bm = BlockMatrix.build(A, r.normal(size=(p, 2)), r.normal(size=p), r.normal(size=2))
    rep = theta_star(bm, report=True)
    assert rep.discrepancy < 1e-10
