"""Cauchy second-kind functions C1, C2 and the mixed Christoffel-Darboux kernels.

C1_k(z) = <phi_{1,k}(z1), 1/(conj z - z2)>_u and
C2_k(z) = conj(<1/(conj z - z1), phi_{2,k}(z2)>_u); both are holomorphic off the
(conjugated) support. Two routes are offered: a truncated Gram series valid
outside the support annulus, and a direct Cauchy pairing valid everywhere
off the support.
"""

from __future__ import annotations

import numpy as np

from . import _arith as ar
from .errors import DomainViolation, IndexOutOfRange, TailTooLarge
from .functional import cauchy_rows
from .gaussborel import phi_values

TAIL_TOL = 1e-12


def _series_matrix(sys, G, family):
    data = G.data if hasattr(G, "data") else np.asarray(G)
    M = min(sys.size, data.shape[0])
    S = ar.to_complex_array(sys.S(family)[:M, :M])
    data = ar.to_complex_array(data[:M, :M])
    if family == 1:
        return S @ data
    return S @ np.conj(data).T


def c_series(sys, G, family, k, z, order=0, radii=(1.0, 1.0), tail_tol=TAIL_TOL, return_bound=False):
    """Row k of S1 G chi_1^*(z) (outside) or -S1 G chi_2(z) (inside), and the family-2 analogues.

    ``radii`` are the inner/outer moduli of the support seen by the family
    (second variable for family 1, first variable for family 2).
    """
    A = _series_matrix(sys, G, family)
    M = A.shape[0]
    if not 0 <= k < M:
        raise IndexOutOfRange(f"index {k} outside 0..{M - 1}")
    z = complex(ar.to_complex(z))
    rin, rout = radii
    az = abs(z)
    if rin <= az <= rout:
        raise DomainViolation(f"|z| = {az} lies in the closed support annulus [{rin}, {rout}]")
    outside = az > rout
    terms = []
    if outside:
        for a in range(0, (M + 1) // 2):
            f = ar.falling(-a - 1, order)
            terms.append(A[k, 2 * a] * f * z ** (-a - 1 - order))
        rho = rout / az
    else:
        for a in range(0, M // 2):
            f = ar.falling(a, order)
            terms.append(-A[k, 2 * a + 1] * f * z ** (a - order) if f else 0j)
        rho = az / rin if rin > 0 else 0.0
    value = complex(np.sum(terms)) if terms else 0j
    last = max((abs(t) for t in terms[-2:]), default=0.0)
    bound = last * rho / (1 - rho) if rho < 1 else np.inf
    if bound > tail_tol * (1 + abs(value)):
        raise TailTooLarge(f"series tail bound {bound:.3e} exceeds tolerance at |z| = {az}; enlarge the Gram truncation")
    return (value, bound) if return_bound else value


def cauchy_family_spec(spec, family):
    """The form whose second-slot Cauchy transform yields C_family."""
    return spec if family == 1 else spec.adjoint()


def c_values(spec, sys, family, z, order=0, count=None):
    """[C_{family,0}(z), ..., C_{family,count-1}(z)] by direct Cauchy pairing."""
    count = sys.size if count is None else count
    S = sys.S(family)[:count, :count]
    return cauchy_rows(cauchy_family_spec(spec, family), S, z, order)


def c_pairing(spec, sys, family, k, z, order=0):
    if not 0 <= k < sys.size:
        raise IndexOutOfRange(f"index {k} outside 0..{sys.size - 1}")
    S = sys.S(family)[k : k + 1, : k + 1]
    return cauchy_rows(cauchy_family_spec(spec, family), S, z, order)[0]


def mixed_kernel(sys, spec, which, l, x1, x2, orders=(0, 0)):
    """K_{C,phi}^[l](conj x1, x2) or K_{phi,C}^[l](conj x1, x2).

    Derivatives are taken before conjugation in the first slot, as for the CD kernel.
    """
    if not 0 <= l <= sys.size:
        raise IndexOutOfRange(f"kernel order {l} outside 0..{sys.size}")
    if l == 0:
        return 0j
    H = ar.to_complex_array(sys.H[:l])
    if which in ("C,phi", ("C", "phi")):
        a = np.conj(ar.to_complex_array(c_values(spec, sys, 2, x1, orders[0], l)))
        b = ar.to_complex_array(phi_values(sys, 1, x2, orders[1], l))
    elif which in ("phi,C", ("phi", "C")):
        a = np.conj(ar.to_complex_array(phi_values(sys, 2, x1, orders[0], l)))
        b = ar.to_complex_array(c_values(spec, sys, 1, x2, orders[1], l))
    else:
        raise ValueError("which must be 'C,phi' or 'phi,C'")
    return complex(np.sum(a * b / H))
