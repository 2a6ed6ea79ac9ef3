"""CMV ordering of Laurent monomials and the multiplication-by-z operator."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _arith as ar
from .errors import ZeroArgument
from .laurent import LaurentPoly


def cmv_exponent(l):
    """Exponent of the l-th CMV monomial: 1, z^-1, z, z^-2, z^2, ..."""
    if l < 0:
        raise ValueError("CMV index must be nonnegative")
    k, odd = divmod(l, 2)
    return -k - 1 if odd else k


def cmv_index(e):
    """Inverse of :func:`cmv_exponent`."""
    return 2 * e if e >= 0 else -2 * e - 1


def exponents(M):
    return np.array([cmv_exponent(l) for l in range(M)], dtype=int)


def chi(z, M, order=0):
    """Vector of order-th derivatives of the first M CMV monomials at z."""
    if ar.is_zero(z):
        raise ZeroArgument("chi is not defined at z = 0")
    exact_mode = ar.is_exact_scalar(z)
    out = ar.zeros(M, exact_mode)
    for l in range(M):
        e = cmv_exponent(l)
        f = ar.falling(e, order)
        if f:
            out[l] = f * ar.pow_int(z, e - order)
    return out


def to_cmv(p, M):
    """Coefficient row of p in the CMV basis, padded to length M."""
    out = ar.zeros(M, p.exact)
    for k, c in p.terms:
        idx = cmv_index(k)
        if idx >= M:
            raise ValueError(f"exponent {k} does not fit in {M} CMV slots")
        out[idx] = c
    return out


def from_cmv(row):
    row = np.asarray(row)
    exact_mode = ar.is_exact(row)
    return LaurentPoly.from_dict({cmv_exponent(l): v for l, v in enumerate(row)}, exact=exact_mode)


@dataclass(frozen=True)
class BandedTruncation:
    data: np.ndarray
    bandwidth: int
    exact_leading: int

    @property
    def size(self):
        return self.data.shape[0]


def upsilon(M, exact=False):
    """Leading M x M block of the CMV shift: (Upsilon chi)(z) = z chi(z)."""
    U = ar.zeros((M, M), exact)
    one = ar.one(exact)
    for i in range(M):
        if i % 2 == 0:
            j = i + 2
        elif i == 1:
            j = 0
        else:
            j = i - 2
        if j < M:
            U[i, j] = one
    return BandedTruncation(U, 2, M)


def laurent_of_upsilon(L, M, exact=None):
    """Leading M x M block of L(Upsilon), built at inflated size and cut back.

    Negative powers use the transpose, since Upsilon is orthogonal.
    """
    if exact is None:
        exact = L.exact
    b = max(L.n, L.m, 0)
    big = M + 2 * b
    U = upsilon(big, exact).data
    Ut = U.T.copy()
    acc = ar.zeros((big, big), exact)
    conv = ar.exact if exact else complex
    for k, c in L.terms:
        P = ar.eye(big, exact)
        step = U if k > 0 else Ut
        for _ in range(abs(k)):
            P = P @ step
        acc = acc + P * conv(c)
    return BandedTruncation(acc[:M, :M], 2 * b, M)


def multiplication_matrix(L, rows, cols, exact=None):
    """Row i holds the CMV coefficients of L(z) chi^(i)(z); independent of Upsilon powers."""
    if exact is None:
        exact = L.exact
    out = ar.zeros((rows, cols), exact)
    conv = ar.exact if exact else complex
    for i in range(rows):
        e = cmv_exponent(i)
        for k, c in L.terms:
            j = cmv_index(e + k)
            if j < cols:
                out[i, j] = out[i, j] + conv(c)
    return out
