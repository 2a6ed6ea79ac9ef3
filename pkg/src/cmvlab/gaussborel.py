"""Pivot-free Gauss-Borel (LDU) factorization and the biorthogonal families it yields."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _arith as ar
from .cmv import chi, from_cmv
from .errors import IndexOutOfRange, QuasidefiniteViolation
from .functional import GramTruncation


@dataclass(frozen=True)
class BiorthSystem:
    """G = S1^{-1} diag(H) S2^{-dagger}; row l of S_a holds phi_{a,l} in the CMV basis."""

    S1: np.ndarray
    S2: np.ndarray
    H: np.ndarray
    gram: GramTruncation | None = None

    @property
    def size(self):
        return len(self.H)

    @property
    def exact(self):
        return ar.is_exact(self.H)

    def S(self, family):
        if family == 1:
            return self.S1
        if family == 2:
            return self.S2
        raise ValueError("family must be 1 or 2")

    def poly(self, family, l):
        if not 0 <= l < self.size:
            raise IndexOutOfRange(f"index {l} outside 0..{self.size - 1}")
        return from_cmv(self.S(family)[l, : l + 1])

    def adjoint(self):
        """System of the adjoint form <p, q>' = conj(<q, p>): families swap, H conjugates."""
        g = None
        if self.gram is not None:
            d = ar.conj(self.gram.data).T.copy()
            g = GramTruncation(d, self.gram.size, self.gram.exact_cols, self.gram.exact_rows,
                               self.gram.source + "^adj")
        return BiorthSystem(self.S2, self.S1, ar.conj(self.H), g)

    def to_double(self):
        return BiorthSystem(ar.to_complex_array(self.S1), ar.to_complex_array(self.S2),
                            ar.to_complex_array(self.H), self.gram)

    def reconstruct(self):
        S1i = ar.inv_unit_lower(self.S1)
        S2i = ar.inv_unit_lower(self.S2)
        D = ar.zeros((self.size, self.size), self.exact)
        for k in range(self.size):
            D[k, k] = self.H[k]
        return S1i @ D @ ar.conj(S2i).T


def ldu(A, pivot_floor=None):
    """Doolittle LDU without pivoting: A = Lo diag(d) Up."""
    exact_mode = ar.is_exact(A)
    A = A.copy()
    n = A.shape[0]
    if pivot_floor is None:
        pivot_floor = 0 if exact_mode else 1e-12 * max(float(np.max(np.abs(A))) if n else 0.0, 1e-300)
    Lo = ar.eye(n, exact_mode)
    Up = ar.eye(n, exact_mode)
    d = ar.zeros(n, exact_mode)
    for k in range(n):
        piv = A[k, k]
        if ar.is_zero(piv) or (not exact_mode and abs(piv) < pivot_floor):
            raise QuasidefiniteViolation(k, ar.to_complex(piv))
        d[k] = piv
        if k + 1 < n:
            col = A[k + 1:, k] / piv
            row = A[k, k + 1:] / piv
            Lo[k + 1:, k] = col
            Up[k, k + 1:] = row
            A[k + 1:, k + 1:] = A[k + 1:, k + 1:] - np.outer(col, A[k, k + 1:])
    return Lo, d, Up


def factorize(G, pivot_floor=None):
    """Gauss-Borel factorization of the exact leading block of G."""
    if isinstance(G, GramTruncation):
        k = min(G.exact_rows, G.exact_cols, G.size)
        data = G.data[:k, :k]
        src = G if k == G.size else G.leading(k)
    else:
        data = np.asarray(G)
        src = GramTruncation(data, data.shape[0], data.shape[0], data.shape[0], "matrix")
    Lo, d, Up = ldu(data, pivot_floor)
    S1 = ar.inv_unit_lower(Lo)
    S2 = ar.inv_unit_lower(ar.conj(Up).T.copy())
    return BiorthSystem(S1, S2, d, src)


def phi(sys, family, l, z, order=0):
    if not 0 <= l < sys.size:
        raise IndexOutOfRange(f"index {l} outside 0..{sys.size - 1}")
    return sys.S(family)[l, : l + 1] @ chi(z, l + 1, order)


def phi_values(sys, family, z, order=0, count=None):
    """[phi_{family,0}(z), ..., phi_{family,count-1}(z)] differentiated ``order`` times."""
    count = sys.size if count is None else count
    if count > sys.size:
        raise IndexOutOfRange(f"need {count} polynomials, system has {sys.size}")
    S = sys.S(family)[:count, :count]
    v = chi(z, count, order)
    if ar.is_exact(S) != ar.is_exact(v):
        S, v = ar.to_complex_array(S), ar.to_complex_array(v)
    return S @ v


def cd_kernel(sys, l, z1, z2, orders=(0, 0)):
    """K^[l](conj z1, z2) = sum_{k<l} conj(D^d1 phi_{2,k}(z1)) H_k^{-1} D^d2 phi_{1,k}(z2)."""
    if not 0 <= l <= sys.size:
        raise IndexOutOfRange(f"kernel order {l} outside 0..{sys.size}")
    if l == 0:
        return ar.zero(sys.exact)
    a = ar.conj(phi_values(sys, 2, z1, orders[0], l))
    b = phi_values(sys, 1, z2, orders[1], l)
    H = sys.H[:l]
    if ar.is_exact(a) != ar.is_exact(H) or ar.is_exact(b) != ar.is_exact(H):
        a, b, H = ar.to_complex_array(a), ar.to_complex_array(b), ar.to_complex_array(H)
    return np.sum(a * b / H)


def abc_kernel(G, l, z1, z2):
    """chi(z1)^dagger (G^[l])^{-1} chi(z2), via an LU solve independent of the Gauss-Borel factors."""
    data = G.data if isinstance(G, GramTruncation) else np.asarray(G)
    if l > data.shape[0]:
        raise IndexOutOfRange(f"kernel order {l} exceeds Gram size {data.shape[0]}")
    if l == 0:
        return 0j
    A = data[:l, :l]
    x1 = chi(z1, l)
    x2 = chi(z2, l)
    if ar.is_exact(A):
        if not (ar.is_exact(x1) and ar.is_exact(x2)):
            A = ar.to_complex_array(A)
            x1, x2 = ar.to_complex_array(x1), ar.to_complex_array(x2)
    if not ar.is_exact(A):
        from scipy.linalg import lu_factor, lu_solve
        lu = lu_factor(A)
        if np.any(np.abs(np.diag(lu[0])) == 0):
            raise QuasidefiniteViolation(int(np.argmin(np.abs(np.diag(lu[0])))))
        y = lu_solve(lu, np.asarray(x2, dtype=complex))
        return np.conj(np.asarray(x1, dtype=complex)) @ y
    y = ar.solve(A, x2)
    return ar.conj(x1) @ y


def biorthogonality_matrix(spec, sys, count=None, exact=None):
    """R[n, m] = |<phi_1n, phi_2m> - delta_nm H_n| / |H_n| with pairings taken through ``spec``."""
    from .functional import pair

    count = sys.size if count is None else count
    if exact is None:
        exact = sys.exact and spec.exact_capable
    P1 = [sys.poly(1, n) for n in range(count)]
    P2 = [sys.poly(2, m) for m in range(count)]
    if not exact:
        P1 = [p.to_double() for p in P1]
        P2 = [p.to_double() for p in P2]
    R = np.zeros((count, count))
    for n in range(count):
        h = ar.magnitude(sys.H[n])
        for m in range(count):
            v = pair(spec, P1[n], P2[m], exact=exact)
            if n == m:
                v = v - (sys.H[n] if exact else ar.to_complex(sys.H[n]))
            if not ar.is_zero(v):
                R[n, m] = ar.magnitude(v) / h
    return R


def biorthogonality_residual(spec, sys, count=None, exact=None):
    """max |<phi_1n, phi_2m> - delta_nm H_n| / |H_n|."""
    R = biorthogonality_matrix(spec, sys, count, exact)
    return float(R.max()) if R.size else 0.0
