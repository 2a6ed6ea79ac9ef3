"""Last quasideterminant Theta_*[A B; C D] = D - C A^{-1} B = det[A B; C D] / det A."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _arith as ar
from .errors import SingularLeadingBlock

SINGULAR_FLOOR = 1e-12


@dataclass(frozen=True)
class BlockMatrix:
    """A is p x p, B is p x q, C is 1 x p, D is 1 x q (q > 1 batches several last columns)."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray

    @classmethod
    def build(cls, A, B, C, D):
        A = np.asarray(A)
        p = A.shape[0] if A.ndim == 2 else 0
        D = np.asarray(D).reshape(1, -1)
        B = np.asarray(B).reshape(p, D.shape[1])
        C = np.asarray(C).reshape(1, p)
        if A.ndim == 2 and A.shape != (p, p):
            raise ValueError("A must be square")
        if B.shape[1] != D.shape[1]:
            raise ValueError("B and D must have the same number of columns")
        return cls(A.reshape(p, p), B, C, D)

    @property
    def p(self):
        return self.A.shape[0]

    @property
    def exact(self):
        return all(ar.is_exact(x) for x in (self.A, self.B, self.C, self.D)) and self.p > 0


@dataclass(frozen=True)
class QuasidetReport:
    value: object
    schur: object
    det_quotient: object
    discrepancy: float
    pivot: object  # det A
    smallest_singular: float


def check_leading(A, floor=SINGULAR_FLOOR):
    """Raise SingularLeadingBlock if A is numerically singular after row/column equilibration."""
    if A.shape[0] == 0:
        return 1.0
    if ar.is_exact(A):
        if ar.is_zero(ar.det(A)):
            raise SingularLeadingBlock("leading block is exactly singular")
        return 1.0
    A = np.asarray(A, dtype=complex)
    r = np.abs(A).max(axis=1)
    if np.any(r == 0):
        raise SingularLeadingBlock("leading block has a zero row")
    Ae = A / r[:, None]
    c = np.abs(Ae).max(axis=0)
    if np.any(c == 0):
        raise SingularLeadingBlock("leading block has a zero column")
    Ae = Ae / c[None, :]
    s = np.linalg.svd(Ae, compute_uv=False)
    rel = s[-1] / s[0]
    if rel < floor:
        raise SingularLeadingBlock(f"leading block is singular to working precision (sigma_min/sigma_max = {rel:.3e})")
    return float(rel)


def _schur(bm):
    if bm.p == 0:
        return bm.D[0]
    if bm.exact:
        X = ar.solve(bm.A, bm.B)
        return bm.D[0] - (bm.C @ X)[0]
    from scipy.linalg import lu_factor, lu_solve
    lu = lu_factor(np.asarray(bm.A, dtype=complex))
    X = lu_solve(lu, np.asarray(bm.B, dtype=complex))
    return np.asarray(bm.D, dtype=complex)[0] - (np.asarray(bm.C, dtype=complex) @ X)[0]


def _det_quotient(bm):
    if bm.p == 0:
        return bm.D[0]
    exact_mode = bm.exact
    A = bm.A if exact_mode else np.asarray(bm.A, dtype=complex)
    dA = ar.det(A)
    out = []
    for j in range(bm.B.shape[1]):
        top = np.concatenate([A, bm.B[:, j:j + 1]], axis=1)
        bot = np.concatenate([bm.C, bm.D[:, j:j + 1]], axis=1)
        full = np.concatenate([top, bot], axis=0)
        if not exact_mode:
            full = np.asarray(full, dtype=complex)
        out.append(ar.det(full) / dA)
    return np.array(out, dtype=object if exact_mode else complex)


def theta_star(bm, mode="schur", floor=SINGULAR_FLOOR, report=False):
    """Last quasideterminant, computed by both routes; ``mode`` picks the returned one."""
    if mode not in ("schur", "det_quotient"):
        raise ValueError("mode must be 'schur' or 'det_quotient'")
    smin = check_leading(bm.A, floor)
    s = _schur(bm)
    d = _det_quotient(bm)
    if bm.exact:
        disc = max((ar.magnitude(a - b) for a, b in zip(s, d)), default=0.0)
    else:
        sc, dc = ar.to_complex_array(s), ar.to_complex_array(d)
        scale = max(1.0, float(np.max(np.abs(sc))) if sc.size else 0.0)
        disc = float(np.max(np.abs(sc - dc))) / scale if sc.size else 0.0
    value = s if mode == "schur" else d
    if bm.B.shape[1] == 1:
        value, s, d = value[0], s[0], d[0]
    if not report:
        return value
    pivot = ar.det(bm.A) if bm.p else ar.one(bm.exact)
    return QuasidetReport(value, s, d, disc, pivot, smin)
