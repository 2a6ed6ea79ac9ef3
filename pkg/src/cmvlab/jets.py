"""Spectral jets, the anti-triangular L-matrices, mass specifications and the Bell matrix.

A jet of f along a prepared L is the row

    [f(z_1), f'(z_1)/1!, ..., f^(m_1-1)(z_1)/(m_1-1)!, ..., f(z_d), ...]

ordered by zero, then derivative. ``conjugated=True`` evaluates at conj(z_i),
the zeros of the conjugate-coefficient polynomial.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb, factorial

import numpy as np

from . import _arith as ar
from .errors import ZeroRoot
from .laurent import prepared_star


@dataclass(frozen=True)
class Jet:
    values: np.ndarray  # (..., 2n); leading axes index a family of functions
    spectral: object
    conjugated: bool = False

    def __len__(self):
        return self.values.shape[-1]

    def block(self, i):
        start = sum(self.spectral.multiplicities[:i])
        return self.values[..., start:start + self.spectral.multiplicities[i]]


def jet_points(L, conjugated=False):
    """[(point, multiplicity), ...] at which jets along L (or along its conjugate) are taken."""
    return [(ar.conj(z) if conjugated else z, m) for z, m in L.spectral.zeros]


def jet_values(f, L, conjugated=False):
    """Stack [f^(r)(point)/r!] in jet order; f(z, r) may return a scalar or a vector."""
    cols = []
    for z, m in jet_points(L, conjugated):
        for r in range(m):
            v = f(z, r)
            cols.append(v / factorial(r) if r else v)
    if not cols:
        return np.zeros((0,), dtype=complex)
    exact_mode = all(ar.is_exact(np.asarray(c) if not ar.is_exact_scalar(c) else c) for c in cols)
    out = np.stack([np.asarray(c, dtype=object if exact_mode else complex) for c in cols], axis=-1)
    return out


def jet(f, L, conjugated=False):
    return Jet(jet_values(f, L, conjugated), L.spectral, conjugated)


def ell_blocks(L):
    """Per-zero anti-triangular blocks built from Taylor data of conj(L_[j]) at conj(zeta_j)."""
    blocks = []
    for j, (z, m) in enumerate(L.spectral.zeros):
        p = L.without(j).bar()
        zc = ar.conj(z)
        ell = [p(zc, k) / factorial(k) for k in range(m)]
        B = ar.zeros((m, m), L.exact)
        for r in range(m):
            for c in range(m):
                k = r + c - (m - 1)
                if k >= 0:
                    B[r, c] = ell[k]
        blocks.append(B)
    return blocks


def ell_matrix(L):
    """Block-diagonal assembly of :func:`ell_blocks`, 2n x 2n."""
    blocks = ell_blocks(L)
    size = sum(b.shape[0] for b in blocks)
    out = ar.zeros((size, size), L.exact)
    at = 0
    for b in blocks:
        m = b.shape[0]
        out[at:at + m, at:at + m] = b
        at += m
    return out


def lah(k, j):
    if j == 0:
        return 1 if k == 0 else 0
    if j > k:
        return 0
    return comb(k - 1, j - 1) * factorial(k) // factorial(j)


def bell_matrix(zeta, m):
    """B[k, j] with d^k/dz^k g(1/z) = sum_j g^(j)(1/z) B[k, j] at z = zeta."""
    if ar.is_zero(zeta):
        raise ZeroRoot("the Bell matrix needs a nonzero point")
    exact_mode = ar.is_exact_scalar(zeta)
    B = ar.zeros((m, m), exact_mode)
    for k in range(m):
        for j in range(k + 1):
            c = lah(k, j)
            if c:
                B[k, j] = (-1) ** k * c * ar.pow_int(zeta, -k - j)
    return B


# --- masses -----------------------------------------------------------------------


@dataclass(frozen=True)
class GeneralMass:
    """xi[(i, l)] = sum_r w_r * (order o_r derivative at p_r); one entry per jet slot.

    ``xi`` is a tuple over jet slots of tuples of (point, order, weight).
    """

    xi: tuple

    def pair_rows(self, values):
        """<xi, f_k> for a family: ``values(point, order)`` returns a vector over k."""
        cols = []
        for terms in self.xi:
            acc = None
            for p, o, w in terms:
                v = np.asarray(values(p, o))
                v = v * (w if ar.is_exact(v) else ar.to_complex(w))
                acc = v if acc is None else acc + v
            cols.append(acc)
        return cols

    def is_zero(self):
        return all(len(t) == 0 or all(ar.is_zero(w) for _, _, w in t) for t in self.xi)

    def to_json(self):
        return {"kind": "general", "xi": [[[_pair(p), int(o), _pair(w)] for p, o, w in t] for t in self.xi]}


@dataclass(frozen=True)
class CircleMatrix:
    """Mass matrix Xi indexed (i,k | j,l) relative to a circle divisor L_c."""

    Xi: np.ndarray

    def to_general(self, Lc, side):
        """Side-2 functionals act at the zeros of L_c; side-1 ones at the zeros of (L_c)_*."""
        Xi = np.asarray(self.Xi)
        slots = [(z, r) for z, m in Lc.spectral.zeros for r in range(m)]
        star = [(ar.one(Lc.exact) / ar.conj(z), r) for z, r in slots]
        if Xi.shape != (len(slots), len(slots)):
            raise ValueError(f"mass matrix must be {len(slots)} x {len(slots)}")
        xi = []
        if side == 2:
            for b in range(len(slots)):
                xi.append(tuple((z, r, Xi[a, b] / factorial(r)) for a, (z, r) in enumerate(slots)
                                if not ar.is_zero(Xi[a, b])))
        elif side == 1:
            for a in range(len(slots)):
                xi.append(tuple((p, r, ar.conj(Xi[a, b]) / factorial(r)) for b, (p, r) in enumerate(star)
                                if not ar.is_zero(Xi[a, b])))
        else:
            raise ValueError("side must be 1 or 2")
        return GeneralMass(tuple(xi))

    def to_json(self):
        return {"kind": "circle_matrix", "Xi": [[_pair(v) for v in row] for row in np.asarray(self.Xi)]}


@dataclass(frozen=True)
class DiagonalCircle:
    """Per-zero values xi^i_l of sum_l xi^i_l (-1)^l/l! delta^(l)(z - zeta_i) acting on M1 M2_*."""

    xi_values: tuple  # per zero, a tuple of length m_i

    def to_circle_matrix(self, Lc):
        size = Lc.spectral.total
        Xi = ar.zeros((size, size), Lc.exact)
        at = 0
        for i, (z, m) in enumerate(Lc.spectral.zeros):
            vals = list(self.xi_values[i]) if i < len(self.xi_values) else []
            vals = vals[:m] + [0] * (m - len(vals[:m]))
            vals = [ar.exact(v) if Lc.exact else ar.to_complex(v) for v in vals]
            B = bell_matrix(z, m)
            for n in range(m):
                for j in range(m):
                    acc = 0
                    for k in range(m - n):
                        if not ar.is_zero(B[k, j]) and not ar.is_zero(vals[n + k]):
                            acc = acc + vals[n + k] * B[k, j] / factorial(k)
                    Xi[at + n, at + j] = acc * factorial(j)
            at += m
        return CircleMatrix(Xi)

    def to_general(self, Lc, side):
        return self.to_circle_matrix(Lc).to_general(Lc, side)

    def to_json(self):
        rows = []
        for i, vals in enumerate(self.xi_values):
            for l, v in enumerate(vals):
                rows.append([i, l, *_pair(v)])
        return {"kind": "diagonal", "xi": rows}


def zero_mass(L):
    return GeneralMass(tuple(() for _ in range(L.spectral.total)))


def circle_divisor(L, side):
    """The univariate divisor L_c for which a side-``side`` request with L is u / L_c on the circle."""
    return L if side == 1 else prepared_star(L)


def as_general(mass, L, side):
    """Mass functionals of a side-``side`` Geronimus request with perturbing polynomial L."""
    if mass is None:
        return zero_mass(L)
    if isinstance(mass, GeneralMass):
        if len(mass.xi) != L.spectral.total:
            raise ValueError(f"a general mass needs {L.spectral.total} functionals, got {len(mass.xi)}")
        return mass
    return mass.to_general(circle_divisor(L, side), side)


def mass_pair(mass, values, exact=False):
    """Row vector(s) <xi, f> in jet order; ``values(point, order)`` may return a vector over a family."""
    cols = mass.pair_rows(values)
    width = None
    for c in cols:
        if c is not None:
            width = np.shape(c)
            break
    if width is None:
        width = np.shape(values(1.0, 0))
    if exact:
        cols = [ar.zeros(width, True) if c is None else ar.exact_array(c) for c in cols]
        if not cols:
            return ar.zeros(width + (0,), True)
        out = ar.zeros(width + (len(cols),), True)
        for j, c in enumerate(cols):
            out[..., j] = c
        return out
    cols = [np.zeros(width, dtype=complex) if c is None else ar.to_complex_array(c) for c in cols]
    return np.stack(cols, axis=-1) if cols else np.zeros(width + (0,), dtype=complex)


def mass_from_json(obj, exact=False):
    kind = obj.get("kind")
    conv = ar.exact if exact else (lambda v: complex(*v) if isinstance(v, (list, tuple)) else complex(v))

    def num(v):
        if exact:
            return ar.exact(tuple(v)) if isinstance(v, (list, tuple)) else ar.exact(v)
        return conv(v)

    if kind == "circle_matrix":
        Xi = np.array([[num(v) for v in row] for row in obj["Xi"]], dtype=object if exact else complex)
        return CircleMatrix(Xi)
    if kind == "diagonal":
        per = {}
        for i, l, re, im in obj["xi"]:
            per.setdefault(int(i), {})[int(l)] = num([re, im])
        count = max(per) + 1 if per else 0
        vals = []
        for i in range(count):
            d = per.get(i, {})
            vals.append(tuple(d.get(l, 0) for l in range(max(d) + 1 if d else 0)))
        return DiagonalCircle(tuple(vals))
    if kind == "general":
        return GeneralMass(tuple(tuple((num(p), int(o), num(w)) for p, o, w in t) for t in obj["xi"]))
    raise ValueError(f"unknown mass kind {kind!r}")


def _pair(v):
    if ar.is_exact_scalar(v):
        return [str(v.x), str(v.y)]
    v = complex(v)
    return [v.real, v.imag]
