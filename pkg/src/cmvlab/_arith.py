"""Scalar/array helpers shared by the double and exact (Gaussian rational) backends.

Exact values are sympy ``QQ_I`` elements held in numpy object arrays, so the
same elimination code runs on both backends.
"""

from fractions import Fraction
from numbers import Integral, Rational

import numpy as np
from sympy import QQ, QQ_I

GaussianRational = type(QQ_I(0, 0))


def is_exact_scalar(x):
    return isinstance(x, GaussianRational)


def is_exact(a):
    if isinstance(a, np.ndarray):
        return a.dtype == object
    return is_exact_scalar(a)


def _rational(x):
    if isinstance(x, (Integral, Rational)):
        return QQ.convert(Fraction(x))
    if isinstance(x, float):
        if not np.isfinite(x):
            raise ValueError(f"cannot represent {x!r} exactly")
        return QQ.convert(Fraction(x))
    if isinstance(x, str):
        return QQ.convert(Fraction(x))
    return QQ.convert(x)


def exact(x):
    """Convert a number (int, Fraction, float, complex, str, (re, im)) to QQ_I."""
    if is_exact_scalar(x):
        return x
    if isinstance(x, tuple):
        return QQ_I(_rational(x[0]), _rational(x[1]))
    if isinstance(x, (complex, np.complexfloating)):
        return QQ_I(_rational(float(x.real)), _rational(float(x.imag)))
    if isinstance(x, np.floating):
        return QQ_I(_rational(float(x)), QQ(0))
    if isinstance(x, np.integer):
        return QQ_I(int(x), 0)
    return QQ_I(_rational(x), QQ(0))


def exact_array(a):
    a = np.asarray(a, dtype=object)
    out = np.empty(a.shape, dtype=object)
    for idx, v in np.ndenumerate(a):
        out[idx] = exact(v)
    return out


def to_complex(x):
    if is_exact_scalar(x):
        return complex(float(x.x), float(x.y))
    return complex(x)


def to_complex_array(a):
    a = np.asarray(a)
    if a.dtype != object:
        return a.astype(complex)
    out = np.empty(a.shape, dtype=complex)
    for idx, v in np.ndenumerate(a):
        out[idx] = to_complex(v) if is_exact_scalar(v) else complex(v)
    return out


def conj(x):
    if isinstance(x, np.ndarray):
        if x.dtype == object:
            out = np.empty(x.shape, dtype=object)
            for idx, v in np.ndenumerate(x):
                out[idx] = conj(v)
            return out
        return np.conj(x)
    if is_exact_scalar(x):
        return QQ_I(x.x, -x.y)
    if isinstance(x, (Integral, Rational)):
        return x
    return np.conj(x)


def is_zero(x):
    if is_exact_scalar(x):
        return not x
    return x == 0


def zero(exact_mode):
    return QQ_I(0, 0) if exact_mode else 0j


def one(exact_mode):
    return QQ_I(1, 0) if exact_mode else 1 + 0j


def zeros(shape, exact_mode):
    if exact_mode:
        out = np.empty(shape, dtype=object)
        out.fill(QQ_I(0, 0))
        return out
    return np.zeros(shape, dtype=complex)


def eye(n, exact_mode):
    out = zeros((n, n), exact_mode)
    for i in range(n):
        out[i, i] = one(exact_mode)
    return out


def like(value, exact_mode):
    return exact(value) if exact_mode else complex(value)


def magnitude(x):
    """|x| as a float, for both backends."""
    return abs(to_complex(x)) if is_exact_scalar(x) else float(abs(x))


def pow_int(z, k):
    """z**k for integer k (negative allowed), staying within the backend."""
    if k >= 0:
        return z ** k
    return (1 / z) ** (-k) if not is_exact_scalar(z) else (QQ_I(1, 0) / z) ** (-k)


def falling(a, r):
    """Falling factorial a(a-1)...(a-r+1) as an int."""
    out = 1
    for i in range(r):
        out *= a - i
    return out


def inv_unit_lower(Lm):
    """Inverse of a unit lower-triangular matrix by forward substitution."""
    n = Lm.shape[0]
    exact_mode = is_exact(Lm)
    if not exact_mode:
        from scipy.linalg import solve_triangular
        return solve_triangular(Lm, np.eye(n, dtype=complex), lower=True, unit_diagonal=True)
    X = eye(n, exact_mode)
    for i in range(n):
        for j in range(i):
            acc = QQ_I(0, 0)
            for k in range(j, i):
                if Lm[i, k]:
                    acc = acc + Lm[i, k] * X[k, j]
            X[i, j] = -acc
    return X


def solve(A, B):
    """Solve A X = B. Exact backend uses elimination with nonzero pivoting."""
    if not is_exact(A) and not is_exact(B):
        return np.linalg.solve(A, B)
    A = exact_array(A)
    B = exact_array(B)
    vec = B.ndim == 1
    if vec:
        B = B.reshape(-1, 1)
    n = A.shape[0]
    M = np.concatenate([A, B], axis=1)
    for c in range(n):
        p = next((r for r in range(c, n) if M[r, c]), None)
        if p is None:
            raise ZeroDivisionError("singular matrix")
        if p != c:
            M[[c, p]] = M[[p, c]]
        piv = M[c, c]
        M[c] = M[c] / piv
        for r in range(n):
            if r != c and M[r, c]:
                M[r] = M[r] - M[c] * M[r, c]
    X = M[:, n:]
    return X[:, 0] if vec else X


def det(A):
    if not is_exact(A):
        return np.linalg.det(A) if A.shape[0] else 1.0 + 0j
    M = exact_array(A)
    n = M.shape[0]
    d = QQ_I(1, 0)
    for c in range(n):
        p = next((r for r in range(c, n) if M[r, c]), None)
        if p is None:
            return QQ_I(0, 0)
        if p != c:
            M[[c, p]] = M[[p, c]]
            d = -d
        piv = M[c, c]
        d = d * piv
        for r in range(c + 1, n):
            if M[r, c]:
                M[r] = M[r] - M[c] * (M[r, c] / piv)
    return d
