"""Laurent polynomials in one complex variable.

Coefficients are either complex doubles or exact Gaussian rationals
(see :mod:`cmvlab._arith`); a polynomial never mixes the two.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial

import numpy as np

from . import _arith as ar
from .errors import OddDegree, ZeroArgument, ZeroRoot


def _check_nonzero(z):
    if isinstance(z, np.ndarray):
        if np.any(z == 0):
            raise ZeroArgument("Laurent polynomials are not defined at z = 0")
    elif ar.is_zero(z):
        raise ZeroArgument("Laurent polynomials are not defined at z = 0")


@dataclass(frozen=True)
class LaurentPoly:
    """Finitely supported map exponent -> coefficient, stored trimmed and sorted."""

    terms: tuple = ()

    @classmethod
    def from_dict(cls, coeffs, exact=None):
        items = {int(k): v for k, v in dict(coeffs).items()}
        if exact is None:
            exact = any(ar.is_exact_scalar(v) for v in items.values())
        conv = ar.exact if exact else complex
        kept = tuple((k, conv(v)) for k, v in sorted(items.items()) if not ar.is_zero(conv(v)))
        return cls(kept)

    @classmethod
    def monomial(cls, k, c=1, exact=False):
        return cls.from_dict({k: c}, exact=exact)

    @classmethod
    def constant(cls, c, exact=False):
        return cls.from_dict({0: c}, exact=exact)

    @property
    def exact(self):
        return bool(self.terms) and ar.is_exact_scalar(self.terms[0][1])

    @property
    def coeffs(self):
        return dict(self.terms)

    def coeff(self, k):
        return self.coeffs.get(k, ar.zero(self.exact))

    def is_zero(self):
        return not self.terms

    @property
    def n(self):
        """Highest exponent (0 for the zero polynomial)."""
        return self.terms[-1][0] if self.terms else 0

    @property
    def m(self):
        """Minus the lowest exponent (0 for the zero polynomial)."""
        return -self.terms[0][0] if self.terms else 0

    def __call__(self, z, order=0):
        return eval_deriv(self, z, order)

    def _coerce(self, other):
        if isinstance(other, LaurentPoly):
            return other
        return LaurentPoly.constant(other, exact=self.exact)

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.terms)
        for k, v in other.terms:
            out[k] = out[k] + v if k in out else v
        return LaurentPoly.from_dict(out, exact=self.exact or other.exact)

    __radd__ = __add__

    def __neg__(self):
        return LaurentPoly(tuple((k, -v) for k, v in self.terms))

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, LaurentPoly):
            c = ar.exact(other) if self.exact else complex(other)
            return LaurentPoly.from_dict({k: v * c for k, v in self.terms}, exact=self.exact)
        out = {}
        for a, u in self.terms:
            for b, v in other.terms:
                out[a + b] = out[a + b] + u * v if a + b in out else u * v
        return LaurentPoly.from_dict(out, exact=self.exact or other.exact)

    __rmul__ = __mul__

    def __pow__(self, e):
        out = LaurentPoly.constant(1, exact=self.exact)
        for _ in range(int(e)):
            out = out * self
        return out

    def bar(self):
        """The polynomial with conjugated coefficients, z -> sum conj(L_k) z^k."""
        return LaurentPoly(tuple((k, ar.conj(v)) for k, v in self.terms))

    def to_exact(self):
        return LaurentPoly.from_dict(self.coeffs, exact=True)

    def to_double(self):
        return LaurentPoly.from_dict({k: ar.to_complex(v) for k, v in self.terms}, exact=False)

    def to_json(self):
        return {"coeffs": [[k, *_num_pair(v)] for k, v in self.terms]}

    @classmethod
    def from_json(cls, obj, exact=False):
        coeffs = {}
        for k, re, im in obj["coeffs"]:
            coeffs[int(k)] = _parse_pair(re, im, exact)
        return cls.from_dict(coeffs, exact=exact)

    def __repr__(self):
        body = " + ".join(f"({v})*z^{k}" for k, v in self.terms) or "0"
        return f"LaurentPoly({body})"


def _num_pair(v):
    if ar.is_exact_scalar(v):
        return [str(v.x), str(v.y)]
    v = complex(v)
    return [v.real, v.imag]


def _parse_pair(re, im, exact):
    if exact:
        return ar.exact((re, im))
    return complex(float(re) if not isinstance(re, str) else float(_frac(re)),
                   float(im) if not isinstance(im, str) else float(_frac(im)))


def _frac(s):
    from fractions import Fraction
    return Fraction(s)


def eval_deriv(p, z, order=0):
    """d^order/dz^order of p at z (z may be a numpy array in double mode)."""
    if order < 0:
        raise ValueError("order must be nonnegative")
    _check_nonzero(z)
    if isinstance(z, np.ndarray):
        out = np.zeros(z.shape, dtype=complex)
        for k, c in p.terms:
            f = ar.falling(k, order)
            if f:
                out += complex(c) * f * np.power(z.astype(complex), k - order)
        return out
    exact_mode = p.exact or ar.is_exact_scalar(z)
    if exact_mode:
        z = ar.exact(z)
    total = ar.zero(exact_mode)
    for k, c in p.terms:
        f = ar.falling(k, order)
        if f:
            c = ar.exact(c) if exact_mode else c
            total = total + c * f * ar.pow_int(z, k - order)
    return total


def reciprocal_star(p):
    """L_*(z) = conj-coefficient polynomial evaluated at 1/z."""
    return LaurentPoly(tuple((-k, ar.conj(v)) for k, v in reversed(p.terms)))


@dataclass(frozen=True)
class SpectralData:
    zeros: tuple  # ((zeta, multiplicity), ...)

    def __post_init__(self):
        pts = [z for z, _ in self.zeros]
        for z, m in self.zeros:
            if int(m) != m or m < 1:
                raise ValueError("multiplicities must be positive integers")
            if ar.is_zero(z):
                raise ZeroRoot("zeros of a prepared Laurent polynomial must be nonzero")
        for i in range(len(pts)):
            for j in range(i):
                if pts[i] == pts[j]:
                    raise ValueError("spectral points must be pairwise distinct")

    @property
    def total(self):
        return sum(m for _, m in self.zeros)

    @property
    def points(self):
        return [z for z, _ in self.zeros]

    @property
    def multiplicities(self):
        return [m for _, m in self.zeros]


@dataclass(frozen=True)
class PreparedLaurent:
    """L(z) = L_n z^{-n} prod_i (z - zeta_i)^{m_i} with sum m_i = 2n."""

    poly: LaurentPoly
    spectral: SpectralData
    leading: object

    @property
    def n(self):
        return self.spectral.total // 2

    @property
    def exact(self):
        return self.poly.exact

    def __call__(self, z, order=0):
        return eval_deriv(self.poly, z, order)

    def corner(self, l):
        """L_{(-1)^l n}: the coefficient that sits on the outer band of row l."""
        return self.poly.coeff(self.n if l % 2 == 0 else -self.n)

    def without(self, i):
        """L_[i](z) = L_n z^{-n} prod_{j != i} (z - zeta_j)^{m_j}."""
        zs = [(z, m) for j, (z, m) in enumerate(self.spectral.zeros) if j != i]
        return _expand(self.leading, zs, self.n, self.exact)

    def to_json(self):
        out = self.poly.to_json()
        out["zeros"] = [[*_num_pair(z), m] for z, m in self.spectral.zeros]
        out["leading"] = _num_pair(self.leading)
        return out

    @classmethod
    def from_json(cls, obj, exact=False):
        zeros = [(_parse_pair(re, im, exact), int(m)) for re, im, m in obj["zeros"]]
        leading = _parse_pair(*obj.get("leading", [1, 0]), exact)
        return prepared_from_zeros(leading, SpectralData(tuple(zeros)), exact=exact)


def _expand(leading, zeros, shift, exact_mode):
    conv = ar.exact if exact_mode else complex
    out = LaurentPoly.constant(conv(leading), exact=exact_mode)
    for z, m in zeros:
        lin = LaurentPoly.from_dict({1: conv(1), 0: -conv(z)}, exact=exact_mode)
        out = out * lin ** m
    return out * LaurentPoly.monomial(-shift, conv(1), exact=exact_mode)


def prepared_from_zeros(leading, spectral, exact=None):
    if not isinstance(spectral, SpectralData):
        spectral = SpectralData(tuple(spectral))
    if ar.is_zero(leading):
        raise ValueError("leading coefficient must be nonzero")
    if spectral.total % 2:
        raise OddDegree(f"total multiplicity {spectral.total} is odd")
    if exact is None:
        exact = ar.is_exact_scalar(leading) or any(ar.is_exact_scalar(z) for z in spectral.points)
    conv = ar.exact if exact else complex
    spectral = SpectralData(tuple((conv(z), int(m)) for z, m in spectral.zeros))
    poly = _expand(leading, spectral.zeros, spectral.total // 2, exact)
    return PreparedLaurent(poly, spectral, conv(leading))


def prepared_star(L):
    """The reciprocal L_* as a prepared polynomial; zero i maps to 1/conj(zeta_i)."""
    one = ar.one(L.exact)
    zeros = tuple((one / ar.conj(z), m) for z, m in L.spectral.zeros)
    leading = ar.conj(L.poly.coeff(-L.n))
    out = prepared_from_zeros(leading, SpectralData(zeros), exact=L.exact)
    return out


@dataclass(frozen=True)
class DividedDifference:
    """delta L(z1, z2) = (L(z1) - L(z2)) / (z1 - z2), via complete symmetric sums."""

    poly: LaurentPoly

    def in_second(self, z1):
        """delta L(z1, .) as a Laurent polynomial in the second variable."""
        _check_nonzero(z1)
        exact_mode = self.poly.exact or ar.is_exact_scalar(z1)
        if exact_mode:
            z1 = ar.exact(z1)
        out = {}
        for j, c in self.poly.terms:
            if j >= 1:
                for a in range(j):
                    k = j - 1 - a
                    out[k] = out.get(k, 0) + c * ar.pow_int(z1, a)
            elif j <= -1:
                for a in range(-j):
                    k = -(-j - 1 - a) - 1
                    out[k] = out.get(k, 0) - c * ar.pow_int(z1, -a - 1)
        return LaurentPoly.from_dict(out, exact=exact_mode)

    def in_first(self, z2):
        return self.in_second(z2)

    def __call__(self, z1, z2):
        _check_nonzero(z2)
        return eval_deriv(self.in_second(z1), z2, 0)


def divided_difference(p):
    return DividedDifference(p)


def taylor(p, z, count):
    """[p(z), p'(z)/1!, ..., p^{(count-1)}(z)/(count-1)!]."""
    return [eval_deriv(p, z, r) / factorial(r) for r in range(count)]
