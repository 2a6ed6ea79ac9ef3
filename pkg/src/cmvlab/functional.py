"""Sesquilinear forms <p(z1), q(z2)>_u and their CMV Gram truncations.

Every variant reduces to two primitives:

* ``monomial_matrix(ea, eb)``: the pairings <z^a, z^b>_u;
* ``cauchy_monomials(ea, z, s, r)``: d^r/dz^r <w^a, (conj(z) - w)^(-s)>_u,
  i.e. the Cauchy kernel (z - conj(w))^(-s) integrated against w^a.

The first-slot Cauchy pairing is obtained from the adjoint form
<p, q>_{u^dagger} = conj(<q, p>_u).
"""

from __future__ import annotations

import math
from fractions import Fraction
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np

from . import _arith as ar
from .cmv import exponents
from .errors import ResolutionExceeded, SupportCollision
from .laurent import LaurentPoly

EPS_SUPPORT = 1e-6
DEFAULT_GRID = 4096


def _rising(s, m):
    out = 1
    for i in range(m):
        out *= s + i
    return out


def _binom(n, k):
    return math.comb(n, k)


class FunctionalSpec:
    """Common interface; concrete variants are the frozen dataclasses below."""

    exact_capable = False

    def monomial_matrix(self, ea, eb, exact=False):
        raise NotImplementedError

    def cauchy_monomials(self, ea, z, s=1, r=0):
        raise NotImplementedError

    def adjoint(self):
        raise NotImplementedError

    def forbidden_points(self):
        """Finite set of points z where the second-slot Cauchy kernel blows up."""
        return []

    def on_unit_circle(self):
        """True when part of the second-variable support lies on |w| = 1."""
        return False

    def radii(self):
        """(inner, outer) moduli of the second-variable support, or None if empty."""
        return None

    def check_cauchy_point(self, z, eps=EPS_SUPPORT):
        zc = ar.to_complex(z)
        if self.on_unit_circle() and abs(abs(zc) - 1.0) < eps:
            raise SupportCollision(f"z = {zc} lies on the unit-circle support")
        for p in self.forbidden_points():
            if abs(zc - p) < eps * max(1.0, abs(p)):
                raise SupportCollision(f"z = {zc} collides with a point of the support at {p}")

    def to_config(self):
        raise NotImplementedError


# --- circle variants ---------------------------------------------------------


@dataclass(frozen=True)
class ToeplitzMoments(FunctionalSpec):
    """Univariate circle functional given by its moments c_k = <u, z^k>.

    ``moments`` is a dict (undeclared moments are zero unless ``extent`` caps
    the declared range) or a callable k -> c_k of a bounded sequence.
    """

    moments: object
    hermitian: bool = False
    extent: int | None = None
    label: str = "toeplitz"

    def __post_init__(self):
        if isinstance(self.moments, dict) and self.hermitian:
            full = dict(self.moments)
            for k, v in list(full.items()):
                if -k not in full:
                    full[-k] = ar.conj(v)
            object.__setattr__(self, "moments", full)

    @property
    def exact_capable(self):
        return isinstance(self.moments, dict)

    @property
    def finite(self):
        return isinstance(self.moments, dict)

    def c(self, k, exact=False):
        if self.extent is not None and abs(k) > self.extent:
            raise ResolutionExceeded(f"moment c_{k} outside declared range |k| <= {self.extent}")
        if isinstance(self.moments, dict):
            v = self.moments.get(k, 0)
        else:
            v = self.moments(k)
            if self.hermitian and k < 0:
                v = ar.conj(self.moments(-k))
        return ar.exact(v) if exact else ar.to_complex(v)

    def support_range(self):
        if not self.finite:
            return None
        ks = [k for k, v in self.moments.items() if not ar.is_zero(v)]
        return (min(ks), max(ks)) if ks else (0, -1)

    def monomial_matrix(self, ea, eb, exact=False):
        ea, eb = np.asarray(ea), np.asarray(eb)
        out = ar.zeros((len(ea), len(eb)), exact)
        cache = {}
        for i, a in enumerate(ea):
            for j, b in enumerate(eb):
                d = int(a - b)
                if d not in cache:
                    cache[d] = self.c(d, exact)
                out[i, j] = cache[d]
        return out

    def cauchy_monomials(self, ea, z, s=1, r=0):
        self.check_cauchy_point(z)
        exact_mode = ar.is_exact_scalar(z) and self.exact_capable
        z = ar.exact(z) if exact_mode else complex(ar.to_complex(z))
        outside = ar.magnitude(z) > 1
        out = ar.zeros(len(ea), exact_mode)
        for i, a in enumerate(ea):
            a = int(a)
            for k in self._series_range(a, s, z, outside):
                coef = _binom(k + s - 1, k)
                if outside:
                    f = ar.falling(-k - s, r)
                    if f == 0:
                        continue
                    cm = self.c(a - k, exact_mode)
                    if ar.is_zero(cm):
                        continue
                    out[i] = out[i] + coef * f * ar.pow_int(z, -k - s - r) * cm
                else:
                    f = ar.falling(k, r)
                    if f == 0:
                        continue
                    cm = self.c(a + k + s, exact_mode)
                    if ar.is_zero(cm):
                        continue
                    out[i] = out[i] + (-1) ** s * coef * f * ar.pow_int(z, k - r) * cm
        return out

    def _series_range(self, a, s, z, outside):
        if self.finite:
            lo, hi = self.support_range()
            if hi < lo:
                return range(0)
            if outside:  # need a - k in [lo, hi]
                return range(max(0, a - hi), max(0, a - lo + 1))
            return range(max(0, lo - a - s), max(0, hi - a - s + 1))
        rho = 1.0 / abs(ar.to_complex(z)) if outside else abs(ar.to_complex(z))
        K = int(math.ceil(math.log(1e-18) / math.log(rho))) + 20 * (s + 2)
        if K > 20000:
            raise ResolutionExceeded("moment series converges too slowly at this point")
        return range(K)

    def adjoint(self):
        if isinstance(self.moments, dict):
            mom = {-k: ar.conj(v) for k, v in self.moments.items()}
        else:
            f = self.moments
            mom = lambda k, f=f: ar.conj(f(-k))  # noqa: E731
        return ToeplitzMoments(mom, False, self.extent, self.label + "^adj")

    def on_unit_circle(self):
        return True

    def radii(self):
        return (1.0, 1.0)

    def as_density(self, grid_size=DEFAULT_GRID):
        theta = 2 * np.pi * np.arange(grid_size) / grid_size
        if self.finite:
            items = [(k, ar.to_complex(v)) for k, v in self.moments.items()]
        else:
            half = grid_size // 2 - 1
            items = [(k, self.c(k)) for k in range(-half, half + 1)]

        def w(t, items=tuple(items)):
            t = np.asarray(t, dtype=float)
            acc = np.zeros(t.shape, dtype=complex)
            for k, c in items:
                acc += c * np.exp(-1j * k * t)
            return acc / (2 * np.pi)

        return CircleDensity(w, grid_size, label=self.label)

    def to_config(self):
        if self.finite:
            return {"kind": "toeplitz", "hermitian": self.hermitian,
                    "moments": [[k, *_pair(v)] for k, v in sorted(self.moments.items())]}
        return {"kind": "toeplitz", "label": self.label}


@dataclass(frozen=True)
class CircleDensity(FunctionalSpec):
    """d mu = w(theta) d theta on the unit circle; trapezoid quadrature."""

    weight: Callable
    grid_size: int = DEFAULT_GRID
    label: str = "density"
    config: dict | None = field(default=None, compare=False)

    @cached_property
    def _samples(self):
        N = self.grid_size
        theta = 2 * np.pi * np.arange(N) / N
        w = np.asarray(self.weight(theta), dtype=complex)
        if w.shape == ():
            w = np.full(N, complex(w))
        return theta, np.exp(1j * theta), w

    @cached_property
    def _moments(self):
        _, _, w = self._samples
        return 2 * np.pi * np.fft.ifft(w)

    def c(self, k):
        if 2 * abs(k) > self.grid_size:
            raise ResolutionExceeded(f"moment c_{k} aliases on a {self.grid_size}-point grid")
        return self._moments[k % self.grid_size]

    def monomial_matrix(self, ea, eb, exact=False):
        if exact:
            raise ResolutionExceeded("a sampled density has no exact moments")
        ea, eb = np.asarray(ea), np.asarray(eb)
        d = ea[:, None] - eb[None, :]
        if d.size and 2 * np.abs(d).max() > self.grid_size:
            raise ResolutionExceeded("exponent spread exceeds the quadrature grid")
        return self._moments[d % self.grid_size]

    def cauchy_monomials(self, ea, z, s=1, r=0):
        self.check_cauchy_point(z)
        z = complex(ar.to_complex(z))
        _, W, w = self._samples
        h = 2 * np.pi / self.grid_size
        kern = ar.falling(-s, r) * (z - np.conj(W)) ** (-s - r) * w * h
        ea = np.asarray(ea)
        powers = W[:, None] ** ea[None, :]
        return kern @ powers

    def adjoint(self):
        f = self.weight
        cfg = None if self.config is None else {"kind": "adjoint", "of": self.config}
        return CircleDensity(lambda t, f=f: np.conj(np.asarray(f(t), dtype=complex)),
                             self.grid_size, self.label + "^adj", cfg)

    def on_unit_circle(self):
        return True

    def radii(self):
        return (1.0, 1.0)

    def as_density(self, grid_size=None):
        return self

    def to_config(self):
        return self.config or {"kind": "density", "label": self.label, "grid_size": self.grid_size}


# --- real line ---------------------------------------------------------------


@dataclass(frozen=True)
class RealLineLaurentMoments(FunctionalSpec):
    """Functional on a real segment [a, b] (0 not inside) given by strong moments s_k."""

    moments: object  # dict or callable k -> s_k
    support: tuple = (1.0, 2.0)
    label: str = "realline"

    def __post_init__(self):
        a, b = self.support
        if not (a < b) or a <= 0 <= b:
            raise ValueError("real support must be a segment avoiding 0")

    @property
    def exact_capable(self):
        return isinstance(self.moments, dict)

    def s(self, k, exact=False):
        if isinstance(self.moments, dict):
            if k not in self.moments:
                raise ResolutionExceeded(f"strong moment s_{k} not declared")
            v = self.moments[k]
        else:
            v = self.moments(k)
        return ar.exact(v) if exact else ar.to_complex(v)

    def monomial_matrix(self, ea, eb, exact=False):
        out = ar.zeros((len(ea), len(eb)), exact)
        for i, a in enumerate(ea):
            for j, b in enumerate(eb):
                out[i, j] = self.s(int(a + b), exact)
        return out

    def radii(self):
        a, b = self.support
        return (min(abs(a), abs(b)), max(abs(a), abs(b)))

    def forbidden_points(self):
        return []

    def check_cauchy_point(self, z, eps=EPS_SUPPORT):
        zc = abs(ar.to_complex(z))
        r, R = self.radii()
        if r * (1 - eps) <= zc <= R * (1 + eps):
            raise SupportCollision(
                f"|z| = {zc} lies in the support annulus [{r}, {R}]; the moment series cannot be used")

    def cauchy_monomials(self, ea, z, s=1, r=0):
        self.check_cauchy_point(z)
        z = complex(ar.to_complex(z))
        rin, rout = self.radii()
        outside = abs(z) > rout
        rho = rout / abs(z) if outside else abs(z) / rin
        K = int(math.ceil(math.log(1e-18) / math.log(rho))) + 20 * (s + r + 2)
        if K > 20000:
            raise ResolutionExceeded("moment series converges too slowly at this point")
        out = np.zeros(len(ea), dtype=complex)
        for i, a in enumerate(ea):
            a = int(a)
            acc = 0j
            for k in range(K):
                coef = _binom(k + s - 1, k)
                if outside:
                    f = ar.falling(-k - s, r)
                    if f:
                        acc += coef * f * z ** (-k - s - r) * self.s(a + k)
                else:
                    f = ar.falling(k, r)
                    if f:
                        acc += (-1) ** s * coef * f * z ** (k - r) * self.s(a - k - s)
            out[i] = acc
        return out

    def adjoint(self):
        if isinstance(self.moments, dict):
            mom = {k: ar.conj(v) for k, v in self.moments.items()}
        else:
            f = self.moments
            mom = lambda k, f=f: np.conj(f(k))  # noqa: E731
        return RealLineLaurentMoments(mom, self.support, self.label + "^adj")

    def to_config(self):
        return {"kind": "realline", "label": self.label, "support": list(self.support)}


def uniform_segment(a, b):
    """Normalized Lebesgue measure on [a, b] as strong moments."""

    def s(k):
        if k == -1:
            return (math.log(abs(b)) - math.log(abs(a))) / (b - a)
        return (b ** (k + 1) - a ** (k + 1)) / ((k + 1) * (b - a))

    return RealLineLaurentMoments(s, (a, b), label=f"uniform({a},{b})")


# --- composite variants -------------------------------------------------------


@dataclass(frozen=True)
class SobolevDiagonal(FunctionalSpec):
    """sum over terms of <D^n p, D^m q>_base."""

    terms: tuple  # ((n, m, base), ...)

    @property
    def exact_capable(self):
        return all(base.exact_capable for _, _, base in self.terms)

    def monomial_matrix(self, ea, eb, exact=False):
        ea, eb = np.asarray(ea), np.asarray(eb)
        out = ar.zeros((len(ea), len(eb)), exact)
        for n, m, base in self.terms:
            fa = np.array([ar.falling(int(a), n) for a in ea])
            fb = np.array([ar.falling(int(b), m) for b in eb])
            inner = base.monomial_matrix(ea - n, eb - m, exact)
            out = out + (fa[:, None] * fb[None, :]) * inner
        return out

    def cauchy_monomials(self, ea, z, s=1, r=0):
        ea = np.asarray(ea)
        out = None
        for n, m, base in self.terms:
            fa = np.array([ar.falling(int(a), n) for a in ea])
            part = _rising(s, m) * fa * base.cauchy_monomials(ea - n, z, s + m, r)
            out = part if out is None else out + part
        return out

    def adjoint(self):
        return SobolevDiagonal(tuple((m, n, base.adjoint()) for n, m, base in self.terms))

    def forbidden_points(self):
        return [p for _, _, b in self.terms for p in b.forbidden_points()]

    def on_unit_circle(self):
        return any(b.on_unit_circle() for _, _, b in self.terms)

    def check_cauchy_point(self, z, eps=EPS_SUPPORT):
        for _, _, b in self.terms:
            b.check_cauchy_point(z, eps)

    def radii(self):
        return _merge_radii(b.radii() for _, _, b in self.terms)

    def to_config(self):
        return {"kind": "sobolev", "terms": [[n, m, b.to_config()] for n, m, b in self.terms]}


@dataclass(frozen=True)
class Atom:
    """weight * p^(k)(point) * conj(q^(l)(point2))."""

    point: object
    orders: tuple = (0, 0)
    weight: object = 1
    point2: object = None

    @property
    def second(self):
        return self.point if self.point2 is None else self.point2


@dataclass(frozen=True)
class PointMasses(FunctionalSpec):
    atoms: tuple

    @property
    def exact_capable(self):
        return True

    def monomial_matrix(self, ea, eb, exact=False):
        out = ar.zeros((len(ea), len(eb)), exact)
        conv = ar.exact if exact else complex
        for at in self.atoms:
            k, l = at.orders
            p1, p2, w = conv(at.point), conv(at.second), conv(at.weight)
            left = ar.zeros(len(ea), exact)
            right = ar.zeros(len(eb), exact)
            for i, a in enumerate(ea):
                f = ar.falling(int(a), k)
                if f:
                    left[i] = f * ar.pow_int(p1, int(a) - k)
            for j, b in enumerate(eb):
                f = ar.falling(int(b), l)
                if f:
                    right[j] = ar.conj(f * ar.pow_int(p2, int(b) - l))
            out = out + np.outer(left, right) * w
        return out

    def cauchy_monomials(self, ea, z, s=1, r=0):
        self.check_cauchy_point(z)
        exact_mode = ar.is_exact_scalar(z)
        conv = ar.exact if exact_mode else complex
        z = conv(ar.to_complex(z)) if not exact_mode else z
        out = ar.zeros(len(ea), exact_mode)
        for at in self.atoms:
            k, l = at.orders
            p1, p2, w = conv(at.point), conv(at.second), conv(at.weight)
            f = ar.falling(-s - l, r)
            if not f:
                continue
            kern = w * _rising(s, l) * f * ar.pow_int(z - ar.conj(p2), -s - l - r)
            for i, a in enumerate(ea):
                g = ar.falling(int(a), k)
                if g:
                    out[i] = out[i] + kern * g * ar.pow_int(p1, int(a) - k)
        return out

    def adjoint(self):
        return PointMasses(tuple(Atom(at.second, (at.orders[1], at.orders[0]), ar.conj(at.weight), at.point)
                                 for at in self.atoms))

    def forbidden_points(self):
        return [np.conj(ar.to_complex(at.second)) for at in self.atoms]

    def radii(self):
        if not self.atoms:
            return None
        mods = [abs(ar.to_complex(at.second)) for at in self.atoms]
        return (min(mods), max(mods))

    def to_config(self):
        return {"kind": "masses", "atoms": [
            {"point": _pair(at.point), "point2": _pair(at.second), "orders": list(at.orders),
             "weight": _pair(at.weight)} for at in self.atoms]}


@dataclass(frozen=True)
class Sum(FunctionalSpec):
    parts: tuple

    @property
    def exact_capable(self):
        return all(p.exact_capable for p in self.parts)

    def monomial_matrix(self, ea, eb, exact=False):
        out = ar.zeros((len(ea), len(eb)), exact)
        for p in self.parts:
            out = out + p.monomial_matrix(ea, eb, exact)
        return out

    def cauchy_monomials(self, ea, z, s=1, r=0):
        self.check_cauchy_point(z)
        out = None
        for p in self.parts:
            v = p.cauchy_monomials(ea, z, s, r)
            out = v if out is None else out + v
        return out

    def adjoint(self):
        return Sum(tuple(p.adjoint() for p in self.parts))

    def check_cauchy_point(self, z, eps=EPS_SUPPORT):
        for p in self.parts:
            p.check_cauchy_point(z, eps)

    def on_unit_circle(self):
        return any(p.on_unit_circle() for p in self.parts)

    def forbidden_points(self):
        return [q for p in self.parts for q in p.forbidden_points()]

    def radii(self):
        return _merge_radii(p.radii() for p in self.parts)

    def to_config(self):
        return {"kind": "sum", "parts": [p.to_config() for p in self.parts]}


def _merge_radii(items):
    items = [r for r in items if r is not None]
    if not items:
        return None
    return (min(r[0] for r in items), max(r[1] for r in items))


def _pair(v):
    if ar.is_exact_scalar(v):
        return [str(v.x), str(v.y)]
    v = ar.to_complex(v)
    return [v.real, v.imag]


# --- operations ----------------------------------------------------------------


@dataclass(frozen=True)
class GramTruncation:
    data: np.ndarray
    size: int
    exact_rows: int
    exact_cols: int
    source: str = ""

    @property
    def exact(self):
        return ar.is_exact(self.data)

    def leading(self, k):
        if k > min(self.exact_rows, self.exact_cols):
            raise ResolutionExceeded(f"requested {k} rows but only {self.exact_rows} are exact")
        return GramTruncation(self.data[:k, :k], k, k, k, self.source)


def _exps(p):
    return np.array([k for k, _ in p.terms], dtype=int), [c for _, c in p.terms]


def pair(spec, p, q, exact=None):
    """<p(z1), q(z2)>_u, linear in p and conjugate-linear in q."""
    if not isinstance(p, LaurentPoly) or not isinstance(q, LaurentPoly):
        raise TypeError("pair expects Laurent polynomials")
    if p.is_zero() or q.is_zero():
        return ar.zero(bool(exact))
    if exact is None:
        exact = p.exact and q.exact and spec.exact_capable
    ea, ca = _exps(p)
    eb, cb = _exps(q)
    K = spec.monomial_matrix(ea, eb, exact)
    conv = ar.exact if exact else ar.to_complex
    left = np.array([conv(c) for c in ca], dtype=object if exact else complex)
    right = ar.conj(np.array([conv(c) for c in cb], dtype=object if exact else complex))
    return left @ K @ right


def gram(spec, M, exact=False):
    if M < 1:
        raise ValueError("Gram size must be positive")
    e = exponents(M)
    data = spec.monomial_matrix(e, e, exact)
    return GramTruncation(data, M, M, M, source=type(spec).__name__)


def cauchy_pair(spec, p, z, side="second", order=0):
    """Cauchy pairing of p against 1/(conj(z) - w).

    side="second": d^order/dz^order <p(z1), 1/(conj(z) - z2)>_u  (holomorphic in z);
    side="first":  d^order/d conj(z)^order <1/(conj(z) - z1), p(z2)>_u, which is the
    complex conjugate of the holomorphic transform of p under the adjoint form.
    """
    if side == "first":
        return ar.conj(cauchy_pair(spec.adjoint(), p, z, "second", order))
    if side != "second":
        raise ValueError("side must be 'first' or 'second'")
    if p.is_zero():
        return 0j
    ea, ca = _exps(p)
    vals = spec.cauchy_monomials(ea, z, 1, order)
    total = ar.zero(ar.is_exact(vals))
    for c, v in zip(ca, vals):
        total = total + c * v
    return total


def cauchy_rows(spec, S, z, order=0):
    """Holomorphic Cauchy transforms of every row of S (rows in CMV coefficients)."""
    M = S.shape[1]
    vals = spec.cauchy_monomials(exponents(M), z, 1, order)
    if ar.is_exact(vals) != ar.is_exact(S):
        vals = ar.to_complex_array(vals)
        S = ar.to_complex_array(S)
    return S @ vals


# --- built-ins and configuration ----------------------------------------------------


def lebesgue(grid_size=DEFAULT_GRID):
    return CircleDensity(lambda t: np.full(np.shape(t), 1 / (2 * np.pi), dtype=complex), grid_size,
                         "lebesgue", {"kind": "density", "name": "lebesgue", "grid_size": grid_size})


def one_plus_cos(grid_size=DEFAULT_GRID):
    return CircleDensity(lambda t: (1 + np.cos(t)) / (2 * np.pi) + 0j, grid_size, "one_plus_cos",
                         {"kind": "density", "name": "one_plus_cos", "grid_size": grid_size})


def bernstein_szego(a, grid_size=DEFAULT_GRID):
    a = complex(a)
    if abs(a) >= 1:
        raise ValueError("Bernstein-Szego parameter must satisfy |a| < 1")

    def w(t):
        return (1 - abs(a) ** 2) / (2 * np.pi * np.abs(1 - a * np.exp(1j * t)) ** 2) + 0j

    return CircleDensity(w, grid_size, f"bernstein_szego({a.real:g})",
                         {"kind": "density", "name": "bernstein_szego", "params": [a.real, a.imag],
                          "grid_size": grid_size})


def lebesgue_plus_sobolev_mass(grid_size=DEFAULT_GRID):
    """Lebesgue measure plus a discrete Sobolev part at z = 1 with an off-diagonal term."""
    masses = PointMasses((Atom(1.0, (1, 1), 0.5), Atom(1.0, (0, 1), 0.25)))
    return Sum((lebesgue(grid_size), masses))


def lebesgue_moments(exact=False):
    one = ar.exact(1) if exact else 1.0
    return ToeplitzMoments({0: one}, hermitian=True, label="lebesgue")


def one_plus_cos_moments(exact=False):
    half = ar.exact(Fraction(1, 2)) if exact else 0.5
    one = ar.exact(1) if exact else 1.0
    return ToeplitzMoments({0: one, 1: half, -1: half}, hermitian=True, label="one_plus_cos")


def bernstein_szego_moments(a):
    a = float(a)
    return ToeplitzMoments(lambda k: a ** abs(k), hermitian=False, label=f"bernstein_szego({a:g})")


BUILTIN = {
    "lebesgue": lambda params, grid: lebesgue(grid),
    "one_plus_cos": lambda params, grid: one_plus_cos(grid),
    "bernstein_szego": lambda params, grid: bernstein_szego(
        complex(*params) if len(params) == 2 else (params[0] if params else 0.5), grid),
    "lebesgue_plus_sobolev_mass": lambda params, grid: lebesgue_plus_sobolev_mass(grid),
}


EXACT_BUILTIN = {"lebesgue": lebesgue_moments, "one_plus_cos": one_plus_cos_moments}


def _parse_name(name):
    name = name.strip()
    if "(" in name:
        head, rest = name.split("(", 1)
        params = [float(x) for x in rest.rstrip(")").split(",") if x.strip()]
        return head.strip(), params
    return name, []


def _num(v, exact):
    if isinstance(v, (list, tuple)):
        return ar.exact((v[0], v[1])) if exact else complex(float(v[0]), float(v[1]))
    return ar.exact(v) if exact else complex(float(v))


def from_config(cfg, exact=False):
    """Build a FunctionalSpec from its JSON description (dict or built-in name)."""
    if isinstance(cfg, str):
        name, params = _parse_name(cfg)
        if name not in BUILTIN:
            raise ValueError(f"unknown built-in functional {name!r}")
        if exact and name in EXACT_BUILTIN:
            return EXACT_BUILTIN[name](exact=True)
        return BUILTIN[name](params, DEFAULT_GRID)
    kind = cfg.get("kind")
    if kind == "toeplitz":
        mom = {int(k): _num((re, im), exact) for k, re, im in cfg["moments"]}
        return ToeplitzMoments(mom, bool(cfg.get("hermitian", False)), cfg.get("extent"))
    if kind == "density":
        grid = int(cfg.get("grid_size", DEFAULT_GRID))
        if "name" in cfg:
            name, params = _parse_name(cfg["name"])
            params = cfg.get("params", params)
            if name not in BUILTIN:
                raise ValueError(f"unknown density {name!r}")
            return BUILTIN[name](params, grid)
        samples = np.array([complex(re, im) for re, im in cfg["samples"]])
        n = len(samples)
        return CircleDensity(lambda t, s=samples: s if np.shape(t) == (n,) else np.interp(t, 2 * np.pi * np.arange(n) / n, s),
                             n, "sampled", dict(cfg))
    if kind == "realline":
        support = tuple(float(x) for x in cfg["support"])
        if "moments" in cfg:
            mom = {int(k): _num((re, im), exact) for k, re, im in cfg["moments"]}
            return RealLineLaurentMoments(mom, support)
        return uniform_segment(*support)
    if kind == "sobolev":
        return SobolevDiagonal(tuple((int(n), int(m), from_config(b, exact)) for n, m, b in cfg["terms"]))
    if kind == "masses":
        atoms = []
        for a in cfg["atoms"]:
            p = _num(a["point"], exact)
            p2 = _num(a["point2"], exact) if "point2" in a else None
            atoms.append(Atom(p, tuple(int(x) for x in a.get("orders", (0, 0))), _num(a.get("weight", 1), exact), p2))
        return PointMasses(tuple(atoms))
    if kind == "sum":
        return Sum(tuple(from_config(p, exact) for p in cfg["parts"]))
    raise ValueError(f"unknown functional kind {kind!r}")


# --- Geronimus division ------------------------------------------------------------


def _series_mul(a, b, K):
    out = [a[0] * 0 for _ in range(K)]
    for i, x in enumerate(a[:K]):
        if ar.is_zero(x):
            continue
        for j, y in enumerate(b[:K - i]):
            out[i + j] = out[i + j] + x * y
    return out


def _series_binom(c, p, K, one):
    """Taylor coefficients of (c + t)^p in t, p any integer, c != 0 unless p >= 0."""
    out, coef = [], one
    for k in range(K):
        if p >= 0 and k > p:
            out.append(one * 0)
            continue
        out.append(coef * ar.pow_int(c, p - k))
        coef = coef * (p - k) / (k + 1)
    return out


@dataclass(frozen=True)
class DividedToeplitz(FunctionalSpec):
    """u / L(z1) (side 1) or u / conj(L(z2)) (side 2) for a finite Toeplitz u, by residues.

    Moments of dtheta / (2 pi L) are residue sums of z^(m-1+n) / (L_n prod (z - zeta)^mult)
    inside the unit disk, so they stay exact when u and L are.
    """

    base: ToeplitzMoments
    L: object
    side: int = 1

    @property
    def exact_capable(self):
        return self.L.exact

    @cached_property
    def _divisor(self):
        from .laurent import prepared_star
        return self.L if self.side == 1 else prepared_star(self.L)

    @cached_property
    def _density(self):
        return divide(self.base, self.L, self.side)

    def _inside(self, z):
        if ar.is_exact_scalar(z):
            return z.x ** 2 + z.y ** 2 < 1
        return abs(z) < 1

    def _mu(self, m, exact_mode, cache):
        key = (m, exact_mode)
        if key in cache:
            return cache[key]
        D = self._divisor
        conv = ar.exact if exact_mode else (lambda v: complex(ar.to_complex(v)))
        one = ar.one(exact_mode)
        zeros = [(conv(z), int(k)) for z, k in D.spectral.zeros]
        p = m - 1 + D.n
        total = ar.zero(exact_mode)
        for i, (zi, mi) in enumerate(zeros):
            if not self._inside(zi):
                continue
            ser = _series_binom(zi, p, mi, one)
            for j, (zj, mj) in enumerate(zeros):
                if j != i:
                    ser = _series_mul(ser, _series_binom(zi - zj, -mj, mi, one), mi)
            total = total + ser[mi - 1]
        if p < 0:
            K = -p
            ser = [one] + [one * 0] * (K - 1)
            for zj, mj in zeros:
                ser = _series_mul(ser, _series_binom(-zj, -mj, K, one), K)
            total = total + ser[K - 1]
        out = total / conv(D.leading)
        cache[key] = out
        return out

    def c(self, k, exact=False, cache=None):
        cache = {} if cache is None else cache
        acc = ar.zero(exact)
        for j, v in self.base.moments.items():
            v = ar.exact(v) if exact else ar.to_complex(v)
            if not ar.is_zero(v):
                acc = acc + v * self._mu(k - j, exact, cache)
        return acc

    def monomial_matrix(self, ea, eb, exact=False):
        if exact and not self.exact_capable:
            raise ResolutionExceeded("exact moments need an exact perturbing polynomial")
        ea, eb = np.asarray(ea), np.asarray(eb)
        out = ar.zeros((len(ea), len(eb)), exact)
        cache, mom = {}, {}
        for i, a in enumerate(ea):
            for j, b in enumerate(eb):
                d = int(a - b)
                if d not in mom:
                    mom[d] = self.c(d, exact, cache)
                out[i, j] = mom[d]
        return out

    def cauchy_monomials(self, ea, z, s=1, r=0):
        return self._density.cauchy_monomials(ea, z, s, r)

    def check_cauchy_point(self, z, eps=EPS_SUPPORT):
        self._density.check_cauchy_point(z, eps)

    def adjoint(self):
        return DividedToeplitz(self.base.adjoint(), self.L, 3 - self.side)

    def on_unit_circle(self):
        return True

    def radii(self):
        return (1.0, 1.0)

    def as_density(self, grid_size=None):
        return self._density

    def to_config(self):
        return {"kind": "divided", "side": self.side, "base": self.base.to_config()}


def divide_by_residues(spec, L, side=1, eps=EPS_SUPPORT):
    """Like ``divide`` but keeps a finite Toeplitz form exact."""
    if not (isinstance(spec, ToeplitzMoments) and spec.finite):
        return divide(spec, L, side, eps)
    for z in L.spectral.points:
        if abs(abs(ar.to_complex(z)) - 1.0) < eps:
            raise SupportCollision(f"zero {ar.to_complex(z)} of the perturbing polynomial lies on the unit circle")
    return DividedToeplitz(spec, L, side)


def divide(spec, L, side=1, eps=EPS_SUPPORT):
    """u / L(z1) (side 1) or u / conj(L(z2)) (side 2) for circle-supported forms."""
    zs = [ar.to_complex(z) for z in L.spectral.points]
    if isinstance(spec, Sum):
        return Sum(tuple(divide(p, L, side, eps) for p in spec.parts))
    if isinstance(spec, ToeplitzMoments):
        spec = spec.as_density()
    if not isinstance(spec, CircleDensity):
        raise NotImplementedError(f"division by a Laurent polynomial is not available for {type(spec).__name__}")
    for z in zs:
        if abs(abs(z) - 1.0) < eps:
            raise SupportCollision(f"zero {z} of the perturbing polynomial lies on the unit circle")
    Ld = L.poly.to_double()
    f = spec.weight
    if side == 1:
        def w(t):
            return np.asarray(f(t), dtype=complex) / Ld(np.exp(1j * np.asarray(t)))
    else:
        def w(t):
            return np.asarray(f(t), dtype=complex) / np.conj(Ld(np.exp(1j * np.asarray(t))))
    return CircleDensity(w, spec.grid_size, f"{spec.label}/L[{side}]")


def multiply(spec, L, side=1):
    """L(z1) u (side 1) or conj(L(z2)) u (side 2) for circle-supported forms."""
    if isinstance(spec, Sum):
        return Sum(tuple(multiply(p, L, side) for p in spec.parts))
    if isinstance(spec, PointMasses):
        return _multiply_atoms(spec, L, side)
    if isinstance(spec, ToeplitzMoments):
        spec = spec.as_density()
    if not isinstance(spec, CircleDensity):
        raise NotImplementedError(f"multiplication by a Laurent polynomial is not available for {type(spec).__name__}")
    Ld = L.poly.to_double()
    f = spec.weight
    if side == 1:
        def w(t):
            return np.asarray(f(t), dtype=complex) * Ld(np.exp(1j * np.asarray(t)))
    else:
        def w(t):
            return np.asarray(f(t), dtype=complex) * np.conj(Ld(np.exp(1j * np.asarray(t))))
    return CircleDensity(w, spec.grid_size, f"{spec.label}*L[{side}]")


def _multiply_atoms(spec, L, side):
    # Leibniz: (L p)^(k) = sum_a C(k, a) L^(k-a) p^(a)
    Ld = L.poly.to_double()
    atoms = []
    for at in spec.atoms:
        k, l = at.orders
        w = ar.to_complex(at.weight)
        if side == 1:
            pt = ar.to_complex(at.point)
            for a in range(k + 1):
                c = _binom(k, a) * Ld(pt, k - a)
                if c:
                    atoms.append(Atom(at.point, (a, l), w * c, at.point2))
        else:
            pt = ar.to_complex(at.second)
            for a in range(l + 1):
                c = _binom(l, a) * np.conj(Ld(pt, l - a))
                if c:
                    atoms.append(Atom(at.point, (k, a), w * c, at.point2))
    return PointMasses(tuple(atoms))
