"""Christoffel and Geronimus perturbations of a bivariate form, by refactorization and by closed formulas.

Christoffel:  u -> L(z1) u  (side 1)      or  u conj(L(z2))  (side 2)
Geronimus:    u -> u / L(z1) + masses     or  u / conj(L(z2)) + masses

Every closed formula is implemented once, for Christoffel side 1 and
Geronimus side 2. The other sides are the same formulas applied to the
adjoint form <p, q>' = conj(<q, p>), under which the two families swap and
H is conjugated.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from math import factorial

import numpy as np

from . import _arith as ar
from .cmv import laurent_of_upsilon
from .errors import IncompatibleTruncations, SupportCollision
from .functional import (Atom, CircleDensity, GramTruncation, PointMasses, Sum, ToeplitzMoments,
                         divide, divide_by_residues, gram, multiply)
from .gaussborel import BiorthSystem, cd_kernel, factorize, phi_values
from .jets import as_general, ell_matrix, jet_values, mass_pair
from .laurent import LaurentPoly, divided_difference, prepared_star
from .quasidet import BlockMatrix, theta_star
from .secondkind import c_values, mixed_kernel

SAFETY = 4


@dataclass(frozen=True)
class TransformRequest:
    kind: str  # christoffel | geronimus
    side: int
    L: object  # PreparedLaurent
    base: object  # FunctionalSpec
    degrees: int = 12
    mass: object = None
    exact: bool = False

    def __post_init__(self):
        if self.kind not in ("christoffel", "geronimus"):
            raise ValueError(f"unknown transform kind {self.kind!r}")
        if self.side not in (1, 2):
            raise ValueError("side must be 1 or 2")
        if self.L.poly.n != self.L.poly.m:
            raise ValueError("the perturbing Laurent polynomial must have equal extreme degrees")
        if self.kind == "christoffel" and self.mass is not None:
            raise ValueError("Christoffel transforms carry no masses")

    @property
    def n(self):
        return self.L.n

    @property
    def budget(self):
        return self.degrees + 2 * self.n + SAFETY

    def degree_range(self):
        lo = 2 * self.n if self.kind == "geronimus" else 0
        return list(range(lo, self.degrees + 1))

    def to_json(self):
        out = {"kind": self.kind, "side": self.side, "L": self.L.to_json(), "degrees": self.degrees,
               "arith": "exact" if self.exact else "double"}
        try:
            out["base"] = self.base.to_config()
        except NotImplementedError:
            out["base"] = type(self.base).__name__
        if self.mass is not None:
            out["mass"] = self.mass.to_json()
        return out


# --- helpers ------------------------------------------------------------------------------


def rel_error(a, b):
    """max |a - b| / max |b| (absolute when b vanishes)."""
    a = ar.to_complex_array(np.asarray(a))
    b = ar.to_complex_array(np.asarray(b))
    num = float(np.max(np.abs(a - b))) if a.size else 0.0
    den = float(np.max(np.abs(b))) if b.size else 0.0
    return num / den if den > 0 else num


def sym_error(a, b):
    """max |a - b| / max(|a|, |b|); symmetric, for identities without a preferred side."""
    a = ar.to_complex_array(np.asarray(a))
    b = ar.to_complex_array(np.asarray(b))
    if not a.size:
        return 0.0
    den = max(float(np.max(np.abs(a))), float(np.max(np.abs(b))))
    num = float(np.max(np.abs(a - b)))
    return num / den if den > 0 else num


def sample_points(count, seed=7, radii=(0.55, 1.8), avoid=(), exact=False):
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        r = rng.uniform(*radii)
        z = r * np.exp(2j * np.pi * rng.uniform())
        if abs(abs(z) - 1) < 0.15 or any(abs(z - a) < 0.25 for a in avoid):
            continue
        z = complex(round(z.real, 6), round(z.imag, 6))
        out.append(ar.exact(z) if exact else z)
    return out


def _values(sys, family, zs, count, order=0):
    return np.stack([phi_values(sys, family, z, order, count) for z in zs], axis=1)


def phi_jets(sys, family, L, count, conjugated=False):
    """Row k is the spectral jet of phi_{family,k} along L."""
    return jet_values(lambda z, r: phi_values(sys, family, z, r, count), L, conjugated)


def _unit(n, i, exact_mode):
    e = ar.zeros(n, exact_mode)
    if n:
        e[i] = ar.one(exact_mode)
    return e


def _conform(sys, L, zs):
    """Bring the polynomial and the sample points to the backend of the system."""
    if sys.exact:
        return L if L.exact else None, [ar.exact(z) for z in zs]
    return (L.__class__(L.poly.to_double(), L.spectral, ar.to_complex(L.leading)) if L.exact else L,
            [ar.to_complex(z) for z in zs])


def _dbl_prepared(L):
    if not L.exact:
        return L
    from .laurent import prepared_from_zeros, SpectralData
    return prepared_from_zeros(ar.to_complex(L.leading),
                               SpectralData(tuple((ar.to_complex(z), m) for z, m in L.spectral.zeros)), exact=False)


# --- Gram level ------------------------------------------------------------------------------


def christoffel_gram(G, L, side, M):
    """Leading M x M block of L(Upsilon) G (side 1) or G L(Upsilon)^dagger (side 2); needs G of size M + 2n."""
    data = G.data if isinstance(G, GramTruncation) else np.asarray(G)
    need = M + 2 * L.n
    if data.shape[0] < need:
        raise IncompatibleTruncations(f"Gram of size {data.shape[0]} cannot deliver {M} perturbed rows (needs {need})")
    exact_mode = ar.is_exact(data)
    P = laurent_of_upsilon(L.poly if exact_mode or not L.exact else L.poly.to_double(), need, exact=exact_mode).data
    if exact_mode and not L.exact:
        raise ValueError("exact Gram needs an exact perturbing polynomial")
    data = data[:need, :need]
    if side == 1:
        out = (P @ data)[:M, :M]
    else:
        out = (data @ ar.conj(P).T)[:M, :M]
    return GramTruncation(out, M, M, M, f"christoffel[{side}]")


def base_gram(req, size=None):
    size = req.budget if size is None else size
    if req.exact and not req.base.exact_capable:
        raise ValueError(f"{type(req.base).__name__} has no exact moments")
    return gram(req.base, size, exact=req.exact)


def christoffel_direct(req, G=None):
    G = base_gram(req) if G is None else G
    M = G.data.shape[0] - 2 * req.n
    return factorize(christoffel_gram(G, req.L, req.side, M))


def mass_atoms(xi, side, exact=False):
    """PointMasses atoms of the mass part of a Geronimus form with functionals ``xi``.

    Side 2: sum <xi_{j,l}, p> (1/l!) conj(q^(l)(zeta_j));
    side 1: sum (1/l!) p^(l)(zeta_i) conj(<xi_{i,l}, q>).
    """
    conv = ar.exact if exact else ar.to_complex
    atoms = []
    for (z, r), terms in zip(xi.slots, xi.general.xi):
        for p, o, w in terms:
            if side == 2:
                atoms.append(Atom(conv(p), (int(o), r), conv(w) / factorial(r), conv(z)))
            else:
                atoms.append(Atom(conv(z), (r, int(o)), ar.conj(conv(w)) / factorial(r), conv(p)))
    return tuple(atoms)


@dataclass(frozen=True)
class SlottedMass:
    general: object
    slots: tuple  # ((zeta, r), ...) in jet order


def slotted(req_or_mass, L=None, side=None):
    if isinstance(req_or_mass, TransformRequest):
        mass, L, side = req_or_mass.mass, req_or_mass.L, req_or_mass.side
    else:
        mass = req_or_mass
    g = as_general(mass, L, side)
    slots = tuple((z, r) for z, m in L.spectral.zeros for r in range(m))
    return SlottedMass(g, slots)


def perturbed_spec(req, exact=False):
    """The transformed form; ``exact`` keeps a Geronimus quotient of finite Toeplitz data rational."""
    if req.kind == "christoffel":
        return multiply(req.base, _dbl_prepared(req.L), req.side)
    if exact:
        quotient = divide_by_residues(req.base, req.L, req.side)
    else:
        quotient = divide(req.base, _dbl_prepared(req.L), req.side)
    atoms = mass_atoms(slotted(req), req.side, exact)
    return Sum((quotient, PointMasses(atoms))) if atoms else quotient


def exact_geronimus_ok(req):
    return req.L.exact and isinstance(req.base, ToeplitzMoments) and req.base.finite


def geronimus_direct(req, size=None):
    size = req.budget if size is None else size
    if req.exact and not exact_geronimus_ok(req):
        raise ValueError("exact Geronimus transforms need finite Toeplitz moments and an exact polynomial")
    spec = perturbed_spec(req, req.exact)
    return factorize(gram(spec, size, exact=req.exact))


# --- Christoffel formulas --------------------------------------------------------------------


@dataclass
class FormulaRecord:
    """Per-degree output of a closed formula, in the requested side's conventions.

    ``phi1``/``phi2c`` are phi_{1,l}(z) and conj(phi_{2,l}(z)) at the samples.
    ``alt`` holds the second displayed route for the norm and for the family
    built from kernel jets; ``qd`` is the worst Schur/determinant disagreement.
    """

    l: int
    H: object
    phi1: np.ndarray
    phi2c: np.ndarray
    alt: dict = field(default_factory=dict)
    tau: object = None
    qd: float = 0.0


def _chris_side1(sys, L, l, zs):
    n2 = 2 * L.n
    ex = sys.exact
    cor = L.corner(l)
    J = phi_jets(sys, 1, L, l + n2 + 1)
    Phi = _values(sys, 1, zs, l + n2 + 1)[l:]
    A = J[l:l + n2]
    A1 = J[l + 1:l + n2 + 1]
    Lz = np.array([L(z) for z in zs], dtype=object if ex else complex)
    r1 = theta_star(BlockMatrix.build(A, Phi[:n2], J[l + n2], Phi[n2]), report=True)
    phi1 = np.asarray(r1.value).reshape(-1) * cor / Lz
    rH = theta_star(BlockMatrix.build(A, _unit(n2, 0, ex).reshape(n2, 1), J[l + n2], [ar.zero(ex)]), report=True)
    H = cor * sys.H[l] * rH.value
    tau_l, tau_l1 = ar.det(A), ar.det(A1)
    H_det = cor * sys.H[l] * tau_l1 / tau_l
    Hs = sys.H[:l + 1]
    e_last = _unit(n2, n2 - 1, ex).reshape(n2, 1)
    phi2c, phi2c_det, qd = [], [], max(r1.discrepancy, rH.discrepancy)
    for z in zs:
        a = ar.conj(phi_values(sys, 2, z, 0, l + 1)) / Hs
        JK = a @ J[:l + 1]
        r2 = theta_star(BlockMatrix.build(A1, e_last, JK, [ar.zero(ex)]), report=True)
        qd = max(qd, r2.discrepancy)
        phi2c.append(H / cor * r2.value)
        stack = np.concatenate([J[l + 1:l + n2], JK.reshape(1, -1)], axis=0)
        phi2c_det.append(-sys.H[l] * ar.det(stack) / tau_l)
    mode = object if ex else complex
    return FormulaRecord(l, H, phi1, np.array(phi2c, dtype=mode),
                         {"H": H_det, "phi2c": np.array(phi2c_det, dtype=mode)}, tau_l, qd)


def _constant_record(sys, L, l, zs, family_scale):
    c = L.corner(l)
    phi1 = np.array([phi_values(sys, 1, z, 0, l + 1)[l] for z in zs])
    phi2c = ar.conj(np.array([phi_values(sys, 2, z, 0, l + 1)[l] for z in zs]))
    H = family_scale(c) * sys.H[l]
    return FormulaRecord(l, H, phi1, phi2c, {"H": H, "phi2c": phi2c}, ar.one(sys.exact), 0.0)


def _mirror(rec):
    """Record of the adjoint system -> record of the original (families swap, H conjugates)."""
    alt = {"H": ar.conj(rec.alt["H"]), "phi1": ar.conj(rec.alt["phi2c"])}
    return FormulaRecord(rec.l, ar.conj(rec.H), ar.conj(rec.phi2c), ar.conj(rec.phi1), alt,
                         ar.conj(rec.tau) if rec.tau is not None else None, rec.qd)


def christoffel_formula(req, base_sys, ls=None, zs=None):
    """Closed-formula perturbed quantities for each l, in the request's side conventions."""
    ls = req.degree_range() if ls is None else ls
    L, zs = _conform(base_sys, req.L, zs if zs is not None else sample_points(6, avoid=_zero_list(req.L)))
    if L is None:
        raise ValueError("exact systems need an exact perturbing polynomial")
    sys = base_sys if req.side == 1 else base_sys.adjoint()
    out = []
    for l in ls:
        if L.n == 0:
            rec = _constant_record(sys, L, l, zs, lambda c: c)
        else:
            rec = _chris_side1(sys, L, l, zs)
        if req.side == 1:
            rec.alt = {"H": rec.alt["H"], "phi2c": rec.alt["phi2c"]}
        else:
            rec = _mirror(rec)
        out.append(rec)
    return out, zs


def _zero_list(L):
    return [ar.to_complex(z) for z in L.spectral.points] + [np.conj(ar.to_complex(z)) for z in L.spectral.points]


# --- Geronimus formulas ------------------------------------------------------------------------


@dataclass
class GeronimusData:
    """Rows R_k = J^{Lbar}_{C1,k} - <xi, phi_{1,k}> Ell for k < count, plus their ingredients."""

    R: np.ndarray
    JC: np.ndarray
    XI: np.ndarray
    ell: np.ndarray


def geronimus_rows(sys, spec, L, xi, count):
    ex = sys.exact
    JC = np.asarray(jet_values(lambda z, r: c_values(spec, sys, 1, z, r, count), L, conjugated=True),
                    dtype=object if ex else complex)
    XI = mass_pair(xi.general, lambda p, o: phi_values(sys, 1, p, o, count), exact=ex)
    ell = ell_matrix(L) if ex else ar.to_complex_array(ell_matrix(L))
    R = JC - XI @ ell
    return GeronimusData(R, JC, XI, ell)


def _ger_side2(sys, spec, L, xi, l, zs, data=None):
    n2 = 2 * L.n
    ex = sys.exact
    data = geronimus_rows(sys, spec, L, xi, l + 1) if data is None else data
    R = data.R
    T = R[l - n2:l]
    pref = sys.H[l - n2] / ar.conj(L.corner(l))
    Phi = _values(sys, 1, zs, l + 1)[l - n2:]
    r1 = theta_star(BlockMatrix.build(T, Phi[:n2], R[l], Phi[n2]), report=True)
    e1 = _unit(n2, 0, ex).reshape(n2, 1)
    rH = theta_star(BlockMatrix.build(T, e1, R[l], [ar.zero(ex)]), report=True)
    H = pref * rH.value
    tau_l = ar.det(T)
    H_det = pref * ar.det(R[l - n2 + 1:l + 1]) / tau_l
    Lbar = L.poly.bar()
    dd = divided_difference(Lbar)
    Hs = sys.H[:l]
    phi2c, phi2c_det, qd = [], [], max(r1.discrepancy, rH.discrepancy)
    for z in zs:
        a = ar.conj(phi_values(sys, 2, z, 0, l)) / Hs
        poly = dd.in_second(ar.conj(z))
        jd = np.asarray(jet_values(lambda x, r: poly(x, r), L, conjugated=True), dtype=object if ex else complex)
        Q = (a @ R[:l]) * ar.conj(L(z)) + jd
        r2 = theta_star(BlockMatrix.build(T, e1, Q, [ar.zero(ex)]), report=True)
        qd = max(qd, r2.discrepancy)
        phi2c.append(-pref * r2.value)
        stack = np.concatenate([R[l - n2 + 1:l], Q.reshape(1, -1)], axis=0)
        phi2c_det.append(-pref * ar.det(stack) / tau_l)
    mode = object if ex else complex
    return FormulaRecord(l, H, np.asarray(r1.value).reshape(-1), np.array(phi2c, dtype=mode),
                         {"H": H_det, "phi2c": np.array(phi2c_det, dtype=mode)}, tau_l, qd)


def geronimus_formula(req, base_sys, ls=None, zs=None, spec=None):
    """Closed-formula Geronimus quantities for each l >= 2n, in the request's side conventions."""
    if req.n == 0:
        raise ValueError("a Geronimus transform needs a nonconstant prepared polynomial")
    ls = req.degree_range() if ls is None else ls
    if any(l < 2 * req.n for l in ls):
        raise ValueError(f"Geronimus formulas need l >= 2n = {2 * req.n}")
    zs = zs if zs is not None else sample_points(6, avoid=_zero_list(req.L))
    if base_sys.exact and req.L.exact and req.base.exact_capable:
        L, sys, zs = req.L, base_sys, [ar.exact(z) for z in zs]
    else:
        L, sys, zs = _dbl_prepared(req.L), base_sys.to_double(), [ar.to_complex(z) for z in zs]
    spec = req.base if spec is None else spec
    _check_geronimus_support(spec, L, req.side)
    xi = slotted(req.mass, L, req.side)
    if req.side == 2:
        s, sp = sys, spec
    else:
        s, sp = sys.adjoint(), spec.adjoint()
    data = geronimus_rows(s, sp, L, xi, max(ls) + 1)
    out = []
    for l in ls:
        rec = _ger_side2(s, sp, L, xi, l, zs, data)
        if req.side == 2:
            rec.alt = {"H": rec.alt["H"], "phi2c": rec.alt["phi2c"]}
        else:
            rec = _mirror(rec)
        out.append(rec)
    return out, zs


def _check_geronimus_support(spec, L, side):
    probe = spec if side == 2 else spec.adjoint()
    for z in L.spectral.points:
        try:
            probe.check_cauchy_point(np.conj(ar.to_complex(z)))
        except SupportCollision as exc:
            raise SupportCollision(f"zero {ar.to_complex(z)} of the perturbing polynomial meets the support: {exc}")


# --- connectors -------------------------------------------------------------------------------


@dataclass
class ConnectorReport:
    first: np.ndarray
    second: np.ndarray
    residuals: dict


def _band_residual(A, lo, hi):
    """Largest entry outside lo <= j - i <= hi, relative to max |A|."""
    A = ar.to_complex_array(A)
    i, j = np.indices(A.shape)
    d = j - i
    scale = float(np.max(np.abs(A))) or 1.0
    off = np.abs(A[(d < lo) | (d > hi)])
    return float(off.max()) / scale if off.size else 0.0


def _diag_min(A, offset):
    A = ar.to_complex_array(A)
    v = np.abs(np.diagonal(A, offset))
    return float(v.min()) if v.size else float("inf")


def _christoffel_connectors(base, pert, L):
    M, Mp, n2 = base.size, pert.size, 2 * L.n
    if M < Mp + n2:
        raise IncompatibleTruncations(f"base system of size {M} is too small for {Mp} perturbed rows")
    ex = base.exact and pert.exact
    if not ex:
        base, pert = base.to_double(), pert.to_double()
        L = _dbl_prepared(L)
    P = laurent_of_upsilon(L.poly, M, exact=ex).data
    w1 = pert.S1 @ P[:Mp, :M] @ ar.inv_unit_lower(base.S1)
    w2 = base.S2[:Mp, :Mp] @ ar.inv_unit_lower(pert.S2)
    lhs = np.diag(pert.H) @ ar.conj(w2).T if ex else np.diag(pert.H) @ np.conj(w2).T
    rhs = w1[:, :Mp] @ (np.diag(base.H[:Mp]))
    corner = [w1[k, k + n2] for k in range(Mp)]
    res = {
        "band_first": _band_residual(w1, 0, n2),
        "band_second": _band_residual(w2, -n2, 0),
        "outer_first_min": _diag_min(w1, n2),
        "outer_second_min": _diag_min(w2[n2:, :], 0) if n2 == 0 else _diag_min(w2, -n2),
        "ligature": sym_error(lhs, rhs),
        "corner": rel_error(np.array(corner), np.array([L.corner(k) for k in range(Mp)])) if Mp else 0.0,
    }
    return ConnectorReport(w1, w2, res)


def _geronimus_connectors(base, pert, L):
    ex = base.exact and pert.exact and L.exact
    if not ex:
        base, pert = base.to_double(), pert.to_double()
        L = _dbl_prepared(L)
    M, n2 = min(base.size, pert.size), 2 * L.n
    if M <= n2:
        raise IncompatibleTruncations("systems too small to expose the connector band")
    P = laurent_of_upsilon(L.poly, M, exact=ex).data
    O1 = pert.S1[:M, :M] @ ar.inv_unit_lower(base.S1[:M, :M])
    O2 = (base.S2[:M, :M] @ P @ ar.inv_unit_lower(pert.S2[:M, :M]))[:M - n2]
    K = M - n2
    lhs = np.diag(pert.H[:K]) @ ar.conj(O2[:, :K]).T
    rhs = O1[:K, :K] @ np.diag(base.H[:K])
    ks = range(n2, M)
    mode = object if ex else complex
    corner = np.array([O1[k, k - n2] for k in ks], dtype=mode)
    corner_ref = np.array([ar.conj(L.corner(k)) * pert.H[k] / base.H[k - n2] for k in ks], dtype=mode)
    res = {
        "band_first": _band_residual(O1, -n2, 0),
        "band_second": _band_residual(O2, 0, n2),
        "outer_first_min": _diag_min(O1, -n2),
        "outer_second_min": _diag_min(O2, n2),
        "ligature": sym_error(lhs, rhs),
        "corner": rel_error(corner, corner_ref),
        "corner_second": rel_error(np.array([O2[k, k + n2] for k in range(K)]),
                                   np.array([L.corner(k) for k in range(K)])),
    }
    return ConnectorReport(O1, O2, res)


def connectors(base_sys, pert_sys, req):
    """Connector matrices and their structural residuals, in the request's side conventions."""
    native = (req.kind == "christoffel" and req.side == 1) or (req.kind == "geronimus" and req.side == 2)
    b, p = (base_sys, pert_sys) if native else (base_sys.adjoint(), pert_sys.adjoint())
    if req.kind == "christoffel":
        return _christoffel_connectors(b, p, req.L)
    return _geronimus_connectors(b, p, req.L)


# --- connection identities --------------------------------------------------------------------


def _cd_many(sys, l, pairs):
    return np.array([ar.to_complex(cd_kernel(sys, l, a, b)) for a, b in pairs])


def _christoffel_identities(base, pert, spec, pspec, L, pairs, zs, ls):
    """Side-1 Christoffel identities; returns name -> max symmetric residual."""
    base, pert, L = base.to_double(), pert.to_double(), _dbl_prepared(L)
    n2 = 2 * L.n
    con = _christoffel_connectors(base, pert, L)
    w1, w2 = con.first, con.second
    Mp = pert.size
    out = {}
    e1 = e2 = e3 = 0.0
    for z in zs:
        e1 = max(e1, sym_error(w1 @ phi_values(base, 1, z, 0, base.size), L(z) * phi_values(pert, 1, z, 0, Mp)))
        e2 = max(e2, sym_error(w2 @ phi_values(pert, 2, z, 0, Mp), phi_values(base, 2, z, 0, Mp)))
    out["laurent_first"] = e1
    out["laurent_second"] = e2
    res = 0.0
    for l in ls:
        if l < n2 or l + n2 > base.size or l > Mp:
            continue
        lhs = _cd_many(base, l, pairs)
        rhs = []
        for x1, x2 in pairs:
            khat = ar.to_complex(cd_kernel(pert, l, x1, x2))
            p2 = np.conj(phi_values(pert, 2, x1, 0, l))
            p1 = phi_values(base, 1, x2, 0, l + n2)
            tail = 0j
            for k in range(max(l - n2, 0), l):
                for j in range(l, k + n2 + 1):
                    tail += p2[k] / pert.H[k] * w1[k, j] * p1[j]
            rhs.append(L(x2) * khat - tail)
        res = max(res, sym_error(lhs, rhs))
    out["cd_kernel"] = res
    # Cauchy transforms against the perturbed form, computed from its own density
    c11 = c12 = c12k = 0.0
    lbar = L.poly.bar()
    dd = divided_difference(L.poly)
    for z in zs:
        C1 = c_values(spec, base, 1, z, 0, base.size)
        C1h = c_values(pspec, pert, 1, z, 0, Mp)
        c11 = max(c11, sym_error(w1 @ C1, C1h))
        C2 = c_values(spec, base, 2, z, 0, Mp)
        C2h = c_values(pspec, pert, 2, z, 0, Mp)
        lhs = w2 @ C2h
        from .functional import pair
        poly = dd.in_second(np.conj(z))
        corr = np.array([np.conj(pair(spec, poly, base.poly(2, k))) for k in range(Mp)])
        c12 = max(c12, sym_error(lhs, lbar(z) * C2 - corr))
        c12k = max(c12k, sym_error(lhs[n2:], lbar(z) * C2[n2:]))
    out["cauchy_first"] = c11
    out["cauchy_second"] = c12
    out["cauchy_second_high"] = c12k
    return out


def _geronimus_identities(base, pert, spec, pspec, L, xi, pairs, zs, ls):
    """Side-2 Geronimus identities; returns name -> max symmetric residual."""
    from .functional import pair
    base, pert, L = base.to_double(), pert.to_double(), _dbl_prepared(L)
    n2 = 2 * L.n
    con = _geronimus_connectors(base, pert, L)
    O1, O2 = con.first, con.second
    M = min(base.size, pert.size)
    K = O2.shape[0]
    lbar = L.poly.bar()
    out = {}
    e1 = e2 = 0.0
    for z in zs:
        e1 = max(e1, sym_error(O1 @ phi_values(base, 1, z, 0, M), phi_values(pert, 1, z, 0, M)))
        e2 = max(e2, sym_error(O2 @ phi_values(pert, 2, z, 0, M), L(z) * phi_values(base, 2, z, 0, K)))
    out["laurent_first"] = e1
    out["laurent_second"] = e2
    dd = divided_difference(L.poly)
    c21 = c21k = c22 = 0.0
    for z in zs:
        C1 = c_values(spec, base, 1, z, 0, M)
        C1c = c_values(pspec, pert, 1, z, 0, M)
        poly = dd.in_second(np.conj(z))
        corr = np.array([pair(pspec, pert.poly(1, k), poly) for k in range(M)])
        lhs = O1 @ C1 - C1c * lbar(z)
        c21 = max(c21, sym_error(lhs, -corr))
        c21k = max(c21k, sym_error((O1 @ C1)[n2:], (C1c * lbar(z))[n2:]))
        C2c = c_values(pspec, pert, 2, z, 0, M)
        C2 = c_values(spec, base, 2, z, 0, K)
        c22 = max(c22, sym_error(O2 @ C2c, C2))
    out["cauchy_first"] = c21
    out["cauchy_first_high"] = c21k
    out["cauchy_second"] = c22
    ker = cf = fc = 0.0
    for l in ls:
        if l < n2 or l + n2 > M:
            continue
        lk, rk, lcf, rcf, lfc, rfc = [], [], [], [], [], []
        for x1, x2 in pairs:
            p2c = np.conj(phi_values(pert, 2, x1, 0, l + n2))
            c2c = np.conj(c_values(pspec, pert, 2, x1, 0, l + n2))
            p1 = phi_values(base, 1, x2, 0, l)
            C1 = c_values(spec, base, 1, x2, 0, l)
            tail_phi = tail_c2 = tail_c1 = 0j
            for k in range(l, l + n2):
                for j in range(k - n2, l):
                    w = O1[k, j] / pert.H[k]
                    tail_phi += p2c[k] * w * p1[j]
                    tail_c2 += c2c[k] * w * p1[j]
                    tail_c1 += p2c[k] * w * C1[j]
            lk.append(cd_kernel(pert, l, x1, x2) - np.conj(L(x1)) * cd_kernel(base, l, x1, x2))
            rk.append(-tail_phi)
            lcf.append(mixed_kernel(pert, pspec, "C,phi", l, x1, x2) - mixed_kernel(base, spec, "C,phi", l, x1, x2))
            rcf.append(-tail_c2)
            dlb = divided_difference(lbar)(np.conj(x1), x2)
            lfc.append(lbar(x2) * mixed_kernel(pert, pspec, "phi,C", l, x1, x2)
                       - lbar(np.conj(x1)) * mixed_kernel(base, spec, "phi,C", l, x1, x2) - dlb)
            rfc.append(-tail_c1)
        ker = max(ker, sym_error(lk, rk))
        cf = max(cf, sym_error(lcf, rcf))
        fc = max(fc, sym_error(lfc, rfc))
    out["cd_kernel"] = ker
    out["mixed_c_phi"] = cf
    out["mixed_phi_c"] = fc
    out["jet_residue"] = jet_residue_residual(pert, pspec, L, xi, M)
    return out


def taylor_by_contour(f, center, count, radius, nodes=64, with_scale=False):
    """First ``count`` Taylor coefficients of f at ``center`` by the trapezoid rule on a small circle."""
    th = 2 * np.pi * np.arange(nodes) / nodes
    vals = np.array([f(center + radius * np.exp(1j * t)) for t in th])
    coef = np.fft.fft(vals, axis=0) / nodes
    out = [coef[r] / radius ** r for r in range(count)]
    return (out, float(np.max(np.abs(vals)))) if with_scale else out


def jet_residue_residual(pert, pspec, L, xi, count, family=1):
    """J^{Lbar}_{Lbar C,k} against <xi, phi_k> Ell for the perturbed system.

    family 1 is the side-2 statement (C1, phi1); family 2 is the side-1 one (C2, phi2),
    evaluated on the side-1 data itself rather than through the adjoint.
    """
    lbar = L.poly.bar()
    pts = [np.conj(ar.to_complex(z)) for z in L.spectral.points]
    lhs_cols = []
    scale = 0.0
    for i, (z, m) in enumerate(L.spectral.zeros):
        c = pts[i]
        others = [abs(c - p) for j, p in enumerate(pts) if j != i]
        rad = 0.25 * min([abs(abs(c) - 1)] + others)
        coeffs, sc = taylor_by_contour(lambda w: lbar(w) * c_values(pspec, pert, family, w, 0, count), c, m, rad,
                                       with_scale=True)
        scale = max(scale, sc)
        lhs_cols.extend(coeffs)
    lhs = np.stack(lhs_cols, axis=-1)
    XI = mass_pair(xi.general, lambda p, o: phi_values(pert, family, p, o, count))
    rhs = XI @ ar.to_complex_array(ell_matrix(L))
    # both sides vanish without masses, so measure against the size of Lbar C1 near the points
    return float(np.max(np.abs(lhs - rhs))) / max(scale, float(np.max(np.abs(rhs))), 1e-300)


def kernel_connection_check(base_sys, pert_sys, req, samples=10, spec=None, ls=None):
    """Evaluate every connection identity of the request's transform at sampled points."""
    spec = req.base if spec is None else spec
    pspec = perturbed_spec(req)
    L = _dbl_prepared(req.L)
    avoid = _zero_list(L)
    zs = sample_points(samples, seed=11, avoid=avoid)
    xs = sample_points(2 * samples, seed=13, avoid=avoid)
    pairs = list(zip(xs[:samples], xs[samples:]))
    ls = ls if ls is not None else [l for l in req.degree_range() if l >= 2 * req.n]
    native = (req.kind == "christoffel" and req.side == 1) or (req.kind == "geronimus" and req.side == 2)
    b, p = (base_sys, pert_sys) if native else (base_sys.adjoint(), pert_sys.adjoint())
    s, ps = (spec, pspec) if native else (spec.adjoint(), pspec.adjoint())
    if native:
        pairs_used = pairs
    else:
        # identities of the adjoint form are evaluated at the same points; kernels swap arguments
        pairs_used = [(x2, x1) for x1, x2 in pairs]
    if req.kind == "christoffel":
        return _christoffel_identities(b, p, s, ps, L, pairs_used, zs, ls)
    xi = slotted(req.mass, L, req.side)
    return _geronimus_identities(b, p, s, ps, L, xi, pairs_used, zs, ls)


def gram_identity(req, pert_gram, base_gram_):
    """L(Upsilon) G_check = G (side 1) or G_check L(Upsilon)^dagger = G (side 2) on exact blocks."""
    M = pert_gram.data.shape[0] - 2 * req.n
    L = _dbl_prepared(req.L)
    back = christoffel_gram(pert_gram, L, req.side, M)
    target = ar.to_complex_array(base_gram_.data[:M, :M])
    # cancellation scale of the banded product |L(Upsilon)| |G_check|
    absL = L.__class__(LaurentPoly(tuple((k, abs(c)) for k, c in L.poly.terms)), L.spectral, L.leading)
    scale = np.abs(christoffel_gram(GramTruncation(np.abs(pert_gram.data), pert_gram.size, pert_gram.size,
                                                   pert_gram.size), absL, req.side, M).data)
    return float(np.max(np.abs(back.data - target))) / max(float(scale.max()), float(np.abs(target).max()))


def round_trip(req, base_sys, size=None):
    """Geronimus (zero mass) followed by Christoffel with the same L restores the base system."""
    zreq = TransformRequest("geronimus", req.side, req.L, req.base, req.degrees, None, False)
    size = req.budget if size is None else size
    G_check = gram(perturbed_spec(zreq), size, exact=False)
    back = factorize(christoffel_gram(G_check, _dbl_prepared(req.L), req.side, size - 2 * req.n))
    N = min(req.degrees + 1, back.size, base_sys.size)
    zs = sample_points(8, seed=17)
    b = base_sys.to_double()
    H_err = rel_error(back.H[:N], b.H[:N])
    p_err = max(rel_error(_values(back, f, zs, N), _values(b, f, zs, N)) for f in (1, 2))
    return {"H": H_err, "phi": p_err}


# --- circle dual ---------------------------------------------------------------------------------


def dual_request(req):
    """On the circle, side-1 with L and side-2 with L_* describe the same univariate perturbation."""
    return TransformRequest(req.kind, 3 - req.side, prepared_star(req.L), req.base, req.degrees, req.mass, req.exact)


def circle_dual(req, base_sys, zs=None):
    """Both closed forms of each perturbed quantity on a circle functional, and their discrepancies."""
    if not _is_circle(req.base):
        raise ValueError("dual formulas need a univariate circle functional")
    dreq = dual_request(req)
    zs = zs if zs is not None else sample_points(6, avoid=_zero_list(_dbl_prepared(req.L)) + _zero_list(_dbl_prepared(dreq.L)))
    form = christoffel_formula if req.kind == "christoffel" else geronimus_formula
    a, zs_a = form(req, base_sys, zs=zs)
    b, _ = form(dreq, base_sys, zs=zs)
    rows = []
    for ra, rb in zip(a, b):
        rows.append({"l": ra.l, "H": rel_error([ra.H], [rb.H]), "phi1": rel_error(ra.phi1, rb.phi1),
                     "phi2": rel_error(ra.phi2c, rb.phi2c)})
    out = {"rows": rows, "max": max((max(r["H"], r["phi1"], r["phi2"]) for r in rows), default=0.0)}
    if req.kind == "christoffel" and _self_reciprocal(req.L) and _hermitian(base_sys):
        out["self_reciprocal"] = self_reciprocal_residual(req.L, base_sys, [r.l for r in a])
    return out


def self_reciprocal_residual(L, base_sys, ls):
    """L_{(-1)^l n} tau_{l+1} conj(tau_l) = L_{(-1)^{l+1} n} conj(tau_{l+1}) tau_l with tau_l = det J_{l..l+2n-1}."""
    sys = base_sys.to_double()
    L = _dbl_prepared(L)
    n2 = 2 * L.n
    top = max(ls) + n2 + 2
    J = phi_jets(sys, 1, L, top)
    worst = 0.0
    for l in ls:
        t0, t1 = ar.det(J[l:l + n2]), ar.det(J[l + 1:l + n2 + 1])
        lhs = L.corner(l) * t1 * np.conj(t0)
        rhs = L.corner(l + 1) * np.conj(t1) * t0
        worst = max(worst, sym_error([lhs], [rhs]))
    return worst


def _is_circle(spec):
    return isinstance(spec, (CircleDensity, ToeplitzMoments))


def _self_reciprocal(L):
    s = prepared_star(L)
    a, b = L.poly.to_double().coeffs, s.poly.to_double().coeffs
    return all(abs(a.get(k, 0) - b.get(k, 0)) < 1e-12 * max(1.0, abs(a.get(k, 0))) for k in set(a) | set(b))


def _hermitian(sys):
    return rel_error(sys.to_double().S1, sys.to_double().S2) < 1e-10


# --- orchestration -------------------------------------------------------------------------------


@dataclass
class TransformReport:
    request: dict
    records: list
    connectors: dict
    identities: dict
    extra: dict

    @property
    def max_discrepancy(self):
        vals = [r[k] for r in self.records for k in r if k.endswith("_err")]
        return max(vals, default=0.0)

    def worst(self):
        vals = [self.max_discrepancy]
        vals += [v for k, v in self.connectors.items() if not k.startswith("outer")]
        vals += list(self.identities.values())
        vals += [v for k, v in self.extra.items() if isinstance(v, float)]
        return max(vals, default=0.0)

    def to_json(self):
        return {"request": self.request, "records": self.records, "connectors": self.connectors,
                "identities": self.identities, "extra": self.extra,
                "max_discrepancy": self.max_discrepancy}

    def csv_rows(self):
        rows = []
        for r in self.records:
            for k, v in r.items():
                if k != "l":
                    rows.append([r["l"], k, v])
        for name, group in (("connector", self.connectors), ("identity", self.identities), ("extra", self.extra)):
            for k, v in group.items():
                if isinstance(v, (int, float)):
                    rows.append(["", f"{name}:{k}", v])
        return rows


def run_transform(req, samples=10, checks=True, corrupt_H=0.0):
    """Direct and formula paths for one request, compared, plus connector and identity residuals.

    ``corrupt_H`` scales the formula H by (1 + corrupt_H); a negative control for the checks.
    """
    if req.kind == "christoffel":
        G = base_gram(req)
        base_sys = factorize(G)
        pert = christoffel_direct(req, G)
        recs, zs = christoffel_formula(req, base_sys)
    else:
        G = base_gram(replace(req, exact=req.exact and exact_geronimus_ok(req)))
        base_sys = factorize(G)
        pert = geronimus_direct(req)
        recs, zs = geronimus_formula(req, base_sys)
    records = []
    for rec in recs:
        l = rec.l
        if corrupt_H:
            rec = replace(rec, H=rec.H * (1 + corrupt_H))
        d1 = np.array([phi_values(pert, 1, z, 0, l + 1)[l] for z in zs])
        d2c = ar.conj(np.array([phi_values(pert, 2, z, 0, l + 1)[l] for z in zs]))
        row = {"l": l,
               "H_direct": _num(pert.H[l]), "H_formula": _num(rec.H),
               "H_err": rel_error([rec.H], [pert.H[l]]),
               "H_alt_err": rel_error([rec.alt["H"]], [pert.H[l]]),
               "phi1_err": rel_error(rec.phi1, d1),
               "phi2_err": rel_error(rec.phi2c, d2c),
               "quasidet_routes_err": float(rec.qd),
               "tau": _num(rec.tau) if rec.tau is not None else None}
        alt_key = "phi2c" if "phi2c" in rec.alt else "phi1"
        row["kernel_route_err"] = rel_error(rec.alt[alt_key], rec.phi2c if alt_key == "phi2c" else rec.phi1)
        records.append(row)
    con, ids, extra = {}, {}, {}
    if checks:
        con = connectors(base_sys, pert, req).residuals
        ids = kernel_connection_check(base_sys, pert, req, samples)
        if req.kind == "geronimus":
            G_check = gram(perturbed_spec(req), req.budget, exact=False)
            extra["gram_identity"] = gram_identity(req, G_check, G)
            if req.side == 1:
                extra["jet_residue_direct"] = jet_residue_residual(pert.to_double(), perturbed_spec(req), _dbl_prepared(req.L),
                                                              slotted(req), min(pert.size, req.degrees + 1), family=2)
            if slotted(req).general.is_zero():
                rt = round_trip(req, base_sys)
                extra["round_trip_H"] = rt["H"]
                extra["round_trip_phi"] = rt["phi"]
        if _is_circle(req.base):
            try:
                dual = circle_dual(req, base_sys, zs)
                extra["circle_dual"] = dual["max"]
                if "self_reciprocal" in dual:
                    extra["self_reciprocal"] = dual["self_reciprocal"]
            except SupportCollision:
                pass
    return TransformReport(req.to_json(), records, con, ids, extra)


def _num(v):
    if v is None:
        return None
    if ar.is_exact_scalar(v):
        return [str(v.x), str(v.y)]
    v = complex(v)
    return [v.real, v.imag]
