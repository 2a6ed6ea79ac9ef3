"""cmvlab basis|transform|verify --config <file> --out <dir> [--arith double|exact] [--tol <x>]

Exit codes: 0 success, 1 configuration error, 2 quasidefiniteness or support
failure, 3 tolerance breach or failed check.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import replace
from pathlib import Path

import jsonschema
import numpy as np

from . import _arith as ar
from .errors import CmvLabError, QuasidefiniteViolation, SingularLeadingBlock, SupportCollision
from .cmv import from_cmv
from .functional import ToeplitzMoments, cauchy_pair, from_config, gram
from .gaussborel import abc_kernel, biorthogonality_matrix, cd_kernel, factorize, phi_values
from .jets import mass_from_json
from .laurent import LaurentPoly, SpectralData, prepared_from_zeros
from .secondkind import mixed_kernel
from .transforms import TransformRequest, run_transform, sample_points

EXIT_CONFIG, EXIT_QUASIDEF, EXIT_TOL = 1, 2, 3
DEFAULT_TOL = 1e-8
ROOT_CLUSTER = 1e-6

_number = {"type": "number"}
_pair = {"type": "array", "items": {"type": ["number", "string"]}, "minItems": 2, "maxItems": 2}
_scalar = {"anyOf": [_number, _pair, {"type": "string"}]}

LAURENT_SCHEMA = {
    "type": "object",
    "properties": {
        "zeros": {"type": "array", "items": {"type": "array", "minItems": 3, "maxItems": 3}},
        "leading": _scalar,
        "coeffs": {"type": "array", "items": {"type": "array", "minItems": 2, "maxItems": 3}},
    },
    "anyOf": [{"required": ["zeros"]}, {"required": ["coeffs"]}],
}

TRANSFORM_SCHEMA = {
    "type": "object",
    "required": ["kind", "side", "L"],
    "properties": {
        "kind": {"enum": ["christoffel", "geronimus"]},
        "side": {"enum": [1, 2]},
        "L": LAURENT_SCHEMA,
        "mass": {"type": "object", "required": ["kind"],
                 "properties": {"kind": {"enum": ["circle_matrix", "diagonal", "general"]}}},
        "degrees": {"type": "integer", "minimum": 0},
        "tol": {"type": "number", "exclusiveMinimum": 0},
    },
    "additionalProperties": False,
}

CONFIG_SCHEMA = {
    "type": "object",
    "properties": {
        "functional": {"anyOf": [{"type": "string"}, {"type": "object", "required": ["kind"]}]},
        "functionals": {"type": "array", "minItems": 1,
                        "items": {"anyOf": [{"type": "string"}, {"type": "object", "required": ["kind"]}]}},
        "arith": {"enum": ["double", "exact"]},
        "degrees": {"type": "integer", "minimum": 1, "maximum": 200},
        "tol": {"type": "number", "exclusiveMinimum": 0},
        "samples": {"type": "integer", "minimum": 1},
        "transforms": {"type": "array", "items": TRANSFORM_SCHEMA},
        "checks": {"type": "array", "items": {"enum": ["biorthogonality", "abc", "projection", "transforms"]}},
        "output": {"type": "object", "properties": {
            "formats": {"type": "array", "items": {"enum": ["json", "csv"]}}}},
        "fixtures": {"type": "object", "properties": {"corrupt_H": {"type": "number"}}},
    },
    "anyOf": [{"required": ["functional"]}, {"required": ["functionals"]}],
    "additionalProperties": False,
}


class ConfigError(Exception):
    pass


# --- deterministic output --------------------------------------------------------------------


def fmt_float(x):
    """17 significant digits, lowercase scientific."""
    x = float(x)
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return f"{x:.16e}"


def dumps(obj, indent=0):
    pad = "  " * (indent + 1)
    end = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple)) for v in obj):
            return "[" + ", ".join(dumps(v, indent + 1) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + dumps(v, indent + 1) for v in obj) + "\n" + end + "]"
    if isinstance(obj, (bool, np.bool_)) or obj is None:
        return json.dumps(bool(obj) if obj is not None else None)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt_float(obj)
    if isinstance(obj, (complex, np.complexfloating)) or ar.is_exact_scalar(obj):
        return dumps(_cnum(obj), indent)
    return json.dumps(str(obj))


def _cnum(v):
    if ar.is_exact_scalar(v):
        return [str(v.x), str(v.y)]
    v = complex(v)
    return [v.real, v.imag]


def _csv_cell(v):
    if isinstance(v, (float, np.floating)):
        return fmt_float(v)
    if isinstance(v, (complex, np.complexfloating)) or ar.is_exact_scalar(v):
        re, im = _cnum(v)
        return f"{re if isinstance(re, str) else fmt_float(re)};{im if isinstance(im, str) else fmt_float(im)}"
    if isinstance(v, (list, tuple)):
        return ";".join(_csv_cell(x) for x in v)
    return "" if v is None else str(v)


def write_json(path, obj):
    path.write_text(dumps(obj) + "\n")


def write_csv(path, header, rows):
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_csv_cell(v) for v in r])


# --- configuration ---------------------------------------------------------------------------


def load_config(path, arith=None, tol=None):
    try:
        cfg = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}")
    try:
        jsonschema.validate(cfg, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"schema error at {where}: {exc.message}")
    if arith:
        cfg["arith"] = arith
    if tol is not None:
        cfg["tol"] = tol
    cfg.setdefault("arith", "double")
    cfg.setdefault("degrees", 8)
    cfg.setdefault("tol", DEFAULT_TOL)
    cfg.setdefault("samples", 10)
    cfg.setdefault("output", {}).setdefault("formats", ["json", "csv"])
    return cfg


def functionals(cfg):
    exact = cfg["arith"] == "exact"
    items = cfg.get("functionals") or [cfg["functional"]]
    out = []
    for item in items:
        try:
            spec = from_config(item, exact=exact)
        except (ValueError, KeyError, TypeError, IndexError) as exc:
            raise ConfigError(f"bad functional {item!r}: {exc}")
        if exact and not spec.exact_capable:
            raise ConfigError(f"functional {item!r} has no exact moments; use --arith double")
        label = item if isinstance(item, str) else item.get("name", item.get("kind"))
        out.append((str(label), spec))
    return out


def laurent_from_config(obj, exact):
    def num(v):
        if isinstance(v, (list, tuple)):
            return ar.exact(tuple(v)) if exact else complex(float(v[0]), float(v[1]))
        return ar.exact(v) if exact else complex(float(v))

    if "zeros" in obj:
        zeros = [(num(z[:2]), int(z[2])) for z in obj["zeros"]]
        leading = num(obj.get("leading", 1))
        try:
            return prepared_from_zeros(leading, SpectralData(tuple(zeros)), exact=exact)
        except ValueError as exc:
            raise ConfigError(f"bad Laurent polynomial: {exc}")
    if exact:
        raise ConfigError("exact arithmetic needs the Laurent polynomial given by its zeros")
    coeffs = {int(c[0]): complex(float(c[1]), float(c[2]) if len(c) > 2 else 0.0) for c in obj["coeffs"]}
    p = LaurentPoly.from_dict(coeffs)
    if p.n != p.m or p.n < 0:
        raise ConfigError("coefficient form must have equal extreme degrees +-n")
    n = p.n
    roots = np.roots([p.coeff(k) for k in range(n, -n - 1, -1)])
    # a root of multiplicity m comes back split by ~eps^(1/m); the cluster mean is accurate
    groups = []
    for r in roots:
        for g in groups:
            if abs(np.mean(g) - r) < ROOT_CLUSTER * max(1.0, abs(r)):
                g.append(r)
                break
        else:
            groups.append([r])
    groups = [(np.mean(g), len(g)) for g in groups]
    return prepared_from_zeros(p.coeff(n), SpectralData(tuple((complex(z), m) for z, m in groups)))


def requests(cfg, spec):
    exact = cfg["arith"] == "exact"
    out = []
    for t in cfg.get("transforms", []):
        # Geronimus stays rational only over finite Toeplitz moments
        ex = exact and (t["kind"] == "christoffel" or (isinstance(spec, ToeplitzMoments) and spec.finite))
        L = laurent_from_config(t["L"], ex)
        mass = None
        if "mass" in t:
            try:
                mass = mass_from_json(t["mass"], exact=ex)
            except (ValueError, KeyError, TypeError) as exc:
                raise ConfigError(f"bad mass specification: {exc}")
        try:
            out.append((TransformRequest(t["kind"], t["side"], L, spec, t.get("degrees", cfg["degrees"]), mass, ex),
                        t.get("tol", cfg["tol"])))
        except ValueError as exc:
            raise ConfigError(str(exc))
    return out


# --- commands --------------------------------------------------------------------------------


def cmd_basis(cfg, out):
    exact = cfg["arith"] == "exact"
    N = cfg["degrees"]
    summary = {"arith": cfg["arith"], "degrees": N, "functionals": []}
    for idx, (label, spec) in enumerate(functionals(cfg)):
        sys_ = factorize(gram(spec, N, exact=exact))
        R = biorthogonality_matrix(spec, sys_)
        tag = f"basis_{idx}"
        body = {
            "functional": label,
            "H": [_cnum(h) for h in sys_.H],
            "phi1": [[_cnum(v) for v in sys_.S1[k, :k + 1]] for k in range(N)],
            "phi2": [[_cnum(v) for v in sys_.S2[k, :k + 1]] for k in range(N)],
            "residuals": R.tolist(),
            "max_residual": float(R.max()),
        }
        _emit(cfg, out, tag, body,
              [("H", ["l", "H"], [[k, h] for k, h in enumerate(sys_.H)]),
               ("phi1", ["l", "cmv_index", "coeff"], [[k, j, sys_.S1[k, j]] for k in range(N) for j in range(k + 1)]),
               ("phi2", ["l", "cmv_index", "coeff"], [[k, j, sys_.S2[k, j]] for k in range(N) for j in range(k + 1)]),
               ("residuals", ["n", "m", "residual"], [[n, m, R[n, m]] for n in range(N) for m in range(N)])])
        summary["functionals"].append({"label": label, "max_residual": float(R.max())})
    write_json(out / "basis_summary.json", summary)
    return 0


def cmd_transform(cfg, out):
    status = 0
    summary = {"arith": cfg["arith"], "transforms": []}
    for label, spec in functionals(cfg):
        for idx, (req, tol) in enumerate(requests(cfg, spec)):
            rep = run_transform(req, cfg["samples"], corrupt_H=cfg.get("fixtures", {}).get("corrupt_H", 0.0))
            body = rep.to_json()
            body["functional"] = label
            body["budget"] = req.budget
            body["tol"] = tol
            ok = rep.max_discrepancy <= tol
            body["pass"] = ok
            tag = f"transform_{len(summary['transforms'])}"
            _emit(cfg, out, tag, body, [("report", ["l", "quantity", "value"], rep.csv_rows())])
            summary["transforms"].append({"functional": label, "kind": req.kind, "side": req.side,
                                          "max_discrepancy": rep.max_discrepancy, "pass": ok})
            if not ok:
                status = EXIT_TOL
    write_json(out / "transform_summary.json", summary)
    return status


DEFAULT_TRANSFORMS = [
    {"kind": "christoffel", "side": 1, "L": {"zeros": [[2, 0, 1], [0.5, 0, 1]]}},
    {"kind": "christoffel", "side": 2, "L": {"zeros": [[2, 0, 1], [0.5, 0, 1]]}},
    {"kind": "geronimus", "side": 1, "L": {"zeros": [[2, 0, 1], [0.5, 0, 1]]}},
    {"kind": "geronimus", "side": 2, "L": {"zeros": [[2, 0, 1], [0.5, 0, 1]]}},
]


def verify_functional(spec, cfg, label):
    """name -> (residual, tolerance) for one functional."""
    exact = cfg["arith"] == "exact"
    tol = cfg["tol"]
    checks = cfg.get("checks") or ["biorthogonality", "abc", "projection", "transforms"]
    N = cfg["degrees"]
    res = {}
    if "biorthogonality" in checks:
        sys_ = factorize(gram(spec, N, exact=exact))
        eps = cfg.get("fixtures", {}).get("corrupt_H", 0.0)
        if eps:
            sys_ = replace(sys_, H=sys_.H * (1 + eps))
        R = biorthogonality_matrix(spec, sys_)
        res["biorthogonality"] = (float(R.max()), 0.0 if exact else tol)
    G = gram(spec, N, exact=False)
    sysd = factorize(G)
    pts = sample_points(2 * cfg["samples"], seed=5)
    pairs = list(zip(pts[::2], pts[1::2]))
    if "abc" in checks:
        worst = 0.0
        for l in range(N + 1):
            for a, b in pairs:
                k = complex(cd_kernel(sysd, l, a, b))
                worst = max(worst, abs(k - complex(abc_kernel(G, l, a, b))) / (1 + abs(k)))
        res["abc"] = (worst, 1e-10)
    if "projection" in checks:
        worst = 0.0
        for l in range(1, N + 1):
            for a, b in pairs:
                try:
                    lhs = mixed_kernel(sysd, spec, "phi,C", l, a, b)
                except CmvLabError:
                    continue
                rhs = projection_of_kernel(sysd, spec, l, a, b)
                worst = max(worst, abs(lhs - rhs) / (1 + abs(rhs)))
        res["projection"] = (worst, tol)
    if "transforms" in checks:
        tcfg = dict(cfg)
        tcfg.setdefault("transforms", DEFAULT_TRANSFORMS)
        if not tcfg["transforms"]:
            tcfg["transforms"] = DEFAULT_TRANSFORMS
        for req, ttol in requests(tcfg, spec):
            name = f"{req.kind}[{req.side}]"
            try:
                rep = run_transform(req, cfg["samples"], corrupt_H=cfg.get("fixtures", {}).get("corrupt_H", 0.0))
            except NotImplementedError:
                res[name + ":unsupported"] = (float("nan"), ttol)
                continue
            res[name + ":cross_path"] = (rep.max_discrepancy, ttol)
            for k, v in rep.connectors.items():
                if not k.startswith("outer"):
                    res[f"{name}:connector:{k}"] = (v, ttol)
            for k, v in rep.identities.items():
                res[f"{name}:identity:{k}"] = (v, ttol)
            for k, v in rep.extra.items():
                if isinstance(v, float):
                    res[f"{name}:{k}"] = (v, ttol)
    return res


def projection_of_kernel(sys_, spec, l, x1, x2):
    """Cauchy transform in z2 of the CD kernel K^[l](conj x1, z2) taken as a single Laurent polynomial."""
    a = np.conj(ar.to_complex_array(phi_values(sys_, 2, x1, 0, l))) / ar.to_complex_array(sys_.H[:l])
    coeffs = a @ ar.to_complex_array(sys_.S1[:l, :l])
    return complex(cauchy_pair(spec, from_cmv(coeffs), x2))


def cmd_verify(cfg, out):
    rows, matrix = [], {}
    failed = False
    for label, spec in functionals(cfg):
        res = verify_functional(spec, cfg, label)
        matrix[label] = {}
        for name, (v, tol) in res.items():
            ok = (not math.isnan(v)) and v <= tol
            if math.isnan(v):
                ok = True  # unsupported combination, recorded but not failed
            matrix[label][name] = {"residual": v, "tol": tol, "pass": ok}
            rows.append([label, name, v, tol, "pass" if ok else "FAIL"])
            failed |= not ok
    body = {"arith": cfg["arith"], "degrees": cfg["degrees"], "all_pass": not failed, "matrix": matrix}
    _emit(cfg, out, "verify", body, [("matrix", ["functional", "check", "residual", "tol", "status"], rows)])
    return EXIT_TOL if failed else 0


def _emit(cfg, out, tag, body, tables):
    fmts = cfg["output"]["formats"]
    if "json" in fmts:
        write_json(out / f"{tag}.json", body)
    if "csv" in fmts:
        for name, header, rows in tables:
            write_csv(out / f"{tag}_{name}.csv", header, rows)


# --- entry point -----------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser():
    p = _Parser(prog="cmvlab", description="Biorthogonal Laurent polynomials on the circle and their perturbations.")
    p.add_argument("command", choices=["basis", "transform", "verify"])
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--arith", choices=["double", "exact"])
    p.add_argument("--tol", type=float)
    return p


COMMANDS = {"basis": cmd_basis, "transform": cmd_transform, "verify": cmd_verify}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, args.arith, args.tol)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](cfg, out)
    except ConfigError as exc:
        print(f"cmvlab: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except QuasidefiniteViolation as exc:
        print(f"cmvlab: QuasidefiniteViolation at index {exc.index}: {exc}", file=sys.stderr)
        return EXIT_QUASIDEF
    except (SupportCollision, SingularLeadingBlock) as exc:
        print(f"cmvlab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_QUASIDEF


if __name__ == "__main__":
    sys.exit(main())
