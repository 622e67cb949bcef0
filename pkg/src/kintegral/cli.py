"""Command-line front door.

Every subcommand prints a JSON report: command, an inputs digest, results and
a list of checks.  Exit status is 0 when every check passes, 1 when a
numerical check fails and 2 for invalid input.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable

import jsonschema
import mpmath
import numpy as np

from . import __version__
from .algebra import Cyclotomic, TruncatedSeries, format_scalar, precision
from .schemas import SCHEMAS


class InputError(Exception):
    """Invalid input; ``pointer`` locates the offending JSON node."""

    def __init__(self, message: str, pointer: str = "", source: str = ""):
        super().__init__(message)
        self.pointer = pointer
        self.source = source


# --------------------------------------------------------------------------
# serialization

def jsonable(x: Any) -> Any:
    if isinstance(x, TruncatedSeries):
        return x.to_json()
    if isinstance(x, np.ndarray):
        return [jsonable(v) for v in x.tolist()] if x.dtype != object else [jsonable(v) for v in x]
    if isinstance(x, (bool, str)) or x is None:
        return x
    if isinstance(x, (Fraction, Cyclotomic, mpmath.mpf, mpmath.mpc, complex, float)):
        return format_scalar(x)
    if isinstance(x, int):
        return x
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if hasattr(x, "to_json"):
        return jsonable(x.to_json())
    return str(x)


def _residual(x):
    """Residuals are real and printed to 6 significant digits."""
    if x is None:
        return None
    if isinstance(x, (int, Fraction)):
        return format_scalar(abs(Fraction(x)))
    v = abs(mpmath.mpmathify(x) if not isinstance(x, Cyclotomic) else x.numeric())
    return "0" if v == 0 else mpmath.nstr(v, 6)


# --------------------------------------------------------------------------
# input loading

def load_json(path: str, schema: str) -> Any:
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror}", "", path) from None
    except json.JSONDecodeError as e:
        raise InputError(f"{path} is not JSON: {e.msg} (line {e.lineno})", "", path) from None
    validator = jsonschema.Draft202012Validator(SCHEMAS[schema])
    errors = sorted(validator.iter_errors(obj), key=lambda e: list(e.absolute_path))
    if errors:
        e = errors[0]
        pointer = "/" + "/".join(str(p) for p in e.absolute_path)
        raise InputError(f"{path}: {e.message}", pointer, path)
    return obj


class Context:
    """Parsed inputs shared by the subcommands."""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.raw: dict[str, Any] = {}

    def json(self, flag: str, schema: str):
        path = getattr(self.args, flag)
        if path is None:
            raise InputError(f"--{flag.replace('_', '-')} is required for {self.args.command}")
        obj = load_json(path, schema)
        self.raw[flag] = obj
        return obj

    def datum(self, flag: str = "spec"):
        from .orbifold_data import DataError, datum_from_json
        obj = self.json(flag, "spec")
        try:
            return datum_from_json(obj, Path(getattr(self.args, flag)).stem)
        except (DataError, KeyError, ValueError) as e:
            raise InputError(str(e), _pointer_of(str(e)), getattr(self.args, flag)) from None

    def digest(self) -> str:
        a = {k: v for k, v in sorted(vars(self.args).items())
             if k not in ("out", "table", "timing", "func") and not (isinstance(v, str) and k in self.raw)}
        blob = json.dumps({"args": a, "inputs": self.raw}, sort_keys=True, default=str)
        return hashlib.sha256(blob.encode()).hexdigest()


def _pointer_of(msg: str) -> str:
    if msg.startswith("/"):
        return msg.split(":")[0]
    return ""


def parse_class(text: str, datum):
    """K-class syntax: O, T, pt, O(k), <bundle>^k, sky:reg, sky:rho_1=2,rho_2=1."""
    from .gamma_frame import line_bundle, point_sheaf, skyscraper, structure_sheaf, tangent_bundle
    t = text.strip()
    if t == "O":
        return structure_sheaf(datum)
    if t == "T":
        return tangent_bundle(datum)
    if t == "pt":
        return point_sheaf(datum)
    if t.startswith("sky:"):
        body = t[4:]
        if body == "reg":
            return skyscraper(datum, "reg")
        combo = {}
        for part in body.split(","):
            name, _, k = part.partition("=")
            combo[name.strip()] = int(k or 1)
        return skyscraper(datum, combo)
    if t.startswith("O(") and t.endswith(")"):
        return line_bundle(datum, None, int(t[2:-1]))
    if "^" in t:
        name, _, k = t.rpartition("^")
        return line_bundle(datum, name, int(k))
    return line_bundle(datum, t, 1)


def _check(name: str, report: dict) -> dict:
    r = report.get("residual", report.get("max_residual"))
    return {"name": name, "pass": report.get("pass"), "residual": _residual(r)}


# --------------------------------------------------------------------------
# subcommands

def cmd_inertia(ctx: Context) -> tuple[dict, list]:
    from .orbifold_data import condition_checks
    d = ctx.datum()
    degs = d.cr_degrees()
    res = {
        "name": d.name,
        "dimension": d.dimension,
        "sectors": [{"label": s.label, "age": s.age, "dim": s.dim, "inv": s.inv, "centralizer": s.centralizer}
                    for s in d.sectors],
        "basis": [{"name": c.name, "sector": c.sector, "degree": degs[i]} for i, c in enumerate(d.basis)],
        "conditions": condition_checks(d),
    }
    if not d.compact:
        cdeg = d.cr_degrees(True)
        res["compact_basis"] = [{"name": c.name, "sector": c.sector, "degree": cdeg[i]}
                                for i, c in enumerate(d.compact_basis)]
    return res, []


def cmd_pairing(ctx: Context):
    from .algebra import max_abs
    d = ctx.datum()
    res = {"pairing": d.pairing, "inverse": d.pairing_inverse}
    checks = []
    if d.compact:
        r = max_abs(d.pairing - d.pairing.T)
        checks.append(_check("symmetric", {"residual": r, "pass": r == 0}))
    return res, checks


def _named(d, v, dual=False):
    b = d.dual_basis if dual else d.basis
    return {c.name: v[i] for i, c in enumerate(b)}


def cmd_gamma(ctx: Context):
    from .gamma_frame import gamma_class, square_root_check, tangent_bundle
    d = ctx.datum()
    T = tangent_bundle(d)
    res = {"gamma": _named(d, gamma_class(T, d))}
    sq = square_root_check(T, d, ctx.args.tolerance)
    return res, [_check("square_root", sq)]


def cmd_todd(ctx: Context):
    from .gamma_frame import tangent_bundle, todd_class
    d = ctx.datum()
    return {"todd": _named(d, todd_class(tangent_bundle(d), d))}, []


def cmd_chern(ctx: Context):
    from .gamma_frame import orbifold_chern_character
    d = ctx.datum()
    V = parse_class(ctx.args.cls, d)
    return {"class": ctx.args.cls, "tch": _named(d, orbifold_chern_character(V, d), V.compact_support)}, []


def cmd_chi(ctx: Context):
    from .algebra import cnum
    from .gamma_frame import kawasaki_value
    d = ctx.datum()
    V = parse_class(ctx.args.cls, d)
    value = kawasaki_value(V, d)
    n = int(mpmath.nint(cnum(value).real))
    r = abs(cnum(value) - n)
    return {"class": ctx.args.cls, "chi": n, "value": value}, \
        [_check("integral", {"residual": r, "pass": r <= ctx.args.tolerance})]


def cmd_psi(ctx: Context):
    from .gamma_frame import psi_display_normalized, psi_map
    d = ctx.datum()
    V = parse_class(ctx.args.cls, d)
    cs = V.compact_support
    return {"class": ctx.args.cls, "psi": _named(d, psi_map(V, d).vector, cs),
            "psi_display": _named(d, psi_display_normalized(V, d), cs)}, []


def cmd_mukai(ctx: Context):
    from .gamma_frame import mukai_pairing_check
    d = ctx.datum()
    V1 = parse_class(ctx.args.cls, d)
    V2 = parse_class(ctx.args.cls2 or ctx.args.cls, d)
    r = mukai_pairing_check(V1, V2, d, ctx.args.tolerance)
    return {"lhs": r["lhs"], "rhs": r["rhs"]}, [_check("mukai", r)]


def cmd_galois(ctx: Context):
    from .galois import galois_on_sol, power_identity_check, tensor_line_bundle_check
    from .gamma_frame import skyscraper, structure_sheaf
    d = ctx.datum()
    # on quotients the first registered bundle is the trivial character
    lbs = d.line_bundles[1:] if d.group is not None else d.line_bundles
    xi = ctx.args.xi or (lbs[0].name if lbs else None)
    if xi is None:
        raise InputError("the datum registers no line bundle; pass --xi")
    cs = not d.compact
    res = {"xi": xi, "matrix": galois_on_sol(xi, d, dual=cs)}
    checks = [_check("power_identity", power_identity_check(xi, d, ctx.args.tolerance))]
    if cs:
        for rho in d.group.irreducibles:
            checks.append(_check(f"tensor:{rho}", tensor_line_bundle_check(xi, skyscraper(d, rho), d, ctx.args.tolerance)))
    else:
        checks.append(_check("tensor:O", tensor_line_bundle_check(xi, structure_sheaf(d), d, ctx.args.tolerance)))
    return res, checks


def cmd_monodromy(ctx: Context):
    from .galois import sol_pairing_matrix, z_monodromy
    d = ctx.datum()
    return {"z_monodromy": z_monodromy(d), "sol_pairing": sol_pairing_matrix(d)}, []


def _pair_from_args(ctx: Context):
    from .hard_lefschetz import GradedNilpotentPair, cohomology_pair
    if ctx.args.pair:
        return GradedNilpotentPair.from_json(ctx.json("pair", "pair"))
    d = ctx.datum()
    xi = None
    if ctx.args.xi:
        xi = d.line_bundle(ctx.args.xi).xi0
    return cohomology_pair(d, xi)


def cmd_hl_check(ctx: Context):
    from .hard_lefschetz import gen_hl_coarse_check, hl_coarse_check, is_bicentric_hl, weight_filtration_check
    res, checks = {}, []
    if ctx.args.spec and not ctx.args.pair:
        d = ctx.datum()
        res["hl_coarse"] = hl_coarse_check(d)
        res["gen_hl_coarse"] = gen_hl_coarse_check(d)
        return res, checks
    p = _pair_from_args(ctx)
    res["bicentric"] = is_bicentric_hl(p)
    wf = weight_filtration_check(p)
    res["weight_filtration"] = {k: v for k, v in wf.items() if k != "pass"}
    checks.append({"name": "weight_filtration", "pass": wf["pass"], "residual": None})
    return res, checks


def cmd_jordan(ctx: Context):
    from .hard_lefschetz import jordan_type
    p = _pair_from_args(ctx)
    t = jordan_type(p)
    return {"jordan_type": t.to_json(), "dim": t.dim}, []


def _qdm_inputs(ctx: Context):
    from .qdm import CorrelatorTable, QuantumProduct
    from .orbifold_data import DataError
    d = ctx.datum()
    obj = ctx.json("correlators", "correlators")
    try:
        table = CorrelatorTable.from_json(obj, d)
    except DataError as e:
        raise InputError(str(e), _pointer_of(str(e)), ctx.args.correlators) from None
    dirs = None
    if ctx.args.directions is not None:
        dirs = [int(x) for x in ctx.args.directions.split(",") if x.strip()]
    qp = QuantumProduct(table, d, ctx.args.order, directions=dirs)
    return d, qp


def cmd_qprod(ctx: Context):
    d, qp = _qdm_inputs(ctx)
    res = {"variables": list(qp.space.variables), "order": qp.order,
           "products": {d.basis[i].name: qp.A[i] for i in range(d.rank)}}
    return res, []


def cmd_wdvv(ctx: Context):
    from .qdm import euler_axiom_check, wdvv_check
    d, qp = _qdm_inputs(ctx)
    w = wdvv_check(qp, ctx.args.tolerance)
    e = euler_axiom_check(qp, ctx.args.tolerance)
    return {"residuals": {k: _residual(v) for k, v in w.items() if k != "pass"}}, \
        [_check("wdvv", {"residual": w["max_residual"], "pass": w["pass"]}), _check("euler_axiom", e)]


def cmd_flatness(ctx: Context):
    from .qdm import DubrovinConnection
    d, qp = _qdm_inputs(ctx)
    checks = []
    res = {}
    for dual in ([False] if d.compact else [False, True]):
        f = DubrovinConnection(qp, dual=dual).flatness(ctx.args.tolerance)
        tag = "dual" if dual else "ordinary"
        res[tag] = {k: _residual(v) for k, v in f.items() if k != "pass"}
        checks.append(_check(f"flatness:{tag}", {"residual": f["max_residual"], "pass": f["pass"]}))
    return res, checks


def _solutions(ctx: Context):
    from .qdm import DubrovinConnection, FundamentalSolution
    d, qp = _qdm_inputs(ctx)
    L = FundamentalSolution(DubrovinConnection(qp))
    Lt = None if d.compact else FundamentalSolution(DubrovinConnection(qp, dual=True))
    return d, qp, L, Lt


def cmd_lfun(ctx: Context):
    from .qdm import unitarity_check
    d, qp, L, Lt = _solutions(ctx)
    u = unitarity_check(L, Lt, ctx.args.tolerance)
    res = {"variables": list(L.space.variables), "z_window": [L.z_lo, 0], "L": L.series}
    if Lt is not None:
        res["L_dual"] = Lt.series
    return res, [_check("unitarity", u)]


def cmd_jfun(ctx: Context):
    from .qdm import cy_j_shape_check, j_function
    d, qp, L, Lt = _solutions(ctx)
    J = j_function(L, Lt)
    checks = []
    if d.calabi_yau and all(d.cr_degrees()[i] == 2 for i in qp.directions):
        checks.append(_check("cy_shape", cy_j_shape_check(L, Lt, ctx.args.tolerance)))
    return {"variables": list(J.space.variables), "J": J}, checks


def cmd_flatcoord(ctx: Context):
    from .qdm import opposite_project
    d, qp, L, Lt = _solutions(ctx)
    psi = opposite_project(L, Lt, with_logs=True, tol=ctx.args.tolerance)
    return {"variables": list(psi.space.variables), "flat_coordinates": psi}, []


def cmd_charge(ctx: Context):
    from .charges import PotentialInput, central_charge, charge_c2, charge_c3, charge_difference, charge_space
    d, qp, L, Lt = _solutions(ctx)
    V = parse_class(ctx.args.cls, d)
    Z = central_charge(V, L, Lt)
    checks = []
    if V.compact_support and d.group is not None and d.group.special:
        sp = charge_space(L)
        rho = _rho_of(ctx.args.cls)
        if d.dimension == 2:
            C = charge_c2(d, rho, sp)
        elif d.dimension == 3:
            pots = PotentialInput.from_json(ctx.json("pots", "potentials")) if ctx.args.pots else None
            C = charge_c3(d, rho, pots, sp)
        else:
            C = None
        if C is not None:
            r = charge_difference(Z, C)
            checks.append(_check("closed_form", {"residual": r, "pass": r <= ctx.args.tolerance}))
    return {"class": ctx.args.cls, "t0_factor": Z.t0_factor, "variables": list(Z.space.variables),
            "charge": Z.series}, checks


def _rho_of(text: str):
    body = text.strip()[4:]
    if body == "reg":
        return "reg"
    combo = {}
    for part in body.split(","):
        name, _, k = part.partition("=")
        combo[name.strip()] = int(k or 1)
    return combo


def cmd_period(ctx: Context):
    from .charges import central_charge, charge_difference, integral_period
    d, qp, L, Lt = _solutions(ctx)
    V = parse_class(ctx.args.cls, d)
    P = integral_period(V, L, Lt)
    Z = central_charge(V, L, Lt)
    r = charge_difference(P, Z)
    return {"class": ctx.args.cls, "variables": list(P.space.variables), "period": P.series}, \
        [_check("period_equals_charge", {"residual": r, "pass": r <= ctx.args.tolerance})]


def cmd_predict(ctx: Context):
    from .algebra import SeriesSpace
    from .charges import PotentialInput
    from .crepant_predict import FMAssignment, predict_coordinate_change
    from .orbifold_data import DataError
    d = ctx.datum()
    try:
        fm = FMAssignment.from_json(ctx.json("fm", "fm"), d)
    except DataError as e:
        raise InputError(str(e), _pointer_of(str(e)), ctx.args.fm) from None
    pots = PotentialInput.from_json(ctx.json("pots", "potentials")) if ctx.args.pots else None
    names = tuple(f"t{i}" for i, c in enumerate(d.basis)
                  if c.sector != d.untwisted.label and d.cr_degrees()[i] == 2)
    sp = SeriesSpace(names, ctx.args.order, 0, 0)
    cc = predict_coordinate_change(fm, d, pots, sp)
    checks = [_check(f"q_C:{k}", v) for k, v in cc.check(ctx.args.tolerance).items()]
    return {"variables": list(names), "curves": {k: {"tau": cc.tau[k], "q": cc.q[k]} for k in cc.tau}}, checks


def cmd_validate_u(ctx: Context):
    from .galois import ExternalTransform, validate_transform
    d1 = ctx.datum("spec")
    d2 = ctx.datum("spec2") if ctx.args.spec2 else d1
    U = ExternalTransform.from_json(ctx.json("u", "transform"))
    r = validate_transform(U, d1, d2, tol=ctx.args.tolerance)
    checks = [{"name": k, "pass": v["pass"], "residual": _residual(v["residual"])} for k, v in r["checks"].items()]
    return {"checks": {k: v.get("note", "ok" if v["pass"] else "failed") for k, v in r["checks"].items()}}, checks


COMMANDS: dict[str, Callable] = {
    "inertia": cmd_inertia,
    "pairing": cmd_pairing,
    "gamma": cmd_gamma,
    "chern": cmd_chern,
    "todd": cmd_todd,
    "chi": cmd_chi,
    "psi": cmd_psi,
    "mukai-check": cmd_mukai,
    "galois": cmd_galois,
    "monodromy": cmd_monodromy,
    "hl-check": cmd_hl_check,
    "jordan": cmd_jordan,
    "qprod": cmd_qprod,
    "wdvv": cmd_wdvv,
    "flatness": cmd_flatness,
    "lfun": cmd_lfun,
    "jfun": cmd_jfun,
    "flatcoord": cmd_flatcoord,
    "charge": cmd_charge,
    "period": cmd_period,
    "predict": cmd_predict,
    "validate-u": cmd_validate_u,
}


# --------------------------------------------------------------------------
# driver

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="kintegral", description="K-theoretic integral structures on orbifold "
                                                               "quantum cohomology: computations and checks.")
    p.add_argument("--version", action="version", version=f"kintegral {__version__}")
    p.add_argument("--schema", choices=sorted(SCHEMAS), help="print a JSON schema and exit")
    p.add_argument("command", nargs="?", choices=sorted(COMMANDS))
    p.add_argument("--spec", help="orbifold datum JSON")
    p.add_argument("--spec2", help="second datum (validate-u)")
    p.add_argument("--class", dest="cls", default="O", help="K-class: O, T, pt, O(k), <bundle>^k, sky:reg, sky:rho_1=2")
    p.add_argument("--class2", dest="cls2", help="second K-class (mukai-check)")
    p.add_argument("--xi", help="line bundle name for the Galois action")
    p.add_argument("--pair", help="graded nilpotent pair JSON")
    p.add_argument("--correlators", help="correlator table JSON")
    p.add_argument("--directions", help="comma-separated basis indices of active tau' coordinates")
    p.add_argument("--pots", help="potentials JSON")
    p.add_argument("--fm", help="Fourier-Mukai assignment JSON")
    p.add_argument("--u", help="symplectic transform JSON")
    p.add_argument("--precision", type=int, default=64, help="working precision in digits")
    p.add_argument("--order", type=int, default=12, help="truncation order D")
    p.add_argument("--tolerance", type=float, default=1e-10)
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--table", action="store_true", help="render an aligned text table")
    p.add_argument("--timing", action="store_true", help="include wall-clock timing (breaks byte-identity)")
    return p


def _flatten(prefix: str, x: Any, rows: list):
    if isinstance(x, dict):
        for k, v in x.items():
            _flatten(f"{prefix}.{k}" if prefix else str(k), v, rows)
    elif isinstance(x, list) and x and all(isinstance(v, (dict, list)) for v in x) and not _is_pair(x):
        for i, v in enumerate(x):
            _flatten(f"{prefix}[{i}]", v, rows)
    else:
        rows.append((prefix, x if isinstance(x, str) else json.dumps(x)))


def _is_pair(x) -> bool:
    return len(x) == 2 and all(isinstance(v, str) for v in x)


def render_table(report: dict) -> str:
    rows: list = []
    _flatten("", report, rows)
    w = max((len(k) for k, _ in rows), default=0)
    return "\n".join(f"{k.ljust(w)}  {v}" for k, v in rows) + "\n"


def run(argv: list[str] | None = None) -> tuple[int, str]:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.schema:
        return 0, json.dumps(SCHEMAS[args.schema], indent=2) + "\n"
    if not args.command:
        parser.print_usage(sys.stderr)
        return 2, ""
    ctx = Context(args)
    start = time.perf_counter()
    from .orbifold_data import DataError
    from .qdm import MissingCorrelatorError
    try:
        with precision(args.precision):
            results, checks = COMMANDS[args.command](ctx)
            body = jsonable(results)
            checks = jsonable(checks)
    except InputError as e:
        err = {"command": args.command, "error": str(e), "pointer": e.pointer, "source": e.source}
        return 2, json.dumps(err, indent=2) + "\n"
    except MissingCorrelatorError as e:
        needed = [{"insertions": list(k[0]), "compact": k[1], "d": list(k[2])} for k in e.needed[:50]]
        err = {"command": args.command, "error": str(e.args[0]), "missing": needed}
        return 2, json.dumps(err, indent=2) + "\n"
    except (DataError, KeyError, ValueError, TypeError, ArithmeticError) as e:
        err = {"command": args.command, "error": f"{type(e).__name__}: {e}", "pointer": _pointer_of(str(e))}
        return 2, json.dumps(err, indent=2) + "\n"
    ok = all(c["pass"] is not False for c in checks)
    report = {
        "command": args.command,
        "version": __version__,
        "inputs_digest": ctx.digest(),
        "precision": args.precision,
        "results": body,
        "checks": checks,
        "pass": ok,
    }
    if args.timing:
        report["timing_seconds"] = round(time.perf_counter() - start, 3)
    text = render_table(report) if args.table else json.dumps(report, indent=2) + "\n"
    return (0 if ok else 1), text


def main(argv: list[str] | None = None) -> int:
    code, text = run(argv)
    args = sys.argv[1:] if argv is None else argv
    out = None
    if "--out" in args:
        out = args[args.index("--out") + 1]
    if out and code != 2:
        Path(out).write_text(text)
    else:
        stream = sys.stdout if code != 2 else sys.stderr
        stream.write(text)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
