"""Command-line front end.

All structured input and output is JSON with complex numbers written as
``[re, im]``; pairing matrices can also be written as CSV.  Exit status is 0
on success, 1 when the input cannot be parsed and 2 on a domain error, in
which case ``{"error": code, "detail": text}`` is printed.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import acceptance
from .beltrami import BranchChart, BumpProfile, QuadratureSpec, quadrature_contraction, residue_contraction
from .cpoly import SERIES_ORDER, Poly, Series
from .critical import (
    BranchConfig,
    critical_line,
    criticality_test,
    kernel,
    pairing_matrix,
    rank_profile,
)
from .errors import BPSError, ParseError
from .hyperelliptic import Curve, Divisor, is_canonical
from .sl2 import CurvePath, ProjPoint, Sl2System, branch_divisor, eigen_residual, monodromy

DEFAULT_TOL = 1e-8


# ---------------------------------------------------------------------------
# parsing helpers

def _load_json(path: str) -> Any:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"{path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None


def _complex(value: Any, where: str) -> complex:
    try:
        if isinstance(value, str):
            return complex(value.replace(" ", "").replace("i", "j"))
        if isinstance(value, (list, tuple)) and len(value) == 2:
            return complex(float(value[0]), float(value[1]))
        if isinstance(value, (int, float)):
            return complex(value)
    except (TypeError, ValueError):
        pass
    raise ParseError(f"{where}: expected a complex number as [re, im] or 'a+bj', got {value!r}")


def _complex_list(values: Any, where: str) -> list[complex]:
    if not isinstance(values, list):
        raise ParseError(f"{where}: expected a list of complex numbers")
    return [_complex(v, f"{where}[{i}]") for i, v in enumerate(values)]


def _field(data: Any, key: str, where: str) -> Any:
    if not isinstance(data, dict) or key not in data:
        raise ParseError(f"{where}: missing field '{key}'")
    return data[key]


def load_curve(path: str) -> Curve:
    """``{"P": [...]}`` (coefficients, low degree first) or ``{"weierstrass": [...], "lead": z}``."""
    data = _load_json(path)
    if isinstance(data, dict) and "weierstrass" in data:
        ws = _complex_list(data["weierstrass"], f"{path}: weierstrass")
        lead = _complex(data.get("lead", 1.0), f"{path}: lead")
        return Curve.from_roots(ws, lead)
    return Curve(Poly(_complex_list(_field(data, "P", path), f"{path}: P")))


def _load_point_entries(path: str) -> list:
    data = _load_json(path)
    if isinstance(data, dict):
        data = _field(data, "points", path)
    if not isinstance(data, list):
        raise ParseError(f"{path}: expected a list of point entries")
    for i, e in enumerate(data):
        if not isinstance(e, dict):
            raise ParseError(f"{path}: entry {i} is not an object")
        if "inf" not in e:
            _complex(_field(e, "x", f"{path}: entry {i}"), f"{path}: entry {i}: x")
            if "y" in e:
                _complex(e["y"], f"{path}: entry {i}: y")
    return data


def load_divisor(curve: Curve, path: str) -> Divisor:
    return Divisor.from_json(curve, _load_point_entries(path))


def load_config(curve: Curve, path: str) -> BranchConfig:
    return BranchConfig.from_json(curve, _load_point_entries(path))


def load_chart(path: str) -> BranchChart:
    data = _load_json(path)
    m = _field(data, "m", path)
    if not isinstance(m, int):
        raise ParseError(f"{path}: m must be an integer")
    r_disk = float(data.get("r_disk", 1.0))
    if "c" not in data:
        return BranchChart.standard(m, int(data.get("order", SERIES_ORDER)), r_disk)
    co = _complex_list(data["c"], f"{path}: c")
    return BranchChart(m, Series(co, int(data.get("order", len(co) - 1))), r_disk)


def load_series(path: str) -> Series:
    data = _load_json(path)
    if isinstance(data, list):
        co = _complex_list(data, path)
        return Series(co, len(co) - 1)
    co = _complex_list(_field(data, "coeffs", path), f"{path}: coeffs")
    return Series(co, int(data.get("order", len(co) - 1)))


def load_system(curve: Curve, path: str) -> Sl2System:
    data = _load_json(path)
    parts = [_complex_list(_field(data, k, path), f"{path}: {k}") for k in ("a11", "a12", "a21")]
    return Sl2System.from_coeffs(curve, *parts)


def load_path(path: str) -> CurvePath:
    data = _load_json(path)
    wps = _complex_list(_field(data, "waypoints", path), f"{path}: waypoints")
    return CurvePath(tuple(wps), int(data.get("sheet", 1)), bool(data.get("closed", False)))


def _pair(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def _proj(text: str) -> ProjPoint:
    parts = text.split(",")
    if len(parts) != 2:
        raise ParseError(f"--c: expected 'c1,c2', got {text!r}")
    return ProjPoint(_complex(parts[0], "--c"), _complex(parts[1], "--c"))


def _fmt_csv(z: complex) -> str:
    return f"{z.real:.17g}{z.imag:+.17g}i"


# ---------------------------------------------------------------------------
# subcommands

def cmd_canonical(args) -> dict:
    c = load_curve(args.curve)
    E = load_divisor(c, args.divisor)
    r = is_canonical(c, E)
    out = {"canonical": r.canonical, "dim": r.dim, "degree": E.degree}
    if r.reason:
        out["reason"] = r.reason
    return out


def cmd_contract(args) -> dict:
    chart = load_chart(args.chart)
    alpha = load_series(args.alpha)
    q = _complex(args.q, "--q")
    if args.mode == "residue":
        v = residue_contraction(alpha, chart, q)
    else:
        grid = QuadratureSpec(args.n_radial, args.n_angular, args.tol, args.max_refinements,
                              args.radial_panels)
        v = quadrature_contraction(alpha, chart, BumpProfile(args.r1, args.r2, args.smoothness), q, grid)
    return {"mode": args.mode, "value": _pair(v)}


def cmd_critical(args) -> dict:
    c = load_curve(args.curve)
    cfg = load_config(c, args.config)
    out: dict[str, Any] = {"g": c.g, "k": cfg.k, "partition": cfg.partition, "paired": cfg.is_paired}
    if cfg.k <= 2 * c.g - 2:
        r = criticality_test(c, cfg)
        out.update(kernel_dim=r.kernel_dim, is_canonical=r.is_canonical, consistent=r.consistent)
    else:
        out["kernel_dim"] = len(kernel(pairing_matrix(c, cfg)))
    if cfg.is_paired and cfg.is_simple and cfg.k == 2 * c.g - 2:
        line = critical_line(c, cfg)
        out["critical_line"] = line.to_json()
        out["equations_satisfied"] = bool(line.pair_residual < 1e-8 and line.q_residual < 1e-8)
    return out


def cmd_rank(args) -> dict:
    if args.curve:
        c = load_curve(args.curve)
        if args.g is not None and args.g != c.g:
            raise ParseError(f"--g {args.g} disagrees with the curve genus {c.g}")
    else:
        if args.g is None:
            raise ParseError("rank: give --g or --curve")
        c = Curve(Poly([-1.0] + [0.0] * (2 * args.g + 1) + [1.0]))
    return rank_profile(c, args.k, args.samples, args.seed, args.workers)


def cmd_sl2_branch(args) -> dict:
    c = load_curve(args.curve)
    sys_ = load_system(c, args.system)
    cp = _proj(args.c)
    D = branch_divisor(sys_, cp)
    r = is_canonical(c, D) if all(hasattr(p, "y") for p in D.support) else None
    out = {"divisor": D.to_json(), "degree": D.degree}
    if r is not None:
        out["canonical"] = r.canonical
    return out


def cmd_sl2_monodromy(args) -> dict:
    c = load_curve(args.curve)
    phi = monodromy(load_system(c, args.system), load_path(args.path), args.tol)
    return {"matrix": [[_pair(phi[i, j]) for j in range(2)] for i in range(2)],
            "det": _pair(complex(np.linalg.det(phi)))}


def cmd_sl2_eigen(args) -> dict:
    c = load_curve(args.curve)
    sys_ = load_system(c, args.system)
    cp = _proj(args.c)
    if args.points:
        pts = [p for p, _ in load_divisor(c, args.points)]
    else:
        pts = [p for p in branch_divisor(sys_, cp).support if hasattr(p, "y")]
    res = [eigen_residual(sys_, cp, p) for p in pts]
    return {"points": [{"x": _pair(p.x), "y": _pair(p.y), "residual": r} for p, r in zip(pts, res)],
            "max_residual": max(res, default=0.0)}


def cmd_pairing(args) -> str | dict:
    c = load_curve(args.curve)
    M = pairing_matrix(c, load_config(c, args.config)).M
    if args.format == "json":
        return {"rows": M.shape[0], "cols": M.shape[1],
                "matrix": [[_pair(v) for v in row] for row in M], "chart": "x - x0"}
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for row in M:
        w.writerow(_fmt_csv(v) for v in row)
    return buf.getvalue()


# ---------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ParseError(message)


def _env_tol() -> float:
    raw = os.environ.get("BPS_TOL")
    if raw is None:
        return DEFAULT_TOL
    try:
        tol = float(raw)
    except ValueError:
        raise ParseError(f"BPS_TOL: not a number: {raw!r}") from None
    if tol <= 0:
        raise ParseError("BPS_TOL must be positive")
    return tol


def build_parser(default_tol: float = DEFAULT_TOL) -> argparse.ArgumentParser:
    p = _Parser(prog="bpsdeform", description="Branch-point deformations on hyperelliptic curves.")
    p.add_argument("--selftest", action="store_true", help="run the acceptance suite and exit")
    common = _Parser(add_help=False)
    common.add_argument("--tol", type=float, default=default_tol,
                        help="integration / quadrature tolerance (env BPS_TOL)")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    s = sub.add_parser("canonical", parents=[common], help="canonical-divisor test")
    s.add_argument("curve")
    s.add_argument("divisor")
    s.set_defaults(func=cmd_canonical)

    s = sub.add_parser("contract", parents=[common], help="pair alpha with a branch-point move")
    s.add_argument("chart")
    s.add_argument("alpha")
    s.add_argument("q")
    s.add_argument("--mode", choices=("residue", "quadrature"), default="residue")
    s.add_argument("--r1", type=float, default=0.3)
    s.add_argument("--r2", type=float, default=0.7)
    s.add_argument("--smoothness", type=int, default=2)
    s.add_argument("--n-radial", type=int, default=24)
    s.add_argument("--n-angular", type=int, default=32)
    s.add_argument("--max-refinements", type=int, default=6)
    s.add_argument("--radial-panels", type=int, default=1)
    s.set_defaults(func=cmd_contract)

    s = sub.add_parser("critical", parents=[common], help="kernel of the pairing matrix")
    s.add_argument("curve")
    s.add_argument("config")
    s.set_defaults(func=cmd_critical)

    s = sub.add_parser("rank", parents=[common], help="rank statistics of random configurations")
    s.add_argument("--g", type=int)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--samples", type=int, default=100)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--curve")
    s.set_defaults(func=cmd_rank)

    for name, func, hlp in (("sl2-branch", cmd_sl2_branch, "branch divisor of an sl2 system"),
                            ("sl2-eigen", cmd_sl2_eigen, "eigenvector residuals")):
        s = sub.add_parser(name, parents=[common], help=hlp)
        s.add_argument("curve")
        s.add_argument("system")
        s.add_argument("--c", required=True, help="projective point 'c1,c2'")
        if name == "sl2-eigen":
            s.add_argument("--points", help="point list (divisor JSON); default: branch points")
        s.set_defaults(func=func)

    s = sub.add_parser("sl2-monodromy", parents=[common], help="monodromy along a path")
    s.add_argument("curve")
    s.add_argument("system")
    s.add_argument("path")
    s.set_defaults(func=cmd_sl2_monodromy)

    s = sub.add_parser("pairing", parents=[common], help="pairing matrix")
    s.add_argument("curve")
    s.add_argument("config")
    s.add_argument("--format", choices=("csv", "json"), default="csv")
    s.set_defaults(func=cmd_pairing)
    return p


def _emit(obj) -> None:
    if isinstance(obj, str):
        sys.stdout.write(obj)
    else:
        sys.stdout.write(json.dumps(obj, sort_keys=True) + "\n")


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser(_env_tol()).parse_args(argv)
        if args.selftest:
            results = acceptance.run_all()
            return 0 if all(r.passed for r in results) else 2
        if args.command is None:
            raise ParseError("no subcommand given")
        if args.tol <= 0:
            raise ParseError("--tol must be positive")
        _emit(args.func(args))
        return 0
    except ParseError as exc:
        _emit({"error": exc.code, "detail": exc.detail})
        return 1
    except BPSError as exc:
        _emit({"error": exc.code, "detail": exc.detail})
        return 2


if __name__ == "__main__":
    sys.exit(main())
