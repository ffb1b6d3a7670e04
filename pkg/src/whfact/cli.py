"""Configuration-driven command line: factorize / grid / verify.

Configs are strict JSON (unknown keys are an error); complex numbers are
written as [re, im] pairs; grid output is comma-delimited text with a fixed
header and 17-significant-digit formatting so identical configs produce
byte-identical files.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import gravity
from .contour import DEFAULT_MARGIN
from .errors import (
    BadConfig,
    BadLambda,
    BranchPointNearContour,
    DegenerateBranch,
    NonCanonical,
    NonZeroWinding,
    NotSymmetric,
    UnsupportedMultiplicity,
    WhfactError,
    ZeroOnContour,
)
from .gravity import MonodromySpec, _AxisCache, metric_delta, solve_point
from .ratfun import CPoly, CRational, rat_normalize

EXIT_OK = 0
EXIT_INVARIANT = 1
EXIT_NONCANONICAL = 2
EXIT_DEGENERATE = 3
EXIT_MULTIPLICITY = 4
EXIT_BADCONFIG = 64


def exit_code_for(exc: BaseException) -> int:
    """Process exit code for a whfact error."""
    if isinstance(exc, (NonCanonical, NonZeroWinding)):
        return EXIT_NONCANONICAL
    if isinstance(exc, (DegenerateBranch, BranchPointNearContour, ZeroOnContour,
                        BadLambda)):
        return EXIT_DEGENERATE
    if isinstance(exc, UnsupportedMultiplicity):
        return EXIT_MULTIPLICITY
    if isinstance(exc, BadConfig):
        return EXIT_BADCONFIG
    if isinstance(exc, WhfactError):
        return EXIT_INVARIANT
    return EXIT_INVARIANT


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _cpair(z: complex) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def _poly_json(p: CPoly) -> list[list[float]]:
    return [_cpair(c) for c in p.coeffs]


def _rat_json(r) -> dict:
    return {"num": _poly_json(r.num), "den": _poly_json(r.den)}


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

@dataclass
class GridSpec:
    rho_min: float = 4.0
    rho_max: float = 4.0
    rho_n: int = 1
    v_min: float = 3.0
    v_max: float = 3.0
    v_n: int = 1

    def rhos(self):
        if self.rho_n == 1:
            return [self.rho_min]
        step = (self.rho_max - self.rho_min) / (self.rho_n - 1)
        return [self.rho_min + k * step for k in range(self.rho_n)]

    def vs(self):
        if self.v_n == 1:
            return [self.v_min]
        step = (self.v_max - self.v_min) / (self.v_n - 1)
        return [self.v_min + k * step for k in range(self.v_n)]


@dataclass
class RunConfig:
    spec: MonodromySpec
    problem_raw: dict
    margin: float = DEFAULT_MARGIN
    grid: GridSpec = field(default_factory=GridSpec)
    verify_tol: float = 1e-10
    quad_tol: float = 1e-4
    fd_step: float = 1e-3
    report_path: str | None = None
    grid_path: str | None = None
    workers: int = 1


def _want_keys(d: dict, allowed: set, where: str) -> None:
    unknown = set(d) - allowed
    if unknown:
        raise BadConfig(f"unknown key(s) {sorted(unknown)} in {where}")


def _as_complex(v, where: str) -> complex:
    if isinstance(v, (int, float)):
        return complex(v)
    if (isinstance(v, list) and len(v) == 2
            and all(isinstance(x, (int, float)) for x in v)):
        return complex(v[0], v[1])
    raise BadConfig(f"{where}: expected a number or [re, im] pair, got {v!r}")


def _as_poly(v, where: str) -> CPoly:
    if not isinstance(v, list) or not v:
        raise BadConfig(f"{where}: expected a nonempty coefficient list")
    return CPoly(tuple(_as_complex(c, where) for c in v))


def _parse_problem(d: dict) -> MonodromySpec:
    _want_keys(d, {"family", "lambda", "params"}, "problem")
    family = d.get("family")
    params = d.get("params", {})
    if not isinstance(params, dict):
        raise BadConfig("problem.params must be an object")
    try:
        if family == "aiii_eps":
            _want_keys(params, {"eps"}, "problem.params")
            lam = d.get("lambda", 1)
            spec = MonodromySpec(family="aiii_eps", lam=lam,
                                 eps=_as_complex(params.get("eps", 0.0),
                                                 "params.eps"))
        elif family == "aiii_cs":
            _want_keys(params, {"c", "s"}, "problem.params")
            lam = d.get("lambda", -1)
            spec = MonodromySpec(
                family="aiii_cs", lam=lam,
                c=_as_complex(params.get("c", 1.0), "params.c"),
                s=_as_complex(params.get("s", 0.0), "params.s"),
            )
        elif family == "custom":
            _want_keys(params, {"entries"}, "problem.params")
            if "lambda" not in d:
                raise BadConfig("custom problems must set lambda")
            entries = params.get("entries")
            if not isinstance(entries, dict):
                raise BadConfig("params.entries must be an object")
            _want_keys(entries, {"a11", "a12", "a21", "a22"}, "params.entries")
            mat = []
            for i in (1, 2):
                row = []
                for j in (1, 2):
                    key = f"a{i}{j}"
                    e = entries.get(key)
                    if not isinstance(e, dict):
                        raise BadConfig(f"params.entries.{key} must be an object")
                    _want_keys(e, {"num", "den"}, f"params.entries.{key}")
                    row.append(rat_normalize(_as_poly(e["num"], key),
                                             _as_poly(e["den"], key)))
                mat.append(tuple(row))
            spec = MonodromySpec.custom(mat, d["lambda"])
        else:
            raise BadConfig(f"unknown problem family {family!r}")
    except (BadLambda, ValueError) as exc:
        raise BadConfig(str(exc)) from exc
    return spec


def parse_config(data: dict) -> RunConfig:
    if not isinstance(data, dict):
        raise BadConfig("config root must be an object")
    _want_keys(data, {"problem", "contour", "grid", "tolerances", "output",
                      "workers"}, "config")
    if "problem" not in data:
        raise BadConfig("config needs a problem section")
    spec = _parse_problem(data["problem"])
    cfg = RunConfig(spec=spec, problem_raw=data["problem"])

    contour = data.get("contour", {})
    _want_keys(contour, {"margin"}, "contour")
    cfg.margin = float(contour.get("margin", DEFAULT_MARGIN))
    if not 0.0 < cfg.margin < 0.5:
        raise BadConfig("contour.margin must lie in (0, 0.5)")

    grid = data.get("grid", {})
    _want_keys(grid, {"rho_min", "rho_max", "rho_n", "v_min", "v_max", "v_n"},
               "grid")
    g = GridSpec()
    for k in ("rho_min", "rho_max", "v_min", "v_max"):
        if k in grid:
            setattr(g, k, float(grid[k]))
    for k in ("rho_n", "v_n"):
        if k in grid:
            n = grid[k]
            if not isinstance(n, int) or n < 1:
                raise BadConfig(f"grid.{k} must be a positive integer")
            setattr(g, k, n)
    if "rho_max" not in grid:
        g.rho_max = g.rho_min
    if "v_max" not in grid:
        g.v_max = g.v_min
    cfg.grid = g

    tol = data.get("tolerances", {})
    _want_keys(tol, {"verify_tol", "quad_tol", "fd_step"}, "tolerances")
    cfg.verify_tol = float(tol.get("verify_tol", 1e-10))
    cfg.quad_tol = float(tol.get("quad_tol", 1e-4))
    cfg.fd_step = float(tol.get("fd_step", 1e-3))
    if min(cfg.verify_tol, cfg.quad_tol, cfg.fd_step) <= 0.0:
        raise BadConfig("tolerances must be positive")

    out = data.get("output", {})
    _want_keys(out, {"report_path", "grid_path"}, "output")
    cfg.report_path = out.get("report_path")
    cfg.grid_path = out.get("grid_path")

    workers = data.get("workers", 1)
    if not isinstance(workers, int) or workers < 1:
        raise BadConfig("workers must be a positive integer")
    cfg.workers = workers
    return cfg


def load_config(path: str) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise BadConfig(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise BadConfig(f"config {path} is not valid JSON: {exc}") from exc
    return parse_config(data)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _report_payload(cfg: RunConfig, rho: float, v: float) -> dict:
    sol = solve_point(cfg.spec, rho, v, verify=True, tol=cfg.verify_tol,
                      margin=cfg.margin)
    fact = sol.factorization
    residuals = {k: float(val) for k, val in sol.report.residuals.items()}
    return {
        "problem": cfg.problem_raw,
        "rho": rho,
        "v": v,
        "branch_points": {
            "tau0": _cpair(sol.point.tau0),
            "tau0tilde": _cpair(sol.point.tau0tilde),
        },
        "factors": {
            "f_plus": [_rat_json(f) for f in fact.first.plus],
            "f_minus": [_rat_json(f) for f in fact.first.minus],
            "s_plus": [_rat_json(f) for f in fact.second.plus],
            "s_minus": [_rat_json(f) for f in fact.second.minus],
            "r1": {"num": _poly_json(fact.ptilde1), "den": _poly_json(fact.sd.p2)},
            "r2": {"num": _poly_json(fact.R2), "den": _poly_json(fact.sd.p2)},
            "p1": _poly_json(fact.sd.p1),
            "p2": _poly_json(fact.sd.p2),
        },
        "axis_matrix": [[_cpair(sol.axis[i, j]) for j in range(2)]
                        for i in range(2)],
        "residuals": residuals,
        "pass": bool(sol.report.passed),
    }


def cmd_factorize(cfg: RunConfig, rho: float | None, v: float | None,
                  out_path: str | None) -> int:
    if rho is None or v is None:
        g = cfg.grid
        if g.rho_n == 1 and g.v_n == 1:
            rho = g.rho_min if rho is None else rho
            v = g.v_min if v is None else v
        else:
            raise BadConfig("factorize needs --rho/--v or a 1x1 grid")
    payload = _report_payload(cfg, rho, v)
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    path = out_path or cfg.report_path
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    worst = max(payload["residuals"].values())
    print(f"factorize rho={_fmt(rho)} v={_fmt(v)} worst_residual={worst:.3e} "
          f"pass={payload['pass']}", file=sys.stderr)
    return EXIT_OK if payload["pass"] else EXIT_INVARIANT


GRID_HEADER = "rho,v,Delta,B,psi,field_residual,status"


def cmd_grid(cfg: RunConfig, out_path: str | None) -> int:
    rows = []
    points = [(rho, v) for rho in cfg.grid.rhos() for v in cfg.grid.vs()]
    cache = _AxisCache(cfg.spec)

    def solve_one(pt):
        rho, v = pt
        try:
            delta = metric_delta(cache.axis(rho, v))
            resid = gravity.field_residual(cfg.spec, rho, v, cfg.fd_step)
            return (delta, resid, None)
        except WhfactError as exc:
            return (math.nan, math.nan, exc)

    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            solved = list(pool.map(solve_one, points))
    else:
        solved = [solve_one(pt) for pt in points]

    n_ok = 0
    first_error: WhfactError | None = None
    for (rho, v), (delta, resid, exc) in zip(points, solved):
        if exc is None:
            try:
                b, psi = gravity._integrate_path(
                    cfg.spec, gravity.lpath(cfg.spec, rho, v),
                    gravity.DERIV_STEP, gravity.QUAD_STEP, cfg.quad_tol, cache)
                rows.append((rho, v, delta, b.real, psi.real, resid, "ok"))
                n_ok += 1
                continue
            except WhfactError as err:
                exc = err
        if first_error is None:
            first_error = exc
        rows.append((rho, v, math.nan, math.nan, math.nan, math.nan,
                     type(exc).__name__))

    lines = [GRID_HEADER]
    for rho, v, delta, b, psi, resid, status in rows:
        lines.append(",".join([_fmt(rho), _fmt(v), _fmt(delta), _fmt(b),
                               _fmt(psi), _fmt(resid), status]))
    text = "\n".join(lines) + "\n"
    path = out_path or cfg.grid_path
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    print(f"grid {len(rows)} rows, {n_ok} ok", file=sys.stderr)
    if n_ok > 0:
        return EXIT_OK
    return exit_code_for(first_error) if first_error else EXIT_INVARIANT


def _verify_points(cfg: RunConfig) -> list[tuple[float, float]]:
    g = cfg.grid
    pts = {(g.rho_min, g.v_min), (g.rho_min, g.v_max),
           (g.rho_max, g.v_min), (g.rho_max, g.v_max)}
    cal = gravity._calibration(cfg.spec)
    if cal is not None:
        pts.add(cal[0])
    return sorted(pts)


def cmd_verify(cfg: RunConfig) -> int:
    worst: dict[str, float] = {}
    failed = False
    for rho, v in _verify_points(cfg):
        try:
            sol = solve_point(cfg.spec, rho, v, verify=True,
                              tol=cfg.verify_tol, margin=cfg.margin)
        except WhfactError as exc:
            print(f"point ({_fmt(rho)}, {_fmt(v)}): {type(exc).__name__}: {exc}")
            return exit_code_for(exc)
        for k, val in sol.report.residuals.items():
            worst[k] = max(worst.get(k, 0.0), float(val))
        axis = sol.axis
        worst["axis_symmetry"] = max(
            worst.get("axis_symmetry", 0.0), abs(axis[0, 1] - axis[1, 0]))
        worst["axis_det"] = max(
            worst.get("axis_det", 0.0), abs(np.linalg.det(axis) - 1.0))
        if not sol.report.passed:
            failed = True
    for k in sorted(worst):
        cap = 10.0 * cfg.verify_tol if k.startswith("r2_cross") else cfg.verify_tol
        if k.startswith("axis"):
            cap = max(cap, 1e-9)
        status = "ok" if worst[k] <= cap else "FAIL"
        print(f"{k:20s} {worst[k]:.3e}  (tol {cap:.1e})  {status}")
        if worst[k] > cap:
            failed = True
    return EXIT_INVARIANT if failed else EXIT_OK


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="whfact",
        description="Canonical Wiener-Hopf factorisation of symmetric 2x2 "
                    "monodromy matrices and metric reconstruction.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("factorize", "grid", "verify"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON config path")
        p.add_argument("--workers", type=int, default=None)
        if name == "factorize":
            p.add_argument("--rho", type=float, default=None)
            p.add_argument("--v", type=float, default=None)
        if name in ("factorize", "grid"):
            p.add_argument("--out", default=None)

    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.workers is not None:
            if args.workers < 1:
                raise BadConfig("workers must be a positive integer")
            cfg.workers = args.workers
        if args.command == "factorize":
            return cmd_factorize(cfg, args.rho, args.v, args.out)
        if args.command == "grid":
            return cmd_grid(cfg, args.out)
        return cmd_verify(cfg)
    except WhfactError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return exit_code_for(exc)


if __name__ == "__main__":
    sys.exit(main())
