"""warpgeo command line: run scene files and print the catalog.

Scene files are flat ``key = value`` lines; ``#`` starts a comment and
dotted keys group parameters (``warp.name = linear``, ``warp.a = 2``).
"""

from __future__ import annotations

import argparse
import math
import os
import re
import sys
import tempfile
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .ambient import CATALOG, CATALOG_DEFAULTS, alpha_prime_residual, ambient_consistency, \
    make_warp
from .errors import InvalidArgumentError, InvalidConfigurationError, SceneError, WarpGeoError
from .oracle import fmt, make_report, self_test, shape_operator
from .rotational import F_TABLE, PSI_TABLE, ROT_TYPES

TASKS = ("rotational", "parallel", "graph", "cylinder", "verify")
KEY_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*(\.[A-Za-z_][A-Za-z0-9_]*)*$")

COMMON_KEYS = {"eps", "task", "tol", "grid", "step", "n"}
TASK_KEYS = {
    "rotational": {"c", "type", "span", "branch", "seed.s0", "seed.y0"},
    "parallel": {"seed.kind", "seed.param", "seed.k", "s_min", "s_max", "samples"},
    "graph": {"seed.kind", "seed.param", "seed.k", "s_min", "s_max", "samples",
              "phi.a", "phi.b", "phi.c"},
    "cylinder": {"k", "Lambda", "spread"},
    "verify": {"frames", "samples"},
}
TEXT_KEYS = {"task", "type", "branch", "warp.name", "seed.kind"}
INT_KEYS = {"eps", "n", "k", "grid", "seed.k", "samples", "frames"}
SCHEMAS = {
    "rotational": "eps warp.* c type [span branch seed.s0 seed.y0 step tol]",
    "parallel": "eps seed.kind [seed.param seed.k n s_min s_max samples tol]",
    "graph": "eps warp.* seed.kind phi.a phi.b [phi.c seed.param seed.k n s_min s_max samples tol step]",
    "cylinder": "[eps=1] n k [Lambda spread grid tol step]",
    "verify": "eps warp.* [n frames samples tol step]",
}


@dataclass
class Scene:
    values: dict
    lines: dict = field(default_factory=dict)
    nlines: int = 0

    def loc(self, key):
        return self.lines.get(key, (self.nlines + 1, 1))

    def error(self, key, msg):
        line, col = self.loc(key)
        return SceneError(msg, line, col)

    def has(self, key):
        return key in self.values

    def raw(self, key, default=None, required=False):
        if key not in self.values:
            if required:
                raise self.error(key, f"missing required key '{key}'")
            return default
        return self.values[key]

    def number(self, key, default=None, required=False, integer=False):
        v = self.raw(key, None, required)
        if v is None:
            return default
        try:
            if integer:
                if not re.fullmatch(r"[+-]?\d+", v):
                    raise ValueError
                return int(v)
            if "/" in v:
                return float(Fraction(v))
            x = float(v)
            if not math.isfinite(x):
                raise ValueError
            return x
        except (ValueError, ZeroDivisionError):
            kind = "an integer" if integer else "a finite number"
            raise self.error(key, f"'{key}' must be {kind} (got '{v}')") from None

    def choice(self, key, options, default=None, required=False):
        v = self.raw(key, default, required)
        if v is not None and v not in options:
            raise self.error(key, f"'{key}' must be one of {', '.join(options)} (got '{v}')")
        return v


def parse_scene(text: str) -> Scene:
    values, lines = {}, {}
    rows = text.split("\n")
    for ln, raw in enumerate(rows, start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        if "=" not in line:
            col = len(line) - len(line.lstrip()) + 1
            raise SceneError("expected 'key = value'", ln, col)
        key_part, val_part = line.split("=", 1)
        key = key_part.strip()
        kcol = len(key_part) - len(key_part.lstrip()) + 1
        if not KEY_RE.match(key):
            raise SceneError(f"invalid key '{key}'", ln, kcol)
        value = val_part.strip()
        vcol = len(key_part) + 2 + (len(val_part) - len(val_part.lstrip()))
        if not value:
            raise SceneError(f"empty value for '{key}'", ln, vcol)
        if key in values:
            raise SceneError(f"duplicate key '{key}' (first on line {lines[key][0]})", ln, kcol)
        values[key] = value
        lines[key] = (ln, vcol)
    scene = Scene(values, lines, len(rows))
    task = scene.choice("task", TASKS, required=True)
    allowed = COMMON_KEYS | TASK_KEYS[task]
    uses_warp = task in ("rotational", "graph", "verify")
    for key in values:
        if key.startswith("warp."):
            if not uses_warp:
                raise scene.error(key, f"task '{task}' does not take warp parameters")
            continue
        if key not in allowed:
            raise scene.error(key, f"unknown key '{key}' for task '{task}'")
    for key in values:
        if key not in TEXT_KEYS:
            scene.number(key, integer=key in INT_KEYS)
    if task == "cylinder":
        if scene.has("eps") and scene.number("eps", integer=True) != 1:
            raise scene.error("eps", "cylinder scenes are built over the round sphere (eps = 1)")
    else:
        eps = scene.number("eps", required=True, integer=True)
        if eps not in (-1, 0, 1):
            raise scene.error("eps", "eps must be -1, 0 or 1")
    return scene


def _warp(scene: Scene, eps: int):
    name = scene.choice("warp.name", tuple(n for n in CATALOG if n != "tabulated"), required=True)
    params = {}
    for key in scene.values:
        if key.startswith("warp.") and key not in ("warp.name", "warp.t_min", "warp.t_max"):
            p = key[5:]
            if p not in CATALOG[name]:
                raise scene.error(key, f"warp '{name}' has no parameter '{p}'")
            params[p] = scene.number(key)
    interval = None
    if scene.has("warp.t_min") or scene.has("warp.t_max"):
        interval = (scene.number("warp.t_min", required=True), scene.number("warp.t_max", required=True))
    try:
        return make_warp(name, eps, interval, **params)
    except InvalidConfigurationError as exc:
        raise scene.error("warp.name", str(exc)) from None


# -- tasks -------------------------------------------------------------------

def _plot(xs, ys) -> str:
    return "".join(f"{fmt(x)} {fmt(y)}\n" for x, y in zip(xs, ys))


def _config(scene, key, build):
    try:
        return build()
    except (InvalidConfigurationError, InvalidArgumentError) as exc:
        raise scene.error(key, str(exc)) from None


def run_rotational(scene, opts):
    from .rotational import RotationalSpec, csc_verify, integrate_profile

    eps = scene.number("eps", integer=True)
    w = _warp(scene, eps)
    c = scene.number("c", required=True)
    typ = scene.choice("type", ROT_TYPES, required=True)
    spec = _config(scene, "type", lambda: RotationalSpec(eps, typ, c, w))
    seed = None
    if scene.has("seed.s0") or scene.has("seed.y0"):
        seed = (scene.number("seed.s0", required=True), scene.number("seed.y0", required=True))
    branch = scene.choice("branch", ("plus", "minus"), "plus")
    step = opts.step or scene.number("step", 1e-3)
    curve = integrate_profile(spec, seed=seed, step=step, span=scene.number("span", 0.5), branch=branch)
    tol = opts.tol or scene.number("tol", 1e-6)
    csc = csc_verify(curve, tol)
    cons = make_report("constraints", np.maximum(curve.unit_speed_residual(), curve.warp_residual()), 1e-8)
    files = {
        "profile.csv": curve.to_csv(),
        "csc_residuals.csv": csc.to_csv(),
        "plot_phi.dat": _plot(curve.s, curve.phi),
        "plot_xi.dat": _plot(curve.s, curve.xi),
    }
    return [csc, cons], files


def _family(scene, eps):
    from .parallelgraph import ParallelFamily
    from .spaceform import tube_seed, umbilic_seed

    n = scene.number("n", 3, integer=True)
    kind = scene.choice("seed.kind", ("sphere", "horosphere", "equidistant", "hyperplane", "tube"),
                        required=True)
    if kind == "tube":
        chart, curv = _config(scene, "seed.kind", lambda: tube_seed(
            eps, scene.number("seed.k", 1, integer=True), scene.number("seed.param", required=True), n))
    else:
        param = scene.number("seed.param", 1.0)
        chart, lam = _config(scene, "seed.kind", lambda: umbilic_seed(eps, kind, param, n))
        curv = [(lam, n - 1)]
    s_range = None
    if scene.has("s_min") or scene.has("s_max"):
        s_range = (scene.number("s_min", required=True), scene.number("s_max", required=True))
    return _config(scene, "s_min", lambda: ParallelFamily.from_seed(chart, curv, eps, s_range))


def run_parallel(scene, opts):
    from .parallelgraph import cartan_residual, family_table, riccati_residual

    eps = scene.number("eps", integer=True)
    fam = _family(scene, eps)
    count = scene.number("samples", 100, integer=True)
    lo, hi = fam.s_range
    ss = fam.samples(count, 0.05 * (hi - lo))
    tol = opts.tol or scene.number("tol", 1e-6)
    ric = [riccati_residual(l0, eps, s) for l0, _ in fam.curvatures for s in ss]
    reports = [make_report("riccati", ric, tol)]
    if len(fam.curvatures) == 2:
        prods = [abs(cartan_residual(fam.curvatures_at(s), eps).product) for s in ss]
        reports.append(make_report("cartan", prods, 1e-10))
    files = {"family.csv": family_table(fam, ss)}
    for i, (l0, _) in enumerate(fam.curvatures):
        from .parallelgraph import parallel_curvature

        files[f"plot_lambda{i + 1}.dat"] = _plot(ss, [parallel_curvature(l0, eps, s) for s in ss])
    return reports, files


def run_graph(scene, opts):
    from .parallelgraph import GraphSpec, graph_chart, graph_principal, graph_table

    eps = scene.number("eps", integer=True)
    w = _warp(scene, eps)
    fam = _family(scene, eps)
    a = scene.number("phi.a", required=True)
    b = scene.number("phi.b", required=True)
    q = scene.number("phi.c", 0.0)
    g = _config(scene, "phi.a", lambda: GraphSpec(fam, lambda s: a + b * s + q * s * s, w,
                                                  lambda s: b + 2 * q * s))
    count = scene.number("samples", 50, integer=True)
    chart = graph_chart(g)
    margin = 0.1 * (chart.hi - chart.lo)
    rng = np.random.default_rng(scene.number("grid", 0, integer=True))
    U = chart.lo + margin + (chart.hi - chart.lo - 2 * margin) * rng.random((count, chart.dim))
    ev = shape_operator(chart, w, U, opts.step or 1e-3)
    shape_res, log_res = [], []
    for k, u in enumerate(U):
        gp = graph_principal(g, u[0])
        shape_res.append(np.abs(np.sort(gp.spectrum()) - ev[k]).max())
        log_res.append(gp.cross_residual)
    tol = opts.tol or scene.number("tol", 1e-4)
    ss = fam.samples(count)
    files = {"graph.csv": graph_table(g, ss)}
    files["plot_theta.dat"] = _plot(ss, [graph_principal(g, s).frame.theta for s in ss])
    files["plot_lambda1.dat"] = _plot(ss, [graph_principal(g, s).lambda1 for s in ss])
    return [make_report("shape", shape_res, tol), make_report("log-form", log_res, 1e-6)], files


def run_cylinder(scene, opts):
    from .cylinder import build_cylinder, clifford_base, default_lambda, solve_omega, \
        verify_cylinder_einstein

    n = scene.number("n", 5, integer=True)
    k = scene.number("k", 2, integer=True)
    base = _config(scene, "k", lambda: clifford_base(n, k))
    Lam = scene.number("Lambda", default_lambda(n))
    sol = _config(scene, "Lambda", lambda: solve_omega(Lam, n, base.c))
    cyl = build_cylinder(sol, base)
    tol = opts.tol or scene.number("tol", 1e-4)
    grid = opts.grid or scene.number("grid", 5, integer=True)
    ver = verify_cylinder_einstein(cyl, Lam, tol, grid, scene.number("spread", 1.0), opts.step or 1e-3)
    ts = np.linspace(*sol.interval, 101)
    info = (f"n {n}\nk {k}\nLambda {fmt(Lam)}\nc {fmt(sol.c)}\nomega {sol.kind}\n"
            f"A {fmt(sol.A)}\nmu {fmt(sol.mu)}\nspread {fmt(ver.spread.value)}\n")
    files = {"einstein_residuals.csv": ver.einstein.to_csv(), "cylinder.txt": info,
             "plot_omega.dat": _plot(ts, sol.omega(ts))}
    return [ver.einstein, ver.spread], files


def run_verify(scene, opts):
    eps = scene.number("eps", integer=True)
    w = _warp(scene, eps)
    n = scene.number("n", 3, integer=True)
    tol = opts.tol or scene.number("tol", 1e-5)
    amb = ambient_consistency(w, n, scene.number("frames", 20, integer=True), 0, opts.step or 1e-3, tol)
    t0, t1 = w.interval
    m = scene.number("samples", 100, integer=True)
    ts = t0 + (t1 - t0) * (np.arange(m) + 1.0) / (m + 1)
    ap = make_report("alpha-prime", [alpha_prime_residual(w, t) for t in ts], 1e-6)
    return [self_test(), amb, ap], {"ambient_residuals.csv": amb.to_csv()}


RUNNERS = {"rotational": run_rotational, "parallel": run_parallel, "graph": run_graph,
           "cylinder": run_cylinder, "verify": run_verify}


def _write_atomic(path: Path, text: str):
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=path.parent)
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def run(scene_path, out_dir, tol=None, grid=None, step=None) -> int:
    opts = argparse.Namespace(tol=tol, grid=grid, step=step)
    try:
        text = Path(scene_path).read_text()
    except OSError as exc:
        print(f"{scene_path}: {exc}", file=sys.stderr)
        return 2
    try:
        scene = parse_scene(text)
        task = scene.values["task"]
        reports, files = RUNNERS[task](scene, opts)
    except SceneError as exc:
        print(f"{scene_path}:{exc}", file=sys.stderr)
        return 2
    except WarpGeoError as exc:
        print(f"{scene_path}: numeric error: {exc}", file=sys.stderr)
        return 3
    files["report.txt"] = "".join(r.to_text() for r in reports)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name in sorted(files):
        _write_atomic(out / name, files[name])
    failed = [r for r in reports if not r.passed]
    if failed:
        print(f"verification failed ({', '.join(r.quantity for r in failed)}): {out / 'report.txt'}",
              file=sys.stderr)
        return 1
    return 0


def list_catalog() -> str:
    out = ["warps:"]
    for name, params in CATALOG.items():
        defaults = CATALOG_DEFAULTS.get(name, {})
        desc = " ".join(f"{p}={fmt(defaults[p])}" if p in defaults else p for p in params)
        out.append(f"  {name} {desc}")
    out.append("profile functions f:")
    for f, eps, typ in F_TABLE:
        out.append(f"  f(x)={f} eps={eps} type={typ}")
    out.append("warping functions psi:")
    for psi, sign, epss, typ in PSI_TABLE:
        out.append(f"  psi(s)={psi} {sign} eps={','.join(str(e) for e in epss)} type={typ}")
    out.append("tasks:")
    for task in TASKS:
        out.append(f"  {task}: {SCHEMAS[task]}")
    return "\n".join(out) + "\n"


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="warpgeo", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"warpgeo {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run a scene file")
    p_run.add_argument("scene")
    p_run.add_argument("-o", "--output", required=True, help="output directory")
    p_run.add_argument("--tol", type=float, help="tolerance of the main report")
    p_run.add_argument("--grid", type=int, help="lattice points per axis")
    p_run.add_argument("--step", type=float, help="integration or differencing step")
    sub.add_parser("catalog", help="print warps, profile tables and task schemas")
    args = parser.parse_args(argv)
    if args.command == "catalog":
        sys.stdout.write(list_catalog())
        return 0
    return run(args.scene, args.output, args.tol, args.grid, args.step)


if __name__ == "__main__":
    sys.exit(main())
