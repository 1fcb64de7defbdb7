"""Command line interface: ``euler-elastica <command> ...``.

Exit codes: 0 success, 1 bad arguments or input, 2 unattainable target,
3 convergence failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import re
import sys
import tempfile
from pathlib import Path

from . import elliptic as el
from .cuttime import k0, p1, p11, t_bound
from .solver import (BoundaryProblem, ConvergenceError, SolveOptions,
                     SolveReport, solve)
from .strata import (CanonicalCoords, Config, Covector, Stratum,
                     UnattainableError, classify_domain, classify_target,
                     covector_from_canonical)

SCHEMA_VERSION = "1.0"
EXIT_OK, EXIT_ARGS, EXIT_UNATTAINABLE, EXIT_CONVERGENCE = 0, 1, 2, 3


_DEGREES = re.compile(r"^[-+0-9.e]+\s*(°|deg|degs|degree|degrees)$")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ---------------------------------------------------------------- parsing

def _number(tok: str, name: str) -> float:
    t = tok.strip().lower()
    if _DEGREES.match(t):
        raise UsageError(f"{name}: angles are in radians (got {tok!r}); "
                         f"convert degrees with x * pi / 180")
    try:
        v = float(t)
    except ValueError:
        raise UsageError(f"{name}: cannot parse {tok!r} as a number") from None
    if not math.isfinite(v):
        raise UsageError(f"{name}: value must be finite")
    return v


def parse_triple(text: str, name: str) -> tuple:
    parts = text.split(",")
    if len(parts) != 3:
        raise UsageError(f"{name}: expected three comma separated values x,y,theta")
    return tuple(_number(p, name) for p in parts)


def _k_multiple(tok: str, K: float, name: str) -> float:
    """Accept plain numbers or multiples of K such as 'K', '2K', '-0.5K'."""
    t = tok.strip()
    if t.upper().endswith("K"):
        m = t[:-1].strip()
        return (1.0 if m in ("", "+") else -1.0 if m == "-" else _number(m, name)) * K
    return _number(t, name)


def parse_coords(text: str) -> CanonicalCoords:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 4:
        raise UsageError("--lam: expected tau,p,k,stratum")
    k = _number(parts[2], "k")
    try:
        st = Stratum(parts[3])
        K = el.complete_K(k) if k < 1.0 else math.inf
        return CanonicalCoords(_k_multiple(parts[0], K, "tau"),
                               _k_multiple(parts[1], K, "p"), k, st)
    except (ValueError, el.DivergenceError) as exc:
        raise UsageError(f"--lam: {exc}") from None


def parse_lambda(text: str) -> Covector:
    """Covector from beta,c,r or from canonical tau,p,k,stratum."""
    parts = text.split(",")
    if len(parts) == 3:
        b, c, r = (_number(p, "lam") for p in parts)
        try:
            return Covector(b, c, r)
        except ValueError as exc:
            raise UsageError(f"--lam: {exc}") from None
    return covector_from_canonical(parse_coords(text))


# ---------------------------------------------------------------- output

def _fmt(v) -> str:
    if isinstance(v, bool) or v is None:
        return json.dumps(v)
    if isinstance(v, int):
        return str(v)
    v = float(v)
    if not math.isfinite(v):
        return json.dumps(str(v))
    t = format(v, ".17g")
    return t if any(ch in t for ch in ".en") else t + ".0"


def dumps(obj, indent: int = 0) -> str:
    """JSON with floats written to 17 significant digits."""
    pad = "  " * (indent + 1)
    end = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if all(not isinstance(v, (dict, list, tuple)) for v in obj):
            return "[" + ", ".join(dumps(v) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + dumps(v, indent + 1) for v in obj) + "\n" + end + "]"
    if isinstance(obj, str):
        return json.dumps(obj)
    return _fmt(obj)


def _candidate_record(c, length: float) -> dict:
    cc = c.coords
    return {
        "domain": c.domain.value,
        "stratum": c.stratum.value,
        "tau": cc.tau if cc else None,
        "p": cc.p if cc else None,
        "k": cc.k if cc else None,
        "beta": c.covector.beta,
        "c": c.covector.c,
        "r": c.covector.r,
        "residual": c.residual,
        "J": c.energy / length,
        "note": c.note,
    }


def report_record(rep: SolveReport) -> dict:
    bp = rep.problem
    L = bp.length
    idx = {id(c): i for i, c in enumerate(rep.candidates)}
    optima = [idx[id(o)] for o in rep.optima]
    polylines = []
    for i in optima:
        e = rep.candidates[i].elastica
        polylines.append({"candidate": i, "t": list(e.t), "x": list(e.x), "y": list(e.y),
                          "theta": list(e.theta), "c": list(e.c)})
    return {
        "schema_version": SCHEMA_VERSION,
        "problem": {"q0": list(bp.q0.as_tuple()), "q1": list(bp.q1.as_tuple()), "length": L},
        "target_class": rep.target_class.value,
        "tie": rep.tie,
        "candidates": [_candidate_record(c, L) for c in rep.candidates],
        "optima": optima,
        "polylines": polylines,
    }


def report_csv(rep: SolveReport) -> str:
    """One block per optimum, columns t,x,y,theta,c, blocks separated by a blank line."""
    blocks = []
    for o in rep.optima:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "x", "y", "theta", "c"])
        for row in o.elastica.samples:
            w.writerow([_fmt(v) for v in row])
        blocks.append(buf.getvalue())
    return "\n".join(blocks)


_COLORS = ("#1f4e9c", "#b8312f", "#2e8b57", "#8a4fbf", "#c77c11", "#4a4a4a")


def _glyph(x, y, th, size, color) -> str:
    """Arrow head marking the tangent direction at a point."""
    ux, uy = math.cos(th), math.sin(th)
    vx, vy = -uy, ux
    tip = (x + size * ux, y + size * uy)
    a = (x + 0.35 * size * vx, y + 0.35 * size * vy)
    b = (x - 0.35 * size * vx, y - 0.35 * size * vy)
    pts = " ".join(f"{px:.6f},{py:.6f}" for px, py in (a, tip, b))
    return f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="{size / 6:.6f}"/>'


def svg_document(curves, cx: float, cy: float, radius: float) -> str:
    """Curves (Elastica) in a square viewBox with the disk of given radius inscribed."""
    R = radius
    sw = R / 150.0
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="{cx - R:.6f} {-cy - R:.6f} '
        f'{2 * R:.6f} {2 * R:.6f}" width="512" height="512">',
        '<g transform="scale(1,-1)">',
        f'<circle cx="{cx:.6f}" cy="{cy:.6f}" r="{R:.6f}" fill="none" stroke="#bbbbbb" '
        f'stroke-width="{sw:.6f}"/>',
    ]
    for i, e in enumerate(curves):
        color = _COLORS[i % len(_COLORS)]
        pts = " ".join(f"{x:.6f},{y:.6f}" for x, y in zip(e.x, e.y))
        out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" '
                   f'stroke-width="{2 * sw:.6f}"/>')
        for j in (0, -1):
            out.append(_glyph(e.x[j], e.y[j], e.theta[j], 0.06 * R, color))
    out += ["</g>", "</svg>", ""]
    return "\n".join(out)


def report_svg(rep: SolveReport) -> str:
    q0 = rep.problem.q0
    return svg_document([o.elastica for o in rep.optima], q0.x, q0.y, rep.problem.length)


def _write(text: str, out: str | None, stdout) -> None:
    if out is None:
        stdout.write(text)
        return
    atomic_write(Path(out), text)


def atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ---------------------------------------------------------------- commands

def _solve_problem(q1, q0, length, samples) -> SolveReport:
    bp = BoundaryProblem(Config(*q0), Config(*q1), length)
    return solve(bp, SolveOptions(samples=samples))


def cmd_solve(args, stdout, stderr) -> int:
    q1 = parse_triple(args.q1, "--q1")
    q0 = parse_triple(args.q0, "--q0")
    if not args.length > 0:
        raise UsageError("--length must be positive")
    if args.samples < 2:
        raise UsageError("--samples must be at least 2")
    try:
        rep = _solve_problem(q1, q0, args.length, args.samples)
    except UnattainableError as exc:
        stderr.write(f"unattainable target: {exc}\n")
        return EXIT_UNATTAINABLE
    except ConvergenceError as exc:
        stderr.write(f"convergence failure: {exc}\n")
        return EXIT_CONVERGENCE
    if args.format == "json":
        text = dumps(report_record(rep)) + "\n"
    elif args.format == "csv":
        text = report_csv(rep)
    else:
        text = report_svg(rep)
    _write(text, args.out, stdout)
    return EXIT_OK


def cmd_classify(args, stdout, stderr) -> int:
    if (args.q is None) == (args.lam is None):
        raise UsageError("give exactly one of --q or --lam")
    if args.q is not None:
        q = Config(*parse_triple(args.q, "--q"))
        try:
            stdout.write(classify_target(q).value + "\n")
        except UnattainableError as exc:
            stderr.write(f"unattainable target: {exc}\n")
            return EXIT_UNATTAINABLE
        return EXIT_OK
    cc = parse_coords(args.lam)
    stdout.write(f"{cc.stratum.value} {classify_domain(cc).value}\n")
    return EXIT_OK


def cmd_cuttime(args, stdout, stderr) -> int:
    if (args.table is None) == (args.lam is None):
        raise UsageError("give exactly one of --table or --lam")
    if args.lam is not None:
        t = t_bound(parse_lambda(args.lam))
        stdout.write(("inf" if math.isinf(t) else _fmt(t)) + "\n")
        return EXIT_OK
    parts = args.table.split(",")
    if len(parts) != 3:
        raise UsageError("--table: expected k_min,k_max,n")
    lo, hi = _number(parts[0], "k_min"), _number(parts[1], "k_max")
    try:
        n = int(parts[2])
    except ValueError:
        raise UsageError("--table: n must be an integer") from None
    if not (0.0 < lo <= hi < 1.0) or n < 1:
        raise UsageError("--table: need 0 < k_min <= k_max < 1 and n >= 1")
    buf = io.StringIO()
    buf.write(f"# k0={_fmt(k0())}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["k", "p11", "p1", "2K"])
    for i in range(n):
        k = lo if n == 1 else lo + (hi - lo) * i / (n - 1)
        w.writerow([_fmt(k), _fmt(p11(k)), _fmt(p1(k)), _fmt(2.0 * el.complete_K(k))])
    _write(buf.getvalue(), args.out, stdout)
    return EXIT_OK


def read_targets(path: Path) -> list:
    rows = []
    with open(path, newline="") as fh:
        for line_no, row in enumerate(csv.reader(fh), 1):
            if not row or not "".join(row).strip() or row[0].lstrip().startswith("#"):
                continue
            if line_no == 1 and row[0].strip().lower() == "x":
                continue
            if len(row) != 3:
                raise UsageError(f"{path}:{line_no}: expected x,y,theta")
            rows.append(tuple(_number(v, f"{path}:{line_no}") for v in row))
    return rows


def cmd_sweep(args, stdout, stderr) -> int:
    path = Path(args.input)
    if not path.is_file():
        raise UsageError(f"--input: no such file {path}")
    rows = read_targets(path)
    if not rows:
        raise UsageError(f"--input: {path} contains no targets")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    summary = []
    curves = []
    for i, q1 in enumerate(rows):
        entry = {"row": i, "q1": list(q1)}
        try:
            rep = _solve_problem(q1, (0.0, 0.0, 0.0), 1.0, args.samples)
        except UnattainableError as exc:
            entry.update(status="unattainable", error=str(exc))
        except ConvergenceError as exc:
            entry.update(status="convergence failure", error=str(exc))
        else:
            name = f"row_{i:03d}.json"
            atomic_write(out / name, dumps(report_record(rep)) + "\n")
            entry.update(status="ok", record=name, target_class=rep.target_class.value,
                         n_optima=len(rep.optima), J=rep.optima[0].energy)
            curves.extend(o.elastica for o in rep.optima)
        summary.append(entry)
    n_ok = sum(e["status"] == "ok" for e in summary)
    atomic_write(out / "summary.json",
                 dumps({"schema_version": SCHEMA_VERSION, "rows": summary,
                        "succeeded": n_ok, "failed": len(rows) - n_ok}) + "\n")
    atomic_write(out / "family.svg", svg_document(curves, 0.0, 0.0, 1.0))
    stdout.write(f"{n_ok}/{len(rows)} rows solved, output in {out}\n")
    return EXIT_OK if n_ok else EXIT_CONVERGENCE


def cmd_selftest(args, stdout, stderr) -> int:
    from .acceptance import CHECKS, QUICK, run_all

    if args.checks:
        try:
            numbers = sorted({int(v) for v in args.checks.split(",")})
        except ValueError:
            raise UsageError("--checks: expected comma separated integers") from None
        if any(n not in CHECKS for n in numbers):
            raise UsageError(f"--checks: valid numbers are {sorted(CHECKS)}")
    else:
        numbers = list(QUICK) if args.quick else sorted(CHECKS)
    results = run_all(numbers)
    for r in results:
        stdout.write(r.line() + "\n")
    n_pass = sum(r.passed for r in results)
    stdout.write(f"{n_pass}/{len(results)} checks passed\n")
    return EXIT_OK if n_pass == len(results) else EXIT_ARGS


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="euler-elastica",
                description="Optimal planar elasticae between two oriented points.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("solve", help="solve a boundary value problem")
    s.add_argument("--q1", required=True, help="target x,y,theta (radians)")
    s.add_argument("--q0", default="0,0,0", help="start x,y,theta (default 0,0,0)")
    s.add_argument("--length", type=float, default=1.0, help="rod length (default 1)")
    s.add_argument("--samples", type=int, default=200, help="points per curve (default 200)")
    s.add_argument("--format", choices=("json", "csv", "svg"), default="json")
    s.add_argument("--out", help="output file (default stdout)")
    s.set_defaults(func=cmd_solve)

    c = sub.add_parser("classify", help="classify an endpoint or canonical coordinates")
    c.add_argument("--q", help="endpoint x,y,theta")
    c.add_argument("--lam", help="canonical tau,p,k,stratum (tau and p may be written as multiples of K, e.g. 2K)")
    c.set_defaults(func=cmd_classify)

    t = sub.add_parser("cut-time", help="cut time bound or root table")
    t.add_argument("--table", help="k_min,k_max,n")
    t.add_argument("--lam", help="covector beta,c,r or canonical tau,p,k,stratum")
    t.add_argument("--out", help="output file (default stdout)")
    t.set_defaults(func=cmd_cuttime)

    w = sub.add_parser("sweep", help="solve a file of targets")
    w.add_argument("--input", required=True, help="CSV with rows x,y,theta")
    w.add_argument("--out", required=True, help="output directory")
    w.add_argument("--samples", type=int, default=200)
    w.set_defaults(func=cmd_sweep)

    st = sub.add_parser("selftest", help="run the acceptance checks")
    st.add_argument("--quick", action="store_true", help="elliptic and symmetry checks only")
    st.add_argument("--checks", help="comma separated check numbers")
    st.set_defaults(func=cmd_selftest)
    return p


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        return args.func(args, stdout, stderr)
    except UsageError as exc:
        stderr.write(f"error: {exc}\n")
        return EXIT_ARGS


def entry_point() -> None:
    sys.exit(main())
