"""Command-line front end: ``toda <command> [options]``.

Exit codes:
  0  every requested check passed
  1  at least one check failed
  2  usage error (unknown command or flag, bad range)
  3  malformed initial state (wrong length or not numeric)
  4  output file could not be written
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import dynamics, hierarchy, reference, symmetry
from .errors import DomainError, SingularEvaluationError, TodaError
from .expr import parse
from .lattice import PhaseState, hamiltonian0, total_momentum

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_X0, EXIT_OUTPUT = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


class StateError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _n_range(text: str) -> list[int]:
    try:
        if ".." in text:
            a, b = text.split("..", 1)
            lo, hi = int(a), int(b)
        else:
            lo = hi = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected N or A..B, got {text!r}") from None
    if lo < 2 or hi < lo:
        raise argparse.ArgumentTypeError(f"need 2 <= A <= B, got {text!r}")
    return list(range(lo, hi + 1))


def _x0(text: str, n: int) -> np.ndarray:
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise StateError(f"x0 must be comma-separated numbers, got {text!r}") from None
    if len(vals) != 2 * n:
        raise StateError(f"x0 needs {2 * n} values for n={n}, got {len(vals)}")
    if not all(np.isfinite(vals)):
        raise StateError("x0 values must be finite")
    return np.array(vals)


# ---------------------------------------------------------------------------
# commands; each returns (report entries, payload) where payload is what gets
# written for --format json
# ---------------------------------------------------------------------------

def _residual_entry(relation, n, res, **extra):
    ok = res.is_zero()
    out = {"relation": relation, "n": n, "status": "pass" if ok else "fail", **extra}
    if not ok:
        out["residual"] = res.to_text()
    return out


_ETA1_PRINTED = {2: reference.ETA1_N2, 3: reference.ETA1_N3}


def cmd_verify_symmetries(args):
    entries = []
    for n in args.n:
        for k in range(1, 6):
            eta = symmetry.symmetry_field(k, n)
            entries.append(_residual_entry(f"master equation eta{k}", n, symmetry.master_residual(eta)))
        if n in _ETA1_PRINTED:
            diff = symmetry.symmetry_field(1, n) - reference.vector(_ETA1_PRINTED[n], n)
            entries.append(_residual_entry(f"eta1 printed form n={n}", n, diff))
    return entries


def cmd_algebra(args):
    entries = []
    for n in args.n:
        entries.extend(symmetry.commutator_table(n))
    return entries


def cmd_appendix_b(args):
    entries = []
    for n in args.n:
        s0 = hierarchy.base_level(n).sigma
        rep = hierarchy.inverse_symmetry_check(symmetry.symmetry_field(3, n), symmetry.symmetry_field(1, n), s0)
        entries.append(rep)
    return entries


_GOLDEN = {1: "eta1_level{}.json", 5: "eta5_level{}.json"}


def _golden_compare(level, doc) -> list[dict]:
    n = level.n
    out = []
    pairs = [("l", level.l, doc.get("l"), reference.one_form),
             ("sigma", level.sigma, doc.get("sigma"), reference.sigma),
             ("lambda", level.lambda_op, doc.get("lambda"), reference.matrix)]
    for key, have, want, build in pairs:
        if want is None:
            continue
        entry = {"relation": f"golden {key}({level.k})", "n": n}
        if have is None:
            entry.update(status="fail", residual="not computed")
        else:
            ref = build(want, n)
            ok = have == ref
            entry["status"] = "pass" if ok else "fail"
            if not ok:
                entry["residual"] = (have - ref).to_text()
        out.append(entry)
    if doc.get("H") is not None:
        ref = parse(doc["H"], n)
        ok = level.H is not None and level.H == ref
        entry = {"relation": f"golden H({level.k})", "n": n, "status": "pass" if ok else "fail"}
        if not ok:
            entry["residual"] = "not computed" if level.H is None else (level.H - ref).to_text()
        out.append(entry)
    return out


def cmd_hierarchy(args):
    n = args.n_single
    levels = hierarchy.upward(n, args.eta, args.levels)
    entries, dumps = [], []
    for lev in levels:
        dumps.append(hierarchy.level_to_json(lev))
        if lev.k > 0:
            entries.append({"relation": f"H({lev.k}) recovered", "n": n,
                            "status": "pass" if lev.H is not None else "fail",
                            **({"note": lev.notes["H"]} if "H" in lev.notes else {})})
        if lev.H is not None:
            res = hierarchy.equations_of_motion_residual(lev.sigma, lev.H)
            ok = all(v.is_zero() for v in res)
            entries.append({"relation": f"sigma({lev.k}) f + dH({lev.k}) = 0", "n": n,
                            "status": "pass" if ok else "fail"})
        pattern = _GOLDEN.get(args.eta)
        if n == 2 and pattern and (lev.k > 0 or args.eta == 1):
            path = reference.golden_dir() / pattern.format(lev.k)
            if path.exists():
                entries.extend(_golden_compare(lev, json.loads(path.read_text())))
    if args.down:
        if args.eta != 1 or len(levels) < 3:
            raise UsageError("--down needs --eta 1 and --levels >= 2")
        down, rep = hierarchy.downward_chain(levels[:3])
        entries.extend(rep)
        dumps.extend(hierarchy.level_to_json(lev) for lev in down)
        low = hierarchy.downward_level(levels[1].lambda_op, levels[0].sigma)
        dumps.append(hierarchy.level_to_json(low))
        res = hierarchy.equations_of_motion_residual(low.sigma, low.H)
        entries.append({"relation": "sigma'(-1) f + dH(-1) = 0", "n": n,
                        "status": "pass" if all(v.is_zero() for v in res) else "fail"})
        for key, val in low.notes.items():
            entries.append({"relation": f"l(-1) {key.replace('_', ' ')}", "n": n, "status": "info", "value": val})
    return entries, {"levels": dumps}


def _quantities(n):
    q = {"H0": hamiltonian0(n), "P": total_momentum(n)}
    if n == 2:
        levels = hierarchy.upward(2, 1, 3)
        for lev in levels[1:]:
            q[f"H{lev.k}"] = lev.H
        q["H-1"] = hierarchy.downward_level(levels[1].lambda_op, levels[0].sigma).H
    return q


def cmd_integrate(args):
    x0 = _x0(args.x0, args.n_single)
    tr = dynamics.integrate(args.n_single, PhaseState(x0), args.T, args.tol, args.method, args.h)
    return tr


def cmd_conserve(args):
    x0 = _x0(args.x0, args.n_single)
    tr = dynamics.integrate(args.n_single, PhaseState(x0), args.T, args.tol, args.method, args.h)
    drifts = dynamics.conservation_report(tr, _quantities(args.n_single))
    return [{"relation": f"drift {name} < {args.max_drift:g}", "n": args.n_single,
             "status": "pass" if d < args.max_drift else "fail", "value": d}
            for name, d in drifts.items()]


def cmd_isospectral(args):
    x0 = _x0(args.x0, args.n_single)
    tr = dynamics.integrate(args.n_single, PhaseState(x0), args.T, args.tol)
    lam = hierarchy.upward(args.n_single, 1, 1, recover=False)[1].lambda_op
    rep = dynamics.isospectral_drift(tr, lam, report=True)
    return [{"relation": f"Lambda(1) eigenvalue drift < {args.max_drift:g}", "n": args.n_single,
             "status": "pass" if rep["drift"] < args.max_drift else "fail", "value": rep["drift"],
             "skipped": rep["skipped"]}]


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------

def _render_text(entries) -> str:
    lines = []
    for e in entries:
        tag = e["status"].upper()
        extra = ""
        if "reading" in e:
            extra += f" [{e['reading']}]"
        if "holds" in e:
            extra += f" holds={e['holds']}"
        if "readings_holding" in e:
            extra += f" holding={e['readings_holding']}"
        if "value" in e:
            extra += f" value={e['value']}"
        lines.append(f"{tag:4} n={e['n']} {e['relation']}{extra}")
        if e["status"] == "fail" and "residual" in e:
            lines.append(f"     residual: {json.dumps(e['residual'])}")
    return "\n".join(lines) + "\n"


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    target = Path(out)
    d = target.parent if str(target.parent) else Path(".")
    fd, tmp = tempfile.mkstemp(dir=d, prefix=f".{target.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="toda", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, formats=("json", "text")):
        sp.add_argument("--format", choices=formats, default=formats[0])
        sp.add_argument("--out", help="write to this file (atomically) instead of stdout")

    def sweep(name, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--n", type=_n_range, default=[2], help="lattice size N or range A..B")
        common(sp)
        return sp

    sweep("verify-symmetries", "Master-equation check for all five fields")
    sweep("algebra", "commutator table report")
    sweep("appendix-b", "inverse-symmetry identity check")

    sp = sub.add_parser("hierarchy", help="build a hierarchy, compare with golden files, recover Hamiltonians")
    sp.add_argument("--n", dest="n_single", type=int, default=2)
    sp.add_argument("--eta", type=int, choices=range(1, 6), default=1)
    sp.add_argument("--levels", type=int, default=3)
    sp.add_argument("--down", action="store_true", help="also build the downward chain (eta 1 only)")
    common(sp)

    def numeric(name, help_, formats=("json", "text")):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--n", dest="n_single", type=int, default=2)
        sp.add_argument("--x0", required=True, help="comma-separated 2n initial values")
        sp.add_argument("--T", type=float, default=10.0)
        sp.add_argument("--tol", type=float, default=1e-10)
        common(sp, formats)
        return sp

    sp = numeric("integrate", "integrate the flow and write the trajectory", ("csv", "json"))
    sp.add_argument("--method", choices=("rk45", "rk4"), default="rk45")
    sp.add_argument("--h", type=float, default=None, help="rk4 step size")
    sp = numeric("conserve", "drift of conserved quantities along a trajectory")
    sp.add_argument("--method", choices=("rk45", "rk4"), default="rk45")
    sp.add_argument("--h", type=float, default=None)
    sp.add_argument("--max-drift", type=float, default=1e-6)
    sp = numeric("isospectral", "eigenvalue drift of the recursion operator")
    sp.add_argument("--max-drift", type=float, default=1e-6)
    return p


_COMMANDS = {
    "verify-symmetries": cmd_verify_symmetries,
    "algebra": cmd_algebra,
    "appendix-b": cmd_appendix_b,
    "hierarchy": cmd_hierarchy,
    "integrate": cmd_integrate,
    "conserve": cmd_conserve,
    "isospectral": cmd_isospectral,
}


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    n_single = getattr(args, "n_single", 2)
    if n_single < 2:
        print("toda: error: n must be at least 2", file=sys.stderr)
        return EXIT_USAGE
    if args.command == "hierarchy" and args.levels < 1:
        print("toda: error: --levels must be at least 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        result = _COMMANDS[args.command](args)
    except StateError as exc:
        print(f"toda: error: {exc}", file=sys.stderr)
        return EXIT_X0
    except UsageError as exc:
        print(f"toda: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (TodaError, SingularEvaluationError, ArithmeticError) as exc:
        print(f"toda: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL

    if args.command == "integrate":
        tr = result
        if args.format == "csv":
            text = dynamics.to_csv(tr)
        else:
            text = json.dumps({"n": tr.n, "method": tr.method, "meta": tr.meta, "t": tr.times.tolist(),
                               "x": tr.states.tolist()}, sort_keys=True) + "\n"
        status = EXIT_OK
    else:
        entries, payload = result if isinstance(result, tuple) else (result, {})
        failed = any(e["status"] == "fail" for e in entries)
        status = EXIT_FAIL if failed else EXIT_OK
        if args.format == "text":
            text = _render_text(entries)
        else:
            doc = {"command": args.command, "status": "fail" if failed else "pass", "report": entries, **payload}
            text = json.dumps(doc, indent=1, sort_keys=True) + "\n"
    try:
        _emit(text, args.out)
    except OSError as exc:
        print(f"toda: error: cannot write {args.out}: {exc}", file=sys.stderr)
        return EXIT_OUTPUT
    return status


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
