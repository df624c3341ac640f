"""Command-line front end: verification suites, mapping pipelines, pushforwards."""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
import zlib
from concurrent.futures import ProcessPoolExecutor
from typing import Sequence

import numpy as np
import sympy as sp

from . import __version__

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
SUITE_PREFIX = {"table1": "T1", "table2": "T2", "thm-p": "Thm-P", "thm-kf": "Thm-KF",
                "thm-kf-mapped": "Thm-KF-mapped"}


class UsageError(Exception):
    pass


def _rng(seed: int, case_id: str) -> np.random.Generator:
    # one stream per id, so results do not depend on order or --jobs
    return np.random.default_rng([seed, zlib.crc32(case_id.encode())])


def _rounded(r: float):
    if r is None or math.isnan(r):
        return None
    return float(f"{r:.3e}")


def _echo(argv: Sequence[str]) -> list[str]:
    """The command line without --out, which would break report comparisons."""
    out, skip = [], False
    for a in argv:
        if skip:
            skip = False
            continue
        if a == "--out":
            skip = True
            continue
        if a.startswith("--out="):
            continue
        out.append(a)
    return out


def _param_overrides(args) -> dict:
    out = {}
    for key in ("mu", "kappa", "eps", "epsb"):
        vals = getattr(args, key, None)
        if vals:
            out[key] = tuple(int(v) if key in ("eps", "epsb") else v for v in vals)
    return out


def _resolve_ids(target: str, case: list[str] | None) -> list[str]:
    from .catalog import registry, suite_ids

    try:
        ids = suite_ids(target)
    except KeyError as err:
        raise UsageError(str(err)) from None
    if not case:
        return ids
    reg = registry()
    chosen = []
    for c in case:
        cands = [c]
        if target in SUITE_PREFIX:
            cands.append(f"{SUITE_PREFIX[target]}.case{c.removeprefix('case')}")
        hit = next((k for k in cands if k in reg and k in ids), None)
        if hit is None:
            raise UsageError(f"case {c!r} is not part of {target}")
        chosen.append(hit)
    return chosen


def _run_one(job: tuple) -> dict:
    from .catalog import verify_case

    case_id, params, tol, trials, seed = job
    t0 = time.perf_counter()
    try:
        rep = verify_case(case_id, params, tol, trials, _rng(seed, case_id))
        entry = {"id": case_id, "citation": rep.citation, "status": "pass" if rep.passed else "fail",
                 "max_residual": _rounded(rep.max_residual), "samples": rep.samples}
        failures = [f"{f.name}: {'; '.join(f.details) or f'residual {f.max_residual:.3e}'}"
                    for f in rep.failures()[:5]]
    except Exception as err:  # a crashing case is a failed case
        from .catalog import registry

        entry = {"id": case_id, "citation": registry().get(case_id, ""), "status": "fail",
                 "max_residual": None, "samples": 0}
        failures = [f"{type(err).__name__}: {err}"]
    if failures and entry["status"] == "fail":
        entry["failures"] = failures
    return {"entry": entry, "seconds": round(time.perf_counter() - t0, 3)}


def cmd_verify(args, argv) -> int:
    ids = _resolve_ids(args.target, args.case)
    params = _param_overrides(args)
    jobs = [(cid, params, args.tol, args.trials, args.seed) for cid in ids]
    started = time.time()
    if args.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_run_one, jobs))
    else:
        results = []
        for j in jobs:
            results.append(_run_one(j))
            if not args.quiet:
                r = results[-1]
                print(f"{r['entry']['status'].upper():4s} {r['entry']['id']:26s} "
                      f"{r['seconds']:7.2f}s", file=sys.stderr)
    entries = [r["entry"] for r in results]
    ok = all(e["status"] == "pass" for e in entries)
    report = {
        "version": 1,
        "tool": __version__,
        "seed": args.seed,
        "command": _echo(argv),
        "entries": entries,
        "pass": ok,
        # wall-clock data lives here and is outside the determinism contract
        "timestamp": {"started": round(started, 3),
                      "seconds": {r["entry"]["id"]: r["seconds"] for r in results}},
    }
    _write(report, args.out)
    n_fail = sum(e["status"] != "pass" for e in entries)
    print(f"{args.target}: {len(entries) - n_fail}/{len(entries)} passed (seed {args.seed})",
          file=sys.stderr)
    for e in entries:
        for f in e.get("failures", []):
            print(f"  {e['id']}: {f}", file=sys.stderr)
    return EXIT_PASS if ok else EXIT_FAIL


def _write(report: dict, path: str | None) -> None:
    text = json.dumps(report, indent=2, sort_keys=False) + "\n"
    if path and path != "-":
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# -- map ---------------------------------------------------------------------------

def _match_row(C: sp.Expr, kappa: float, e: int, params: dict) -> str | None:
    """Table 2 row whose potential is C, with kappa compatible with the row."""
    from .mapping import TABLE2_KAPPA, TABLE2_POTENTIALS

    bind = {sp.Symbol(k, real=True): v for k, v in {**params, "eps": e}.items()}
    for row, pot in TABLE2_POTENTIALS.items():
        if row == "0" or pot.has(sp.Symbol("mu", real=True)) and "mu" not in params:
            continue
        if sp.simplify(C - pot.subs(bind)) != 0:
            continue
        if row in ("1", "1'", "1''"):
            return {0: "1", 1: "1'", -1: "1''"}.get(kappa, "1")
        if row not in TABLE2_KAPPA or TABLE2_KAPPA[row] == kappa:
            return row
    return None


def _drift_spec(args):
    from .expr import parse
    from .mapping import DriftSpec

    if args.spec:
        with open(args.spec) as fh:
            data = json.load(fh)
        spec = DriftSpec.from_json(data)
        return spec, data.get("class", "K" if spec.epsb == 1 else "F"), spec.interval
    if args.C is None or args.lam is None:
        raise UsageError("map needs --C and --lam, or --spec FILE")
    e = int(args.eps[0]) if args.eps else 1
    klass = args.klass or "K"
    eb = 1 if klass == "K" else -1
    params = {"mu": float(args.mu[0])} if args.mu else {}
    C = parse(args.C)
    interval = tuple(args.interval)
    if args.W:
        return DriftSpec(C, float(args.lam), e, eb, parse(args.W), interval=interval,
                         params=params), klass, interval
    x0 = args.x0
    if x0 is None:
        # initial data at the origin when C is regular there
        bind = {sp.Symbol(k, real=True): v for k, v in {**params, "x": 0.0}.items()}
        c0 = C.subs(bind)
        x0 = 0.0 if c0.is_finite else interval[0]
    span = (min(interval[0], x0), max(interval[1], x0))
    return DriftSpec(C, float(args.lam), e, eb, None, x0, args.W0, args.W0p, span,
                     params), klass, interval


def cmd_map(args, argv) -> int:
    from .expr import DomainSampler, evaluate, x
    from .jet import DT, UDU
    from .mapping import DriftOracle, VanishingError, drift_equation, mapped_symmetries
    from .symmetry import is_lie_symmetry

    spec, klass, wanted = _drift_spec(args)
    if klass not in ("K", "F"):
        raise UsageError("--class must be K or F")
    e, eb = spec.eps, spec.epsb
    kappa = e * float(spec.lam)
    fixed = {"eps": e, "epsb": eb, "kappa": kappa, **spec.params}
    sub = {sp.Symbol(k, real=True): v for k, v in spec.params.items()}
    C = spec.C.subs(sub)
    rng = np.random.default_rng([args.seed, zlib.crc32(b"map")])
    try:
        if spec.W is None:
            W = spec.solve()
            # widest nonvanishing piece inside the requested interval, trimmed off the zeros
            cuts = [(max(a, wanted[0]), min(b, wanted[1])) for a, b in W.subintervals]
            a, b = max(cuts, key=lambda ab: ab[1] - ab[0])
            if b <= a:
                raise VanishingError("W has no nonvanishing piece in the interval")
            pad = 0.05 * (b - a) if len(W.subintervals) > 1 else 0.0
            lo = a + (pad if a > wanted[0] else 0.0)
            hi = b - (pad if b < wanted[1] else 0.0)
            drift = DriftOracle(W, e, eb)
            B_at = lambda xv, k=0: drift(xv, k)
            oracles, B = {"B": drift.oracle()}, None
            pieces = [list(p) for p in cuts if p[1] > p[0]]
        else:
            B = spec.drift().subs(sub)
            lo, hi = spec.interval
            B_at = lambda xv, k=0: np.asarray(evaluate(sp.diff(B, x, k), {"x": xv}), dtype=float) \
                + 0 * xv
            oracles, pieces = None, [[lo, hi]]
    except VanishingError as err:
        print(f"map: {err}", file=sys.stderr)
        _write({"version": 1, "seed": args.seed, "command": _echo(argv), "pass": False,
                "error": str(err)}, args.out)
        return EXIT_FAIL
    grid = np.linspace(lo, hi, args.points)
    Bv = B_at(grid)
    # Riccati identity of the drift against its potential
    bv = sp.Symbol("Bv")
    rhs = sp.lambdify((x, bv), -2 * eb * (C + spec.lam) - e * eb * bv**2 / 2, "numpy")
    # central differences keep this independent of how B_x is produced
    h = 1e-5 * (hi - lo)
    inner = grid[1:-1]
    Bx = (B_at(inner + h) - B_at(inner - h)) / (2 * h)
    ric = float(np.max(np.abs(Bx - rhs(inner, B_at(inner))) / (1 + np.abs(Bx))))
    row = _match_row(C, kappa, e, dict(spec.params))
    fields = [("Pt", DT), ("I", UDU)]
    if row is not None:
        fields += [(f"X{i + 1}", v) for i, v in enumerate(mapped_symmetries(row, B, kappa, e))]
    eq = drift_equation(B, e, eb)
    dom = DomainSampler({"t": (0.2, 1.5), "x": (lo, hi)}, fixed)
    sym = []
    for name, v in fields:
        r = is_lie_symmetry(eq, v, args.tol, args.trials, rng, oracles=oracles, sampler=dom,
                            field_id=name)
        sym.append({"field": name, "status": "pass" if r.passed else "fail",
                    "max_residual": _rounded(r.max_residual)})
    ok = ric < args.tol and all(s["status"] == "pass" for s in sym)
    report = {
        "version": 1, "seed": args.seed, "command": _echo(argv), "class": klass,
        "eps": e, "epsb": eb, "lam": float(spec.lam), "kappa": kappa,
        "table2_row": row, "interval": [float(lo), float(hi)], "nonvanishing": pieces,
        "B": [{"x": round(float(a), 12), "B": float(f"{b:.12e}")} for a, b in zip(grid, Bv)],
        "riccati_residual": _rounded(ric), "symmetries": sym, "pass": ok,
    }
    _write(report, args.out)
    print(f"map: class {klass}, row {row or '-'}, Riccati residual {ric:.2e}, "
          f"{sum(s['status'] == 'pass' for s in sym)}/{len(sym)} fields pass", file=sys.stderr)
    return EXIT_PASS if ok else EXIT_FAIL


# -- push --------------------------------------------------------------------------

def cmd_push(args, argv) -> int:
    from .equations import LinearEvolutionEquation
    from .transforms import NoClosedFormInverse, PointTransformation, pushforward_equation

    try:
        with open(args.transform) as fh:
            phi = PointTransformation.from_json(json.load(fh))
        with open(args.equation) as fh:
            eq = LinearEvolutionEquation.from_json(json.load(fh))
    except (OSError, ValueError) as err:
        raise UsageError(str(err)) from None
    try:
        out = pushforward_equation(phi, eq, args.form, numeric=args.numeric, simplify_result=True)
    except NoClosedFormInverse as err:
        print(f"push: {err}; rerun with --numeric", file=sys.stderr)
        return EXIT_FAIL
    if hasattr(out, "to_json"):
        result = out.to_json()
    else:
        # numeric target: tabulate on the image of a grid
        tt, xx = np.meshgrid(np.linspace(*eq.domain.intervals.get("t", (0.2, 1.5)), 5),
                             np.linspace(*eq.domain.intervals.get("x", (0.5, 2.0)), 5))
        T, X, _ = phi(tt.ravel(), xx.ravel())
        T = np.broadcast_to(T, X.shape)
        result = {"form": out.form.value, "numeric": True, "samples": [
            {"t": float(a), "x": float(b), **{k: float(getattr(out, k)(a, b)) for k in "ABCD"}}
            for a, b in zip(T, X)]}
    _write(result, args.out)
    return EXIT_PASS


# -- list --------------------------------------------------------------------------

def cmd_list(args, argv) -> int:
    from .catalog import list_cases

    rows = list_cases(args.filter)
    if args.json:
        _write({"cases": [{"id": i, "citation": c} for i, c in rows]}, args.out)
    else:
        for i, c in rows:
            print(f"{i:26s} {c}")
    return EXIT_PASS


# -- parser ------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="lieclass", description=__doc__)
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    common = _Parser(add_help=False)
    common.add_argument("--out", help="report path (default: stdout)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--tol", type=float, default=None)
    common.add_argument("--trials", type=int, default=200)
    common.add_argument("--mu", type=float, action="append")
    common.add_argument("--kappa", type=float, action="append")
    common.add_argument("--eps", type=int, action="append", choices=(-1, 1))
    common.add_argument("--epsb", type=int, action="append", choices=(-1, 1))

    v = sub.add_parser("verify", parents=[common], help="run a verification suite")
    v.add_argument("target", choices=["table1", "table2", "thm-p", "thm-kf", "thm-kf-mapped",
                                      "groupoid", "invariant", "all"])
    v.add_argument("--case", action="append", help="case id or row label; repeatable")
    v.add_argument("--jobs", type=int, default=1)
    v.add_argument("--quiet", action="store_true")
    v.set_defaults(func=cmd_verify)

    m = sub.add_parser("map", parents=[common], help="drift from a potential via W")
    m.add_argument("--C", help="potential, e.g. 'mu/x^2'")
    m.add_argument("--lam", type=float)
    m.add_argument("--class", dest="klass", choices=("K", "F"))
    m.add_argument("--W", help="closed-form W instead of integrating its ODE")
    m.add_argument("--x0", type=float, help="initial point (default 0 if C is regular there)")
    m.add_argument("--W0", type=float, default=1.0)
    m.add_argument("--W0p", type=float, default=0.0)
    m.add_argument("--interval", type=float, nargs=2, default=(0.5, 2.0))
    m.add_argument("--points", type=int, default=21)
    m.add_argument("--spec", help="JSON drift spec file")
    m.set_defaults(func=cmd_map, tol=None)

    s = sub.add_parser("push", help="push an equation forward along a transformation")
    s.add_argument("transform")
    s.add_argument("equation")
    s.add_argument("--form", choices=("standard", "divergence"))
    s.add_argument("--numeric", action="store_true")
    s.add_argument("--out")
    s.set_defaults(func=cmd_push)

    ls = sub.add_parser("list", help="list case ids and citations")
    ls.add_argument("filter", nargs="?")
    ls.add_argument("--json", action="store_true")
    ls.add_argument("--out")
    ls.set_defaults(func=cmd_list)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
        if getattr(args, "func", None) is cmd_map and args.tol is None:
            args.tol = 1e-6
        return args.func(args, argv)
    except UsageError as err:
        print(f"lieclass: {err}", file=sys.stderr)
        return EXIT_USAGE
    except json.JSONDecodeError as err:
        print(f"lieclass: malformed JSON: {err}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
