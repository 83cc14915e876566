"""Command-line front end: ``grcc-rtd solve|compare|sweep|validate``.

Each command writes ``report.json`` plus CSV tables into ``--out`` (or prints
the JSON report when ``--out`` is omitted).  CSV tables hold no timings or
timestamps, so identical inputs and seeds give byte-identical files; timings
go to separate ``*_timings.csv`` tables.

Exit codes: 0 success, 2 usage, 3 parse, 4 assembly, 5 solver,
6 certification (only with ``--require-certified``).
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import logging
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .dispatch import ambiguity_from
from .errors import GrccError, ParseError
from .lpformat import write_lp
from .pipeline import (CONE, FIXTURES, RLT, VARIANTS, Study, fixture_files, grow_wind_farms,
                       load_study, run, variant, with_config)
from .risk import FAMILIES, default_workers, estimate_risk, perturb_moments, sample_scenarios

log = logging.getLogger("grccrtd")

EXIT_OK, EXIT_USAGE = 0, 2
EXIT_CODES = {"parse": 3, "assembly": 4, "solver": 5, "certification": 6}
SIGMA_MODES = {"paper": "paper_literal", "full": "full_covariance"}
SWEEP_PARAMS = ("gamma1", "gamma2", "wind_farms")
NOMINAL, PERTURBED = "nominal", "perturbed"


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _csv(header, rows) -> str:
    buf = io.StringIO()
    out = csv.writer(buf, lineterminator="\n")
    out.writerow(header)
    for row in rows:
        out.writerow(["" if v is None else repr(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def _paths(args) -> tuple[Path, Path | None]:
    if args.fixture:
        return fixture_files(args.fixture)
    if not args.case:
        raise ParseError("one of --case or --fixture is required")
    return Path(args.case), Path(args.config) if args.config else None


def _study(args) -> tuple[Study, Path, Path | None]:
    case_path, config_path = _paths(args)
    for path in (case_path, config_path):
        if path is not None and not path.is_file():
            raise ParseError("no such file", source=str(path))
    overrides = {}
    if args.sigma_s_mode:
        overrides["sigma_s_mode"] = SIGMA_MODES[args.sigma_s_mode]
    return load_study(case_path, config_path, **overrides), case_path, config_path


def _manifest(args, case_path, config_path, backend: str, started: str) -> dict:
    options = {k: v for k, v in sorted(vars(args).items())
               if k != "func" and isinstance(v, (str, int, float, bool, list, type(None)))}
    return {
        "command": args.command, "case": str(case_path),
        "config": None if config_path is None else str(config_path),
        "seed": getattr(args, "seed", None), "backend": backend,
        "started": started, "finished": _now(), "version": __version__, "options": options,
    }


def _emit(args, report: dict, tables: dict[str, str]) -> None:
    text = json.dumps(report, indent=2, sort_keys=True, default=_jsonable)
    if not args.out:
        print(text)
        return
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(text + "\n")
    for name, body in tables.items():
        (out / name).write_text(body)
    print(f"wrote {out / 'report.json'} and {len(tables)} table(s)")


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(f"not serializable: {type(obj).__name__}")


def _backend_id(formulation: str, study: Study) -> str:
    return study.cfg.solver.lp_backend if formulation == RLT else CONE


def _dispatch_table(res) -> str:
    p, alpha = res.dispatch
    gens = res.study.case.generators
    return _csv(["gen", "bus", "p_pu", "alpha"],
                ([i, g.bus, float(pi), float(ai)] for i, (g, pi, ai) in enumerate(zip(gens, p, alpha))))


def _run_summary(res) -> dict:
    out = {
        "formulation": res.formulation, "backend": res.result.backend, "status": res.result.status,
        "message": res.result.message, "objective": res.objective, "timings": res.timings,
        "warnings": list(res.ann.warnings), "notes": list(res.result.notes),
    }
    if res.result.optimal:
        p, alpha = res.dispatch
        out.update(p=p, alpha=alpha, x_star=res.result.x_star, certification=res.certification.as_dict())
        if res.result.lifted is not None:
            out["rank1_gap"] = res.result.lifted.rank1_gap
    return out


# ---------------------------------------------------------------------------
# commands

def cmd_solve(args) -> int:
    started = _now()
    study, case_path, config_path = _study(args)
    res = run(study, args.formulation)
    if args.write_lp and res.lp is not None:
        Path(args.write_lp).write_text(write_lp(res.lp))
    report = {"manifest": _manifest(args, case_path, config_path, _backend_id(args.formulation, study), started)}
    report.update(_run_summary(res))
    tables = {"dispatch.csv": _dispatch_table(res)} if res.result.optimal else {}
    _emit(args, report, tables)
    if not res.result.optimal:
        print(f"error [solver]: {res.result.status} ({res.result.message})", file=sys.stderr)
        return EXIT_CODES["solver"]
    if args.require_certified and not res.certification.passed:
        print(f"error [certification]: max violation {res.certification.max_violation:.3e}", file=sys.stderr)
        return EXIT_CODES["certification"]
    return EXIT_OK


def cmd_compare(args) -> int:
    started = _now()
    study, case_path, config_path = _study(args)
    lp_res = run(study, RLT)
    cone_res = run(study, CONE)
    rows = []
    for res in (lp_res, cone_res):
        rows.append({"formulation": res.formulation, "status": res.result.status, "objective": res.objective,
                     "solve_time": res.timings["solve"], "total_time": sum(res.timings.values())})
    both = lp_res.result.optimal and cone_res.result.optimal
    z_lp, z_cone = lp_res.objective, cone_res.objective
    comparison = {
        "rows": rows,
        "gap": (z_cone - z_lp) / abs(z_cone) if both and z_cone else None,
        "ordering_holds": bool(z_lp <= z_cone + 1e-6) if both else None,
        "lp_certification": lp_res.certification.as_dict() if lp_res.certification else None,
        "rank1_gap": lp_res.result.lifted.rank1_gap if lp_res.result.lifted else None,
    }
    report = {"manifest": _manifest(args, case_path, config_path, f"{_backend_id(RLT, study)}+{CONE}", started),
              "comparison": comparison, "rlt": _run_summary(lp_res), "cone": _run_summary(cone_res)}
    tables = {
        "compare.csv": _csv(["formulation", "status", "objective"],
                            ([r["formulation"], r["status"], r["objective"]] for r in rows)),
        "compare_timings.csv": _csv(["formulation", "solve_time", "total_time"],
                                    ([r["formulation"], r["solve_time"], r["total_time"]] for r in rows)),
    }
    _emit(args, report, tables)
    if not both:
        return EXIT_CODES["solver"]
    if args.require_certified and not lp_res.certification.passed:
        return EXIT_CODES["certification"]
    return EXIT_OK


def parse_sweep(specs: list[str]) -> list[tuple[str, list[float]]]:
    """Parse ``name=v1,v2,...`` or ``name=a..b`` items into (name, values) pairs."""
    axes = []
    for spec in specs:
        name, sep, body = spec.partition("=")
        name = name.strip()
        if not sep or not body.strip():
            raise ValueError(f"sweep item {spec!r} must look like name=v1,v2 or name=a..b")
        if name not in SWEEP_PARAMS:
            raise ValueError(f"unknown sweep parameter {name!r}; choose from {', '.join(SWEEP_PARAMS)}")
        if ".." in body:
            lo, hi = (int(t) for t in body.split(".."))
            values = list(range(lo, hi + 1))
        else:
            values = [float(t) for t in body.split(",") if t.strip()]
        if name == "wind_farms":
            values = [int(v) for v in values]
        if not values:
            raise ValueError(f"sweep item {spec!r} has no values")
        axes.append((name, values))
    names = [n for n, _ in axes]
    if len(set(names)) != len(names):
        raise ValueError("each sweep parameter may appear once")
    return axes


def _sweep_point(study: Study, point: dict, formulation: str) -> dict:
    st = study
    if "wind_farms" in point:
        st = grow_wind_farms(st, point["wind_farms"])
    changes = {k: v for k, v in point.items() if k in ("gamma1", "gamma2")}
    if changes:
        st = with_config(st, **changes)
    t0 = time.perf_counter()
    try:
        res = run(st, formulation)
    except GrccError as exc:
        return {"point": point, "status": f"error: {exc}", "objective": None, "time": time.perf_counter() - t0}
    return {"point": point, "status": res.result.status, "objective": res.objective,
            "time": time.perf_counter() - t0, "solve_time": res.timings["solve"],
            "certified": res.certification.passed if res.certification else None}


def cmd_sweep(args) -> int:
    started = _now()
    try:
        axes = parse_sweep(args.sweep or [])
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if not axes:
        print("usage error: --sweep needs at least one item", file=sys.stderr)
        return EXIT_USAGE
    study, case_path, config_path = _study(args)
    names = [n for n, _ in axes]
    points = [dict(zip(names, combo)) for combo in itertools.product(*(v for _, v in axes))]
    workers = args.workers or default_workers()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda pt: _sweep_point(study, pt, args.formulation), points))
    else:
        results = [_sweep_point(study, pt, args.formulation) for pt in points]
    report = {"manifest": _manifest(args, case_path, config_path, _backend_id(args.formulation, study), started),
              "parameters": names, "points": results}
    tables = {
        "sweep.csv": _csv(names + ["status", "objective", "certified"],
                          ([r["point"][n] for n in names] + [r["status"], r["objective"], r.get("certified")]
                           for r in results)),
        "sweep_timings.csv": _csv(names + ["time", "solve_time"],
                                  ([r["point"][n] for n in names] + [r["time"], r.get("solve_time")]
                                   for r in results)),
    }
    _emit(args, report, tables)
    return EXIT_OK


def _load_solution(path: str, n: int) -> np.ndarray:
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read solution: {exc}", source=path) from None
    x = doc.get("x_star") if isinstance(doc, dict) else None
    if x is None:
        raise ParseError("solution file has no x_star (use the report.json of 'solve')", source=path)
    x = np.asarray(x, dtype=float)
    if x.size != n:
        raise ParseError(f"solution has {x.size} entries, the case needs {n}", source=path)
    return x


def cmd_validate(args) -> int:
    started = _now()
    study, case_path, config_path = _study(args)
    n = 2 * study.case.n_gen
    dispatches: dict[str, np.ndarray | str] = {}
    if args.solution:
        dispatches["solution"] = _load_solution(args.solution, n)
    else:
        for name in args.variants.split(","):
            name = name.strip()
            if name not in VARIANTS:
                print(f"usage error: unknown variant {name!r}; choose from {', '.join(VARIANTS)}", file=sys.stderr)
                return EXIT_USAGE
            res = run(variant(study, name), args.formulation)
            dispatches[name] = res.result.x_star if res.result.optimal else res.result.status

    amb = ambiguity_from(study.cfg)
    protocols = []
    if args.moments in (NOMINAL, "both"):
        protocols.append((NOMINAL, amb.mu0, amb.sigma0))
    if args.moments in (PERTURBED, "both"):
        mu, sigma = perturb_moments(amb, "random", args.seed)
        protocols.append((PERTURBED, mu, sigma))
    families = FAMILIES if args.family == "all" else (args.family,)

    grid, events = [], []
    for proto, mu, sigma in protocols:
        for fam in families:
            scen = sample_scenarios(fam, mu, sigma, args.samples, args.seed)
            for name, x in dispatches.items():
                if isinstance(x, str):
                    grid.append([proto, fam, name, x, None, None, None])
                    continue
                rep = estimate_risk(x, scen, study.case, study.sf, args.workers)
                grid.append([proto, fam, name, "optimal", rep.max_violation, rep.worst, rep.worst_std_error])
                events += [[proto, fam, name, lab, int(c), float(c) / rep.n_samples]
                           for lab, c in zip(rep.labels, rep.counts)]
    header = ["protocol", "family", "dispatch", "status", "max_violation", "worst_event", "std_error"]
    report = {
        "manifest": _manifest(args, case_path, config_path, _backend_id(args.formulation, study), started),
        "samples": args.samples,
        "moments": {p: {"mu": mu, "sigma": sigma} for p, mu, sigma in protocols},
        "grid": [dict(zip(header, row)) for row in grid],
    }
    tables = {
        "risk_grid.csv": _csv(header, grid),
        "risk_events.csv": _csv(["protocol", "family", "dispatch", "event", "violations", "probability"], events),
    }
    _emit(args, report, tables)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    src = common.add_argument_group("inputs")
    src.add_argument("--case", help="case file (MATPOWER .m or native YAML)")
    src.add_argument("--config", help="study configuration YAML")
    src.add_argument("--fixture", choices=FIXTURES, help="use a bundled case/config pair instead")
    common.add_argument("--sigma-s-mode", choices=sorted(SIGMA_MODES),
                        help="variance of the total wind error: full covariance sum or diagonal only")
    common.add_argument("--out", help="directory for report.json and CSV tables")
    common.add_argument("--workers", type=int, default=None,
                        help="worker threads (default: $GRCC_WORKERS or 1)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="grcc-rtd", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", parents=[common], help="solve one study")
    p.add_argument("--formulation", choices=(RLT, CONE), default=RLT)
    p.add_argument("--seed", type=int, default=None, help="recorded in the manifest")
    p.add_argument("--require-certified", action="store_true",
                   help="exit 6 when the dispatch violates a model row")
    p.add_argument("--write-lp", metavar="PATH", help="also write the lifted LP in CPLEX LP format")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("compare", parents=[common], help="solve with the lifted LP and the cone reference")
    p.add_argument("--seed", type=int, default=None, help="recorded in the manifest")
    p.add_argument("--require-certified", action="store_true")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("sweep", parents=[common], help="grid over gamma1, gamma2 or the wind farm count")
    p.add_argument("--sweep", action="append", metavar="NAME=VALUES",
                   help="e.g. gamma1=0,0.1,0.2 or wind_farms=3..15; repeat for a grid")
    p.add_argument("--formulation", choices=(RLT, CONE), default=RLT)
    p.add_argument("--seed", type=int, default=None, help="recorded in the manifest")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("validate", parents=[common], help="Monte Carlo violation frequencies")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--family", choices=FAMILIES + ("all",), default="all")
    p.add_argument("--moments", choices=(NOMINAL, PERTURBED, "both"), default="both",
                   help="sample at the configured moments, at perturbed moments inside the set, or both")
    p.add_argument("--solution", help="report.json from 'solve' to validate instead of solving variants")
    p.add_argument("--variants", default=",".join(VARIANTS), help="comma-separated model variants")
    p.add_argument("--formulation", choices=(RLT, CONE), default=RLT)
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "samples", 1) < 1:
        parser.error("--samples must be >= 1")
    try:
        return args.func(args)
    except GrccError as exc:
        print(f"error [{exc.category}]: {exc}", file=sys.stderr)
        return EXIT_CODES.get(exc.category, 1)


if __name__ == "__main__":
    sys.exit(main())
