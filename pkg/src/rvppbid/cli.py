"""Command-line entry point: ``rvppbid {validate,bid,sequence,sweep,assess,compare}``.

Exit codes: 0 ok, 1 validation failure (or missing forecast), 2 parse or
usage error, 3 solver failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from contextlib import contextmanager
from pathlib import Path

from . import __version__
from .assessment import (
    CASES, GENERATORS, THREE_POINT, RecourseError, SweepError, case_scenarios, compare_models,
    out_of_sample_evaluate, parse_grid, sweep_budgets,
)
from .domain import (
    DAM_SRM, BudgetSet, CaseConfig, ConfigError, MissingForecastError, load_case, positive_deviation_count,
    validate_case,
)
from .formulation import MODES, PROPOSED, StarredResults
from .milp import export_mps
from .milp.backends import BACKEND_ENV
from .sequence import (
    BidSchedule, SequenceError, SessionSolveError, chain_sessions, fmt, load_schedule, run_session,
    update_starred,
)

EXIT_OK, EXIT_INVALID, EXIT_USAGE, EXIT_SOLVER = 0, 1, 2, 3


class Manifest:
    """Inputs and timings of one run, written next to its outputs."""

    def __init__(self, command: str, args: argparse.Namespace):
        opts = {k: v for k, v in vars(args).items() if k not in ("func", "command")}
        self.data = {"command": command, "config": str(args.config), "options": opts,
                     "seed": opts.get("seed"), "version": __version__,
                     "backend": args.backend or os.environ.get(BACKEND_ENV) or "reference", "stages": {}}

    @contextmanager
    def stage(self, name: str):
        t0 = time.perf_counter()
        try:
            yield
        finally:
            self.data["stages"][name] = round(time.perf_counter() - t0, 6)

    def write(self, out_dir: Path) -> Path:
        out_dir.mkdir(parents=True, exist_ok=True)
        path = out_dir / "manifest.json"
        path.write_text(json.dumps(self.data, indent=1, default=str) + "\n")
        return path


def _say(msg: str) -> None:
    print(msg, file=sys.stdout)


def _warn(msg: str) -> None:
    print(msg, file=sys.stderr)


def _write_csv(path: Path, rows) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        csv.writer(fh).writerows(rows)
    return path


def _write_json(path: Path, data) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, indent=1) + "\n")
    return path


def _load_valid(path: str, man: Manifest | None = None) -> CaseConfig | None:
    """Load and validate; print findings; None if there are blocking errors."""
    ctx = man.stage("load") if man else _nullstage()
    with ctx:
        cfg = load_case(path)
        rep = validate_case(cfg)
    for f in rep.findings:
        _warn(f"{f.level}: [{f.code}] {f.where + ': ' if f.where else ''}{f.message}")
    return rep.case if rep.ok else None


@contextmanager
def _nullstage():
    yield


def _budgets(cfg: CaseConfig, key: str, gamma_price, gamma_unit) -> BudgetSet:
    b = cfg.budgets_for(key)
    spec = cfg.session(key)
    price, unit = dict(b.price), dict(b.unit)
    if gamma_price is not None:
        n = spec.grid.n_window
        if not 0 <= gamma_price <= n:
            raise ConfigError(f"--gamma-price {gamma_price} outside [0, {n}]")
        price.update({s: float(gamma_price) for s in spec.streams})
    if gamma_unit is not None:
        for uid in cfg.unit_ids:
            cap = positive_deviation_count(cfg, uid, key)
            if gamma_unit > cap:
                _warn(f"warning: --gamma-unit {gamma_unit} clamped to {cap} for {uid}")
            unit[uid] = min(gamma_unit, cap)
    return BudgetSet(price, unit, dict(b.per_period))


def _starred_from(cfg: CaseConfig, sched: BidSchedule) -> StarredResults:
    starred = StarredResults(cfg.period_count)
    for e in sched.entries:
        idm = cfg.session(e.key).idm_index
        starred = update_starred(starred, e, 1.0, idm)
    return starred


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------
def cmd_validate(args) -> int:
    cfg = load_case(args.config)
    rep = validate_case(cfg)
    for f in rep.findings:
        _say(f"{f.level}: [{f.code}] {f.where + ': ' if f.where else ''}{f.message}")
    _say("valid" if rep.ok else f"invalid: {len(rep.errors)} error(s)")
    return EXIT_OK if rep.ok else EXIT_INVALID


def cmd_bid(args) -> int:
    man = Manifest("bid", args)
    cfg = _load_valid(args.config, man)
    if cfg is None:
        return EXIT_INVALID
    key = args.session
    cfg.session(key)
    budgets = _budgets(cfg, key, args.gamma_price, args.gamma_unit)
    starred = None
    if cfg.session(key).kind != DAM_SRM:
        if not args.starred:
            raise ConfigError(f"session {key} needs --starred with the earlier sessions' schedule")
        starred = _starred_from(cfg, load_schedule(args.starred, cfg.period_count))
    out = Path(args.out)
    with man.stage("solve"):
        entry, bundle = run_session(cfg, key, starred, args.mode, budgets, args.backend)
    sched = BidSchedule(cfg.name, args.mode, [entry])
    with man.stage("write"):
        sched.write(out, stem=f"bid_{key}")
        if args.export_mps:
            (out / f"{key}_{args.mode}.mps").write_text(export_mps(bundle.model))
    man.data["budgets"] = budgets.to_dict()
    man.write(out)
    _say(f"{key} {args.mode}: objective {fmt(entry.objective)} -> {out}")
    return EXIT_OK


def cmd_sequence(args) -> int:
    man = Manifest("sequence", args)
    cfg = _load_valid(args.config, man)
    if cfg is None:
        return EXIT_INVALID
    keys = args.sessions.split(",") if args.sessions else None
    if keys:
        for k in keys:
            cfg.session(k)
    with man.stage("solve"):
        sched = chain_sessions(cfg, args.mode, backend=args.backend, keys=keys)
    out = Path(args.out)
    with man.stage("write"):
        sched.write(out)
    man.write(out)
    for e in sched.entries:
        _say(f"{e.key}: objective {fmt(e.objective)}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    man = Manifest("sweep", args)
    grid = parse_grid(args.grid)
    cfg = _load_valid(args.config, man)
    if cfg is None:
        return EXIT_INVALID
    cases = CASES if args.which == "all" else (args.which,)
    out = Path(args.out)
    worst = EXIT_OK
    for which in cases:
        with man.stage(f"sweep_{which}"):
            res = sweep_budgets(cfg, grid, which, args.mode, backend=args.backend)
        res.write_csv(out / f"sweep_{which}.csv")
        sat = res.saturation()
        _say(f"{which}: {len(res.rows)} points, saturation at {fmt(sat) if sat is not None else 'none'}")
        if not res.monotone:
            _warn(f"error: {which} profit increases at budgets {res.violations}")
            worst = EXIT_SOLVER
    man.write(out)
    return worst


def _write_report(out: Path, stem: str, rep) -> None:
    full = rep.to_dict()
    _write_json(out / f"{stem}.json", _rounded(full))
    _write_csv(out / f"{stem}_scenarios.csv",
               [["scenario", "profit", "penalty"]] + [[str(w), fmt(p), fmt(k)] for w, p, k, _ in rep.rows()])
    for name, h in rep.histograms().items():
        rows = [["bin_lo", "bin_hi", "count"]]
        rows += [[fmt(a), fmt(b), str(int(c))] for a, b, c in zip(h.edges[:-1], h.edges[1:], h.counts)]
        _write_csv(out / f"{stem}_hist_{name}.csv", rows)


def _rounded(obj):
    if isinstance(obj, float):
        return float(fmt(obj))
    if isinstance(obj, dict):
        return {k: _rounded(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_rounded(v) for v in obj]
    return obj


def cmd_assess(args) -> int:
    man = Manifest("assess", args)
    cfg = _load_valid(args.config, man)
    if cfg is None:
        return EXIT_INVALID
    out = Path(args.out)
    if args.bids:
        entry = load_schedule(args.bids, cfg.period_count).entry(DAM_SRM)
    else:
        with man.stage("solve"):
            entry, _ = run_session(cfg, DAM_SRM, None, args.mode,
                                   _budgets(cfg, DAM_SRM, args.gamma_price, args.gamma_unit), args.backend)
        BidSchedule(cfg.name, args.mode, [entry]).write(out, stem="bids")
    with man.stage("scenarios"):
        scen = case_scenarios(cfg, args.n, args.generator, args.seed, shape=args.shape)
    with man.stage("evaluate"):
        rep = out_of_sample_evaluate(cfg, entry, scen, args.Z)
    _write_report(out, "assessment", rep)
    man.write(out)
    _say(f"profit_av {fmt(rep.profit_av)}  penalty_av {fmt(rep.penalty_av)}  net {fmt(rep.net)}")
    return EXIT_OK


def cmd_compare(args) -> int:
    man = Manifest("compare", args)
    cfg = _load_valid(args.config, man)
    if cfg is None:
        return EXIT_INVALID
    budgets = _budgets(cfg, DAM_SRM, args.gamma_price, args.gamma_unit)
    scen = case_scenarios(cfg, args.n, THREE_POINT, args.seed) if args.n else None
    grid = parse_grid(args.grid) if args.grid else None
    with man.stage("compare"):
        res = compare_models(cfg, budgets, scen, args.Z, curve_grid=grid, backend=args.backend)
    out = Path(args.out)
    _write_json(out / "comparison.json", res.to_dict())
    _write_csv(out / "comparison.csv", res.csv_rows())
    for m, c in res.curves.items():
        c.write_csv(out / f"curve_{m}.csv")
    man.write(out)
    _say(json.dumps(res.to_dict()["objective"]))
    return EXIT_OK


# ---------------------------------------------------------------------------
def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _nonneg_int(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be a nonnegative integer")
    return v


def _positive_float(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rvppbid", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, out=True):
        p.add_argument("config", help="case JSON file")
        p.add_argument("--backend", default=None, help=f"solver backend (default: ${BACKEND_ENV} or reference)")
        if out:
            p.add_argument("--out", default="out", help="output directory")

    def gammas(p):
        p.add_argument("--gamma-price", type=float, default=None, help="override every price budget")
        p.add_argument("--gamma-unit", type=_nonneg_int, default=None, help="override every unit budget")

    p = sub.add_parser("validate", help="check a case file")
    common(p, out=False)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("bid", help="solve one market session")
    common(p)
    gammas(p)
    p.add_argument("--session", default=DAM_SRM)
    p.add_argument("--mode", choices=MODES, default=PROPOSED)
    p.add_argument("--starred", default=None, help="schedule JSON of the earlier sessions")
    p.add_argument("--export-mps", action="store_true", help="also write the model as MPS")
    p.set_defaults(func=cmd_bid)

    p = sub.add_parser("sequence", help="solve the configured session chain")
    common(p)
    p.add_argument("--mode", choices=MODES, default=PROPOSED)
    p.add_argument("--sessions", default=None, help="comma-separated subset of session keys")
    p.set_defaults(func=cmd_sequence)

    p = sub.add_parser("sweep", help="profit against uncertainty budget")
    common(p)
    p.add_argument("--which", choices=(*CASES, "all"), default="all")
    p.add_argument("--grid", default="0:24:1", help='"lo:hi[:step]" or "a,b,c"')
    p.add_argument("--mode", choices=MODES, default=PROPOSED)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("assess", help="out-of-sample evaluation of day-ahead bids")
    common(p)
    gammas(p)
    p.add_argument("--bids", default=None, help="schedule JSON; solved with --mode when omitted")
    p.add_argument("--mode", choices=MODES, default=PROPOSED)
    p.add_argument("--n", type=_positive_int, default=100)
    p.add_argument("--generator", choices=GENERATORS, default=THREE_POINT)
    p.add_argument("--shape", type=_positive_float, default=2.0, help="Weibull shape")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--Z", type=_positive_float, default=1000.0, help="penalty, EUR/MWh")
    p.set_defaults(func=cmd_assess)

    p = sub.add_parser("compare", help="proposed model against the even-cut baseline")
    common(p)
    gammas(p)
    p.add_argument("--n", type=_nonneg_int, default=100, help="scenarios for the out-of-sample part (0 skips)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--Z", type=_positive_float, default=1000.0)
    p.add_argument("--grid", default=None, help="budget grid for profit curves")
    p.set_defaults(func=cmd_compare)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:  # --help/--version exit 0, bad usage exits 2
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (MissingForecastError, SequenceError) as exc:
        _warn(f"error: {exc}")
        return EXIT_INVALID
    except (SessionSolveError, SweepError, RecourseError) as exc:
        _warn(f"solver error: {exc}")
        return EXIT_SOLVER
    except (ConfigError, FileNotFoundError, ValueError, KeyError) as exc:
        _warn(f"error: {exc}")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
