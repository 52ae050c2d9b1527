"""Command line entry point: region, simulate, sweep, verify, bins.

Exit codes: 0 success, 1 verification or config failure, 2 usage error.
Nothing is written before the arguments and the config have been validated.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from . import config, emit, experiments, suites

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nudec", description="Rate regions and random-coding simulations "
                                "for non-unique and joint unique decoding.")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def common(sp, needs_config=True):
        sp.add_argument("--config", required=needs_config,
                        help="scenario JSON file or shipped scenario name")
        sp.add_argument("--out-dir", default="out", help="directory for output files (default: out)")
        sp.add_argument("--seed", type=int, help="override the config seed")
        sp.add_argument("--trials", type=int, help="override the config trial count")

    common(sub.add_parser("region", help="project both rate regions and compare them"))
    common(sub.add_parser("simulate", help="run trials and write per-decoder stats"))
    sw = sub.add_parser("sweep", help="vary one parameter over a list of values")
    common(sw)
    sw.add_argument("--param", required=True, choices=experiments.SWEEP_PARAMS)
    sw.add_argument("--values", required=True, type=float, nargs="+")
    v = sub.add_parser("verify", help="run invariant suites; exit 1 on any failure")
    common(v, needs_config=False)
    v.add_argument("--suite", default="all", choices=sorted(suites.SUITES) + ["all"])
    common(sub.add_parser("bins", help="bin-count statistics and concentration report"))
    sub.add_parser("scenarios", help="list shipped scenarios")
    return p


def _load(args) -> config.ScenarioConfig:
    cfg = config.load_config(config.scenario_path(args.config))
    return cfg.with_overrides(seed=args.seed, trials=args.trials)


def _write_json(path: Path, obj):
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, default=_jsonable) + "\n")


def _jsonable(o):
    if hasattr(o, "to_json"):
        return o.to_json()
    if hasattr(o, "tolist"):
        return o.tolist()
    raise TypeError(f"cannot serialize {type(o).__name__}")


def cmd_region(cfg, out: Path) -> int:
    if cfg.kind == "det-ic":
        rep = experiments.ic_bounds(cfg)
        out.mkdir(parents=True, exist_ok=True)
        _write_json(out / "ic_bounds.json", rep)
        print(json.dumps(rep.to_json(), indent=2))
        return EXIT_OK
    rep = experiments.region_report(cfg)
    hp, vx = experiments.region_rows(rep)
    out.mkdir(parents=True, exist_ok=True)
    emit.emit_csv(hp, out / "halfplanes.csv", emit.HALFPLANE_COLUMNS)
    emit.emit_csv(vx, out / "vertices.csv", emit.VERTEX_COLUMNS)
    _write_json(out / "comparison.json", {"profile": rep["profile"], "comparison": rep["comparison"]})
    print("nonunique:", suites.format_halfplanes(rep["nonunique"].halfplanes))
    for p in rep["jointunique"].parts:
        print(f"jointunique[{p.label}]:", suites.format_halfplanes(p.halfplanes))
    print("verdict:", rep["comparison"].verdict)
    return EXIT_OK


def cmd_simulate(cfg, out: Path) -> int:
    rows = experiments.simulate_rows(cfg)
    out.mkdir(parents=True, exist_ok=True)
    emit.emit_csv(rows, out / "stats.csv")
    sys.stdout.write(emit.csv_text(rows, emit.CSV_COLUMNS))
    return EXIT_OK


def cmd_sweep(cfg, out: Path, param: str, values) -> int:
    if param in ("n", "seed") and any(v != int(v) for v in values):
        raise ValueError(f"{param} values must be integers")
    values = [int(v) if param in ("n", "seed") else v for v in values]
    experiments.with_param(cfg, param, values[0])        # reject bad params before any work
    rows = experiments.sweep_rows(cfg, param, values)
    out.mkdir(parents=True, exist_ok=True)
    emit.emit_csv(rows, out / "sweep.csv", emit.SWEEP_COLUMNS)
    sys.stdout.write(emit.csv_text(rows, emit.SWEEP_COLUMNS))
    return EXIT_OK


def cmd_bins(cfg, out: Path) -> int:
    if cfg.kind != "neg-bc":
        raise ValueError("bins needs a neg-bc scenario")
    stats, rep = experiments.bins_report(cfg)
    out.mkdir(parents=True, exist_ok=True)
    emit.emit_csv(stats.rows(), out / "bins.csv", emit.BIN_COLUMNS)
    _write_json(out / "concentration.json", rep)
    print(json.dumps(rep.to_json(), indent=2))
    return EXIT_OK


def _suite_kwargs(name: str, cfg, trials):
    """Arguments for one suite when a config and/or trial count is supplied."""
    kw = {}
    if cfg is not None and cfg.kind == "neg-bc":
        if name in ("pointwise", "projection"):
            kw["profiles"] = [experiments.neg_profile(cfg)]
        if name == "concentration":
            kw["cfg"] = cfg
    if trials is not None and name in ("dichotomy", "decoders", "ic", "reproducibility"):
        kw["trials"] = trials
    if trials is not None and name == "decoder-implications":
        kw["total"] = trials
    return kw


def cmd_verify(args, out: Path) -> int:
    cfg = _load(args) if args.config else None
    names = sorted(suites.SUITES) if args.suite == "all" else [args.suite]
    if cfg is not None and args.suite == "decoder-implications":
        # implication laws on the given scenario alone
        st = experiments.run_stats(cfg, cfg.n[0])
        res = suites.SuiteResult("decoder-implications")
        bad = sum(st.violations().values())
        res.add("implications", bad == 0, f"{bad} violations over {st.trials} trials of {args.config}")
        results = [res]
    else:
        results = [suites.SUITES[n](**_suite_kwargs(n, cfg, args.trials)) for n in names]
    for r in results:
        for line in r.lines():
            print(line)
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / "verify.json", [r.to_json() for r in results])
    ok = all(r.passed for r in results)
    print("verify:", "PASS" if ok else "FAIL")
    return EXIT_OK if ok else EXIT_FAIL


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if isinstance(e.code, int) else EXIT_USAGE
    if args.command == "scenarios":
        for name in config.shipped_scenarios():
            print(name)
        return EXIT_OK
    if getattr(args, "trials", None) is not None and args.trials < 1:
        parser.print_usage(sys.stderr)
        print("nudec: error: --trials must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    out = Path(args.out_dir)
    try:
        if args.command == "verify":
            return cmd_verify(args, out)
        cfg = _load(args)
        if args.command == "region":
            return cmd_region(cfg, out)
        if args.command == "simulate":
            return cmd_simulate(cfg, out)
        if args.command == "sweep":
            return cmd_sweep(cfg, out, args.param, args.values)
        if args.command == "bins":
            return cmd_bins(cfg, out)
    except config.ConfigError as e:
        print("config error:", file=sys.stderr)
        for issue in e.issues:
            print(f"  {issue}", file=sys.stderr)
        return EXIT_FAIL
    except (FileNotFoundError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
