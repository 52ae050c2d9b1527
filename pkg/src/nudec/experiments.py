"""Experiment runners shared by the CLI and the verification suites.

Each returns plain rows or JSON-ready dicts; writing files is left to the
caller so the same results can be compared byte for byte.
"""

from __future__ import annotations

from dataclasses import replace

from . import detic, negcodec, prob, region
from .config import ScenarioConfig
from .region import RateTuple

RATE_PARAMS = ("R0", "S0", "S1", "S2", "S3", "T2", "T3")
IC_RATE_PARAMS = ("R1", "R2", "R3")
SWEEP_PARAMS = ("n", "eps", "seed") + RATE_PARAMS + IC_RATE_PARAMS


def run_stats(cfg: ScenarioConfig, n: int):
    if cfg.kind == "neg-bc":
        return negcodec.run_trials(cfg.neg_config(n), cfg.trials, cfg.fresh_codebook_every, cfg.receivers)
    return detic.ic_run_trials(cfg.ic_config(n), cfg.trials, cfg.fresh_codebook_every)


def simulate_rows(cfg: ScenarioConfig) -> list[dict]:
    rows = []
    for n in cfg.n:
        rows += run_stats(cfg, n).rows()
    return rows


def with_param(cfg: ScenarioConfig, param: str, value: float) -> ScenarioConfig:
    if param == "n":
        return replace(cfg, n=(int(value),))
    if param == "eps":
        return replace(cfg, eps=float(value))
    if param == "seed":
        return replace(cfg, seed=int(value))
    if cfg.kind == "neg-bc" and param in RATE_PARAMS:
        return replace(cfg, rates=replace(cfg.rates, **{param: float(value)}))
    if cfg.kind == "det-ic" and param in IC_RATE_PARAMS:
        r = list(cfg.rates)
        r[IC_RATE_PARAMS.index(param)] = float(value)
        return replace(cfg, rates=tuple(r))
    raise ValueError(f"cannot sweep {param!r} for a {cfg.kind} scenario")


def sweep_rows(cfg: ScenarioConfig, param: str, values) -> list[dict]:
    rows = []
    for v in values:
        for r in simulate_rows(with_param(cfg, param, v)):
            rows.append({"param": param, "value": v, **r})
    return rows


def neg_profile(cfg: ScenarioConfig) -> region.MIProfile:
    return region.mi_profile(prob.chain_compose(cfg.source, cfg.channel))


def region_report(cfg: ScenarioConfig) -> dict:
    """Non-unique and joint-unique (R0, R1) regions and their comparison."""
    mi = neg_profile(cfg)
    opts = cfg.region
    nonunique = region.project_region(region.build_nonunique_system(mi))
    joint = region.region_union(region.build_jointunique_systems(mi, opts["keep_sat_sum"]))
    cmp = region.compare_regions(nonunique, joint, opts["tol"], opts["grid"])
    return {"profile": mi, "nonunique": nonunique, "jointunique": joint, "comparison": cmp}


def region_rows(report: dict) -> tuple[list[dict], list[dict]]:
    hp, vx = [], []
    parts = [("nonunique", "all", report["nonunique"])]
    parts += [("jointunique", p.label, p) for p in report["jointunique"].parts]
    for name, label, p in parts:
        for a, b, c in p.halfplanes:
            hp.append({"region": name, "part": label, "a": a, "b": b, "c": float(c)})
        for i, (r0, r1) in enumerate(p.vertices()):
            vx.append({"region": name, "part": label, "index": i, "R0": float(r0), "R1": float(r1)})
    return hp, vx


def bins_report(cfg: ScenarioConfig, n: int | None = None):
    ncfg = cfg.neg_config(n or cfg.n[0])
    stats = negcodec.bin_statistics(ncfg, cfg.bins["draws"], cfg.bins["delta"])
    return stats, negcodec.concentration_check(stats)


def ic_bounds(cfg: ScenarioConfig) -> detic.ICBoundReport:
    return detic.ic_bound_exponents(cfg.spec, cfg.dists, cfg.rates)
