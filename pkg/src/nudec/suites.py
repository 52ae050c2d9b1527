"""Invariant and acceptance suites, shared by `nudec verify` and the tests.

Every suite returns a SuiteResult holding named checks. Default arguments
are the acceptance-scale parameters; tests and the CLI may shrink them.
"""

from __future__ import annotations

import contextlib
import io
import math
import tempfile
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import config, detic, experiments, fme, prob, region
from .region import RateTuple


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""
    data: dict = field(default_factory=dict)


@dataclass
class SuiteResult:
    suite: str
    checks: list[Check] = field(default_factory=list)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name: str, passed: bool, detail: str = "", **data) -> Check:
        c = Check(name, bool(passed), detail, data)
        self.checks.append(c)
        return c

    def check(self, name: str) -> Check:
        return next(c for c in self.checks if c.name == name)

    def lines(self) -> list[str]:
        return [f"{'PASS' if c.passed else 'FAIL'} {self.suite}/{c.name}: {c.detail}" for c in self.checks]

    def to_json(self) -> dict:
        return {"suite": self.suite, "passed": self.passed, "seconds": round(self.seconds, 3),
                "checks": [{"name": c.name, "passed": c.passed, "detail": c.detail} for c in self.checks]}


def _timed(fn):
    def wrapper(*a, **kw):
        t = time.perf_counter()
        res = fn(*a, **kw)
        res.seconds = time.perf_counter() - t
        return res
    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


def load(name: str) -> config.ScenarioConfig:
    return config.load_config(config.scenario_path(name))


def _two_sigma(e1: float, n1: int, e2: float, n2: int) -> float:
    return 2 * math.sqrt(e1 * (1 - e1) / n1 + e2 * (1 - e2) / n2)


# ------------------------------------------------------------------ information measures

@_timed
def info_suite(joints: int = 200, max_alpha: int = 3, seed: int = 1) -> SuiteResult:
    """Chain rule and nonnegativity on random 7-variable joints (raw, unclamped values)."""
    res = SuiteResult("info")
    rng = np.random.default_rng(seed)
    worst_chain, worst_neg = 0.0, math.inf
    mi, cmi = prob.mutual_information, prob.conditional_mutual_information
    for _ in range(joints):
        dims = tuple(int(d) for d in rng.integers(1, max_alpha + 1, size=4))
        src = prob.random_joint(rng, dims)
        ch = prob.random_channel(rng, dims[3], tuple(int(d) for d in rng.integers(1, max_alpha + 1, size=3)))
        j = prob.chain_compose(src, ch)
        U, V2, V3, X, Y1, Y2, Y3 = range(7)
        vals = [cmi(j, [X], [Y1], [U, V2, V3]), cmi(j, [X], [Y1], [U, V3]), cmi(j, [X], [Y1], [U, V2]),
                cmi(j, [X], [Y1], [U]), mi(j, [X], [Y1]), cmi(j, [V2], [V3], [U])]
        for sat, y in ((V2, Y2), (V3, Y3)):
            joint_, cloud, cond = mi(j, [U, sat], [y]), mi(j, [U], [y]), cmi(j, [sat], [y], [U])
            worst_chain = max(worst_chain, abs(joint_ - cloud - cond))
            vals += [joint_, cloud, cond]
        worst_neg = min(worst_neg, min(vals), prob.entropy(j))
    res.add("chain_rule", worst_chain <= 1e-9, f"max residual {worst_chain:.3g} over {joints} joints (limit 1e-9)",
            worst=worst_chain)
    res.add("nonnegative", worst_neg >= -1e-12, f"min measure {worst_neg:.3g} (limit -1e-12)", worst=worst_neg)
    return res


# ------------------------------------------------------------------ elimination oracle

def random_system(rng: np.random.Generator, max_vars: int = 6, max_rows: int = 12) -> fme.ConstraintSystem:
    d = int(rng.integers(2, max_vars + 1))
    m = int(rng.integers(2, max_rows + 1))
    rows = []
    for i in range(m):
        coeffs = rng.integers(-2, 3, size=d)
        while not coeffs.any():
            coeffs = rng.integers(-2, 3, size=d)
        rel = "<=" if rng.random() < 0.5 else ">="
        rows.append(fme.LinearConstraint(tuple(coeffs), rel, float(rng.uniform(-2, 2)), f"c{i}"))
    return fme.ConstraintSystem(tuple(f"x{i}" for i in range(d)), tuple(rows))


@_timed
def fme_suite(systems: int = 100, points: int = 1000, tol: float = 1e-9, seed: int = 2) -> SuiteResult:
    """Eliminated-system membership against the one-variable interval oracle."""
    res = SuiteResult("fme")
    rng = np.random.default_rng(seed)
    bad, inside = 0, 0
    for _ in range(systems):
        sys = random_system(rng)
        j = int(rng.integers(len(sys.variables)))
        elim = fme.eliminate(sys, j)
        X = rng.uniform(-3, 3, size=(points, len(sys.variables)))
        if len(elim):
            rows = [c.as_le() for c in elim.constraints]
            A = np.array([r.coeffs for r in rows], dtype=float)
            b = np.array([r.rhs for r in rows])
            member = (X @ A.T <= b + tol).all(axis=1)
        else:
            member = np.ones(points, dtype=bool)
        oracle = np.array([fme.interval_exists(sys, j, x) <= tol for x in X])
        bad += int((member != oracle).sum())
        inside += int(oracle.sum())
    res.add("oracle_agreement", bad == 0,
            f"{bad} disagreements over {systems}x{points} points ({inside} feasible)", disagreements=bad)
    return res


# ------------------------------------------------------------------ regime logic

def _profiles(pairs: int, seed: int, profiles=None):
    if profiles is not None:
        return list(profiles)
    rng = np.random.default_rng(seed)
    return [region.random_feasible_profile(rng)[2] for _ in range(pairs)]


@_timed
def pointwise_suite(pairs: int = 20, tuples: int = 1000, band: float = 1e-9, seed: int = 3,
                    profiles=None) -> SuiteResult:
    """Every non-unique tuple off the regime boundary meets its regime's joint-unique rows."""
    res = SuiteResult("pointwise")
    rng = np.random.default_rng(seed + 1000)
    violations, boundary, checked = 0, 0, 0
    first = None
    for mi in _profiles(pairs, seed, profiles):
        sys = region.build_nonunique_system(mi)
        for x in region.hit_and_run(sys, tuples, rng):
            t = RateTuple.from_vector(x)
            verdict = region.regime_predicate(mi, t, band)
            for k, rx in ((2, "Y2"), (3, "Y3")):
                if verdict[rx] is region.Regime.BOUNDARY:
                    boundary += 1
                    continue
                checked += 1
                regime = "a" if verdict[rx] is region.Regime.A else "b"
                rows = region.regime_rows(k, regime, mi)
                if not all(r.satisfied(x, band) for r in rows):
                    violations += 1
                    first = first or (rx, regime, t.to_json())
    n = len(profiles) if profiles is not None else pairs
    res.add("regime_implication", violations == 0,
            f"{violations} violations in {checked} receiver checks over {n} profiles x {tuples} tuples "
            f"({boundary} in the boundary band)", violations=violations, witness=first)
    return res


def toy_profile() -> region.MIProfile:
    return experiments.neg_profile(load("toy_inside"))


TOY_HALFPLANES = ((1, 0, 1.0), (1, 1, 2.0))


def halfplanes_match(got, expected, tol: float = 1e-9) -> bool:
    got = [(int(a), int(b), float(c)) for a, b, c in got]
    if len(got) != len(expected):
        return False
    return all(any((a, b) == (ea, eb) and abs(c - ec) <= tol for a, b, c in got) for ea, eb, ec in expected)


@_timed
def projection_suite(pairs: int = 10, tol: float = 1e-6, grid: int = 200, seed: int = 4,
                     profiles=None, keep_sat_sum: bool = True, toy: bool = True) -> SuiteResult:
    """Projected non-unique region against the union of the four regime projections."""
    res = SuiteResult("projection")
    verdicts = []
    for mi in _profiles(pairs, seed, profiles):
        a = region.project_region(region.build_nonunique_system(mi))
        b = region.region_union(region.build_jointunique_systems(mi, keep_sat_sum))
        verdicts.append(region.compare_regions(a, b, tol, grid))
    unequal = [v for v in verdicts if v.verdict != "equal"]
    res.add("region_equivalence", not unequal,
            f"{len(verdicts) - len(unequal)}/{len(verdicts)} profiles equal at tol {tol:g}, grid {grid}"
            + (f"; first mismatch {unequal[0].verdict} at {unequal[0].witness}" if unequal else ""),
            verdicts=[v.verdict for v in verdicts])
    if toy:
        got = region.project_region(region.build_nonunique_system(toy_profile())).halfplanes
        ok = halfplanes_match(got, TOY_HALFPLANES)
        res.add("toy_halfplanes", ok,
                f"toy projects to {format_halfplanes(got)}; expected {format_halfplanes(TOY_HALFPLANES)}", halfplanes=got)
    return res


def format_halfplanes(hps) -> str:
    terms = []
    for a, b, c in hps:
        lhs = " + ".join(f"{'' if v == 1 else v}{n}" for v, n in ((a, "R0"), (b, "R1")) if v)
        terms.append(f"{lhs} <= {float(c):g}")
    return "{" + ", ".join(terms) + "}"


# ------------------------------------------------------------------ decoders

@_timed
def dichotomy_suite(trials: int = 2000, const_trials: int = 200) -> SuiteResult:
    """Cloud-only decoder: always fails with a constant cloud, succeeds in regime (a)."""
    res = SuiteResult("dichotomy")
    toy = replace(load("toy_inside"), trials=const_trials, receivers=("y2", "y3"))
    st = experiments.run_stats(toy, 16)
    rates = [st.error_rate(d) for d in ("y2_comp1", "y3_comp1")]
    size = toy.neg_config(16).sizes
    res.add("constant_cloud", size["R0"] * size["S0"] > 1 and all(r == 1.0 for r in rates),
            f"comp1 error {rates} with M(R0+S0)={size['R0'] * size['S0']} over {const_trials} trials")
    cloud = replace(load("cloud"), trials=trials)
    mi = experiments.neg_profile(cloud)
    margin = mi.iU_Y2 - (cloud.rates.R0 + cloud.rates.S0)
    st = experiments.run_stats(cloud, 16)
    e = st.error_rate("y2_comp1")
    res.add("regime_a_cloud", margin >= 0.2 - 1e-12 and e <= 0.15,
            f"comp1 error {e:.4f} (limit 0.15) at R0+S0 = I(U;Y2) - {margin:.3g}, n=16, {trials} trials")
    return res


@_timed
def decoders_suite(trials: int = 2000, sweep_trials: int | None = None) -> SuiteResult:
    """Two-bit toy: inside/outside error levels and the blocklength trend."""
    res = SuiteResult("decoders")
    inside = replace(load("toy_inside"), trials=trials, receivers=("y2",))
    st = experiments.run_stats(inside, 16)
    nu, aux = st.error_rate("y2_nonunique"), st.error_rate("y2_aux")
    res.add("inside_error", nu <= 0.1 and aux <= 0.1,
            f"R0={inside.rates.R0}: nonunique {nu:.4f}, auxiliary {aux:.4f} (limit 0.1), "
            f"encoder failures {st.enc_fail}/{trials}", nonunique=nu, aux=aux)
    res.add("aux_vs_nonunique", aux <= nu + 0.05, f"auxiliary {aux:.4f} <= nonunique {nu:.4f} + 0.05")
    outside = replace(load("toy_outside"), trials=trials)
    st = experiments.run_stats(outside, 16)
    e = st.error_rate("y2_nonunique")
    res.add("outside_error", e >= 0.9, f"R0={outside.rates.R0}: nonunique {e:.4f} (limit >= 0.9)", nonunique=e)
    sweep = load("toy_sweep")
    if sweep_trials is not None:
        sweep = replace(sweep, trials=sweep_trials)
    errs = []
    for n in sweep.n:
        errs.append(experiments.run_stats(sweep, n).error_rate("y2_nonunique"))
    T = sweep.trials
    ok = all(b <= a + _two_sigma(a, T, b, T) for a, b in zip(errs, errs[1:]))
    res.add("blocklength_trend", ok,
            "nonunique error " + ", ".join(f"n={n}: {e:.4f}" for n, e in zip(sweep.n, errs))
            + f" ({T} trials each, 2 sigma slack)", errors=errs)
    return res


@_timed
def implications_suite(total: int = 10000) -> SuiteResult:
    """Per-trial implication laws over mixed broadcast and interference trials."""
    res = SuiteResult("decoder-implications")
    plan = [("noisy", 8, 0.4), ("toy_sweep", 8, 0.2), ("xor_ic", 8, 0.4)]
    counts, viol, trials = {}, {}, 0
    for name, n, share in plan:
        cfg = load(name)
        cfg = replace(cfg, trials=max(1, int(round(total * share))), fresh_codebook_every=1)
        if cfg.kind == "neg-bc":
            cfg = replace(cfg, receivers=("y1", "y2", "y3"))
        else:
            cfg = replace(cfg, rates=(0.5, 0.25, 0.25))
        st = experiments.run_stats(cfg, n)
        trials += st.trials
        for k, v in st.crosstab.items():
            counts[k] = counts.get(k, 0) + v
        for k, v in st.violations().items():
            viol[k] = viol.get(k, 0) + v
    premises = {k: v for k, v in counts.items() if k.endswith("_correct")}
    bad = sum(viol.values())
    res.add("implications", bad == 0 and trials >= total,
            f"{bad} violations over {trials} trials; premises seen: "
            + ", ".join(f"{k}={v}" for k, v in sorted(premises.items())), violations=viol)
    return res


@_timed
def concentration_suite(draws: int = 500, scenario: str = "bins", cfg=None) -> SuiteResult:
    """Bin-count tails against the Chernoff-type bounds."""
    res = SuiteResult("concentration")
    cfg = cfg or load(scenario)
    cfg = replace(cfg, bins={**cfg.bins, "draws": draws})
    stats, rep = experiments.bins_report(cfg)
    Npl = rep.N * rep.p_l
    res.add("regime", Npl >= 20, f"N p_l = {Npl:.4g} (needs >= 20), N={rep.N}, draws={draws}")
    res.add("upper_tail", rep.upper_pass,
            f"Pr(N2 > 2 N p_u) = {rep.upper_tail:.4g} <= {rep.upper_bound:.4g} + {rep.upper_slack:.4g}")
    res.add("lower_tail", rep.lower_pass,
            f"Pr(N3 < N p_l / 2) = {rep.lower_tail:.4g} <= {rep.lower_bound:.4g} + {rep.lower_slack:.4g}")
    return res


def crossing(xs, ys, level: float = 0.5) -> float:
    """Linear interpolation of the first upward crossing of `level`."""
    for (x0, y0), (x1, y1) in zip(zip(xs, ys), zip(xs[1:], ys[1:])):
        if y0 < level <= y1:
            return x0 + (level - y0) * (x1 - x0) / (y1 - y0)
    return math.nan


@_timed
def ic_suite(trials: int = 1000, tol: float = 0.1) -> SuiteResult:
    """XOR interference channel: spec, entropy routes and the error transition."""
    res = SuiteResult("ic")
    cfg = replace(load("xor_ic"), trials=trials)
    bad = detic.validate_spec(cfg.spec)
    res.add("xor_valid", not bad, "validate_spec: " + ("ok" if not bad else bad[0].describe()))
    rep = experiments.ic_bounds(cfg)
    enum_h = detic.s1_entropy_enumerated(cfg.spec, cfg.dists)
    res.add("s1_entropy", abs(rep.h_s1 - 1.0) <= 1e-12 and abs(rep.h_s1 - enum_h) <= 1e-12,
            f"H(S1|Q) = {rep.h_s1:.15g} by pushforward, {enum_h:.15g} by enumeration")
    values = cfg.raw["sweep"]["values"]
    errs = []
    for r1 in values:
        st = experiments.run_stats(experiments.with_param(cfg, "R1", r1), cfg.n[0])
        errs.append(st.error_rate("y1_nonunique"))
    mc = crossing(values, errs)
    pred = rep.threshold_r1
    res.add("transition", abs(mc - pred) <= tol,
            f"Monte Carlo crossing R1 = {mc:.4f}, exponent sign change R1 = {pred:.4f} (limit {tol}); errors "
            + ", ".join(f"{v:g}: {e:.3f}" for v, e in zip(values, errs)), crossing=mc, predicted=pred)
    return res


@_timed
def reproducibility_suite(trials: int = 30, names=None) -> SuiteResult:
    """Each shipped scenario, run twice with its seed, gives byte-identical CSV text."""
    from . import cli

    res = SuiteResult("reproducibility")
    for name in names or config.shipped_scenarios():
        outs = []
        for _ in range(2):
            with tempfile.TemporaryDirectory() as d:
                with contextlib.redirect_stdout(io.StringIO()):
                    code = cli.main(["simulate", "--config", name, "--trials", str(trials), "--out-dir", d])
                outs.append((code, Path(d, "stats.csv").read_bytes()))
        same = outs[0] == outs[1] and outs[0][0] == 0
        res.add(name, same, f"{len(outs[0][1])} bytes, identical={same}")
    return res


SUITES = {
    "info": info_suite,
    "fme": fme_suite,
    "pointwise": pointwise_suite,
    "projection": projection_suite,
    "dichotomy": dichotomy_suite,
    "decoders": decoders_suite,
    "decoder-implications": implications_suite,
    "concentration": concentration_suite,
    "ic": ic_suite,
    "reproducibility": reproducibility_suite,
}
