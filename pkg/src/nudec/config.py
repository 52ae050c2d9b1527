"""Scenario configs: JSON schema, pmf checks with JSON paths, and builders
for the simulation configs of both scheme kinds."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import jsonschema
import numpy as np

from . import detic, negcodec, prob
from .region import RateTuple

DEFAULT_EPS = 0.12
PMF_TOL = 1e-9

_num = {"type": "number"}
_nested = {"type": ["array", "number"]}
_pos_int = {"type": "integer", "minimum": 1}

_COMMON = {
    "name": {"type": "string"},
    "description": {"type": "string"},
    "n": {"type": "array", "items": _pos_int, "minItems": 1},
    "eps": {"type": "number", "exclusiveMinimum": 0},
    "trials": _pos_int,
    "seed": {"type": "integer", "minimum": 0, "maximum": 2 ** 64 - 1},
    "fresh_codebook_every": _pos_int,
    "caps": {"type": "object", "additionalProperties": False,
             "properties": {"codebook": _pos_int, "tests": _pos_int}},
}

NEG_SCHEMA = {
    "type": "object",
    "required": ["kind", "source", "channel", "rates", "n"],
    "additionalProperties": False,
    "properties": {
        **_COMMON,
        "kind": {"const": "neg-bc"},
        "source": {"type": "object", "required": ["dims", "probs"], "additionalProperties": False,
                   "properties": {"dims": {"type": "array", "items": _pos_int, "minItems": 4, "maxItems": 4},
                                  "probs": _nested}},
        "channel": {"type": "object", "required": ["in_dims", "out_dims", "probs"], "additionalProperties": False,
                    "properties": {"in_dims": {"type": "array", "items": _pos_int, "minItems": 1, "maxItems": 1},
                                   "out_dims": {"type": "array", "items": _pos_int, "minItems": 3, "maxItems": 3},
                                   "probs": _nested}},
        "rates": {"type": "object", "additionalProperties": False,
                  "properties": {k: {"type": "number", "minimum": 0}
                                 for k in ("R0", "S0", "S1", "S2", "S3", "T2", "T3")}},
        "receivers": {"type": "array", "items": {"enum": ["y1", "y2", "y3"]}, "minItems": 1, "uniqueItems": True},
        "bins": {"type": "object", "additionalProperties": False,
                 "properties": {"draws": _pos_int, "delta": {"type": "number", "minimum": 0}}},
        "region": {"type": "object", "additionalProperties": False,
                   "properties": {"tol": {"type": "number", "exclusiveMinimum": 0},
                                  "grid": {"type": "integer", "minimum": 2},
                                  "keep_sat_sum": {"type": "boolean"}}},
    },
}

_table2 = {"type": "array", "items": {"type": "array", "items": {"type": "integer"}}}
IC_SCHEMA = {
    "type": "object",
    "required": ["kind", "spec", "dists", "rates", "n"],
    "additionalProperties": False,
    "properties": {
        **_COMMON,
        "kind": {"const": "det-ic"},
        "spec": {"type": "object", "required": ["q", "x", "cross", "s", "y", "g", "h", "f"],
                 "additionalProperties": False,
                 "properties": {
                     "q": _pos_int,
                     "x": {"type": "array", "items": _pos_int, "minItems": 3, "maxItems": 3},
                     "cross": {"type": "array", "minItems": 3, "maxItems": 3,
                               "items": {"type": "array", "items": _pos_int, "minItems": 3, "maxItems": 3}},
                     "s": {"type": "array", "items": _pos_int, "minItems": 3, "maxItems": 3},
                     "y": {"type": "array", "items": _pos_int, "minItems": 3, "maxItems": 3},
                     "g": {"type": "array", "minItems": 3, "maxItems": 3,
                           "items": {"type": "array", "minItems": 3, "maxItems": 3,
                                     "items": {"type": "array", "items": {"type": "integer"}}}},
                     "h": {"type": "array", "items": _table2, "minItems": 3, "maxItems": 3},
                     "f": {"type": "array", "items": _table2, "minItems": 3, "maxItems": 3}}},
        "dists": {"type": "object", "required": ["q", "x"], "additionalProperties": False,
                  "properties": {"q": {"type": "array", "items": _num, "minItems": 1},
                                 "x": {"type": "array", "minItems": 3, "maxItems": 3,
                                       "items": {"type": "array", "items": {"type": "array", "items": _num}}}}},
        "rates": {"type": "object", "required": ["R1", "R2", "R3"], "additionalProperties": False,
                  "properties": {k: {"type": "number", "minimum": 0} for k in ("R1", "R2", "R3")}},
        "sweep": {"type": "object", "additionalProperties": False,
                  "properties": {"param": {"type": "string"}, "values": {"type": "array", "items": _num}}},
    },
}

TOP_SCHEMA = {"type": "object", "required": ["kind"],
              "properties": {"kind": {"enum": ["neg-bc", "det-ic"]}}}


@dataclass(frozen=True)
class Issue:
    path: str
    message: str

    def __str__(self):
        return f"{self.path}: {self.message}"


class ConfigError(ValueError):
    def __init__(self, issues):
        self.issues = list(issues)
        super().__init__("\n".join(str(i) for i in self.issues))


@dataclass
class ScenarioConfig:
    kind: str
    raw: dict
    name: str = ""
    n: tuple[int, ...] = (16,)
    eps: float = DEFAULT_EPS
    trials: int = 100
    seed: int = 0
    fresh_codebook_every: int = 1
    cap: int = negcodec.DEFAULT_CAP
    max_tests: int = negcodec.DEFAULT_MAX_TESTS
    # neg-bc
    source: prob.JointPmf | None = None
    channel: prob.CondPmf | None = None
    rates: object = None             # RateTuple, or (R1, R2, R3) for det-ic
    receivers: tuple[str, ...] = ("y1", "y2", "y3")
    bins: dict = field(default_factory=lambda: {"draws": 500, "delta": 0.1})
    region: dict = field(default_factory=lambda: {"tol": 1e-6, "grid": 200, "keep_sat_sum": True})
    # det-ic
    spec: detic.DetICSpec | None = None
    dists: detic.ICDists | None = None

    def with_overrides(self, seed=None, trials=None) -> "ScenarioConfig":
        kw = {}
        if seed is not None:
            kw["seed"] = int(seed)
        if trials is not None:
            kw["trials"] = int(trials)
        return replace(self, **kw)

    def neg_config(self, n: int, rates: RateTuple | None = None) -> negcodec.NegSchemeConfig:
        return negcodec.NegSchemeConfig(n=n, eps=self.eps, rates=rates or self.rates, source=self.source,
                                        channel=self.channel, seed=self.seed, cap=self.cap,
                                        max_tests=self.max_tests)

    def ic_config(self, n: int, rates=None) -> detic.ICConfig:
        return detic.ICConfig(self.spec, self.dists, tuple(rates or self.rates), n, eps=self.eps,
                              seed=self.seed, cap=self.cap, max_tests=self.max_tests)


def _path(parts) -> str:
    out = "$"
    for p in parts:
        out += f"[{p}]" if isinstance(p, int) else f".{p}"
    return out


def _schema_issues(obj, schema) -> list[Issue]:
    v = jsonschema.Draft202012Validator(schema)
    return [Issue(_path(e.absolute_path), e.message)
            for e in sorted(v.iter_errors(obj), key=lambda e: list(map(str, e.absolute_path)))]


def _array(obj, path: str, issues: list[Issue]):
    try:
        arr = np.asarray(obj, dtype=float)
    except (TypeError, ValueError):
        issues.append(Issue(path, "ragged or non-numeric array"))
        return None
    if arr.dtype == object:
        issues.append(Issue(path, "ragged array"))
        return None
    return arr


def _check_pmf(arr, shape, path: str, issues: list[Issue], rows_axes: int = 0):
    """Validate an array of pmfs: the trailing axes after `rows_axes` must each sum to 1."""
    if arr is None:
        return None
    if arr.size != int(np.prod(shape)):
        issues.append(Issue(path, f"{arr.size} entries, expected {int(np.prod(shape))} for dims {list(shape)}"))
        return None
    arr = arr.reshape(shape)
    if np.any(arr < 0) or not np.all(np.isfinite(arr)):
        issues.append(Issue(path, "probabilities must be finite and nonnegative"))
        return None
    sums = arr.reshape(shape[:rows_axes] + (-1,)).sum(axis=-1)
    off = np.abs(sums - 1.0) > PMF_TOL
    if off.any():
        idx = tuple(int(i) for i in np.argwhere(off)[0]) if rows_axes else ()
        where = path + "".join(f"[{i}]" for i in idx)
        issues.append(Issue(where, f"pmf sums to {float(sums[idx]):.12g}, not 1"))
        return None
    return arr / sums.reshape(sums.shape + (1,) * (arr.ndim - rows_axes))


def _parse_common(obj: dict, cfg: ScenarioConfig):
    cfg.name = obj.get("name", "")
    cfg.n = tuple(obj["n"])
    cfg.eps = float(obj.get("eps", DEFAULT_EPS))
    cfg.trials = int(obj.get("trials", cfg.trials))
    cfg.seed = int(obj.get("seed", 0))
    cfg.fresh_codebook_every = int(obj.get("fresh_codebook_every", 1))
    caps = obj.get("caps", {})
    cfg.cap = int(caps.get("codebook", cfg.cap))
    cfg.max_tests = int(caps.get("tests", cfg.max_tests))


def parse_config(obj: dict) -> ScenarioConfig:
    issues = _schema_issues(obj, TOP_SCHEMA)
    if issues:
        raise ConfigError(issues)
    kind = obj["kind"]
    issues = _schema_issues(obj, NEG_SCHEMA if kind == "neg-bc" else IC_SCHEMA)
    if issues:
        raise ConfigError(issues)
    cfg = ScenarioConfig(kind=kind, raw=obj)
    _parse_common(obj, cfg)
    if kind == "neg-bc":
        src = obj["source"]
        arr = _check_pmf(_array(src["probs"], "$.source.probs", issues), tuple(src["dims"]),
                         "$.source.probs", issues)
        ch = obj["channel"]
        if ch["in_dims"][0] != src["dims"][3]:
            issues.append(Issue("$.channel.in_dims", f"channel input size {ch['in_dims'][0]} != |X| = {src['dims'][3]}"))
        tab = _check_pmf(_array(ch["probs"], "$.channel.probs", issues),
                         tuple(ch["in_dims"]) + tuple(ch["out_dims"]), "$.channel.probs", issues, rows_axes=1)
        rates = RateTuple(**obj["rates"])
        if not rates.is_valid():
            issues.append(Issue("$.rates", "rate split needs T2 >= S2 and T3 >= S3"))
        if issues:
            raise ConfigError(issues)
        cfg.source = prob.JointPmf(src["dims"], arr)
        cfg.channel = prob.CondPmf(ch["in_dims"], ch["out_dims"], tab)
        cfg.rates = rates
        cfg.receivers = tuple(obj.get("receivers", cfg.receivers))
        cfg.bins = {**cfg.bins, **obj.get("bins", {})}
        cfg.region = {**cfg.region, **obj.get("region", {})}
    else:
        spec = detic.DetICSpec.from_json(obj["spec"])
        for v in detic.validate_spec(spec):
            issues.append(Issue(v.json_path(), f"{v.kind}: {v.detail}"))
        if issues:
            raise ConfigError(issues)
        q = spec.q
        pq = _check_pmf(_array(obj["dists"]["q"], "$.dists.q", issues), (q,), "$.dists.q", issues)
        px = [_check_pmf(_array(t, f"$.dists.x[{l}]", issues), (q, spec.x[l]),
                         f"$.dists.x[{l}]", issues, rows_axes=1)
              for l, t in enumerate(obj["dists"]["x"])]
        if issues:
            raise ConfigError(issues)
        cfg.spec = spec
        cfg.dists = detic.ICDists(pq, tuple(px))
        r = obj["rates"]
        cfg.rates = (float(r["R1"]), float(r["R2"]), float(r["R3"]))
        cfg.receivers = ("y1",)
        cfg.raw = obj
    return cfg


def load_config(path) -> ScenarioConfig:
    path = Path(path)
    try:
        obj = json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise ConfigError([Issue("$", f"JSON parse error at line {e.lineno} column {e.colno}: {e.msg}")]) from e
    return parse_config(obj)


SCENARIO_DIR = Path(__file__).parent / "scenarios"


def scenario_path(name: str) -> Path:
    """Shipped scenario by bare name, or any existing file path."""
    p = Path(name)
    if p.exists():
        return p
    q = SCENARIO_DIR / (name if name.endswith(".json") else name + ".json")
    if q.exists():
        return q
    raise FileNotFoundError(f"no config file or shipped scenario named {name!r}")


def shipped_scenarios() -> list[str]:
    return sorted(p.stem for p in SCENARIO_DIR.glob("*.json"))
