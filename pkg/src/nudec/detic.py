"""Three-user deterministic interference channel: tables, codebooks and the
decoders at receiver 1.

Transmitter l sends X_l; receiver k sees the cross symbols X_lk = g[l][k](X_l)
and outputs Y_k = f[k](X_kk, S_k) with the combined interference
S_1 = h[0](X21, X31), S_2 = h[1](X12, X32), S_3 = h[2](X23, X13).
Indices are 0-based in code: user 1 is index 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from . import prob
from .negcodec import _cdf, _draw, codebook_size
from .seeds import CODEBOOK, TRIAL, stream_seed
from .typicality import TypicalSet
from .verdict import Kind, TrialStats, Verdict, combine_auxiliary, unique_verdict

DEFAULT_CAP = 4096
DEFAULT_MAX_TESTS = 1 << 24

# (first, second) interfering users feeding h_k, per receiver k
INTERFERERS = ((1, 2), (0, 2), (1, 0))


class InvalidSpec(ValueError):
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(v.describe() for v in self.violations[:3]))


@dataclass(frozen=True)
class Violation:
    table: str                  # "g", "h", "f" or "alphabets"
    index: tuple                # 0-based table index, e.g. (k,) for h[k]
    kind: str                   # "shape", "range" or "collision"
    detail: str
    cells: tuple = ()           # colliding cells (row, col) for collisions

    @property
    def name(self) -> str:
        return self.table + "".join(f"[{i + 1}]" for i in self.index)

    def json_path(self, root: str = "$.spec") -> str:
        return f"{root}.{self.table}" + "".join(f"[{i}]" for i in self.index)

    def describe(self) -> str:
        return f"{self.name}: {self.kind}: {self.detail}"

    def to_json(self) -> dict:
        return {"table": self.name, "kind": self.kind, "detail": self.detail,
                "cells": [list(c) for c in self.cells]}


@dataclass(frozen=True)
class DetICSpec:
    q: int                       # |Q|
    x: tuple[int, int, int]      # |X_l|
    cross: tuple                 # cross[l][k] = |X_lk|
    s: tuple[int, int, int]      # |S_k|
    y: tuple[int, int, int]      # |Y_k|
    g: tuple                     # g[l][k]: int array of length |X_l|
    h: tuple                     # h[k]: int array (|first interferer|, |second interferer|)
    f: tuple                     # f[k]: int array (|X_kk|, |S_k|)

    def __post_init__(self):
        object.__setattr__(self, "x", tuple(int(v) for v in self.x))
        object.__setattr__(self, "cross", tuple(tuple(int(v) for v in r) for r in self.cross))
        object.__setattr__(self, "s", tuple(int(v) for v in self.s))
        object.__setattr__(self, "y", tuple(int(v) for v in self.y))
        object.__setattr__(self, "g", tuple(tuple(np.asarray(a, dtype=np.int64) for a in r) for r in self.g))
        object.__setattr__(self, "h", tuple(np.asarray(a, dtype=np.int64) for a in self.h))
        object.__setattr__(self, "f", tuple(np.asarray(a, dtype=np.int64) for a in self.f))

    def cross_symbols(self, l: int, k: int, xl):
        return self.g[l][k][np.asarray(xl)]

    def combined(self, k: int, a, b):
        """S_k from the two interfering cross symbols, in h_k argument order."""
        return self.h[k][np.asarray(a), np.asarray(b)]

    def output(self, k: int, xkk, sk):
        return self.f[k][np.asarray(xkk), np.asarray(sk)]

    def to_json(self) -> dict:
        return {"q": self.q, "x": list(self.x), "cross": [list(r) for r in self.cross],
                "s": list(self.s), "y": list(self.y),
                "g": [[a.tolist() for a in r] for r in self.g],
                "h": [a.tolist() for a in self.h], "f": [a.tolist() for a in self.f]}

    @classmethod
    def from_json(cls, obj: dict) -> "DetICSpec":
        return cls(int(obj["q"]), obj["x"], obj["cross"], obj["s"], obj["y"], obj["g"], obj["h"], obj["f"])

    @classmethod
    def modular(cls, m: int = 2, q: int = 1) -> "DetICSpec":
        """Every table is addition mod m, cross maps are identities (m=2 gives XOR)."""
        ident = np.arange(m)
        add = (np.arange(m)[:, None] + np.arange(m)[None, :]) % m
        return cls(q, (m,) * 3, ((m,) * 3,) * 3, (m,) * 3, (m,) * 3,
                   ((ident,) * 3,) * 3, (add,) * 3, (add,) * 3)


def _injective_violation(table: str, index: tuple, t: np.ndarray, axis: int):
    """First pair of inputs colliding while the other argument is held fixed."""
    for fixed in range(t.shape[1 - axis]):
        seen = {}
        for a in range(t.shape[axis]):
            cell = (a, fixed) if axis == 0 else (fixed, a)
            out = int(t[cell])
            if out in seen:
                which = "second" if axis == 0 else "first"
                return Violation(table, index, "collision",
                                 f"with the {which} argument fixed to {fixed}, entries {list(seen[out])} "
                                 f"and {list(cell)} both equal {out}", (seen[out], cell))
            seen[out] = cell
    return None


def validate_spec(spec: DetICSpec) -> list[Violation]:
    """All shape, range and injectivity violations; empty list means the spec is valid."""
    out = []
    if spec.q < 1 or min(spec.x) < 1 or min(spec.s) < 1 or min(spec.y) < 1:
        out.append(Violation("alphabets", (), "range", "alphabet sizes must be positive"))
        return out
    for l, k in product(range(3), range(3)):
        t = spec.g[l][k]
        if t.shape != (spec.x[l],):
            out.append(Violation("g", (l, k), "shape", f"expected ({spec.x[l]},), got {t.shape}"))
        elif t.size and (t.min() < 0 or t.max() >= spec.cross[l][k]):
            out.append(Violation("g", (l, k), "range", f"entries must lie in [0, {spec.cross[l][k]})"))
    for k in range(3):
        a, b = INTERFERERS[k]
        for name, t, shape, hi in (("h", spec.h[k], (spec.cross[a][k], spec.cross[b][k]), spec.s[k]),
                                   ("f", spec.f[k], (spec.cross[k][k], spec.s[k]), spec.y[k])):
            if t.shape != shape:
                out.append(Violation(name, (k,), "shape", f"expected {shape}, got {t.shape}"))
                continue
            if t.min() < 0 or t.max() >= hi:
                out.append(Violation(name, (k,), "range", f"entries must lie in [0, {hi})"))
                continue
            for axis in (0, 1):
                v = _injective_violation(name, (k,), t, axis)
                if v is not None:
                    out.append(v)
    return out


@dataclass
class ICDists:
    """p(q) p(x1|q) p(x2|q) p(x3|q)."""
    pq: np.ndarray                      # (|Q|,)
    px: tuple[np.ndarray, ...]          # px[l]: (|Q|, |X_l|)

    def __post_init__(self):
        self.pq = prob.JointPmf([len(self.pq)], self.pq).probs
        self.px = tuple(prob.CondPmf([len(self.pq)], [np.shape(t)[1]], t).table for t in self.px)

    def joint(self) -> prob.JointPmf:
        """Joint pmf over (Q, X1, X2, X3)."""
        a, b, c = self.px
        p = self.pq[:, None, None, None] * a[:, :, None, None] * b[:, None, :, None] * c[:, None, None, :]
        return prob.JointPmf(p.shape, p)

    def to_json(self) -> dict:
        return {"q": self.pq.tolist(), "x": [t.tolist() for t in self.px]}

    @classmethod
    def uniform(cls, spec: DetICSpec) -> "ICDists":
        return cls(np.full(spec.q, 1 / spec.q), tuple(np.full((spec.q, m), 1 / m) for m in spec.x))


# axes of the receiver-1 joint (Q, X1, S1, X21, X31, Y1)
AX_Q, AX_X1, AX_S1, AX_X21, AX_X31, AX_Y1 = range(6)
SUBSETS = ((), (2,), (3,), (2, 3))
SUBSET_AXES = {(): (AX_Q, AX_X1, AX_Y1), (2,): (AX_Q, AX_X1, AX_X21, AX_Y1),
               (3,): (AX_Q, AX_X1, AX_X31, AX_Y1), (2, 3): tuple(range(6))}


def receiver1_joint(spec: DetICSpec, dists: ICDists) -> prob.JointPmf:
    """Pushforward of p(q, x1, x2, x3) to (Q, X1, S1, X21, X31, Y1)."""
    def fn(q, x1, x2, x3):
        x21, x31 = spec.g[1][0][x2], spec.g[2][0][x3]
        s1 = spec.h[0][x21, x31]
        return q, x1, s1, x21, x31, spec.f[0][spec.g[0][0][x1], s1]
    dims = (spec.q, spec.x[0], spec.s[0], spec.cross[1][0], spec.cross[2][0], spec.y[0])
    return prob.pushforward(dists.joint(), dims, fn)


@dataclass
class ICConfig:
    spec: DetICSpec
    dists: ICDists
    rates: tuple[float, float, float]
    n: int
    eps: float = 0.12
    seed: int = 0
    cap: int = DEFAULT_CAP
    max_tests: int = DEFAULT_MAX_TESTS
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        bad = validate_spec(self.spec)
        if bad:
            raise InvalidSpec(bad)
        if self.n < 1:
            raise ValueError("n must be positive")
        if self.eps <= 0:
            raise ValueError("eps must be positive")
        self.rates = tuple(float(r) for r in self.rates)
        if len(self.rates) != 3 or min(self.rates) < 0:
            raise ValueError("rates must be three nonnegative reals")
        if len(self.dists.pq) != self.spec.q or any(t.shape != (self.spec.q, m)
                                                    for t, m in zip(self.dists.px, self.spec.x)):
            raise ValueError("distribution shapes do not match the spec alphabets")
        for k, m in enumerate(self.sizes):
            if m > self.cap:
                raise ValueError(f"codebook size M(R{k + 1})={m} exceeds cap {self.cap}")
        tests = int(np.prod(self.sizes))
        if tests > self.max_tests:
            raise ValueError(f"decoder search needs {tests} typicality tests, cap {self.max_tests}")

    @property
    def sizes(self) -> tuple[int, int, int]:
        return tuple(codebook_size(r, self.n) for r in self.rates)

    @property
    def joint(self) -> prob.JointPmf:
        if "joint" not in self._cache:
            self._cache["joint"] = receiver1_joint(self.spec, self.dists)
        return self._cache["joint"]

    def typical_set(self, axes: tuple[int, ...]) -> TypicalSet:
        key = ("typ", axes)
        if key not in self._cache:
            self._cache[key] = TypicalSet(prob.marginalize(self.joint, axes), self.eps, self.n)
        return self._cache[key]


@dataclass
class ICCodebook:
    Q: np.ndarray                       # (n,)
    X: tuple[np.ndarray, ...]           # X[l]: (M(R_l), n)

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(len(a) for a in self.X)


def ic_generate_codebook(cfg: ICConfig, rng: np.random.Generator) -> ICCodebook:
    n = cfg.n
    Q = _draw(_cdf(cfg.dists.pq)[None, :], np.zeros(n, dtype=np.int64), rng.random(n))
    X = tuple(_draw(_cdf(t), Q[None, :].astype(np.int64), rng.random((m, n)))
              for t, m in zip(cfg.dists.px, cfg.sizes))
    return ICCodebook(Q, X)


def ic_transmit(spec: DetICSpec, x1, x2, x3) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    xs = [np.asarray(v, dtype=np.int64) for v in (x1, x2, x3)]
    ys = []
    for k in range(3):
        a, b = INTERFERERS[k]
        s = spec.combined(k, spec.cross_symbols(a, k, xs[a]), spec.cross_symbols(b, k, xs[b]))
        ys.append(spec.output(k, spec.cross_symbols(k, k, xs[k]), s).astype(np.int16))
    return tuple(ys)


# ------------------------------------------------------------------ decoders at Y1

def ic_masks(cfg: ICConfig, cb: ICCodebook, y1: np.ndarray) -> dict:
    """Typicality masks: () -> (M1,), (2,) -> (M1,M2), (3,) -> (M1,M3), (2,3) -> (M1,M2,M3)."""
    spec = cfg.spec
    x1 = cb.X[0]
    x21 = spec.cross_symbols(1, 0, cb.X[1])
    x31 = spec.cross_symbols(2, 0, cb.X[2])
    s1 = spec.combined(0, x21[:, None, :], x31[None, :, :])   # computed on demand, never stored
    q = cb.Q
    return {
        (): cfg.typical_set(SUBSET_AXES[()]).mask([q, x1, y1]),
        (2,): cfg.typical_set(SUBSET_AXES[(2,)]).mask([q, x1[:, None, :], x21[None, :, :], y1]),
        (3,): cfg.typical_set(SUBSET_AXES[(3,)]).mask([q, x1[:, None, :], x31[None, :, :], y1]),
        (2, 3): cfg.typical_set(SUBSET_AXES[(2, 3)]).mask(
            [q, x1[:, None, None, :], s1[None], x21[None, :, None, :], x31[None, None, :, :], y1]),
    }


def _truth(subset, msg) -> tuple[int, ...]:
    m1, m2, m3 = msg
    return (m1,) + tuple(m2 if i == 2 else m3 for i in subset)


def ic_nonunique_verdict(masks, msg) -> Verdict:
    full = masks[(2, 3)]
    return unique_verdict(np.flatnonzero(full.reshape(full.shape[0], -1).any(axis=1))[:, None], (msg[0],))


def ic_component_verdict(masks, msg, subset) -> Verdict:
    subset = tuple(subset)
    return unique_verdict(np.argwhere(masks[subset]), _truth(subset, msg))


def ic_auxiliary_verdict(comps: dict, msg) -> tuple[Verdict, bool]:
    """Combine the four components on m1. The flag marks non-erring components
    that agree on m1 but report different interference indices."""
    ok = [v.decoded for v in comps.values() if not v.declared_error]
    outs = [(d[0],) for d in ok] or [None]
    verdict = combine_auxiliary(outs, list(comps.values()), (msg[0],))
    split = False
    if ok and len({d[0] for d in ok}) == 1:
        seen = {}
        for s, v in comps.items():
            if v.declared_error:
                continue
            for i, idx in zip(s, v.decoded[1:]):
                if seen.setdefault(i, idx) != idx:
                    split = True
    return verdict, split


def ic_decode_nonunique(cfg: ICConfig, cb: ICCodebook, y1, msg) -> Verdict:
    return ic_nonunique_verdict(ic_masks(cfg, cb, y1), msg)


def ic_decode_component(cfg: ICConfig, cb: ICCodebook, y1, msg, subset) -> Verdict:
    subset = tuple(sorted(subset))
    if subset not in SUBSET_AXES:
        raise ValueError(f"subset must be one of {SUBSETS}")
    return ic_component_verdict(ic_masks(cfg, cb, y1), msg, subset)


def ic_decode_auxiliary(cfg: ICConfig, cb: ICCodebook, y1, msg) -> Verdict:
    masks = ic_masks(cfg, cb, y1)
    return ic_auxiliary_verdict({s: ic_component_verdict(masks, msg, s) for s in SUBSETS}, msg)[0]


# ------------------------------------------------------------------ bound exponents

@dataclass(frozen=True)
class ICBoundReport:
    rates: tuple[float, float, float]
    h_x21: float            # H(X21|Q)
    h_x31: float            # H(X31|Q)
    h_s1: float             # H(S1|Q)
    h_s1_x31: float         # H(S1|X31,Q)
    i_pair: float           # I(X1,X21;Y1|Q,X31)
    i_all: float            # I(X1,X21,X31;Y1|Q)
    i_comb: float           # I(X1,S1;Y1|Q)
    e_pair: float
    e_both: float
    e_both_comb: float
    e_comb: float

    @property
    def exponents(self) -> dict[str, float]:
        return {"pair": self.e_pair, "both": self.e_both, "both_comb": self.e_both_comb, "comb": self.e_comb}

    @property
    def worst(self) -> float:
        return max(self.exponents.values())

    @property
    def threshold_r1(self) -> float:
        """Largest R1 at which every exponent is <= 0 (all exponents are R1 + const)."""
        return self.rates[0] - self.worst

    def to_json(self) -> dict:
        d = dict(self.__dict__)
        d["rates"] = list(self.rates)
        d["threshold_r1"] = self.threshold_r1
        return d


def _clamp(v: float) -> float:
    return max(v, 0.0)


def ic_bound_exponents(spec: DetICSpec, dists: ICDists, rates) -> ICBoundReport:
    bad = validate_spec(spec)
    if bad:
        raise InvalidSpec(bad)
    r1, r2, r3 = (float(r) for r in rates)
    j = receiver1_joint(spec, dists)
    H = lambda a, c: _clamp(prob.conditional_entropy(j, a, c))
    I = lambda a, b, c: _clamp(prob.conditional_mutual_information(j, a, b, c))
    h21, h31 = H([AX_X21], [AX_Q]), H([AX_X31], [AX_Q])
    hs, hs3 = H([AX_S1], [AX_Q]), H([AX_S1], [AX_X31, AX_Q])
    i_pair = I([AX_X1, AX_X21], [AX_Y1], [AX_Q, AX_X31])
    i_all = I([AX_X1, AX_X21, AX_X31], [AX_Y1], [AX_Q])
    i_comb = I([AX_X1, AX_S1], [AX_Y1], [AX_Q])
    e_pair = r1 + min(r2, h21) - i_pair
    e_both = r1 + min(r3, h31) + min(r2, h21) - i_all
    e_both_comb = r1 + min(r3, h31) + min(r2, h21, hs3) - i_all
    e_comb = r1 + min(r2 + r3, r2 + h31, h21 + r3, hs) - i_comb
    return ICBoundReport((r1, r2, r3), h21, h31, hs, hs3, i_pair, i_all, i_comb,
                         e_pair, e_both, e_both_comb, e_comb)


def s1_entropy_enumerated(spec: DetICSpec, dists: ICDists) -> float:
    """H(S1|Q) by explicit enumeration of (q, x2, x3), independent of the pushforward route."""
    total = 0.0
    for q in range(spec.q):
        if dists.pq[q] == 0:
            continue
        ps = {}
        for x2 in range(spec.x[1]):
            for x3 in range(spec.x[2]):
                w = dists.px[1][q, x2] * dists.px[2][q, x3]
                s = int(spec.h[0][spec.g[1][0][x2], spec.g[2][0][x3]])
                ps[s] = ps.get(s, 0.0) + w
        total -= dists.pq[q] * sum(p * math.log2(p) for p in ps.values() if p > 0)
    return total


# ------------------------------------------------------------------ trials

DECODERS = ("y1_nonunique", "y1_comp_none", "y1_comp_2", "y1_comp_3", "y1_comp_23", "y1_aux")
_COMP_NAMES = {(): "y1_comp_none", (2,): "y1_comp_2", (3,): "y1_comp_3", (2, 3): "y1_comp_23"}


def _tally(stats: TrialStats, nu: Verdict, comps: dict, aux: Verdict, split: bool):
    if comps[(2, 3)].kind is Kind.CORRECT:
        stats.bump("ic_comp23_correct")
        if nu.kind is not Kind.CORRECT:
            stats.bump("ic_comp23_implies_nonunique_violation")
    outs = {v.decoded[0] for v in comps.values() if not v.declared_error}
    should_err = not outs or len(outs) > 1
    if should_err != aux.declared_error or (not should_err and aux.decoded != (outs.pop(),)):
        stats.bump("ic_aux_rule_violation")
    stats.bump("ic_aux_rule_checked")
    if split:
        stats.bump("ic_aux_interference_split")


def ic_run_trials(cfg: ICConfig, trials: int, fresh_codebook_every: int = 1) -> TrialStats:
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if fresh_codebook_every < 1:
        raise ValueError("fresh_codebook_every must be >= 1")
    stats = TrialStats(cfg.n, cfg.eps, DECODERS)
    cb = None
    for t in range(trials):
        if t % fresh_codebook_every == 0:
            cb = ic_generate_codebook(cfg, np.random.default_rng(stream_seed(cfg.seed, CODEBOOK, t // fresh_codebook_every)))
        rng = np.random.default_rng(stream_seed(cfg.seed, TRIAL, t))
        msg = tuple(int(rng.integers(m)) for m in cfg.sizes)
        y1, _, _ = ic_transmit(cfg.spec, *(cb.X[l][msg[l]] for l in range(3)))
        masks = ic_masks(cfg, cb, y1)
        nu = ic_nonunique_verdict(masks, msg)
        comps = {s: ic_component_verdict(masks, msg, s) for s in SUBSETS}
        aux, split = ic_auxiliary_verdict(comps, msg)
        v = {"y1_nonunique": nu, "y1_aux": aux}
        v.update({_COMP_NAMES[s]: c for s, c in comps.items()})
        _tally(stats, nu, comps, aux, split)
        stats.record(v)
    return stats
