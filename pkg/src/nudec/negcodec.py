"""Finite-blocklength simulation of superposition + Marton coding for the
three-receiver broadcast channel with degraded message sets.

Messages: m0 (common), s0, s1, s2, s3 (private split). U rows are indexed
by l = m0 * M(S0) + s0. Each U row carries M(T2) V2 rows and M(T3) V3
rows, partitioned into M(S2) and M(S3) bins; one jointly typical pair is
selected per product bin (s2, s3) and X is superposed on it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import prob
from .region import RateTuple
from .seeds import BINS, CODEBOOK, TRIAL, stream_seed
from .typicality import TypicalSet
from .verdict import Kind, TrialStats, Verdict, combine_auxiliary, unique_verdict

DEFAULT_CAP = 4096
DEFAULT_MAX_TESTS = 1 << 24


def codebook_size(rate: float, n: int) -> int:
    return max(1, int(math.floor(2.0 ** (n * rate) + 0.5)))


def _cdf(cond: np.ndarray) -> np.ndarray:
    c = np.cumsum(cond, axis=-1)
    c[..., -1] = 1.0
    return c


def _draw(cdf: np.ndarray, ctx: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Inverse-cdf draw; cdf[ctx] is the row for each context, u uniforms."""
    out = np.zeros(u.shape, dtype=np.int16)
    for k in range(cdf.shape[-1] - 1):
        out += u > cdf[..., k][ctx]
    return out


@dataclass
class NegSchemeConfig:
    n: int
    eps: float
    rates: RateTuple
    source: prob.JointPmf  # over (U, V2, V3, X)
    channel: prob.CondPmf  # X -> (Y1, Y2, Y3)
    seed: int = 0
    cap: int = DEFAULT_CAP
    max_tests: int = DEFAULT_MAX_TESTS
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")
        if self.eps <= 0:
            raise ValueError("eps must be positive")
        if not self.rates.is_valid():
            raise ValueError(f"invalid rate split {self.rates}")
        if self.source.arity != 4:
            raise ValueError("source must be a pmf over (U, V2, V3, X)")
        if self.channel.in_dims != (self.source.dims[3],) or len(self.channel.out_dims) != 3:
            raise ValueError("channel must map X to (Y1, Y2, Y3)")
        if self.cap < 1 or self.max_tests < 1:
            raise ValueError("caps must be positive")
        for k, m in self.sizes.items():
            if m > self.cap:
                raise ValueError(f"codebook size M({k})={m} exceeds cap {self.cap}")
        s = self.sizes
        L = s["R0"] * s["S0"]
        for what, tests in (("marton", L * s["T2"] * s["T3"]),
                            ("y1", L * s["S1"] * s["S2"] * s["S3"]),
                            ("y2", L * s["T2"]), ("y3", L * s["T3"])):
            if tests > self.max_tests:
                raise ValueError(f"{what} search needs {tests} typicality tests, cap {self.max_tests}")

    @property
    def sizes(self) -> dict[str, int]:
        r = self.rates
        return {k: codebook_size(getattr(r, k), self.n) for k in ("R0", "S0", "S1", "S2", "S3", "T2", "T3")}

    @property
    def joint7(self) -> prob.JointPmf:
        if "joint7" not in self._cache:
            self._cache["joint7"] = prob.chain_compose(self.source, self.channel)
        return self._cache["joint7"]

    def typical_set(self, axes: tuple[int, ...]) -> TypicalSet:
        """Typicality test against the marginal of the 7-variable joint on `axes`."""
        key = ("typ", axes)
        if key not in self._cache:
            self._cache[key] = TypicalSet(prob.marginalize(self.joint7, axes), self.eps, self.n)
        return self._cache[key]

    def tables(self):
        if "tables" not in self._cache:
            src = self.source.probs
            pu = src.sum(axis=(1, 2, 3))
            puv2 = src.sum(axis=(2, 3))
            puv3 = src.sum(axis=(1, 3))
            cond_v2 = puv2 / np.where(pu > 0, pu, 1)[:, None]
            cond_v3 = puv3 / np.where(pu > 0, pu, 1)[:, None]
            p3 = src.sum(axis=3)
            px = src.sum(axis=(0, 1, 2))
            cond_x = np.where(p3[..., None] > 0, src / np.where(p3 > 0, p3, 1)[..., None], px)
            ch = self.channel.table.reshape(self.channel.in_dims[0], -1)
            self._cache["tables"] = dict(
                u=_cdf(pu)[None, :], v2=_cdf(cond_v2), v3=_cdf(cond_v3),
                x=_cdf(cond_x.reshape(-1, src.shape[3])), ch=_cdf(ch))
        return self._cache["tables"]


@dataclass
class NegCodebook:
    sizes: dict[str, int]
    U: np.ndarray        # (L, n)
    V2: np.ndarray       # (L, M(T2), n)
    V3: np.ndarray       # (L, M(T3), n)
    bin2: np.ndarray     # (L, M(T2)) -> s2
    bin3: np.ndarray     # (L, M(T3)) -> s3
    pair: np.ndarray     # (L, M(S2), M(S3), 2): selected (t2, t3), fallback where enc_fail
    enc_fail: np.ndarray  # (L, M(S2), M(S3))
    X: np.ndarray        # (L, M(S2), M(S3), M(S1), n)

    @property
    def rows(self) -> int:
        return self.U.shape[0]

    def distinct_U(self) -> tuple[np.ndarray, np.ndarray]:
        """Distinct U rows and the inverse map; cloud-only tests run once per distinct row."""
        if not hasattr(self, "_distinct"):
            self._distinct = _distinct_rows(self.U)
        uniq, inv = self._distinct
        return uniq, inv.reshape(-1)

    @property
    def chosen(self) -> np.ndarray:
        """Selected pairs with -1 marking product bins without a typical pair."""
        out = self.pair.copy()
        out[self.enc_fail] = -1
        return out

    def V2_sent(self) -> np.ndarray:
        L = np.arange(self.rows)[:, None, None]
        return self.V2[L, self.pair[..., 0]]

    def V3_sent(self) -> np.ndarray:
        L = np.arange(self.rows)[:, None, None]
        return self.V3[L, self.pair[..., 1]]

    def row_index(self, m0: int, s0: int) -> int:
        return m0 * self.sizes["S0"] + s0

    def split_row(self, l: int) -> tuple[int, int]:
        return divmod(int(l), self.sizes["S0"])


def _distinct_rows(A: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    base = int(A.max()) + 1 if A.size else 1
    if A.shape[1] * math.log2(max(base, 2)) < 63:
        # exact packing of each row into one integer key
        key = np.zeros(A.shape[0], dtype=np.int64)
        for j in range(A.shape[1]):
            key = key * base + A[:, j]
        _, first, inv = np.unique(key, return_index=True, return_inverse=True)
        return A[first], inv
    return np.unique(A, axis=0, return_inverse=True)


def _satellites(cfg: NegSchemeConfig, rng: np.random.Generator, rows: int):
    s, n, tb = cfg.sizes, cfg.n, cfg.tables()
    U = _draw(tb["u"], np.zeros((rows, n), dtype=np.int64), rng.random((rows, n)))
    V2 = _draw(tb["v2"], U[:, None, :], rng.random((rows, s["T2"], n)))
    V3 = _draw(tb["v3"], U[:, None, :], rng.random((rows, s["T3"], n)))
    return U, V2, V3


def _pair_mask(cfg: NegSchemeConfig, U, V2, V3) -> np.ndarray:
    return cfg.typical_set((0, 1, 2)).pair_mask([U[:, None, :], V2], [V3])


def _partition(rng: np.random.Generator, rows: int, items: int, classes: int) -> np.ndarray:
    """Shuffled round-robin partition of range(items) into `classes` bins per row."""
    order = np.argsort(rng.random((rows, items)), axis=1)
    out = np.empty((rows, items), dtype=np.int64)
    np.put_along_axis(out, order, np.arange(items)[None, :] % classes, axis=1)
    return out


def _group_argmax(key: np.ndarray, score: np.ndarray) -> np.ndarray:
    """Index of the max score within each group; groups are 0..G-1, all nonempty."""
    order = np.lexsort((score, key))
    k = key[order]
    ends = np.r_[np.flatnonzero(np.diff(k)), k.size - 1]
    return order[ends]


def generate_codebook(cfg: NegSchemeConfig, rng: np.random.Generator) -> NegCodebook:
    s, n = cfg.sizes, cfg.n
    L = s["R0"] * s["S0"]
    U, V2, V3 = _satellites(cfg, rng, L)
    bin2 = _partition(rng, L, s["T2"], s["S2"])
    bin3 = _partition(rng, L, s["T3"], s["S3"])
    typ = _pair_mask(cfg, U, V2, V3)
    pick = rng.random(typ.shape)
    fallback = rng.random(typ.shape)
    G = s["S2"] * s["S3"]
    group = (np.arange(L)[:, None, None] * G + bin2[:, :, None] * s["S3"] + bin3[:, None, :]).ravel()
    score = np.where(typ, pick, -1.0).ravel()
    best = _group_argmax(group, score)
    fail = score[best] < 0
    alt = _group_argmax(group, fallback.ravel())
    best = np.where(fail, alt, best)
    pos = best % (s["T2"] * s["T3"])
    pair = np.stack([pos // s["T3"], pos % s["T3"]], axis=-1).reshape(L, s["S2"], s["S3"], 2)
    enc_fail = fail.reshape(L, s["S2"], s["S3"])
    rows = np.arange(L)[:, None, None]
    v2 = V2[rows, pair[..., 0]]
    v3 = V3[rows, pair[..., 1]]
    d = cfg.source.dims
    ctx = (U[:, None, None, :].astype(np.int64) * d[1] + v2) * d[2] + v3
    X = _draw(cfg.tables()["x"], ctx[:, :, :, None, :], rng.random((L, s["S2"], s["S3"], s["S1"], n)))
    return NegCodebook(dict(s), U, V2, V3, bin2, bin3, pair, enc_fail, X)


def encode(cb: NegCodebook, msg: tuple[int, int, int, int, int]) -> tuple[np.ndarray, bool]:
    m0, s0, s2, s3, s1 = (int(v) for v in msg)
    sz = cb.sizes
    for v, k in ((m0, "R0"), (s0, "S0"), (s2, "S2"), (s3, "S3"), (s1, "S1")):
        if not 0 <= v < sz[k]:
            raise IndexError(f"index {v} out of range for M({k})={sz[k]}")
    l = cb.row_index(m0, s0)
    return cb.X[l, s2, s3, s1], bool(cb.enc_fail[l, s2, s3])


def transmit(channel: prob.CondPmf, x: np.ndarray, rng: np.random.Generator) -> tuple[np.ndarray, ...]:
    cdf = _cdf(channel.table.reshape(channel.in_dims[0], -1))
    flat = _draw(cdf, np.asarray(x, dtype=np.int64), rng.random(len(x)))
    return tuple(np.asarray(a, dtype=np.int16) for a in np.unravel_index(flat, channel.out_dims))


# ------------------------------------------------------------------ decoders

def _rows_to_msgs(cb: NegCodebook, idx: np.ndarray) -> np.ndarray:
    """(k, 1 + extra) with row index first -> (k, 2 + extra) with (m0, s0) split."""
    m0, s0 = np.divmod(idx[:, 0], cb.sizes["S0"])
    return np.column_stack([m0, s0, idx[:, 1:]])


def y1_mask(cfg: NegSchemeConfig, cb: NegCodebook, y1: np.ndarray) -> np.ndarray:
    ts = cfg.typical_set((0, 1, 2, 3, 4))
    return ts.mask([cb.U[:, None, None, None, :], cb.V2_sent()[:, :, :, None, :],
                    cb.V3_sent()[:, :, :, None, :], cb.X, y1])


def decode_y1(cfg: NegSchemeConfig, cb: NegCodebook, y1: np.ndarray, sent) -> Verdict:
    mask = y1_mask(cfg, cb, y1)
    return unique_verdict(_rows_to_msgs(cb, np.argwhere(mask)), tuple(sent))


def _k_axes(k: int):
    # (U, satellite, Y) and (U, Y) axes of the 7-variable joint for receiver k
    return ((0, 1, 5), (0, 5)) if k == 2 else ((0, 2, 6), (0, 6))


def receiver_masks(cfg: NegSchemeConfig, cb: NegCodebook, y: np.ndarray, k: int):
    """(full, cloud): typicality of (U, V_k(t), y) per (row, t) and of (U, y) per row."""
    full_axes, cloud_axes = _k_axes(k)
    V = cb.V2 if k == 2 else cb.V3
    full = cfg.typical_set(full_axes).mask([cb.U[:, None, :], V, y])
    uniq, inv = cb.distinct_U()
    cloud = cfg.typical_set(cloud_axes).mask([uniq, y])[inv]
    return full, cloud


def nonunique_verdict(cb, full, sent) -> Verdict:
    return unique_verdict(_rows_to_msgs(cb, np.flatnonzero(full.any(axis=1))[:, None]), tuple(sent))


def comp1_verdict(cb, cloud, sent) -> Verdict:
    return unique_verdict(_rows_to_msgs(cb, np.flatnonzero(cloud)[:, None]), tuple(sent))


def comp2_verdict(cb, full, sent_with_t) -> Verdict:
    return unique_verdict(_rows_to_msgs(cb, np.argwhere(full)), tuple(sent_with_t))


def aux_verdict(c1: Verdict, c2: Verdict, sent) -> Verdict:
    outs = [None if c1.declared_error else c1.decoded,
            None if c2.declared_error else c2.decoded[:2]]
    return combine_auxiliary(outs, [c1, c2], tuple(sent))


def _sent_t(cb: NegCodebook, msg, k: int) -> int:
    m0, s0, s2, s3, _ = msg
    return int(cb.pair[cb.row_index(m0, s0), s2, s3, 0 if k == 2 else 1])


def decode_nonunique(cfg, cb, y, msg, k: int = 2) -> Verdict:
    full, _ = receiver_masks(cfg, cb, y, k)
    return nonunique_verdict(cb, full, msg[:2])


def decode_component(cfg, cb, y, msg, which: int, k: int = 2) -> Verdict:
    full, cloud = receiver_masks(cfg, cb, y, k)
    if which == 1:
        return comp1_verdict(cb, cloud, msg[:2])
    if which == 2:
        return comp2_verdict(cb, full, tuple(msg[:2]) + (_sent_t(cb, msg, k),))
    raise ValueError("component must be 1 or 2")


def decode_auxiliary(cfg, cb, y, msg, k: int = 2) -> Verdict:
    full, cloud = receiver_masks(cfg, cb, y, k)
    c1 = comp1_verdict(cb, cloud, msg[:2])
    c2 = comp2_verdict(cb, full, tuple(msg[:2]) + (_sent_t(cb, msg, k),))
    return aux_verdict(c1, c2, msg[:2])


def decode_y2_nonunique(cfg, cb, y2, msg) -> Verdict:
    return decode_nonunique(cfg, cb, y2, msg, 2)


def decode_y2_component(cfg, cb, y2, msg, which: int) -> Verdict:
    return decode_component(cfg, cb, y2, msg, which, 2)


def decode_y2_auxiliary(cfg, cb, y2, msg) -> Verdict:
    return decode_auxiliary(cfg, cb, y2, msg, 2)


# ------------------------------------------------------------------ trials

RECEIVERS = ("y1", "y2", "y3")


def decoder_names(receivers=RECEIVERS) -> tuple[str, ...]:
    out = []
    for r in receivers:
        if r == "y1":
            out.append("y1")
        else:
            out += [f"{r}_nonunique", f"{r}_comp1", f"{r}_comp2", f"{r}_aux"]
    return tuple(out)


def _tally_receiver(stats: TrialStats, tag: str, nu: Verdict, c1: Verdict, c2: Verdict, aux: Verdict):
    if c2.kind is Kind.CORRECT:
        stats.bump(f"{tag}_comp2_correct")
        if nu.kind is not Kind.CORRECT:
            stats.bump(f"{tag}_comp2_implies_nonunique_violation")
    if c1.kind is Kind.CORRECT:
        stats.bump(f"{tag}_comp1_correct")
        if nu.kind in (Kind.WRONG, Kind.AMBIGUOUS):
            stats.bump(f"{tag}_comp1_implies_nonunique_violation")
    # the auxiliary rule restated independently of combine_auxiliary
    d1 = None if c1.declared_error else c1.decoded
    d2 = None if c2.declared_error else c2.decoded[:2]
    should_err = (d1 is None and d2 is None) or (d1 is not None and d2 is not None and d1 != d2)
    if should_err != aux.declared_error:
        stats.bump(f"{tag}_aux_rule_violation")
    elif not should_err and aux.decoded != (d1 if d1 is not None else d2):
        stats.bump(f"{tag}_aux_rule_violation")
    stats.bump(f"{tag}_aux_rule_checked")


def run_trials(cfg: NegSchemeConfig, trials: int, fresh_codebook_every: int = 1,
               receivers=RECEIVERS) -> TrialStats:
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if fresh_codebook_every < 1:
        raise ValueError("fresh_codebook_every must be >= 1")
    receivers = tuple(receivers)
    stats = TrialStats(cfg.n, cfg.eps, decoder_names(receivers))
    s = cfg.sizes
    cb = None
    for t in range(trials):
        if t % fresh_codebook_every == 0:
            cb = generate_codebook(cfg, np.random.default_rng(stream_seed(cfg.seed, CODEBOOK, t // fresh_codebook_every)))
        rng = np.random.default_rng(stream_seed(cfg.seed, TRIAL, t))
        msg = tuple(int(rng.integers(s[k])) for k in ("R0", "S0", "S2", "S3", "S1"))
        x, failed = encode(cb, msg)
        y1, y2, y3 = transmit(cfg.channel, x, rng)
        stats.enc_fail += failed
        v = {}
        if "y1" in receivers:
            v["y1"] = decode_y1(cfg, cb, y1, msg)
        for tag, k, y in (("y2", 2, y2), ("y3", 3, y3)):
            if tag not in receivers:
                continue
            full, cloud = receiver_masks(cfg, cb, y, k)
            nu = nonunique_verdict(cb, full, msg[:2])
            c1 = comp1_verdict(cb, cloud, msg[:2])
            c2 = comp2_verdict(cb, full, tuple(msg[:2]) + (_sent_t(cb, msg, k),))
            aux = aux_verdict(c1, c2, msg[:2])
            v.update({f"{tag}_nonunique": nu, f"{tag}_comp1": c1, f"{tag}_comp2": c2, f"{tag}_aux": aux})
            _tally_receiver(stats, tag, nu, c1, c2, aux)
        stats.record(v)
    return stats


# ------------------------------------------------------------------ bin statistics

@dataclass
class BinStats:
    n1: np.ndarray
    n2: np.ndarray
    n3: np.ndarray
    p_l: float
    p_u: float
    N: int
    delta: float
    i_v2v3: float

    @property
    def draws(self) -> int:
        return len(self.n2)

    def rows(self) -> list[dict]:
        return [{"draw": i, "N1": int(a), "N2": int(b), "N3": int(c), "N": self.N,
                 "p_l": self.p_l, "p_u": self.p_u}
                for i, (a, b, c) in enumerate(zip(self.n1, self.n2, self.n3))]


def bin_statistics(cfg: NegSchemeConfig, draws: int, delta: float) -> BinStats:
    """Counts of typical satellite pairs in the focal product bin, per codebook draw.

    With a single product bin, N2 and N3 count V3 rows typical with the
    second and third V2 rows; N1 counts typical pairs over all V2 rows but
    the second.
    """
    s = cfg.sizes
    if s["S2"] != 1 or s["S3"] != 1:
        raise ValueError("bin statistics need M(S2) = M(S3) = 1")
    if s["T2"] < 3:
        raise ValueError("bin statistics need M(T2) >= 3")
    if draws < 1:
        raise ValueError("draws must be >= 1")
    n1, n2, n3 = (np.zeros(draws, dtype=np.int64) for _ in range(3))
    for d in range(draws):
        rng = np.random.default_rng(stream_seed(cfg.seed, BINS, d))
        U, V2, V3 = _satellites(cfg, rng, 1)
        typ = _pair_mask(cfg, U, V2, V3)[0]
        n2[d] = typ[1].sum()
        n3[d] = typ[2].sum()
        n1[d] = typ.sum() - n2[d]
    i = prob.conditional_mutual_information(cfg.source, [1], [2], [0])
    i = max(i, 0.0)
    p_l = 2.0 ** (-cfg.n * (i + delta))
    p_u = 2.0 ** (-cfg.n * (i - delta))
    return BinStats(n1, n2, n3, p_l, p_u, s["T3"], delta, i)


ALPHA1 = 2 - math.exp(0.5)
BETA1 = math.exp(0.5)
ALPHA2 = 0.5 - math.exp(-1)
BETA2 = 1.0


@dataclass(frozen=True)
class ConcentrationReport:
    draws: int
    N: int
    p_l: float
    p_u: float
    alpha1: float
    beta1: float
    alpha2: float
    beta2: float
    upper_tail: float       # empirical Pr(N2 > 2 N p_u)
    upper_bound: float
    upper_slack: float
    lower_tail: float       # empirical Pr(N3 < N p_l / 2)
    lower_bound: float
    lower_slack: float

    @property
    def upper_pass(self) -> bool:
        return self.upper_tail <= self.upper_bound + self.upper_slack

    @property
    def lower_pass(self) -> bool:
        return self.lower_tail <= self.lower_bound + self.lower_slack

    @property
    def passed(self) -> bool:
        return self.upper_pass and self.lower_pass

    def to_json(self) -> dict:
        d = dict(self.__dict__)
        d.update(upper_pass=self.upper_pass, lower_pass=self.lower_pass, passed=self.passed)
        return d


def _slack(bound: float, draws: int) -> float:
    q = min(max(bound, 0.0), 1.0)
    return 3 * math.sqrt(q * (1 - q) / draws)


def concentration_check(stats: BinStats, min_draws: int = 100) -> ConcentrationReport:
    if stats.draws < min_draws:
        raise ValueError(f"need at least {min_draws} codebook draws, got {stats.draws}")
    N, pl, pu = stats.N, stats.p_l, stats.p_u
    up = float(np.mean(stats.n2 > 2 * N * pu))
    lo = float(np.mean(stats.n3 < N * pl / 2))
    ub = BETA1 * math.exp(-ALPHA1 * N * pl)
    lb = BETA2 * math.exp(-ALPHA2 * N * pl)
    return ConcentrationReport(stats.draws, N, pl, pu, ALPHA1, BETA1, ALPHA2, BETA2,
                               up, ub, _slack(ub, stats.draws), lo, lb, _slack(lb, stats.draws))
