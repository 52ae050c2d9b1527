"""Decoder verdicts and per-decoder trial tallies shared by both codecs."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np


class Kind(str, enum.Enum):
    CORRECT = "correct"
    WRONG = "wrong"
    NO_CANDIDATE = "no_candidate"
    AMBIGUOUS = "ambiguous"


@dataclass(frozen=True)
class Verdict:
    kind: Kind
    decoded: tuple[int, ...] | None = None

    @property
    def is_error(self) -> bool:
        return self.kind is not Kind.CORRECT

    @property
    def declared_error(self) -> bool:
        """The decoder itself signalled failure (no unique candidate)."""
        return self.kind in (Kind.NO_CANDIDATE, Kind.AMBIGUOUS)


def unique_verdict(candidates: np.ndarray, truth: tuple[int, ...]) -> Verdict:
    """candidates: (k, d) integer array of candidate index tuples."""
    candidates = np.asarray(candidates)
    if len(candidates) == 0:
        return Verdict(Kind.NO_CANDIDATE)
    if len(candidates) > 1:
        return Verdict(Kind.AMBIGUOUS)
    got = tuple(int(v) for v in np.ravel(candidates[0]))
    if got == tuple(truth):
        return Verdict(Kind.CORRECT, got)
    return Verdict(Kind.WRONG, got)


def combine_auxiliary(outputs: list[tuple[int, ...] | None], components: list[Verdict],
                      truth: tuple[int, ...]) -> Verdict:
    """Auxiliary rule: error iff every component errs or the outputs disagree.

    `outputs` are the message indices each non-erring component reports
    (None for components that declared an error). A total failure maps to
    NoCandidate when every component found nothing, else Ambiguous; a
    disagreement maps to Ambiguous.
    """
    got = [o for o in outputs if o is not None]
    if not got:
        if all(c.kind is Kind.NO_CANDIDATE for c in components):
            return Verdict(Kind.NO_CANDIDATE)
        return Verdict(Kind.AMBIGUOUS)
    if any(o != got[0] for o in got[1:]):
        return Verdict(Kind.AMBIGUOUS)
    if got[0] == tuple(truth):
        return Verdict(Kind.CORRECT, got[0])
    return Verdict(Kind.WRONG, got[0])


def wilson_halfwidth(errors: int, trials: int, z: float = 1.959963984540054) -> float:
    """Half-length of the Wilson score interval for a binomial proportion."""
    if trials <= 0:
        return float("nan")
    p = errors / trials
    denom = 1 + z * z / trials
    return z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom


CSV_COLUMNS = ("decoder", "n", "eps", "trials", "correct", "wrong", "ambiguous",
               "no_candidate", "enc_fail", "error_rate", "ci95_halfwidth")


@dataclass
class TrialStats:
    n: int
    eps: float
    decoders: tuple[str, ...]
    trials: int = 0
    enc_fail: int = 0
    counts: dict[str, dict[Kind, int]] = field(default_factory=dict)
    crosstab: dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        for d in self.decoders:
            self.counts.setdefault(d, {k: 0 for k in Kind})

    def record(self, verdicts: dict[str, Verdict]):
        for d in self.decoders:
            self.counts[d][verdicts[d].kind] += 1
        self.trials += 1

    def bump(self, key: str, by: int = 1):
        self.crosstab[key] = self.crosstab.get(key, 0) + by

    def errors(self, decoder: str) -> int:
        c = self.counts[decoder]
        return self.trials - c[Kind.CORRECT]

    def error_rate(self, decoder: str) -> float:
        return self.errors(decoder) / self.trials if self.trials else float("nan")

    def ci95(self, decoder: str) -> float:
        return wilson_halfwidth(self.errors(decoder), self.trials)

    def violations(self) -> dict[str, int]:
        return {k: v for k, v in self.crosstab.items() if k.endswith("_violation")}

    def rows(self) -> list[dict]:
        out = []
        for d in self.decoders:
            c = self.counts[d]
            out.append({
                "decoder": d, "n": self.n, "eps": self.eps, "trials": self.trials,
                "correct": c[Kind.CORRECT], "wrong": c[Kind.WRONG],
                "ambiguous": c[Kind.AMBIGUOUS], "no_candidate": c[Kind.NO_CANDIDATE],
                "enc_fail": self.enc_fail, "error_rate": self.error_rate(d),
                "ci95_halfwidth": self.ci95(d),
            })
        return out

    def __eq__(self, other):
        if not isinstance(other, TrialStats):
            return NotImplemented
        return (self.n, self.eps, self.decoders, self.trials, self.enc_fail, self.counts,
                self.crosstab) == (other.n, other.eps, other.decoders, other.trials,
                                   other.enc_fail, other.counts, other.crosstab)
