"""Finite-alphabet pmfs and information measures (base 2).

Measures are returned unclamped; tiny negative values from rounding are
left for callers to clamp when reporting.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

NORM_TOL = 1e-12


@dataclass(frozen=True)
class Alphabet:
    size: int
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.size < 1:
            raise ValueError("alphabet size must be >= 1")
        if self.labels is not None:
            if len(self.labels) != self.size or len(set(self.labels)) != self.size:
                raise ValueError("labels must be distinct and match the size")


def _as_dims(dims) -> tuple[int, ...]:
    return tuple(int(d.size if isinstance(d, Alphabet) else d) for d in dims)


@dataclass(frozen=True, eq=False)
class JointPmf:
    """Pmf over a product of finite alphabets; `probs` has shape `dims`."""

    dims: tuple[int, ...]
    probs: np.ndarray = field(repr=False)

    def __init__(self, dims, probs, tol: float = NORM_TOL):
        dims = _as_dims(dims)
        if any(d < 1 for d in dims):
            raise ValueError("alphabet sizes must be >= 1")
        arr = np.asarray(probs, dtype=float)
        if arr.size != int(np.prod(dims, dtype=np.int64)):
            raise ValueError(f"{arr.size} entries do not fit dims {dims}")
        arr = arr.reshape(dims).copy()
        if np.any(arr < 0) or not np.all(np.isfinite(arr)):
            raise ValueError("probabilities must be finite and nonnegative")
        total = arr.sum()
        if abs(total - 1.0) > tol:
            raise ValueError(f"probabilities sum to {total!r}, not 1")
        arr /= total
        arr.setflags(write=False)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "probs", arr)

    @property
    def flat(self) -> np.ndarray:
        return self.probs.ravel()

    @property
    def arity(self) -> int:
        return len(self.dims)

    def to_json(self) -> dict:
        return {"dims": list(self.dims), "probs": self.probs.tolist()}

    @classmethod
    def from_json(cls, obj: dict, tol: float = NORM_TOL) -> "JointPmf":
        return cls(obj["dims"], np.asarray(obj["probs"], dtype=float).ravel(), tol=tol)

    @classmethod
    def uniform(cls, dims) -> "JointPmf":
        dims = _as_dims(dims)
        return cls(dims, np.full(dims, 1.0 / np.prod(dims)))

    @classmethod
    def point(cls, dims, index) -> "JointPmf":
        dims = _as_dims(dims)
        arr = np.zeros(dims)
        arr[tuple(index)] = 1.0
        return cls(dims, arr)


@dataclass(frozen=True, eq=False)
class CondPmf:
    """Conditional pmf; `table[in_idx + out_idx]`, one row per input index.

    Rows of zero-mass inputs (from `condition`) are flagged in `defined`
    and hold zeros.
    """

    in_dims: tuple[int, ...]
    out_dims: tuple[int, ...]
    table: np.ndarray = field(repr=False)
    defined: np.ndarray = field(repr=False)

    def __init__(self, in_dims, out_dims, table, defined=None, tol: float = NORM_TOL):
        in_dims, out_dims = _as_dims(in_dims), _as_dims(out_dims)
        arr = np.asarray(table, dtype=float).reshape(in_dims + out_dims).copy()
        if np.any(arr < 0):
            raise ValueError("probabilities must be nonnegative")
        sums = arr.reshape(in_dims + (-1,)).sum(axis=-1)
        if defined is None:
            defined = np.ones(in_dims, dtype=bool)
        defined = np.asarray(defined, dtype=bool).reshape(in_dims).copy()
        bad = defined & (np.abs(sums - 1.0) > tol)
        if np.any(bad):
            idx = tuple(int(i) for i in np.argwhere(bad)[0])
            raise ValueError(f"row {idx} sums to {sums[idx]!r}, not 1")
        arr.setflags(write=False)
        defined.setflags(write=False)
        object.__setattr__(self, "in_dims", in_dims)
        object.__setattr__(self, "out_dims", out_dims)
        object.__setattr__(self, "table", arr)
        object.__setattr__(self, "defined", defined)

    def row(self, *idx) -> JointPmf:
        if not self.defined[idx]:
            raise ValueError(f"row {idx} is undefined (zero-mass conditioning event)")
        return JointPmf(self.out_dims, self.table[idx])

    @property
    def rows(self) -> list[JointPmf | None]:
        out = []
        for idx in np.ndindex(*self.in_dims):
            out.append(self.row(*idx) if self.defined[idx] else None)
        return out

    def to_json(self) -> dict:
        return {"in_dims": list(self.in_dims), "out_dims": list(self.out_dims),
                "probs": self.table.tolist()}

    @classmethod
    def from_json(cls, obj: dict, tol: float = NORM_TOL) -> "CondPmf":
        return cls(obj["in_dims"], obj["out_dims"], np.asarray(obj["probs"], dtype=float), tol=tol)

    @classmethod
    def deterministic(cls, in_dims, out_dims, fn) -> "CondPmf":
        """Channel whose output index tuple is fn(*input index)."""
        in_dims, out_dims = _as_dims(in_dims), _as_dims(out_dims)
        arr = np.zeros(in_dims + out_dims)
        for idx in np.ndindex(*in_dims):
            out = fn(*idx)
            if not isinstance(out, tuple):
                out = (out,)
            arr[idx + tuple(out)] = 1.0
        return cls(in_dims, out_dims, arr)


def _check_axes(p: JointPmf, axes: Iterable[int]) -> tuple[int, ...]:
    axes = tuple(int(a) for a in axes)
    for a in axes:
        if not 0 <= a < p.arity:
            raise IndexError(f"axis {a} out of range for arity {p.arity}")
    if len(set(axes)) != len(axes):
        raise ValueError(f"repeated axes in {axes}")
    return axes


def marginal_array(p: JointPmf, keep: Sequence[int]) -> np.ndarray:
    keep = _check_axes(p, keep)
    rest = tuple(a for a in range(p.arity) if a not in keep)
    arr = p.probs.sum(axis=rest) if rest else p.probs
    # sum keeps remaining axes in ascending order; reorder to `keep`
    order = sorted(keep)
    return np.transpose(arr, [order.index(a) for a in keep])


def marginalize(p: JointPmf, keep: Sequence[int]) -> JointPmf:
    keep = _check_axes(p, keep)
    arr = marginal_array(p, keep)
    return JointPmf([p.dims[a] for a in keep], arr, tol=1e-9)


def condition(p: JointPmf, given: Sequence[int]) -> CondPmf:
    """p(rest | given); rest keeps its original axis order."""
    given = _check_axes(p, given)
    rest = tuple(a for a in range(p.arity) if a not in given)
    arr = np.transpose(p.probs, given + rest)
    g_dims = tuple(p.dims[a] for a in given)
    r_dims = tuple(p.dims[a] for a in rest)
    pg = arr.reshape(g_dims + (-1,)).sum(axis=-1)
    defined = pg > 0
    safe = np.where(defined, pg, 1.0).reshape(g_dims + (1,) * len(r_dims))
    table = np.where(defined.reshape(safe.shape), arr / safe, 0.0)
    return CondPmf(g_dims, r_dims, table, defined=defined, tol=1e-9)


def chain_compose(source: JointPmf, ch: CondPmf, x_axis: int = -1) -> JointPmf:
    """Joint of source and channel outputs: source(..., x, ...) * ch(y | x).

    The channel input is the single source axis `x_axis`; outputs are
    appended after the source axes.
    """
    x_axis = x_axis % source.arity
    if ch.in_dims != (source.dims[x_axis],):
        raise ValueError(f"channel input dims {ch.in_dims} do not match source axis "
                         f"{x_axis} of size {source.dims[x_axis]}")
    src = source.probs
    shape = [1] * source.arity + list(ch.out_dims)
    shape[x_axis] = ch.in_dims[0]
    joint = src.reshape(src.shape + (1,) * len(ch.out_dims)) * ch.table.reshape(shape)
    return JointPmf(source.dims + ch.out_dims, joint, tol=1e-9)


def _h(arr: np.ndarray) -> float:
    q = arr[arr > 0]
    return float(-(q * np.log2(q)).sum())


def entropy(p: JointPmf, axes: Sequence[int] | None = None) -> float:
    if axes is None:
        return _h(p.probs)
    axes = _check_axes(p, axes)
    if not axes:
        return 0.0
    return _h(marginal_array(p, axes))


def _disjoint(*sets):
    seen: set[int] = set()
    for s in sets:
        s = set(s)
        if seen & s:
            raise ValueError("index sets must be disjoint")
        seen |= s


def mutual_information(p: JointPmf, a: Sequence[int], b: Sequence[int]) -> float:
    a, b = tuple(a), tuple(b)
    _disjoint(a, b)
    return entropy(p, a) + entropy(p, b) - entropy(p, a + b)


def conditional_mutual_information(p: JointPmf, a: Sequence[int], b: Sequence[int],
                                   c: Sequence[int]) -> float:
    a, b, c = tuple(a), tuple(b), tuple(c)
    _disjoint(a, b, c)
    return entropy(p, a + c) + entropy(p, b + c) - entropy(p, a + b + c) - entropy(p, c)


def conditional_entropy(p: JointPmf, a: Sequence[int], c: Sequence[int]) -> float:
    a, c = tuple(a), tuple(c)
    _disjoint(a, c)
    return entropy(p, a + c) - entropy(p, c)


def pushforward(p: JointPmf, out_dims, fn) -> JointPmf:
    """Distribution of fn(*atom) for atoms of p; fn returns an index tuple."""
    out_dims = _as_dims(out_dims)
    arr = np.zeros(out_dims)
    for idx in np.ndindex(*p.dims):
        w = p.probs[idx]
        if w > 0:
            arr[tuple(fn(*idx))] += w
    return JointPmf(out_dims, arr, tol=1e-9)


def random_joint(rng: np.random.Generator, dims, alpha: float = 1.0) -> JointPmf:
    dims = _as_dims(dims)
    w = rng.dirichlet(np.full(int(np.prod(dims)), alpha))
    return JointPmf(dims, w, tol=1e-9)


def random_channel(rng: np.random.Generator, in_size: int, out_dims, alpha: float = 1.0) -> CondPmf:
    out_dims = _as_dims(out_dims)
    k = int(np.prod(out_dims))
    rows = rng.dirichlet(np.full(k, alpha), size=in_size)
    return CondPmf((in_size,), out_dims, rows.reshape((in_size,) + out_dims), tol=1e-9)
