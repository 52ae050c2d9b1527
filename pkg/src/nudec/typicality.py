"""Robust joint typicality, vectorized over many candidate tuples.

A tuple of length-n sequences is typical for a reference pmf p when every
joint symbol a has |count(a) - n p(a)| <= eps n p(a). Zero-probability
symbols therefore may not occur at all.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .prob import JointPmf

# absolute slack on counts, guards the float boundary |c - np| == eps np
COUNT_TOL = 1e-9
CHUNK = 1 << 18


class TypicalSet:
    """Precomputed typicality test for one reference pmf, eps and n."""

    def __init__(self, ref: JointPmf, eps: float, n: int):
        if eps <= 0:
            raise ValueError("eps must be positive")
        if n < 1:
            raise ValueError("n must be positive")
        self.ref, self.eps, self.n = ref, float(eps), int(n)
        p = ref.flat
        self.support = p > 0
        self.lo = n * p * (1 - eps) - COUNT_TOL
        self.hi = n * p * (1 + eps) + COUNT_TOL
        self.size = p.size
        dims = ref.dims
        self._strides = [int(np.prod(dims[i + 1:], dtype=np.int64)) for i in range(len(dims))]
        # symbols whose count range admits 0 need no lower check
        self._need_lo = self.lo > 0

    def codes(self, seqs: Sequence[np.ndarray], check: bool = True) -> np.ndarray:
        """Joint symbol index, broadcast over all axes."""
        if len(seqs) != len(self.ref.dims):
            raise ValueError(f"{len(seqs)} sequences for a {len(self.ref.dims)}-variable pmf")
        code = None
        for s, d in zip(seqs, self.ref.dims):
            s = np.asarray(s)
            if check and s.shape[-1] != self.n:
                raise ValueError(f"sequence length {s.shape[-1]} != n={self.n}")
            s = s.astype(np.int64)
            code = s if code is None else code * d + s
        return code

    def _check_codes(self, codes: np.ndarray) -> np.ndarray:
        """codes: (K, n) -> bool (K,)"""
        ok = self.support[codes].all(axis=1)
        idx = np.flatnonzero(ok)
        if idx.size:
            sub = codes[idx]
            k = sub.shape[0]
            flat = (sub + (np.arange(k, dtype=np.int64) * self.size)[:, None]).ravel()
            counts = np.bincount(flat, minlength=k * self.size).reshape(k, self.size)
            good = (counts <= self.hi).all(axis=1)
            if self._need_lo.any():
                good &= (counts[:, self._need_lo] >= self.lo[self._need_lo]).all(axis=1)
            ok[idx] = good
        return ok

    def mask(self, seqs: Sequence[np.ndarray]) -> np.ndarray:
        """Typicality of every tuple in the broadcast of `seqs` (last axis = time)."""
        seqs = [np.asarray(s) for s in seqs]
        if len(seqs) != len(self.ref.dims):
            raise ValueError(f"{len(seqs)} sequences for a {len(self.ref.dims)}-variable pmf")
        shape = np.broadcast_shapes(*[s.shape for s in seqs])
        if shape[-1] != self.n:
            raise ValueError(f"sequence length {shape[-1]} != n={self.n}")
        lead = shape[:-1]
        total = int(np.prod(lead, dtype=np.int64)) if lead else 1
        if total > CHUNK:
            # chunk along the first axis that has extent > 1
            ax = next(i for i, d in enumerate(lead) if d > 1)
            step = max(1, CHUNK // max(1, total // lead[ax]))
            views = [np.broadcast_to(s, shape) for s in seqs]
            parts = []
            for start in range(0, lead[ax], step):
                sl = (slice(None),) * ax + (slice(start, start + step),)
                parts.append(self.mask([v[sl] for v in views]))
            return np.concatenate(parts, axis=ax)
        # scale by stride lazily, one column or one gathered subset at a time, so
        # a large codebook is never converted to int64 as a whole
        arrs = [s.reshape((1,) * (len(shape) - s.ndim) + s.shape) for s in seqs]
        order = sorted(range(len(arrs)), key=lambda i: arrs[i].size)
        arrs = [arrs[i] for i in order]
        strides = [self._strides[i] for i in order]

        def code_at(parts):
            c = parts[0].astype(np.int64) * strides[0]
            for a, st in zip(parts[1:], strides[1:]):
                c = c + a.astype(np.int64) * st
            return c

        # screen on support position by position while most candidates survive
        ok = np.ones(lead, dtype=bool)
        j = 0
        while j < self.n and 8 * np.count_nonzero(ok) > total:
            ok &= self.support[code_at([a[..., j] for a in arrs])]
            j += 1
        alive = np.flatnonzero(ok.reshape(-1))
        idx = np.unravel_index(alive, lead) if lead else ()
        picks = [tuple(i if d > 1 else 0 for i, d in zip(idx, a.shape[:-1])) for a in arrs]
        for jj in range(j, self.n):
            if alive.size == 0:
                break
            keep = self.support[code_at([a[p + (jj,)] for a, p in zip(arrs, picks)])]
            alive = alive[keep]
            picks = [tuple(i[keep] if isinstance(i, np.ndarray) else i for i in p) for p in picks]
        out = np.zeros(total, dtype=bool)
        if alive.size:
            full = code_at([a[p] for a, p in zip(arrs, picks)])
            full = np.broadcast_to(full, (alive.size, self.n))
            out[alive] = self._check_codes(np.ascontiguousarray(full))
        return out.reshape(lead)

    def pair_mask(self, left: Sequence[np.ndarray], right: Sequence[np.ndarray]) -> np.ndarray:
        """Typicality of every (p, q) pairing, batched over a leading axis.

        `left` holds the leading pmf variables, each broadcastable to (B, P, n);
        `right` the remaining ones, broadcastable to (B, Q, n). Joint symbol
        counts come from one batched product of one-hot indicator arrays,
        which beats per-tuple counting when P*Q is large. Returns (B, P, Q).
        """
        k = len(left)
        if k < 1 or k + len(right) != len(self.ref.dims):
            raise ValueError("left and right must split the pmf variables")
        dl = int(np.prod(self.ref.dims[:k]))
        dr = int(np.prod(self.ref.dims[k:]))
        shape_l = np.broadcast_shapes(*[np.shape(s) for s in left])
        shape_r = np.broadcast_shapes(*[np.shape(s) for s in right])
        if len(shape_l) != 3 or len(shape_r) != 3 or shape_l[2] != self.n or shape_r[2] != self.n:
            raise ValueError("sequences must broadcast to (B, P, n) and (B, Q, n)")
        B = max(shape_l[0], shape_r[0])
        P, Q = shape_l[1], shape_r[1]
        cl = np.broadcast_to(self._sub_codes(left, self.ref.dims[:k]), (B, P, self.n))
        cr = np.broadcast_to(self._sub_codes(right, self.ref.dims[k:]), (B, Q, self.n))
        lo = self.lo.reshape(dl, dr).astype(np.float32)
        hi = self.hi.reshape(dl, dr).astype(np.float32)
        eye_l = np.eye(dl, dtype=np.float32)
        eye_r = np.eye(dr, dtype=np.float32)
        out = np.empty((B, P, Q), dtype=bool)
        step = max(1, CHUNK * 16 // max(1, P * Q * dl * dr))
        for s in range(0, B, step):
            a = eye_l[cl[s:s + step]]                       # (b, P, n, dl)
            b = eye_r[cr[s:s + step]]                       # (b, Q, n, dr)
            a = a.transpose(0, 1, 3, 2).reshape(len(a), P * dl, self.n)
            b = b.transpose(0, 2, 1, 3).reshape(len(b), self.n, Q * dr)
            counts = np.matmul(a, b).reshape(len(a), P, dl, Q, dr).transpose(0, 1, 3, 2, 4)
            out[s:s + step] = ((counts >= lo) & (counts <= hi)).all(axis=(3, 4))
        return out

    @staticmethod
    def _sub_codes(seqs, dims) -> np.ndarray:
        shape = np.broadcast_shapes(*[np.shape(s) for s in seqs])
        code = np.zeros(shape, dtype=np.int64)
        for s, d in zip(seqs, dims):
            code = code * d + np.asarray(s, dtype=np.int64)
        return code

    def check(self, seqs: Sequence[np.ndarray]) -> bool:
        return bool(self.mask([np.asarray(s).reshape(-1) for s in seqs]))


def is_jointly_typical(seqs: Sequence[np.ndarray], ref: JointPmf, eps: float) -> bool:
    lengths = {len(np.asarray(s).reshape(-1)) for s in seqs}
    if len(lengths) != 1:
        raise ValueError(f"sequence lengths differ: {sorted(lengths)}")
    return TypicalSet(ref, eps, lengths.pop()).check(seqs)
