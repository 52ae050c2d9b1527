"""Rate-region constraint systems for the three-receiver broadcast channel
with degraded message sets, their (R0, R1) projections and comparisons.

Rate variables, in fixed order: R0 (common message), S0..S3 (split of the
private message, R1 = S0+S1+S2+S3), T2, T3 (satellite codebook rates).
"""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, fields

import numpy as np

from . import prob
from .fme import ConstraintSystem, LinearConstraint, drop_variable, eliminate

VARS = ("R0", "S0", "S1", "S2", "S3", "T2", "T3")
CLAMP_TOL = 1e-12


@dataclass(frozen=True)
class RateTuple:
    R0: float = 0.0
    S0: float = 0.0
    S1: float = 0.0
    S2: float = 0.0
    S3: float = 0.0
    T2: float = 0.0
    T3: float = 0.0

    @property
    def R1(self) -> float:
        return self.S0 + self.S1 + self.S2 + self.S3

    def as_vector(self) -> np.ndarray:
        return np.array([getattr(self, v) for v in VARS], dtype=float)

    @classmethod
    def from_vector(cls, x) -> "RateTuple":
        return cls(*(float(v) for v in x))

    def is_valid(self, tol: float = 0.0) -> bool:
        return (min(self.R0, self.S0, self.S1, self.S2, self.S3) >= -tol
                and self.T2 >= self.S2 - tol and self.T3 >= self.S3 - tol)

    def to_json(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class MIProfile:
    iX_Y1_gUV2V3: float
    iX_Y1_gUV3: float
    iX_Y1_gUV2: float
    iX_Y1_gU: float
    iX_Y1: float
    iU_Y2: float
    iUV2_Y2: float
    iV2_Y2_gU: float
    iU_Y3: float
    iUV3_Y3: float
    iV3_Y3_gU: float
    iV2_V3_gU: float

    def __post_init__(self):
        for f in fields(self):
            if getattr(self, f.name) < -CLAMP_TOL:
                raise ValueError(f"{f.name} is negative")

    def chain_residuals(self) -> tuple[float, float]:
        return (self.iUV2_Y2 - self.iU_Y2 - self.iV2_Y2_gU,
                self.iUV3_Y3 - self.iU_Y3 - self.iV3_Y3_gU)

    def replace(self, **kw) -> "MIProfile":
        d = asdict(self)
        d.update(kw)
        return MIProfile(**d)

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def zero(cls) -> "MIProfile":
        return cls(*([0.0] * 12))


# axes of the seven-variable joint
U, V2, V3, X, Y1, Y2, Y3 = range(7)


def mi_profile(joint7: prob.JointPmf) -> MIProfile:
    if joint7.arity != 7:
        raise ValueError(f"expected a joint over 7 variables, got {joint7.arity}")
    mi = prob.mutual_information
    cmi = prob.conditional_mutual_information
    vals = dict(
        iX_Y1_gUV2V3=cmi(joint7, [X], [Y1], [U, V2, V3]),
        iX_Y1_gUV3=cmi(joint7, [X], [Y1], [U, V3]),
        iX_Y1_gUV2=cmi(joint7, [X], [Y1], [U, V2]),
        iX_Y1_gU=cmi(joint7, [X], [Y1], [U]),
        iX_Y1=mi(joint7, [X], [Y1]),
        iU_Y2=mi(joint7, [U], [Y2]),
        iUV2_Y2=mi(joint7, [U, V2], [Y2]),
        iV2_Y2_gU=cmi(joint7, [V2], [Y2], [U]),
        iU_Y3=mi(joint7, [U], [Y3]),
        iUV3_Y3=mi(joint7, [U, V3], [Y3]),
        iV3_Y3_gU=cmi(joint7, [V3], [Y3], [U]),
        iV2_V3_gU=cmi(joint7, [V2], [V3], [U]),
    )
    return MIProfile(**{k: max(v, 0.0) for k, v in vals.items()})


def _row(label: str, rel: str, rhs: float, **coef) -> LinearConstraint:
    return LinearConstraint(tuple(coef.get(v, 0) for v in VARS), rel, rhs, label)


def _common_rows(mi: MIProfile) -> list[LinearConstraint]:
    return [
        _row("split:T2>=S2", ">=", 0.0, T2=1, S2=-1),
        _row("split:T3>=S3", ">=", 0.0, T3=1, S3=-1),
        _row("split:S0>=0", ">=", 0.0, S0=1),
        _row("split:S1>=0", ">=", 0.0, S1=1),
        _row("split:S2>=0", ">=", 0.0, S2=1),
        _row("split:S3>=0", ">=", 0.0, S3=1),
        _row("split:R0>=0", ">=", 0.0, R0=1),
        _row("encoding", ">=", mi.iV2_V3_gU, T2=1, T3=1, S2=-1, S3=-1),
        _row("y1:S1", "<=", mi.iX_Y1_gUV2V3, S1=1),
        _row("y1:S1+S2", "<=", mi.iX_Y1_gUV3, S1=1, S2=1),
        _row("y1:S1+S3", "<=", mi.iX_Y1_gUV2, S1=1, S3=1),
        _row("y1:S1+S2+S3", "<=", mi.iX_Y1_gU, S1=1, S2=1, S3=1),
        _row("y1:all", "<=", mi.iX_Y1, R0=1, S0=1, S1=1, S2=1, S3=1),
    ]


def _sat_sum(k: int, mi: MIProfile) -> LinearConstraint:
    if k == 2:
        return _row("y2:nonunique", "<=", mi.iUV2_Y2, R0=1, S0=1, T2=1)
    return _row("y3:nonunique", "<=", mi.iUV3_Y3, R0=1, S0=1, T3=1)


def build_nonunique_system(mi: MIProfile) -> ConstraintSystem:
    rows = _common_rows(mi) + [_sat_sum(2, mi), _sat_sum(3, mi)]
    return ConstraintSystem(VARS, tuple(rows), "nonunique")


def regime_rows(k: int, regime: str, mi: MIProfile, keep_sat_sum: bool = True) -> list[LinearConstraint]:
    """Decoding constraints at receiver k (2 or 3) under regime 'a' or 'b'.

    Regime a decodes the cloud center alone; regime b decodes cloud center
    and satellite jointly. With keep_sat_sum the regime-a rows also keep
    the non-unique satellite-sum bound, so each regime is a sub-case of
    the non-unique system.
    """
    iu = mi.iU_Y2 if k == 2 else mi.iU_Y3
    iv = mi.iV2_Y2_gU if k == 2 else mi.iV3_Y3_gU
    t = "T2" if k == 2 else "T3"
    if regime == "a":
        rows = [_row(f"y{k}:a", "<=", iu, R0=1, S0=1)]
        if keep_sat_sum:
            rows.append(_sat_sum(k, mi))
        return rows
    if regime == "b":
        return [_sat_sum(k, mi), _row(f"y{k}:b", "<=", iv, **{t: 1})]
    raise ValueError(f"unknown regime {regime!r}")


def build_jointunique_systems(mi: MIProfile, keep_sat_sum: bool = True) -> list[ConstraintSystem]:
    out = []
    for r2 in "ab":
        for r3 in "ab":
            rows = _common_rows(mi) + regime_rows(2, r2, mi, keep_sat_sum) + \
                regime_rows(3, r3, mi, keep_sat_sum)
            out.append(ConstraintSystem(VARS, tuple(rows), r2 + r3))
    return out


# ---------------------------------------------------------------- projection

@dataclass(frozen=True)
class Region2D:
    """{a*R0 + b*R1 <= c for each halfplane} within the nonnegative orthant."""

    halfplanes: tuple[tuple[int, int, float], ...]
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "halfplanes",
                           tuple((int(a), int(b), float(c)) for a, b, c in self.halfplanes))

    @property
    def is_empty(self) -> bool:
        return len(self.vertices()) == 0

    def contains(self, r0: float, r1: float, tol: float = 0.0) -> bool:
        if r0 < -tol or r1 < -tol:
            return False
        return all(a * r0 + b * r1 <= c + tol for a, b, c in self.halfplanes)

    def _all_lines(self):
        return list(self.halfplanes) + [(-1, 0, 0.0), (0, -1, 0.0)]

    def vertices(self, tol: float = 1e-9) -> list[tuple[float, float]]:
        lines = self._all_lines()
        pts = []
        for i in range(len(lines)):
            for j in range(i + 1, len(lines)):
                a1, b1, c1 = lines[i]
                a2, b2, c2 = lines[j]
                det = a1 * b2 - a2 * b1
                if det == 0:
                    continue
                x = (c1 * b2 - c2 * b1) / det
                y = (a1 * c2 - a2 * c1) / det
                if all(a * x + b * y <= c + tol for a, b, c in lines):
                    if not any(abs(x - p) <= tol and abs(y - q) <= tol for p, q in pts):
                        pts.append((x, y))
        if len(pts) > 2:
            cx = sum(p for p, _ in pts) / len(pts)
            cy = sum(q for _, q in pts) / len(pts)
            pts.sort(key=lambda v: math.atan2(v[1] - cy, v[0] - cx))
        return pts

    def to_json(self) -> dict:
        return {"label": self.label,
                "halfplanes": [{"a": a, "b": b, "c": c} for a, b, c in self.halfplanes]}

    @classmethod
    def from_json(cls, obj: dict) -> "Region2D":
        return cls(tuple((h["a"], h["b"], h["c"]) for h in obj["halfplanes"]), obj.get("label", ""))


@dataclass(frozen=True)
class RegionUnion:
    parts: tuple[Region2D, ...]

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(self.parts))

    def contains(self, r0: float, r1: float, tol: float = 0.0) -> bool:
        return any(p.contains(r0, r1, tol) for p in self.parts)


def _substituted(sys: ConstraintSystem) -> ConstraintSystem:
    """Rewrite the system over (R0, R1, S0, S2, S3, T2, T3), S1 = R1-S0-S2-S3."""
    new_vars = ("R0", "R1", "S0", "S2", "S3", "T2", "T3")
    rows = []
    for c in sys.constraints:
        k = dict(zip(sys.variables, c.coeffs))
        s1 = k.get("S1", 0)
        coef = {"R0": k.get("R0", 0), "R1": s1,
                "S0": k.get("S0", 0) - s1, "S2": k.get("S2", 0) - s1, "S3": k.get("S3", 0) - s1,
                "T2": k.get("T2", 0), "T3": k.get("T3", 0)}
        rows.append(LinearConstraint(tuple(coef[v] for v in new_vars), c.relation, c.rhs, c.label))
    return ConstraintSystem(new_vars, tuple(rows), sys.label)


def project_region(sys: ConstraintSystem) -> Region2D:
    """Project a 7-variable rate system onto (R0, R1) by Fourier-Motzkin."""
    if tuple(sys.variables) != VARS:
        raise ValueError(f"system variables must be {VARS}")
    cur = _substituted(sys)
    todo = ["S0", "S2", "S3", "T2", "T3"]
    while todo:
        # eliminate the variable producing the fewest new rows first
        def cost(v):
            j = cur.variables.index(v)
            pos = sum(1 for c in cur.constraints if c.as_le().coeffs[j] > 0)
            neg = sum(1 for c in cur.constraints if c.as_le().coeffs[j] < 0)
            return pos * neg - pos - neg
        v = min(todo, key=cost)
        cur = drop_variable(eliminate(cur, v), v)
        todo.remove(v)
    halfplanes = []
    empty = False
    for c in cur.constraints:
        le = c.as_le()
        a, b = le.coeffs
        if a == 0 and b == 0:
            empty = empty or le.rhs < -1e-12
            continue
        # implied by the nonnegative orthant
        if a <= 0 and b <= 0 and le.rhs >= 0:
            continue
        halfplanes.append((a, b, le.rhs))
    if empty:
        halfplanes = [(0, 0, -1.0)]
    else:
        halfplanes = minimal_halfplanes(halfplanes)
    halfplanes.sort(key=lambda h: (h[0], h[1], h[2]))
    return Region2D(tuple(halfplanes), sys.label)


def minimal_halfplanes(hps, tol: float = 1e-12) -> list[tuple[int, int, float]]:
    """Drop halfplanes implied by the others and the nonnegative orthant."""
    from scipy.optimize import linprog

    hps = list(hps)
    i = 0
    while i < len(hps):
        a, b, c = hps[i]
        others = hps[:i] + hps[i + 1:]
        if others:
            A = np.array([[h[0], h[1]] for h in others], dtype=float)
            rhs = np.array([h[2] for h in others])
            res = linprog([-a, -b], A_ub=A, b_ub=rhs, bounds=[(0, None), (0, None)], method="highs")
            redundant = res.status == 0 and -res.fun <= c + tol
            # an infeasible remainder makes every row redundant except a witness
            redundant = redundant or (res.status == 2 and len(others) > 0)
        else:
            redundant = False
        if redundant:
            hps.pop(i)
        else:
            i += 1
    return hps


def region_union(systems) -> RegionUnion:
    return RegionUnion(tuple(project_region(s) for s in systems))


# ---------------------------------------------------------------- comparison

@dataclass(frozen=True)
class RegionComparison:
    a_minus_b: tuple[float, float] | None
    b_minus_a: tuple[float, float] | None
    checked: int
    skipped: int

    @property
    def verdict(self) -> str:
        if self.a_minus_b is not None:
            return "a_not_subset_b"
        if self.b_minus_a is not None:
            return "b_not_subset_a"
        return "equal"

    @property
    def witness(self):
        return self.a_minus_b if self.a_minus_b is not None else self.b_minus_a

    def to_json(self) -> dict:
        return {"verdict": self.verdict, "a_minus_b": self.a_minus_b,
                "b_minus_a": self.b_minus_a, "checked": self.checked, "skipped": self.skipped}


def _parts(r) -> tuple[Region2D, ...]:
    return r.parts if isinstance(r, RegionUnion) else (r,)


def _depths(parts, g0, g1):
    """Signed inside-depth per part (min over halfplanes of normalized slack)."""
    out = []
    for p in parts:
        d = np.minimum(g0, g1)
        for a, b, c in p.halfplanes:
            nrm = math.hypot(a, b)
            if nrm == 0:
                d = np.minimum(d, np.full_like(g0, c))
            else:
                d = np.minimum(d, (c - a * g0 - b * g1) / nrm)
        out.append(d)
    return np.max(out, axis=0) if out else np.full_like(g0, -np.inf)


def compare_regions(a, b, tol: float = 1e-6, grid: int = 200) -> RegionComparison:
    """Grid-membership comparison of two regions (or unions of regions).

    Lattice points within `tol` of any boundary line of either region are
    skipped. Each witness is the lattice point of the difference set lying
    deepest inside it.
    """
    if tol <= 0 or grid < 2:
        raise ValueError("need tol > 0 and grid >= 2")
    pa, pb = _parts(a), _parts(b)
    verts = [v for p in pa + pb for v in p.vertices()]
    hi0 = max([v[0] for v in verts], default=0.0)
    hi1 = max([v[1] for v in verts], default=0.0)
    hi0 = hi0 if hi0 > 0 else 1.0
    hi1 = hi1 if hi1 > 0 else 1.0
    g0, g1 = np.meshgrid(np.linspace(0, hi0, grid), np.linspace(0, hi1, grid), indexing="ij")
    g0, g1 = g0.ravel(), g1.ravel()
    near = (np.abs(g0) <= tol) | (np.abs(g1) <= tol)
    for p in pa + pb:
        for ca, cb, cc in p.halfplanes:
            nrm = math.hypot(ca, cb)
            if nrm > 0:
                near |= np.abs(ca * g0 + cb * g1 - cc) / nrm <= tol
    da, db = _depths(pa, g0, g1), _depths(pb, g0, g1)
    ina, inb = da >= 0, db >= 0
    keep = ~near

    def witness(mask, depth_in, depth_out):
        m = mask & keep
        if not m.any():
            return None
        score = np.where(m, np.minimum(depth_in, -depth_out), -np.inf)
        i = int(np.argmax(score))
        return (float(g0[i]), float(g1[i]))

    return RegionComparison(witness(ina & ~inb, da, db), witness(inb & ~ina, db, da),
                            int(keep.sum()), int(near.sum()))


# ---------------------------------------------------------------- regimes

class Regime(str, enum.Enum):
    A = "A"
    B = "B"
    BOUNDARY = "Boundary"


def regime_predicate(mi: MIProfile, t: RateTuple, band: float = 1e-9) -> dict[str, Regime]:
    if band <= 0:
        raise ValueError("band must be positive")
    out = {}
    for rx, iu in (("Y2", mi.iU_Y2), ("Y3", mi.iU_Y3)):
        load = t.R0 + t.S0
        if abs(load - iu) <= band:
            out[rx] = Regime.BOUNDARY
        elif load < iu:
            out[rx] = Regime.A
        else:
            out[rx] = Regime.B
    return out


def regime_system(mi: MIProfile, verdict: dict[str, Regime], keep_sat_sum: bool = True) -> ConstraintSystem:
    r2 = "a" if verdict["Y2"] == Regime.A else "b"
    r3 = "a" if verdict["Y3"] == Regime.A else "b"
    rows = _common_rows(mi) + regime_rows(2, r2, mi, keep_sat_sum) + regime_rows(3, r3, mi, keep_sat_sum)
    return ConstraintSystem(VARS, tuple(rows), r2 + r3)


# ---------------------------------------------------------------- sampling

def _le_matrix(sys: ConstraintSystem) -> tuple[np.ndarray, np.ndarray]:
    rows = [c.as_le() for c in sys.constraints]
    return (np.array([r.coeffs for r in rows], dtype=float),
            np.array([r.rhs for r in rows], dtype=float))


def chebyshev_center(sys: ConstraintSystem) -> tuple[np.ndarray, float]:
    from scipy.optimize import linprog

    A, b = _le_matrix(sys)
    norms = np.linalg.norm(A, axis=1)
    k = A.shape[1]
    cost = np.zeros(k + 1)
    cost[-1] = -1.0
    res = linprog(cost, A_ub=np.hstack([A, norms[:, None]]), b_ub=b,
                  bounds=[(None, None)] * k + [(0, None)], method="highs")
    if res.status != 0:
        raise ValueError(f"no interior point: {res.message}")
    return res.x[:k], float(res.x[-1])


def implicit_equalities(A: np.ndarray, b: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Rows of A x <= b that hold with equality on the whole polytope.

    Repeatedly maximize the total (capped) slack of the rows not yet shown
    loose. Rows that get positive slack are loose; once a round gains
    nothing, every remaining row is tight everywhere.
    """
    from scipy.optimize import linprog

    m, k = A.shape
    open_rows = np.ones(m, dtype=bool)
    while open_rows.any():
        cost = np.concatenate([np.zeros(k), -open_rows.astype(float)])
        res = linprog(cost, A_ub=np.hstack([A, np.eye(m)]), b_ub=b,
                      bounds=[(None, None)] * k + [(0, 1)] * m, method="highs")
        if res.status != 0:
            raise ValueError(f"polytope is empty: {res.message}")
        loose = open_rows & (res.x[k:] > tol)
        if not loose.any():
            break
        open_rows &= ~loose
    return open_rows


def _reduced_chebyshev(A, b, x0, basis):
    from scipy.optimize import linprog

    Ar, br = A @ basis, b - A @ x0
    norms = np.linalg.norm(Ar, axis=1)
    k = Ar.shape[1]
    cost = np.zeros(k + 1)
    cost[-1] = -1.0
    res = linprog(cost, A_ub=np.hstack([Ar, norms[:, None]]), b_ub=br,
                  bounds=[(None, None)] * k + [(0, None)], method="highs")
    if res.status != 0:
        raise ValueError(f"no interior point: {res.message}")
    return res.x[:k], float(res.x[-1])


def hit_and_run(sys: ConstraintSystem, count: int, rng: np.random.Generator,
                burn: int = 200, thin: int = 5) -> np.ndarray:
    """Approximately uniform samples from a bounded polytope.

    Rows that are tight everywhere are moved into an affine hull, so the walk
    also works when the polytope is lower dimensional.
    """
    A, b = _le_matrix(sys)
    eq = implicit_equalities(A, b)
    dim = A.shape[1]
    if eq.any():
        x0 = np.linalg.lstsq(A[eq], b[eq], rcond=None)[0]
        _, sv, vt = np.linalg.svd(A[eq])
        rank = int((sv > 1e-9 * max(1.0, sv.max())).sum())
        basis = vt[rank:].T
    else:
        x0, basis = np.zeros(dim), np.eye(dim)
    A, b = A[~eq], b[~eq]
    out = np.empty((count, dim))
    if basis.shape[1] == 0:
        out[:] = x0
        return out
    z, r = _reduced_chebyshev(A, b, x0, basis)
    if r <= 1e-9:
        raise ValueError("polytope has empty relative interior")
    Ar, br = A @ basis, b - A @ x0
    got, step = 0, 0
    while got < count:
        d = rng.standard_normal(basis.shape[1])
        d /= np.linalg.norm(d)
        ad = Ar @ d
        slack = br - Ar @ z
        with np.errstate(divide="ignore"):
            ratio = slack / ad
        hi = ratio[ad > 1e-15].min(initial=np.inf)
        lo = ratio[ad < -1e-15].max(initial=-np.inf)
        if not (np.isfinite(hi) and np.isfinite(lo)):
            raise ValueError("polytope is unbounded")
        z = z + rng.uniform(lo, hi) * d
        step += 1
        if step > burn and (step - burn) % thin == 0:
            out[got] = x0 + basis @ z
            got += 1
    return out


def random_profile_source(rng: np.random.Generator, max_alpha: int = 3, max_dep: float = 0.3):
    """Random p(u,v2,v3,x) and channel x -> (y1,y2,y3), alphabets in {2..max_alpha}.

    V3 given (U, V2) mixes p(v3|u) with a random dependence on V2 of weight
    at most `max_dep`, keeping I(V2;V3|U) small enough for the encoding
    constraint to be satisfiable most of the time.
    """
    du, d2, d3, dx = (int(rng.integers(2, max_alpha + 1)) for _ in range(4))
    ydims = tuple(int(rng.integers(2, max_alpha + 1)) for _ in range(3))
    pu = rng.dirichlet(np.ones(du))
    p2 = rng.dirichlet(np.ones(d2), size=du)
    p3 = rng.dirichlet(np.ones(d3), size=du)
    q3 = rng.dirichlet(np.ones(d3), size=(du, d2))
    lam = rng.uniform(0, max_dep)
    p3g = (1 - lam) * p3[:, None, :] + lam * q3
    px = rng.dirichlet(np.ones(dx), size=(du, d2, d3))
    joint = pu[:, None, None, None] * p2[:, :, None, None] * p3g[:, :, :, None] * px
    src = prob.JointPmf((du, d2, d3, dx), joint, tol=1e-9)
    ch = prob.random_channel(rng, dx, ydims, alpha=0.3)
    return src, ch


def random_feasible_profile(rng: np.random.Generator, min_radius: float = 1e-4, tries: int = 1000):
    """Draw sources until the non-unique system has an interior of the given radius."""
    for _ in range(tries):
        src, ch = random_profile_source(rng)
        mi = mi_profile(prob.chain_compose(src, ch))
        try:
            _, r = chebyshev_center(build_nonunique_system(mi))
        except ValueError:
            continue
        if r >= min_radius:
            return src, ch, mi
    raise RuntimeError("no feasible random profile found")
