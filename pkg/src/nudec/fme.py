"""Fourier-Motzkin elimination over integer-coefficient inequality systems."""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd
from typing import Sequence

RHS_TOL = 1e-12


@dataclass(frozen=True)
class LinearConstraint:
    """sum(coeffs[i] * var[i]) (<= or >=) rhs, integer coefficients."""

    coeffs: tuple[int, ...]
    relation: str
    rhs: float
    label: str = ""

    def __post_init__(self):
        if self.relation not in ("<=", ">="):
            raise ValueError(f"relation must be '<=' or '>=', got {self.relation!r}")
        object.__setattr__(self, "coeffs", tuple(int(c) for c in self.coeffs))
        object.__setattr__(self, "rhs", float(self.rhs))

    def as_le(self) -> "LinearConstraint":
        if self.relation == "<=":
            return self
        return LinearConstraint(tuple(-c for c in self.coeffs), "<=", -self.rhs, self.label)

    def slack(self, x: Sequence[float]) -> float:
        """Nonnegative iff satisfied (exactly)."""
        lhs = sum(c * v for c, v in zip(self.coeffs, x))
        return self.rhs - lhs if self.relation == "<=" else lhs - self.rhs

    def satisfied(self, x: Sequence[float], tol: float = 0.0) -> bool:
        return self.slack(x) >= -tol

    def is_trivial(self) -> bool:
        return not any(self.coeffs)

    def to_json(self) -> dict:
        return {"coeffs": list(self.coeffs), "relation": self.relation,
                "rhs": self.rhs, "label": self.label}


@dataclass(frozen=True)
class ConstraintSystem:
    variables: tuple[str, ...]
    constraints: tuple[LinearConstraint, ...]
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "constraints", tuple(self.constraints))
        for c in self.constraints:
            if len(c.coeffs) != len(self.variables):
                raise ValueError(f"constraint {c.label!r} has {len(c.coeffs)} coeffs, "
                                 f"system has {len(self.variables)} variables")

    def contains(self, x: Sequence[float], tol: float = 0.0) -> bool:
        return all(c.satisfied(x, tol) for c in self.constraints)

    def min_slack(self, x: Sequence[float]) -> float:
        if not self.constraints:
            return float("inf")
        return min(c.slack(x) for c in self.constraints)

    def __len__(self):
        return len(self.constraints)

    def to_json(self) -> dict:
        return {"label": self.label, "variables": list(self.variables),
                "constraints": [c.to_json() for c in self.constraints]}

    @classmethod
    def from_json(cls, obj: dict) -> "ConstraintSystem":
        cons = [LinearConstraint(tuple(c["coeffs"]), c["relation"], c["rhs"], c.get("label", ""))
                for c in obj["constraints"]]
        return cls(tuple(obj["variables"]), tuple(cons), obj.get("label", ""))


def _normalize(coeffs: tuple[int, ...], rhs: float) -> tuple[tuple[int, ...], float]:
    g = 0
    for c in coeffs:
        g = gcd(g, abs(c))
    if g > 1:
        return tuple(c // g for c in coeffs), rhs / g
    return coeffs, rhs


def prune(rows: list[tuple[tuple[int, ...], float, str]]) -> list[tuple[tuple[int, ...], float, str]]:
    """Drop vacuous rows and keep the tightest RHS per coefficient vector."""
    best: dict[tuple[int, ...], tuple[float, str]] = {}
    order: list[tuple[int, ...]] = []
    infeasible = None
    for coeffs, rhs, lab in rows:
        coeffs, rhs = _normalize(coeffs, rhs)
        if not any(coeffs):
            if rhs < -RHS_TOL and (infeasible is None or rhs < infeasible[1]):
                infeasible = (coeffs, rhs, lab)
            continue
        if coeffs not in best:
            best[coeffs] = (rhs, lab)
            order.append(coeffs)
        elif rhs < best[coeffs][0] - RHS_TOL:
            best[coeffs] = (rhs, lab)
    out = [(c, best[c][0], best[c][1]) for c in order]
    if infeasible is not None:
        # keep one witness row 0 <= negative so emptiness survives projection
        out.append(infeasible)
    return out


def eliminate(sys: ConstraintSystem, var: str | int) -> ConstraintSystem:
    """Remove `var`; the result keeps the same variable list with a zero column."""
    j = sys.variables.index(var) if isinstance(var, str) else int(var)
    rows = []
    for c in sys.constraints:
        le = c.as_le()
        rows.append((le.coeffs, le.rhs, le.label))
    pos = [r for r in rows if r[0][j] > 0]
    neg = [r for r in rows if r[0][j] < 0]
    out = [r for r in rows if r[0][j] == 0]
    for cp, bp, lp in pos:
        for cn, bn, ln in neg:
            a, b = cp[j], -cn[j]
            coeffs = tuple(b * x + a * y for x, y in zip(cp, cn))
            out.append((coeffs, b * bp + a * bn, f"({lp})+({ln})" if lp or ln else ""))
    out = prune(out)
    cons = tuple(LinearConstraint(c, "<=", r, lab) for c, r, lab in out)
    return ConstraintSystem(sys.variables, cons, sys.label)


def fourier_motzkin_eliminate(sys: ConstraintSystem, var: str | int) -> ConstraintSystem:
    return eliminate(sys, var)


def drop_variable(sys: ConstraintSystem, var: str) -> ConstraintSystem:
    """Remove a variable whose column is all zero."""
    j = sys.variables.index(var)
    if any(c.coeffs[j] for c in sys.constraints):
        raise ValueError(f"{var} still appears in the system")
    cons = tuple(LinearConstraint(c.coeffs[:j] + c.coeffs[j + 1:], c.relation, c.rhs, c.label)
                 for c in sys.constraints)
    return ConstraintSystem(sys.variables[:j] + sys.variables[j + 1:], cons, sys.label)


def interval_exists(sys: ConstraintSystem, j: int, x: Sequence[float]) -> float:
    """Oracle for eliminating variable j at point x (x[j] ignored).

    Returns the margin max(lo - hi, zero-column violations); the point
    extends to a feasible x[j] iff the margin is <= 0.
    """
    lo, hi = float("-inf"), float("inf")
    worst = float("-inf")
    for c in sys.constraints:
        le = c.as_le()
        rest = sum(a * v for i, (a, v) in enumerate(zip(le.coeffs, x)) if i != j)
        a = le.coeffs[j]
        if a > 0:
            hi = min(hi, (le.rhs - rest) / a)
        elif a < 0:
            lo = max(lo, (le.rhs - rest) / a)
        else:
            worst = max(worst, rest - le.rhs)
    gap = lo - hi if lo > float("-inf") and hi < float("inf") else float("-inf")
    return max(worst, gap)
