import numpy as np
import pytest

from nudec import fme
from nudec.fme import ConstraintSystem, LinearConstraint


def test_single_pairing():
    sys = ConstraintSystem(("R0", "t"), (LinearConstraint((0, 1), ">=", 0, "t>=0"),
                                         LinearConstraint((1, 1), "<=", 1, "sum")))
    out = fme.drop_variable(fme.fourier_motzkin_eliminate(sys, "t"), "t")
    assert [(c.coeffs, c.relation, c.rhs) for c in out.constraints] == [((1,), "<=", 1.0)]


def test_unbounded_below_gives_empty_system():
    sys = ConstraintSystem(("t",), (LinearConstraint((1,), "<=", 2),))
    assert len(fme.eliminate(sys, "t")) == 0


def test_infeasible_pair_survives_as_witness():
    sys = ConstraintSystem(("t",), (LinearConstraint((1,), "<=", 0), LinearConstraint((1,), ">=", 1)))
    out = fme.eliminate(sys, 0)
    assert len(out) == 1 and out.constraints[0].is_trivial() and out.constraints[0].rhs < 0


def test_prune_keeps_tightest_normalized_row():
    rows = [((2, 2), 4.0, "a"), ((1, 1), 1.5, "b"), ((0, 0), 3.0, "vacuous")]
    assert fme.prune(rows) == [((1, 1), 1.5, "b")]


def test_random_systems_match_interval_oracle():
    rng = np.random.default_rng(5)
    for _ in range(25):
        d, m = 5, 10
        rows = [LinearConstraint(tuple(rng.integers(-2, 3, size=d)), "<=" if rng.random() < 0.5 else ">=",
                                 float(rng.uniform(-2, 2))) for _ in range(m)]
        rows = [r for r in rows if not r.is_trivial()]
        sys = ConstraintSystem(tuple(f"x{i}" for i in range(d)), tuple(rows))
        j = int(rng.integers(d))
        elim = fme.eliminate(sys, j)
        for x in rng.uniform(-3, 3, size=(200, d)):
            assert elim.contains(x, 1e-9) == (fme.interval_exists(sys, j, x) <= 1e-9)


def test_constraint_validation():
    with pytest.raises(ValueError):
        LinearConstraint((1,), "<", 0)
    with pytest.raises(ValueError):
        ConstraintSystem(("a", "b"), (LinearConstraint((1,), "<=", 0),))
    with pytest.raises(ValueError):
        fme.drop_variable(ConstraintSystem(("a",), (LinearConstraint((1,), "<=", 0),)), "a")


def test_system_json_round_trip():
    sys = ConstraintSystem(("a", "b"), (LinearConstraint((1, -2), ">=", 0.5, "r"),), "s")
    assert ConstraintSystem.from_json(sys.to_json()) == sys
