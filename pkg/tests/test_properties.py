"""Property-based checks of the core invariants."""

import math

import numpy as np
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from nudec import emit, fme, prob, region, seeds
from nudec.fme import ConstraintSystem, LinearConstraint
from nudec.typicality import TypicalSet
from nudec.verdict import Kind, Verdict, combine_auxiliary

SETTINGS = settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])

dims_st = st.lists(st.integers(1, 3), min_size=2, max_size=4).map(tuple)
seed_st = st.integers(0, 2 ** 32 - 1)


@SETTINGS
@given(dims_st, seed_st)
def test_chain_rule_and_nonnegativity(dims, seed):
    p = prob.random_joint(np.random.default_rng(seed), dims, alpha=0.7)
    a, b, c = [0], [1], list(range(2, len(dims)))
    joint = prob.mutual_information(p, a + c, b) if c else prob.mutual_information(p, a, b)
    split = prob.mutual_information(p, c, b) + prob.conditional_mutual_information(p, a, b, c) if c else joint
    assert abs(joint - split) <= 1e-9
    assert prob.conditional_mutual_information(p, a, b, c) >= -1e-12
    assert prob.mutual_information(p, a, b) <= min(prob.entropy(p, a), prob.entropy(p, b)) + 1e-12


@SETTINGS
@given(dims_st, seed_st)
def test_marginalization_composes(dims, seed):
    p = prob.random_joint(np.random.default_rng(seed), dims)
    keep = list(range(len(dims)))[::-1]
    once = prob.marginalize(p, [keep[0]])
    twice = prob.marginalize(prob.marginalize(p, keep[:2]), [0])
    np.testing.assert_allclose(once.probs, twice.probs, atol=1e-12)


@SETTINGS
@given(seed_st, st.integers(2, 12), st.floats(0.05, 2.0))
def test_mask_agrees_with_direct_counting(seed, n, eps):
    rng = np.random.default_rng(seed)
    ref = prob.random_joint(rng, (2, 2), alpha=0.5)
    ts = TypicalSet(ref, eps, n)
    a = rng.integers(0, 2, size=(4, 1, n))
    b = rng.integers(0, 2, size=(1, 5, n))
    got = ts.mask([a, b])
    p = ref.probs
    for i in range(4):
        for j in range(5):
            counts = np.zeros((2, 2))
            np.add.at(counts, (a[i, 0], b[0, j]), 1)
            ok = all(abs(counts[s] - n * p[s]) <= eps * n * p[s] + 1e-9 for s in np.ndindex(2, 2))
            assert got[i, j] == ok


@SETTINGS
@given(seed_st, st.integers(1, 10), st.floats(0.1, 1.5))
def test_pair_mask_equals_mask(seed, n, eps):
    rng = np.random.default_rng(seed)
    ref = prob.random_joint(rng, (1, 2, 3), alpha=2.0)
    ts = TypicalSet(ref, eps, n)
    U = np.zeros((2, 1, n), dtype=np.int64)
    V2 = rng.integers(0, 2, size=(2, 3, n))
    V3 = rng.integers(0, 3, size=(2, 4, n))
    want = ts.mask([U[:, :, None, :], V2[:, :, None, :], V3[:, None, :, :]])
    np.testing.assert_array_equal(ts.pair_mask([U, V2], [V3]), want)


row_st = st.tuples(st.lists(st.integers(-2, 2), min_size=3, max_size=3).filter(any),
                   st.sampled_from(["<=", ">="]), st.floats(-2, 2))


@SETTINGS
@given(st.lists(row_st, min_size=1, max_size=8), st.integers(0, 2), seed_st)
def test_elimination_is_exact_projection(rows, j, seed):
    sys = ConstraintSystem(("x", "y", "z"), tuple(LinearConstraint(tuple(c), r, b) for c, r, b in rows))
    elim = fme.eliminate(sys, j)
    for x in np.random.default_rng(seed).uniform(-3, 3, size=(50, 3)):
        margin = fme.interval_exists(sys, j, x)
        if abs(margin) < 1e-7 or abs(elim.min_slack(x)) < 1e-7:
            continue
        assert elim.contains(x) == (margin <= 0)


@SETTINGS
@given(seed_st)
def test_region_comparison_is_reflexive(seed):
    mi = region.random_feasible_profile(np.random.default_rng(seed))[2]
    reg = region.project_region(region.build_nonunique_system(mi))
    assert region.compare_regions(reg, reg, 1e-6, 50).verdict == "equal"


@SETTINGS
@given(st.integers(0, 2 ** 64 - 1), st.integers(0, 2 ** 64 - 1), st.integers(0, 2 ** 64 - 1))
def test_distinct_indices_give_distinct_seeds(master, i, j):
    if i != j:
        assert seeds.derive_stream_seed(master, i) != seeds.derive_stream_seed(master, j)


@SETTINGS
@given(st.floats(allow_nan=False, allow_infinity=False, width=64))
def test_float_format_keeps_twelve_digits(v):
    back = float(emit.fmt(v))
    assert back == v or math.isclose(back, v, rel_tol=1e-11)


kind_st = st.sampled_from(list(Kind))


@SETTINGS
@given(st.lists(st.tuples(kind_st, st.integers(0, 2)), min_size=1, max_size=4), st.integers(0, 2))
def test_auxiliary_rule(comps, truth):
    verdicts = [Verdict(k, (m,) if k in (Kind.CORRECT, Kind.WRONG) else None) for k, m in comps]
    outs = [v.decoded if not v.declared_error else None for v in verdicts]
    # make outputs consistent with kinds relative to the truth
    verdicts = [Verdict(Kind.CORRECT if o == (truth,) else Kind.WRONG, o) if o is not None else v
                for v, o in zip(verdicts, outs)]
    res = combine_auxiliary(outs, verdicts, (truth,))
    decided = {o for o in outs if o is not None}
    if len(decided) != 1:
        assert res.declared_error
    else:
        (only,) = decided
        assert res.decoded == only and (res.kind is Kind.CORRECT) == (only == (truth,))
