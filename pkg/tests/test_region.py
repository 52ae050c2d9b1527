import numpy as np
import pytest
from scipy.optimize import linprog

from nudec import prob, region
from nudec.region import MIProfile, RateTuple, Regime, Region2D, RegionUnion


def lp_feasible(sys, r0, r1):
    """Grid oracle: does some split with these (R0, R1) satisfy every row?"""
    A = np.array([c.as_le().coeffs for c in sys.constraints], dtype=float)
    b = np.array([c.as_le().rhs for c in sys.constraints])
    eq = np.array([[1, 0, 0, 0, 0, 0, 0], [0, 1, 1, 1, 1, 0, 0]], dtype=float)
    res = linprog(np.zeros(7), A_ub=A, b_ub=b + 1e-9, A_eq=eq, b_eq=[r0, r1],
                  bounds=[(None, None)] * 7, method="highs")
    return res.status == 0


def toy_mi(toy_joint):
    return region.mi_profile(toy_joint)


def test_toy_profile_values(toy_joint):
    mi = toy_mi(toy_joint)
    assert mi.iU_Y2 == pytest.approx(0, abs=1e-12)
    assert mi.iUV2_Y2 == pytest.approx(1, abs=1e-12)
    assert mi.iV2_Y2_gU == pytest.approx(1, abs=1e-12)
    assert mi.iV2_V3_gU == pytest.approx(0, abs=1e-12)
    assert mi.iX_Y1 == pytest.approx(2, abs=1e-12)


def test_full_superposition_profile():
    rng = np.random.default_rng(0)
    px = rng.dirichlet(np.ones(3))
    src = np.zeros((3, 1, 1, 3))
    src[np.arange(3), 0, 0, np.arange(3)] = px
    ch = prob.CondPmf.deterministic((3,), (3, 3, 3), lambda x: (x, x, x))
    mi = region.mi_profile(prob.chain_compose(prob.JointPmf(src.shape, src), ch))
    assert mi.iU_Y2 == pytest.approx(prob.entropy(prob.JointPmf((3,), px)), abs=1e-12)


def test_chain_residuals_vanish_on_random_profiles():
    rng = np.random.default_rng(1)
    for _ in range(20):
        src, ch = region.random_profile_source(rng)
        r2, r3 = region.mi_profile(prob.chain_compose(src, ch)).chain_residuals()
        assert abs(r2) <= 1e-9 and abs(r3) <= 1e-9


def test_nonunique_system_shape(toy_joint):
    sys = region.build_nonunique_system(toy_mi(toy_joint))
    assert sys.variables == region.VARS
    assert len(sys) == 15
    labels = [c.label for c in sys.constraints]
    assert len(set(labels)) == len(labels)
    assert all(isinstance(v, int) for c in sys.constraints for v in c.coeffs)


def test_toy_decoding_rhs(toy_joint):
    sys = region.build_nonunique_system(toy_mi(toy_joint))
    rhs = {c.label: c.rhs for c in sys.constraints}
    tail = [rhs[k] for k in ("y1:S1+S2+S3", "y1:all", "y2:nonunique", "y3:nonunique")]
    np.testing.assert_allclose(tail, [2, 2, 1, 1], atol=1e-12)


def test_zero_profile_pins_everything_to_zero():
    sys = region.build_nonunique_system(MIProfile.zero())
    assert sys.contains(np.zeros(7))
    rng = np.random.default_rng(2)
    for x in rng.uniform(0, 1, size=(50, 7)):
        assert not sys.contains(x)
    reg = region.project_region(sys)
    assert reg.contains(0, 0) and not reg.contains(1e-6, 0) and not reg.contains(0, 1e-6)
    assert reg.vertices() == [(0.0, 0.0)]


def test_jointunique_systems(toy_joint):
    mi = toy_mi(toy_joint)
    systems = region.build_jointunique_systems(mi)
    assert [s.label for s in systems] == ["aa", "ab", "ba", "bb"]
    rows = {c.label: c for c in systems[0].constraints}
    a2 = rows["y2:a"]
    assert a2.coeffs == (1, 1, 0, 0, 0, 0, 0) and a2.relation == "<=" and a2.rhs == pytest.approx(0, abs=1e-12)


def test_regime_bb_lies_inside_nonunique():
    rng = np.random.default_rng(3)
    for _ in range(5):
        mi = region.random_feasible_profile(rng)[2]
        bb = region.build_jointunique_systems(mi)[3]
        nu = region.build_nonunique_system(mi)
        try:
            pts = region.hit_and_run(bb, 100, rng)
        except ValueError:
            continue
        assert all(nu.contains(x, 1e-9) for x in pts)


def test_toy_projection_against_grid_oracle(toy_joint):
    # rates R1 = S0+S2+S3 <= S0+T2+T3 and R0+S0+T_k <= 1 give 2R0 + R1 <= 2
    sys = region.build_nonunique_system(toy_mi(toy_joint))
    reg = region.project_region(sys)
    assert reg.halfplanes == ((2, 1, pytest.approx(2.0, abs=1e-9)),)
    for r0 in np.linspace(0, 1.2, 13):
        for r1 in np.linspace(0, 2.4, 13):
            if abs(2 * r0 + r1 - 2) < 1e-6:
                continue
            assert reg.contains(r0, r1, 1e-9) == lp_feasible(sys, r0, r1), (r0, r1)


def test_projection_matches_lp_oracle_on_random_profiles():
    rng = np.random.default_rng(4)
    for _ in range(3):
        mi = region.random_feasible_profile(rng)[2]
        sys = region.build_nonunique_system(mi)
        reg = region.project_region(sys)
        hi = max(v[0] for v in reg.vertices()), max(v[1] for v in reg.vertices())
        for r0, r1 in rng.uniform(0, 1.3, size=(60, 2)) * hi:
            depth = min([c - a * r0 - b * r1 for a, b, c in reg.halfplanes] + [r0, r1])
            if abs(depth) < 1e-6:
                continue
            assert reg.contains(r0, r1) == lp_feasible(sys, r0, r1)


def test_projection_is_downward_closed():
    rng = np.random.default_rng(5)
    for _ in range(5):
        reg = region.project_region(region.build_nonunique_system(region.random_feasible_profile(rng)[2]))
        for r0, r1 in reg.vertices():
            for s, t in rng.uniform(0, 1, size=(20, 2)):
                assert reg.contains(r0 * s, r1 * t, 1e-9)


def test_compare_regions_examples(toy_joint):
    a = Region2D(((1, 0, 1.0), (0, 1, 1.0)))
    assert region.compare_regions(a, a).verdict == "equal"
    b = Region2D(((1, 0, 2.0), (0, 1, 1.0)))
    cmp = region.compare_regions(a, b)
    assert cmp.verdict == "b_not_subset_a"
    assert abs(cmp.witness[0] - 1.5) < 0.05
    assert region.compare_regions(b, a).verdict == "a_not_subset_b"
    mi = toy_mi(toy_joint)
    nu = region.project_region(region.build_nonunique_system(mi))
    ju = region.region_union(region.build_jointunique_systems(mi))
    assert region.compare_regions(nu, ju, 1e-6, 200).verdict == "equal"


def test_compare_regions_rejects_bad_grid():
    a = Region2D(((1, 0, 1.0),))
    with pytest.raises(ValueError):
        region.compare_regions(a, a, tol=0)
    with pytest.raises(ValueError):
        region.compare_regions(a, a, grid=1)


def test_literal_regime_a_rows_enlarge_the_union():
    # without the satellite-sum row, regime (a) leaves T_k unbounded at its
    # receiver, so the union can strictly exceed the non-unique region
    rng = np.random.default_rng(6)
    verdicts = []
    for _ in range(10):
        mi = region.random_feasible_profile(rng)[2]
        nu = region.project_region(region.build_nonunique_system(mi))
        ju = region.region_union(region.build_jointunique_systems(mi, keep_sat_sum=False))
        verdicts.append(region.compare_regions(nu, ju).verdict)
    assert "a_not_subset_b" not in verdicts
    assert "b_not_subset_a" in verdicts


def test_regime_predicate_examples(toy_joint):
    mi = toy_mi(toy_joint)
    assert region.regime_predicate(mi, RateTuple(R0=0.5))["Y2"] is Regime.B
    pos = mi.replace(iU_Y2=0.3, iU_Y3=0.3)
    assert region.regime_predicate(pos, RateTuple())["Y2"] is Regime.A
    assert region.regime_predicate(mi, RateTuple())["Y2"] is Regime.BOUNDARY
    with pytest.raises(ValueError):
        region.regime_predicate(mi, RateTuple(), band=0)


def test_regime_b_bounds_satellite_rate():
    rng = np.random.default_rng(7)
    band = 1e-9
    for _ in range(5):
        mi = region.random_feasible_profile(rng)[2]
        for x in region.hit_and_run(region.build_nonunique_system(mi), 200, rng):
            t = RateTuple.from_vector(x)
            if region.regime_predicate(mi, t, band)["Y2"] is Regime.B:
                assert t.T2 <= mi.iV2_Y2_gU + band


def test_hit_and_run_handles_lower_dimensional_polytopes(toy_joint):
    sys = region.build_nonunique_system(toy_mi(toy_joint))
    pts = region.hit_and_run(sys, 300, np.random.default_rng(8))
    assert all(sys.contains(x, 1e-9) for x in pts)
    assert np.allclose(pts[:, 2], 0)                 # S1 is pinned at 0
    assert pts[:, 0].std() > 0.05                    # R0 still varies


def test_implicit_equalities():
    A = np.array([[1.0, 0], [-1, 0], [0, 1], [0, -1]])
    b = np.array([1.0, -1, 1, 0])                    # x = 1, 0 <= y <= 1
    assert region.implicit_equalities(A, b).tolist() == [True, True, False, False]


def test_rate_tuple():
    t = RateTuple(R0=0.5, S0=0.1, S1=0.2, S2=0.1, S3=0.0, T2=0.2, T3=0.0)
    assert t.R1 == pytest.approx(0.4)
    assert RateTuple.from_vector(t.as_vector()) == t
    assert t.is_valid() and not RateTuple(S2=0.3, T2=0.1).is_valid()
    with pytest.raises(ValueError):
        MIProfile.zero().replace(iU_Y2=-1.0)


def test_region_json_round_trip():
    r = Region2D(((2, 1, 2.0),), "toy")
    assert Region2D.from_json(r.to_json()) == r
    assert RegionUnion((r,)).contains(0.5, 0.5)
