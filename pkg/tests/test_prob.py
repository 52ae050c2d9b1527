import math

import numpy as np
import pytest

from nudec import prob
from conftest import bsc, toy_channel, toy_source

H2_01 = 0.468995593589281          # -0.1 log2 0.1 - 0.9 log2 0.9
BSC_01_CAPACITY = 0.531004406410719


def test_frozen_binary_entropy_matches_direct_sum():
    direct = -(0.1 * math.log2(0.1) + 0.9 * math.log2(0.9))
    assert abs(direct - H2_01) < 1e-15
    assert abs(1 - direct - BSC_01_CAPACITY) < 1e-15


def test_marginalize_examples():
    u = prob.JointPmf.uniform((2, 2))
    np.testing.assert_allclose(prob.marginalize(u, [0]).probs, [0.5, 0.5])
    diag = prob.JointPmf((2, 2), [[0.5, 0], [0, 0.5]])
    np.testing.assert_allclose(prob.marginalize(diag, [0]).probs, [0.5, 0.5])
    q, r = np.array([0.2, 0.8]), np.array([0.1, 0.3, 0.6])
    prod = prob.JointPmf((2, 3), np.outer(q, r))
    np.testing.assert_allclose(prob.marginalize(prod, [1]).probs, r)


def test_marginalize_reorders_axes():
    p = prob.random_joint(np.random.default_rng(0), (2, 3, 4))
    m = prob.marginalize(p, [2, 0])
    np.testing.assert_allclose(m.probs, p.probs.sum(axis=1).T)


def test_condition_examples():
    diag = prob.JointPmf((2, 2), [[0.5, 0], [0, 0.5]])
    c = prob.condition(diag, [0])
    np.testing.assert_allclose(c.table, np.eye(2))
    q, r = np.array([0.2, 0.8]), np.array([0.1, 0.3, 0.6])
    c = prob.condition(prob.JointPmf((2, 3), np.outer(q, r)), [0])
    for row in c.rows:
        np.testing.assert_allclose(row.probs, r)
    c = prob.condition(prob.JointPmf((2, 2), [[0.5, 0.5], [0, 0]]), [0])
    assert c.defined.tolist() == [True, False]
    assert c.rows[1] is None
    with pytest.raises(ValueError):
        c.row(1)


def test_chain_compose_examples():
    src = prob.JointPmf.uniform((2,))
    ident = prob.CondPmf.deterministic((2,), (2,), lambda x: x)
    np.testing.assert_allclose(prob.chain_compose(src, ident).probs, np.eye(2) / 2)
    src = prob.JointPmf((3,), [0.5, 0.0, 0.5])
    j = prob.chain_compose(src, prob.random_channel(np.random.default_rng(1), 3, (2,)))
    assert np.all(j.probs[1] == 0)
    toy = prob.chain_compose(toy_source(), toy_channel())
    atoms = toy.flat[toy.flat > 0]
    assert len(atoms) == 4 and np.allclose(atoms, 0.25)


def test_chain_compose_rejects_mismatched_channel():
    with pytest.raises(ValueError):
        prob.chain_compose(prob.JointPmf.uniform((3,)), prob.CondPmf.deterministic((2,), (2,), lambda x: x))


def test_entropy_examples():
    assert prob.entropy(prob.JointPmf.uniform((2,))) == pytest.approx(1.0, abs=1e-15)
    assert prob.entropy(prob.JointPmf.point((3,), (1,))) == 0.0
    assert prob.entropy(prob.JointPmf((2,), [0.9, 0.1])) == pytest.approx(H2_01, abs=1e-14)


def test_mutual_information_examples():
    ind = prob.JointPmf((2, 3), np.outer([0.3, 0.7], [0.2, 0.2, 0.6]))
    assert abs(prob.mutual_information(ind, [0], [1])) < 1e-12
    copy = prob.JointPmf((2, 2), np.eye(2) / 2)
    assert prob.mutual_information(copy, [0], [1]) == pytest.approx(1.0, abs=1e-12)
    j = prob.JointPmf((2, 2), 0.5 * bsc(0.1))
    assert prob.mutual_information(j, [0], [1]) == pytest.approx(BSC_01_CAPACITY, abs=1e-12)


def test_conditional_mutual_information_examples():
    rng = np.random.default_rng(2)
    ab = prob.random_joint(rng, (2, 3))
    c = np.array([0.4, 0.6])
    j = prob.JointPmf((2, 3, 2), ab.probs[:, :, None] * c)
    assert prob.conditional_mutual_information(j, [0], [1], [2]) == pytest.approx(
        prob.mutual_information(ab, [0], [1]), abs=1e-12)
    p = np.zeros((2, 2, 2))
    p[0, 0, 0] = p[1, 1, 1] = 0.5
    assert abs(prob.conditional_mutual_information(prob.JointPmf((2, 2, 2), p), [0], [1], [2])) < 1e-12
    toy = prob.chain_compose(toy_source(), toy_channel())
    assert prob.conditional_mutual_information(toy, [1], [5], [0]) == pytest.approx(1.0, abs=1e-12)


def test_index_sets_must_be_disjoint_and_in_range():
    p = prob.JointPmf.uniform((2, 2))
    with pytest.raises(ValueError):
        prob.mutual_information(p, [0], [0])
    with pytest.raises(IndexError):
        prob.entropy(p, [2])


def test_invalid_pmfs_rejected():
    with pytest.raises(ValueError):
        prob.JointPmf((2,), [0.5, 0.4])
    with pytest.raises(ValueError):
        prob.JointPmf((2,), [1.5, -0.5])
    with pytest.raises(ValueError):
        prob.JointPmf((3,), [0.5, 0.5])
    with pytest.raises(ValueError):
        prob.CondPmf((2,), (2,), [[0.5, 0.5], [0.2, 0.2]])
    with pytest.raises(ValueError):
        prob.Alphabet(2, ("a", "a"))


def test_json_round_trip():
    rng = np.random.default_rng(3)
    p = prob.random_joint(rng, (2, 3))
    np.testing.assert_array_equal(prob.JointPmf.from_json(p.to_json()).probs, p.probs)
    c = prob.random_channel(rng, 2, (2, 2))
    np.testing.assert_array_equal(prob.CondPmf.from_json(c.to_json()).table, c.table)
