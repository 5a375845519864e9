import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polarnet.errors import (NotOrthogonal, ParseError, RangeViolation,
                             WrongCommunityCount, ZeroVector)
from polarnet.opinions import (CommunityAssignment, OpinionMatrix,
                               format_membership_csv, format_opinion_csv,
                               neutral_between, opinion_angle,
                               parse_membership_csv, parse_opinion_csv,
                               rotate_pair, sample_consensus,
                               unique_orthogonal, validate)


def orthogonality_sum(O):
    s = O.stances
    G = s.T @ s
    return G.sum() - np.trace(G)


def test_unique_orthogonal_identity():
    O = unique_orthogonal(CommunityAssignment((0, 1, 2), 3))
    np.testing.assert_array_equal(O.stances, np.eye(3))


def test_unique_orthogonal_blocks():
    O = unique_orthogonal(CommunityAssignment((0, 0, 1, 1), 2))
    np.testing.assert_array_equal(O.stances, [[1, 0], [1, 0], [0, 1], [0, 1]])


@given(st.lists(st.integers(0, 5), min_size=1, max_size=40))
def test_unique_orthogonal_is_orthogonal(labels):
    # relabel to a contiguous range so every community is used
    uniq = sorted(set(labels))
    a = CommunityAssignment(tuple(uniq.index(v) for v in labels), len(uniq))
    O = unique_orthogonal(a)
    assert orthogonality_sum(O) == 0
    assert validate(O).ok


def test_assignment_requires_every_community():
    with pytest.raises(ValueError):
        CommunityAssignment((0, 2), 3)


def test_neutral_between_single_nodes():
    O = neutral_between(CommunityAssignment((0, 1, 2), 3), 1)
    np.testing.assert_array_equal(O.stances, [[1, 0], [0.5, 0.5], [0, 1]])


def test_neutral_between_blocks_column_sums():
    a = CommunityAssignment((0, 0, 1, 2, 2, 2), 3)
    O = neutral_between(a, 1)
    np.testing.assert_array_equal(O.stances,
                                  [[1, 0], [1, 0], [0.5, 0.5], [0, 1], [0, 1], [0, 1]])
    np.testing.assert_array_equal(O.stances.sum(axis=0), [2 + 0.5, 3 + 0.5])


def test_neutral_between_needs_three_communities():
    with pytest.raises(WrongCommunityCount):
        neutral_between(CommunityAssignment((0, 1), 2), 1)


def test_rotate_zero_is_identity():
    O = unique_orthogonal(CommunityAssignment.blocks(3, 4))
    assert rotate_pair(O, 0, 1, 0) == O


def test_rotate_45_merges_columns():
    O = unique_orthogonal(CommunityAssignment.blocks(3, 2))
    R = rotate_pair(O, 0, 1, 45)
    np.testing.assert_allclose(R.column(0), R.column(1), atol=1e-15)
    np.testing.assert_allclose(R.column(0)[:4], math.sqrt(2) / 2, atol=1e-15)
    np.testing.assert_array_equal(R.column(2), O.column(2))


def test_rotate_15_gives_60_degrees():
    O = unique_orthogonal(CommunityAssignment.blocks(3, 4))
    R = rotate_pair(O, 0, 1, 15)
    a, b = R.column(0), R.column(1)
    assert a @ b / (np.linalg.norm(a) * np.linalg.norm(b)) == pytest.approx(0.5, abs=1e-12)
    assert opinion_angle(a, b) == pytest.approx(60, abs=1e-9)


@pytest.mark.parametrize("phi", range(0, 46, 5))
@pytest.mark.parametrize("sizes", [(4, 4, 4), (3, 3, 5), (100, 100, 100)])
def test_rotate_angle_and_norms(phi, sizes):
    membership = np.repeat(np.arange(3), sizes)
    O = unique_orthogonal(CommunityAssignment(tuple(membership.tolist()), 3))
    R = rotate_pair(O, 0, 1, phi)
    assert opinion_angle(R.column(0), R.column(1)) == pytest.approx(90 - 2 * phi, abs=1e-9)
    np.testing.assert_allclose(np.linalg.norm(R.stances, axis=0),
                               np.linalg.norm(O.stances, axis=0), atol=1e-12)
    assert validate(R).ok


def test_rotate_rejects_non_orthogonal():
    O = OpinionMatrix([[1, 1], [0, 1]])
    with pytest.raises(NotOrthogonal):
        rotate_pair(O, 0, 1, 10)


def test_rotate_range_violation_for_unequal_norms():
    # column 0 has norm 2, column 1 norm 1: rotating pushes stances of column 1 above 1
    O = OpinionMatrix([[1, 0], [1, 0], [1, 0], [1, 0], [0, 1]])
    with pytest.raises(RangeViolation):
        rotate_pair(O, 0, 1, 45)


def test_opinion_angle():
    assert opinion_angle([1, 0, 0], [0, 1, 0]) == pytest.approx(90)
    assert opinion_angle([0.2, 0.4], [0.2, 0.4]) == pytest.approx(0, abs=1e-6)
    O = rotate_pair(unique_orthogonal(CommunityAssignment.blocks(3, 4)), 0, 1, 30)
    assert opinion_angle(O.column(0), O.column(1)) == pytest.approx(30, abs=1e-9)
    with pytest.raises(ZeroVector):
        opinion_angle([0, 0], [1, 0])


def test_consensus_sigma_zero_is_exact_mean():
    a = CommunityAssignment.blocks(3, 4)
    O = sample_consensus(a, 0.5, 0.0, rng_seed=3)
    own = O.stances[np.arange(12), a.as_array()]
    assert np.all(own == 0.5)
    assert np.count_nonzero(O.stances) == 12


def test_consensus_statistics():
    a = CommunityAssignment(tuple([0] * 100000), 1)
    O = sample_consensus(a, 0.5, 0.2, rng_seed=11)
    s = O.column(0)
    assert abs(s.mean() - 0.5) < 0.01
    clipped = np.mean((s == 0) | (s == 1))
    assert clipped < 0.015


def test_consensus_is_deterministic():
    a = CommunityAssignment.blocks(3, 10)
    assert sample_consensus(a, 0.5, 0.2, 99) == sample_consensus(a, 0.5, 0.2, 99)
    assert sample_consensus(a, 0.5, 0.2, 99) != sample_consensus(a, 0.5, 0.2, 98)


@settings(max_examples=50)
@given(st.integers(0, 2**63), st.floats(0, 5), st.floats(0, 1))
def test_consensus_always_valid(seed, sigma, mu):
    O = sample_consensus(CommunityAssignment.blocks(3, 5), mu, sigma, seed)
    rep = validate(O)
    assert not rep.range_violations
    if mu > 0 and sigma == 0:
        assert rep.ok


def test_validate_reports():
    assert validate(OpinionMatrix(np.eye(3))).ok
    rep = validate(OpinionMatrix([[1.2, 0], [0, 1]]))
    assert rep.range_violations == [(0, 0, 1.2)]
    rep = validate(OpinionMatrix([[1, 0], [1, 0]]))
    assert rep.zero_columns == [1]
    assert "zero" in str(rep)
    with pytest.raises(RangeViolation):
        OpinionMatrix([[1.2, 0], [0, 1]]).checked()


def test_opinion_csv_roundtrip():
    O = rotate_pair(unique_orthogonal(CommunityAssignment.blocks(3, 2)), 0, 1, 20)
    text = format_opinion_csv(O)
    assert text.splitlines()[0] == "node,op0,op1,op2"
    back = parse_opinion_csv(text)
    np.testing.assert_allclose(back.stances, O.stances, rtol=1e-11)
    with pytest.raises(ParseError, match=":3:"):
        parse_opinion_csv("node,op0\n0,1\n1,abc\n", path="o.csv")
    with pytest.raises(ParseError):
        parse_opinion_csv("node,op0\n1,1\n")


def test_membership_csv_roundtrip():
    a = CommunityAssignment.blocks(3, 2)
    assert parse_membership_csv(format_membership_csv(a)) == a
