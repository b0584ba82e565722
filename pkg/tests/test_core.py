import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import dense_grover, reduced_basis
from partial_search.core import (
    SearchParams,
    angle,
    apply_sequence,
    grover_success,
    initial_reduced_state,
    k_opt,
    reduced_global,
    reduced_local,
    success_full,
    success_partial,
    trajectory,
)
from partial_search.errors import CapacityError, InvalidParameterError
from partial_search.sequence import OperatorSequence

S = OperatorSequence.parse

# arcsin(1/4), arcsin(1/8) evaluated with mpmath at 30 digits
ASIN_QUARTER = 0.252680255142078653485657436994
ASIN_EIGHTH = 0.125327831168065396874566986357
# Frobenius norm of G_4 G_2 - G_2 G_4 in the reduced basis, exactly sqrt(78)/4 (sympy)
COMMUTATOR_NORM_4_2 = math.sqrt(78) / 4


def test_angle_values():
    assert angle(2) == pytest.approx(math.pi / 6, abs=1e-15)
    assert angle(4) == pytest.approx(ASIN_QUARTER, abs=1e-15)
    assert angle(6) == pytest.approx(ASIN_EIGHTH, abs=1e-15)


@pytest.mark.parametrize("k", [0, -1])
def test_angle_rejects_nonpositive(k):
    with pytest.raises(InvalidParameterError):
        angle(k)


def test_angle_bounds():
    for k in range(2, 30):
        assert 0 < angle(k) <= math.pi / 6 + 1e-15


@pytest.mark.parametrize("n, expected", [(2, 1), (4, 3), (5, 4), (6, 6), (7, 8), (8, 12), (9, 17), (11, 35)])
def test_k_opt(n, expected):
    assert k_opt(n) == expected


def test_k_opt_maximises_over_neighbours():
    for n in range(2, 16):
        k = k_opt(n)
        best = max(range(0, k + 3), key=lambda j: grover_success(n, j))
        assert best == k


def test_grover_success_values():
    assert grover_success(2, 1) == pytest.approx(1.0, abs=1e-15)
    assert grover_success(3, 2) == pytest.approx(0.9453, abs=5e-5)
    assert grover_success(4, 3) == pytest.approx(0.9613, abs=5e-5)
    assert 1 - grover_success(11, k_opt(11)) == pytest.approx(3.1522e-6, abs=1e-10)


def test_grover_success_rejects_negative_k():
    with pytest.raises(InvalidParameterError):
        grover_success(4, -1)


@pytest.mark.parametrize("n, m, t", [(4, 2, 6), (5, 2, 17), (6, 3, 40), (7, 5, 3), (6, 1, 63)])
def test_reduced_matrices_match_dense_projection(n, m, t):
    basis = reduced_basis(n, m, t)
    np.testing.assert_allclose(reduced_global(n, m), basis.T @ dense_grover(n, n, t) @ basis, atol=1e-13)
    np.testing.assert_allclose(reduced_local(m), basis.T @ dense_grover(n, m, t) @ basis, atol=1e-13)
    s = np.full(2**n, 2.0 ** (-n / 2))
    np.testing.assert_allclose(initial_reduced_state(n, m).as_array(), basis.T @ s, atol=1e-14)


def test_reduced_global_entry_4_2():
    assert reduced_global(4, 2)[0, 0] == pytest.approx(7 / 8, abs=1e-15)


def test_reduced_local_entry():
    assert reduced_local(2)[0, 0] == pytest.approx(0.5, abs=1e-15)


@pytest.mark.parametrize("n, m", [(4, 4), (4, 5), (3, 0)])
def test_reduced_rejects_degenerate(n, m):
    with pytest.raises(InvalidParameterError):
        reduced_global(n, m)
    with pytest.raises(InvalidParameterError):
        initial_reduced_state(n, m)


def test_structural_invariants():
    for n in range(2, 13):
        for m in range(1, n):
            g, loc = reduced_global(n, m), reduced_local(m)
            np.testing.assert_allclose(g.T @ g, np.eye(3), atol=1e-12)
            np.testing.assert_allclose(loc.T @ loc, np.eye(3), atol=1e-12)
            assert np.linalg.det(g) == pytest.approx(-1.0, abs=1e-12)
            assert np.linalg.det(loc) == pytest.approx(1.0, abs=1e-12)
            assert np.array_equal(loc @ np.array([0.0, 0.0, 1.0]), [0.0, 0.0, 1.0])
            assert initial_reduced_state(n, m).norm == pytest.approx(1.0, abs=1e-15)


def test_matrices_are_read_only():
    with pytest.raises(ValueError):
        reduced_global(4, 2)[0, 0] = 0.0


def test_noncommuting():
    g, loc = reduced_global(4, 2), reduced_local(2)
    norm = np.linalg.norm(g @ loc - loc @ g)
    assert norm == pytest.approx(COMMUTATOR_NORM_4_2, abs=1e-12)
    assert norm > 2.2


def test_initial_state_values():
    st = initial_reduced_state(4, 2)
    np.testing.assert_allclose(st, [0.25, math.sqrt(3) / 4, math.sqrt(3) / 2], atol=1e-15)
    assert initial_reduced_state(6, 3).a_u == pytest.approx(math.sqrt(7 / 8), abs=1e-15)


def test_global_step_keeps_target_uniform_plane():
    """span(|t>, |s_n>) is invariant; the normal to it is a -1 eigenvector."""
    for n in range(3, 13):
        for m in range(1, n):
            g = reduced_global(n, m)
            t = np.array([1.0, 0.0, 0.0])
            s = initial_reduced_state(n, m).as_array()
            normal = np.cross(t, s)
            normal /= np.linalg.norm(normal)
            for v in (t, s, (t + s) / np.linalg.norm(t + s)):
                assert abs((g @ v) @ normal) <= 1e-12
            np.testing.assert_allclose(g @ normal, -normal, atol=1e-12)


def test_zero_u_is_not_preserved_in_general():
    # with a_u = 0 the global step keeps a_u = 0 only along one in-block
    # direction, (cos theta_m, sin theta_m, 0); elsewhere a |u> part appears
    g = reduced_global(4, 2)
    sb, cb = math.sin(angle(2)), math.cos(angle(2))
    assert abs((g @ np.array([cb, sb, 0.0]))[2]) <= 1e-12
    assert abs((g @ np.array([sb, cb, 0.0]))[2]) > 0.1
    assert abs((g @ np.array([1.0, 0.0, 0.0]))[2]) > 0.1


def test_local_steps_keep_u():
    seq = S("S(6,3;1,1,2,1,2)")
    states = trajectory(seq)
    for step, before, after in zip(seq.steps, states, states[1:]):
        if step == "L":
            assert after.a_u == before.a_u


def test_apply_sequence_examples():
    assert apply_sequence(OperatorSequence(4, 2, "")) == initial_reduced_state(4, 2)
    assert apply_sequence(S("S(4,2;1,1,2)")).a_t == pytest.approx(1.0, abs=1e-12)
    assert success_full(S("S(6,3;1,1,2,1,2)")) == pytest.approx(0.9996643, abs=1e-7)
    assert success_full(S("S(6,5;1,1,1,2,1)")) == pytest.approx(0.9986130, abs=1e-7)
    assert success_full(S("S(9,6;1,1,2,1,2,7,4)")) == pytest.approx(0.9999998, abs=1e-7)


def test_apply_sequence_custom_start():
    start = initial_reduced_state(5, 2)._replace(a_t=0.0, a_ntt=0.0, a_u=1.0)
    assert apply_sequence(OperatorSequence(5, 2, "LLL"), start) == start


def test_success_partial_examples():
    assert success_partial(S("S(5,2;1,1,1,1)")) == pytest.approx(0.9997864, abs=1e-7)
    # the reference row lists this value under the other budget; see test_tables
    assert success_partial(S("S(7,2;1,1,1,1,1,1,3,0)")) == pytest.approx(0.9999993, abs=1e-7)
    for n, m in [(3, 2), (6, 2), (9, 4)]:
        assert success_partial(OperatorSequence(n, m, "")) == pytest.approx(2.0 ** -(n - m), abs=1e-15)


def test_all_global_matches_closed_form():
    for n in range(2, 13):
        for k in range(0, 41):
            seq = OperatorSequence(n, 1, "G" * k)
            assert success_full(seq) == pytest.approx(grover_success(n, k), abs=1e-12)


@settings(max_examples=300, deadline=None)
@given(st.integers(2, 12), st.data())
def test_norm_preserved(n, data):
    m = data.draw(st.integers(1, n - 1))
    steps = data.draw(st.text(alphabet="GL", max_size=60))
    assert apply_sequence(OperatorSequence(n, m, steps)).norm == pytest.approx(1.0, abs=1e-12)


def test_search_params():
    p = SearchParams(5, 2, "10110")
    assert p.target_index == 22 and p.block == 5
    assert SearchParams.from_index(5, 2, 22) == p
    with pytest.raises(InvalidParameterError):
        SearchParams(5, 2, "1011")
    with pytest.raises(InvalidParameterError):
        SearchParams(5, 6, "10110")
    with pytest.raises(CapacityError):
        SearchParams.from_index(25, 2, 0)
    assert SearchParams.from_index(25, 2, 0, n_cap=30).n == 25
