"""Crossing geometry, graph states, stabilizers, and the ideal gate."""

import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spinknit.oracle import (
    CrossingGraph,
    Trajectory,
    crossing_time,
    crossings_of,
    graph_state,
    graph_state_amplitudes,
    ideal_gate,
    stabilizer_expectations,
)
from spinknit.states import SystemLayout

TM = np.pi / 2


def traj(qid, site, t, n=9):
    return Trajectory(qid, site, t, n)


def test_trajectory_extraction():
    t = traj(1, 1, 0.0)
    assert t.rightward
    assert t.extract_site == 9
    assert t.extract_time(TM) == pytest.approx(TM)
    t2 = traj(2, 9, 0.5)
    assert not t2.rightward
    assert t2.extract_site == 1


def test_trajectory_requires_end_injection():
    with pytest.raises(ValueError):
        traj(1, 4, 0.0)


def test_position_midpoint_at_half_mirror_time():
    t = traj(1, 1, 0.0)
    assert t.position(TM / 2, TM) == pytest.approx(5.0)


def test_counterpropagating_packets_cross_in_middle():
    a, b = traj(1, 1, 0.0), traj(2, 9, 0.0)
    t = crossing_time(a, b, TM)
    assert t == pytest.approx(TM / 2)
    assert a.position(t, TM) == pytest.approx(b.position(t, TM))


def test_parallel_packets_never_cross():
    assert crossing_time(traj(1, 1, 0.0), traj(2, 1, TM / 2), TM) is None


def test_endpoint_meeting_is_not_a_crossing():
    # second packet injected exactly when the first is extracted there
    assert crossing_time(traj(1, 1, 0.0), traj(2, 9, TM), TM) is None
    # staggered opposite packets meet strictly inside
    t = crossing_time(traj(1, 1, 0.0), traj(2, 9, TM / 2), TM)
    assert t == pytest.approx(0.75 * TM)


@given(
    st.floats(min_value=0.0, max_value=2.0),
    st.floats(min_value=0.0, max_value=2.0),
)
@settings(max_examples=80, deadline=None)
def test_crossing_positions_coincide(tr, tl):
    a, b = traj(1, 1, tr * TM), traj(2, 9, tl * TM)
    t = crossing_time(a, b, TM)
    if t is not None:
        assert a.position(t, TM) == pytest.approx(b.position(t, TM))
        assert 1 < a.position(t, TM) < 9


def test_crossed_square_graph():
    trajs = [
        traj(1, 1, 0.0),
        traj(2, 9, 0.0),
        traj(3, 1, TM / 2),
        traj(4, 9, TM / 2),
    ]
    g = crossings_of(trajs, TM, 9)
    assert g.edge_list() == [(1, 2), (1, 4), (2, 3), (3, 4)]
    assert g.neighbours(1) == {2, 4}


def test_crossings_require_valid_chain_length():
    with pytest.raises(ValueError):
        crossings_of([traj(1, 1, 0.0, 8)], TM, 8)


def test_double_crossings_cancel():
    """An even number of crossings between a pair leaves no edge."""
    trajs = [traj(1, 1, 0.0), traj(2, 9, 0.0)]
    g = crossings_of(trajs, TM, 9)
    assert g.edge_list() == [(1, 2)]


def test_graph_json_roundtrip():
    g = CrossingGraph((1, 2), frozenset({frozenset({1, 2})}))
    data = json.loads(g.to_json())
    assert data == {"vertices": [1, 2], "edges": [[1, 2]]}


def test_graph_state_amplitudes_bell_like():
    g = CrossingGraph((1, 2), frozenset({frozenset({1, 2})}))
    amps = graph_state_amplitudes(g)
    np.testing.assert_allclose(amps, np.array([1, 1, 1, -1]) / 2)


def test_graph_state_no_edges_is_product_plus():
    g = CrossingGraph((1, 2, 3), frozenset())
    amps = graph_state_amplitudes(g)
    np.testing.assert_allclose(amps, np.full(8, 1 / np.sqrt(8)))


def test_graph_state_placement():
    g = CrossingGraph((1, 2), frozenset({frozenset({1, 2})}))
    lay = SystemLayout(3, ("s",))
    psi = graph_state(g, lay, [1, "s"])
    terms = psi.terms()
    assert terms[0] == pytest.approx(0.5)
    assert terms[0b0001] == pytest.approx(0.5)
    assert terms[0b1000] == pytest.approx(0.5)
    assert terms[0b1001] == pytest.approx(-0.5)


def test_stabilizers_fix_graph_states():
    trajs = [
        traj(1, 1, 0.0),
        traj(2, 9, 0.0),
        traj(3, 1, TM / 2),
        traj(4, 9, TM / 2),
    ]
    g = crossings_of(trajs, TM, 9)
    np.testing.assert_allclose(stabilizer_expectations(g), 1.0, atol=1e-12)


def test_ideal_gate_period_four_in_length():
    np.testing.assert_allclose(ideal_gate(9), ideal_gate(13), atol=1e-12)
    g9 = ideal_gate(9)
    np.testing.assert_allclose(
        g9, np.diag([1, 1, 1, -1])[:, [0, 2, 1, 3]], atol=1e-12
    )


def test_ideal_gate_phases():
    for n in range(5, 13):
        g = ideal_gate(n)
        assert g[1, 2] == pytest.approx((-1j) ** (n - 1))
        assert g[3, 3] == pytest.approx((-1.0) ** n)
        np.testing.assert_allclose(g @ g.conj().T, np.eye(4), atol=1e-12)
