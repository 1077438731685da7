"""Ideal reference states from wave-packet crossing geometry.

Each injected qubit is a wave packet travelling end to end in one mirror
time; every crossing of two packets inside the chain contributes a phase
of -1, i.e. a controlled-Z between the corresponding logical qubits. The
ideal produced state is therefore the graph state whose edges are the
pairwise trajectory crossings (reduced mod 2).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .states import PureState, SystemLayout, state_from_terms

TIME_TOL = 1e-9


@dataclass(frozen=True)
class Trajectory:
    """Straight-line wave-packet path in the (site, time) plane."""

    qubit_id: int
    inject_site: int  # chain end, 1 or N
    inject_time: float
    chain_length: int

    def __post_init__(self):
        if self.inject_site not in (1, self.chain_length):
            raise ValueError("trajectories must start at a chain end")

    @property
    def rightward(self) -> bool:
        return self.inject_site == 1

    @property
    def extract_site(self) -> int:
        return self.chain_length + 1 - self.inject_site

    def extract_time(self, mirror_time: float) -> float:
        return self.inject_time + mirror_time

    def position(self, t: float, mirror_time: float) -> float:
        frac = (t - self.inject_time) / mirror_time
        span = self.chain_length - 1
        if self.rightward:
            return 1 + span * frac
        return self.chain_length - span * frac


def crossing_time(
    a: Trajectory, b: Trajectory, mirror_time: float
) -> float | None:
    """Interior crossing time of two trajectories, or None.

    Parallel (same-direction) packets never cross; opposite packets cross
    once if the intersection lies strictly inside both time intervals.
    """
    if a.rightward == b.rightward:
        return None
    right, left = (a, b) if a.rightward else (b, a)
    # 1 + s (t - t_r)/t_M = N - s (t - t_l)/t_M with s = N - 1
    t = (right.inject_time + left.inject_time + mirror_time) / 2.0
    lo = max(a.inject_time, b.inject_time)
    hi = min(a.extract_time(mirror_time), b.extract_time(mirror_time))
    if lo + TIME_TOL < t < hi - TIME_TOL:
        return t
    return None


@dataclass(frozen=True)
class CrossingGraph:
    """Logical qubits and the parity-reduced crossing edges between them."""

    vertices: tuple[int, ...]
    edges: frozenset[frozenset]

    def neighbours(self, v: int) -> set[int]:
        return {u for e in self.edges for u in e if v in e} - {v}

    def edge_list(self) -> list[tuple[int, int]]:
        return sorted(tuple(sorted(e)) for e in self.edges)

    def to_json(self) -> str:
        return json.dumps(
            {"vertices": list(self.vertices), "edges": self.edge_list()}
        )


def crossings_of(
    trajectories: list[Trajectory], mirror_time: float, chain_length: int
) -> CrossingGraph:
    """Crossing graph of a set of trajectories on an N = 1 (mod 4) chain."""
    if chain_length % 4 != 1:
        raise ValueError(
            "crossing graph requires N = 1 (mod 4); other lengths carry "
            "non-CZ single-excitation phases"
        )
    counts: dict[frozenset, int] = {}
    for i, a in enumerate(trajectories):
        for b in trajectories[i + 1 :]:
            if crossing_time(a, b, mirror_time) is not None:
                key = frozenset((a.qubit_id, b.qubit_id))
                counts[key] = counts.get(key, 0) + 1
    edges = frozenset(k for k, c in counts.items() if c % 2 == 1)
    return CrossingGraph(
        tuple(sorted(t.qubit_id for t in trajectories)), edges
    )


def crossings(schedule) -> CrossingGraph:
    """Crossing graph of a protocol schedule (see protocol.Schedule)."""
    return crossings_of(
        schedule.trajectories,
        schedule.spec.mirror_time,
        schedule.spec.layout.chain_length,
    )


def graph_state_amplitudes(graph: CrossingGraph) -> np.ndarray:
    """Amplitudes of prod_edges CZ |+...+> over 2^n assignments.

    Bit k of the index is the value of the k-th vertex in sorted order.
    """
    n = len(graph.vertices)
    pos = {v: k for k, v in enumerate(graph.vertices)}
    idx = np.arange(1 << n)
    signs = np.zeros(1 << n, dtype=np.int64)
    for e in graph.edges:
        u, v = tuple(e)
        signs += ((idx >> pos[u]) & 1) & ((idx >> pos[v]) & 1)
    return ((-1.0) ** signs) / np.sqrt(2.0**n)


def graph_state(graph: CrossingGraph, layout: SystemLayout, sites) -> PureState:
    """The graph state placed on `sites` (one per vertex, sorted order),
    all other sites of the layout in |0>."""
    sites = list(sites)
    if len(sites) != len(graph.vertices):
        raise ValueError("need one site per graph vertex")
    amps = graph_state_amplitudes(graph)
    bits = [1 << layout.site_index(s) for s in sites]
    terms = {}
    for assignment, amp in enumerate(amps):
        mask = 0
        for k, bit in enumerate(bits):
            if (assignment >> k) & 1:
                mask |= bit
        terms[mask] = complex(amp)
    return state_from_terms(layout, terms)


def stabilizer_expectations(graph: CrossingGraph) -> np.ndarray:
    """<K_v> for each vertex stabilizer K_v = X_v prod_{u ~ v} Z_u."""
    amps = graph_state_amplitudes(graph)
    n = len(graph.vertices)
    pos = {v: k for k, v in enumerate(graph.vertices)}
    idx = np.arange(1 << n)
    out = np.zeros(n)
    for v in graph.vertices:
        k = pos[v]
        flipped = idx ^ (1 << k)
        z = np.zeros(1 << n, dtype=np.int64)
        for u in graph.neighbours(v):
            z += (idx >> pos[u]) & 1
        out[k] = float(np.sum(amps.conj() * ((-1.0) ** z) * amps[flipped]).real)
    return out


def ideal_gate(n_sites: int) -> np.ndarray:
    """The end-pair gate of the natural PST dynamics at the mirror time.

    Basis {|00>, |01>, |10>, |11>}; the single-excitation entries carry the
    transfer phase (-i)^(N-1) and the doubly-excited entry the fermionic
    crossing sign (-1)^N.
    """
    if n_sites < 2:
        raise ValueError("need at least 2 sites")
    phase = (-1j) ** (n_sites - 1)
    g = np.zeros((4, 4), dtype=complex)
    g[0, 0] = 1.0
    g[1, 2] = phase
    g[2, 1] = phase
    g[3, 3] = (-1.0) ** n_sites
    return g
