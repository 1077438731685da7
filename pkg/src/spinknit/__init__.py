"""Simulator for knitting distributed cluster states with spin chains.

A chain with perfect-state-transfer couplings mirrors any state about its
midpoint after the mirror time t_M = pi/(2 J0). Injecting |+> qubits at
both ends, letting the wave packets cross, and extracting them turns the
natural dynamics into controlled-Z gates between logical qubits; repeated
rounds knit a cluster-state ladder. This package simulates the full
injection/refocus/extraction protocol exactly in fixed-excitation
sectors, quantifies the produced entanglement, and reproduces error and
decoherence studies as seeded, config-driven experiments.
"""

from .basis import BasisSector, make_basis
from .hamiltonian import (
    CouplingProfile,
    HamiltonianSpec,
    pst_couplings,
    sample_disorder,
    uniform_couplings,
    with_next_nearest,
)
from .measures import concurrence, entropy, eof, fidelity
from .oracle import (
    CrossingGraph,
    Trajectory,
    crossing_time,
    crossings,
    graph_state,
    ideal_gate,
    stabilizer_expectations,
)
from .propagator import Evolver, brute_force_evolve, effective_gate
from .protocol import (
    Schedule,
    build_crossed_square,
    build_ladder,
    ideal_reference,
    injection_success_probability,
    run,
)
from .states import (
    DensityMatrix,
    PureState,
    SystemLayout,
    partial_trace,
    product_state,
    vacuum_state,
)

__version__ = "0.1.0"

__all__ = [
    "BasisSector",
    "CouplingProfile",
    "CrossingGraph",
    "DensityMatrix",
    "Evolver",
    "HamiltonianSpec",
    "PureState",
    "Schedule",
    "SystemLayout",
    "Trajectory",
    "brute_force_evolve",
    "build_crossed_square",
    "build_ladder",
    "concurrence",
    "crossing_time",
    "crossings",
    "effective_gate",
    "entropy",
    "eof",
    "fidelity",
    "graph_state",
    "ideal_gate",
    "ideal_reference",
    "injection_success_probability",
    "make_basis",
    "partial_trace",
    "product_state",
    "pst_couplings",
    "run",
    "sample_disorder",
    "stabilizer_expectations",
    "uniform_couplings",
    "vacuum_state",
    "with_next_nearest",
]
