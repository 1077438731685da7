"""Timed injection/refocus/extraction schedules and their execution.

A schedule owns a chain Hamiltonian spec and an ordered event list. Qubits
are injected at the chain ends by SWAP with a fresh |+> register which is
measured immediately afterwards (refocussing); finding it empty heralds a
successful injection. Extractions SWAP an end site into a fresh empty
storage register. SWAPs are instantaneous; storage registers idle under the
Hamiltonian and are part of the simulated system throughout.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .hamiltonian import HamiltonianSpec, pst_couplings
from .oracle import Trajectory, crossings, graph_state
from .propagator import Evolver
from .states import (
    PureState,
    SystemLayout,
    add_register,
    apply_swap,
    drop_register,
    measure_site,
    vacuum_state,
)

PROB_TOL = 1e-12


@dataclass(frozen=True)
class Event:
    """One protocol step; simultaneous events apply in listed order."""

    time: float
    kind: str  # inject | refocus | extract
    site: int | None = None  # chain end site for inject/extract
    register: str | None = None
    qubit_state: str = "+"
    registers: tuple[str, ...] = ()  # refocus targets
    qubit_id: int | None = None

    def __post_init__(self):
        if self.kind not in ("inject", "refocus", "extract"):
            raise ValueError(f"unknown event kind {self.kind!r}")


@dataclass(frozen=True)
class Schedule:
    """Ordered protocol events over one chain spec."""

    spec: HamiltonianSpec
    events: tuple[Event, ...]
    trajectories: tuple[Trajectory, ...]
    end_time: float
    storage_names: tuple[str, ...] = ()
    qubit_sites: dict = field(default_factory=dict)  # qubit_id -> final site

    def __post_init__(self):
        times = [e.time for e in self.events]
        if any(b < a - 1e-12 for a, b in zip(times, times[1:])):
            raise ValueError("events must be sorted by time")

    @property
    def run_layout(self) -> SystemLayout:
        return SystemLayout(
            self.spec.layout.chain_length, tuple(self.storage_names)
        )

    @property
    def mirror_time(self) -> float:
        return self.spec.mirror_time


@dataclass(frozen=True)
class RefocusRecord:
    time: float
    register: str
    p0: float
    p1: float
    outcome: int


@dataclass
class RunRecord:
    """Outcome of executing a schedule."""

    schedule: Schedule
    refocus_log: list[RefocusRecord]
    success_probability: float
    samples: list[tuple[float, str, float]]
    final_state: PureState
    status: str  # ok | reset | reinitialise

    def metric_series(self, name: str) -> tuple[np.ndarray, np.ndarray]:
        pts = [(t, v) for t, n, v in self.samples if n == name]
        return (
            np.array([p[0] for p in pts]),
            np.array([p[1] for p in pts]),
        )


def _delays(scenario: str, delta_t: float) -> dict[int, float]:
    table = {
        "none": {},
        "A": {3: delta_t, 4: delta_t},
        "B": {4: delta_t},
        "C": {2: delta_t, 4: delta_t},
        "D": {1: delta_t, 4: delta_t},
    }
    if scenario not in table:
        raise ValueError(f"unknown delay scenario {scenario!r}")
    d = {q: 0.0 for q in (1, 2, 3, 4)}
    d.update(table[scenario])
    return d


def _check_chain_length(n: int) -> None:
    if n < 9 or n % 4 != 1:
        raise ValueError("protocol chains require N >= 9 with N = 1 (mod 4)")


def _default_spec(n: int, j0: float) -> HamiltonianSpec:
    return HamiltonianSpec(SystemLayout(n), pst_couplings(n, j0))


def build_crossed_square(
    n: int | None = None,
    scenario: str = "none",
    delta_t: float = 0.0,
    j0: float = 1.0,
    spec: HamiltonianSpec | None = None,
    readout: bool = False,
) -> Schedule:
    """Two injection rounds at t = 0 and t_M/2, extractions at t_M (and,
    with readout, at 3 t_M/2); delay scenarios shift individual injections.
    """
    if spec is None:
        spec = _default_spec(n, j0)
    n = spec.layout.chain_length
    _check_chain_length(n)
    if delta_t < 0:
        raise ValueError("delta_t must be nonnegative")
    t_m = spec.mirror_time
    d = _delays(scenario, delta_t)

    inject_plan = [
        (1, 1, d[1]),
        (2, n, d[2]),
        (3, 1, t_m / 2 + d[3]),
        (4, n, t_m / 2 + d[4]),
    ]
    extract_plan = [(2, 1, t_m), (1, n, t_m)]
    if readout:
        extract_plan += [(4, 1, 3 * t_m / 2), (3, n, 3 * t_m / 2)]
    return _assemble_schedule(spec, inject_plan, extract_plan)


def build_ladder(
    n: int | None = None,
    rounds: int = 1,
    j0: float = 1.0,
    spec: HamiltonianSpec | None = None,
    readout: bool = True,
) -> Schedule:
    """rounds+1 injection rounds at intervals of t_M/2, each pair extracted
    one mirror time after injection; produces 2(rounds+1) logical qubits."""
    if spec is None:
        spec = _default_spec(n, j0)
    n = spec.layout.chain_length
    _check_chain_length(n)
    if rounds < 0:
        raise ValueError("rounds must be nonnegative")
    t_m = spec.mirror_time
    inject_plan = []
    extract_plan = []
    for k in range(rounds + 1):
        qa, qb = 2 * k + 1, 2 * k + 2
        inject_plan += [(qa, 1, k * t_m / 2), (qb, n, k * t_m / 2)]
        if readout or k < rounds:
            # a packet injected at site 1 arrives at site N, and vice versa
            extract_plan += [
                (qa, n, k * t_m / 2 + t_m),
                (qb, 1, k * t_m / 2 + t_m),
            ]
    return _assemble_schedule(spec, inject_plan, extract_plan)


def _assemble_schedule(spec, inject_plan, extract_plan) -> Schedule:
    n = spec.layout.chain_length
    t_m = spec.mirror_time
    events = []
    trajectories = []
    for qid, site, t in inject_plan:
        reg = f"inj{qid}"
        events.append(
            Event(t, "inject", site=site, register=reg, qubit_id=qid)
        )
        events.append(Event(t, "refocus", registers=(reg,)))
        trajectories.append(Trajectory(qid, site, t, n))

    qubit_sites = {
        t.qubit_id: t.extract_site for t in trajectories
    }
    storage = []
    for qid, site, t in sorted(extract_plan, key=lambda p: (p[2], p[1])):
        reg = f"sto{qid}"
        storage.append(reg)
        events.append(
            Event(t, "extract", site=site, register=reg, qubit_id=qid)
        )
        qubit_sites[qid] = reg

    # at equal times extractions precede injections (and the refocus that
    # trails each injection); the sort is stable on insertion order
    events.sort(key=lambda e: (e.time, 0 if e.kind == "extract" else 1))
    end = max(e.time for e in events) + t_m / 2
    return Schedule(
        spec,
        tuple(events),
        tuple(trajectories),
        end,
        tuple(storage),
        qubit_sites,
    )


def ideal_reference(schedule: Schedule) -> PureState:
    """Ideal cluster state on the run layout: the crossing-graph state on
    the qubits' final sites, the rest of the system in vacuum."""
    graph = crossings(schedule)
    sites = [schedule.qubit_sites[q] for q in graph.vertices]
    return graph_state(graph, schedule.run_layout, sites)


def run(
    schedule: Schedule,
    policy: str = "post-select",
    sample_times=(),
    metrics: dict | None = None,
    evolver: Evolver | None = None,
    rng: np.random.Generator | None = None,
) -> RunRecord:
    """Execute a schedule.

    policy "post-select" follows the all-empty refocus branch and records
    every branch probability; "sample" draws outcomes from `rng` and stops
    with status "reset" (all auxiliaries excited) or "reinitialise" (mixed
    outcome) when refocussing fails.
    """
    if policy not in ("post-select", "sample"):
        raise ValueError(f"unknown branch policy {policy!r}")
    if policy == "sample" and rng is None:
        raise ValueError("sample policy requires an rng")
    if evolver is None:
        evolver = Evolver(schedule.spec)
    metrics = metrics or {}

    # timeline of (time, priority, payload); events precede samples at a tie
    timeline = [(e.time, 0, i, e) for i, e in enumerate(schedule.events)]
    timeline += [
        (t, 1, i, None) for i, t in enumerate(sorted(sample_times))
    ]
    timeline.sort(key=lambda item: (item[0], item[1], item[2]))

    state = vacuum_state(schedule.run_layout)
    now = 0.0
    refocus_log: list[RefocusRecord] = []
    success = 1.0
    samples: list[tuple[float, str, float]] = []
    status = "ok"

    for t, _, _, event in timeline:
        if t > now:
            state = evolver.evolve(state, t - now)
            now = t
        if event is None:
            for name, fn in metrics.items():
                samples.append((t, name, float(fn(state, t))))
            continue
        if event.kind == "inject":
            state = add_register(state, event.register, event.qubit_state)
            state = apply_swap(state, event.site, event.register)
        elif event.kind == "extract":
            # storage registers exist (empty) from the start of the run
            state = apply_swap(state, event.site, event.register)
        else:  # refocus
            outcomes = []
            for reg in event.registers:
                m = measure_site(state, reg)
                if policy == "post-select":
                    outcome = 0
                    if m.p0 < PROB_TOL:
                        status = "reinitialise"
                        break
                    state = m.post(0)
                    success *= m.p0
                else:
                    outcome, state = m.sample(rng)
                refocus_log.append(
                    RefocusRecord(t, reg, m.p0, m.p1, outcome)
                )
                outcomes.append(outcome)
                state = drop_register(state, reg)
            if any(outcomes):
                status = "reset" if all(outcomes) else "reinitialise"
            if status != "ok":
                break

    if status == "ok" and schedule.end_time > now:
        state = evolver.evolve(state, schedule.end_time - now)
    return RunRecord(
        schedule, refocus_log, success, samples, state, status
    )


def injection_success_probability(
    n: int, j0: float = 1.0, spec: HamiltonianSpec | None = None
) -> float:
    """Joint probability of the all-empty refocus outcome at the t_M/2
    injection round of the standard crossed-square schedule."""
    schedule = build_crossed_square(n, j0=j0, spec=spec)
    record = run(schedule)
    t_m = schedule.mirror_time
    p = 1.0
    for r in record.refocus_log:
        if r.time > t_m / 4:
            p *= r.p0
    return p
