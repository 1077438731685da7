"""System layouts, pure states over excitation sectors, and local operations.

A layout is a chain of N sites (labelled 1..N) plus named register sites
(auxiliary/storage qubits) that carry no Hamiltonian terms. Internally site
indices are 0-based with chain sites first and registers after, in creation
order; registers therefore occupy the high bits of every basis mask, so the
ascending-mask sector order groups configurations into contiguous blocks of
fixed register occupancy.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from .basis import MASK_DTYPE, BasisSector, popcount, ranks_of, sector_configs

NORM_TOL = 1e-12

#: shorthand single-qubit states accepted wherever a qubit state is expected
QUBIT_STATES = {
    "0": (1.0, 0.0),
    "1": (0.0, 1.0),
    "+": (1 / np.sqrt(2), 1 / np.sqrt(2)),
    "-": (1 / np.sqrt(2), -1 / np.sqrt(2)),
}


def _qubit(q) -> np.ndarray:
    if isinstance(q, str):
        try:
            q = QUBIT_STATES[q]
        except KeyError:
            raise ValueError(f"unknown qubit shorthand {q!r}") from None
    v = np.asarray(q, dtype=complex)
    if v.shape != (2,):
        raise ValueError("single-qubit state must have two amplitudes")
    if abs(np.vdot(v, v).real - 1.0) > 1e-9:
        raise ValueError("single-qubit state is not normalized")
    return v


@dataclass(frozen=True)
class SystemLayout:
    """Chain sites 1..N plus named Hamiltonian-free register sites."""

    chain_length: int
    register_names: tuple[str, ...] = ()

    def __post_init__(self):
        if self.chain_length < 2:
            raise ValueError("chain must have at least 2 sites")
        names = tuple(self.register_names)
        if len(set(names)) != len(names):
            raise ValueError("register names must be distinct")
        object.__setattr__(self, "register_names", names)

    @property
    def total_sites(self) -> int:
        return self.chain_length + len(self.register_names)

    def site_index(self, site) -> int:
        """0-based internal index of a chain site (int 1..N) or register name."""
        if isinstance(site, (int, np.integer)):
            if not 1 <= site <= self.chain_length:
                raise KeyError(f"chain site {site} not in 1..{self.chain_length}")
            return int(site) - 1
        try:
            return self.chain_length + self.register_names.index(site)
        except ValueError:
            raise KeyError(f"unknown register {site!r}") from None

    def site_label(self, index: int):
        if index < self.chain_length:
            return index + 1
        return self.register_names[index - self.chain_length]

    def with_register(self, name: str) -> "SystemLayout":
        return SystemLayout(self.chain_length, self.register_names + (name,))

    def without_register(self, name: str) -> "SystemLayout":
        if name not in self.register_names:
            raise KeyError(f"unknown register {name!r}")
        return SystemLayout(
            self.chain_length,
            tuple(n for n in self.register_names if n != name),
        )


class PureState:
    """Normalized state over a union of fixed-excitation sectors.

    `amps` maps excitation count T to the amplitude vector over the
    (total_sites, T) sector in ascending-mask order. Absent sectors are zero.
    States are immutable by convention; operations return new instances.
    """

    __slots__ = ("layout", "amps")

    def __init__(self, layout: SystemLayout, amps: dict[int, np.ndarray]):
        self.layout = layout
        n = layout.total_sites
        clean = {}
        for t, vec in sorted(amps.items()):
            v = np.asarray(vec, dtype=complex)
            if v.shape != (comb(n, t),):
                raise ValueError(f"sector {t} amplitude vector has wrong length")
            clean[t] = v
        self.amps = clean

    def sectors(self) -> list[int]:
        return sorted(self.amps)

    def norm(self) -> float:
        return float(
            np.sqrt(sum(np.vdot(v, v).real for v in self.amps.values()))
        )

    def normalized(self) -> "PureState":
        n = self.norm()
        if n < NORM_TOL:
            raise ValueError("cannot normalize a zero state")
        return PureState(self.layout, {t: v / n for t, v in self.amps.items()})

    def inner(self, other: "PureState") -> complex:
        if self.layout != other.layout:
            raise ValueError("layout mismatch")
        return sum(
            np.vdot(self.amps[t], other.amps[t])
            for t in self.amps
            if t in other.amps
        )

    def terms(self) -> dict[int, complex]:
        """Nonzero amplitudes keyed by basis bitmask (small states only)."""
        out = {}
        n = self.layout.total_sites
        for t, vec in self.amps.items():
            configs = sector_configs(n, t)
            nz = np.nonzero(vec)[0]
            for i in nz:
                out[int(configs[i])] = complex(vec[i])
        return out


def vacuum_state(layout: SystemLayout) -> PureState:
    return PureState(layout, {0: np.ones(1, dtype=complex)})


def state_from_terms(layout: SystemLayout, terms: dict[int, complex]) -> PureState:
    """Build a PureState from a {bitmask: amplitude} dictionary."""
    n = layout.total_sites
    by_t: dict[int, dict[int, complex]] = {}
    for mask, amp in terms.items():
        t = int(mask).bit_count()
        by_t.setdefault(t, {})[mask] = amp
    amps = {}
    for t, d in by_t.items():
        configs = sector_configs(n, t)
        vec = np.zeros(len(configs), dtype=complex)
        idx = ranks_of(np.asarray(list(d), dtype=MASK_DTYPE), configs)
        vec[idx] = np.asarray(list(d.values()))
        amps[t] = vec
    return PureState(layout, amps)


def product_state(layout: SystemLayout, assignments: dict) -> PureState:
    """Tensor product of single-qubit states; unassigned sites are |0>.

    `assignments` maps site labels to single-qubit states (two amplitudes or
    one of the shorthands "0", "1", "+", "-").
    """
    terms = {0: 1.0 + 0.0j}
    for site, q in assignments.items():
        a0, a1 = _qubit(q)
        bit = 1 << layout.site_index(site)
        new: dict[int, complex] = {}
        for mask, amp in terms.items():
            if a0 != 0:
                new[mask] = new.get(mask, 0.0) + amp * a0
            if a1 != 0:
                new[mask | bit] = new.get(mask | bit, 0.0) + amp * a1
        terms = new
    return state_from_terms(layout, terms).normalized()


def apply_swap(state: PureState, site_a, site_b) -> PureState:
    """Exchange the occupancy of two sites (a basis permutation)."""
    ia = state.layout.site_index(site_a)
    ib = state.layout.site_index(site_b)
    if ia == ib:
        return state
    bits = MASK_DTYPE((1 << ia) | (1 << ib))
    n = state.layout.total_sites
    amps = {}
    for t, vec in state.amps.items():
        configs = sector_configs(n, t)
        occ_a = (configs >> ia) & 1
        occ_b = (configs >> ib) & 1
        swapped = np.where(occ_a != occ_b, configs ^ bits, configs)
        new = np.empty_like(vec)
        new[np.searchsorted(configs, swapped)] = vec
        amps[t] = new
    return PureState(state.layout, amps)


class MeasurementResult:
    """Outcome probabilities and post-measurement branches for one site."""

    def __init__(self, state: PureState, site):
        idx = state.layout.site_index(site)
        n = state.layout.total_sites
        p1 = 0.0
        self._branches = {0: {}, 1: {}}
        for t, vec in state.amps.items():
            occ = ((sector_configs(n, t) >> idx) & 1).astype(bool)
            p1 += float(np.vdot(vec[occ], vec[occ]).real)
            v0 = np.where(occ, 0.0, vec)
            v1 = np.where(occ, vec, 0.0)
            self._branches[0][t] = v0
            self._branches[1][t] = v1
        self._layout = state.layout
        self.p1 = p1
        self.p0 = 1.0 - p1

    @property
    def probabilities(self) -> tuple[float, float]:
        return (self.p0, self.p1)

    def post(self, outcome: int) -> PureState:
        p = (self.p0, self.p1)[outcome]
        if p < NORM_TOL:
            raise ValueError(f"outcome {outcome} has zero probability")
        return PureState(self._layout, self._branches[outcome]).normalized()

    def sample(self, rng: np.random.Generator) -> tuple[int, PureState]:
        outcome = int(rng.random() < self.p1)
        return outcome, self.post(outcome)


def measure_site(state: PureState, site) -> MeasurementResult:
    return MeasurementResult(state, site)


def occupation_probabilities(state: PureState) -> np.ndarray:
    """Per-site excitation probability, in layout site order."""
    n = state.layout.total_sites
    occ = np.zeros(n)
    for t, vec in state.amps.items():
        configs = sector_configs(n, t)
        w = np.abs(vec) ** 2
        for i in range(n):
            sel = ((configs >> i) & 1).astype(bool)
            occ[i] += w[sel].sum()
    return occ


@dataclass(frozen=True)
class DensityMatrix:
    """Reduced density matrix on an ordered list of sites."""

    sites: tuple
    matrix: np.ndarray

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def validate(self, tol: float = 1e-12) -> None:
        m = self.matrix
        if m.shape != (2 ** len(self.sites),) * 2:
            raise ValueError("matrix dimension does not match site count")
        if np.max(np.abs(m - m.conj().T)) > tol:
            raise ValueError("density matrix is not Hermitian")
        if abs(self.trace - 1.0) > max(tol, 1e-10):
            raise ValueError("density matrix trace is not 1")


def partial_trace(state: PureState, keep) -> DensityMatrix:
    """Reduced density matrix over `keep` (ordered site labels)."""
    keep = list(keep)
    if not keep:
        raise ValueError("keep list must be nonempty")
    if len(keep) > 8:
        raise ValueError("partial trace limited to 8 kept sites")
    idxs = [state.layout.site_index(s) for s in keep]
    if len(set(idxs)) != len(idxs):
        raise ValueError("duplicate sites in keep list")
    keep_bits = MASK_DTYPE(sum(1 << i for i in idxs))
    k = len(idxs)
    n = state.layout.total_sites

    all_env = []
    all_sub = []
    all_amp = []
    for t, vec in state.amps.items():
        configs = sector_configs(n, t)
        env = configs & ~keep_bits
        sub = np.zeros(len(configs), dtype=np.int64)
        for j, i in enumerate(idxs):
            # keep[0] is the most significant qubit of the reduced system
            sub |= ((configs >> i) & 1) << (k - 1 - j)
        all_env.append(env)
        all_sub.append(sub)
        all_amp.append(vec)
    env = np.concatenate(all_env)
    sub = np.concatenate(all_sub)
    amp = np.concatenate(all_amp)

    _, env_id = np.unique(env, return_inverse=True)
    m = np.zeros((env_id.max() + 1, 2**k), dtype=complex)
    m[env_id, sub] = amp
    rho = m.T @ m.conj()
    return DensityMatrix(tuple(keep), rho)


def _reverse_chain_bits(configs: np.ndarray, n_chain: int) -> np.ndarray:
    rev = configs & ~MASK_DTYPE((1 << n_chain) - 1)
    for i in range(n_chain):
        rev |= ((configs >> i) & 1) << (n_chain - 1 - i)
    return rev


def mirror(state: PureState) -> PureState:
    """Reflect the chain about its midpoint; registers untouched."""
    n = state.layout.total_sites
    nc = state.layout.chain_length
    amps = {}
    for t, vec in state.amps.items():
        configs = sector_configs(n, t)
        mirrored = _reverse_chain_bits(configs, nc)
        new = np.empty_like(vec)
        new[np.searchsorted(configs, mirrored)] = vec
        amps[t] = new
    return PureState(state.layout, amps)


def flip(state: PureState) -> PureState:
    """Flip every chain spin; maps chain excitation count T to N - T."""
    n = state.layout.total_sites
    chain_mask = MASK_DTYPE((1 << state.layout.chain_length) - 1)
    terms: dict[int, dict[int, np.ndarray]] = {}
    for t, vec in state.amps.items():
        configs = sector_configs(n, t)
        flipped = configs ^ chain_mask
        new_t = popcount(flipped)
        for tt in np.unique(new_t):
            sel = new_t == tt
            target = sector_configs(n, int(tt))
            bucket = terms.setdefault(int(tt), np.zeros(len(target), dtype=complex))
            bucket[np.searchsorted(target, flipped[sel])] += vec[sel]
    return PureState(state.layout, terms)


def add_register(state: PureState, name: str, qubit="0") -> PureState:
    """Append a register site in the given single-qubit state."""
    a0, a1 = _qubit(qubit)
    layout = state.layout.with_register(name)
    n = state.layout.total_sites
    amps: dict[int, np.ndarray] = {}
    for t, vec in state.amps.items():
        # the new site is the highest bit: configs without it form a prefix
        # of the enlarged sector, configs with it a suffix, both in the old
        # sector's internal order
        if a0 != 0:
            tgt = amps.setdefault(t, np.zeros(comb(n + 1, t), dtype=complex))
            tgt[: comb(n, t)] += a0 * vec
        if a1 != 0:
            tgt = amps.setdefault(
                t + 1, np.zeros(comb(n + 1, t + 1), dtype=complex)
            )
            tgt[comb(n + 1, t + 1) - comb(n, t) :] += a1 * vec
    return PureState(layout, amps)


def drop_register(state: PureState, name: str) -> PureState:
    """Remove a register that is in a definite |0> or |1> product state."""
    idx = state.layout.site_index(name)
    n = state.layout.total_sites
    low = MASK_DTYPE((1 << idx) - 1)
    occupancies = set()
    compacted: dict[int, np.ndarray] = {}
    for t, vec in state.amps.items():
        configs = sector_configs(n, t)
        nz = np.abs(vec) > NORM_TOL
        occ = (configs >> idx) & 1
        occupancies.update(np.unique(occ[nz]).tolist())
        if len(occupancies) > 1:
            raise ValueError(f"register {name!r} is not in a product state")
        new_masks = (configs & low) | ((configs >> (idx + 1)) << idx)
        for o in (0, 1):
            sel = (occ == o) & nz
            if not np.any(sel):
                continue
            tt = t - o
            target = sector_configs(n - 1, tt)
            bucket = compacted.setdefault(
                tt, np.zeros(len(target), dtype=complex)
            )
            bucket[np.searchsorted(target, new_masks[sel])] += vec[sel]
    if not compacted:
        compacted = {0: np.ones(1, dtype=complex)}
    return PureState(state.layout.without_register(name), compacted)
