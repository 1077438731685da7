"""Exact time evolution under a HamiltonianSpec.

Chain sectors are evolved either by dense eigendecomposition (exact long-time
phase coherence) or by a sparse Krylov backend for large sectors. Because
registers are Hamiltonian-free and occupy the high bits of every basis mask,
a fixed-total-excitation sector splits into contiguous blocks of fixed
register occupancy, each evolving under the chain propagator of the
corresponding chain excitation count.
"""

from __future__ import annotations

from math import comb

import numpy as np
import scipy.sparse as sp
from scipy.linalg import expm
from scipy.sparse.linalg import expm_multiply

from .basis import sector_configs
from .hamiltonian import HamiltonianSpec, assemble_sector, chain_bonds
from .states import PureState, SystemLayout

DEFAULT_DIM_CAP = 25_000
DEFAULT_EIGEN_DIM = 4_096
BRUTE_FORCE_MAX_SITES = 14


class SectorPropagator:
    """Eigendecomposition-based propagator for one chain sector."""

    def __init__(self, matrix: np.ndarray, excitations: int, fingerprint: str):
        self.excitations = excitations
        self.spec_fingerprint = fingerprint
        w, v = np.linalg.eigh(matrix)
        self.eigenvalues = w
        self.eigenvectors = v

    def apply(self, vec: np.ndarray, duration: float) -> np.ndarray:
        phases = np.exp(-1j * self.eigenvalues * duration)
        coeffs = self.eigenvectors.T @ vec
        if coeffs.ndim > 1:
            phases = phases[:, None]
        return self.eigenvectors @ (phases * coeffs)


class KrylovSectorPropagator:
    """Sparse expm-multiply propagator for large chain sectors."""

    def __init__(self, matrix: sp.spmatrix, excitations: int, fingerprint: str):
        self.excitations = excitations
        self.spec_fingerprint = fingerprint
        self._h = matrix.tocsc()

    def apply(self, vec: np.ndarray, duration: float) -> np.ndarray:
        if duration == 0.0:
            return vec.copy()
        return expm_multiply((-1j * duration) * self._h, vec)


class Evolver:
    """Blockwise exact evolution of PureStates under one HamiltonianSpec.

    Chain-sector propagators are built lazily and cached; sectors whose
    amplitude block is identically zero are skipped without building one.
    """

    def __init__(
        self,
        spec: HamiltonianSpec,
        backend: str = "auto",
        dim_cap: int = DEFAULT_DIM_CAP,
        eigen_dim: int = DEFAULT_EIGEN_DIM,
    ):
        if backend not in ("auto", "eigen", "krylov"):
            raise ValueError(f"unknown backend {backend!r}")
        self.spec = spec
        self.backend = backend
        self.dim_cap = dim_cap
        self.eigen_dim = eigen_dim
        self._props: dict[int, object] = {}
        self._fingerprint = spec.fingerprint()

    def propagator(self, chain_excitations: int):
        tc = chain_excitations
        if tc not in self._props:
            dim = comb(self.spec.layout.chain_length, tc)
            if dim > self.dim_cap:
                raise ValueError(
                    f"sector dimension {dim} exceeds cap {self.dim_cap}"
                )
            use_eigen = self.backend == "eigen" or (
                self.backend == "auto" and dim <= self.eigen_dim
            )
            if use_eigen:
                h = assemble_sector(self.spec, tc, sparse=False)
                self._props[tc] = SectorPropagator(h, tc, self._fingerprint)
            else:
                h = assemble_sector(self.spec, tc, sparse=True)
                self._props[tc] = KrylovSectorPropagator(
                    h, tc, self._fingerprint
                )
        return self._props[tc]

    def _blocks(self, layout: SystemLayout, total: int):
        """Contiguous (offset, dim, chain_excitations) blocks of a sector."""
        n = layout.chain_length
        r = len(layout.register_names)
        out = []
        off = 0
        for reg_mask in range(1 << r):
            k = reg_mask.bit_count()
            tc = total - k
            if tc < 0 or tc > n:
                continue
            dim = comb(n, tc)
            out.append((off, dim, tc))
            off += dim
        return out

    def evolve(self, state: PureState, duration: float) -> PureState:
        if duration == 0.0:
            return state
        amps = {}
        for t, vec in state.amps.items():
            new = np.zeros_like(vec)
            blocks = self._blocks(state.layout, t)
            assert blocks[-1][0] + blocks[-1][1] == len(vec)
            # group same-tc blocks into one batched application
            by_tc: dict[int, list[tuple[int, int]]] = {}
            for off, dim, tc in blocks:
                by_tc.setdefault(tc, []).append((off, dim))
            for tc, segs in by_tc.items():
                cols = [vec[o : o + d] for o, d in segs]
                if not any(np.any(c) for c in cols):
                    for (o, d), c in zip(segs, cols):
                        new[o : o + d] = c
                    continue
                stacked = np.stack(cols, axis=1)
                evolved = self.propagator(tc).apply(stacked, duration)
                for i, (o, d) in enumerate(segs):
                    new[o : o + d] = evolved[:, i]
            amps[t] = new
        return PureState(state.layout, amps)

    def evolve_samples(self, state: PureState, times) -> list[PureState]:
        """States at ascending times, measured from the input state at t=0."""
        times = list(times)
        if any(b < a for a, b in zip(times, times[1:])):
            raise ValueError("sample times must be ascending")
        out = []
        current = state
        prev = 0.0
        for t in times:
            current = self.evolve(current, t - prev)
            prev = t
            out.append(current)
        return out


def build(
    spec: HamiltonianSpec, excitations, backend: str = "auto"
) -> dict:
    """Propagators for the given chain excitation counts, keyed by count."""
    evolver = Evolver(spec, backend=backend)
    return {t: evolver.propagator(t) for t in excitations}


def energy_expectation(evolver: Evolver, state: PureState) -> float:
    """<H> of a state, using the chain-sector block structure."""
    total = 0.0
    for t, vec in state.amps.items():
        for off, dim, tc in evolver._blocks(state.layout, t):
            block = vec[off : off + dim]
            if not np.any(block):
                continue
            h = assemble_sector(evolver.spec, tc, sparse=True)
            total += float(np.vdot(block, h @ block).real)
    return total


def effective_gate(spec: HamiltonianSpec, duration: float | None = None) -> np.ndarray:
    """End-pair process matrix of the natural chain evolution.

    Evolves the four end-pair basis injections (rest of the chain empty) to
    the mirror time and reads back the end-pair components, in the basis
    {|00>, |01>, |10>, |11>} with the first qubit on site 1 and the second
    on site N.
    """
    if spec.layout.register_names:
        raise ValueError("effective_gate expects a chain-only layout")
    n = spec.layout.chain_length
    if duration is None:
        duration = spec.mirror_time
    evolver = Evolver(spec)
    masks = [0, 1 << (n - 1), 1, 1 | (1 << (n - 1))]
    gate = np.zeros((4, 4), dtype=complex)
    from .states import state_from_terms

    for col, mask in enumerate(masks):
        psi = state_from_terms(spec.layout, {mask: 1.0 + 0j})
        out = evolver.evolve(psi, duration)
        for row, m2 in enumerate(masks):
            t = m2.bit_count()
            if t in out.amps:
                configs = sector_configs(n, t)
                gate[row, col] = out.amps[t][np.searchsorted(configs, m2)]
    return gate


def full_space_hamiltonian(spec: HamiltonianSpec) -> sp.csr_matrix:
    """The Hamiltonian over the full 2^total_sites space, no sector structure.

    Independent oracle path: assembled directly over all basis states.
    """
    n_total = spec.layout.total_sites
    if n_total > BRUTE_FORCE_MAX_SITES:
        raise ValueError(
            f"{n_total} sites too large for brute force (max "
            f"{BRUTE_FORCE_MAX_SITES})"
        )
    dim = 1 << n_total
    states = np.arange(dim, dtype=np.int64)
    nchain = spec.layout.chain_length
    occ = np.stack([(states >> i) & 1 for i in range(nchain)])
    diag = spec.onsite @ occ
    if spec.gamma != 0.0:
        diag = diag + spec.gamma * spec.couplings.j0 * (
            (occ[:-1] & occ[1:]).sum(axis=0)
        )
    rows = [states]
    cols = [states]
    vals = [diag.astype(float)]
    for i, j, jij in chain_bonds(spec):
        hoppable = (occ[i] ^ occ[j]).astype(bool)
        src = states[hoppable]
        dst = src ^ ((1 << i) | (1 << j))
        rows.append(src)
        cols.append(dst)
        vals.append(np.full(len(src), jij))
    return sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(dim, dim),
    ).tocsr()


def full_vector(state: PureState) -> np.ndarray:
    """Embed a sector-decomposed state into the full 2^total_sites space."""
    n = state.layout.total_sites
    if n > BRUTE_FORCE_MAX_SITES:
        raise ValueError("system too large for full-space embedding")
    out = np.zeros(1 << n, dtype=complex)
    for t, vec in state.amps.items():
        out[sector_configs(n, t)] = vec
    return out


def brute_force_evolve(
    spec: HamiltonianSpec, vector: np.ndarray, duration: float
) -> np.ndarray:
    """Full-space evolution oracle, built without sector decomposition."""
    h = full_space_hamiltonian(spec)
    if h.shape[0] <= 1 << 10:
        u = expm(-1j * duration * h.toarray())
        return u @ vector
    return expm_multiply((-1j * duration) * h.tocsc(), vector)
