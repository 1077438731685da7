"""Coupling profiles and per-sector Hamiltonian assembly.

The chain Hamiltonian is an XY hopping model with on-site energies, an
optional nearest-neighbour excitation-excitation interaction (strength
gamma * J0) and optional next-nearest-neighbour hopping (strength Delta
times the mean of the adjacent couplings). All terms act on chain sites
only; register sites are idle.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp

from .basis import sector_configs
from .states import SystemLayout


@dataclass(frozen=True)
class CouplingProfile:
    """Nearest and next-nearest couplings of an N-site chain."""

    j0: float
    nearest: np.ndarray  # J_{i,i+1}, length N-1
    next_nearest: np.ndarray  # J_{i,i+2}, length N-2

    def __post_init__(self):
        object.__setattr__(
            self, "nearest", np.asarray(self.nearest, dtype=float)
        )
        object.__setattr__(
            self, "next_nearest", np.asarray(self.next_nearest, dtype=float)
        )
        if len(self.next_nearest) != max(0, len(self.nearest) - 1):
            raise ValueError("next_nearest must have length N-2")

    @property
    def n_sites(self) -> int:
        return len(self.nearest) + 1

    @property
    def j_max(self) -> float:
        return float(np.max(self.nearest))

    @property
    def mirror_time(self) -> float:
        """t_M = pi/(2 J0), with hbar = 1."""
        return np.pi / (2.0 * self.j0)


def pst_couplings(n_sites: int, j0: float = 1.0) -> CouplingProfile:
    """Perfect-state-transfer profile J_{i,i+1} = J0 sqrt(i (N-i))."""
    if n_sites < 2:
        raise ValueError("need at least 2 sites")
    if j0 <= 0:
        raise ValueError("j0 must be positive")
    i = np.arange(1, n_sites)
    nearest = j0 * np.sqrt(i * (n_sites - i))
    return CouplingProfile(j0, nearest, np.zeros(max(0, n_sites - 2)))


def uniform_couplings(n_sites: int, j: float = 1.0) -> CouplingProfile:
    """Uniform profile, for oracle and cross-check use only."""
    return CouplingProfile(j, np.full(n_sites - 1, j), np.zeros(max(0, n_sites - 2)))


def with_next_nearest(profile: CouplingProfile, delta: float) -> CouplingProfile:
    """Add J_{i,i+2} = Delta (J_{i,i+1} + J_{i+1,i+2}) / 2."""
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    nnn = delta * (profile.nearest[:-1] + profile.nearest[1:]) / 2.0
    return replace(profile, next_nearest=nnn)


def sample_disorder(epsilon: float, n_sites: int, seed: int) -> np.ndarray:
    """On-site energies epsilon * r_i with r_i uniform on [0, 1).

    The result is in units of the largest nearest-neighbour coupling; scale
    by CouplingProfile.j_max before use in a HamiltonianSpec.
    """
    if epsilon < 0:
        raise ValueError("epsilon must be nonnegative")
    rng = np.random.default_rng(seed)
    return epsilon * rng.random(n_sites)


@dataclass(frozen=True)
class HamiltonianSpec:
    """Full specification of the chain Hamiltonian including perturbations."""

    layout: SystemLayout
    couplings: CouplingProfile
    onsite: np.ndarray = None  # E_i, length N; default zeros
    gamma: float = 0.0
    epsilon: float = 0.0
    disorder_seed: int | None = None

    def __post_init__(self):
        if self.couplings.n_sites != self.layout.chain_length:
            raise ValueError("coupling profile does not match chain length")
        onsite = self.onsite
        if onsite is None:
            onsite = np.zeros(self.layout.chain_length)
        onsite = np.asarray(onsite, dtype=float)
        if onsite.shape != (self.layout.chain_length,):
            raise ValueError("onsite vector must have length N")
        object.__setattr__(self, "onsite", onsite)

    def with_disorder(self, epsilon: float, seed: int) -> "HamiltonianSpec":
        """Quenched on-site disorder E_i = epsilon r_i J_max (chain only)."""
        e = sample_disorder(epsilon, self.layout.chain_length, seed)
        return replace(
            self,
            onsite=e * self.couplings.j_max,
            epsilon=epsilon,
            disorder_seed=seed,
        )

    @property
    def mirror_time(self) -> float:
        return self.couplings.mirror_time

    def fingerprint(self) -> str:
        h = hashlib.sha256()
        h.update(np.int64(self.layout.chain_length).tobytes())
        h.update(np.float64(self.couplings.j0).tobytes())
        h.update(self.couplings.nearest.tobytes())
        h.update(self.couplings.next_nearest.tobytes())
        h.update(self.onsite.tobytes())
        h.update(np.float64(self.gamma).tobytes())
        return h.hexdigest()

    def to_dict(self) -> dict:
        return {
            "chain_length": self.layout.chain_length,
            "registers": list(self.layout.register_names),
            "j0": self.couplings.j0,
            "nearest": self.couplings.nearest.tolist(),
            "next_nearest": self.couplings.next_nearest.tolist(),
            "onsite": self.onsite.tolist(),
            "gamma": self.gamma,
            "epsilon": self.epsilon,
            "disorder_seed": self.disorder_seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "HamiltonianSpec":
        layout = SystemLayout(d["chain_length"], tuple(d.get("registers", ())))
        profile = CouplingProfile(
            d["j0"],
            np.asarray(d["nearest"], dtype=float),
            np.asarray(d["next_nearest"], dtype=float),
        )
        return cls(
            layout,
            profile,
            onsite=np.asarray(d["onsite"], dtype=float),
            gamma=d.get("gamma", 0.0),
            epsilon=d.get("epsilon", 0.0),
            disorder_seed=d.get("disorder_seed"),
        )


def chain_bonds(spec: HamiltonianSpec) -> list[tuple[int, int, float]]:
    """(i, j, J_ij) hopping bonds over 0-based chain site indices."""
    bonds = []
    for i, j in enumerate(spec.couplings.nearest):
        if j != 0.0:
            bonds.append((i, i + 1, float(j)))
    for i, j in enumerate(spec.couplings.next_nearest):
        if j != 0.0:
            bonds.append((i, i + 2, float(j)))
    return bonds


def assemble_sector(
    spec: HamiltonianSpec, excitations: int, sparse: bool = False
):
    """Real-symmetric Hamiltonian block for a chain-only excitation sector."""
    n = spec.layout.chain_length
    configs = sector_configs(n, excitations)
    dim = len(configs)

    occ = np.stack([(configs >> i) & 1 for i in range(n)])  # (n, dim)
    diag = spec.onsite @ occ
    if spec.gamma != 0.0:
        pairs = (occ[:-1] & occ[1:]).sum(axis=0)
        diag = diag + spec.gamma * spec.couplings.j0 * pairs

    rows = [np.arange(dim)]
    cols = [np.arange(dim)]
    vals = [diag.astype(float)]
    for i, j, jij in chain_bonds(spec):
        hoppable = (occ[i] ^ occ[j]).astype(bool)
        src = np.nonzero(hoppable)[0]
        if len(src) == 0:
            continue
        # src covers both hopping orientations, so each symmetric pair of
        # entries is emitted exactly once
        partner = configs[src] ^ ((1 << i) | (1 << j))
        dst = np.searchsorted(configs, partner)
        rows.append(src)
        cols.append(dst)
        vals.append(np.full(len(src), jij))

    h = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(dim, dim),
    ).tocsr()
    h.sum_duplicates()
    if sparse:
        return h
    return h.toarray()
