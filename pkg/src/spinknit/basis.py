"""Fixed-excitation basis sectors over a set of spin-1/2 sites.

Basis states are bitmasks (bit i set = site i excited). Within a sector of
fixed excitation count the states are ordered by ascending mask value, which
is the colexicographic order of the occupied-site subsets. Ranking in this
order is combinadic: rank(c_1 < c_2 < ... < c_t) = sum_k C(c_k, k).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from math import comb

import numpy as np

MASK_DTYPE = np.int64


@lru_cache(maxsize=None)
def sector_configs(n_sites: int, excitations: int) -> np.ndarray:
    """All bitmasks with `excitations` of `n_sites` bits set, ascending."""
    if not 0 <= excitations <= n_sites:
        raise ValueError(
            f"excitation count {excitations} out of range for {n_sites} sites"
        )
    if excitations == 0:
        return np.zeros(1, dtype=MASK_DTYPE)
    masks = [
        sum(1 << c for c in combo)
        for combo in combinations(range(n_sites), excitations)
    ]
    out = np.sort(np.asarray(masks, dtype=MASK_DTYPE))
    out.flags.writeable = False
    return out


def popcount(masks: np.ndarray) -> np.ndarray:
    return np.bitwise_count(masks.astype(np.int64)).astype(np.int64)


def rank_of(mask: int) -> int:
    """Combinadic (colex) rank of a bitmask within its sector."""
    rank = 0
    k = 0
    m = int(mask)
    while m:
        c = (m & -m).bit_length() - 1
        k += 1
        rank += comb(c, k)
        m &= m - 1
    return rank


def unrank(n_sites: int, excitations: int, rank: int) -> int:
    """Inverse of rank_of for the (n_sites, excitations) sector."""
    dim = comb(n_sites, excitations)
    if not 0 <= rank < dim:
        raise ValueError(f"rank {rank} out of range for dimension {dim}")
    mask = 0
    r = rank
    for k in range(excitations, 0, -1):
        # largest c with C(c, k) <= r
        c = k - 1
        while comb(c + 1, k) <= r:
            c += 1
        mask |= 1 << c
        r -= comb(c, k)
    return mask


def ranks_of(configs: np.ndarray, sorted_sector: np.ndarray) -> np.ndarray:
    """Vectorized ranks of `configs` within an ascending sector array."""
    idx = np.searchsorted(sorted_sector, configs)
    if np.any(idx >= len(sorted_sector)) or np.any(
        sorted_sector[np.minimum(idx, len(sorted_sector) - 1)] != configs
    ):
        raise ValueError("config not a member of the sector")
    return idx


@dataclass(frozen=True)
class BasisSector:
    """A fixed-excitation-number sector of the site Hilbert space."""

    n_sites: int
    excitations: int
    configs: np.ndarray = field(repr=False, compare=False, default=None)

    def __post_init__(self):
        if not 0 <= self.excitations <= self.n_sites:
            raise ValueError("excitation count out of range")
        object.__setattr__(
            self, "configs", sector_configs(self.n_sites, self.excitations)
        )

    @property
    def dimension(self) -> int:
        return comb(self.n_sites, self.excitations)

    def rank(self, mask: int) -> int:
        r = rank_of(mask)
        if popcount(np.asarray([mask]))[0] != self.excitations:
            raise ValueError("mask has wrong excitation count for this sector")
        return r

    def unrank(self, rank: int) -> int:
        return unrank(self.n_sites, self.excitations, rank)


def make_basis(n_sites, max_excitations: int) -> list[BasisSector]:
    """Sectors T = 0..max_excitations over a site count or system layout."""
    n_sites = getattr(n_sites, "total_sites", n_sites)
    if not 0 <= max_excitations <= n_sites:
        raise ValueError(
            f"max_excitations {max_excitations} out of range 0..{n_sites}"
        )
    return [BasisSector(n_sites, t) for t in range(max_excitations + 1)]
