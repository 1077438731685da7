"""Entanglement and quality metrics: concurrence/EoF, entropy, fidelity."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .states import DensityMatrix, PureState

EIG_CLIP = 1e-12

_SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]])
_YY = np.kron(_SIGMA_Y, _SIGMA_Y)


@dataclass(frozen=True)
class MetricSample:
    """One sampled metric value along a run, time in units of t_M."""

    time: float
    value: float
    metric_kind: str  # EoF | entropy | fidelity | occupation
    metadata: tuple = field(default=())


def _as_matrix(rho) -> np.ndarray:
    if isinstance(rho, DensityMatrix):
        rho.validate(tol=1e-9)
        return rho.matrix
    return np.asarray(rho, dtype=complex)


def concurrence(rho) -> float:
    """Wootters concurrence of a two-qubit density matrix."""
    m = _as_matrix(rho)
    if m.shape != (4, 4):
        raise ValueError("concurrence requires a 4x4 density matrix")
    if np.max(np.abs(m - m.conj().T)) > 1e-9:
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(m).real - 1.0) > 1e-9:
        raise ValueError("density matrix trace is not 1")
    # Hermitian formulation: the lambda_i are the eigenvalues of
    # sqrt(sqrt(rho) rho~ sqrt(rho)), numerically far more accurate than
    # eigenvalues of the non-Hermitian rho rho~
    w, u = np.linalg.eigh(m)
    sqrt_m = (u * np.sqrt(np.clip(w, 0.0, None))) @ u.conj().T
    tilde = _YY @ m.conj() @ _YY
    inner = sqrt_m @ tilde @ sqrt_m
    lam2 = np.linalg.eigvalsh(inner)
    lam2[lam2 < EIG_CLIP] = 0.0  # noise floor; see module EIG_CLIP
    lam = np.sqrt(lam2)
    lam = np.sort(lam)[::-1]
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def _binary_entropy(x: float) -> float:
    if x <= 0.0 or x >= 1.0:
        return 0.0
    return float(-x * np.log2(x) - (1 - x) * np.log2(1 - x))


def eof(rho) -> float:
    """Entanglement of formation from the concurrence."""
    c = concurrence(rho)
    return _binary_entropy((1.0 + np.sqrt(max(0.0, 1.0 - c * c))) / 2.0)


def entropy(rho) -> float:
    """Von Neumann entropy in bits; zero eigenvalues contribute nothing."""
    m = _as_matrix(rho)
    ev = np.linalg.eigvalsh(m)
    if ev.min() < -1e-9:
        raise ValueError("density matrix has a significantly negative eigenvalue")
    ev = ev[ev > EIG_CLIP]
    return float(-(ev * np.log2(ev)).sum())


def fidelity(state: PureState, reference: PureState) -> float:
    """|<reference|state>|^2 for two normalized states on the same layout."""
    return float(abs(reference.inner(state)) ** 2)
