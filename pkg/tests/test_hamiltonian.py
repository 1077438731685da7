"""Coupling profiles, disorder draws, and sector Hamiltonian assembly."""

import numpy as np
import pytest

from spinknit.hamiltonian import (
    CouplingProfile,
    HamiltonianSpec,
    assemble_sector,
    chain_bonds,
    pst_couplings,
    sample_disorder,
    uniform_couplings,
    with_next_nearest,
)
from spinknit.states import SystemLayout


def test_pst_couplings_values():
    prof = pst_couplings(4)
    np.testing.assert_allclose(
        prof.nearest, [np.sqrt(3), 2.0, np.sqrt(3)]
    )
    assert prof.j_max == pytest.approx(2.0)


def test_pst_couplings_symmetric():
    prof = pst_couplings(11)
    np.testing.assert_allclose(prof.nearest, prof.nearest[::-1])


def test_mirror_time_scales_with_j0():
    assert pst_couplings(5, 1.0).mirror_time == pytest.approx(np.pi / 2)
    assert pst_couplings(5, 2.0).mirror_time == pytest.approx(np.pi / 4)


def test_with_next_nearest_mean_rule():
    prof = with_next_nearest(pst_couplings(5), 0.1)
    expected = 0.1 * (prof.nearest[:-1] + prof.nearest[1:]) / 2
    np.testing.assert_allclose(prof.next_nearest, expected)


def test_coupling_profile_validates_lengths():
    with pytest.raises(ValueError):
        CouplingProfile(1.0, np.ones(4), np.ones(1))


def test_sample_disorder_range_and_determinism():
    a = sample_disorder(0.1, 50, seed=3)
    b = sample_disorder(0.1, 50, seed=3)
    np.testing.assert_array_equal(a, b)
    assert np.all(a >= 0) and np.all(a < 0.1)
    assert not np.array_equal(a, sample_disorder(0.1, 50, seed=4))


def test_with_disorder_scales_by_largest_coupling():
    spec = HamiltonianSpec(SystemLayout(9), pst_couplings(9))
    noisy = spec.with_disorder(0.05, seed=1)
    expected = sample_disorder(0.05, 9, seed=1) * noisy.couplings.j_max
    np.testing.assert_allclose(noisy.onsite, expected)


def test_spec_rejects_mismatched_profile():
    with pytest.raises(ValueError):
        HamiltonianSpec(SystemLayout(5), pst_couplings(6))


def test_spec_roundtrips_through_dict():
    spec = HamiltonianSpec(
        SystemLayout(7), with_next_nearest(pst_couplings(7), 0.02), gamma=0.1
    ).with_disorder(0.05, seed=11)
    again = HamiltonianSpec.from_dict(spec.to_dict())
    assert again.fingerprint() == spec.fingerprint()
    assert again.disorder_seed == 11


def dense_single_excitation(spec):
    """Oracle: T=1 block written directly as a tridiagonal-ish matrix."""
    n = spec.layout.chain_length
    h = np.diag(spec.onsite.astype(float))
    for i, j in enumerate(spec.couplings.nearest):
        h[i, i + 1] = h[i + 1, i] = j
    for i, j in enumerate(spec.couplings.next_nearest):
        h[i, i + 2] = h[i + 2, i] = j
    return h


def test_single_excitation_block_matches_direct_matrix():
    spec = HamiltonianSpec(
        SystemLayout(8), with_next_nearest(pst_couplings(8), 0.05)
    ).with_disorder(0.1, seed=2)
    np.testing.assert_allclose(
        assemble_sector(spec, 1), dense_single_excitation(spec), atol=1e-12
    )


def test_assemble_sector_is_symmetric():
    spec = HamiltonianSpec(
        SystemLayout(7), pst_couplings(7), gamma=0.3
    ).with_disorder(0.05, seed=9)
    for t in (1, 2, 3):
        h = assemble_sector(spec, t)
        np.testing.assert_allclose(h, h.T, atol=1e-12)


def test_gamma_interaction_diagonal():
    spec = HamiltonianSpec(SystemLayout(4), uniform_couplings(4), gamma=0.5)
    h = assemble_sector(spec, 2)
    # ascending two-excitation masks: 0011, 0101, 0110, 1001, 1010, 1100
    np.testing.assert_allclose(
        np.diag(h), [0.5, 0.0, 0.5, 0.0, 0.0, 0.5], atol=1e-12
    )


def test_pst_spectrum_is_harmonic():
    """PST couplings give the equally spaced spectrum of a precessing spin."""
    spec = HamiltonianSpec(SystemLayout(9), pst_couplings(9))
    w = np.linalg.eigvalsh(assemble_sector(spec, 1))
    np.testing.assert_allclose(w, np.arange(-8, 9, 2), atol=1e-9)


def test_chain_bonds_skips_zero_couplings():
    spec = HamiltonianSpec(SystemLayout(5), pst_couplings(5))
    bonds = chain_bonds(spec)
    assert len(bonds) == 4
    assert all(j > 0 for _, _, j in bonds)


def test_sparse_and_dense_assembly_agree():
    spec = HamiltonianSpec(
        SystemLayout(8), with_next_nearest(pst_couplings(8), 0.03), gamma=0.2
    )
    dense = assemble_sector(spec, 3)
    sparse = assemble_sector(spec, 3, sparse=True)
    np.testing.assert_allclose(sparse.toarray(), dense, atol=1e-12)
