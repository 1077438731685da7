"""Sector evolution backends, checked against full-space brute force."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spinknit.hamiltonian import (
    HamiltonianSpec,
    pst_couplings,
    uniform_couplings,
    with_next_nearest,
)
from spinknit.propagator import (
    Evolver,
    brute_force_evolve,
    effective_gate,
    energy_expectation,
    full_space_hamiltonian,
    full_vector,
)
from spinknit.states import (
    SystemLayout,
    product_state,
    state_from_terms,
    vacuum_state,
)

TM = np.pi / 2


def random_state(layout, rng, max_t=4, terms=8):
    n = layout.total_sites
    d = {}
    for _ in range(terms):
        mask = int(rng.integers(0, 1 << n))
        if mask.bit_count() <= max_t:
            d[mask] = complex(rng.normal(), rng.normal())
    d.setdefault(0, 1.0 + 0.0j)
    return state_from_terms(layout, d).normalized()


def test_vacuum_is_stationary():
    spec = HamiltonianSpec(SystemLayout(6), pst_couplings(6))
    out = Evolver(spec).evolve(vacuum_state(spec.layout), 1.7)
    assert out.terms() == {0: 1.0 + 0.0j}


def test_single_excitation_transfer_phase():
    """An end excitation arrives at the far end with phase (-i)^(N-1)."""
    for n in range(5, 13):
        spec = HamiltonianSpec(SystemLayout(n), pst_couplings(n))
        psi = state_from_terms(spec.layout, {1: 1.0})
        out = Evolver(spec).evolve(psi, TM)
        amp = out.terms()[1 << (n - 1)]
        assert amp == pytest.approx((-1j) ** (n - 1), abs=1e-9)


def test_evolution_is_unitary():
    spec = HamiltonianSpec(
        SystemLayout(7), with_next_nearest(pst_couplings(7), 0.05), gamma=0.2
    ).with_disorder(0.1, seed=4)
    rng = np.random.default_rng(0)
    psi = random_state(spec.layout, rng)
    out = Evolver(spec).evolve(psi, 2.3)
    assert out.norm() == pytest.approx(1.0, abs=1e-12)


def test_backends_agree():
    spec = HamiltonianSpec(SystemLayout(10), pst_couplings(10), gamma=0.1)
    rng = np.random.default_rng(1)
    psi = random_state(spec.layout, rng)
    a = Evolver(spec, backend="eigen").evolve(psi, 1.1)
    b = Evolver(spec, backend="krylov").evolve(psi, 1.1)
    for t in a.sectors():
        np.testing.assert_allclose(a.amps[t], b.amps[t], atol=1e-9)


def test_dim_cap_enforced():
    spec = HamiltonianSpec(SystemLayout(30), pst_couplings(30))
    ev = Evolver(spec, dim_cap=100)
    psi = product_state(spec.layout, {1: "+", 30: "+", 2: "1", 3: "1"})
    with pytest.raises(ValueError):
        ev.evolve(psi, 0.5)


def test_registers_are_idle():
    spec = HamiltonianSpec(SystemLayout(5, ("r",)), pst_couplings(5))
    psi = product_state(spec.layout, {"r": "+"})
    out = Evolver(spec).evolve(psi, 1.3)
    assert abs(psi.inner(out)) == pytest.approx(1.0, abs=1e-12)


def test_register_chain_superposition_blocks():
    """A register-chain entangled state evolves blockwise without mixing."""
    spec = HamiltonianSpec(SystemLayout(5, ("r",)), pst_couplings(5))
    bit_r = 1 << 5
    psi = state_from_terms(
        spec.layout, {1: 1 / np.sqrt(2), bit_r: 1 / np.sqrt(2)}
    )
    out = Evolver(spec).evolve(psi, TM)
    terms = out.terms()
    assert terms[bit_r] == pytest.approx(1 / np.sqrt(2), abs=1e-9)
    assert terms[1 << 4] == pytest.approx((-1j) ** 4 / np.sqrt(2), abs=1e-9)


def test_evolve_samples_matches_single_steps():
    spec = HamiltonianSpec(SystemLayout(6), pst_couplings(6))
    psi = product_state(spec.layout, {1: "+", 6: "+"})
    ev = Evolver(spec)
    samples = ev.evolve_samples(psi, [0.4, 0.9, 1.7])
    direct = ev.evolve(psi, 1.7)
    assert abs(samples[-1].inner(direct)) == pytest.approx(1.0, abs=1e-12)


@given(st.integers(min_value=0, max_value=49))
@settings(max_examples=50, deadline=None)
def test_sector_evolution_matches_brute_force(seed):
    """Oracle equivalence on random mixed-sector states, T <= 4."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(4, 9))
    regs = tuple(f"r{i}" for i in range(int(rng.integers(0, 3))))
    if n + len(regs) > 10:
        regs = regs[: 10 - n]
    layout = SystemLayout(n, regs)
    spec = HamiltonianSpec(
        layout, with_next_nearest(pst_couplings(n), float(rng.random() * 0.1)),
        gamma=float(rng.random() * 0.3),
    ).with_disorder(float(rng.random() * 0.1), seed=seed)
    psi = random_state(layout, rng, max_t=4)
    duration = float(rng.random() * 3)
    fast = Evolver(spec).evolve(psi, duration)
    slow = brute_force_evolve(spec, full_vector(psi), duration)
    np.testing.assert_allclose(full_vector(fast), slow, atol=1e-9)


def test_energy_expectation_conserved():
    spec = HamiltonianSpec(SystemLayout(8), pst_couplings(8), gamma=0.2)
    psi = product_state(spec.layout, {1: "+", 8: "+"})
    ev = Evolver(spec)
    e0 = energy_expectation(ev, psi)
    e1 = energy_expectation(ev, ev.evolve(psi, 2.9))
    assert e1 == pytest.approx(e0, abs=1e-10)


def test_effective_gate_is_unitary():
    spec = HamiltonianSpec(SystemLayout(9), pst_couplings(9))
    g = effective_gate(spec)
    np.testing.assert_allclose(g @ g.conj().T, np.eye(4), atol=1e-9)


def test_full_space_hamiltonian_size_limit():
    spec = HamiltonianSpec(SystemLayout(20), pst_couplings(20))
    with pytest.raises(ValueError):
        full_space_hamiltonian(spec)


def test_uniform_chain_two_sites_rabi():
    """Two uniformly coupled sites oscillate with period pi/J."""
    spec = HamiltonianSpec(SystemLayout(2), uniform_couplings(2, 1.0))
    psi = state_from_terms(spec.layout, {0b01: 1.0})
    half = Evolver(spec).evolve(psi, np.pi / 2)
    assert abs(half.terms()[0b10]) == pytest.approx(1.0, abs=1e-12)


def test_build_returns_propagators_per_sector():
    from spinknit.propagator import build

    spec = HamiltonianSpec(SystemLayout(6), pst_couplings(6))
    props = build(spec, [0, 1, 2])
    assert set(props) == {0, 1, 2}
    assert props[2].excitations == 2
