import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm
from scipy.stats import unitary_group

from plasmon.circuit import FSIM, U1, Circuit, Gate, TrotterConfig, build_trotter_circuit, fsim, one_qubit, two_qubit, wavepacket_prep
from plasmon.lattice import LatticeSpec, single_excitation_hamiltonian
from plasmon.paulis import X, pauli_labels, pauli_matrix
from plasmon.simulator.backend import DeviceBackend, SimulatorBackend
from plasmon.simulator.noise import (
    TABLE_I,
    NoiseModel,
    amplitude_damping,
    coherent,
    dephasing,
    depolarizing,
    pauli_channel,
)
from plasmon.simulator.ptm import (
    channel_ptm,
    choi_to_ptm,
    infidelity_decomposition,
    kraus_ptm,
    ptm_to_choi,
    unitary_ptm,
)
from plasmon.simulator.run import run_density, run_statevector
from plasmon.simulator.states import (
    basis_state,
    density,
    pauli_expectation,
    sample_shots,
    z_expectations,
    zero_state,
)


def random_circuit(n, depth, seed):
    rng = np.random.default_rng(seed)
    layers = []
    for d in range(depth):
        if d % 2:
            layer = [two_qubit(unitary_group.rvs(4, random_state=rng), q, q + 1) for q in range(d % 4 // 2, n - 1, 2)]
        else:
            layer = [one_qubit(unitary_group.rvs(2, random_state=rng), q) for q in range(n)]
        layers.append(layer)
    return Circuit(n, layers)


def test_empty_circuit_returns_init():
    psi = zero_state(3)
    np.testing.assert_array_equal(run_statevector(Circuit(3), psi), psi)


def test_x_flips():
    psi = run_statevector(Circuit(1, [[one_qubit(X, 0)]]))
    np.testing.assert_allclose(psi, [0, 1])


def test_qubit_zero_is_leftmost():
    psi = run_statevector(Circuit(3, [[one_qubit(X, 0)]]))
    np.testing.assert_allclose(psi, basis_state([1, 0, 0]))
    np.testing.assert_allclose(z_expectations(psi, 3), [-1, 1, 1])


def test_statevector_matches_circuit_unitary():
    circ = random_circuit(4, 6, 0)
    np.testing.assert_allclose(run_statevector(circ), circ.unitary()[:, 0], atol=1e-12)


def test_init_shape_checked():
    with pytest.raises(ValueError):
        run_statevector(Circuit(2), zero_state(3))
    with pytest.raises(ValueError):
        run_density(Circuit(2), density(zero_state(3)))


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 5), st.integers(0, 2**31))
def test_density_matches_statevector_without_noise(n, seed):
    circ = random_circuit(n, 5, seed)
    psi = run_statevector(circ)
    rho = run_density(circ)
    np.testing.assert_allclose(rho, density(psi), atol=1e-10)
    for label in pauli_labels(n)[:32]:
        assert pauli_expectation(rho, label) == pytest.approx(pauli_expectation(psi, label), abs=1e-10)


def test_trotter_densities_follow_lattice_oracle():
    # Same total time at dt and dt/2: the circuit tracks exp(-i H1 t) within
    # the first-order Trotter error, which halves with dt.
    spec = LatticeSpec.uniform(9, 0.25)
    h1 = single_excitation_hamiltonian(spec)
    devs = []
    for dt, steps in ((0.2, 60), (0.1, 120)):
        circ = build_trotter_circuit(TrotterConfig(dt, steps, spec), wavepacket_prep([1.0], 9), absorb_z=True)
        n_circ = (1 - z_expectations(run_statevector(circ), 9)) / 2
        b0 = np.zeros(9)
        b0[0] = 1
        n_exact = np.abs(expm(-1j * h1 * dt * steps) @ b0) ** 2
        devs.append(np.max(np.abs(n_circ - n_exact)))
    assert devs[0] < 0.05
    assert devs[0] / devs[1] == pytest.approx(2.0, rel=0.1)


def test_amplitude_damping_full_decay():
    ch = amplitude_damping(10.0, 1e4)
    rho = ch.apply(density(np.array([0, 1], dtype=complex)), (0,), 1)
    assert rho[0, 0].real == pytest.approx(1.0, abs=1e-12)


def test_dephasing_rate():
    t1, t2, t = 40.0, 20.0, 5.0
    ch = dephasing(t2, t1, t)
    plus = density(np.array([1, 1], dtype=complex) / np.sqrt(2))
    rho = ch.apply(plus, (0,), 1)
    t_phi = 1 / (1 / t2 - 1 / (2 * t1))
    assert 2 * abs(rho[0, 1]) == pytest.approx(np.exp(-t / t_phi), rel=1e-10)
    with pytest.raises(ValueError):
        dephasing(100.0, 10.0, 1.0)


def test_identity_channel_ptm():
    np.testing.assert_allclose(kraus_ptm([np.eye(4)]), np.eye(16), atol=1e-15)
    np.testing.assert_allclose(channel_ptm(np.eye(2)), np.eye(4), atol=1e-15)


@pytest.mark.parametrize("p", [0.0, 0.01, 0.3, 1.0])
def test_two_qubit_depolarizing_ptm(p):
    r = channel_ptm(depolarizing(p, 2))
    np.testing.assert_allclose(r, np.diag([1] + [1 - p] * 15), atol=1e-14)


def test_rzz_ptm_trace():
    r = unitary_ptm(expm(-1j * np.pi / 24 * pauli_matrix("ZZ")))
    assert np.trace(r) == pytest.approx(16 - 16 * np.sin(np.pi / 24) ** 2, abs=1e-12)


def test_choi_round_trip():
    r = channel_ptm(amplitude_damping(5.0, 2.0))
    np.testing.assert_allclose(choi_to_ptm(ptm_to_choi(r)), r, atol=1e-13)


def test_decomposition_examples():
    d = infidelity_decomposition(unitary_ptm(expm(-1j * np.pi / 24 * pauli_matrix("ZZ"))))
    assert d.total == pytest.approx(np.sin(np.pi / 24) ** 2, abs=1e-12)
    assert d.total == pytest.approx(0.0170, abs=1e-4)
    assert d.stochastic == pytest.approx(0.0, abs=1e-12)
    assert d.coherent == pytest.approx(d.total, abs=1e-12)
    assert infidelity_decomposition(np.eye(16)).as_tuple() == pytest.approx((0, 0, 0), abs=1e-15)
    dep = infidelity_decomposition(channel_ptm(depolarizing(0.01, 2)))
    assert dep.total == pytest.approx(15 * 0.01 / 16, abs=1e-14)
    assert abs(dep.coherent) < 1e-4
    for method in ("unitarity", "polar"):
        assert infidelity_decomposition(np.eye(4), method).total == 0.0
    with pytest.raises(ValueError):
        infidelity_decomposition(np.eye(4), "other")


def _random_channel(seed, n_kraus=3, dim=4):
    rng = np.random.default_rng(seed)
    g = rng.normal(size=(n_kraus * dim, dim)) + 1j * rng.normal(size=(n_kraus * dim, dim))
    q, _ = np.linalg.qr(g)
    return [q[i * dim:(i + 1) * dim] for i in range(n_kraus)]


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31), st.integers(1, 4), st.sampled_from(["unitarity", "polar"]))
def test_stochastic_part_bounded_by_total(seed, n_kraus, method):
    kraus = _random_channel(seed, n_kraus)
    d = infidelity_decomposition(kraus_ptm(kraus), method)
    assert d.stochastic <= d.total + 1e-12


def _all_model_channels():
    models = [NoiseModel.pauli(), NoiseModel.pauli(0.01, 0.001), NoiseModel.table_one()]
    return [ch for m in models for chans in m.channels.values() for ch in chans]


@pytest.mark.parametrize("ch", _all_model_channels(), ids=repr)
def test_model_channels_are_cptp(ch):
    d = 2**ch.n_qubits
    np.testing.assert_allclose(sum(k.conj().T @ k for k in ch.kraus), np.eye(d), atol=1e-12)
    first = ch.ptm()[0]
    np.testing.assert_allclose(first, np.eye(d * d)[0], atol=1e-12)


def test_kraus_completeness_enforced():
    with pytest.raises(ValueError):
        pauli_channel({"X": 0.5, "I": 0.6})
    with pytest.raises(ValueError):
        depolarizing(1.5)


def test_pauli_model_infidelity():
    m = NoiseModel.pauli(0.0148)
    assert infidelity_decomposition(m.gate_ptm(FSIM, 2)).total == pytest.approx(0.0148, abs=1e-12)
    assert m.is_pauli and not m.is_noiseless
    assert NoiseModel.none().is_noiseless


def test_table_one_calibration():
    m = NoiseModel.table_one()
    assert infidelity_decomposition(m.gate_ptm(FSIM, 2)).total == pytest.approx(TABLE_I["fsim_infidelity"], abs=1e-4)
    x90 = m.gate_ptm("phased_x90", 1)
    assert infidelity_decomposition(x90).total == pytest.approx(TABLE_I["rx_infidelity"], abs=1e-4)
    assert not m.is_pauli


def test_coherent_channel():
    ch = coherent("ZZ", np.pi / 12)
    d = infidelity_decomposition(ch.ptm())
    assert d.coherent == pytest.approx(np.sin(np.pi / 24) ** 2, abs=1e-12)


def test_noise_damps_toward_mixed():
    spec = LatticeSpec.sharp_jump(5, 0.5, 3)
    circ = build_trotter_circuit(TrotterConfig(0.8, 6, spec), wavepacket_prep([1.0], 5), absorb_z=True)
    clean = z_expectations(run_statevector(circ), 5)
    noisy = z_expectations(run_density(circ, noise=NoiseModel.pauli(), check=True), 5)
    # depolarizing noise moves every site toward density 1/2
    assert np.all(np.abs(noisy) < np.abs(clean))
    table = z_expectations(run_density(circ, noise=NoiseModel.table_one(), check=True), 5)
    assert np.ptp(table) < np.ptp(clean)


def test_total_z_conserved_over_100_steps():
    spec = LatticeSpec.sharp_jump(9, 0.5, 6)
    circ = build_trotter_circuit(TrotterConfig(0.8, 100, spec), wavepacket_prep([1, 1] / np.sqrt(2), 9), absorb_z=True)
    sums = []
    run_statevector(circ, on_layer=lambda i, s: sums.append(z_expectations(s, 9).sum()))
    assert np.max(np.abs(np.array(sums) - 7)) <= 1e-12


def test_sample_shots():
    bits = sample_shots(zero_state(2), "ZZ", 100, seed=0)
    assert bits.shape == (100, 2) and not bits.any()
    plus = np.array([1, 1], dtype=complex) / np.sqrt(2)
    m = 100_000
    mean = sample_shots(plus, "Z", m, seed=1).mean()
    assert abs(mean - 0.5) < 3 * np.sqrt(0.25 / m)
    assert not sample_shots(plus, "X", 1000, seed=2).any()
    with pytest.raises(ValueError):
        sample_shots(plus, "ZZ", 10)
    with pytest.raises(ValueError):
        sample_shots(plus, "Z", 0)


def test_backend_protocol_and_offset():
    b = SimulatorBackend.with_fsim_offset(0.1, 0.0)
    assert isinstance(b, DeviceBackend)
    circ = Circuit(2, [[one_qubit(X, 0)], [fsim(np.pi / 2, 0.0, 0, 1)]])
    phys = b.physical(circ)
    assert list(phys.gates())[1].params == (np.pi / 2 + 0.1, 0.0)
    p = b.probabilities(circ, "ZZ")
    c = np.cos((np.pi / 2 + 0.1) / 2) ** 2
    np.testing.assert_allclose(p, [0, 1 - c, c, 0], atol=1e-12)


def test_backend_readout_error():
    b = SimulatorBackend(readout_error=0.1)
    p = b.probabilities(Circuit(1, [[Gate(U1, (0,), matrix=np.eye(2))]]), "Z")
    np.testing.assert_allclose(p, [0.9, 0.1], atol=1e-12)
    bits = b.run(Circuit(1), "Z", 20000, seed=0)
    assert bits.mean() == pytest.approx(0.1, abs=0.01)
