import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import chisquare

from plasmon.circuit import TrotterConfig, build_trotter_circuit, wavepacket_prep
from plasmon.clifford import (
    CLASS_SIZES,
    CliffordCircuit,
    CliffordOp,
    PauliString,
    backpropagate,
    clifford_class,
    conflict_graph,
    conjugate_pauli,
    conserving_two_qubit_cliffords,
    exact_expectation,
    fix_init_layer,
    max_clique,
    one_qubit_cliffords,
    random_clifford_brickwork,
    two_qubit_cliffords,
)
from plasmon.lattice import LatticeSpec
from plasmon.paulis import H, rz
from plasmon.simulator.run import run_statevector

CNOT = np.eye(4, dtype=complex)[[0, 1, 3, 2]]
P = PauliString


def _brickwork_structure(n, steps):
    spec = LatticeSpec.uniform(n, 0.0)
    return build_trotter_circuit(TrotterConfig(0.8, steps, spec), wavepacket_prep([1.0], n), absorb_z=True).structure()


def _dense(circuit: CliffordCircuit, p: PauliString) -> float:
    psi = run_statevector(circuit.to_circuit())
    return float(np.real(np.vdot(psi, p.matrix() @ psi)))


def test_conjugate_examples():
    assert conjugate_pauli(H, P("Z")) == P("X")
    assert conjugate_pauli(CNOT, P("ZI")) == P("ZI")
    assert conjugate_pauli(CNOT, P("IX")) == P("IX")
    assert conjugate_pauli(CNOT, P("XI")) == P("XX")
    s = one_qubit_cliffords()[0] @ np.diag([1, 1j])
    # S^dagger X S = -Y
    assert conjugate_pauli(s, P("X")) == P("Y", 2)


def test_conjugate_on_chosen_targets():
    # control on qubit 2, target on qubit 1
    assert conjugate_pauli(CNOT, P("IXZ"), targets=(2, 1)) == P("IXZ")
    assert conjugate_pauli(CNOT, P("IZI"), targets=(2, 1)) == P("IZZ")


def test_non_clifford_rejected():
    with pytest.raises(ValueError):
        conjugate_pauli(rz(np.pi / 4), P("X"))


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 11519), st.sampled_from(["IX", "XI", "ZY", "YY", "XZ", "ZZ"]))
def test_conjugation_matches_matrices(idx, label):
    u = two_qubit_cliffords()[idx]
    out = conjugate_pauli(u, P(label))
    np.testing.assert_allclose(out.matrix(), u.conj().T @ P(label).matrix() @ u, atol=1e-12)


def test_backpropagate_examples():
    empty = CliffordCircuit(4, ())
    assert backpropagate(empty, P("IZXY")) == P("IZXY")
    h3 = CliffordCircuit(4, ((CliffordOp((2,), H),),))
    assert backpropagate(h3, P.single(4, 2, "Z")) == P.single(4, 2, "X")


def _random_circuit(n, depth, rng):
    c1, c2 = one_qubit_cliffords(), two_qubit_cliffords()
    layers = []
    for d in range(depth):
        if d % 2 == 0:
            layers.append(tuple(CliffordOp((q,), c1[rng.integers(24)]) for q in range(n)))
        else:
            start = (d // 2) % 2
            layers.append(tuple(CliffordOp((q, q + 1), c2[rng.integers(11520)]) for q in range(start, n - 1, 2)))
    return CliffordCircuit(n, tuple(layers))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31))
def test_backpropagate_is_anti_homomorphism(seed):
    rng = np.random.default_rng(seed)
    a, b = _random_circuit(5, 4, rng), _random_circuit(5, 5, rng)
    p = P("".join(rng.choice(list("IXYZ"), 5)))
    assert backpropagate(a.then(b), p) == backpropagate(a, backpropagate(b, p))


def test_exact_expectation_examples():
    ident = CliffordCircuit(1, ())
    assert exact_expectation(ident, P("Z")) == 1
    assert exact_expectation(ident, P("X")) == 0
    x = CliffordCircuit(1, ((CliffordOp((0,), np.array([[0, 1], [1, 0]])),),))
    assert exact_expectation(x, P("Z")) == -1


def test_exact_expectation_matches_dense_on_brickwork():
    structure = _brickwork_structure(9, 3)
    rng = np.random.default_rng(0)
    for _ in range(100):
        circ = random_clifford_brickwork(structure, 9, rng)
        psi = run_statevector(circ.to_circuit())
        for q in range(9):
            p = P.single(9, q, "Z")
            assert exact_expectation(circ, p) == round(float(np.real(np.vdot(psi, p.matrix() @ psi))), 9)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31), st.integers(2, 6))
def test_exact_expectation_matches_dense_on_all_paulis(seed, n):
    rng = np.random.default_rng(seed)
    circ = _random_circuit(n, 6, rng)
    psi = run_statevector(circ.to_circuit())
    for _ in range(10):
        p = P("".join(rng.choice(list("IXYZ"), n)))
        assert exact_expectation(circ, p) == round(float(np.real(np.vdot(psi, p.matrix() @ psi))), 9)


def test_conflict_graph_examples():
    assert conflict_graph([P("ZI"), P("IZ")]) == [{1}, {0}]
    assert conflict_graph([P("XI"), P("ZI")]) == [set(), set()]
    flowed = [P("ZIII"), P("IZII"), P("IIXZ"), P("IIIZ")]
    adj = conflict_graph(flowed)
    assert all(adj[i] == set(range(4)) - {i} for i in range(4))
    assert max_clique(adj) == [0, 1, 2, 3]


def test_max_clique_examples():
    k9 = [set(range(9)) - {i} for i in range(9)]
    assert max_clique(k9) == list(range(9))
    assert max_clique([set() for _ in range(5)]) == [0]
    assert max_clique([]) == []
    with pytest.raises(ValueError):
        max_clique([set() for _ in range(65)])


def _brute_force_clique(adj):
    """Every clique, grown in increasing index order; the lexicographically first largest one."""
    best = []

    def grow(clique, cand):
        nonlocal best
        if len(clique) > len(best):
            best = list(clique)
        for v in sorted(cand):
            grow(clique + [v], {u for u in cand if u > v and u in adj[v]})

    grow([], set(range(len(adj))))
    return best


@pytest.mark.parametrize("seed", range(5))
def test_max_clique_matches_brute_force(seed):
    rng = np.random.default_rng(seed)
    n = 20
    adj = [set() for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < 0.5:
                adj[i].add(j)
                adj[j].add(i)
    assert max_clique(adj) == _brute_force_clique(adj)


def _worked_example():
    # After an identity first layer, H on qubit 2 then a CNOT controlled by
    # qubit 3 makes Z on qubit 2 flow back to X2 Z3.
    ident = tuple(CliffordOp((q,), np.eye(2)) for q in range(4))
    layers = (ident, (CliffordOp((2,), H),), (CliffordOp((3, 2), CNOT),))
    return CliffordCircuit(4, layers)


def test_worked_example_flows_and_activation():
    circ = _worked_example()
    rest = CliffordCircuit(4, circ.layers[1:])
    zs = [P.single(4, q, "Z") for q in range(4)]
    assert [str(backpropagate(rest, z)) for z in zs] == ["+ZIII", "+IZII", "+IIXZ", "+IIIZ"]
    assert exact_expectation(circ, zs[2]) == 0
    mutated, active = fix_init_layer(circ, zs)
    assert active == [0, 1, 2, 3]
    init = {op.targets[0]: op.matrix for op in mutated.layers[0]}
    np.testing.assert_allclose(init[2], H, atol=1e-12)
    for z in zs:
        assert abs(exact_expectation(mutated, z)) == 1
        assert _dense(mutated, z) == pytest.approx(exact_expectation(mutated, z), abs=1e-10)


def test_fix_init_layer_no_op_when_already_diagonal():
    circ = CliffordCircuit(3, (tuple(CliffordOp((q,), np.eye(2)) for q in range(3)), (CliffordOp((0, 1), CNOT),)))
    zs = [P.single(3, q, "Z") for q in range(3)]
    mutated, active = fix_init_layer(circ, zs)
    assert active == [0, 1, 2]
    for a, b in zip(mutated.layers[0], circ.layers[0]):
        assert a is b


def test_fix_init_layer_needs_local_first_layer():
    circ = CliffordCircuit(2, ((CliffordOp((0, 1), CNOT),),))
    with pytest.raises(ValueError):
        fix_init_layer(circ, [P("ZI")])


def _observables(n):
    obs = [P.single(n, q, "Z") for q in range(n)]
    for q in range(n - 1):
        for pair in ("XX", "YY"):
            letters = ["I"] * n
            letters[q], letters[q + 1] = pair
            obs.append(P("".join(letters)))
    return obs


@pytest.mark.parametrize("seed", range(10))
def test_fix_init_layer_on_random_brickwork(seed):
    structure = _brickwork_structure(9, 2)
    circ = random_clifford_brickwork(structure, 9, seed)
    obs = _observables(9)
    before = sum(exact_expectation(circ, o) != 0 for o in obs)
    mutated, active = fix_init_layer(circ, obs)
    assert len(active) >= before
    psi = run_statevector(mutated.to_circuit())
    for i in active:
        val = float(np.real(np.vdot(psi, obs[i].matrix() @ psi)))
        assert abs(val) == pytest.approx(1.0, abs=1e-10)
        assert val == pytest.approx(exact_expectation(mutated, obs[i]), abs=1e-10)


def test_brickwork_counts_and_determinism():
    structure = _brickwork_structure(9, 2)
    circ = random_clifford_brickwork(structure, 9, 5)
    assert circ.count(2) == 16
    again = random_clifford_brickwork(structure, 9, 5)
    for a, b in zip(circ.ops(), again.ops()):
        assert a.targets == b.targets
        np.testing.assert_array_equal(a.matrix, b.matrix)
    with pytest.raises(ValueError):
        random_clifford_brickwork(structure, 9, 5, ensemble="other")


def test_group_sizes():
    assert len(one_qubit_cliffords()) == 24
    assert len(two_qubit_cliffords()) == 11520
    assert len(conserving_two_qubit_cliffords()) == 64
    assert sum(CLASS_SIZES.values()) == 11520


def test_two_qubit_slots_uniform_over_classes():
    structure = _brickwork_structure(9, 2)
    rng = np.random.default_rng(12)
    counts = dict.fromkeys(CLASS_SIZES, 0)
    for _ in range(100):
        for op in random_clifford_brickwork(structure, 9, rng).ops():
            if len(op.targets) == 2:
                counts[clifford_class(op.matrix)] += 1
    total = sum(counts.values())
    expected = [total * CLASS_SIZES[k] / 11520 for k in counts]
    assert chisquare(list(counts.values()), expected).pvalue > 1e-3
