import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm
from scipy.stats import unitary_group

from plasmon.circuit import FSIM, TrotterConfig, build_trotter_step, fsim_matrix, hopping_block, onsite_phase
from plasmon.compiler import (
    CompilationResult,
    ExpressionCache,
    approx_compile,
    compile_circuit,
    process_fidelity,
    ptm_vector,
    unitary_distance,
)
from plasmon.lattice import LatticeSpec
from plasmon.paulis import pauli_matrix

ZZ = pauli_matrix("ZZ")
SWAP = np.eye(4)[[0, 2, 1, 3]]


def rzz(eps):
    return expm(-1j * eps * ZZ)


def haar(seed):
    return unitary_group.rvs(4, random_state=seed)


def test_process_fidelity_examples():
    u = haar(1)
    assert process_fidelity(u, u) == pytest.approx(1.0, abs=1e-14)
    assert process_fidelity(np.eye(4), np.kron(pauli_matrix("X"), np.eye(2))) == pytest.approx(0.0, abs=1e-15)
    assert process_fidelity(np.eye(4), rzz(np.pi / 24)) == pytest.approx(np.cos(np.pi / 24) ** 2, abs=1e-14)
    assert np.cos(np.pi / 24) ** 2 == pytest.approx(0.98296, abs=1e-5)


def test_ptm_vector_examples():
    v = ptm_vector(np.eye(4))
    assert v.shape == (256,)
    assert v @ v == pytest.approx(1.0, abs=1e-14)
    u = haar(2)
    assert ptm_vector(u) @ ptm_vector(np.exp(0.7j) * u) == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**31), st.integers(0, 2**31))
def test_ptm_inner_product_is_fidelity(a, b):
    u, v = haar(a), haar(b)
    assert ptm_vector(u) @ ptm_vector(v) == pytest.approx(process_fidelity(u, v), abs=1e-12)


def test_unitary_distance_examples():
    u = haar(3)
    assert unitary_distance(u, u) == pytest.approx(0.0, abs=1e-12)
    assert unitary_distance(u, np.exp(1.1j) * u) == pytest.approx(0.0, abs=1e-12)
    assert unitary_distance(np.eye(4), rzz(np.pi / 24)) == pytest.approx(1 - np.cos(np.pi / 24) ** 2, abs=1e-12)


def test_exact_double_fsim():
    native = (np.pi / 2, np.pi / 12)
    res = approx_compile(fsim_matrix(np.pi, np.pi / 6), native)
    assert res.achieved_fidelity >= 1 - 1e-9
    assert not res.poorly_expressible


def test_dressed_fsim():
    native = (np.pi / 2, 0.0)
    a, b, c, d = (unitary_group.rvs(2, random_state=s) for s in range(4))
    target = np.kron(a, b) @ fsim_matrix(*native) @ np.kron(c, d)
    assert approx_compile(target, native).achieved_fidelity >= 1 - 1e-9


def _weyl_swap_oracle(steps=48):
    # Two sqrt(iSWAP) gates reach the Weyl coordinates with c1 >= c2 + |c3|.
    # Against SWAP at (pi/4, pi/4, pi/4) the best local alignment gives
    # |cos d1 cos d2 cos d3 + i sin d1 sin d2 sin d3|^2 with d = SWAP - c.
    g = np.linspace(0, np.pi / 4, steps + 1)
    best = 0.0
    for c1 in g:
        for c2 in g[g <= c1]:
            for c3 in g[np.abs(g) <= c2]:
                if c1 < c2 + abs(c3) - 1e-12:
                    continue
                d = np.pi / 4 - np.array([c1, c2, c3])
                val = abs(np.prod(np.cos(d)) + 1j * np.prod(np.sin(d))) ** 2
                best = max(best, val)
    return best


def test_swap_not_expressible_with_two_sqrt_iswaps():
    res = approx_compile(SWAP, (np.pi / 2, 0.0))
    assert res.achieved_fidelity < 1 - 1e-3
    assert res.achieved_fidelity == pytest.approx(_weyl_swap_oracle(), abs=1e-3)
    assert res.achieved_fidelity == pytest.approx((3 + 2 * np.sqrt(2)) / 8, abs=1e-9)


def test_global_phase_invariance():
    target = haar(5) @ haar(6)
    a = approx_compile(target, (np.pi / 2, 0.1), seed=3)
    b = approx_compile(np.exp(0.9j) * target, (np.pi / 2, 0.1), seed=3)
    assert a.achieved_fidelity == pytest.approx(b.achieved_fidelity, abs=1e-10)


def _trotter_block(rng, dt=0.8):
    gaps = rng.uniform(0, 1, 2)
    return np.kron(onsite_phase(gaps[0], 2, dt), onsite_phase(gaps[1], 3, dt)) @ hopping_block(1.0, dt)


@pytest.mark.slow
def test_trotter_blocks_compile_at_zero_conditional_phase():
    rng = np.random.default_rng(7)
    for _ in range(50):
        res = approx_compile(_trotter_block(rng), (np.pi / 2, 0.0))
        assert res.achieved_fidelity >= 1 - 1e-6


def test_conditional_phase_limits_fidelity():
    # The block carries no conditional phase, so a native conditional phase
    # phi that cannot be undone locally costs about phi^2 / 12.
    rng = np.random.default_rng(8)
    target = _trotter_block(rng)
    phi = np.pi / 12
    res = approx_compile(target, (np.pi / 2, phi))
    assert 1 - res.achieved_fidelity == pytest.approx(phi**2 / 12, rel=0.05)


def test_result_round_trip_and_gates():
    target = _trotter_block(np.random.default_rng(1))
    res = approx_compile(target, (np.pi / 2, 0.0))
    back = CompilationResult.from_dict(res.to_dict())
    np.testing.assert_allclose(back.assembled(), res.assembled())
    layers = res.gates(2, 3)
    assert [len(l) for l in layers] == [2, 1, 2, 1, 2]
    u = np.eye(4, dtype=complex)
    for layer in layers:
        if layer[0].kind == FSIM:
            u = layer[0].unitary() @ u
        else:
            u = np.kron(layer[0].unitary(), layer[1].unitary()) @ u
    assert process_fidelity(u, target) == pytest.approx(res.achieved_fidelity, abs=1e-12)


def test_cache_miss_hit_and_perturbation(tmp_path):
    cache = ExpressionCache()
    native = (np.pi / 2, 0.0)
    target = _trotter_block(np.random.default_rng(2))
    assert cache.lookup(target, native)[0] is None
    res = cache.compile(target, native)
    hit, dist = cache.lookup(target, native)
    assert hit is not None and dist == pytest.approx(0.0, abs=1e-12)
    near, dist = cache.lookup(rzz(1e-6) @ target, native)
    assert near is not None and dist < 1e-4
    assert near.achieved_fidelity >= res.achieved_fidelity - 1e-6
    far, _ = cache.lookup(haar(9), native)
    assert far is None
    path = tmp_path / "cache.json"
    cache.save(path)
    loaded = ExpressionCache.load(path)
    assert len(loaded.entries) == 1
    assert loaded.lookup(target, native)[0] is not None


def test_cache_rejects_foreign_file(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"format": "other", "version": 1}')
    with pytest.raises(ValueError):
        ExpressionCache.load(path)


def test_cache_hit_not_worse_than_fresh():
    cache = ExpressionCache()
    native = (np.pi / 2, 0.0)
    rng = np.random.default_rng(4)
    target = _trotter_block(rng)
    cache.compile(target, native)
    again = cache.compile(rzz(1e-5) @ target, native)
    fresh = approx_compile(rzz(1e-5) @ target, native)
    assert again.achieved_fidelity >= fresh.achieved_fidelity - 1e-6


def test_compile_circuit_preserves_step():
    spec = LatticeSpec.sharp_jump(4, 0.5, 3)
    step = build_trotter_step(TrotterConfig(0.8, 1, spec), absorb_z=True)
    compiled = compile_circuit(step, (np.pi / 2, 0.0))
    assert compiled.count(kind=FSIM) == 2 * step.count(arity=2)
    assert process_fidelity(compiled.unitary(), step.unitary()) >= 1 - 1e-9
