"""Dense statevector and density-matrix kernels.

Qubit 0 is the most significant bit of a basis index, matching ``np.kron``
ordering of one-qubit factors.
"""

from __future__ import annotations

import numpy as np

from ..paulis import H, S, pauli_matrix


def apply_matrix(tensor: np.ndarray, mat: np.ndarray, axes: tuple[int, ...]) -> np.ndarray:
    """Contract ``mat`` (2^k x 2^k) into the given tensor axes."""
    k = len(axes)
    op = np.asarray(mat).reshape((2,) * (2 * k))
    out = np.tensordot(op, tensor, axes=(tuple(range(k, 2 * k)), axes))
    return np.moveaxis(out, tuple(range(k)), axes)


def apply_unitary_state(psi: np.ndarray, u: np.ndarray, targets, n: int) -> np.ndarray:
    t = psi.reshape((2,) * n)
    return apply_matrix(t, u, tuple(targets)).reshape(-1)


def apply_unitary_density(rho: np.ndarray, u: np.ndarray, targets, n: int) -> np.ndarray:
    t = rho.reshape((2,) * (2 * n))
    t = apply_matrix(t, u, tuple(targets))
    t = apply_matrix(t, np.conj(u), tuple(q + n for q in targets))
    return t.reshape(2**n, 2**n)


def apply_kraus_density(rho: np.ndarray, kraus, targets, n: int) -> np.ndarray:
    t = rho.reshape((2,) * (2 * n))
    rows = tuple(targets)
    cols = tuple(q + n for q in targets)
    acc = np.zeros_like(t)
    for k in kraus:
        acc += apply_matrix(apply_matrix(t, k, rows), np.conj(k), cols)
    return acc.reshape(2**n, 2**n)


def replace_with_mixed(rho: np.ndarray, targets, n: int) -> np.ndarray:
    """``Tr_targets(rho)`` tensored with the maximally mixed state on ``targets``."""
    k = len(targets)
    rows = list(targets)
    cols = [q + n for q in targets]
    rest = [a for a in range(2 * n) if a not in rows and a not in cols]
    perm = rows + cols + rest
    t = rho.reshape((2,) * (2 * n)).transpose(perm).reshape(2**k, 2**k, -1)
    reduced = np.einsum("iir->r", t)
    mixed = np.einsum("ij,r->ijr", np.eye(2**k) / 2**k, reduced).reshape((2,) * (2 * n))
    return mixed.transpose(np.argsort(perm)).reshape(2**n, 2**n)


def zero_state(n: int) -> np.ndarray:
    psi = np.zeros(2**n, dtype=complex)
    psi[0] = 1.0
    return psi


def basis_state(bits) -> np.ndarray:
    n = len(bits)
    psi = np.zeros(2**n, dtype=complex)
    psi[int("".join(str(int(b)) for b in bits), 2)] = 1.0
    return psi


def density(psi: np.ndarray) -> np.ndarray:
    return np.outer(psi, np.conj(psi))


def pauli_expectation(state: np.ndarray, label: str) -> float:
    """``<P>`` for a statevector (1-D) or density matrix (2-D); ``label`` covers all qubits."""
    n = len(label)
    support = [q for q, ch in enumerate(label) if ch != "I"]
    if state.ndim == 1:
        phi = state
        for q in support:
            phi = apply_unitary_state(phi, pauli_matrix(label[q]), (q,), n)
        return float(np.real(np.vdot(state, phi)))
    rho = state
    for q in support:
        t = rho.reshape((2,) * (2 * n))
        rho = apply_matrix(t, pauli_matrix(label[q]), (q,)).reshape(2**n, 2**n)
    return float(np.real(np.trace(rho)))


def z_expectations(state: np.ndarray, n: int) -> np.ndarray:
    """``<Z_q>`` for every qubit, from the computational-basis populations."""
    probs = np.abs(state) ** 2 if state.ndim == 1 else np.real(np.diag(state))
    p = probs.reshape((2,) * n)
    out = np.empty(n)
    for q in range(n):
        m = np.moveaxis(p, q, 0).reshape(2, -1).sum(axis=1)
        out[q] = m[0] - m[1]
    return out


# Rotations taking the eigenbasis of X or Y to the computational basis.
BASIS_ROTATIONS = {"X": H, "Y": H @ S.conj().T, "Z": np.eye(2, dtype=complex)}


def rotate_to_basis(state: np.ndarray, bases: str, n: int) -> np.ndarray:
    for q, b in enumerate(bases):
        if b == "Z":
            continue
        if state.ndim == 1:
            state = apply_unitary_state(state, BASIS_ROTATIONS[b], (q,), n)
        else:
            state = apply_unitary_density(state, BASIS_ROTATIONS[b], (q,), n)
    return state


def born_probabilities(state: np.ndarray, bases: str | None = None) -> np.ndarray:
    n = int(round(np.log2(state.shape[0])))
    if bases is not None:
        state = rotate_to_basis(state, bases, n)
    probs = np.abs(state) ** 2 if state.ndim == 1 else np.real(np.diag(state))
    probs = np.clip(probs, 0.0, None)
    return probs / probs.sum()


def index_to_bits(indices: np.ndarray, n: int) -> np.ndarray:
    shifts = np.arange(n - 1, -1, -1)
    return ((np.asarray(indices)[:, None] >> shifts) & 1).astype(np.uint8)


def sample_shots(state: np.ndarray, bases: str, shots: int, seed=None) -> np.ndarray:
    """Bitstrings (``shots`` x n, uint8) drawn after rotating into ``bases``.

    A bit value 0 means the +1 eigenvalue of the measured Pauli.
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    n = int(round(np.log2(state.shape[0])))
    if len(bases) != n:
        raise ValueError("one basis letter per qubit required")
    rng = np.random.default_rng(seed)
    probs = born_probabilities(state, bases)
    idx = rng.choice(len(probs), size=shots, p=probs)
    return index_to_bits(idx, n)
