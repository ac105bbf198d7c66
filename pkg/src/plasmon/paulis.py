"""Pauli matrices, Pauli bases and elementary one-qubit rotations."""

from __future__ import annotations

import itertools
from functools import lru_cache

import numpy as np

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
S = np.diag([1, 1j]).astype(complex)

PAULI_1Q = {"I": I2, "X": X, "Y": Y, "Z": Z}
LETTERS = "IXYZ"


def rx(angle: float) -> np.ndarray:
    c, s = np.cos(angle / 2), np.sin(angle / 2)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)


def ry(angle: float) -> np.ndarray:
    c, s = np.cos(angle / 2), np.sin(angle / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rz(angle: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * angle), np.exp(0.5j * angle)])


def pauli_matrix(label: str) -> np.ndarray:
    """Dense matrix of a Pauli label such as ``"XZ"``; qubit 0 is the leftmost factor."""
    out = np.ones((1, 1), dtype=complex)
    for ch in label:
        out = np.kron(out, PAULI_1Q[ch])
    return out


@lru_cache(maxsize=None)
def pauli_labels(n: int) -> tuple[str, ...]:
    return tuple("".join(p) for p in itertools.product(LETTERS, repeat=n))


@lru_cache(maxsize=None)
def _pauli_basis(n: int) -> np.ndarray:
    basis = np.array([pauli_matrix(lbl) for lbl in pauli_labels(n)])
    basis.setflags(write=False)
    return basis


def pauli_basis(n: int) -> np.ndarray:
    """Unnormalized Pauli matrices, shape ``(4**n, 2**n, 2**n)``, in ``pauli_labels`` order."""
    return _pauli_basis(n)


def pauli_vector(rho: np.ndarray) -> np.ndarray:
    """Expectation values ``Tr(P rho)`` for every Pauli, real."""
    n = int(round(np.log2(rho.shape[0])))
    basis = pauli_basis(n)
    return np.real(np.einsum("pij,ji->p", basis, rho))


def pauli_rotation(label: str, angle: float) -> np.ndarray:
    """``exp(-i angle P / 2)`` for a Pauli label ``P``."""
    p = pauli_matrix(label)
    return np.cos(angle / 2) * np.eye(p.shape[0]) - 1j * np.sin(angle / 2) * p


def is_unitary(u: np.ndarray, atol: float = 1e-12) -> bool:
    u = np.asarray(u)
    return u.ndim == 2 and u.shape[0] == u.shape[1] and np.allclose(
        u.conj().T @ u, np.eye(u.shape[0]), atol=atol
    )


def zyz_unitary(a: float, b: float, c: float) -> np.ndarray:
    return rz(a) @ ry(b) @ rz(c)


def zyz_angles(u: np.ndarray) -> tuple[float, float, float]:
    """Angles ``(a, b, c)`` with ``u = e^{i alpha} RZ(a) RY(b) RZ(c)``."""
    u = np.asarray(u, dtype=complex)
    v = u / np.sqrt(np.linalg.det(u))
    b = 2 * np.arctan2(abs(v[1, 0]), abs(v[0, 0]))
    if abs(v[0, 0]) > 1e-12 and abs(v[1, 0]) > 1e-12:
        plus = 2 * np.angle(v[1, 1])
        minus = 2 * np.angle(v[1, 0])
    elif abs(v[1, 0]) <= 1e-12:
        plus, minus = 2 * np.angle(v[1, 1]), 0.0
    else:
        plus, minus = 0.0, 2 * np.angle(v[1, 0])
    return float((plus + minus) / 2), float(b), float((plus - minus) / 2)


def phase_aligned_distance(u: np.ndarray, v: np.ndarray) -> float:
    """``min_alpha ||u - e^{i alpha} v||_F``."""
    overlap = np.vdot(v, u)
    phase = overlap / abs(overlap) if abs(overlap) > 0 else 1.0
    return float(np.linalg.norm(u - phase * v))
