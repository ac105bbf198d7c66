"""Pauli transfer matrices and infidelity decomposition."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import polar

from ..paulis import pauli_basis


def _n_from_dim(dim: int) -> int:
    n = int(round(np.log2(dim)))
    if 2**n != dim:
        raise ValueError("dimension is not a power of two")
    return n


def kraus_ptm(kraus) -> np.ndarray:
    """``R[P, Q] = Tr(P Phi(Q)) / d`` for the channel with the given Kraus operators."""
    kraus = [np.asarray(k, dtype=complex) for k in kraus]
    d = kraus[0].shape[0]
    basis = pauli_basis(_n_from_dim(d))
    out = np.zeros((len(basis), len(basis)))
    for k in kraus:
        # images[q] = K Q K^dagger
        images = np.einsum("ab,qbc,dc->qad", k, basis, k.conj())
        out += np.real(np.einsum("pda,qad->pq", basis, images))
    return out / d


def unitary_ptm(u: np.ndarray) -> np.ndarray:
    return kraus_ptm([u])


def channel_ptm(channel) -> np.ndarray:
    """PTM of a unitary matrix, a Kraus list, or any object with a ``kraus`` attribute."""
    if hasattr(channel, "ptm"):
        return channel.ptm()
    if hasattr(channel, "kraus"):
        return kraus_ptm(channel.kraus)
    arr = np.asarray(channel) if not isinstance(channel, (list, tuple)) else None
    if arr is not None and arr.ndim == 2:
        return unitary_ptm(arr)
    return kraus_ptm(channel)


def ptm_to_choi(r: np.ndarray) -> np.ndarray:
    """Choi matrix ``sum_ij |i><j| (x) Phi(|i><j|)`` from a PTM."""
    d = _dim_from_ptm(r)
    basis = pauli_basis(_n_from_dim(d))
    # Phi(Q) = sum_P R[P, Q] P for the unnormalized Paulis
    images = np.einsum("pq,pab->qab", r, basis)
    blocks = np.einsum("qji,qab->iajb", basis, images) / d
    return blocks.reshape(d * d, d * d)


def choi_to_ptm(choi: np.ndarray) -> np.ndarray:
    d = int(round(np.sqrt(choi.shape[0])))
    basis = pauli_basis(_n_from_dim(d))
    blocks = choi.reshape(d, d, d, d)  # [i, a, j, b] -> Phi(|i><j|)[a, b]
    # Phi(Q) = sum_ij Q[i,j] Phi(|i><j|)
    images = np.einsum("qij,iajb->qab", basis, blocks)
    return np.real(np.einsum("pba,qab->pq", basis, images)) / d


def _dim_from_ptm(r: np.ndarray) -> int:
    d = int(round(np.sqrt(r.shape[0])))
    if d * d != r.shape[0]:
        raise ValueError("PTM size is not a square of a dimension")
    return d


@dataclass(frozen=True)
class InfidelityDecomposition:
    total: float
    stochastic: float
    coherent: float

    def as_tuple(self) -> tuple[float, float, float]:
        return self.total, self.stochastic, self.coherent

    def to_dict(self) -> dict:
        return {"total": self.total, "stochastic": self.stochastic, "coherent": self.coherent}


def infidelity_decomposition(error_ptm: np.ndarray, method: str = "unitarity") -> InfidelityDecomposition:
    """Split the infidelity of an error channel into stochastic and coherent parts.

    ``method="unitarity"``: ``E_F = 1 - Tr R / d^2``, ``E_S = 1 - sqrt(Tr R R^T) / d``,
    ``E_U = E_F - E_S``.

    ``method="polar"``: ``R = W P`` with ``W`` orthogonal; the components are
    the infidelities of the two factors, ``E_S = 1 - Tr P / d^2`` and
    ``E_U = 1 - Tr W / d^2``.  ``E_F`` is the same in both methods.
    """
    r = np.asarray(error_ptm, dtype=float)
    d = _dim_from_ptm(r)
    total = 1 - np.trace(r) / d**2
    if method == "unitarity":
        stochastic = 1 - np.sqrt(max(np.trace(r @ r.T), 0.0)) / d
        return InfidelityDecomposition(float(total), float(stochastic), float(total - stochastic))
    if method == "polar":
        w, p = polar_factors(r)
        return InfidelityDecomposition(
            float(total), float(1 - np.trace(p) / d**2), float(1 - np.trace(w) / d**2)
        )
    raise ValueError(f"unknown method {method!r}")


def polar_factors(r: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``R = W P`` with ``W`` orthogonal and ``P`` positive semidefinite."""
    w, p = polar(np.asarray(r, dtype=float), side="right")
    return w, p


def process_fidelity_ptm(r: np.ndarray) -> float:
    d = _dim_from_ptm(r)
    return float(np.trace(r) / d**2)
