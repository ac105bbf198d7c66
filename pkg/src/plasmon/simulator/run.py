"""Circuit execution on statevectors and density matrices."""

from __future__ import annotations

from typing import Callable

import numpy as np

from ..circuit import Circuit
from .noise import NoiseModel
from .states import apply_unitary_density, apply_unitary_state, density, zero_state


def run_statevector(
    circuit: Circuit,
    init: np.ndarray | None = None,
    on_layer: Callable[[int, np.ndarray], None] | None = None,
) -> np.ndarray:
    n = circuit.n_qubits
    psi = zero_state(n) if init is None else np.asarray(init, dtype=complex)
    if psi.shape != (2**n,):
        raise ValueError("initial state does not match the register")
    for i, layer in enumerate(circuit.layers):
        for g in layer:
            psi = apply_unitary_state(psi, g.unitary(), g.targets, n)
        if on_layer is not None:
            on_layer(i, psi)
    return psi


def run_density(
    circuit: Circuit,
    init: np.ndarray | None = None,
    noise: NoiseModel | None = None,
    on_layer: Callable[[int, np.ndarray], None] | None = None,
    check: bool = False,
) -> np.ndarray:
    """Apply each gate's unitary followed by the channels keyed to its kind."""
    n = circuit.n_qubits
    if init is None:
        rho = density(zero_state(n))
    else:
        init = np.asarray(init, dtype=complex)
        rho = density(init) if init.ndim == 1 else init
    if rho.shape != (2**n, 2**n):
        raise ValueError("initial state does not match the register")
    noise = noise or NoiseModel.none()
    for i, layer in enumerate(circuit.layers):
        for g in layer:
            rho = apply_unitary_density(rho, g.unitary(), g.targets, n)
            rho = noise.apply(rho, g, n)
        if check:
            _check_state(rho)
        if on_layer is not None:
            on_layer(i, rho)
    return rho


def _check_state(rho: np.ndarray) -> None:
    if abs(np.trace(rho) - 1) > 1e-10:
        raise FloatingPointError("trace drifted beyond 1e-10")
    if np.linalg.eigvalsh((rho + rho.conj().T) / 2).min() < -1e-9:
        raise FloatingPointError("density matrix lost positivity")
