"""Device backend interface and its simulator implementation."""

from __future__ import annotations

from typing import Callable, Protocol, runtime_checkable

import numpy as np

from ..circuit import FSIM, Circuit, Gate
from .noise import NoiseModel
from .run import run_density, run_statevector
from .states import born_probabilities, index_to_bits


@runtime_checkable
class DeviceBackend(Protocol):
    """What the learning and mitigation code may ask of a device."""

    concurrent_safe: bool

    def run(self, circuit: Circuit, bases: str, shots: int, seed=None) -> np.ndarray:
        """Bitstrings (shots x n) after measuring each qubit in the given basis letter."""
        ...


class SimulatorBackend:
    """Noisy emulated device.

    ``gate_map`` rewrites gates before execution, which lets a test declare a
    device whose physical FSIM differs from the nominal one.  ``readout_error``
    flips each measured bit independently with that probability.
    """

    concurrent_safe = True

    def __init__(
        self,
        noise: NoiseModel | None = None,
        gate_map: Callable[[Gate], Gate] | None = None,
        readout_error: float = 0.0,
    ):
        self.noise = noise or NoiseModel.none()
        self.gate_map = gate_map
        self.readout_error = float(readout_error)

    @classmethod
    def with_fsim_offset(cls, d_theta: float = 0.0, d_phi: float = 0.0, **kw) -> "SimulatorBackend":
        def shift(g: Gate) -> Gate:
            if g.kind != FSIM:
                return g
            return Gate(FSIM, g.targets, (g.params[0] + d_theta, g.params[1] + d_phi))

        return cls(gate_map=shift, **kw)

    def physical(self, circuit: Circuit) -> Circuit:
        if self.gate_map is None:
            return circuit
        layers = [[self.gate_map(g) for g in layer] for layer in circuit.layers]
        return Circuit(circuit.n_qubits, layers, circuit.roles, circuit.steps)

    def final_state(self, circuit: Circuit) -> np.ndarray:
        circ = self.physical(circuit)
        if self.noise.is_noiseless:
            return run_statevector(circ)
        return run_density(circ, noise=self.noise)

    def probabilities(self, circuit: Circuit, bases: str) -> np.ndarray:
        probs = born_probabilities(self.final_state(circuit), bases)
        if self.readout_error:
            probs = _apply_readout(probs, circuit.n_qubits, self.readout_error)
        return probs

    def run(self, circuit: Circuit, bases: str, shots: int, seed=None) -> np.ndarray:
        if shots < 1:
            raise ValueError("shots must be >= 1")
        rng = np.random.default_rng(seed)
        probs = self.probabilities(circuit, bases)
        idx = rng.choice(len(probs), size=shots, p=probs)
        return index_to_bits(idx, circuit.n_qubits)


def _apply_readout(probs: np.ndarray, n: int, eps: float) -> np.ndarray:
    flip = np.array([[1 - eps, eps], [eps, 1 - eps]])
    p = probs.reshape((2,) * n)
    for q in range(n):
        p = np.moveaxis(np.tensordot(flip, p, axes=(1, q)), 0, q)
    return p.reshape(-1)
