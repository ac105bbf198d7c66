"""Statevector and density-matrix simulation, noise channels and PTM analytics."""

from .backend import DeviceBackend, SimulatorBackend
from .noise import (
    TABLE_I,
    Channel,
    DepolarizingChannel,
    NoiseModel,
    UnitaryChannel,
    amplitude_damping,
    calibrate_depolarizing,
    coherent,
    dephasing,
    depolarizing,
    pauli_channel,
)
from .ptm import (
    InfidelityDecomposition,
    channel_ptm,
    choi_to_ptm,
    infidelity_decomposition,
    kraus_ptm,
    polar_factors,
    ptm_to_choi,
    unitary_ptm,
)
from .run import run_density, run_statevector
from .states import (
    basis_state,
    born_probabilities,
    density,
    pauli_expectation,
    sample_shots,
    z_expectations,
    zero_state,
)

__all__ = [
    "TABLE_I", "Channel", "DepolarizingChannel", "DeviceBackend", "InfidelityDecomposition",
    "NoiseModel", "SimulatorBackend", "UnitaryChannel", "amplitude_damping", "basis_state",
    "born_probabilities", "calibrate_depolarizing", "channel_ptm", "choi_to_ptm", "coherent",
    "dephasing", "density", "depolarizing", "infidelity_decomposition", "kraus_ptm",
    "pauli_channel", "pauli_expectation", "polar_factors", "ptm_to_choi", "run_density",
    "run_statevector", "sample_shots", "unitary_ptm", "z_expectations", "zero_state",
]
