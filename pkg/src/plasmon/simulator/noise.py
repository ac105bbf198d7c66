"""Noise channels and per-gate-kind noise models."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from ..circuit import FSIM, PHASED_X90, PHASED_X180, U1, U2, Z_PHASE
from ..paulis import pauli_basis, pauli_matrix
from .ptm import infidelity_decomposition, kraus_ptm
from .states import apply_kraus_density, apply_unitary_density, replace_with_mixed

# Device metrics used as defaults (times in microseconds).
TABLE_I = {
    "t1_us": 37.6,
    "t2_us": 22.3,
    "fsim_duration_us": 0.054,
    "rx_duration_us": 0.020,
    "fsim_infidelity": 0.0060,
    "rx_infidelity": 0.0009,
}


class Channel:
    """A CPTP map on ``n_qubits`` qubits given by Kraus operators."""

    def __init__(self, kraus, label: str = ""):
        self.kraus = tuple(np.asarray(k, dtype=complex) for k in kraus)
        d = self.kraus[0].shape[0]
        self.n_qubits = int(round(np.log2(d)))
        self.label = label
        completeness = sum(k.conj().T @ k for k in self.kraus)
        if not np.allclose(completeness, np.eye(d), atol=1e-10):
            raise ValueError(f"Kraus set for {label or 'channel'} is not trace preserving")

    def ptm(self) -> np.ndarray:
        return kraus_ptm(self.kraus)

    def apply(self, rho: np.ndarray, targets, n: int) -> np.ndarray:
        return apply_kraus_density(rho, self.kraus, targets, n)

    @property
    def is_pauli(self) -> bool:
        r = self.ptm()
        return bool(np.allclose(r, np.diag(np.diag(r)), atol=1e-12))

    def __repr__(self) -> str:
        return f"Channel({self.label or len(self.kraus)}, n_qubits={self.n_qubits})"


class DepolarizingChannel(Channel):
    """``rho -> (1 - p) rho + p Tr_targets(rho) (x) I / d``."""

    def __init__(self, p: float, n_qubits: int = 1):
        if not 0 <= p <= 1:
            raise ValueError("depolarizing probability must lie in [0, 1]")
        self.p = float(p)
        d = 2**n_qubits
        paulis = pauli_basis(n_qubits)
        weights = np.full(len(paulis), p / d**2)
        weights[0] += 1 - p
        super().__init__([np.sqrt(w) * m for w, m in zip(weights, paulis)], f"depolarizing({p:.3g})")

    def apply(self, rho, targets, n):
        if self.p == 0:
            return rho
        return (1 - self.p) * rho + self.p * replace_with_mixed(rho, targets, n)


class UnitaryChannel(Channel):
    def __init__(self, u: np.ndarray, label: str = ""):
        super().__init__([u], label or "unitary")
        self.u = self.kraus[0]

    def apply(self, rho, targets, n):
        return apply_unitary_density(rho, self.u, targets, n)


def depolarizing(p: float, n_qubits: int = 1) -> DepolarizingChannel:
    return DepolarizingChannel(p, n_qubits)


def pauli_channel(probs: dict[str, float]) -> Channel:
    """Stochastic Pauli channel from ``{label: probability}``; identity gets the rest."""
    n = len(next(iter(probs)))
    total = sum(probs.values())
    if total > 1 + 1e-12 or min(probs.values()) < 0:
        raise ValueError("invalid Pauli error probabilities")
    weights = dict(probs)
    weights["I" * n] = weights.get("I" * n, 0.0) + 1 - total
    kraus = [np.sqrt(w) * pauli_matrix(lbl) for lbl, w in weights.items() if w > 0]
    return Channel(kraus, "pauli")


def amplitude_damping(t1: float, duration: float) -> Channel:
    if t1 <= 0 or duration <= 0:
        raise ValueError("T1 and duration must be positive")
    g = 1 - np.exp(-duration / t1)
    k0 = np.array([[1, 0], [0, np.sqrt(1 - g)]])
    k1 = np.array([[0, np.sqrt(g)], [0, 0]])
    return Channel([k0, k1], f"amplitude_damping(gamma={g:.3g})")


def dephasing(t2: float, t1: float, duration: float) -> Channel:
    """Pure dephasing at rate ``1/T2 - 1/(2 T1)``."""
    if min(t1, t2, duration) <= 0:
        raise ValueError("T1, T2 and duration must be positive")
    rate = 1 / t2 - 1 / (2 * t1)
    if rate < 0:
        raise ValueError("T2 exceeds 2 T1")
    lam = np.exp(-duration * rate)
    k0 = np.sqrt((1 + lam) / 2) * np.eye(2)
    k1 = np.sqrt((1 - lam) / 2) * pauli_matrix("Z")
    return Channel([k0, k1], f"dephasing(lambda={lam:.6g})")


def coherent(generator, angle: float) -> UnitaryChannel:
    """``exp(-i angle G / 2)`` for a Pauli label or Hermitian matrix ``G``."""
    g = pauli_matrix(generator) if isinstance(generator, str) else np.asarray(generator, dtype=complex)
    if not np.allclose(g, g.conj().T, atol=1e-12):
        raise ValueError("generator must be Hermitian")
    w, v = np.linalg.eigh(g)
    u = (v * np.exp(-0.5j * angle * w)) @ v.conj().T
    return UnitaryChannel(u, f"coherent({generator if isinstance(generator, str) else 'G'}, {angle:.4g})")


def _composite_ptm(channels, n_qubits: int) -> np.ndarray:
    """PTM of applying ``channels`` in order, one-qubit ones on every qubit."""
    dim = 4**n_qubits
    total = np.eye(dim)
    for ch in channels:
        r = ch.ptm()
        if ch.n_qubits == n_qubits:
            full = r
        elif ch.n_qubits == 1:
            full = r
            for _ in range(n_qubits - 1):
                full = np.kron(full, r)
        else:
            raise ValueError("channel larger than the gate")
        total = full @ total
    return total


def calibrate_depolarizing(decay_channels, n_qubits: int, target_infidelity: float) -> float:
    """Depolarizing strength that brings the composite process infidelity to the target."""

    def gap(p):
        chans = list(decay_channels) + [DepolarizingChannel(p, n_qubits)]
        return infidelity_decomposition(_composite_ptm(chans, n_qubits)).total - target_infidelity

    base = gap(0.0)
    if base > 0:
        raise ValueError("decoherence alone exceeds the target infidelity")
    if base == 0:
        return 0.0
    return float(brentq(gap, 0.0, 1.0, xtol=1e-14))


@dataclass
class NoiseModel:
    """Channels applied after each gate, keyed by gate kind.

    One-qubit channels attached to a two-qubit kind act on both targets.
    """

    channels: dict[str, tuple[Channel, ...]] = field(default_factory=dict)
    label: str = "custom"

    def for_gate(self, kind: str) -> tuple[Channel, ...]:
        return self.channels.get(kind, ())

    def with_channel(self, kind: str, channel: Channel) -> "NoiseModel":
        new = dict(self.channels)
        new[kind] = tuple(new.get(kind, ())) + (channel,)
        return NoiseModel(new, self.label)

    @property
    def is_noiseless(self) -> bool:
        return not any(self.channels.values())

    @property
    def is_pauli(self) -> bool:
        return all(ch.is_pauli for chans in self.channels.values() for ch in chans)

    def gate_ptm(self, kind: str, n_qubits: int) -> np.ndarray:
        return _composite_ptm(self.for_gate(kind), n_qubits)

    def apply(self, rho: np.ndarray, gate, n: int) -> np.ndarray:
        for ch in self.for_gate(gate.kind):
            if ch.n_qubits == len(gate.targets):
                rho = ch.apply(rho, gate.targets, n)
            elif ch.n_qubits == 1:
                for q in gate.targets:
                    rho = ch.apply(rho, (q,), n)
            else:
                raise ValueError(f"{ch!r} does not fit gate {gate.kind}")
        return rho

    @classmethod
    def none(cls) -> "NoiseModel":
        return cls({}, "none")

    @classmethod
    def pauli(cls, two_qubit_infidelity: float = 0.0148, one_qubit_infidelity: float = 0.0) -> "NoiseModel":
        """Depolarizing noise set by process infidelities (``15p/16`` and ``3p/4``)."""
        p2 = 16 * two_qubit_infidelity / 15
        p1 = 4 * one_qubit_infidelity / 3
        chans: dict[str, tuple[Channel, ...]] = {FSIM: (DepolarizingChannel(p2, 2),),
                                                 U2: (DepolarizingChannel(p2, 2),)}
        if p1 > 0:
            for kind in (PHASED_X90, PHASED_X180, U1):
                chans[kind] = (DepolarizingChannel(p1, 1),)
        return cls(chans, "pauli")

    @classmethod
    def table_one(cls, params: dict | None = None) -> "NoiseModel":
        """Duration-based T1/T2 decay plus depolarizing calibrated to the gate infidelities.

        A logical two-qubit block costs two native two-qubit gates; a generic
        one-qubit unitary costs four pi/2 pulses.
        """
        p = dict(TABLE_I)
        p.update(params or {})
        t1, t2 = p["t1_us"], p["t2_us"]
        f_decay = [amplitude_damping(t1, p["fsim_duration_us"]), dephasing(t2, t1, p["fsim_duration_us"])]
        x_decay = [amplitude_damping(t1, p["rx_duration_us"]), dephasing(t2, t1, p["rx_duration_us"])]
        pf = calibrate_depolarizing(f_decay, 2, p["fsim_infidelity"])
        px = calibrate_depolarizing(x_decay, 1, p["rx_infidelity"])
        fsim_chans = tuple(f_decay) + (DepolarizingChannel(pf, 2),)
        x_chans = tuple(x_decay) + (DepolarizingChannel(px, 1),)
        return cls(
            {
                FSIM: fsim_chans,
                U2: fsim_chans * 2,
                PHASED_X90: x_chans,
                PHASED_X180: x_chans * 2,
                U1: x_chans * 4,
                Z_PHASE: (),
            },
            "table_one",
        )
