"""Gate-level circuit representation and Trotter circuit builders."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.linalg import expm

from .lattice import LatticeSpec
from .paulis import X, Y, is_unitary, phase_aligned_distance, rx, ry, rz, zyz_angles

PHASED_X90 = "phased_x90"
PHASED_X180 = "phased_x180"
Z_PHASE = "z_phase"
FSIM = "fsim"
U1 = "one_qubit"
U2 = "two_qubit"
KINDS = (PHASED_X90, PHASED_X180, Z_PHASE, FSIM, U1, U2)
_ARITY = {PHASED_X90: 1, PHASED_X180: 1, Z_PHASE: 1, FSIM: 2, U1: 1, U2: 2}
CIRCUIT_FORMAT = "plasmon-circuit"
CIRCUIT_VERSION = 1


def fsim_matrix(theta: float, phi: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array(
        [[1, 0, 0, 0], [0, c, 1j * s, 0], [0, 1j * s, c, 0], [0, 0, 0, np.exp(1j * phi)]],
        dtype=complex,
    )


def phased_x(angle: float, phase: float) -> np.ndarray:
    """Rotation by ``angle`` about the equatorial axis ``(cos phase, sin phase, 0)``."""
    return rz(phase) @ rx(angle) @ rz(-phase)


@dataclass(frozen=True, eq=False)
class Gate:
    kind: str
    targets: tuple[int, ...]
    params: tuple[float, ...] = ()
    matrix: np.ndarray | None = None
    label: str = ""

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        targets = tuple(int(t) for t in self.targets)
        object.__setattr__(self, "targets", targets)
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        if len(targets) != _ARITY[self.kind]:
            raise ValueError(f"{self.kind} acts on {_ARITY[self.kind]} qubit(s)")
        if len(set(targets)) != len(targets) or min(targets) < 0:
            raise ValueError("targets must be distinct non-negative indices")
        if self.kind in (U1, U2):
            m = np.array(self.matrix, dtype=complex)
            if m.shape != (2 ** len(targets),) * 2 or not is_unitary(m, 1e-10):
                raise ValueError("unitary payload has wrong shape or is not unitary")
            m.setflags(write=False)
            object.__setattr__(self, "matrix", m)

    def unitary(self) -> np.ndarray:
        if self.kind == PHASED_X90:
            return phased_x(np.pi / 2, self.params[0])
        if self.kind == PHASED_X180:
            return phased_x(np.pi, self.params[0])
        if self.kind == Z_PHASE:
            return rz(self.params[0])
        if self.kind == FSIM:
            return fsim_matrix(*self.params)
        return np.array(self.matrix)

    def with_targets(self, targets) -> "Gate":
        return Gate(self.kind, tuple(targets), self.params, self.matrix, self.label)

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "params": list(self.params), "targets": list(self.targets)}
        if self.matrix is not None:
            d["matrix"] = [[[float(z.real), float(z.imag)] for z in row] for row in self.matrix]
        if self.label:
            d["label"] = self.label
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Gate":
        m = d.get("matrix")
        if m is not None:
            m = np.array([[complex(*z) for z in row] for row in m])
        return cls(d["kind"], tuple(d["targets"]), tuple(d.get("params", ())), m, d.get("label", ""))


def one_qubit(u: np.ndarray, q: int, label: str = "") -> Gate:
    return Gate(U1, (q,), matrix=u, label=label)


def two_qubit(u: np.ndarray, a: int, b: int, label: str = "") -> Gate:
    return Gate(U2, (a, b), matrix=u, label=label)


def fsim(theta: float, phi: float, a: int, b: int) -> Gate:
    return Gate(FSIM, (a, b), (theta, phi))


@dataclass(frozen=True, eq=False)
class Circuit:
    """Ordered layers of gates; gates inside a layer act on disjoint qubits.

    ``roles`` tags each layer (``"prep"``, ``"odd"``, ``"even"``, ``"z"``, ...)
    and ``steps`` records the Trotter step a layer belongs to (``-1`` outside
    the Trotter body).  Both are kept in sync with ``layers``.
    """

    n_qubits: int
    layers: tuple[tuple[Gate, ...], ...] = ()
    roles: tuple[str, ...] = ()
    steps: tuple[int, ...] = ()

    def __post_init__(self):
        layers = tuple(tuple(layer) for layer in self.layers)
        object.__setattr__(self, "layers", layers)
        roles = tuple(self.roles) if self.roles else ("",) * len(layers)
        steps = tuple(int(s) for s in self.steps) if self.steps else (-1,) * len(layers)
        if len(roles) != len(layers) or len(steps) != len(layers):
            raise ValueError("roles/steps must match the number of layers")
        object.__setattr__(self, "roles", roles)
        object.__setattr__(self, "steps", steps)
        for layer in layers:
            seen: set[int] = set()
            for g in layer:
                if max(g.targets) >= self.n_qubits:
                    raise ValueError(f"gate target out of range for {self.n_qubits} qubits")
                if seen & set(g.targets):
                    raise ValueError("a qubit appears twice in one layer")
                seen |= set(g.targets)

    @property
    def depth(self) -> int:
        return len(self.layers)

    def gates(self) -> Iterable[Gate]:
        for layer in self.layers:
            yield from layer

    def count(self, kind: str | None = None, arity: int | None = None) -> int:
        return sum(
            1 for g in self.gates()
            if (kind is None or g.kind == kind) and (arity is None or len(g.targets) == arity)
        )

    def then(self, other: "Circuit") -> "Circuit":
        if other.n_qubits != self.n_qubits:
            raise ValueError("register mismatch")
        return Circuit(
            self.n_qubits,
            self.layers + other.layers,
            self.roles + other.roles,
            self.steps + other.steps,
        )

    def prefix(self, n_layers: int) -> "Circuit":
        return Circuit(self.n_qubits, self.layers[:n_layers], self.roles[:n_layers], self.steps[:n_layers])

    def step_prefix(self, n_steps: int) -> "Circuit":
        """Layers up to and including Trotter step ``n_steps - 1``."""
        keep = [i for i, s in enumerate(self.steps) if s < n_steps]
        return self.prefix(max(keep) + 1 if keep else 0)

    def structure(self) -> list[dict]:
        """Per-layer placement skeleton used to build matched Clifford circuits."""
        return [
            {"role": role, "step": step, "slots": [list(g.targets) for g in layer]}
            for layer, role, step in zip(self.layers, self.roles, self.steps)
        ]

    def unitary(self) -> np.ndarray:
        from .simulator.states import apply_unitary_state

        n = self.n_qubits
        dim = 2**n
        cols = np.eye(dim, dtype=complex)
        out = np.empty((dim, dim), dtype=complex)
        for c in range(dim):
            psi = cols[:, c]
            for g in self.gates():
                psi = apply_unitary_state(psi, g.unitary(), g.targets, n)
            out[:, c] = psi
        return out

    def to_dict(self) -> dict:
        return {
            "format": CIRCUIT_FORMAT,
            "version": CIRCUIT_VERSION,
            "n_qubits": self.n_qubits,
            "layers": [[g.to_dict() for g in layer] for layer in self.layers],
            "roles": list(self.roles),
            "steps": list(self.steps),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "Circuit":
        if d.get("format") != CIRCUIT_FORMAT or d.get("version") != CIRCUIT_VERSION:
            raise ValueError("unsupported circuit serialization")
        layers = [[Gate.from_dict(g) for g in layer] for layer in d["layers"]]
        return cls(d["n_qubits"], layers, tuple(d.get("roles", ())), tuple(d.get("steps", ())))

    @classmethod
    def from_json(cls, text: str) -> "Circuit":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class TrotterConfig:
    dt: float
    n_steps: int
    spec: LatticeSpec

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if int(self.n_steps) != self.n_steps or self.n_steps < 0:
            raise ValueError("n_steps must be a non-negative integer")


_XY_MINUS_YX = np.kron(X, Y) - np.kron(Y, X)


def hopping_block(coupling: float, dt: float) -> np.ndarray:
    """Bond factor of one Trotter step.

    Its restriction to one excitation is ``exp(-i h dt)`` with the 2x2 bond
    Hamiltonian ``h[0, 1] = -i coupling / 2`` of the lattice module.
    """
    return expm(-1j * (coupling * dt / 4) * _XY_MINUS_YX)


def onsite_phase(gap: float, site: int, dt: float) -> np.ndarray:
    """Z factor for 1-indexed ``site``; gives the excitation energy ``gap (-1)^site``."""
    return rz(-dt * gap * (-1) ** site)


def _bonds(spec: LatticeSpec) -> tuple[list[tuple[int, int]], list[tuple[int, int]]]:
    n = spec.n_sites
    odd = [(i, i + 1) for i in range(0, n - 1, 2)]
    even = [(i, i + 1) for i in range(1, n - 1, 2)]
    if spec.boundary == "periodic":
        if n % 2:
            raise ValueError("periodic Trotter circuits need an even number of sites")
        if n > 2:
            even.append((n - 1, 0))
    return odd, even


def build_trotter_step(config: TrotterConfig, absorb_z: bool = False, step: int = 0) -> Circuit:
    """One first-order step: odd bonds, even bonds, then the on-site Z layer.

    With ``absorb_z`` the Z rotations are folded into the two-qubit blocks:
    into the even-bond block containing a site, or else into its odd-bond
    block (such a site is idle during the even layer, so this is exact).
    """
    spec, dt = config.spec, config.dt
    n = spec.n_sites
    odd, even = _bonds(spec)
    hop = hopping_block(spec.coupling, dt)
    zs = {q: onsite_phase(spec.gaps[q], q + 1, dt) for q in range(n)}
    if not absorb_z:
        layers = [
            [two_qubit(hop, a, b, "hop") for a, b in odd],
            [two_qubit(hop, a, b, "hop") for a, b in even],
            [Gate(Z_PHASE, (q,), (-dt * spec.gaps[q] * (-1) ** (q + 1),)) for q in range(n)],
        ]
        return Circuit(n, layers, ("odd", "even", "z"), (step,) * 3)
    in_even = {q for bond in even for q in bond}
    odd_layer, even_layer = [], []
    for a, b in odd:
        za = zs[a] if a not in in_even else np.eye(2)
        zb = zs[b] if b not in in_even else np.eye(2)
        odd_layer.append(two_qubit(np.kron(za, zb) @ hop, a, b, "hop+z"))
    for a, b in even:
        even_layer.append(two_qubit(np.kron(zs[a], zs[b]) @ hop, a, b, "hop+z"))
    covered = in_even | {q for bond in odd for q in bond}
    layers = [odd_layer, even_layer]
    roles = ["odd", "even"]
    lonely = [q for q in range(n) if q not in covered]
    if lonely:
        layers.append([Gate(Z_PHASE, (q,), (-dt * spec.gaps[q] * (-1) ** (q + 1),)) for q in lonely])
        roles.append("z")
    return Circuit(n, layers, tuple(roles), (step,) * len(layers))


def build_trotter_circuit(config: TrotterConfig, init_prep: Circuit, absorb_z: bool = False) -> Circuit:
    if init_prep.n_qubits != config.spec.n_sites:
        raise ValueError("init_prep register does not match the lattice")
    prep = Circuit(init_prep.n_qubits, init_prep.layers,
                   tuple(r or "prep" for r in init_prep.roles), (-1,) * init_prep.depth)
    out = prep
    for s in range(config.n_steps):
        out = out.then(build_trotter_step(config, absorb_z=absorb_z, step=s))
    return out


def pmw4(u: np.ndarray, qubit: int = 0, atol: float = 1e-9) -> list[Gate]:
    """Four phased pi/2 pulses reproducing ``u`` up to global phase.

    Uses ``X90(t) X180(p) X90(w) = RZ(t) RY(2p - t - w) RZ(-w)`` up to phase,
    so the phases follow from the ZYZ angles of ``u``.  Returned in time
    order (first applied first).
    """
    u = np.asarray(u, dtype=complex)
    if not is_unitary(u, 1e-10):
        raise ValueError("pmw4 needs a unitary")
    a, b, c = zyz_angles(u)
    theta, omega = a, -c
    phi = (theta + omega - b) / 2
    pulses = [Gate(PHASED_X90, (qubit,), (p,)) for p in (omega, phi, phi, theta)]
    prod = np.eye(2, dtype=complex)
    for g in pulses:
        prod = g.unitary() @ prod
    dist = phase_aligned_distance(prod, u)
    if dist > atol:
        raise RuntimeError(f"pmw4 reconstruction failed, distance {dist:.3e}")
    return pulses


def _split_block(u: complex, v: complex) -> np.ndarray:
    """Excitation-conserving block sending |10> to u|10> + v|01>."""
    m = np.eye(4, dtype=complex)
    m[2, 2], m[1, 2] = u, v
    m[2, 1], m[1, 1] = -np.conj(v), np.conj(u)
    return m


def wavepacket_prep(alphas: Sequence[complex], n_qubits: int, start: int = 0) -> Circuit:
    """Prepare ``sum_i alphas[i] |1 on start+i>`` from ``|0...0>``, up to global phase.

    An X flip on the first support site followed by a cascade of
    excitation-splitting two-qubit blocks (one block for two sites).
    """
    alphas = np.asarray(alphas, dtype=complex)
    if abs(np.linalg.norm(alphas) - 1) > 1e-10:
        raise ValueError("amplitudes must be normalized")
    m = len(alphas)
    if start < 0 or start + m > n_qubits:
        raise ValueError("support outside the register")
    layers: list[list[Gate]] = [[Gate(PHASED_X180, (start,), (0.0,))]]
    # RX(pi)|0> = -i|1>; carry that phase so the final amplitudes are exact.
    carried = -1j
    tail = np.sqrt(np.cumsum(np.abs(alphas[::-1]) ** 2)[::-1])
    for i in range(m - 1):
        if tail[i + 1] < 1e-14:
            break
        if i == m - 2:
            v = alphas[i + 1] / carried
        else:
            v = tail[i + 1] / carried
        u = alphas[i] / carried
        layers.append([two_qubit(_split_block(u, v), start + i, start + i + 1, "prep")])
        carried = carried * v
    return Circuit(n_qubits, layers, ("prep",) * len(layers))


def single_site_superposition(n_qubits: int, site: int = 0) -> Circuit:
    """``(|0> + |1>)/sqrt(2)`` on one site; the reference for spectroscopy."""
    return Circuit(n_qubits, [[one_qubit(ry(np.pi / 2), site, "ry90")]], ("prep",))
