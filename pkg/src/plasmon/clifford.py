"""Clifford circuits: Pauli back-propagation, clique-based activation and random ensembles."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from .circuit import U1, U2, Circuit, Gate
from .paulis import H, LETTERS, S, pauli_labels, pauli_matrix

_MUL = {  # (a, b) -> (phase exponent of i, letter) for a*b
    ("I", "I"): (0, "I"), ("I", "X"): (0, "X"), ("I", "Y"): (0, "Y"), ("I", "Z"): (0, "Z"),
    ("X", "I"): (0, "X"), ("X", "X"): (0, "I"), ("X", "Y"): (1, "Z"), ("X", "Z"): (3, "Y"),
    ("Y", "I"): (0, "Y"), ("Y", "X"): (3, "Z"), ("Y", "Y"): (0, "I"), ("Y", "Z"): (1, "X"),
    ("Z", "I"): (0, "Z"), ("Z", "X"): (1, "Y"), ("Z", "Y"): (3, "X"), ("Z", "Z"): (0, "I"),
}


@dataclass(frozen=True)
class PauliString:
    """``i**phase`` times a tensor product of Pauli letters (qubit 0 first)."""

    letters: str
    phase: int = 0

    def __post_init__(self):
        if any(c not in LETTERS for c in self.letters):
            raise ValueError(f"bad Pauli letters {self.letters!r}")
        object.__setattr__(self, "phase", self.phase % 4)

    @classmethod
    def single(cls, n: int, qubit: int, letter: str) -> "PauliString":
        return cls("".join(letter if q == qubit else "I" for q in range(n)))

    @property
    def n_qubits(self) -> int:
        return len(self.letters)

    @property
    def sign(self) -> complex:
        return 1j**self.phase

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(q for q, c in enumerate(self.letters) if c != "I")

    def is_diagonal(self) -> bool:
        return all(c in "IZ" for c in self.letters)

    def __mul__(self, other: "PauliString") -> "PauliString":
        ph, out = self.phase + other.phase, []
        for a, b in zip(self.letters, other.letters):
            k, c = _MUL[a, b]
            ph += k
            out.append(c)
        return PauliString("".join(out), ph)

    def matrix(self) -> np.ndarray:
        return self.sign * pauli_matrix(self.letters)

    def __str__(self) -> str:
        return ["+", "+i", "-", "-i"][self.phase] + self.letters


@lru_cache(maxsize=None)
def _pauli_stack(k: int) -> tuple[tuple[str, ...], np.ndarray]:
    labels = pauli_labels(k)
    return labels, np.array([pauli_matrix(l) for l in labels])


def _local_image(u: np.ndarray, letters: str) -> tuple[str, int]:
    """``u^dagger P u`` for a local Pauli, as (letters, phase exponent)."""
    labels, stack = _pauli_stack(len(letters))
    m = u.conj().T @ pauli_matrix(letters) @ u
    coeffs = np.einsum("pij,ji->p", stack, m) / m.shape[0]
    i = int(np.argmax(np.abs(coeffs)))
    for ph in range(4):
        if abs(coeffs[i] - 1j**ph) < 1e-8:
            return labels[i], ph
    raise ValueError("gate is not Clifford")


@dataclass(frozen=True, eq=False)
class CliffordOp:
    """One- or two-qubit Clifford with a precomputed Pauli conjugation table."""

    targets: tuple[int, ...]
    matrix: np.ndarray
    table: dict = field(default=None, repr=False)

    def __post_init__(self):
        if self.table is None:
            object.__setattr__(self, "table", _conjugation_table(_key(self.matrix), len(self.targets)))

    def to_gate(self) -> Gate:
        return Gate(U1 if len(self.targets) == 1 else U2, self.targets, matrix=self.matrix)


def _key(m: np.ndarray) -> bytes:
    m = np.asarray(m, dtype=complex)
    flat = m.ravel()
    ref = flat[np.argmax(np.abs(flat) > 1e-6)]
    c = np.round(m * (abs(ref) / ref), 8) + (0.0 + 0.0j)  # adding zero folds -0.0
    return c.tobytes()


@lru_cache(maxsize=None)
def _conjugation_table(key: bytes, k: int) -> dict:
    u = np.frombuffer(key, dtype=complex).reshape(2**k, 2**k)
    return {"".join(c): _local_image(u, "".join(c)) for c in itertools.product(LETTERS, repeat=k)}


def conjugate_pauli(op: CliffordOp | np.ndarray, p: PauliString, targets=None) -> PauliString:
    """``g^dagger p g`` with exact phase tracking.

    ``op`` may be a ``CliffordOp`` or a bare 2x2/4x4 matrix acting on
    ``targets`` (default: the first qubits).
    """
    if not isinstance(op, CliffordOp):
        m = np.asarray(op, dtype=complex)
        k = int(round(np.log2(m.shape[0])))
        op = CliffordOp(tuple(range(k)) if targets is None else tuple(targets), m)
    local = "".join(p.letters[q] for q in op.targets)
    if local.count("I") == len(local):
        return p
    img, ph = op.table[local]
    letters = list(p.letters)
    for q, c in zip(op.targets, img):
        letters[q] = c
    return PauliString("".join(letters), p.phase + ph)


@dataclass(frozen=True, eq=False)
class CliffordCircuit:
    n_qubits: int
    layers: tuple[tuple[CliffordOp, ...], ...]
    steps: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(tuple(l) for l in self.layers))
        if not self.steps:
            object.__setattr__(self, "steps", (-1,) * len(self.layers))

    def ops(self):
        for layer in self.layers:
            yield from layer

    def count(self, arity: int) -> int:
        return sum(1 for op in self.ops() if len(op.targets) == arity)

    def to_circuit(self) -> Circuit:
        return Circuit(self.n_qubits, [[op.to_gate() for op in l] for l in self.layers], (), self.steps)

    def step_prefix(self, n_steps: int) -> "CliffordCircuit":
        keep = [i for i, s in enumerate(self.steps) if s < n_steps]
        cut = max(keep) + 1 if keep else 0
        return CliffordCircuit(self.n_qubits, self.layers[:cut], self.steps[:cut])

    def then(self, other: "CliffordCircuit") -> "CliffordCircuit":
        return CliffordCircuit(self.n_qubits, self.layers + other.layers, self.steps + other.steps)


def backpropagate(circuit: CliffordCircuit, p: PauliString) -> PauliString:
    for layer in reversed(circuit.layers):
        for op in layer:
            p = conjugate_pauli(op, p)
    return p


def exact_expectation(circuit: CliffordCircuit, p: PauliString) -> int:
    """Noiseless ``<0...0| C^dagger p C |0...0>``, one of -1, 0, +1."""
    q = backpropagate(circuit, p)
    if not q.is_diagonal():
        return 0
    if q.phase % 2:
        raise ValueError("observable is not Hermitian")
    return 1 if q.phase == 0 else -1


def noisy_expectation(circuit: CliffordCircuit, p: PauliString, noise) -> float:
    """Exact expectation under Pauli channels after each op.

    Heisenberg picture: each channel rescales the current string by its PTM
    eigenvalue on the op's targets, then the op conjugates it.
    """
    coeff = 1.0
    for layer in reversed(circuit.layers):
        for op in layer:
            kind = U1 if len(op.targets) == 1 else U2
            coeff *= _pauli_eigenvalue(noise, kind, "".join(p.letters[q] for q in op.targets))
            p = conjugate_pauli(op, p)
    if not p.is_diagonal():
        return 0.0
    return coeff * (1 if p.phase == 0 else -1)


def _pauli_eigenvalue(noise, kind: str, local: str) -> float:
    table = _eigen_tables(noise).get(kind)
    if table is None:
        return 1.0
    idx = 0
    for c in local:
        idx = 4 * idx + LETTERS.index(c)
    return table[idx]


_EIGEN_CACHE: dict[int, dict] = {}


def _eigen_tables(noise) -> dict:
    key = id(noise)
    if key not in _EIGEN_CACHE:
        tables = {}
        for kind, k in ((U1, 1), (U2, 2)):
            if noise.for_gate(kind):
                r = noise.gate_ptm(kind, k)
                if not np.allclose(r, np.diag(np.diag(r)), atol=1e-12):
                    raise ValueError("Pauli propagation needs Pauli (diagonal-PTM) noise")
                tables[kind] = np.diag(r).copy()
        _EIGEN_CACHE[key] = (noise, tables)
    return _EIGEN_CACHE[key][1]


# ---------------------------------------------------------------- groups

@lru_cache(maxsize=None)
def one_qubit_cliffords() -> tuple[np.ndarray, ...]:
    return _enumerate([H, S], 2)


@lru_cache(maxsize=None)
def two_qubit_cliffords() -> tuple[np.ndarray, ...]:
    """The 11520 two-qubit Cliffords modulo global phase, in a fixed order."""
    cnot = np.eye(4, dtype=complex)[[0, 1, 3, 2]]
    i2 = np.eye(2)
    gens = [np.kron(H, i2), np.kron(i2, H), np.kron(S, i2), np.kron(i2, S), cnot]
    return _enumerate(gens, 4)


def _enumerate(gens, dim) -> tuple[np.ndarray, ...]:
    start = np.eye(dim, dtype=complex)
    seen = {_key(start): start}
    frontier = [start]
    while frontier:
        nxt = []
        for m in frontier:
            for g in gens:
                c = g @ m
                k = _key(c)
                if k not in seen:
                    seen[k] = c
                    nxt.append(c)
        frontier = nxt
    return tuple(seen.values())


_TOTAL_Z = np.array([2.0, 0.0, 0.0, -2.0])


@lru_cache(maxsize=None)
def conserving_two_qubit_cliffords() -> tuple[np.ndarray, ...]:
    """Two-qubit Cliffords that commute with ``Z1 + Z2`` (excitation conserving)."""
    return tuple(u for u in two_qubit_cliffords() if np.allclose(u * _TOTAL_Z, _TOTAL_Z[:, None] * u))


@lru_cache(maxsize=None)
def diagonal_one_qubit_cliffords() -> tuple[np.ndarray, ...]:
    return tuple(u for u in one_qubit_cliffords() if abs(u[0, 1]) < 1e-12)


_MAGIC = np.array([[1, 0, 0, 1j], [0, 1j, 1, 0], [0, 1j, -1, 0], [1, 0, 0, -1j]]) / np.sqrt(2)


def makhlin_invariants(u: np.ndarray) -> tuple[complex, float]:
    """Local-equivalence invariants ``(G1, G2)`` of a two-qubit unitary."""
    mb = _MAGIC.conj().T @ u @ _MAGIC
    m = mb.T @ mb
    det = np.linalg.det(u)
    tr = np.trace(m)
    g1 = tr**2 / (16 * det)
    g2 = (tr**2 - np.trace(m @ m)) / (4 * det)
    return complex(g1), float(np.real(g2))


def clifford_class(u: np.ndarray) -> str:
    """One of ``local``, ``cnot``, ``iswap``, ``swap``."""
    g1, g2 = makhlin_invariants(u)
    for name, (a, b) in {"local": (1, 3), "cnot": (0, 1), "iswap": (0, -1), "swap": (-1, -3)}.items():
        if abs(g1 - a) < 1e-6 and abs(g2 - b) < 1e-6:
            return name
    raise ValueError("not a two-qubit Clifford")


CLASS_SIZES = {"local": 576, "cnot": 5184, "iswap": 5184, "swap": 576}


# ---------------------------------------------------------------- cliques

def conflict_graph(strings: Sequence[PauliString]) -> list[set[int]]:
    """Adjacency sets; an edge joins two strings with no clashing letters on any qubit."""
    n = len(strings)
    adj = [set() for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            ok = all(a == "I" or b == "I" or a == b for a, b in zip(strings[i].letters, strings[j].letters))
            if ok:
                adj[i].add(j)
                adj[j].add(i)
    return adj


def _bitsets(adj) -> list[int]:
    return [sum(1 << j for j in nbrs) for nbrs in adj]


def _clique_number(adj_bits: list[int], cand: int) -> int:
    best = 0

    def color_order(p: int):
        order, colors, color = [], [], 0
        uncolored = p
        while uncolored:
            color += 1
            q = uncolored
            while q:
                v = (q & -q).bit_length() - 1
                q &= ~adj_bits[v] & ~(1 << v)
                uncolored &= ~(1 << v)
                order.append(v)
                colors.append(color)
        return order, colors

    def expand(size: int, p: int):
        nonlocal best
        order, colors = color_order(p)
        for i in range(len(order) - 1, -1, -1):
            if size + colors[i] <= best:
                return
            v = order[i]
            newp = p & adj_bits[v]
            if newp:
                expand(size + 1, newp)
            elif size + 1 > best:
                best = size + 1
            p &= ~(1 << v)

    if cand:
        expand(0, cand)
    return best


def max_clique(adj: Sequence[set[int]]) -> list[int]:
    """Exact maximum clique; among maximum cliques, the lexicographically smallest."""
    n = len(adj)
    if n == 0:
        return []
    if n > 64:
        raise ValueError("max_clique supports at most 64 nodes")
    bits = _bitsets(adj)
    target = _clique_number(bits, (1 << n) - 1)
    chosen: list[int] = []
    cand = (1 << n) - 1
    for v in range(n):
        if len(chosen) == target:
            break
        if not (cand >> v) & 1:
            continue
        rest = cand & bits[v] & ~((1 << (v + 1)) - 1)
        if 1 + _clique_number(bits, rest) >= target - len(chosen):
            chosen.append(v)
            cand = rest
    return chosen


# ---------------------------------------------------------------- circuits

def _first_layer_is_local(circuit: CliffordCircuit) -> bool:
    return bool(circuit.layers) and all(len(op.targets) == 1 for op in circuit.layers[0])


def fix_init_layer(
    circuit: CliffordCircuit, observables: Sequence[PauliString]
) -> tuple[CliffordCircuit, list[int]]:
    """Rewrite first-layer gates so a maximum set of observables becomes +/-1.

    Returns the mutated circuit and the indices of observables whose exact
    expectation is nonzero on it.
    """
    if not _first_layer_is_local(circuit):
        raise ValueError("first layer must contain only one-qubit gates")
    rest = CliffordCircuit(circuit.n_qubits, circuit.layers[1:], circuit.steps[1:])
    flowed = [backpropagate(rest, o) for o in observables]
    clique = max_clique(conflict_graph(flowed))
    need: dict[int, str] = {}
    for i in clique:
        for q in flowed[i].support:
            need[q] = flowed[i].letters[q]
    init = {op.targets[0]: op for op in circuit.layers[0]}
    new_init = []
    for q in range(circuit.n_qubits):
        op = init.get(q)
        if q in need:
            if op is None or not _maps_to_z(op, need[q]):
                op = CliffordOp((q,), _local_fixer(need[q]))
        if op is not None:
            new_init.append(op)
    mutated = CliffordCircuit(circuit.n_qubits, (tuple(new_init),) + rest.layers, circuit.steps)
    active = [i for i, o in enumerate(observables) if exact_expectation(mutated, o) != 0]
    return mutated, active


def _maps_to_z(op: CliffordOp, letter: str) -> bool:
    return op.table[letter][0] == "Z"


def _local_fixer(letter: str) -> np.ndarray:
    # first Clifford in enumeration order that maps the letter to Z
    for m in one_qubit_cliffords():
        if _local_image(m, letter)[0] == "Z":
            return m
    raise AssertionError("unreachable")


def random_clifford_brickwork(
    structure: Sequence[dict], n_qubits: int, rng=None, ensemble: str = "uniform"
) -> CliffordCircuit:
    """Clifford circuit mirroring a target's two-qubit placement.

    Layer 0 holds a random one-qubit Clifford on every qubit (any leading
    one-qubit-only layers of the structure are absorbed into it).  With the
    ``uniform`` ensemble every later slot gets a uniform Clifford of its
    size; ``conserving`` restricts later slots to excitation-conserving
    Cliffords, matching targets built from excitation-conserving blocks.
    """
    rng = np.random.default_rng(rng)
    c1 = one_qubit_cliffords()
    if ensemble == "uniform":
        later1, c2 = c1, two_qubit_cliffords()
    elif ensemble == "conserving":
        later1, c2 = diagonal_one_qubit_cliffords(), conserving_two_qubit_cliffords()
    else:
        raise ValueError(f"unknown Clifford ensemble {ensemble!r}")
    layers = [tuple(CliffordOp((q,), c1[rng.integers(len(c1))]) for q in range(n_qubits))]
    steps = [-1]
    started = False
    for entry in structure:
        slots = entry["slots"]
        if not started and all(len(s) == 1 for s in slots):
            continue
        started = True
        layer = []
        for s in slots:
            pool = later1 if len(s) == 1 else c2
            layer.append(CliffordOp(tuple(s), pool[rng.integers(len(pool))]))
        layers.append(tuple(layer))
        steps.append(int(entry.get("step", -1)))
    return CliffordCircuit(n_qubits, tuple(layers), tuple(steps))
