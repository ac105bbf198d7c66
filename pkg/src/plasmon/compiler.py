"""Approximate two-qubit synthesis into two native FSIM gates, with a compilation cache."""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import least_squares, minimize

from .circuit import FSIM, Circuit, Gate, fsim_matrix, one_qubit
from .paulis import pauli_basis, zyz_unitary

CACHE_FORMAT = "plasmon-expression-cache"
CACHE_VERSION = 1


def process_fidelity(u: np.ndarray, v: np.ndarray) -> float:
    d = u.shape[0]
    return float(abs(np.trace(u.conj().T @ v) / d) ** 2)


def ptm_vector(u: np.ndarray) -> np.ndarray:
    """Raveled two-qubit PTM scaled to unit norm (the PTM of a unitary has norm 4)."""
    basis = pauli_basis(2)
    images = np.einsum("ab,qbc,dc->qad", u, basis, u.conj())
    r = np.real(np.einsum("pda,qad->pq", basis, images)) / 4
    return r.ravel() / 4


def unitary_distance(u: np.ndarray, v: np.ndarray) -> float:
    return float(abs(ptm_vector(u) @ ptm_vector(v) - 1))


@dataclass(frozen=True, eq=False)
class CompilationResult:
    """``(u1 (x) u2) F (u3 (x) u4) F (u5 (x) u6)`` with ``F = FSIM(*native)``."""

    locals: tuple[np.ndarray, ...]
    native: tuple[float, float]
    achieved_fidelity: float
    iterations: int
    target: np.ndarray | None = None

    @property
    def poorly_expressible(self) -> bool:
        return self.achieved_fidelity < 0.5

    def assembled(self, native: tuple[float, float] | None = None) -> np.ndarray:
        return assemble(self.locals, self.native if native is None else native)

    def gates(self, a: int, b: int) -> list[list[Gate]]:
        """Layers of one-qubit and FSIM gates realizing the block on qubits ``(a, b)``."""
        u1, u2, u3, u4, u5, u6 = self.locals
        th, ph = self.native
        return [
            [one_qubit(u5, a), one_qubit(u6, b)],
            [Gate(FSIM, (a, b), (th, ph))],
            [one_qubit(u3, a), one_qubit(u4, b)],
            [Gate(FSIM, (a, b), (th, ph))],
            [one_qubit(u1, a), one_qubit(u2, b)],
        ]

    def to_dict(self) -> dict:
        def enc(m):
            return [[[float(z.real), float(z.imag)] for z in row] for row in m]

        return {
            "locals": [enc(u) for u in self.locals],
            "native": list(self.native),
            "achieved_fidelity": self.achieved_fidelity,
            "iterations": self.iterations,
            "target": None if self.target is None else enc(self.target),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CompilationResult":
        def dec(m):
            return np.array([[complex(*z) for z in row] for row in m])

        return cls(
            tuple(dec(u) for u in d["locals"]),
            tuple(d["native"]),
            float(d["achieved_fidelity"]),
            int(d["iterations"]),
            None if d.get("target") is None else dec(d["target"]),
        )


def assemble(locals_, native) -> np.ndarray:
    u1, u2, u3, u4, u5, u6 = locals_
    f = fsim_matrix(*native)
    return np.kron(u1, u2) @ f @ np.kron(u3, u4) @ f @ np.kron(u5, u6)


def _locals_from_params(x: np.ndarray) -> list[np.ndarray]:
    return [zyz_unitary(*x[3 * i:3 * i + 3]) for i in range(6)]


def _infidelity(x, target, native):
    return 1 - process_fidelity(assemble(_locals_from_params(x), native), target)


def _residual(x, target, native):
    # Frobenius mismatch after removing the global phase; smooth near the optimum.
    v = assemble(_locals_from_params(x[:18]), native)
    diff = v - np.exp(1j * x[18]) * target
    return np.concatenate([diff.real.ravel(), diff.imag.ravel()])


def approx_compile(
    target: np.ndarray,
    native: tuple[float, float] = (np.pi / 2, 0.0),
    restarts: int = 8,
    seed: int = 0,
) -> CompilationResult:
    """Best two-FSIM expression of ``target`` found over seeded random restarts.

    Each restart runs a Levenberg-Marquardt fit of the phase-aligned matrix
    mismatch, then the best candidate is polished on the infidelity itself.
    """
    target = np.asarray(target, dtype=complex)
    native = (float(native[0]), float(native[1]))
    rng = np.random.default_rng(seed)
    best_x, best_inf, iters = None, np.inf, 0
    for _ in range(max(restarts, 1)):
        x0 = np.concatenate([rng.uniform(-np.pi, np.pi, 18), [0.0]])
        v0 = assemble(_locals_from_params(x0[:18]), native)
        x0[18] = np.angle(np.trace(target.conj().T @ v0))
        sol = least_squares(_residual, x0, args=(target, native), method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=4000)
        iters += sol.nfev
        inf = _infidelity(sol.x[:18], target, native)
        if inf < best_inf:
            best_x, best_inf = sol.x[:18], inf
        if best_inf < 1e-14:
            break
    if best_inf > 1e-12:
        pol = minimize(_infidelity, best_x, args=(target, native), method="BFGS", options={"gtol": 1e-12, "maxiter": 2000})
        iters += pol.nit
        if pol.fun < best_inf:
            best_x, best_inf = pol.x, pol.fun
    locs = tuple(_locals_from_params(best_x))
    fid = process_fidelity(assemble(locs, native), target)
    return CompilationResult(locs, native, fid, iters, target)


@dataclass
class ExpressionCache:
    """Linear-scan store keyed by the PTM vectors of target and native gate."""

    threshold: float = 1e-4
    entries: list[dict] = field(default_factory=list)

    def __post_init__(self):
        self._lock = threading.Lock()

    def _key(self, target, native):
        return ptm_vector(target), ptm_vector(fsim_matrix(*native))

    def lookup(self, target: np.ndarray, native) -> tuple[CompilationResult | None, float]:
        """Nearest stored entry by ``d(target) + 2 d(native)``, rescored on the query.

        Returns ``(None, distance)`` on a miss.
        """
        if not self.entries:
            return None, np.inf
        kt, kn = self._key(target, native)
        entries = list(self.entries)
        dists = [abs(kt @ e["kt"] - 1) + 2 * abs(kn @ e["kn"] - 1) for e in entries]
        i = int(np.argmin(dists))
        if dists[i] >= self.threshold:
            return None, float(dists[i])
        stored = entries[i]["result"]
        native = (float(native[0]), float(native[1]))
        fid = process_fidelity(assemble(stored.locals, native), target)
        return CompilationResult(stored.locals, native, fid, 0, np.asarray(target)), float(dists[i])

    def insert(self, result: CompilationResult) -> None:
        if result.target is None:
            raise ValueError("cached results need their target")
        kt, kn = self._key(result.target, result.native)
        with self._lock:
            self.entries.append({"kt": kt, "kn": kn, "result": result})

    def compile(self, target: np.ndarray, native, restarts: int = 8, seed: int = 0) -> CompilationResult:
        """Cache hit if close enough and not worse than the stored fit by more than 1e-6."""
        hit, _ = self.lookup(target, native)
        if hit is not None:
            stored, _ = self._nearest_result(target, native)
            if hit.achieved_fidelity >= stored.achieved_fidelity - 1e-6:
                return hit
        result = approx_compile(target, native, restarts=restarts, seed=seed)
        self.insert(result)
        return result

    def _nearest_result(self, target, native):
        kt, kn = self._key(target, native)
        dists = [abs(kt @ e["kt"] - 1) + 2 * abs(kn @ e["kn"] - 1) for e in self.entries]
        i = int(np.argmin(dists))
        return self.entries[i]["result"], dists[i]

    def save(self, path) -> None:
        data = {
            "format": CACHE_FORMAT,
            "version": CACHE_VERSION,
            "threshold": self.threshold,
            "entries": [e["result"].to_dict() for e in self.entries],
        }
        Path(path).write_text(json.dumps(data))

    @classmethod
    def load(cls, path) -> "ExpressionCache":
        data = json.loads(Path(path).read_text())
        if data.get("format") != CACHE_FORMAT or data.get("version") != CACHE_VERSION:
            raise ValueError("unsupported cache file")
        cache = cls(threshold=float(data["threshold"]))
        for d in data["entries"]:
            cache.insert(CompilationResult.from_dict(d))
        return cache


def compile_circuit(
    circuit: Circuit,
    native: tuple[float, float] = (np.pi / 2, 0.0),
    cache: ExpressionCache | None = None,
    restarts: int = 8,
    seed: int = 0,
) -> Circuit:
    """Replace every two-qubit block by its two-FSIM expression.

    Each logical layer becomes five native layers; one-qubit gates in the
    same logical layer are kept in the first native layer.
    """
    cache = cache if cache is not None else ExpressionCache()
    layers, roles, steps = [], [], []
    for layer, role, step in zip(circuit.layers, circuit.roles, circuit.steps):
        blocks = [g for g in layer if len(g.targets) == 2 and g.kind != FSIM]
        if not blocks:
            layers.append(list(layer)), roles.append(role), steps.append(step)
            continue
        expanded: list[list[Gate]] = [[] for _ in range(5)]
        expanded[0].extend(g for g in layer if g not in blocks)
        for g in blocks:
            res = cache.compile(g.unitary(), native, restarts=restarts, seed=seed)
            for i, native_layer in enumerate(res.gates(*g.targets)):
                expanded[i].extend(native_layer)
        layers.extend(expanded)
        roles.extend([role] * 5), steps.extend([step] * 5)
    return Circuit(circuit.n_qubits, layers, tuple(roles), tuple(steps))

