"""Pauli twirling, the FSIM twirl group and twirl-effectiveness analytics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import logm
from scipy.stats import unitary_group

from .circuit import FSIM, Circuit, fsim_matrix, one_qubit
from .paulis import I2, X, Y, Z, pauli_basis, pauli_labels, rz
from .simulator.ptm import infidelity_decomposition, polar_factors, unitary_ptm


@dataclass(frozen=True, eq=False)
class TwirlPair:
    """Local gates ``L = l0 (x) l1`` before and ``R = r0 (x) r1`` after an FSIM gate.

    Construction checks ``R FSIM L = FSIM`` up to global phase.
    """

    pre: tuple[np.ndarray, np.ndarray]
    post: tuple[np.ndarray, np.ndarray]
    label: str
    theta: float
    phi: float

    def __post_init__(self):
        f = fsim_matrix(self.theta, self.phi)
        m = self.post_matrix @ f @ self.pre_matrix
        phase = m[0, 0] / f[0, 0]
        if abs(abs(phase) - 1) > 1e-12 or not np.allclose(m, phase * f, atol=1e-12, rtol=0):
            raise ValueError(f"twirl pair {self.label} does not preserve FSIM")

    @property
    def pre_matrix(self) -> np.ndarray:
        return np.kron(*self.pre)

    @property
    def post_matrix(self) -> np.ndarray:
        return np.kron(*self.post)


def fsim_twirl_set(theta: float, phi: float, gammas=None) -> list[TwirlPair]:
    """Pairs that leave FSIM(theta, phi) invariant.

    Two continuous families, equal Z phases and their composition with an X
    flip on both qubits, plus the discrete II, ZZ, XX and YY pairs.  Flipping
    both qubits exchanges |00> and |11>, which moves the conditional phase;
    ``RZ(phi)`` on both qubits undoes that.
    """
    gammas = 2 * np.pi * np.arange(8) / 8 if gammas is None else np.asarray(gammas, dtype=float)
    if len(gammas) == 0:
        raise ValueError("need at least one gamma sample")
    fix = rz(phi)
    out = []
    for g in gammas:
        out.append(TwirlPair((rz(g), rz(g)), (rz(-g), rz(-g)), f"Z({g:.4f})", theta, phi))
    for g in gammas:
        pre = X @ rz(g)
        post = fix @ rz(-g) @ X
        out.append(TwirlPair((pre, pre), (post, post), f"XZ({g:.4f})", theta, phi))
    out.append(TwirlPair((I2, I2), (I2, I2), "II", theta, phi))
    out.append(TwirlPair((Z, Z), (Z, Z), "ZZ", theta, phi))
    out.append(TwirlPair((X, X), (fix @ X, fix @ X), "XX", theta, phi))
    out.append(TwirlPair((Y, Y), (fix @ Y, fix @ Y), "YY", theta, phi))
    return out


def _pauli_ptms(n: int) -> np.ndarray:
    return np.array([unitary_ptm(p) for p in pauli_basis(n)])


def pauli_twirl(ptm: np.ndarray) -> np.ndarray:
    r = np.asarray(ptm, dtype=float)
    n = int(round(np.log(r.shape[0]) / np.log(4)))
    ps = _pauli_ptms(n)
    return np.einsum("kab,bc,kdc->ad", ps, r, ps) / len(ps)


def group_twirl(ptm: np.ndarray, pairs: list[TwirlPair]) -> np.ndarray:
    """Average of ``R Lambda R^T`` over the set, for an error channel that follows the gate."""
    if not pairs:
        raise ValueError("empty twirl set")
    r = np.asarray(ptm, dtype=float)
    acc = np.zeros_like(r)
    for p in pairs:
        rp = unitary_ptm(p.post_matrix)
        acc += rp @ r @ rp.T
    return acc / len(pairs)


def random_coherent_errors(count: int, strength: float = np.pi / 24, seed=None) -> list[np.ndarray]:
    """``exp(-i strength G)`` with ``G`` the traceless generator of a Haar-random unitary.

    ``G`` is normalized so its Pauli coefficients form a unit vector, making
    ``strength`` the rotation half-angle of a single-Pauli error.
    """
    rng = np.random.default_rng(seed)
    basis = pauli_basis(2)
    out = []
    for _ in range(count):
        v = unitary_group.rvs(4, random_state=rng)
        w, vecs = np.linalg.eig(v)
        gen = (vecs * -np.angle(w)) @ np.linalg.inv(vecs)
        gen = (gen + gen.conj().T) / 2
        coeffs = np.real(np.einsum("pab,ba->p", basis, gen)) / 4
        coeffs[0] = 0.0
        coeffs /= np.linalg.norm(coeffs)
        g = np.einsum("p,pab->ab", coeffs, basis)
        ew, ev = np.linalg.eigh(g)
        out.append((ev * np.exp(-1j * strength * ew)) @ ev.conj().T)
    return out


def twirl_effectiveness(errors, pairs: list[TwirlPair], method: str = "unitarity") -> float:
    """``1 - mean E_U(after) / mean E_U(before)`` over an ensemble of unitary errors."""
    before, after = [], []
    for e in errors:
        r = unitary_ptm(e) if np.asarray(e).shape == (4, 4) else np.asarray(e)
        before.append(infidelity_decomposition(r, method).coherent)
        after.append(infidelity_decomposition(group_twirl(r, pairs), method).coherent)
    mean_before = float(np.mean(before))
    if mean_before <= 1e-15:
        raise ValueError("ensemble has no coherent infidelity")
    return 1 - float(np.mean(after)) / mean_before


def _generator_basis() -> np.ndarray:
    # G_R[P, Q] = Tr(P (-i [R, Q])) / 4: PTM generator of exp(-i h R) per unit h.
    basis = pauli_basis(2)
    comm = np.einsum("rab,qbc->rqac", basis, basis) - np.einsum("qab,rbc->rqac", basis, basis)
    return np.real(np.einsum("pca,rqac->rpq", basis, -1j * comm)) / 4


@dataclass(frozen=True)
class ResidualGenerators:
    labels: tuple[str, ...]
    mean_magnitude: np.ndarray
    flagged: int

    def as_dict(self) -> dict[str, float]:
        return {l: float(m) for l, m in zip(self.labels, self.mean_magnitude)}


def residual_generator(ptm: np.ndarray) -> tuple[np.ndarray, bool]:
    """Pauli coefficients ``h`` with ``W = PTM(exp(-i sum_R h_R R))`` for the polar factor ``W``.

    The flag is set when ``W`` has eigenphases near pi, where the logarithm
    branch is ambiguous.
    """
    w, _ = polar_factors(ptm)
    phases = np.angle(np.linalg.eigvals(w))
    flagged = bool(np.max(np.abs(phases)) > np.pi - 1e-3)
    log_w = np.real(logm(w))
    gb = _generator_basis()
    a = gb.reshape(16, -1).T
    h = np.linalg.lstsq(a[:, 1:], log_w.ravel(), rcond=None)[0]
    return np.concatenate([[0.0], h]), flagged


def residual_generators(ptms) -> ResidualGenerators:
    mags, flagged = [], 0
    for r in ptms:
        h, f = residual_generator(r)
        mags.append(np.abs(h))
        flagged += int(f)
    return ResidualGenerators(pauli_labels(2), np.mean(mags, axis=0), flagged)


def twirl_circuit(circuit: Circuit, rng=None, pairs_by_gate=None, gammas=None) -> Circuit:
    """Wrap every FSIM gate in an independently drawn twirl pair.

    The one-qubit factors are then merged into neighbouring one-qubit gates
    where possible.  ``pairs_by_gate`` (an iterable of pairs, consumed in gate
    order) overrides random draws.
    """
    rng = np.random.default_rng(rng)
    sets: dict[tuple[float, float], list[TwirlPair]] = {}
    forced = iter(pairs_by_gate) if pairs_by_gate is not None else None
    layers, roles, steps = [], [], []
    for layer, role, step in zip(circuit.layers, circuit.roles, circuit.steps):
        fs = [g for g in layer if g.kind == FSIM]
        if not fs:
            layers.append(list(layer)), roles.append(role), steps.append(step)
            continue
        pre, post = [], []
        for g in fs:
            key = g.params
            if forced is not None:
                pair = next(forced)
            else:
                if key not in sets:
                    sets[key] = fsim_twirl_set(*key, gammas)
                pair = sets[key][rng.integers(len(sets[key]))]
            a, b = g.targets
            pre += [one_qubit(pair.pre[0], a, "twirl"), one_qubit(pair.pre[1], b, "twirl")]
            post += [one_qubit(pair.post[0], a, "twirl"), one_qubit(pair.post[1], b, "twirl")]
        layers += [pre, list(layer), post]
        roles += [role] * 3
        steps += [step] * 3
    return merge_one_qubit_gates(Circuit(circuit.n_qubits, layers, tuple(roles), tuple(steps)))


def merge_one_qubit_gates(circuit: Circuit) -> Circuit:
    """Fuse each one-qubit gate into a one-qubit gate on the same qubit in the previous layer."""
    layers = [list(l) for l in circuit.layers]
    for i in range(1, len(layers)):
        prev = {q: g for g in layers[i - 1] for q in g.targets}
        keep = []
        for g in layers[i]:
            q = g.targets[0]
            p = prev.get(q)
            if len(g.targets) == 1 and p is not None and len(p.targets) == 1:
                fused = one_qubit(g.unitary() @ p.unitary(), q, p.label or g.label)
                layers[i - 1][layers[i - 1].index(p)] = fused
                prev[q] = fused
            else:
                keep.append(g)
        layers[i] = keep
    kept = [i for i, l in enumerate(layers) if l]
    return Circuit(
        circuit.n_qubits,
        [layers[i] for i in kept],
        tuple(circuit.roles[i] for i in kept),
        tuple(circuit.steps[i] for i in kept),
    )
