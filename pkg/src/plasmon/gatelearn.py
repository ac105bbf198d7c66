"""Learning the native two-qubit gate from device data.

Coarse step: process tomography, projection onto physical channels and a fit
to the FSIM family.  Fine step: benchmarking sequences estimated with
classical shadows, whose fidelity against candidate angles is maximized.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import curve_fit, minimize
from scipy.stats import unitary_group

from .circuit import FSIM, Circuit, Gate, fsim_matrix, one_qubit
from .mitigation import ShadowSet, purity_estimate, shifted
from .paulis import H, S, pauli_labels
from .simulator.ptm import choi_to_ptm, ptm_to_choi, unitary_ptm
from .simulator.states import pauli_expectation

# Single-qubit preparations: eigenstates of Z, X and Y.
_PREP = {
    "+Z": np.eye(2, dtype=complex),
    "-Z": np.array([[0, 1], [1, 0]], dtype=complex),
    "+X": H,
    "-X": H @ np.array([[0, 1], [1, 0]], dtype=complex),
    "+Y": S @ H,
    "-Y": S @ H @ np.array([[0, 1], [1, 0]], dtype=complex),
}
_PREP_VECTORS = {
    "+Z": (1, 0, 0, 1), "-Z": (1, 0, 0, -1),
    "+X": (1, 1, 0, 0), "-X": (1, -1, 0, 0),
    "+Y": (1, 0, 1, 0), "-Y": (1, 0, -1, 0),
}


def _wrap(a: float) -> float:
    """Angle in (-pi, pi]."""
    return float(np.pi - (np.pi - a) % (2 * np.pi))


# ---------------------------------------------------------------- device access

def _register(pair) -> int:
    a, b = pair
    if a == b or min(pair) < 0:
        raise ValueError("pair needs two distinct non-negative qubits")
    return max(pair) + 1


def _expectations(backend, circuit: Circuit, pair, bases: str, shots, seed) -> dict[str, float]:
    """Pauli expectations on ``pair`` (all letters drawn from ``bases`` or I)."""
    n = circuit.n_qubits
    full = ["Z"] * n
    full[pair[0]], full[pair[1]] = bases[0], bases[1]
    full = "".join(full)
    if shots is None:
        probs = backend.probabilities(circuit, full)
        bits = np.array([[(i >> (n - 1 - q)) & 1 for q in range(n)] for i in range(2**n)])
        weights = probs
    else:
        bits = backend.run(circuit, full, shots, seed)
        weights = np.full(len(bits), 1.0 / len(bits))
    sa = 1 - 2.0 * bits[:, pair[0]]
    sb = 1 - 2.0 * bits[:, pair[1]]
    return {
        bases[0] + "I": float(weights @ sa),
        "I" + bases[1]: float(weights @ sb),
        bases: float(weights @ (sa * sb)),
    }


def _probe(gate_layers, n, prep_gates) -> Circuit:
    layers = [prep_gates] + [list(l) for l in gate_layers]
    return Circuit(n, layers)


# ---------------------------------------------------------------- tomography

@dataclass(frozen=True, eq=False)
class TomographyResult:
    superoperator: np.ndarray
    raw: np.ndarray
    cptp_projection_residual: float
    fitted: tuple[float, float]
    fit_fidelity: float

    def to_dict(self) -> dict:
        return {
            "ptm": self.superoperator.tolist(),
            "raw_ptm": self.raw.tolist(),
            "cptp_projection_residual": self.cptp_projection_residual,
            "fitted": list(self.fitted),
            "fit_fidelity": self.fit_fidelity,
        }


def linear_inversion(inputs: np.ndarray, outputs: np.ndarray, max_condition: float = 1e6) -> np.ndarray:
    """PTM ``R`` with ``outputs = R @ inputs`` (Pauli-expectation vectors as columns)."""
    cond = np.linalg.cond(inputs)
    if cond > max_condition:
        raise ValueError(f"tomography inversion is ill-conditioned (condition number {cond:.3g})")
    return outputs @ np.linalg.pinv(inputs)


def project_cptp(r: np.ndarray, max_iter: int = 1000, tol: float = 1e-9) -> tuple[np.ndarray, float]:
    """Alternate projections onto positive Choi matrices and the trace-preserving hyperplane.

    Returns the projected PTM and the Frobenius distance moved.
    """
    r0 = np.asarray(r, dtype=float)
    x = r0.copy()
    for _ in range(max_iter):
        x = _project_tp(x)
        choi = ptm_to_choi(x)
        choi = (choi + choi.conj().T) / 2
        w, v = np.linalg.eigh(choi)
        if w.min() >= -tol:
            break
        x = choi_to_ptm((v * np.clip(w, 0, None)) @ v.conj().T)
    x = _project_tp(x)
    return x, float(np.linalg.norm(x - r0))


def _project_tp(r: np.ndarray) -> np.ndarray:
    out = r.copy()
    out[0] = 0.0
    out[0, 0] = 1.0
    return out


def is_cptp(r: np.ndarray, tol: float = 1e-9) -> bool:
    choi = ptm_to_choi(r)
    psd = np.linalg.eigvalsh((choi + choi.conj().T) / 2).min() >= -tol
    tp = np.allclose(r[0], np.eye(len(r))[0], atol=tol)
    return bool(psd and tp)


def fsim_fidelity(r: np.ndarray, theta: float, phi: float) -> float:
    """Process fidelity of a channel PTM against FSIM(theta, phi)."""
    ru = unitary_ptm(fsim_matrix(theta, phi))
    return float(np.sum(ru * r) / len(r))


def fit_fsim(r: np.ndarray, grid: int = 48) -> tuple[float, float, float]:
    """Best FSIM angles for a PTM: dense grid seed, then a local refinement."""
    r = np.asarray(r, dtype=float)
    angles = 2 * np.pi * np.arange(grid) / grid
    best = max(((fsim_fidelity(r, t, p), t, p) for t in angles for p in angles))
    res = minimize(lambda x: -fsim_fidelity(r, *x), best[1:], method="Nelder-Mead",
                   options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 4000})
    theta, phi = _wrap(res.x[0]), _wrap(res.x[1])
    return theta, phi, fsim_fidelity(r, theta, phi)


def process_tomography(
    backend, pair=(0, 1), native=(np.pi / 2, np.pi / 12), shots: int | None = None, seed=None
) -> TomographyResult:
    """Tomography of the gate the device runs when asked for ``FSIM(*native)`` on ``pair``.

    36 product preparations and 9 measurement settings; ``shots=None`` uses
    exact outcome probabilities when the backend offers them.
    """
    n = _register(pair)
    rng = np.random.default_rng(seed)
    gate = [[Gate(FSIM, tuple(pair), tuple(float(x) for x in native))]]
    labels = pauli_labels(2)
    inputs, outputs = [], []
    for pa in _PREP:
        for pb in _PREP:
            prep = [one_qubit(_PREP[pa], pair[0], pa), one_qubit(_PREP[pb], pair[1], pb)]
            circ = _probe(gate, n, prep)
            acc = {"II": [1.0]}
            for ba in "XYZ":
                for bb in "XYZ":
                    s = None if shots is None else int(rng.integers(2**32))
                    for k, v in _expectations(backend, circ, pair, ba + bb, shots, s).items():
                        acc.setdefault(k, []).append(v)
            outputs.append([np.mean(acc[l]) for l in labels])
            va, vb = _PREP_VECTORS[pa], _PREP_VECTORS[pb]
            inputs.append(np.kron(va, vb))
    raw = linear_inversion(np.array(inputs, dtype=float).T, np.array(outputs).T)
    proj, resid = project_cptp(raw)
    theta, phi, fid = fit_fsim(proj)
    return TomographyResult(proj, raw, resid, (theta, phi), fid)


# ---------------------------------------------------------------- benchmarking

@dataclass(frozen=True, eq=False)
class DecayCurve:
    lengths: tuple[int, ...]
    shifted_fidelity: np.ndarray
    fidelity_err: np.ndarray
    shifted_purity: np.ndarray
    purity_err: np.ndarray
    f: float
    f_err: float
    f_purity: float
    gap: np.ndarray = field(default=None)

    def to_dict(self) -> dict:
        return {
            "lengths": list(self.lengths),
            "shifted_fidelity": self.shifted_fidelity.tolist(),
            "fidelity_err": self.fidelity_err.tolist(),
            "shifted_purity": self.shifted_purity.tolist(),
            "purity_err": self.purity_err.tolist(),
            "unitarity": self.f,
            "unitarity_err": self.f_err,
            "unitarity_from_purity": self.f_purity,
            "coherent_gap": self.gap.tolist(),
        }


class DecayFitError(RuntimeError):
    def __init__(self, message: str, curve: dict):
        super().__init__(message)
        self.curve = curve


@dataclass(frozen=True, eq=False)
class BenchmarkSequence:
    """Random one-qubit layers interleaved with the native gate; ``locals_[i]`` precedes gate ``i``."""

    locals_: tuple[tuple[np.ndarray, np.ndarray], ...]

    @property
    def length(self) -> int:
        return len(self.locals_)

    def circuit(self, pair, native, n: int) -> Circuit:
        layers = []
        for ua, ub in self.locals_:
            layers.append([one_qubit(ua, pair[0]), one_qubit(ub, pair[1])])
            layers.append([Gate(FSIM, tuple(pair), tuple(float(x) for x in native))])
        return Circuit(n, layers)

    def ideal_state(self, theta: float, phi: float) -> np.ndarray:
        psi = np.zeros(4, dtype=complex)
        psi[0] = 1
        f = fsim_matrix(theta, phi)
        for ua, ub in self.locals_:
            psi = f @ (np.kron(ua, ub) @ psi)
        return psi


def random_sequence(length: int, rng) -> BenchmarkSequence:
    rng = np.random.default_rng(rng)
    return BenchmarkSequence(tuple(
        (unitary_group.rvs(2, random_state=rng), unitary_group.rvs(2, random_state=rng))
        for _ in range(length)
    ))


def _ideal_paulis(psi: np.ndarray) -> np.ndarray:
    return np.array([pauli_expectation(psi, l) for l in pauli_labels(2)])


@dataclass(frozen=True, eq=False)
class SequenceData:
    """Measured data for one sequence: a shadow, or exact Pauli expectations."""

    sequence: BenchmarkSequence
    shadow: ShadowSet | None
    exact: np.ndarray | None

    def pauli_estimates(self) -> np.ndarray:
        if self.exact is not None:
            return self.exact
        return self.shadow.pauli_samples().mean(axis=0)

    def fidelity(self, ideal: np.ndarray) -> float:
        return float(self.pauli_estimates() @ ideal) / 4

    def purity(self) -> float:
        if self.exact is not None:
            return float(self.exact @ self.exact) / 4
        return purity_estimate(self.shadow)[0]


def measure_sequence(backend, sequence: BenchmarkSequence, pair, native, shots: int | None, seed=None) -> SequenceData:
    """Run one sequence; with shots, ``shots`` snapshots in uniformly random bases."""
    n = _register(pair)
    circ = sequence.circuit(pair, native, n)
    if shots is None:
        acc = {"II": [1.0]}
        for ba in "XYZ":
            for bb in "XYZ":
                for k, v in _expectations(backend, circ, pair, ba + bb, None, None).items():
                    acc.setdefault(k, []).append(v)
        return SequenceData(sequence, None, np.array([np.mean(acc[l]) for l in pauli_labels(2)]))
    rng = np.random.default_rng(seed)
    settings = rng.integers(0, 9, size=shots)
    bases_out, bits_out = [], []
    for code in range(9):
        count = int(np.sum(settings == code))
        if not count:
            continue
        pb = "XYZ"[code // 3] + "XYZ"[code % 3]
        full = ["Z"] * n
        full[pair[0]], full[pair[1]] = pb[0], pb[1]
        bits = backend.run(circ, "".join(full), count, int(rng.integers(2**32)))
        bits_out.append(bits[:, list(pair)])
        bases_out.append(np.tile([code // 3, code % 3], (count, 1)))
    return SequenceData(sequence, ShadowSet(np.vstack(bases_out), np.vstack(bits_out)), None)


def collect_sequences(
    backend, pair, native, lengths, n_sequences: int, shots: int | None, seed=None, threads: int = 1
) -> dict[int, list[SequenceData]]:
    ss = np.random.SeedSequence(seed)
    tasks = []
    for length in lengths:
        for child in ss.spawn(n_sequences):
            tasks.append((length, child))

    def work(task):
        length, child = task
        rng = np.random.default_rng(child)
        seq = random_sequence(length, rng)
        return length, measure_sequence(backend, seq, pair, native, shots, int(rng.integers(2**32)))

    threads = threads if getattr(backend, "concurrent_safe", False) else 1
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            results = list(pool.map(work, tasks))
    else:
        results = [work(t) for t in tasks]
    out: dict[int, list[SequenceData]] = {int(l): [] for l in lengths}
    for length, data in results:
        out[int(length)].append(data)
    return out


def _fit_power(lengths, values, errs, power: int) -> tuple[float, float]:
    lengths = np.asarray(lengths, dtype=float)
    sigma = np.maximum(np.asarray(errs, dtype=float), 1e-6)
    try:
        popt, pcov = curve_fit(lambda n, f: f ** (power * n), lengths, values, p0=[0.98],
                               sigma=sigma, bounds=(1e-6, 1.0))
    except (RuntimeError, ValueError) as exc:
        raise DecayFitError(f"decay fit failed: {exc}", {"lengths": lengths.tolist(), "values": list(values)})
    return float(popt[0]), float(np.sqrt(pcov[0, 0]))


def decay_curve(data: dict[int, list[SequenceData]], native) -> DecayCurve:
    lengths = sorted(data)
    fid, fid_err, pur, pur_err = [], [], [], []
    for length in lengths:
        fs, ps = [], []
        for d in data[length]:
            ideal = _ideal_paulis(d.sequence.ideal_state(*native))
            fs.append(shifted(d.fidelity(ideal)))
            ps.append(shifted(d.purity()))
        k = len(fs)
        fid.append(np.mean(fs))
        pur.append(np.mean(ps))
        fid_err.append(np.std(fs, ddof=1) / np.sqrt(k) if k > 1 else 0.0)
        pur_err.append(np.std(ps, ddof=1) / np.sqrt(k) if k > 1 else 0.0)
    fid, pur = np.array(fid), np.array(pur)
    f, f_err = _fit_power(lengths, fid, fid_err, 1)
    f_p, _ = _fit_power(lengths, pur, pur_err, 2)
    gap = np.sqrt(np.clip(pur, 0, None)) - fid
    return DecayCurve(tuple(lengths), fid, np.array(fid_err), pur, np.array(pur_err), f, f_err, f_p, gap)


def shadow_benchmark(
    backend,
    pair=(0, 1),
    lengths=(1, 2, 4, 8, 12),
    n_sequences: int = 30,
    shots: int | None = 1000,
    native=(np.pi / 2, np.pi / 12),
    seed=None,
    threads: int = 1,
) -> DecayCurve:
    """Shifted fidelity and purity versus sequence length, fitted to ``f**n`` and ``f**(2n)``."""
    lengths = [int(l) for l in lengths]
    if lengths != sorted(lengths) or not lengths or lengths[0] < 1:
        raise ValueError("lengths must be positive and ascending")
    if n_sequences < 1:
        raise ValueError("need at least one sequence per length")
    data = collect_sequences(backend, pair, native, lengths, n_sequences, shots, seed, threads)
    return decay_curve(data, native)


def _mean_fidelity(angles, data: dict[int, list[SequenceData]]) -> float:
    total, count = 0.0, 0
    for items in data.values():
        for d in items:
            total += d.fidelity(_ideal_paulis(d.sequence.ideal_state(*angles)))
            count += 1
    return total / count


@dataclass(frozen=True)
class LearnedGate:
    theta: float
    phi: float
    tomography: tuple[float, float]
    mean_fidelity: float

    def to_dict(self) -> dict:
        return {"theta": self.theta, "phi": self.phi, "tomography": list(self.tomography),
                "mean_fidelity": self.mean_fidelity}


def learn_gate(
    backend,
    pair=(0, 1),
    native=(np.pi / 2, np.pi / 12),
    lengths=(8, 16, 32),
    n_sequences: int = 20,
    shots: int | None = 2000,
    tomography_shots: int | None = None,
    seed=None,
    threads: int = 1,
) -> LearnedGate:
    """Tomography seed, then angles maximizing benchmark-sequence fidelity on fixed data."""
    ss = np.random.SeedSequence(seed)
    s_tomo, s_seq = (int(c.generate_state(1)[0]) for c in ss.spawn(2))
    tomo = process_tomography(backend, pair, native, tomography_shots, s_tomo)
    data = collect_sequences(backend, pair, native, lengths, n_sequences, shots, s_seq, threads)
    start = np.array(tomo.fitted)
    res = minimize(lambda x: -_mean_fidelity(x, data), start, method="Nelder-Mead",
                   options={"xatol": 1e-7, "fatol": 1e-12, "maxiter": 2000})
    return LearnedGate(_wrap(res.x[0]), _wrap(res.x[1]), tomo.fitted, -float(res.fun))
