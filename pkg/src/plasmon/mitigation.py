"""Classical shadows, fidelity and purity estimation, Clifford data regression, rescaling."""

from __future__ import annotations

import csv
import io
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .clifford import PauliString
from .paulis import pauli_labels
from .simulator.states import born_probabilities, index_to_bits

BASES = "XYZ"
R_FLOOR = 0.01
R_CEILING = 1.2


@dataclass(frozen=True, eq=False)
class ShadowSet:
    """Snapshots of random single-qubit-basis measurements.

    ``bases[m, q]`` indexes ``"XYZ"``; ``outcomes[m, q]`` is 0 for the +1
    eigenvalue and 1 for -1.
    """

    bases: np.ndarray
    outcomes: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.bases, dtype=np.uint8)
        o = np.asarray(self.outcomes, dtype=np.uint8)
        if b.ndim != 2 or b.shape != o.shape:
            raise ValueError("bases and outcomes must be equal-shape (snapshots, qubits) arrays")
        if b.size and (b.max() > 2 or o.max() > 1):
            raise ValueError("basis codes must be 0..2 and outcomes 0..1")
        object.__setattr__(self, "bases", b)
        object.__setattr__(self, "outcomes", o)

    @property
    def n_qubits(self) -> int:
        return self.bases.shape[1]

    def __len__(self) -> int:
        return self.bases.shape[0]

    @classmethod
    def from_records(cls, records: Iterable[tuple[str, str]]) -> "ShadowSet":
        """From ``(basis letters, bitstring)`` pairs such as ``("XZ", "01")``."""
        recs = list(records)
        if not recs:
            raise ValueError("no snapshots")
        n = len(recs[0][0])
        for b, s in recs:
            if len(b) != n or len(s) != n:
                raise ValueError("basis length, bitstring length and register size must agree")
        bases = [[BASES.index(c) for c in b] for b, _ in recs]
        outs = [[int(c) for c in s] for _, s in recs]
        return cls(np.array(bases), np.array(outs))

    def records(self) -> list[tuple[str, str]]:
        return [
            ("".join(BASES[i] for i in b), "".join(str(int(x)) for x in o))
            for b, o in zip(self.bases, self.outcomes)
        ]

    def local_vectors(self) -> np.ndarray:
        """Per-snapshot, per-qubit shadow coefficients on ``I, X, Y, Z``, shape (M, n, 4)."""
        m, n = self.bases.shape
        v = np.zeros((m, n, 4))
        v[..., 0] = 1.0
        signs = 3.0 * (1 - 2.0 * self.outcomes)
        np.put_along_axis(v, (self.bases + 1)[..., None].astype(np.intp), signs[..., None], axis=2)
        return v

    def pauli_samples(self) -> np.ndarray:
        """Per-snapshot estimates for all ``4**n`` Paulis (label order of ``pauli_labels``)."""
        v = self.local_vectors()
        out = v[:, 0, :]
        for q in range(1, self.n_qubits):
            out = np.einsum("ma,mb->mab", out, v[:, q, :]).reshape(len(self), -1)
        return out


def sample_shadow(state: np.ndarray, n_snapshots: int, seed=None, readout_error: float = 0.0) -> ShadowSet:
    """Draw snapshots from a statevector or density matrix.

    Snapshots sharing a basis setting are sampled together; ``readout_error``
    flips each recorded bit independently.
    """
    if n_snapshots < 1:
        raise ValueError("need at least one snapshot")
    rng = np.random.default_rng(seed)
    dim = state.shape[0]
    n = int(round(np.log2(dim)))
    bases = rng.integers(0, 3, size=(n_snapshots, n))
    outcomes = np.zeros_like(bases)
    codes = bases @ (3 ** np.arange(n)[::-1])
    for code in np.unique(codes):
        rows = np.flatnonzero(codes == code)
        letters = "".join(BASES[i] for i in bases[rows[0]])
        probs = born_probabilities(state, letters)
        idx = rng.choice(len(probs), size=len(rows), p=probs)
        outcomes[rows] = index_to_bits(idx, n)
    if readout_error:
        outcomes ^= (rng.random(outcomes.shape) < readout_error).astype(outcomes.dtype)
    return ShadowSet(bases, outcomes)


def _as_pauli(p) -> PauliString:
    return p if isinstance(p, PauliString) else PauliString(str(p))


def shadow_samples(shadow: ShadowSet, p) -> np.ndarray:
    """Per-snapshot contributions: ``3**w`` times the outcome sign product on a basis match, else 0."""
    p = _as_pauli(p)
    if p.n_qubits != shadow.n_qubits:
        raise ValueError("Pauli and shadow register sizes differ")
    if p.phase % 2:
        raise ValueError("observable is not Hermitian")
    sup = list(p.support)
    if not sup:
        return np.full(len(shadow), float(p.sign.real))
    want = np.array([BASES.index(p.letters[q]) for q in sup])
    match = np.all(shadow.bases[:, sup] == want, axis=1)
    signs = np.prod(1 - 2.0 * shadow.outcomes[:, sup], axis=1)
    return np.where(match, 3.0 ** len(sup) * signs, 0.0) * p.sign.real


def shadow_estimate(shadow: ShadowSet, p) -> tuple[float, float]:
    if len(shadow) < 1:
        raise ValueError("empty shadow set")
    x = shadow_samples(shadow, p)
    m = len(x)
    err = float(np.std(x, ddof=1) / np.sqrt(m)) if m > 1 else float("nan")
    return float(np.mean(x)), err


def _ideal_vector(ideal, n: int) -> np.ndarray:
    labels = pauli_labels(n)
    if isinstance(ideal, Mapping):
        return np.array([float(ideal.get(l, 0.0)) for l in labels])
    vec = np.asarray(ideal, dtype=float)
    if vec.shape != (4**n,):
        raise ValueError(f"ideal expectations must cover all {4**n} Paulis")
    return vec


def _check_small(shadow: ShadowSet) -> None:
    if shadow.n_qubits > 4:
        raise ValueError("estimators over all Paulis support at most 4 qubits")


def dfe_fidelity(shadow: ShadowSet, ideal) -> tuple[float, float]:
    """``F = 2^-N sum_P <P>_exp <P>_ideal`` and the closed-form ``sqrt((5/4)^N / M)``."""
    _check_small(shadow)
    n, m = shadow.n_qubits, len(shadow)
    est = shadow.pauli_samples().mean(axis=0)
    f = float(est @ _ideal_vector(ideal, n)) / 2**n
    return f, float(np.sqrt(1.25**n / m))


def purity_estimate(shadow: ShadowSet) -> tuple[float, float]:
    """``2^-N sum_P <P>^2`` using only products of distinct snapshots; error ``sqrt(4 (5/4)^N / M)``."""
    _check_small(shadow)
    n, m = shadow.n_qubits, len(shadow)
    if m < 2:
        raise ValueError("purity needs at least two snapshots")
    x = shadow.pauli_samples()
    s = x.sum(axis=0)
    sq = (s**2 - (x**2).sum(axis=0)) / (m * (m - 1))
    return float(sq.sum()) / 2**n, float(np.sqrt(4 * 1.25**n / m))


def shifted(v):
    """Maps 1/4 to 0 and 1 to 1."""
    return (4 * np.asarray(v) - 1) / 3 if np.ndim(v) else (4 * v - 1) / 3


# ---------------------------------------------------------------- CDR

@dataclass(frozen=True)
class SuppressionEntry:
    r: float
    stderr: float
    n_pairs: int
    flagged: bool


@dataclass
class SuppressionTable:
    """Fitted suppression factors keyed by ``(qubit, depth, family)``."""

    entries: dict = field(default_factory=dict)

    def __getitem__(self, key) -> SuppressionEntry:
        return self.entries[key]

    def __contains__(self, key) -> bool:
        return key in self.entries

    def keys(self):
        return sorted(self.entries)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["qubit", "depth", "family", "r", "stderr", "n_pairs", "flagged"])
        for k in self.keys():
            e = self.entries[k]
            w.writerow([k[0], k[1], k[2], repr(e.r), repr(e.stderr), e.n_pairs, int(e.flagged)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "SuppressionTable":
        rows = list(csv.DictReader(io.StringIO(text)))
        entries = {
            (int(r["qubit"]), int(r["depth"]), r["family"]): SuppressionEntry(
                float(r["r"]), float(r["stderr"]), int(r["n_pairs"]), bool(int(r["flagged"]))
            )
            for r in rows
        }
        return cls(entries)


def cdr_fit(records: Iterable[tuple[tuple, float, float]], min_pairs: int = 5) -> SuppressionTable:
    """Least-squares slope through the origin of noisy against exact values, per group.

    ``records`` holds ``(group key, noisy value, exact value)`` with exact
    values in {-1, +1}; a group key is normally ``(qubit, depth, family)``.
    """
    groups: dict = defaultdict(list)
    for key, noisy, exact in records:
        if exact not in (-1, 1):
            raise ValueError("exact Clifford values must be -1 or +1")
        groups[key].append((float(noisy), float(exact)))
    entries = {}
    for key, pairs in groups.items():
        if len(pairs) < min_pairs:
            raise ValueError(f"group {key} has {len(pairs)} pairs, need {min_pairs}")
        y, x = np.array(pairs).T
        r = float(x @ y / (x @ x))
        resid = y - r * x
        stderr = float(np.sqrt(resid @ resid / (len(x) - 1) / (x @ x)))
        flagged = not (R_FLOOR <= r <= R_CEILING)
        entries[key] = SuppressionEntry(r, stderr, len(pairs), flagged)
    return SuppressionTable(entries)


@dataclass(frozen=True)
class MitigatedValue:
    value: float
    stderr: float
    flagged: bool = False


def cdr_apply(noisy: float, r: float, noisy_err: float = 0.0, r_err: float = 0.0, floor: float = R_FLOOR) -> MitigatedValue:
    """``noisy / r`` with propagated error; below the floor the raw value comes back flagged."""
    if r < floor:
        return MitigatedValue(float(noisy), float(noisy_err), True)
    err = np.sqrt(noisy_err**2 / r**2 + noisy**2 * r_err**2 / r**4)
    return MitigatedValue(float(noisy / r), float(err))


@dataclass(frozen=True)
class RescaleResult:
    values: np.ndarray
    flagged: bool = False


def magnetization_rescale(z: np.ndarray, target: float, min_total: float = 0.1) -> RescaleResult:
    """Scale every entry by ``target / sum(z)`` so the sum is exactly ``target``."""
    z = np.asarray(z, dtype=float)
    total = z.sum()
    if abs(total) < min_total:
        return RescaleResult(z.copy(), True)
    out = z * (target / total)
    out[-1] = target - out[:-1].sum()
    return RescaleResult(out)
