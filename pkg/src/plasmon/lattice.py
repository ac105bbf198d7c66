"""Spin-chain model of plasma waves restricted to one excitation.

Sites are 1-indexed in formulas and 0-indexed in arrays: array position ``i``
is site ``j = i + 1``, so the staggered gap enters as ``Delta_j * (-1)**j``.

Sign convention: the single-excitation Hamiltonian has ``H1[j, j+1] = -iJ/2``
and ``H1[j, j] = Delta_j (-1)**j``.  With it a broad packet with zero relative
phase between neighbouring sites moves towards larger ``j`` with group
velocity ``J a``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh

_BOUNDARIES = ("open", "periodic")


@dataclass(frozen=True)
class LatticeSpec:
    n_sites: int
    coupling: float = 1.0
    gap_profile: tuple[float, ...] | None = None
    spacing: float = 1.0
    boundary: str = "open"

    def __post_init__(self):
        if int(self.n_sites) != self.n_sites or self.n_sites < 2:
            raise ValueError(f"n_sites must be an integer >= 2, got {self.n_sites}")
        if self.boundary not in _BOUNDARIES:
            raise ValueError(f"boundary must be one of {_BOUNDARIES}")
        if not (np.isfinite(self.coupling) and self.coupling > 0):
            raise ValueError("coupling must be finite and positive")
        if not (np.isfinite(self.spacing) and self.spacing > 0):
            raise ValueError("spacing must be finite and positive")
        gaps = (0.0,) * self.n_sites if self.gap_profile is None else tuple(
            float(g) for g in self.gap_profile
        )
        if len(gaps) != self.n_sites:
            raise ValueError("gap_profile length must equal n_sites")
        if not all(np.isfinite(g) and g >= 0 for g in gaps):
            raise ValueError("gap_profile entries must be finite and >= 0")
        object.__setattr__(self, "gap_profile", gaps)

    @property
    def gaps(self) -> np.ndarray:
        return np.asarray(self.gap_profile, dtype=float)

    @property
    def is_uniform(self) -> bool:
        g = self.gaps
        return bool(np.all(g == g[0]))

    @classmethod
    def uniform(cls, n_sites: int, gap: float = 0.0, **kw) -> "LatticeSpec":
        return cls(n_sites, gap_profile=(gap,) * n_sites, **kw)

    @classmethod
    def sharp_jump(cls, n_sites: int, gap_max: float, position: int, **kw) -> "LatticeSpec":
        """Vacuum on sites ``j < position`` and gap ``gap_max`` from site ``position`` on."""
        if not 1 <= position <= n_sites:
            raise ValueError("jump position outside the lattice")
        gaps = tuple(gap_max if j >= position else 0.0 for j in range(1, n_sites + 1))
        return cls(n_sites, gap_profile=gaps, **kw)

    @classmethod
    def gaussian(cls, n_sites: int, gap_max: float, center: float, width: float, **kw) -> "LatticeSpec":
        if width <= 0:
            raise ValueError("width must be positive")
        if not 1 <= center <= n_sites:
            raise ValueError("gaussian center outside the lattice")
        j = np.arange(1, n_sites + 1)
        gaps = gap_max * np.exp(-((j - center) ** 2) / (2 * width**2))
        return cls(n_sites, gap_profile=tuple(gaps), **kw)


def dispersion(ka: float, J: float = 1.0, delta: float = 0.0) -> tuple[float, float]:
    """Upper and lower band energies at wavevector ``ka``."""
    if not all(np.isfinite(v) for v in (ka, J, delta)):
        raise ValueError("dispersion inputs must be finite")
    if J <= 0 or delta < 0:
        raise ValueError("need J > 0 and delta >= 0")
    w = float(np.sqrt(delta**2 + (J * np.sin(ka)) ** 2))
    return w, -w


def allowed_wavevectors(n: int, boundary: str = "open") -> np.ndarray:
    """Quantized ``ka`` values (one per +/- pair for open chains)."""
    if n < 2:
        raise ValueError("need n >= 2")
    if boundary == "open":
        if n % 2:
            return np.arange((n - 1) // 2 + 1) * np.pi / (n + 1)
        return (np.arange(n // 2) + 0.5) * np.pi / (n + 1)
    if boundary == "periodic":
        return 2 * np.pi * np.arange(n) / n
    raise ValueError(f"unknown boundary {boundary!r}")


def single_excitation_hamiltonian(spec: LatticeSpec) -> np.ndarray:
    n, J = spec.n_sites, spec.coupling
    h = np.zeros((n, n), dtype=complex)
    for i in range(n - 1):
        h[i, i + 1] = -0.5j * J
        h[i + 1, i] = 0.5j * J
    if spec.boundary == "periodic":
        h[n - 1, 0] += -0.5j * J
        h[0, n - 1] += 0.5j * J
    signs = (-1.0) ** np.arange(1, n + 1)
    h[np.diag_indices(n)] = spec.gaps * signs
    return h


@dataclass(frozen=True)
class EigenmodeBasis:
    wavevectors: np.ndarray
    frequencies: np.ndarray
    amplitudes: np.ndarray
    closed_form: bool = False

    @property
    def n_modes(self) -> int:
        return len(self.frequencies)

    def distinct_frequencies(self, tol: float = 1e-9) -> np.ndarray:
        out: list[float] = []
        for w in np.sort(self.frequencies):
            if not out or abs(w - out[-1]) > tol:
                out.append(float(w))
        return np.array(out)

    def to_dict(self) -> dict:
        modes = []
        for q in range(self.n_modes):
            ka = float(self.wavevectors[q])
            modes.append({
                "ka": None if np.isnan(ka) else ka,
                "omega": float(self.frequencies[q]),
                "amplitude": [[float(c.real), float(c.imag)] for c in self.amplitudes[:, q]],
            })
        return {"version": 1, "closed_form": self.closed_form, "modes": modes}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "EigenmodeBasis":
        modes = data["modes"]
        ka = np.array([np.nan if m["ka"] is None else m["ka"] for m in modes])
        w = np.array([m["omega"] for m in modes])
        amp = np.array([[complex(*c) for c in m["amplitude"]] for m in modes]).T
        return cls(ka, w, amp, bool(data.get("closed_form", False)))


def _mode_order(freqs: np.ndarray) -> np.ndarray:
    return np.lexsort((freqs, np.round(np.abs(freqs), 12)))


def _closed_form_modes(spec: LatticeSpec) -> EigenmodeBasis:
    n, J, gap = spec.n_sites, spec.coupling, float(spec.gaps[0])
    j = np.arange(1, n + 1)
    odd = j % 2 == 1
    norm = np.sqrt(2.0 / (n + 1))
    kas, ws, cols = [], [], []
    for ka in allowed_wavevectors(n, "open"):
        w0 = dispersion(ka, J, gap)[0]
        if w0 < 1e-14:
            c = np.where(odd, 1.0, 0.0).astype(complex)
            kas.append(ka), ws.append(0.0), cols.append(c / np.linalg.norm(c))
            continue
        for energy in (w0, -w0):
            # The standing-wave formula is written for the opposite-sign
            # Hamiltonian, so mode energy E pairs with the formula at -E.
            om = -energy
            c = np.empty(n, dtype=complex)
            c[odd] = norm * np.sqrt(max((om + gap) / om, 0.0)) * np.cos(j[odd] * ka)
            c[~odd] = -1j * np.sign(om) * norm * np.sqrt(max((om - gap) / om, 0.0)) * np.sin(j[~odd] * ka)
            nrm = np.linalg.norm(c)
            if nrm < 1e-12:
                continue
            kas.append(ka), ws.append(energy), cols.append(c / nrm)
    kas, ws = np.array(kas), np.array(ws)
    amps = np.array(cols).T
    order = _mode_order(ws)
    return EigenmodeBasis(kas[order], ws[order], amps[:, order], closed_form=True)


def eigenmodes(spec: LatticeSpec) -> EigenmodeBasis:
    """Single-excitation eigenmodes.

    Uniform gaps on an open chain use the standing-wave closed form; any other
    profile or boundary goes through dense diagonalization, in which case
    ``wavevectors`` holds NaN.
    """
    if spec.boundary == "open" and spec.is_uniform:
        return _closed_form_modes(spec)
    w, v = eigh(single_excitation_hamiltonian(spec))
    order = _mode_order(w)
    return EigenmodeBasis(np.full(len(w), np.nan), w[order], v[:, order])


def evolve_amplitudes(h1: np.ndarray, b0: np.ndarray, t) -> np.ndarray:
    """``exp(-i h1 t) b0``; a 1-D array of times returns one row per time."""
    w, v = eigh(h1)
    coeff = v.conj().T @ np.asarray(b0, dtype=complex)
    ts = np.asarray(t, dtype=float)
    phases = np.exp(-1j * np.multiply.outer(ts, w))
    return (phases * coeff) @ v.T


@dataclass(frozen=True)
class ReflectionResult:
    r: complex
    k_out: complex
    transmitted: bool
    t: complex = 0j

    @property
    def evanescent(self) -> bool:
        return not self.transmitted

    @property
    def reflectance(self) -> float:
        return float(abs(self.r) ** 2)


def _bulk_amplitudes(s: complex, energy: float, gap: float, J: float) -> np.ndarray:
    # (odd, even) sublattice amplitudes of a plane wave with sin(ka) = s,
    # with the gap carried by even sites.
    return np.array([J * s, energy + gap], dtype=complex)


def reflection_coefficient(k_in: float, delta: float, J: float = 1.0, spacing: float = 1.0) -> ReflectionResult:
    """Reflection of a vacuum plane wave from a uniform gapped half-chain.

    The vacuum occupies sites ``j < 0`` and the gapped medium ``j >= 0``.  The
    amplitudes ``(r, t)`` solve the equations of motion at the two sites
    next to the interface.
    """
    ka = k_in * spacing
    if not 0 < ka <= np.pi / 2 + 1e-12:
        raise ValueError("need 0 < k_in a <= pi/2")
    if delta < 0 or J <= 0:
        raise ValueError("need delta >= 0 and J > 0")
    energy = J * np.sin(ka)
    a_in = _bulk_amplitudes(np.sin(ka), energy, 0.0, J)
    a_ref = _bulk_amplitudes(-np.sin(ka), energy, 0.0, J)
    a_in, a_ref = a_in / a_in[0], a_ref / a_ref[0]
    transmitted = abs(np.sin(ka)) >= delta / J
    if transmitted:
        s_out = np.sqrt(max(energy**2 - delta**2, 0.0)) / J
        k_out = complex(np.arcsin(s_out))
    else:
        sig = np.sqrt(delta**2 - energy**2) / J
        k_out = 1j * np.arcsinh(sig)
        s_out = 1j * sig
    a_out = _bulk_amplitudes(s_out, energy, delta, J)

    def slot(j):
        return 0 if j % 2 else 1

    def cin(j):
        return a_in[slot(j)] * np.exp(1j * ka * j)

    def cref(j):
        return a_ref[slot(j)] * np.exp(-1j * ka * j)

    def cout(j):
        return a_out[slot(j)] * np.exp(1j * k_out * j)

    half = 0.5j * J
    a = np.array([
        [-half * cref(-1), energy * cout(0) + half * cout(1) - delta * cout(0)],
        [energy * cref(-1) - half * cref(-2), half * cout(0)],
    ])
    b = np.array([half * cin(-1), -energy * cin(-1) + half * cin(-2)])
    r, t = np.linalg.solve(a, b)
    if not transmitted:
        r = r / abs(r)
    return ReflectionResult(complex(r), complex(k_out), bool(transmitted), complex(t))


def reflection_coefficient_closed_form(k_in: float, delta: float, J: float = 1.0, symmetric: bool = True) -> complex:
    """Closed-form reflection amplitude, used as a cross-check.

    ``symmetric=True`` uses the transmitted phase in both numerator and
    denominator; ``False`` keeps the incident phase in the denominator.
    """
    d = delta / J
    s = np.sin(k_in)
    k_out = np.arcsin(np.sqrt(complex(s**2 - d**2)))
    sp, sm = np.sqrt(complex(s + d)), np.sqrt(complex(s - d))
    num = (np.exp(1j * k_in) - 2j * d) * sp - np.exp(1j * k_out) * sm
    den_phase = np.exp(1j * k_out) if symmetric else np.exp(1j * k_in)
    den = (np.exp(-1j * k_in) + 2j * d) * sp + den_phase * sm
    return complex(num / den)


def wavepacket_reflectance(
    k: float,
    delta: float,
    n_sites: int = 100,
    interface: int | None = None,
    width: float = 8.0,
    start: float | None = None,
    J: float = 1.0,
) -> float:
    """Fraction of a Gaussian packet found in the vacuum after hitting a gap step.

    The gap fills sites ``j >= interface`` (1-indexed, ``interface`` even so
    that the first gapped site carries ``+delta``).  The packet starts at
    ``start`` and is read out once its centre would have travelled to the
    interface and back.
    """
    interface = n_sites // 2 if interface is None else interface
    start = 0.22 * n_sites if start is None else start
    if interface % 2:
        raise ValueError("interface must be an even site")
    spec = LatticeSpec.sharp_jump(n_sites, delta, interface, coupling=J)
    j = np.arange(1, n_sites + 1)
    b0 = np.exp(-((j - start) ** 2) / (4 * width**2) + 1j * k * j)
    b0 /= np.linalg.norm(b0)
    velocity = J * np.cos(k)
    if velocity <= 1e-3:
        raise ValueError("group velocity too small for a scattering run")
    t = 2 * (interface - start) / velocity
    bt = evolve_amplitudes(single_excitation_hamiltonian(spec), b0, t)
    return float(np.sum(np.abs(bt[: interface - 1]) ** 2))


@dataclass(frozen=True)
class SpectralLine:
    omega: float
    amplitude: float
    reliable: bool
    mode: int


def creation_series(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """``<a_j^dagger> = (<X_j> - i <Y_j>) / 2`` with ``|1>`` the excitation."""
    return (np.asarray(x) - 1j * np.asarray(y)) / 2


def extract_spectrum(
    series: np.ndarray,
    basis: EigenmodeBasis,
    dt: float,
    threshold: float = 0.01,
    guard_frequencies: np.ndarray | None = None,
) -> list[SpectralLine]:
    """Fit one frequency per mode from the phase of the projected series.

    ``series`` has shape ``(n_times, n_sites)`` and holds ``<a_j^dagger>`` at
    times ``0, dt, 2 dt, ...``.  The projection on mode ``q`` rotates as
    ``exp(+i omega_q t)``.
    """
    series = np.asarray(series, dtype=complex)
    if series.ndim != 2 or series.shape[1] != basis.amplitudes.shape[0]:
        raise ValueError("series must have shape (n_times, n_sites)")
    if series.shape[0] < 2:
        raise ValueError("need at least two time samples")
    ref = basis.frequencies if guard_frequencies is None else guard_frequencies
    if dt * np.max(np.abs(ref)) >= np.pi:
        raise ValueError("time step aliases the fastest mode (dt * max|omega| >= pi)")
    z = series @ basis.amplitudes
    t = dt * np.arange(series.shape[0])
    design = np.column_stack([t, np.ones_like(t)])
    lines = []
    for q in range(z.shape[1]):
        amp = float(np.mean(np.abs(z[:, q])))
        reliable = amp >= threshold
        if reliable:
            phase = np.unwrap(np.angle(z[:, q]))
            slope = np.linalg.lstsq(design, phase, rcond=None)[0][0]
        else:
            slope = np.nan
        lines.append(SpectralLine(float(slope), amp, reliable, q))
    return lines
