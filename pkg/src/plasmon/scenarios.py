"""End-to-end experiments: spectroscopy, wave-packet propagation, reflection, twirling,
Clifford data regression and gate learning."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .circuit import (
    FSIM,
    Circuit,
    TrotterConfig,
    build_trotter_circuit,
    hopping_block,
    single_site_superposition,
    wavepacket_prep,
)
from .clifford import (
    CliffordCircuit,
    PauliString,
    exact_expectation,
    fix_init_layer,
    noisy_expectation,
    random_clifford_brickwork,
)
from .compiler import ExpressionCache, compile_circuit
from .config import ConfigError, ScenarioConfig
from .gatelearn import learn_gate, process_tomography, shadow_benchmark
from .lattice import (
    LatticeSpec,
    creation_series,
    eigenmodes,
    reflection_coefficient,
    wavepacket_reflectance,
)
from .lattice import extract_spectrum as _extract
from .mitigation import SuppressionTable, cdr_apply, cdr_fit, magnetization_rescale
from .paulis import pauli_labels, pauli_rotation
from .simulator import NoiseModel, SimulatorBackend, depolarizing, run_density, run_statevector
from .simulator.ptm import infidelity_decomposition, unitary_ptm
from .simulator.states import density, pauli_expectation, z_expectations, zero_state
from .twirling import (
    fsim_twirl_set,
    group_twirl,
    random_coherent_errors,
    residual_generator,
    residual_generators,
    twirl_circuit,
    twirl_effectiveness,
)

log = logging.getLogger(__name__)

REPORT_FORMAT = "plasmon-report"
REPORT_VERSION = 1


@dataclass
class ScenarioResult:
    scenario: str
    tables: dict = field(default_factory=dict)  # name -> (header, rows)
    report: dict = field(default_factory=dict)
    plot_script: str = ""


# ---------------------------------------------------------------- shared pieces

def noise_model(cfg: ScenarioConfig) -> NoiseModel:
    kind = cfg["noise.model"]
    if kind == "none":
        return NoiseModel.none()
    if kind == "pauli":
        return NoiseModel.pauli(cfg["noise.two_qubit_infidelity"], cfg["noise.one_qubit_infidelity"])
    return NoiseModel.table_one()


def step_end_layers(circuit: Circuit) -> dict[int, int]:
    """Layer index after which each Trotter step is complete; step 0 is the prepared state."""
    ends: dict[int, int] = {0: -1}
    for i, s in enumerate(circuit.steps):
        if s < 0:
            ends[0] = i
        else:
            ends[s + 1] = i
    return ends


def _snapshots(circuit: Circuit, run, measure, initial) -> dict[int, np.ndarray]:
    ends = step_end_layers(circuit)
    by_layer = {}
    for step, layer in ends.items():
        by_layer.setdefault(layer, []).append(step)
    out: dict[int, np.ndarray] = {}
    for step in by_layer.get(-1, ()):
        out[step] = measure(initial)

    def hook(i, state):
        for step in by_layer.get(i, ()):
            out[step] = measure(state)

    run(circuit, hook)
    return out


def _run_with_snapshots(circuit: Circuit, noise, measure) -> dict[int, np.ndarray]:
    psi0 = zero_state(circuit.n_qubits)
    if noise is None or noise.is_noiseless:
        return _snapshots(circuit, lambda c, h: run_statevector(c, on_layer=h), measure, psi0)
    return _snapshots(circuit, lambda c, h: run_density(c, noise=noise, on_layer=h), measure, density(psi0))


def z_trajectory(circuit: Circuit, noise: NoiseModel | None = None) -> np.ndarray:
    """``<Z_j>`` after each step, rows indexed by step (row 0 is the prepared state)."""
    n = circuit.n_qubits
    snaps = _run_with_snapshots(circuit, noise, lambda s: z_expectations(s, n))
    return np.array([snaps[s] for s in sorted(snaps)])


def sample_z(values: np.ndarray, shots: int, rng) -> tuple[np.ndarray, np.ndarray]:
    """Shot-noise estimates of +-1 observables with exact means ``values``."""
    p = np.clip((1 + np.asarray(values)) / 2, 0, 1)
    est = 2 * rng.binomial(shots, p) / shots - 1
    return est, np.sqrt(np.clip(1 - est**2, 1.0 / shots, None) / shots)


def packet_amplitudes(sites: int, ka: float) -> np.ndarray:
    a = np.exp(1j * ka * np.arange(sites))
    return a / np.linalg.norm(a)


def propagation_circuit(cfg: ScenarioConfig) -> Circuit:
    spec = cfg.lattice()
    prep = wavepacket_prep(packet_amplitudes(cfg["packet.sites"], cfg["packet.ka"]), spec.n_sites, cfg["packet.start"])
    return build_trotter_circuit(TrotterConfig(cfg["trotter.dt"], cfg.steps, spec), prep, absorb_z=True)


# ---------------------------------------------------------------- CDR pipeline

_FAMILY_LETTERS = {"z": ("Z",), "xy": ("X", "Y")}


def _clifford_values(cliff: CliffordCircuit, observables, noise: NoiseModel) -> list[float]:
    if noise.is_noiseless:
        return [float(exact_expectation(cliff, o)) for o in observables]
    if noise.is_pauli:
        return [noisy_expectation(cliff, o, noise) for o in observables]
    rho = run_density(cliff.to_circuit(), noise=noise)
    return [pauli_expectation(rho, o.letters) for o in observables]


def clifford_suppression(
    circuit: Circuit,
    noise: NoiseModel,
    depths,
    families=("z",),
    instances: int = 30,
    shots: int | None = 10000,
    ensemble: str = "conserving",
    rng=None,
    max_draw_factor: int = 50,
) -> tuple[SuppressionTable, list[tuple]]:
    """Fit suppression factors from Clifford proxies of ``circuit``.

    For each depth, proxies with the same two-qubit placement are drawn and
    their first layer fixed to activate as many single-site observables as
    possible, until every ``(qubit, family)`` group holds ``instances``
    pairs.  Noisy proxy values carry binomial shot noise unless ``shots`` is
    None.
    """
    rng = np.random.default_rng(rng)
    n = circuit.n_qubits
    structure = circuit.structure()
    observables = [
        (q, fam, PauliString.single(n, q, letter))
        for fam in families for letter in _FAMILY_LETTERS[fam] for q in range(n)
    ]
    paulis = [o for _, _, o in observables]
    records = []
    for depth in depths:
        counts: dict[tuple[int, str], int] = {(q, f): 0 for q in range(n) for f in families}
        draws = 0
        while min(counts.values()) < instances and draws < max_draw_factor * instances:
            draws += 1
            proxy = random_clifford_brickwork(structure, n, rng, ensemble).step_prefix(depth)
            wanted = [i for i, (q, fam, _) in enumerate(observables) if counts[q, fam] < instances]
            fixed, active = fix_init_layer(proxy, [paulis[i] for i in wanted])
            todo = []
            for j in active:
                i = wanted[j]
                q, fam, _ = observables[i]
                if counts[q, fam] < instances:
                    counts[q, fam] += 1
                    todo.append(i)
            if not todo:
                continue
            noisy = _clifford_values(fixed, [paulis[i] for i in todo], noise)
            for i, v in zip(todo, noisy):
                q, fam, p = observables[i]
                exact = exact_expectation(fixed, p)
                meas = v if shots is None else float(sample_z(np.array([v]), shots, rng)[0][0])
                records.append(((q, int(depth), fam), meas, exact))
        starved = sorted(k for k, c in counts.items() if c < instances)
        if starved:
            raise RuntimeError(f"depth {depth}: too few Clifford proxies for groups {starved}")
    return cdr_fit(records), records


@dataclass
class MitigatedTrajectory:
    ideal: np.ndarray
    noisy: np.ndarray
    noisy_err: np.ndarray
    mitigated: np.ndarray
    mitigated_err: np.ndarray
    flagged: np.ndarray
    table: SuppressionTable | None


def mitigate_z_trajectory(
    circuit: Circuit,
    noise: NoiseModel,
    shots: int = 10000,
    instances: int = 30,
    ensemble: str = "conserving",
    cdr: bool = True,
    rescale: bool = False,
    twirl_instances: int = 0,
    seed=None,
) -> MitigatedTrajectory:
    """Noiseless, noisy (with shot noise) and mitigated ``<Z_j>`` for every step."""
    ss = np.random.SeedSequence(seed)
    rng_shots, rng_cliff, rng_twirl = (np.random.default_rng(c) for c in ss.spawn(3))
    ideal = z_trajectory(circuit)
    if twirl_instances:
        exact_noisy = twirled_z_trajectory(circuit, noise, twirl_instances, rng_twirl)
    else:
        exact_noisy = z_trajectory(circuit, noise)
    noisy, noisy_err = sample_z(exact_noisy, shots, rng_shots)
    mitigated, mitigated_err = noisy.copy(), noisy_err.copy()
    flagged = np.zeros_like(noisy, dtype=bool)
    table = None
    if cdr:
        depths = range(ideal.shape[0])
        table, _ = clifford_suppression(circuit, noise, depths, ("z",), instances, shots, ensemble, rng_cliff)
        for d in depths:
            for q in range(circuit.n_qubits):
                e = table[(q, d, "z")]
                mv = cdr_apply(noisy[d, q], e.r, noisy_err[d, q], e.stderr)
                mitigated[d, q], mitigated_err[d, q], flagged[d, q] = mv.value, mv.stderr, mv.flagged or e.flagged
    if rescale:
        target = float(ideal[0].sum())
        for d in range(len(mitigated)):
            res = magnetization_rescale(mitigated[d], target)
            scale = res.values.sum() / mitigated[d].sum() if not res.flagged else 1.0
            mitigated[d], mitigated_err[d] = res.values, mitigated_err[d] * abs(scale)
            flagged[d] |= res.flagged
    return MitigatedTrajectory(ideal, noisy, noisy_err, mitigated, mitigated_err, flagged, table)


def twirled_z_trajectory(circuit: Circuit, noise: NoiseModel, instances: int, rng) -> np.ndarray:
    """Average noisy trajectory over twirled instances of the natively compiled circuit."""
    compiled = compile_circuit(circuit, native=(np.pi / 2, 0.0), cache=ExpressionCache())
    acc = None
    for _ in range(instances):
        traj = z_trajectory(twirl_circuit(compiled, rng), noise)
        acc = traj if acc is None else acc + traj
    return acc / instances


def center_of_mass(density: np.ndarray, spacing: float = 1.0) -> np.ndarray:
    x = spacing * np.arange(density.shape[-1])
    w = np.clip(density, 0, None)
    return (w @ x) / np.maximum(w.sum(axis=-1), 1e-12)


# ---------------------------------------------------------------- spectrum

def single_excitation_step(spec: LatticeSpec, dt: float) -> np.ndarray:
    """One Trotter step restricted to one excitation, relative to the vacuum phase."""
    n = spec.n_sites
    # block index 1 is |01> (excitation on the right site), so reverse to site order
    bond = hopping_block(spec.coupling, dt)[np.ix_([2, 1], [2, 1])]
    odd = np.eye(n, dtype=complex)
    even = np.eye(n, dtype=complex)
    for i in range(0, n - 1, 2):
        odd[i:i + 2, i:i + 2] = bond
    for i in range(1, n - 1, 2):
        even[i:i + 2, i:i + 2] = bond
    if spec.boundary == "periodic" and n > 2:
        # bond (n-1, 0) acts on the wrapped pair
        idx = [n - 1, 0]
        even[np.ix_(idx, idx)] = bond
    signs = (-1.0) ** np.arange(1, n + 1)
    z = np.diag(np.exp(-1j * dt * spec.gaps * signs))
    return z @ even @ odd


def spectrum_series_exact(spec: LatticeSpec, dt: float, steps: int, site: int) -> np.ndarray:
    u = single_excitation_step(spec, dt)
    col = np.zeros(spec.n_sites, dtype=complex)
    col[site] = 1
    rows = []
    for _ in range(steps + 1):
        rows.append(np.conj(col) / 2)
        col = u @ col
    return np.array(rows)


def spectrum_series_circuit(spec: LatticeSpec, dt: float, steps: int, site: int, noise=None):
    """``(<X_j>, <Y_j>)`` per step from the gate-level circuit."""
    n = spec.n_sites
    circ = build_trotter_circuit(TrotterConfig(dt, steps, spec), single_site_superposition(n, site), absorb_z=True)

    def measure(state):
        return np.array([[pauli_expectation(state, _single(n, q, l)) for q in range(n)] for l in "XY"])

    snaps = _run_with_snapshots(circ, noise, measure)
    data = np.array([snaps[s] for s in sorted(snaps)])
    return data[:, 0, :], data[:, 1, :]


def _single(n: int, q: int, letter: str) -> str:
    return "".join(letter if i == q else "I" for i in range(n))


def trotter_shift(spec: LatticeSpec, dt: float, steps: int, site: int = 0) -> float:
    """Largest gap between extracted and exact mode frequencies for a Trotter run."""
    basis = eigenmodes(spec)
    lines = _extract(spectrum_series_exact(spec, dt, steps, site), basis, dt)
    diffs = [abs(l.omega - basis.frequencies[l.mode]) for l in lines if l.reliable]
    return float(max(diffs)) if diffs else float("nan")


def run_spectrum(cfg: ScenarioConfig) -> ScenarioResult:
    spec = cfg.lattice()
    dt, steps, site = cfg["trotter.dt"], cfg.steps, cfg["spectrum.site"]
    basis = eigenmodes(spec)
    x, y = spectrum_series_circuit(spec, dt, steps, site)
    lines = _extract(creation_series(x, y), basis, dt)
    rows = []
    for s in range(x.shape[0]):
        for q in range(spec.n_sites):
            rows.append([s, s * dt, q, "X", x[s, q], 0.0])
            rows.append([s, s * dt, q, "Y", y[s, q], 0.0])
    noisy_lines = None
    noise = noise_model(cfg)
    if not noise.is_noiseless:
        xn, yn = spectrum_series_circuit(spec, dt, steps, site, noise)
        rng = np.random.default_rng(cfg.seed)
        shots = cfg["mitigation.shots"]
        xs, xe = sample_z(xn, shots, rng)
        ys, ye = sample_z(yn, shots, rng)
        for s in range(xs.shape[0]):
            for q in range(spec.n_sites):
                rows.append([s, s * dt, q, "X_noisy", xs[s, q], xe[s, q]])
                rows.append([s, s * dt, q, "Y_noisy", ys[s, q], ye[s, q]])
        noisy_lines = _extract(creation_series(xs, ys), basis, dt)
    line_rows = []
    for l in lines:
        line_rows.append([l.mode, basis.frequencies[l.mode], l.omega, l.amplitude, int(l.reliable), "noiseless"])
    for l in noisy_lines or ():
        line_rows.append([l.mode, basis.frequencies[l.mode], l.omega, l.amplitude, int(l.reliable), "noisy"])
    reliable = [l.omega for l in lines if l.reliable]
    report = {
        "n_sites": spec.n_sites,
        "dt": dt,
        "steps": steps,
        "modes_exact": basis.frequencies.tolist(),
        "modes_extracted": [None if np.isnan(l.omega) else l.omega for l in lines],
        "min_abs_frequency": float(np.min(np.abs(reliable))) if reliable else None,
        "trotter_shift": trotter_shift(spec, dt, steps, site),
    }
    return ScenarioResult(
        "spectrum",
        {
            "series": (["step", "t", "qubit", "observable", "value", "stderr"], rows),
            "lines": (["mode", "omega_exact", "omega_extracted", "amplitude", "reliable", "path"], line_rows),
        },
        report,
        _plot_spectrum(),
    )


# ---------------------------------------------------------------- propagation

def run_propagate(cfg: ScenarioConfig) -> ScenarioResult:
    spec = cfg.lattice()
    circ = propagation_circuit(cfg)
    dt, n = cfg["trotter.dt"], spec.n_sites
    noise = noise_model(cfg)
    report: dict = {"n_sites": n, "dt": dt, "steps": cfg.steps, "profile": cfg["lattice.profile"],
                    "gaps": spec.gaps.tolist()}
    if noise.is_noiseless:
        ideal = z_trajectory(circ)
        traj = None
    else:
        traj = mitigate_z_trajectory(
            circ, noise, cfg["mitigation.shots"], cfg["mitigation.clifford_instances"],
            cfg["mitigation.clifford_ensemble"], cfg["mitigation.cdr"], cfg["mitigation.magnetization_rescale"],
            cfg["mitigation.twirl_instances"], cfg.seed,
        )
        ideal = traj.ideal
    dens = (1 - ideal) / 2
    header = ["step", "t", "qubit", "observable", "ideal", "value", "stderr", "mitigated", "mitigated_stderr"]
    rows = []
    for s in range(ideal.shape[0]):
        for q in range(n):
            if traj is None:
                rows.append([s, s * dt, q, "n", dens[s, q], dens[s, q], 0.0, "", ""])
            else:
                rows.append([
                    s, s * dt, q, "n", dens[s, q], (1 - traj.noisy[s, q]) / 2, traj.noisy_err[s, q] / 2,
                    (1 - traj.mitigated[s, q]) / 2, traj.mitigated_err[s, q] / 2,
                ])
    com = center_of_mass(dens, spec.spacing)
    report["center_of_mass_ideal"] = com.tolist()
    if traj is not None:
        report["center_of_mass_noisy"] = center_of_mass((1 - traj.noisy) / 2, spec.spacing).tolist()
        report["center_of_mass_mitigated"] = center_of_mass((1 - traj.mitigated) / 2, spec.spacing).tolist()
        report["flagged_entries"] = int(traj.flagged.sum())
    tables = {"densities": (header, rows)}
    if traj is not None and traj.table is not None:
        tables["suppression"] = _suppression_rows(traj.table)
    return ScenarioResult("propagate", tables, report, _plot_propagate())


def _suppression_rows(table: SuppressionTable):
    rows = [[k[0], k[1], k[2], table[k].r, table[k].stderr, table[k].n_pairs, int(table[k].flagged)] for k in table.keys()]
    return ["qubit", "depth", "family", "r", "stderr", "n_pairs", "flagged"], rows


# ---------------------------------------------------------------- reflection

def run_reflect_sweep(cfg: ScenarioConfig) -> ScenarioResult:
    n, delta, width = cfg["reflect.n_sites"], cfg["reflect.delta"], cfg["reflect.width"]
    J = cfg["lattice.coupling"]
    k_c = float(np.arcsin(min(delta / J, 1.0)))
    bandwidth = 1.0 / width
    rows, report_points = [], []
    for k in cfg["reflect.k_points"]:
        if abs(np.cos(k)) < 0.05:
            raise ConfigError(f"k = {k} has almost zero group velocity; a packet cannot reach the interface")
        analytic = reflection_coefficient(k, delta, J)
        packet = wavepacket_reflectance(k, delta, n_sites=n, width=width, J=J)
        tol = 0.05
        if abs(k - k_c) < bandwidth:
            tol = 0.1
            log.warning("k = %.3f lies within the packet bandwidth of the branch edge; tolerance widened to %.2f", k, tol)
        branch = "evanescent" if analytic.evanescent else "propagating"
        rows.append([k, packet, analytic.reflectance, abs(analytic.r), branch, tol])
        report_points.append({"k": k, "packet": packet, "analytic": analytic.reflectance, "branch": branch,
                              "tolerance": tol})
    report = {"n_sites": n, "delta": delta, "branch_edge": k_c, "points": report_points,
              "max_deviation": float(max(abs(p["packet"] - p["analytic"]) for p in report_points))}
    header = ["k", "reflectance_packet", "reflectance_analytic", "abs_r_analytic", "branch", "tolerance"]
    return ScenarioResult("reflect_sweep", {"reflectance": (header, rows)}, report, _plot_reflect())


# ---------------------------------------------------------------- twirling

TWIRL_ERRORS = ("ZZ", "ZX", "XX")


def twirl_table(theta: float, phi: float, angle: float, method: str = "polar") -> list[dict]:
    pairs = fsim_twirl_set(theta, phi)
    out = []
    for label in TWIRL_ERRORS:
        r = unitary_ptm(pauli_rotation(label, angle))
        before = infidelity_decomposition(r, method)
        tw = group_twirl(r, pairs)
        after = infidelity_decomposition(tw, method)
        h, _ = residual_generator(tw)
        out.append({
            "error": "R" + label,
            "before": before.to_dict(),
            "after": after.to_dict(),
            "residual_generator_over_pi": {
                lbl: float(v / np.pi) for lbl, v in zip(pauli_labels(2), h) if abs(v) > 1e-8
            },
        })
    return out


def run_twirl_analysis(cfg: ScenarioConfig) -> ScenarioResult:
    theta, phi, angle, method = cfg["twirl.theta"], cfg["twirl.phi"], cfg["twirl.error_angle"], cfg["twirl.method"]
    table = twirl_table(theta, phi, angle, method)
    pairs = fsim_twirl_set(theta, phi)
    errors = random_coherent_errors(cfg["twirl.haar_samples"], strength=angle / 2, seed=cfg.seed)
    eff = twirl_effectiveness(errors, pairs, method)
    gens = residual_generators([group_twirl(unitary_ptm(e), pairs) for e in errors])
    rows = []
    for entry in table:
        for stage in ("before", "after"):
            d = entry[stage]
            rows.append([entry["error"], stage, d["total"], d["stochastic"], d["coherent"]])
    report = {
        "fsim": [theta, phi],
        "method": method,
        "table": table,
        "haar_samples": len(errors),
        "effectiveness": eff,
        "residual_generators_mean_abs": gens.as_dict(),
        "flagged_logarithms": gens.flagged,
    }
    header = ["error", "stage", "total", "stochastic", "coherent"]
    return ScenarioResult("twirl_analysis", {"table": (header, rows)}, report, _plot_twirl())


# ---------------------------------------------------------------- CDR demo

def run_cdr_demo(cfg: ScenarioConfig) -> ScenarioResult:
    circ = propagation_circuit(cfg)
    noise = noise_model(cfg)
    if noise.is_noiseless:
        noise = NoiseModel.pauli(cfg["noise.two_qubit_infidelity"], cfg["noise.one_qubit_infidelity"])
    depths = cfg["cdr.depths"] or tuple(range(1, cfg.steps + 1))
    if max(depths) > cfg.steps or min(depths) < 0:
        raise ConfigError("cdr.depths outside the circuit")
    table, _ = clifford_suppression(
        circ, noise, depths, cfg["cdr.families"], cfg["mitigation.clifford_instances"],
        cfg["mitigation.shots"], cfg["mitigation.clifford_ensemble"], np.random.default_rng(cfg.seed),
    )
    per_depth = {}
    for fam in cfg["cdr.families"]:
        means = [float(np.mean([table[(q, d, fam)].r for q in range(circ.n_qubits)])) for d in depths]
        slope = np.polyfit(np.asarray(depths, float), np.log(np.clip(means, 1e-12, None)), 1)[0]
        per_depth[fam] = {"depths": list(depths), "mean_r": means, "decay_per_step": float(-slope)}
    report = {"noise": noise.label, "ensemble": cfg["mitigation.clifford_ensemble"], "suppression": per_depth,
              "flagged": sum(int(table[k].flagged) for k in table.keys())}
    return ScenarioResult("cdr_demo", {"suppression": _suppression_rows(table)}, report, _plot_cdr())


# ---------------------------------------------------------------- gate learning demo

def run_gatelearn_demo(cfg: ScenarioConfig) -> ScenarioResult:
    nominal = (cfg["gatelearn.theta"], cfg["gatelearn.phi"])
    truth = (nominal[0] + cfg["gatelearn.theta_offset"], nominal[1] + cfg["gatelearn.phi_offset"])
    noise = NoiseModel.none()
    if cfg["gatelearn.depolarizing"] > 0:
        noise = noise.with_channel(FSIM, depolarizing(cfg["gatelearn.depolarizing"], 2))
    backend = SimulatorBackend.with_fsim_offset(cfg["gatelearn.theta_offset"], cfg["gatelearn.phi_offset"], noise=noise)
    ss = np.random.SeedSequence(cfg.seed)
    s1, s2, s3 = (int(c.generate_state(1)[0]) for c in ss.spawn(3))
    shots = cfg["gatelearn.shots"]
    tomo = process_tomography(backend, (0, 1), nominal, shots, s1)
    curve = shadow_benchmark(backend, (0, 1), cfg["gatelearn.lengths"], cfg["gatelearn.sequences"], shots,
                             nominal, s2, cfg["threads"])
    learned = learn_gate(backend, (0, 1), nominal, cfg["gatelearn.learn_lengths"], cfg["gatelearn.learn_sequences"],
                         shots, tomography_shots=shots, seed=s3, threads=cfg["threads"])
    report = {
        "nominal": list(nominal),
        "truth": list(truth),
        "tomography": tomo.to_dict(),
        "benchmark": curve.to_dict(),
        "learned": learned.to_dict(),
        "learned_error": [learned.theta - truth[0], learned.phi - truth[1]],
    }
    rows = [[n, f, fe, p, pe, g] for n, f, fe, p, pe, g in zip(
        curve.lengths, curve.shifted_fidelity, curve.fidelity_err, curve.shifted_purity, curve.purity_err, curve.gap)]
    header = ["length", "shifted_fidelity", "fidelity_err", "shifted_purity", "purity_err", "coherent_gap"]
    return ScenarioResult("gatelearn_demo", {"benchmark": (header, rows)}, report, _plot_gatelearn())


RUNNERS = {
    "spectrum": run_spectrum,
    "propagate": run_propagate,
    "reflect_sweep": run_reflect_sweep,
    "twirl_analysis": run_twirl_analysis,
    "cdr_demo": run_cdr_demo,
    "gatelearn_demo": run_gatelearn_demo,
}


def run(cfg: ScenarioConfig) -> ScenarioResult:
    return RUNNERS[cfg.scenario](cfg)


# ---------------------------------------------------------------- plot scripts

_PLOT_HEADER = '''"""Generated plotting script; needs pandas and matplotlib."""
import sys
from pathlib import Path

import matplotlib.pyplot as plt
import pandas as pd

here = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).parent
'''


def _plot_spectrum() -> str:
    return _PLOT_HEADER + '''
series = pd.read_csv(here / "spectrum_series.csv")
lines = pd.read_csv(here / "spectrum_lines.csv")
fig, (a, b) = plt.subplots(1, 2, figsize=(10, 4))
x = series[series.observable == "X"].pivot(index="step", columns="qubit", values="value")
a.imshow(x.values.T, aspect="auto", origin="lower", cmap="RdBu")
a.set_xlabel("step"); a.set_ylabel("site"); a.set_title("<X_j>")
ok = lines[(lines.reliable == 1) & (lines.path == "noiseless")]
b.plot(ok["mode"], ok["omega_exact"], "k_", markersize=14, label="exact")
b.plot(ok["mode"], ok["omega_extracted"], "o", label="extracted")
b.set_xlabel("mode"); b.set_ylabel("omega / J"); b.legend()
fig.tight_layout(); fig.savefig(here / "spectrum.png", dpi=150)
'''


def _plot_propagate() -> str:
    return _PLOT_HEADER + '''
d = pd.read_csv(here / "propagate_densities.csv")
cols = [c for c in ("ideal", "value", "mitigated") if d[c].notna().any()]
fig, axes = plt.subplots(1, len(cols), figsize=(4 * len(cols), 4), squeeze=False)
for ax, c in zip(axes[0], cols):
    m = d.pivot(index="step", columns="qubit", values=c)
    ax.imshow(m.values, aspect="auto", origin="lower", vmin=0, vmax=1, cmap="viridis")
    ax.set_title(c); ax.set_xlabel("site"); ax.set_ylabel("step")
fig.tight_layout(); fig.savefig(here / "propagate.png", dpi=150)
'''


def _plot_reflect() -> str:
    return _PLOT_HEADER + '''
d = pd.read_csv(here / "reflect_sweep_reflectance.csv")
plt.plot(d.k, d.reflectance_analytic, "k-", label="analytic")
plt.plot(d.k, d.reflectance_packet, "o", label="wave packet")
plt.xlabel("k a"); plt.ylabel("|r|^2"); plt.legend()
plt.savefig(here / "reflect_sweep.png", dpi=150)
'''


def _plot_twirl() -> str:
    return _PLOT_HEADER + '''
d = pd.read_csv(here / "twirl_analysis_table.csv")
d["label"] = d.error + " " + d.stage
ax = d.plot.bar(x="label", y=["stochastic", "coherent"], stacked=True)
ax.set_ylabel("infidelity")
plt.tight_layout(); plt.savefig(here / "twirl_analysis.png", dpi=150)
'''


def _plot_cdr() -> str:
    return _PLOT_HEADER + '''
d = pd.read_csv(here / "cdr_demo_suppression.csv")
for fam, g in d.groupby("family"):
    m = g.pivot(index="depth", columns="qubit", values="r")
    plt.figure(); plt.imshow(m.values, aspect="auto", origin="lower", vmin=0, vmax=1)
    plt.colorbar(label="r_suppress"); plt.xlabel("qubit"); plt.ylabel("depth"); plt.title(fam)
    plt.savefig(here / f"cdr_demo_{fam}.png", dpi=150)
'''


def _plot_gatelearn() -> str:
    return _PLOT_HEADER + '''
d = pd.read_csv(here / "gatelearn_demo_benchmark.csv")
plt.errorbar(d.length, d.shifted_fidelity, d.fidelity_err, fmt="o-", label="shifted fidelity")
plt.errorbar(d.length, d.shifted_purity, d.purity_err, fmt="s-", label="shifted purity")
plt.xlabel("cycles"); plt.legend()
plt.savefig(here / "gatelearn_demo.png", dpi=150)
'''
