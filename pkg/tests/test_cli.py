import csv
import json

import numpy as np
import pytest

from plasmon import cli
from plasmon.config import default
from plasmon.scenarios import run

SMALL = {
    "spectrum": "lattice.n_sites = 5\nlattice.profile = uniform\nlattice.gap = 0.25\ntrotter.steps = 20\n",
    "propagate": (
        "lattice.n_sites = 5\nlattice.profile = sharp_jump\nlattice.position = 3\ntrotter.steps = 4\n"
        "noise.model = pauli\nmitigation.shots = 1000\nmitigation.clifford_instances = 8\n"
    ),
    "reflect_sweep": "reflect.n_sites = 60\nreflect.k_points = 0.3, 1.2\n",
    "twirl_analysis": "twirl.haar_samples = 20\n",
    "cdr_demo": (
        "lattice.n_sites = 5\nlattice.profile = sharp_jump\nlattice.position = 3\nnoise.model = pauli\n"
        "mitigation.clifford_instances = 8\ncdr.depths = 1, 2\ntrotter.steps = 2\n"
    ),
    "gatelearn_demo": (
        "gatelearn.sequences = 3\ngatelearn.lengths = 1, 2, 4\n"
        "gatelearn.learn_sequences = 2\ngatelearn.learn_lengths = 2, 4\n"
    ),
}

TABLES = {
    "spectrum": {"series": ["step", "t", "qubit", "observable", "value", "stderr"],
                 "lines": ["mode", "omega_exact", "omega_extracted", "amplitude", "reliable", "path"]},
    "propagate": {"densities": ["step", "t", "qubit", "observable", "ideal", "value", "stderr", "mitigated",
                                "mitigated_stderr"],
                  "suppression": ["qubit", "depth", "family", "r", "stderr", "n_pairs", "flagged"]},
    "reflect_sweep": {"reflectance": ["k", "reflectance_packet", "reflectance_analytic", "abs_r_analytic", "branch",
                                      "tolerance"]},
    "twirl_analysis": {"table": ["error", "stage", "total", "stochastic", "coherent"]},
    "cdr_demo": {"suppression": ["qubit", "depth", "family", "r", "stderr", "n_pairs", "flagged"]},
    "gatelearn_demo": {"benchmark": ["length", "shifted_fidelity", "fidelity_err", "shifted_purity", "purity_err",
                                     "coherent_gap"]},
}


def _write(tmp_path, scenario, extra=""):
    path = tmp_path / f"{scenario}.conf"
    path.write_text(f"scenario = {scenario}\n" + SMALL[scenario] + extra)
    return path


@pytest.mark.parametrize("scenario", list(SMALL))
def test_scenario_outputs(tmp_path, scenario):
    out = tmp_path / "out"
    assert cli.main([scenario, "--config", str(_write(tmp_path, scenario)), "--out", str(out), "--seed", "2"]) == 0
    for table, header in TABLES[scenario].items():
        with (out / f"{scenario}_{table}.csv").open() as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == header
        assert len(rows) > 1
    report = json.loads((out / f"{scenario}_report.json").read_text())
    assert report["format"] == "plasmon-report" and report["version"] == 1
    assert report["scenario"] == scenario
    assert report["config"]["seed"] == 2
    assert report["config"]["output_dir"] == str(out)
    script = (out / f"plot_{scenario}.py").read_text()
    compile(script, "plot", "exec")


def test_same_seed_same_files(tmp_path):
    cfg = _write(tmp_path, "propagate")
    a, b = tmp_path / "a", tmp_path / "b"
    assert cli.main(["propagate", "--config", str(cfg), "--out", str(a)]) == 0
    assert cli.main(["propagate", "--config", str(cfg), "--out", str(b), "--threads", "2"]) == 0
    for name in ("propagate_densities.csv", "propagate_suppression.csv"):
        assert (a / name).read_text() == (b / name).read_text()


def test_config_errors_exit_two(tmp_path, capsys):
    bad = tmp_path / "bad.conf"
    bad.write_text("scenario = spectrum\nlattice.wat = 1\n")
    assert cli.main(["spectrum", "--config", str(bad)]) == 2
    assert "config error" in capsys.readouterr().err
    assert cli.main(["spectrum", "--config", str(tmp_path / "missing.conf")]) == 2
    other = _write(tmp_path, "twirl_analysis")
    assert cli.main(["spectrum", "--config", str(other)]) == 2


def test_scenario_taken_from_command_line(tmp_path):
    path = tmp_path / "bare.conf"
    path.write_text(SMALL["twirl_analysis"])
    assert cli.main(["twirl_analysis", "--config", str(path), "--out", str(tmp_path / "o")]) == 0


def test_numerical_failure_exits_three(tmp_path, monkeypatch, capsys):
    def boom(cfg):
        raise np.linalg.LinAlgError("singular")

    monkeypatch.setattr(cli, "run", boom)
    assert cli.main(["twirl_analysis", "--config", str(_write(tmp_path, "twirl_analysis"))]) == 3
    assert "numerical failure" in capsys.readouterr().err


def test_unknown_scenario_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        cli.main(["nope", "--config", "x"])
    assert exc.value.code == 2


def test_rescaled_densities_sum_to_single_excitation():
    cfg = default("propagate", lattice__n_sites=5, lattice__profile="sharp_jump", lattice__position=3,
                  trotter__steps=4, noise__model="pauli", mitigation__shots=1000, mitigation__clifford_instances=8,
                  mitigation__cdr=False, mitigation__magnetization_rescale=True, seed=3)
    header, rows = run(cfg).tables["densities"]
    col = {h: i for i, h in enumerate(header)}
    by_step: dict[int, list[float]] = {}
    for row in rows:
        if row[col["observable"]] == "n":
            by_step.setdefault(row[col["step"]], []).append(row[col["mitigated"]])
    assert by_step
    for values in by_step.values():
        # densities (1 - z) / 2 of a single excitation
        assert sum(values) == pytest.approx(1.0, abs=1e-12)
