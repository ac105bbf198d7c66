"""Scenario configuration files.

Grammar, one entry per line::

    # comment (also allowed after a value)
    scenario = propagate
    lattice.n_sites = 9
    reflect.k_points = 0.15, 0.25, 0.35

Keys are dotted ``section.name`` (or bare top-level names), values are
parsed according to the schema below.  Unknown keys, duplicate keys and
unparseable values are errors.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .lattice import LatticeSpec

SCENARIOS = ("spectrum", "propagate", "reflect_sweep", "twirl_analysis", "cdr_demo", "gatelearn_demo")


class ConfigError(ValueError):
    pass


def _bool(text: str) -> bool:
    t = text.lower()
    if t in ("true", "yes", "on", "1"):
        return True
    if t in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.split(",") if x.strip())


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(x) for x in text.split(",") if x.strip())


def _words(text: str) -> tuple[str, ...]:
    return tuple(x.strip() for x in text.split(",") if x.strip())


# key -> (parser, default)
SCHEMA: dict[str, tuple] = {
    "scenario": (str, None),
    "seed": (int, 0),
    "output_dir": (str, "out"),
    "threads": (int, 1),
    "lattice.n_sites": (int, 9),
    "lattice.coupling": (float, 1.0),
    "lattice.spacing": (float, 1.0),
    "lattice.boundary": (str, "open"),
    "lattice.profile": (str, "vacuum"),
    "lattice.gap": (float, 0.0),
    "lattice.gap_max": (float, 0.5),
    "lattice.position": (int, 6),
    "lattice.center": (float, 5.0),
    "lattice.width": (float, 1.5),
    "trotter.dt": (float, 0.8),
    "trotter.steps": (int, None),
    "noise.model": (str, "none"),
    "noise.two_qubit_infidelity": (float, 0.0148),
    "noise.one_qubit_infidelity": (float, 0.0),
    "mitigation.twirl_instances": (int, 0),
    "mitigation.clifford_instances": (int, 30),
    "mitigation.shots": (int, 10000),
    "mitigation.clifford_ensemble": (str, "conserving"),
    "mitigation.cdr": (_bool, True),
    "mitigation.magnetization_rescale": (_bool, False),
    "packet.ka": (float, 0.0),
    "packet.sites": (int, 2),
    "packet.start": (int, 0),
    "spectrum.site": (int, 0),
    "reflect.n_sites": (int, 100),
    "reflect.delta": (float, 0.5),
    "reflect.k_points": (_floats, (0.15, 0.25, 0.35, 0.75, 0.9, 1.05, 1.2, 1.35)),
    "reflect.width": (float, 8.0),
    "twirl.theta": (float, float(np.pi / 2)),
    "twirl.phi": (float, float(np.pi / 12)),
    "twirl.error_angle": (float, float(np.pi / 12)),
    "twirl.haar_samples": (int, 1000),
    "twirl.method": (str, "polar"),
    "cdr.families": (_words, ("z", "xy")),
    "cdr.depths": (_ints, ()),
    "gatelearn.theta": (float, float(np.pi / 2)),
    "gatelearn.phi": (float, float(np.pi / 12)),
    "gatelearn.theta_offset": (float, 0.03),
    "gatelearn.phi_offset": (float, 0.0),
    "gatelearn.depolarizing": (float, 0.0),
    "gatelearn.lengths": (_ints, (1, 2, 4, 8, 12)),
    "gatelearn.sequences": (int, 10),
    "gatelearn.shots": (int, 2000),
    "gatelearn.learn_lengths": (_ints, (8, 16, 32)),
    "gatelearn.learn_sequences": (int, 20),
}

DEFAULT_STEPS = {"spectrum": 60, "propagate": 24, "cdr_demo": 24}
PROFILES = ("vacuum", "uniform", "sharp_jump", "gaussian")
NOISE_MODELS = ("none", "pauli", "table_one")
ENSEMBLES = ("uniform", "conserving")


@dataclass(frozen=True)
class ScenarioConfig:
    values: dict = field(default_factory=dict)

    def __getitem__(self, key: str):
        return self.values[key]

    @property
    def scenario(self) -> str:
        return self.values["scenario"]

    @property
    def seed(self) -> int:
        return self.values["seed"]

    @property
    def steps(self) -> int:
        return self.values["trotter.steps"]

    def lattice(self, n_sites: int | None = None) -> LatticeSpec:
        v = self.values
        n = v["lattice.n_sites"] if n_sites is None else n_sites
        kw = dict(coupling=v["lattice.coupling"], spacing=v["lattice.spacing"], boundary=v["lattice.boundary"])
        profile = v["lattice.profile"]
        if profile == "vacuum":
            return LatticeSpec.uniform(n, 0.0, **kw)
        if profile == "uniform":
            return LatticeSpec.uniform(n, v["lattice.gap"], **kw)
        if profile == "sharp_jump":
            return LatticeSpec.sharp_jump(n, v["lattice.gap_max"], v["lattice.position"], **kw)
        return LatticeSpec.gaussian(n, v["lattice.gap_max"], v["lattice.center"], v["lattice.width"], **kw)

    def with_values(self, **updates) -> "ScenarioConfig":
        merged = dict(self.values)
        for k, v in updates.items():
            merged[k.replace("__", ".")] = v
        return validate(merged)

    def to_dict(self) -> dict:
        return {k: list(v) if isinstance(v, tuple) else v for k, v in sorted(self.values.items())}


def parse_text(text: str) -> dict:
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in body.split("=", 1))
        if key not in SCHEMA:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in raw:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        raw[key] = value
    values = {}
    for key, text_value in raw.items():
        parser = SCHEMA[key][0]
        try:
            values[key] = parser(text_value)
        except ValueError as exc:
            raise ConfigError(f"{key}: {exc}") from None
    return values


def validate(values: dict) -> ScenarioConfig:
    unknown = set(values) - set(SCHEMA)
    if unknown:
        raise ConfigError(f"unknown keys: {sorted(unknown)}")
    v = {k: d for k, (_, d) in SCHEMA.items()}
    v.update(values)
    if v["scenario"] not in SCENARIOS:
        raise ConfigError(f"scenario must be one of {SCENARIOS}")
    if v["trotter.steps"] is None:
        v["trotter.steps"] = DEFAULT_STEPS.get(v["scenario"], 24)
    checks = [
        (v["lattice.profile"] in PROFILES, f"lattice.profile must be one of {PROFILES}"),
        (v["noise.model"] in NOISE_MODELS, f"noise.model must be one of {NOISE_MODELS}"),
        (v["mitigation.clifford_ensemble"] in ENSEMBLES, f"mitigation.clifford_ensemble must be one of {ENSEMBLES}"),
        (v["twirl.method"] in ("polar", "unitarity"), "twirl.method must be polar or unitarity"),
        (set(v["cdr.families"]) <= {"z", "xy"} and v["cdr.families"], "cdr.families must list z and/or xy"),
        (v["trotter.dt"] > 0, "trotter.dt must be positive"),
        (v["trotter.steps"] >= 1, "trotter.steps must be >= 1"),
        (v["threads"] >= 1, "threads must be >= 1"),
        (v["mitigation.shots"] >= 1, "mitigation.shots must be >= 1"),
        (v["mitigation.clifford_instances"] >= 5, "mitigation.clifford_instances must be >= 5"),
        (v["mitigation.twirl_instances"] >= 0, "mitigation.twirl_instances must be >= 0"),
        (v["packet.sites"] >= 1, "packet.sites must be >= 1"),
        (0 <= v["packet.start"] and v["packet.start"] + v["packet.sites"] <= v["lattice.n_sites"],
         "packet does not fit in the lattice"),
        (0 <= v["spectrum.site"] < v["lattice.n_sites"], "spectrum.site outside the lattice"),
        (v["lattice.profile"] != "sharp_jump" or 1 <= v["lattice.position"] <= v["lattice.n_sites"],
         "lattice.position outside the lattice"),
        (v["reflect.n_sites"] >= 50, "reflect.n_sites must be >= 50"),
        (len(v["reflect.k_points"]) >= 1, "reflect.k_points must not be empty"),
        (v["twirl.haar_samples"] >= 1, "twirl.haar_samples must be >= 1"),
        (0 <= v["gatelearn.depolarizing"] <= 1, "gatelearn.depolarizing must lie in [0, 1]"),
        (v["gatelearn.sequences"] >= 2, "gatelearn.sequences must be >= 2"),
        (v["gatelearn.learn_sequences"] >= 1, "gatelearn.learn_sequences must be >= 1"),
        (len(v["gatelearn.learn_lengths"]) >= 1 and min(v["gatelearn.learn_lengths"]) >= 1,
         "gatelearn.learn_lengths must be positive"),
    ]
    for ok, message in checks:
        if not ok:
            raise ConfigError(message)
    cfg = ScenarioConfig(v)
    try:
        cfg.lattice()
    except ValueError as exc:
        raise ConfigError(f"lattice: {exc}") from None
    return cfg


def read_values(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    return parse_text(text)


def load(path) -> ScenarioConfig:
    return validate(read_values(path))


def default(scenario: str, **updates) -> ScenarioConfig:
    values = {"scenario": scenario}
    values.update({k.replace("__", "."): v for k, v in updates.items()})
    return validate(values)
