"""Command-line front end: ``plasmon <scenario> --config FILE [--seed N] [--out DIR] [--threads N]``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import SCENARIOS, ConfigError, read_values, validate
from .gatelearn import DecayFitError
from .scenarios import REPORT_FORMAT, REPORT_VERSION, ScenarioResult, run

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3

log = logging.getLogger("plasmon")


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.floating, float)):
        return None if not np.isfinite(x) else float(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def write_outputs(result: ScenarioResult, config: dict, out: Path) -> list[Path]:
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name, (header, rows) in result.tables.items():
        path = out / f"{result.scenario}_{name}.csv"
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
        written.append(path)
    report = {
        "format": REPORT_FORMAT,
        "version": REPORT_VERSION,
        "package_version": __version__,
        "scenario": result.scenario,
        "config": config,
        "results": result.report,
    }
    path = out / f"{result.scenario}_report.json"
    path.write_text(json.dumps(_jsonable(report), indent=2, sort_keys=True))
    written.append(path)
    path = out / f"plot_{result.scenario}.py"
    path.write_text(result.plot_script)
    written.append(path)
    return written


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="plasmon", description="Plasma-wave quantum simulation scenarios.")
    p.add_argument("scenario", choices=SCENARIOS)
    p.add_argument("--config", required=True, help="key = value configuration file")
    p.add_argument("--seed", type=int, help="overrides the config seed")
    p.add_argument("--out", help="output directory (overrides output_dir)")
    p.add_argument("--threads", type=int, help="worker threads for ensemble members")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        values = read_values(args.config)
        if values.setdefault("scenario", args.scenario) != args.scenario:
            raise ConfigError(f"config is for scenario {values['scenario']!r}, not {args.scenario!r}")
        for key, arg in (("seed", args.seed), ("output_dir", args.out), ("threads", args.threads)):
            if arg is not None:
                values[key] = arg
        cfg = validate(values)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        result = run(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (FloatingPointError, np.linalg.LinAlgError, DecayFitError, RuntimeError, ValueError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    for path in write_outputs(result, cfg.to_dict(), Path(cfg["output_dir"])):
        log.info("wrote %s", path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
