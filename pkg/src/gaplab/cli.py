"""Command-line front end: config ingestion, pipeline runs, table emission.

``gaplab <subcommand> --config experiment.json [--out-dir DIR] [--seed S]``

Subcommands: ``ids`` (IDS profile), ``gaps`` (gap table), ``labels`` (print
the label group and exit), ``verify`` (full pipeline; exit status 4 if any
detected gap has no group element within tolerance).

The config is one JSON document with blocks ``system``, ``sampling``,
``numerics``, ``output``.  Reruns with identical config and seed produce
byte-identical output files.  Exit codes: 0 success, 1 configuration,
2 numerical/resource, 3 I/O, 4 verification failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dynamics import (
    Affine,
    Bernoulli,
    CosineSum,
    Direct,
    LetterValues,
    Periodic,
    Rotation,
    Substitution,
    SubstitutionSubshift,
    _check_pairing,
)
from .errors import ConfigurationError, GaplabError, NumericalError, ResourceLimitError
from .ids import certify_gap, detect_gaps, empirical_dos
from .label_groups import group_for_system, match_label

_DEFAULTS = {
    "N": 2000,
    "phases": 8,
    "seed": 1,
    "points": 800,
    "match_tol": 5e-3,
    "coeff_cap": 40,
    "power_cap": 8,
    "eig_tol": 1e-10,
    "out_dir": "gaplab-out",
}


@dataclass
class ExperimentConfig:
    system: object
    sampling: object
    size: int
    phases: int
    seed: int
    grid_min: float | None
    grid_max: float | None
    grid_points: int
    min_gap_width: float | None
    match_tol: float
    coeff_cap: int
    power_cap: int
    eig_tol: float
    out_dir: str


@dataclass
class ExperimentReport:
    group: str
    gaps: list
    summary: dict
    config: dict
    profile_energies: np.ndarray
    profile_values: np.ndarray


def _expect(block, key, path, *, required=False, default=None):
    if key not in block:
        if required:
            raise ConfigurationError(f"missing required field {path}")
        return default
    return block[key]


def _as_number(value, path, *, integer=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigurationError(f"field {path} must be a number")
    if integer:
        if int(value) != value:
            raise ConfigurationError(f"field {path} must be an integer")
        return int(value)
    return float(value)


def _parse_system(block):
    if not isinstance(block, dict):
        raise ConfigurationError("field system must be an object")
    kind = _expect(block, "kind", "system.kind", required=True)
    try:
        if kind == "periodic":
            return Periodic(tuple(_expect(block, "values", "system.values", required=True)))
        if kind == "rotation":
            return Rotation(tuple(_expect(block, "alpha", "system.alpha", required=True)))
        if kind == "affine":
            return Affine(
                tuple(tuple(row) for row in _expect(block, "matrix", "system.matrix", required=True)),
                tuple(_expect(block, "shift", "system.shift", required=True)),
            )
        if kind == "substitution":
            rules = _expect(block, "rules", "system.rules", required=True)
            if not isinstance(rules, dict):
                raise ConfigurationError("field system.rules must map symbols to words")
            return SubstitutionSubshift(Substitution(rules))
        if kind == "bernoulli":
            values = tuple(_expect(block, "values", "system.values", required=True))
            weights = _expect(block, "weights", "system.weights")
            if weights is None:
                weights = tuple(1.0 / len(values) for _ in values) if values else ()
            return Bernoulli(values, tuple(weights), seed=int(_expect(block, "seed", "system.seed", default=0)))
    except TypeError as exc:
        raise ConfigurationError(f"malformed system block: {exc}") from exc
    raise ConfigurationError(f"unknown system.kind {kind!r}")


def _parse_sampling(block, system):
    if block is None:
        if isinstance(system, (Periodic, Bernoulli)):
            return Direct()
        if isinstance(system, (Rotation, Affine)):
            return CosineSum((1.0,) * system.dimension)
        raise ConfigurationError("field sampling.values is required for substitution systems")
    if not isinstance(block, dict):
        raise ConfigurationError("field sampling must be an object")
    kind = _expect(block, "kind", "sampling.kind", required=True)
    try:
        if kind == "cosine":
            coeffs = _expect(block, "coefficients", "sampling.coefficients")
            if coeffs is None:
                if not isinstance(system, (Rotation, Affine)):
                    raise ConfigurationError("sampling.coefficients is required for cosine sampling")
                coeffs = (1.0,) * system.dimension
            coupling = _expect(block, "coupling", "sampling.coupling", default=1.0)
            return CosineSum(tuple(coeffs), coupling=_as_number(coupling, "sampling.coupling"))
        if kind == "letters":
            values = _expect(block, "values", "sampling.values", required=True)
            if not isinstance(values, dict):
                raise ConfigurationError("field sampling.values must map letters to numbers")
            return LetterValues(values)
        if kind == "direct":
            return Direct()
    except TypeError as exc:
        raise ConfigurationError(f"malformed sampling block: {exc}") from exc
    raise ConfigurationError(f"unknown sampling.kind {kind!r}")


def parse_config(path) -> ExperimentConfig:
    """Load and validate a JSON experiment config, filling documented defaults."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigurationError("config document must be a JSON object")

    system = _parse_system(_expect(doc, "system", "system", required=True))
    sampling = _parse_sampling(doc.get("sampling"), system)
    _check_pairing(system, sampling)

    numerics = doc.get("numerics", {})
    if not isinstance(numerics, dict):
        raise ConfigurationError("field numerics must be an object")
    size = _as_number(_expect(numerics, "N", "numerics.N", default=_DEFAULTS["N"]), "numerics.N", integer=True)
    if size < 2:
        raise ConfigurationError("field numerics.N must be at least 2")
    phases = _as_number(
        _expect(numerics, "phases", "numerics.phases", default=_DEFAULTS["phases"]), "numerics.phases", integer=True
    )
    if phases < 1:
        raise ConfigurationError("field numerics.phases must be at least 1")
    seed = _as_number(_expect(numerics, "seed", "numerics.seed", default=_DEFAULTS["seed"]), "numerics.seed", integer=True)

    grid = numerics.get("grid", {})
    if not isinstance(grid, dict):
        raise ConfigurationError("field numerics.grid must be an object")
    grid_min = grid.get("min")
    grid_max = grid.get("max")
    if grid_min is not None:
        grid_min = _as_number(grid_min, "numerics.grid.min")
    if grid_max is not None:
        grid_max = _as_number(grid_max, "numerics.grid.max")
    if (grid_min is None) != (grid_max is None):
        raise ConfigurationError("numerics.grid needs both min and max (or neither)")
    if grid_min is not None and grid_min >= grid_max:
        raise ConfigurationError("numerics.grid requires min < max")
    grid_points = _as_number(
        _expect(grid, "points", "numerics.grid.points", default=_DEFAULTS["points"]),
        "numerics.grid.points",
        integer=True,
    )
    if grid_points < 2:
        raise ConfigurationError("field numerics.grid.points must be at least 2")

    min_gap_width = numerics.get("min_gap_width")
    if min_gap_width is not None:
        min_gap_width = _as_number(min_gap_width, "numerics.min_gap_width")
        if min_gap_width <= 0:
            raise ConfigurationError("field numerics.min_gap_width must be positive")
    match_tol = _as_number(
        _expect(numerics, "match_tol", "numerics.match_tol", default=_DEFAULTS["match_tol"]), "numerics.match_tol"
    )
    if match_tol <= 0:
        raise ConfigurationError("field numerics.match_tol must be positive")
    coeff_cap = _as_number(
        _expect(numerics, "coeff_cap", "numerics.coeff_cap", default=_DEFAULTS["coeff_cap"]),
        "numerics.coeff_cap",
        integer=True,
    )
    power_cap = _as_number(
        _expect(numerics, "power_cap", "numerics.power_cap", default=_DEFAULTS["power_cap"]),
        "numerics.power_cap",
        integer=True,
    )
    if coeff_cap < 0 or power_cap < 0:
        raise ConfigurationError("numerics caps must be nonnegative")
    eig_tol = _as_number(
        _expect(numerics, "eig_tol", "numerics.eig_tol", default=_DEFAULTS["eig_tol"]), "numerics.eig_tol"
    )
    if eig_tol <= 0:
        raise ConfigurationError("field numerics.eig_tol must be positive")

    output = doc.get("output", {})
    if not isinstance(output, dict):
        raise ConfigurationError("field output must be an object")
    out_dir = str(_expect(output, "dir", "output.dir", default=_DEFAULTS["out_dir"]))

    return ExperimentConfig(
        system=system,
        sampling=sampling,
        size=size,
        phases=phases,
        seed=seed,
        grid_min=grid_min,
        grid_max=grid_max,
        grid_points=grid_points,
        min_gap_width=min_gap_width,
        match_tol=match_tol,
        coeff_cap=coeff_cap,
        power_cap=power_cap,
        eig_tol=eig_tol,
        out_dir=out_dir,
    )


def _echo_system(system) -> dict:
    if isinstance(system, Periodic):
        return {"kind": "periodic", "values": list(system.values)}
    if isinstance(system, Rotation):
        return {"kind": "rotation", "alpha": list(system.alpha)}
    if isinstance(system, Affine):
        return {"kind": "affine", "matrix": [list(r) for r in system.matrix], "shift": list(system.shift)}
    if isinstance(system, SubstitutionSubshift):
        return {"kind": "substitution", "rules": dict(system.substitution.rules)}
    return {"kind": "bernoulli", "values": list(system.values), "weights": list(system.weights), "seed": system.seed}


def _echo_sampling(sampling) -> dict:
    if isinstance(sampling, CosineSum):
        return {"kind": "cosine", "coefficients": list(sampling.coefficients), "coupling": sampling.coupling}
    if isinstance(sampling, LetterValues):
        return {"kind": "letters", "values": dict(sorted(sampling.values.items()))}
    return {"kind": "direct"}


def _echo_config(config: ExperimentConfig) -> dict:
    # everything that determines the numbers, nothing that only names paths,
    # so reports stay byte-identical wherever they are written
    return {
        "system": _echo_system(config.system),
        "sampling": _echo_sampling(config.sampling),
        "numerics": {
            "N": config.size,
            "phases": config.phases,
            "seed": config.seed,
            "grid": {"min": config.grid_min, "max": config.grid_max, "points": config.grid_points},
            "min_gap_width": config.min_gap_width,
            "match_tol": config.match_tol,
            "coeff_cap": config.coeff_cap,
            "power_cap": config.power_cap,
            "eig_tol": config.eig_tol,
        },
    }


def run(config: ExperimentConfig) -> ExperimentReport:
    """Full pipeline: ensemble spectra, gap detection, matching, certification."""
    group = group_for_system(config.system)
    dos = empirical_dos(
        config.system,
        config.sampling,
        config.size,
        config.phases,
        seed=config.seed,
        abs_tol=config.eig_tol,
    )
    gaps = detect_gaps(dos, config.min_gap_width)
    for gap in gaps:
        gap.match = match_label(
            gap.label, group, tol=config.match_tol, coeff_cap=config.coeff_cap, power_cap=config.power_cap
        )
        gap.certified = certify_gap(config.system, config.sampling, gap.midpoint, seed=config.seed)

    lo = config.grid_min if config.grid_min is not None else float(dos.values[0])
    hi = config.grid_max if config.grid_max is not None else float(dos.values[-1])
    energies = np.linspace(lo, hi, config.grid_points)
    values = np.searchsorted(dos.values, energies, side="right") / dos.count

    records = []
    for gap in gaps:
        records.append(
            {
                "left": float(gap.left),
                "right": float(gap.right),
                "width": float(gap.width),
                "label": float(gap.label),
                "match_repr": gap.match.representation if gap.match else "",
                "residual": float(gap.match.residual) if gap.match else None,
                "certified": bool(gap.certified),
            }
        )
    matched = [r for r in records if r["match_repr"]]
    summary = {
        "gaps_found": len(records),
        "gaps_matched": len(matched),
        "max_residual": max((r["residual"] for r in matched), default=None),
    }
    return ExperimentReport(
        group=repr(group),
        gaps=records,
        summary=summary,
        config=_echo_config(config),
        profile_energies=energies,
        profile_values=values,
    )


def write_outputs(report: ExperimentReport, out_dir) -> list:
    """Emit ids.csv, gaps.csv, and report.json into ``out_dir``; returns the paths."""
    directory = Path(out_dir)
    directory.mkdir(parents=True, exist_ok=True)

    ids_path = directory / "ids.csv"
    with ids_path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["E", "k"])
        for e, k in zip(report.profile_energies, report.profile_values):
            writer.writerow([repr(float(e)), repr(float(k))])

    gaps_path = directory / "gaps.csv"
    with gaps_path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["left", "right", "width", "label", "match_repr", "residual", "certified"])
        for rec in report.gaps:
            writer.writerow(
                [
                    repr(rec["left"]),
                    repr(rec["right"]),
                    repr(rec["width"]),
                    repr(rec["label"]),
                    rec["match_repr"],
                    "" if rec["residual"] is None else repr(rec["residual"]),
                    "true" if rec["certified"] else "false",
                ]
            )

    report_path = directory / "report.json"
    payload = {"group": report.group, "gaps": report.gaps, "summary": report.summary, "config": report.config}
    report_path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return [ids_path, gaps_path, report_path]


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would sys.exit(2); config problems are exit 1 here
        raise ConfigurationError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="gaplab", description="Gap labels for 1-d ergodic Schroedinger operators.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (
        ("ids", "compute the integrated density of states profile"),
        ("gaps", "detect spectral gaps and match their labels"),
        ("labels", "print the label group for the configured system"),
        ("verify", "run the pipeline and fail unless every gap is matched"),
    ):
        cmd = sub.add_parser(name, help=text)
        cmd.add_argument("--config", required=True, help="path to the JSON experiment config")
        cmd.add_argument("--out-dir", default=None, help="override the output directory")
        cmd.add_argument("--seed", type=int, default=None, help="override the ensemble seed")
    return parser


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
        config = parse_config(args.config)
        if args.seed is not None:
            config.seed = args.seed
        if args.out_dir is not None:
            config.out_dir = args.out_dir

        if args.command == "labels":
            group = group_for_system(config.system)
            print(repr(group))
            return 0

        report = run(config)
        paths = write_outputs(report, config.out_dir)
        found = report.summary["gaps_found"]
        matched = report.summary["gaps_matched"]
        print(f"group: {report.group}")
        print(f"gaps found: {found}, matched: {matched}")
        for rec in report.gaps:
            tag = rec["match_repr"] if rec["match_repr"] else "(unmatched)"
            cert = "certified" if rec["certified"] else "uncertified"
            print(
                f"  [{rec['left']:+.6f}, {rec['right']:+.6f}]  label {rec['label']:.6f}  {tag}  {cert}"
            )
        print("wrote: " + ", ".join(str(p) for p in paths))
        if args.command == "verify" and matched < found:
            print(f"verification FAILED: {found - matched} of {found} gaps unmatched", file=sys.stderr)
            return 4
        return 0
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    except (NumericalError, ResourceLimitError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 2
    except GaplabError as exc:  # pragma: no cover - safety net for new subclasses
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
