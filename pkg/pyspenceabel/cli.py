#!/usr/bin/python3
"""Command line front end: evaluation, identity checks, solving, stability trials and plot data."""

import argparse
import csv
import io
import json
import logging.config
import os
import sys
from dataclasses import asdict, dataclass, fields
from typing import Any, Optional, Sequence

import numpy as np

from pyspenceabel.const import (
    ABS_TOL_PIPELINE,
    COCYCLE_TOL,
    CONFIG_ENV,
    DEFAULT_XS,
    EVAL_ROGERS_MAX_DIFF,
    FIVE_TERM_TOL,
    GRID_MARGIN,
    REFLECTION_TOL,
    REL_TOL_DEFAULT,
    SIMPLEX_GRID_POINTS,
    SIX_TERM_TOL,
    SOLVE_RESIDUAL_PAIRS,
    SOLVER_XS,
    TWO_PI,
    UNIT_GRID_POINTS,
    ZETA2,
)
from pyspenceabel.dilog.formula import arbitrate_variant, rogers_new_formula
from pyspenceabel.dilog.orientation import f_flat_closed
from pyspenceabel.dilog.reference import rogers_reference
from pyspenceabel.geometry.circle import cocycle_defect
from pyspenceabel.geometry.config import random_oriented_angles
from pyspenceabel.models import (
    DegenerateConfiguration,
    DomainError,
    EvalMode,
    FormulaVariant,
    Identity,
    InvalidInput,
    InvalidRhs,
    OutputFormat,
    ToleranceNotMet,
)
from pyspenceabel.operators import (
    five_term_defect,
    p1_grid,
    p2_grid,
    p3_grid,
    sample,
    six_term,
    spence_abel_residual,
)
from pyspenceabel.quadrature import QuadConfig
from pyspenceabel.rhs import cosine_rhs, load_rhs
from pyspenceabel.solver.primitive import PerturbedSystem, solve_grid
from pyspenceabel.stability import run_trials
from pyspenceabel.utils import resolve_threads

_LOGGER = logging.getLogger(__name__)

COCYCLE_SAMPLES = 200

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_INPUT = 2


def logging_config(level: str = "INFO", log_file: Optional[str] = None) -> dict:
    """dictConfig for the command line: stderr, plus a rotating file if requested."""
    handlers = {"default": {"class": "logging.StreamHandler", "formatter": "plain", "stream": "ext://sys.stderr"}}
    if log_file:
        handlers["file"] = {
            "class": "logging.handlers.RotatingFileHandler",
            "formatter": "plain",
            "filename": log_file,
            "maxBytes": 1024 * 1024 * 10,
            "backupCount": 10,
        }
    return {
        "version": 1,
        "disable_existing_loggers": False,
        "handlers": handlers,
        "formatters": {
            "plain": {
                "format": "%(levelname)s [%(asctime)s] %(name)s - %(message)s",
                "datefmt": "%Y-%m-%d %H:%M:%S",
            }
        },
        "loggers": {"pyspenceabel": {"handlers": list(handlers), "level": level.upper()}},
    }


@dataclass
class RunConfig:
    """Resolved settings of one command line run."""

    command: str
    grid_n: int = SIMPLEX_GRID_POINTS
    abs_tol: float = ABS_TOL_PIPELINE
    rel_tol: float = REL_TOL_DEFAULT
    seed: int = 0
    output_path: Optional[str] = None
    format: OutputFormat = OutputFormat.CSV
    formula_variant: FormulaVariant = FormulaVariant.BODY

    def __post_init__(self):
        try:
            self.grid_n = int(self.grid_n)
            self.abs_tol = float(self.abs_tol)
            self.rel_tol = float(self.rel_tol)
            self.seed = int(self.seed)
            self.format = OutputFormat(self.format)
            self.formula_variant = FormulaVariant(self.formula_variant)
        except (TypeError, ValueError) as err:
            raise InvalidInput(f"Invalid configuration value: {err}") from err
        if self.grid_n < 2:
            raise InvalidInput(f"grid_n must be at least 2, got {self.grid_n}")
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise InvalidInput("Tolerances must be positive")

    @classmethod
    def resolve(cls, args: argparse.Namespace) -> "RunConfig":
        """Defaults < config file < flags."""
        values: dict[str, Any] = {"command": args.command}
        if args.config:
            values.update(_read_config_file(args.config))
        flags = {
            "grid_n": args.grid_n,
            "abs_tol": args.abs_tol,
            "rel_tol": args.rel_tol,
            "seed": args.seed,
            "output_path": args.out,
            "format": args.format,
            "formula_variant": args.formula_variant,
        }
        values.update({key: value for key, value in flags.items() if value is not None})
        return cls(**values)

    def quad_config(self) -> QuadConfig:
        """Quadrature settings of the run."""
        return QuadConfig.pipeline(abs_tol=self.abs_tol, rel_tol=self.rel_tol)

    def to_dict(self) -> dict:
        """JSON-friendly form."""
        data = asdict(self)
        data["format"] = self.format.value
        data["formula_variant"] = self.formula_variant.value
        return data


def _read_config_file(path: str) -> dict:
    known = {f.name for f in fields(RunConfig)} - {"command"}
    try:
        with open(path, encoding="utf-8") as file:
            data = json.load(file)
    except (OSError, json.JSONDecodeError) as err:
        raise InvalidInput(f"Cannot read config file {path}: {err}") from err
    if not isinstance(data, dict):
        raise InvalidInput(f"Config file {path} must hold a JSON object")
    unknown = set(data) - known
    if unknown:
        raise InvalidInput(f"Unknown config keys in {path}: {sorted(unknown)}")
    return data


def _format_cell(value: Any) -> str:
    if isinstance(value, bool) or value is None or isinstance(value, str):
        return "" if value is None else str(value)
    return format(float(value), ".17g")


def write_table(
    run: RunConfig, columns: Sequence[str], rows: Sequence[Sequence[Any]], metadata: Optional[dict] = None
) -> None:
    """Emit rows as CSV (17 significant digits) or as one JSON document."""
    if run.format is OutputFormat.CSV:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(columns)
        writer.writerows([_format_cell(v) for v in row] for row in rows)
        text = buffer.getvalue()
    else:
        document = {
            "config": run.to_dict(),
            "columns": list(columns),
            "rows": [[_json_cell(v) for v in row] for row in rows],
            "metadata": metadata or {},
        }
        text = json.dumps(document, sort_keys=True, indent=2) + "\n"
    _emit(run, text)


def _json_cell(value: Any) -> Any:
    if isinstance(value, (bool, str)) or value is None:
        return value
    return float(value)


def _emit(run: RunConfig, text: str) -> None:
    if run.output_path:
        with open(run.output_path, "w", encoding="utf-8", newline="") as file:
            file.write(text)
    else:
        sys.stdout.write(text)


def _parse_xs(raw: Optional[str], default: Sequence[float]) -> list[float]:
    if raw is None:
        return list(default)
    try:
        xs = [float(item) for item in raw.split(",") if item.strip()]
    except ValueError as err:
        raise InvalidInput(f"--xs takes comma separated numbers, got {raw!r}") from err
    if not xs or not all(0.0 < x < 1.0 for x in xs):
        raise InvalidInput(f"--xs values must lie in (0, 1), got {raw!r}")
    return xs


def cmd_eval_rogers(run: RunConfig, xs: Sequence[float], mode: EvalMode, max_diff: float) -> int:
    """Rows (x, L₂ by the integral formula, L₂ by the series, difference)."""
    cfg = run.quad_config()
    reference = [float(rogers_reference(x)) for x in xs] if mode is not EvalMode.NEW_FORMULA else []
    new = [rogers_new_formula(x, cfg, run.formula_variant) for x in xs] if mode is not EvalMode.REFERENCE else []
    metadata: dict[str, Any] = {"formula_variant": run.formula_variant.value}
    if mode is EvalMode.REFERENCE:
        write_table(run, ["x", "L2_ref"], list(zip(xs, reference)), metadata)
        return EXIT_OK
    if mode is EvalMode.NEW_FORMULA:
        write_table(run, ["x", "L2_new"], list(zip(xs, new)), metadata)
        return EXIT_OK

    diffs = [abs(a - b) for a, b in zip(new, reference)]
    try:
        metadata["arbitration"] = arbitrate_variant(xs, cfg, max_diff, {run.formula_variant: new}).as_dict()
    except ToleranceNotMet as err:
        metadata["arbitration"] = {"winner": None, "error": str(err)}
    metadata["max_diff"] = max(diffs)
    _LOGGER.info("eval-rogers: max difference %.3e (allowed %.1e)", max(diffs), max_diff)
    write_table(run, ["x", "L2_new", "L2_ref", "abs_diff"], list(zip(xs, new, reference, diffs)), metadata)
    if max(diffs) > max_diff:
        _LOGGER.warning("Integral formula deviates by %.3e > %.1e", max(diffs), max_diff)
        return EXIT_FAILURE
    return EXIT_OK


def _identity_residual(identity: Identity, run: RunConfig) -> tuple[float, float]:
    if identity is Identity.FIVE_TERM:
        residual = spence_abel_residual(rogers_reference, None, ZETA2, p2_grid(run.grid_n, GRID_MARGIN))
        return residual.sup_abs, FIVE_TERM_TOL
    if identity is Identity.SIX_TERM:
        x, y, z = p3_grid(min(run.grid_n, 30), GRID_MARGIN)
        return float(np.max(np.abs(six_term(cosine_rhs(1), x, y, z)))), SIX_TERM_TOL
    if identity is Identity.REFLECTION:
        u = p1_grid(UNIT_GRID_POINTS, GRID_MARGIN)
        return float(np.max(np.abs(sample(rogers_reference, u) + sample(rogers_reference, 1 - u) - ZETA2))), REFLECTION_TOL
    rng = np.random.default_rng(run.seed)
    angles = np.array([rng.permutation(random_oriented_angles(rng, 5)) for _ in range(COCYCLE_SAMPLES)]).T
    z1, z2, z3, z4, z = np.exp(1j * angles)
    return float(np.max(cocycle_defect(z1, z2, z3, z4, z))), COCYCLE_TOL


def cmd_check_identities(run: RunConfig, which: Sequence[Identity]) -> int:
    """Rows (identity, residual, tolerance, passed)."""
    rows = []
    for identity in which:
        residual, tolerance = _identity_residual(identity, run)
        rows.append((identity.value, residual, tolerance, residual <= tolerance))
        _LOGGER.info("%s: residual %.3e (tolerance %.1e)", identity.value, residual, tolerance)
    write_table(run, ["identity", "residual", "tolerance", "passed"], rows)
    return EXIT_OK if all(row[3] for row in rows) else EXIT_FAILURE


def cmd_solve(run: RunConfig, rhs_spec: str, C: float, xs: Sequence[float], residual_pairs: int) -> int:
    """Rows (x, L(x)) of the solution of the system (R, C), with a residual summary."""
    cfg = run.quad_config()
    workers = resolve_threads()
    system = PerturbedSystem(load_rhs(rhs_spec), C)
    values = dict(zip(xs, solve_grid(system, xs, cfg, workers).tolist()))

    def solved(points):
        todo = [p for p in dict.fromkeys(points) if p not in values]
        values.update(zip(todo, solve_grid(system, todo, cfg, workers).tolist()))
        return np.array([values[p] for p in points])

    rows = [(x, values[x]) for x in xs]
    metadata: dict[str, Any] = {"rhs": rhs_spec, "C": C}
    reflection = solved(list(xs)) + solved([1.0 - x for x in xs]) - C
    metadata["reflection_residual"] = float(np.max(np.abs(reflection)))
    pairs = [(x, y) for i, x in enumerate(sorted(xs)) for y in sorted(xs)[i + 1 :]][:residual_pairs]
    if pairs:
        x, y = (np.array(v) for v in zip(*pairs))

        def L(u):
            return solved(np.ravel(u).tolist()).reshape(np.shape(u))

        defect = five_term_defect(L, system.R, C, x, y)
        metadata["five_term_residual"] = float(np.max(np.abs(defect)))
    _LOGGER.info("solve: %s", json.dumps(metadata, sort_keys=True))
    write_table(run, ["x", "L"], rows, metadata)
    return EXIT_OK


def cmd_stability(run: RunConfig, amplitude: float, modes: int, trials: int, shift: float) -> int:
    """One StabilityReport per trial: JSON lines, or CSV rows."""
    reports = run_trials(run.seed, amplitude, modes, trials, shift)
    if run.format is OutputFormat.JSON:
        _emit(run, "".join(report.to_json() + "\n" for report in reports))
    else:
        write_table(
            run,
            ["trial", "epsilon", "c_offset", "deviation", "bound", "ratio", "exact"],
            [
                (i, r.epsilon, r.c_offset, r.deviation, r.bound, r.ratio, r.exact)
                for i, r in enumerate(reports)
            ],
        )
    failed = [i for i, report in enumerate(reports) if not report.passed]
    if failed:
        _LOGGER.warning("Stability bound violated in trials %s", failed)
        return EXIT_FAILURE
    return EXIT_OK


def cmd_plot_flat(run: RunConfig) -> int:
    """Rows (phi1, phi2, F) of the closed-form F♭ on an Ω⁺ grid."""
    phi = np.linspace(GRID_MARGIN, TWO_PI - GRID_MARGIN, run.grid_n)
    p1, p2 = np.meshgrid(phi, phi, indexing="ij")
    mask = p1 < p2
    values = f_flat_closed(p1[mask], p2[mask], run.formula_variant)
    write_table(run, ["phi1", "phi2", "F"], list(zip(p1[mask], p2[mask], values)))
    return EXIT_OK


def main_parser() -> argparse.ArgumentParser:
    """Create argument parser."""
    parser = argparse.ArgumentParser(description="Perturbed Spence-Abel equation toolkit")
    subparsers = parser.add_subparsers(dest="command")
    subparsers.required = True

    eval_parser = subparsers.add_parser("eval-rogers", help="Evaluate Rogers' dilogarithm.")
    eval_parser.add_argument("--xs", help="comma separated points in (0, 1)", default=None)
    eval_parser.add_argument("--mode", type=EvalMode, choices=list(EvalMode), default=EvalMode.BOTH)
    eval_parser.add_argument("--max-diff", type=float, default=EVAL_ROGERS_MAX_DIFF)

    check_parser = subparsers.add_parser("check-identities", help="Check functional identities.")
    check_parser.add_argument("--which", type=Identity, choices=list(Identity), nargs="+", default=list(Identity))

    solve_parser = subparsers.add_parser("solve", help="Solve a perturbed system.")
    solve_parser.add_argument("--rhs", help="builtin id (zero, tau3:cosK) or JSON file", default="zero")
    solve_parser.add_argument("--C", type=float, default=ZETA2, dest="C")
    solve_parser.add_argument("--xs", default=None)
    solve_parser.add_argument("--residual-pairs", type=int, default=SOLVE_RESIDUAL_PAIRS)

    stability_parser = subparsers.add_parser("stability", help="Run Hyers-Ulam stability trials.")
    stability_parser.add_argument("--amplitude", type=float, default=0.01)
    stability_parser.add_argument("--modes", type=int, default=3)
    stability_parser.add_argument("--trials", type=int, default=10)
    stability_parser.add_argument("--shift", type=float, default=0.0)

    _ = subparsers.add_parser("plot-flat", help="Emit the closed-form F♭ on a grid.")

    _add_default_args(parser)
    parser.set_defaults(func=parse_command)

    return parser


def parse_command(args: argparse.Namespace, run: RunConfig) -> int:
    """Parse command."""
    if args.command == "eval-rogers":
        return cmd_eval_rogers(run, _parse_xs(args.xs, DEFAULT_XS), args.mode, args.max_diff)
    if args.command == "check-identities":
        return cmd_check_identities(run, args.which)
    if args.command == "solve":
        if args.residual_pairs < 0:
            raise InvalidInput("--residual-pairs must be non-negative")
        return cmd_solve(run, args.rhs, args.C, _parse_xs(args.xs, SOLVER_XS), args.residual_pairs)
    if args.command == "stability":
        return cmd_stability(run, args.amplitude, args.modes, args.trials, args.shift)
    if args.command == "plot-flat":
        return cmd_plot_flat(run)
    raise NotImplementedError(f"Command {args.command} not implemented.")


def _add_default_args(parser: argparse.ArgumentParser):
    """Add the options shared by all commands."""
    parser.add_argument("--config", help="JSON config file", default=os.environ.get(CONFIG_ENV))
    parser.add_argument("--grid-n", type=int, default=None)
    parser.add_argument("--abs-tol", type=float, default=None)
    parser.add_argument("--rel-tol", type=float, default=None)
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--out", help="output file (default stdout)", default=None)
    parser.add_argument("--format", choices=[f.value for f in OutputFormat], default=None)
    parser.add_argument("--formula-variant", choices=[v.value for v in FormulaVariant], default=None)
    parser.add_argument("--log-level", default="INFO", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    parser.add_argument("--log-file", default=None)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Parse arguments, run the command and map errors to exit codes."""
    parser = main_parser()
    args = parser.parse_args(argv)
    logging.config.dictConfig(logging_config(args.log_level, args.log_file))

    try:
        run = RunConfig.resolve(args)
        _LOGGER.info("Resolved config: %s", json.dumps(run.to_dict(), sort_keys=True))
        return args.func(args, run)
    except (InvalidInput, InvalidRhs, DomainError, DegenerateConfiguration) as err:
        _LOGGER.error("%s", err)
        return EXIT_INPUT
    except ToleranceNotMet as err:
        _LOGGER.error("%s", err)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
