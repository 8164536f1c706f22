# Copyright 2023-2024 Google LLC
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Command line front end.

Exit codes: 0 when a general skew Brownian motion exists (or a Cantor verdict
is decided), 2 when it does not or when that cannot be decided, 1 on input
errors.
"""

import argparse
import logging
import math
from pathlib import Path
import sys
from typing import Sequence

from skewbm.analysis.gaps import AlphaRule, CantorSpec
from skewbm.analysis.measure import CheckedMeasure
from skewbm.reports.analysis import (
    AnalysisRun,
    analyze_measure,
    density_rows,
    effective_rows,
    study_cantor,
)
from skewbm.reports.metadata import save_report
from skewbm.reports.render import render_analysis, render_cantor
from skewbm.reports.spec_file import LoadedSpec, load_spec, normalized_digest
from skewbm.simulation.ensemble import (
    PathEnsemble,
    SimulationOptions,
    simulate_grid_walk,
    simulate_paths,
)
from skewbm.simulation.estimators import (
    drift_consistency_check,
    estimate_local_time,
    estimate_occupation,
)
from skewbm.simulation.export import write_paths, write_statistics
from skewbm.simulation.natural_scale import natural_scale

EXIT_EXISTS: int = 0
EXIT_INPUT_ERROR: int = 1
EXIT_NO_EXISTENCE: int = 2

# Local time windows are this many step resolutions wide by default.
WINDOW_RESOLUTIONS: float = 4.0

# Levels tracked by default, at most this many atoms.
MAX_DEFAULT_LEVELS: int = 16

_logger = logging.getLogger("skewbm.cli")


def _exit_code(run: AnalysisRun) -> int:
    return EXIT_EXISTS if run.report.exists == "true" else EXIT_NO_EXISTENCE


def _color(args: argparse.Namespace) -> bool:
    return not args.no_color and sys.stdout.isatty()


def _run(args: argparse.Namespace,
         loaded: LoadedSpec) -> tuple[CheckedMeasure, AnalysisRun]:
    m = loaded.checked(show_progressbar=args.progress)
    target = "maximally_glued" if args.beta is not None else args.target
    run = analyze_measure(m,
                          loaded.digest,
                          scale=args.scale,
                          target=target,
                          beta=args.beta)
    return m, run


def cmd_analyze(args: argparse.Namespace) -> int:
    """Write the analysis report of a spec file and print its summary."""
    loaded = load_spec(args.spec)
    _, run = _run(args, loaded)
    out = args.out or args.spec.with_suffix(".report.json")
    save_report(run.report, out)
    print(render_analysis(run.report, color=_color(args)))
    _logger.info("Report written to %s", out)
    return _exit_code(run)


def cmd_construct(args: argparse.Namespace) -> int:
    """Write ρ with its constants and the effective intervals as CSV."""
    loaded = load_spec(args.spec)
    _, run = _run(args, loaded)
    out: Path = args.out or Path(".")
    out.mkdir(parents=True, exist_ok=True)
    save_report(run.report, out / "report.json")
    if run.density is None:
        _logger.error("Existence is %s, no density to construct",
                      run.report.exists)
        return EXIT_NO_EXISTENCE
    write_statistics(density_rows(run), out / "density.csv")
    write_statistics(effective_rows(run), out / "effective_intervals.csv")
    print(render_analysis(run.report, color=_color(args)))
    return EXIT_EXISTS


def _levels(args: argparse.Namespace, m: CheckedMeasure) -> list[float]:
    if args.level:
        return list(args.level)
    finite = not (m.infinite_rules or m.density_pieces or m.gaps is not None)
    if finite and 0 < len(m.atom_locations) <= MAX_DEFAULT_LEVELS:
        return [float(z) for z in m.atom_locations]
    return [args.x0]


def _simulate(args: argparse.Namespace, m: CheckedMeasure,
              run: AnalysisRun) -> PathEnsemble:
    dt = args.dt
    if args.scheme == "grid":
        resolution = args.spacing
    else:
        dt = dt if dt is not None else args.horizon * 1e-4
        resolution = math.sqrt(dt)
    epsilon = args.epsilon or WINDOW_RESOLUTIONS * resolution
    options = SimulationOptions(
        windows=[(z, epsilon) for z in _levels(args, m)],
        show_progressbar=args.progress,
    )
    if args.scheme == "grid":
        return simulate_grid_walk(m,
                                  args.x0,
                                  args.horizon,
                                  spacing=args.spacing,
                                  n_paths=args.paths,
                                  seed=args.seed,
                                  options=options)
    assert run.effective is not None
    k = run.effective.locate(args.x0)
    transform = natural_scale(run.effective, interval=0 if k is None else k)
    return simulate_paths(transform,
                          args.x0,
                          args.horizon,
                          dt=dt,
                          n_paths=args.paths,
                          seed=args.seed,
                          options=options)


def _occupation_rows(e: PathEnsemble,
                     levels: list[float]) -> list[dict[str, str | float]]:
    rows: list[dict[str, str | float]] = []
    for z in levels:
        for lo, hi in ((z, math.inf), (-math.inf, z)):
            estimate, stderr = estimate_occupation(e, lo, hi, e.horizon)
            rows.append({
                "set": f"({lo:g},{hi:g})",
                "at": e.horizon,
                "estimate": estimate,
                "stderr": stderr,
            })
    return rows


def cmd_simulate(args: argparse.Namespace) -> int:
    """Simulate paths and write paths, occupation, local time and drift
    files."""
    loaded = load_spec(args.spec)
    m, run = _run(args, loaded)
    if run.report.exists != "true":
        if not args.force or args.scheme != "grid":
            _logger.error(
                "Existence is %s, only the grid walk may be forced "
                "(--force --scheme grid)", run.report.exists)
            return EXIT_NO_EXISTENCE
        _logger.warning("Existence is %s, simulating the grid walk anyway",
                        run.report.exists)
    e = _simulate(args, m, run)
    out: Path = args.out or Path(".")
    out.mkdir(parents=True, exist_ok=True)
    write_paths(e, out / "paths.csv")
    levels = _levels(args, m)
    write_statistics(_occupation_rows(e, levels), out / "occupation.csv")
    write_statistics([
        estimate_local_time(e, z, eps, e.horizon).model_dump(
            exclude={"per_path"}) for z, eps in e.occupation
    ], out / "local_time.csv")
    try:
        drift = drift_consistency_check(e, m)
    except ValueError as error:
        _logger.warning("Drift consistency check skipped: %s", error)
    else:
        write_statistics([drift.model_dump()], out / "drift.csv")
    return EXIT_EXISTS if run.report.exists == "true" else EXIT_NO_EXISTENCE


def cmd_cantor(args: argparse.Namespace) -> int:
    """Decide the regime of a Cantor construction and print its census."""
    if args.spec is not None:
        loaded = load_spec(args.spec)
        if loaded.cantor is None:
            raise ValueError(f"{args.spec} does not describe a Cantor "
                             "structure")
        spec = loaded.cantor
        if args.depth is not None:
            spec = spec.model_copy(update={"depth": args.depth})
    else:
        if args.alpha is None:
            raise ValueError("Either a spec file or --alpha is needed")
        spec = CantorSpec(alphas=AlphaRule(alpha=args.alpha),
                          depth=args.depth or 20,
                          gap_model=args.gap_model)
    study = study_cantor(spec, normalized_digest(spec), beta=args.beta)
    if args.out is not None:
        save_report(study, args.out)
    print(render_cantor(study, color=_color(args)))
    if study.report.verdict == "unknown":
        return EXIT_NO_EXISTENCE
    return EXIT_EXISTS


def _common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--out",
                        type=Path,
                        default=None,
                        help="Report file or output directory")
    parser.add_argument("--beta",
                        type=float,
                        default=None,
                        help="Level ratio of Cantor witness constants")
    parser.add_argument("--no-color",
                        action="store_true",
                        help="Plain text output")
    parser.add_argument("--progress",
                        action="store_true",
                        help="Show progress bars")


def _analysis_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("spec", type=Path, help="TOML spec file")
    parser.add_argument("--scale",
                        type=float,
                        default=1.0,
                        help="Multiply every constant cₙ by this factor")
    parser.add_argument("--target",
                        choices=["any_valid", "maximally_glued"],
                        default="any_valid",
                        help="How to choose the constants cₙ")
    _common(parser)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="skewbm",
        description="Existence, structure and simulation of general skew "
        "Brownian motions")
    parser.add_argument("--verbose",
                        "-v",
                        action="store_true",
                        help="Log debug messages")
    commands = parser.add_subparsers(dest="command", required=True)

    analyze = commands.add_parser("analyze", help="Decide existence")
    _analysis_options(analyze)
    analyze.set_defaults(handler=cmd_analyze)

    construct = commands.add_parser("construct",
                                    help="Emit ρ and the constants cₙ")
    _analysis_options(construct)
    construct.set_defaults(handler=cmd_construct)

    simulate = commands.add_parser("simulate", help="Monte Carlo paths")
    _analysis_options(simulate)
    simulate.add_argument("--x0", type=float, default=0.0)
    simulate.add_argument("--horizon", "-T", type=float, default=1.0)
    simulate.add_argument("--dt", type=float, default=None)
    simulate.add_argument("--paths", type=int, default=1000)
    simulate.add_argument("--seed", type=int, default=0)
    simulate.add_argument("--scheme",
                          choices=["euler", "grid"],
                          default="euler")
    simulate.add_argument("--spacing",
                          type=float,
                          default=0.01,
                          help="Grid spacing of the random walk scheme")
    simulate.add_argument("--epsilon",
                          type=float,
                          default=None,
                          help="Half width of the local time windows")
    simulate.add_argument("--level",
                          type=float,
                          action="append",
                          help="Level z of occupation and local time, "
                          "repeatable")
    simulate.add_argument("--force",
                          action="store_true",
                          help="Run the grid walk even without existence")
    simulate.set_defaults(handler=cmd_simulate)

    cantor = commands.add_parser("cantor", help="Cantor regimes")
    cantor.add_argument("spec",
                        type=Path,
                        nargs="?",
                        default=None,
                        help="TOML spec with a [cantor] table")
    cantor.add_argument("--alpha", type=str, default=None)
    cantor.add_argument("--depth", type=int, default=None)
    cantor.add_argument("--gap-model",
                        choices=["middle_proportion", "power_law"],
                        default="power_law")
    _common(cantor)
    cantor.set_defaults(handler=cmd_cantor)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    """Entry point of the `skewbm` command."""
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s")
    try:
        return int(args.handler(args))
    except (ValueError, ArithmeticError, LookupError, OSError) as error:
        _logger.error("%s", error)
        return EXIT_INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
