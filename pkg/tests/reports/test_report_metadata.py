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
import json
import math
from pathlib import Path

import numpy as np
import pytest

from skewbm.analysis.errors import BetaOutOfRange
from skewbm.analysis.gaps import AlphaRule, CantorSpec
from skewbm.analysis.measure import (
    AtomSpec,
    CheckedMeasure,
    DensityPiece,
    SignedMeasureSpec,
    validate_measure,
)
from skewbm.reports.analysis import (
    analyze_measure,
    density_rows,
    effective_rows,
    study_cantor,
)
from skewbm.reports.metadata import (
    AnalysisReport,
    CantorStudy,
    load_report,
    save_report,
)
from skewbm.reports.render import render_analysis, render_cantor, verdict


def skew(alpha: float) -> CheckedMeasure:
    return validate_measure(
        SignedMeasureSpec(atoms=[AtomSpec(location=0.0, weight=alpha)]))


def test_analyze_skew() -> None:
    run = analyze_measure(skew(0.3), spec_hash="0" * 64)
    report = run.report

    assert report.exists == "true"
    assert report.unique == "true"
    assert report.interval_count == 1
    assert set(report.conditions) == {"1", "2", "3", "4", "5"}
    assert report.conservative is not None
    assert report.conservative.verdict == "conservative"
    assert report.effective_interval_count == 1

    rows = density_rows(run)
    assert [row["n"] for row in rows] == [0]
    assert all(row["c"] > 0 for row in rows)
    assert effective_rows(run)[0]["lower"] == -math.inf


def test_analyze_without_existence() -> None:
    run = analyze_measure(skew(1.0), spec_hash="0" * 64)

    assert run.report.exists == "false"
    assert run.density is None
    assert run.report.effective_intervals == []
    with pytest.raises(ValueError):
        density_rows(run)
    with pytest.raises(ValueError):
        effective_rows(run)


def test_scale_does_not_change_verdicts() -> None:
    reports = [
        analyze_measure(skew(0.3), spec_hash="0" * 64, scale=scale).report
        for scale in (1e-3, 1.0, 1e3)
    ]

    for report in reports[1:]:
        assert report.exists == reports[0].exists
        assert report.unique == reports[0].unique
        assert report.effective_intervals == reports[0].effective_intervals
        assert report.conservative == reports[0].conservative

    with pytest.raises(ValueError):
        analyze_measure(skew(0.3), spec_hash="0" * 64, scale=0.0)


def random_barrier_measure(rng: np.random.Generator) -> CheckedMeasure:
    """Atoms on distinct integers, about half of them of weight ±1, with
    logarithmic pieces next to some of the barriers."""
    count = int(rng.integers(1, 5))
    locations = np.sort(
        rng.choice(np.arange(-6, 7), size=count, replace=False))
    atoms = []
    pieces = []
    for y in locations.astype(float):
        if rng.random() < 0.5:
            atoms.append(AtomSpec(location=y, weight=rng.uniform(-0.9, 0.9)))
            continue
        atoms.append(AtomSpec(location=y, weight=rng.choice([-1.0, 1.0])))
        if rng.random() < 0.5:
            lo, hi = (y - 0.4, y) if rng.random() < 0.5 else (y, y + 0.4)
            pieces.append(
                DensityPiece(lo=lo,
                             hi=hi,
                             sign=int(rng.choice([-1, 1])),
                             expression={
                                 "kind": "power",
                                 "c": rng.choice([0.25, 0.5, 1.0]),
                                 "x0": y,
                                 "p": -1
                             }))
    return validate_measure(
        SignedMeasureSpec(atoms=atoms, density_pieces=pieces))


def scale_free_part(report: AnalysisReport) -> tuple:
    conservative = report.conservative
    semimartingale = report.semimartingale
    return (
        report.exists,
        report.unique,
        report.irreducible_exists,
        report.conditions,
        [(b.z, b.side, b.label) for b in report.barriers],
        [(row.lower, row.upper, row.closed_left, row.closed_right)
         for row in report.effective_intervals],
        None if conservative is None else
        (conservative.verdict, [(end.interval, end.end, end.explodes)
                                for end in conservative.ends]),
        None if semimartingale is None else semimartingale.verdict,
    )


@pytest.mark.slow
def test_random_measures_are_scale_free() -> None:
    rng = np.random.default_rng(seed=7)

    for _ in range(100):
        m = random_barrier_measure(rng)
        parts = [
            scale_free_part(
                analyze_measure(m, spec_hash="0" * 64, scale=scale).report)
            for scale in (1e-3, 1.0, 1e3)
        ]

        assert parts[0] == parts[1] == parts[2]


def test_report_roundtrip(tmpdir: str | Path) -> None:
    path = Path(tmpdir) / "report.json"
    report = analyze_measure(skew(0.3), spec_hash="0" * 64).report

    save_report(report, path)

    raw = json.loads(path.read_text(encoding="utf-8"))
    assert raw["intervals"][0]["lower"] == "-inf"
    assert raw["intervals"][0]["upper"] == "inf"
    loaded = load_report(path, AnalysisReport)
    assert loaded == report
    assert loaded.intervals[0].lower == -math.inf


def test_report_from_newer_version(tmpdir: str | Path) -> None:
    path = Path(tmpdir) / "report.json"
    report = AnalysisReport(skewbm_version="99.0.0",
                            spec_hash="0" * 64,
                            interval_count=0,
                            exists="unknown")
    save_report(report, path)

    with pytest.raises(ValueError, match="outdated"):
        load_report(path, AnalysisReport)


def test_study_cantor(tmpdir: str | Path) -> None:
    spec = CantorSpec(alphas=AlphaRule(alpha=0.2), depth=6)

    study = study_cantor(spec, spec_hash="0" * 64)

    assert study.report.verdict == "infinitely_many_irreducible"
    assert study.beta == pytest.approx(0.45)
    assert [row.gaps for row in study.census] == [1, 2, 4, 8, 16, 32]
    assert study.census[2].constant == pytest.approx(0.45**2)
    assert len(study.series_terms) == 6

    path = Path(tmpdir) / "cantor.json"
    save_report(study, path)
    assert load_report(path, CantorStudy) == study


def test_study_cantor_explicit_beta() -> None:
    spec = CantorSpec(alphas=AlphaRule(alpha=0.2), depth=4)

    assert study_cantor(spec, "0" * 64, beta=0.48).beta == 0.48
    with pytest.raises(BetaOutOfRange):
        study_cantor(spec, "0" * 64, beta=0.3)


def test_unique_cantor_has_no_constants() -> None:
    spec = CantorSpec(alphas=AlphaRule(alpha=0.3), depth=4)

    study = study_cantor(spec, "0" * 64)

    assert study.beta is None
    assert all(row.constant is None for row in study.census)


def test_render() -> None:
    report = analyze_measure(skew(0.3), spec_hash="0" * 64).report
    study = study_cantor(CantorSpec(alphas=AlphaRule(alpha=0.2), depth=3),
                         "0" * 64)

    text = render_analysis(report, color=False)
    assert "conservative: conservative" in text
    assert "(1)" in text
    assert "\x1b[" not in text
    assert "infinitely_many_irreducible" in render_cantor(study, color=False)

    assert verdict("true", color=False) == "true"
    assert verdict("sideways") == "sideways"
