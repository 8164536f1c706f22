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
"""The pipelines behind `skewbm analyze`, `construct` and `cantor`."""

import dataclasses
import logging

import numpy as np

from skewbm.analysis.errors import BetaOutOfRange
from skewbm.analysis.extended_real import weakest
from skewbm.analysis.gaps import (
    CantorSpec,
    length_ratio,
    level_counts,
    level_lengths,
)
from skewbm.analysis.measure import CheckedMeasure
from skewbm.analysis.profile import ProfileOptions
from skewbm.analysis.types import ConstantsTargetT
from skewbm.cantor.models import cantor_verdict
from skewbm.reports.metadata import (
    MAX_REPORT_ROWS,
    AnalysisReport,
    CantorStudy,
    ConservativeSummary,
    EffectiveRow,
    EndRow,
    IntervalRow,
    LevelRow,
)
from skewbm.structure.barriers import BarrierClassification, classify_barriers
from skewbm.structure.connection import ConstantChoice, construct_constants
from skewbm.structure.conservative import ConservativeReport, check_conservative
from skewbm.structure.existence import (
    ExistenceReport,
    StructureAnalysis,
    analyze_structure,
    check_existence_conditions,
)
from skewbm.structure.semimartingale import (
    SemimartingaleReport,
    semimartingale_verdict,
)
from skewbm.structure.skew_density import (
    EffectiveIntervalSet,
    SkewDensity,
    glue_effective_intervals,
)

_logger = logging.getLogger("skewbm.reports.analysis")


@dataclasses.dataclass
class AnalysisRun:
    """The report together with the objects it was computed from.

    Attributes:

      density (SkewDensity | None): ρ, only when existence holds.

      effective (EffectiveIntervalSet | None): Its effective intervals.
    """
    report: AnalysisReport
    analysis: StructureAnalysis
    existence: ExistenceReport
    barriers: BarrierClassification
    constants: ConstantChoice | None = None
    density: SkewDensity | None = None
    effective: EffectiveIntervalSet | None = None


def _interval_rows(analysis: StructureAnalysis) -> list[IntervalRow]:
    d = analysis.decomposition
    stop = min(len(d), MAX_REPORT_ROWS)
    return [
        IntervalRow(lower=float(d.lower[n]),
                    upper=float(d.upper[n]),
                    reference=float(d.reference[n]),
                    level=int(d.level[n])) for n in range(stop)
    ]


def _conservative_summary(report: ConservativeReport) -> ConservativeSummary:
    return ConservativeSummary(
        verdict=report.verdict,
        confidence=report.confidence,
        ends=[
            EndRow(interval=end.interval,
                   end=end.end,
                   explodes=end.explodes,
                   confidence=end.confidence,
                   stable_digits=None
                   if end.study is None else end.study.stable_digits)
            for end in report.ends
        ])


def _barriers(analysis: StructureAnalysis,
              options: ProfileOptions | None) -> BarrierClassification:
    if analysis.stats is None:
        return BarrierClassification(
            notes=[f"barriers not classified: {analysis.problem}"])
    return classify_barriers(analysis.measure, analysis.decomposition,
                             analysis.profiles, options)


def analyze_measure(m: CheckedMeasure,
                    spec_hash: str,
                    scale: float = 1.0,
                    target: ConstantsTargetT = "any_valid",
                    beta: float | None = None,
                    options: ProfileOptions | None = None) -> AnalysisRun:
    """Decide existence and, when it holds, build ρ and its effective
    intervals.

    Args:

      m (CheckedMeasure): The measure.

      spec_hash (str): Digest of the spec `m` was built from.

      scale (float): Every cₙ is multiplied by this factor. No verdict
      depends on it.

      target (ConstantsTargetT): How to choose the cₙ.

      beta (float | None): Level ratio of Cantor constants.

      options (ProfileOptions | None): Numeric knobs of the profiles.

    Raises: `ValueError` when `scale` is not positive.
    """
    if not scale > 0:
        raise ValueError(f"Scale must be positive, got {scale}")
    analysis = analyze_structure(m, options)
    existence = check_existence_conditions(m, options, analysis=analysis)
    barriers = _barriers(analysis, options)
    fields: dict = {
        "spec_hash": spec_hash,
        "interval_count": len(analysis.decomposition),
        "intervals": _interval_rows(analysis),
        "barriers": barriers.entries,
        "barrier_notes": barriers.notes,
        "conditions": {
            str(number): verdict
            for number, verdict in sorted(existence.conditions.items())
        },
        "exists": existence.exists,
        "unique": existence.unique,
        "irreducible_exists": existence.irreducible_exists,
        "scale": scale,
    }
    run = AnalysisRun(report=AnalysisReport(**fields,
                                            confidence=existence.confidence),
                      analysis=analysis,
                      existence=existence,
                      barriers=barriers)
    if existence.exists != "true" or analysis.stats is None:
        _logger.info("No density built, existence is %s", existence.exists)
        return run

    constants = construct_constants(analysis.decomposition,
                                    analysis.stats,
                                    target=target,
                                    failed=existence.failed,
                                    beta=beta)
    rho = SkewDensity(m, analysis.decomposition, analysis.profiles,
                      analysis.stats, constants.values * scale,
                      constants.ratio, options)
    es = glue_effective_intervals(rho)
    conservative = check_conservative(es)
    semimartingale: SemimartingaleReport = semimartingale_verdict(rho, es)
    notes = [
        f"effective interval around interval {k} left undecided"
        for k in es.undecided
    ]
    rows = [
        EffectiveRow(lower=a, upper=b, closed_left=left, closed_right=right)
        for a, b, left, right in es.flags()[:MAX_REPORT_ROWS]
    ]
    run.report = AnalysisReport(
        **fields,
        confidence=weakest(existence.confidence, conservative.confidence,
                           semimartingale.confidence),
        effective_interval_count=len(es),
        effective_intervals=rows,
        conservative=_conservative_summary(conservative),
        semimartingale=semimartingale,
        constants_target=constants.target,
        notes=notes)
    run.constants = constants
    run.density = rho
    run.effective = es
    return run


def density_rows(run: AnalysisRun) -> list[dict[str, float | int]]:
    """ρ per interval: ends, reference point, cₙ, ρ(e) and ρ(aₙ) at Ξ⁺.

    Raises: `ValueError` when no density was built.
    """
    if run.density is None:
        raise ValueError("No density, existence does not hold")
    rho = run.density
    d = rho.decomposition
    stop = min(len(d), MAX_REPORT_ROWS)
    at_reference = rho.value(d.reference[:stop], "right")
    lower = d.lower[:stop]
    barrier = np.isin(lower, rho.measure.xi_plus)
    at_lower = np.full(stop, np.nan)
    if np.any(barrier):
        at_lower[barrier] = rho.value(lower[barrier], "right")
    return [{
        "n": n,
        "a": float(d.lower[n]),
        "b": float(d.upper[n]),
        "e": float(d.reference[n]),
        "c": float(rho.constants[n]),
        "rho_e": float(at_reference[n]),
        "rho_xi_plus": float(at_lower[n]),
    } for n in range(stop)]


def effective_rows(run: AnalysisRun) -> list[dict[str, float | int | bool]]:
    """One row per effective interval with its endpoint flags."""
    if run.effective is None:
        raise ValueError("No effective intervals, existence does not hold")
    return [{
        "k": k,
        "lower": a,
        "upper": b,
        "closed_left": left,
        "closed_right": right,
    } for k, (a, b, left,
              right) in enumerate(run.effective.flags()[:MAX_REPORT_ROWS])]


def study_cantor(spec: CantorSpec,
                 spec_hash: str,
                 beta: float | None = None) -> CantorStudy:
    """Verdict, gap census and witness constants of a Cantor construction.

    Args:

      spec (CantorSpec): The construction, materialized up to `spec.depth`.

      spec_hash (str): Digest of the spec.

      beta (float | None): Level ratio of the witness constants, the middle
      of the feasible range when `None` and the range is not empty.

    Raises: `BetaOutOfRange` when an explicit `beta` is not feasible.
    """
    report = cantor_verdict(spec)
    if beta is not None:
        # Validates the range without materializing the gaps.
        ratio = length_ratio(spec)
        if ratio is None:
            raise ValueError("Witness constants need geometric level lengths")
        if not 2 * ratio < beta < 0.5:
            raise BetaOutOfRange(beta, 2 * ratio, 0.5)
    elif report.verdict == "infinitely_many_irreducible":
        beta = report.beta
    lengths = level_lengths(spec, spec.depth)
    counts = level_counts(spec.depth)
    with np.errstate(under="ignore"):
        terms = counts * np.sqrt(lengths)
    census = [
        LevelRow(level=level,
                 gaps=int(counts[level - 1]),
                 length=float(lengths[level - 1]),
                 constant=None if beta is None else beta**(level - 1))
        for level in range(1, spec.depth + 1)
    ]
    return CantorStudy(spec_hash=spec_hash,
                       report=report,
                       census=census,
                       beta=beta,
                       series_terms=terms.tolist())
