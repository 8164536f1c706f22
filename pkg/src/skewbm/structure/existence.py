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
"""Existence, uniqueness and irreducibility of the diffusion related to μ.

A diffusion related to μ exists iff

  (1) Ξ⁺ consists of the finite left ends aₙ with |μ|((aₙ, eₙ)) < ∞ and Ξ⁻
      of the finite right ends bₙ with |μ|((eₙ, bₙ)) < ∞,
  (2) |μ|(G^c ∖ Ξ) = 0,
  (3) ∫ϱ is finite near every finite endpoint,
  (4) ϱ has bounded variation on a half where ∫1/ϱ is finite toward a
      finite endpoint,
  (5) the Feller integral diverges on the unbounded ends of G.
"""

from __future__ import annotations

import dataclasses
import logging
import math

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from skewbm.analysis.decomposition import IntervalDecomposition
from skewbm.analysis.decomposition import locally_finite_decomposition
from skewbm.analysis.errors import AtomOnBoundary, NonRadonError
from skewbm.analysis.extended_real import weakest
from skewbm.analysis.measure import CheckedMeasure, mass_on_interval
from skewbm.analysis.profile import DensityProfile, ProfileOptions
from skewbm.analysis.profile import StatsTable, interval_profile
from skewbm.analysis.profile import profiles_and_stats
from skewbm.analysis.types import ConfidenceT, TriStateT, tri_state
from skewbm.structure.conservative import explodes_at
from skewbm.structure.connection import decide_scale_connectable

_logger = logging.getLogger("skewbm.structure.existence")


def all_of(verdicts: list[TriStateT]) -> TriStateT:
    """Three-valued conjunction: any "false" wins over "unknown"."""
    if "false" in verdicts:
        return "false"
    if "unknown" in verdicts:
        return "unknown"
    return "true"


class ConditionVerdict(BaseModel):
    """One existence condition.

    Attributes:

      holds (TriStateT): The verdict.

      confidence (ConfidenceT): "numeric" when a heuristic contributed.

      evidence (list[str]): Human readable reasons, most important first.
    """
    model_config = ConfigDict(frozen=True)

    holds: TriStateT
    confidence: ConfidenceT = "certified"
    evidence: list[str] = Field(default_factory=list)


class ExistenceReport(BaseModel):
    """The five existence conditions and the verdicts derived from them.

    Attributes:

      conditions (dict[int, ConditionVerdict]): Conditions 1 to 5.

      exists (TriStateT): Conjunction of the conditions.

      unique (TriStateT): Whether exactly one diffusion is related to μ.

      irreducible_exists (TriStateT): Whether an irreducible one exists.
    """
    model_config = ConfigDict(frozen=True)

    conditions: dict[int, ConditionVerdict]
    exists: TriStateT
    unique: TriStateT = "unknown"
    irreducible_exists: TriStateT = "unknown"

    @property
    def confidence(self) -> ConfidenceT:
        return weakest(*(c.confidence for c in self.conditions.values()))

    @property
    def failed(self) -> list[str]:
        return [
            f"condition ({number}): {'; '.join(c.evidence) or 'fails'}"
            for number, c in sorted(self.conditions.items())
            if c.holds == "false"
        ]


@dataclasses.dataclass
class StructureAnalysis:
    """Everything the structure checks share for one measure.

    Attributes:

      measure (CheckedMeasure): The measure.

      decomposition (IntervalDecomposition): Intervals of G.

      profiles (dict[int, DensityProfile]): Profiles built so far.

      stats (StatsTable | None): Statistics of every interval, `None` when
      profiles could not be built.

      problem (str): Why the profiles could not be built.
    """
    measure: CheckedMeasure
    decomposition: IntervalDecomposition
    profiles: dict[int, DensityProfile]
    stats: StatsTable | None
    options: ProfileOptions | None = None
    problem: str = ""

    def profile(self, index: int) -> DensityProfile:
        return interval_profile(self.measure, self.decomposition,
                                self.profiles, index, self.options)


def analyze_structure(m: CheckedMeasure,
                      options: ProfileOptions | None = None
                     ) -> StructureAnalysis:
    """Decompose G and compute the profile statistics of every interval."""
    decomposition = locally_finite_decomposition(m)
    try:
        profiles, stats = profiles_and_stats(m, decomposition, options)
    except (AtomOnBoundary, NonRadonError) as error:
        _logger.info("Profiles unavailable: %s", error)
        return StructureAnalysis(m, decomposition, {}, None, options,
                                 str(error))
    return StructureAnalysis(m, decomposition, profiles, stats, options)


def _finite_ends(analysis: StructureAnalysis, variant: str) -> list[float]:
    """The ends expected in Ξ⁺ ("plus") or Ξ⁻ ("minus")."""
    d = analysis.decomposition
    ends = d.lower if variant == "plus" else d.upper
    uniform = (d.level > 0) & np.isfinite(ends)
    result = ends[uniform].tolist()
    for index in np.flatnonzero((d.level == 0) & np.isfinite(ends)):
        a, b, e = d.interval(int(index))
        lo, hi = (a, e) if variant == "plus" else (e, b)
        mass = mass_on_interval(analysis.measure, lo, hi)
        if mass.is_unknown:
            raise LookupError(float(ends[index]))
        if mass.is_finite:
            result.append(float(ends[index]))
    return result


def _condition_barrier_sets(analysis: StructureAnalysis) -> ConditionVerdict:
    m = analysis.measure
    evidence = []
    try:
        expected = {
            "plus": np.array(sorted(_finite_ends(analysis, "plus"))),
            "minus": np.array(sorted(_finite_ends(analysis, "minus"))),
        }
    except LookupError as error:
        return ConditionVerdict(
            holds="unknown",
            confidence="numeric",
            evidence=[f"|μ| near {error.args[0]} is unresolved"])
    for variant, actual in (("plus", m.xi_plus), ("minus", m.xi_minus)):
        extra = np.setdiff1d(actual, expected[variant])
        missing = np.setdiff1d(expected[variant], actual)
        sign = "⁺" if variant == "plus" else "⁻"
        if len(extra):
            evidence.append(f"Ξ{sign} has points which are not admissible "
                            f"interval ends: {extra[:5].tolist()}")
        if len(missing):
            evidence.append(f"interval ends missing from Ξ{sign}: "
                            f"{missing[:5].tolist()}")
    return ConditionVerdict(holds="false" if evidence else "true",
                            evidence=evidence)


def _condition_complement(analysis: StructureAnalysis) -> ConditionVerdict:
    m = analysis.measure
    d = analysis.decomposition
    if m.gaps is not None:
        return ConditionVerdict(holds="true",
                                evidence=["μ charges only the gap ends"])
    evidence = []
    for left, right in d.complement:
        if right > left:
            evidence.append(f"|μ| is infinite on [{left}, {right}]")
    for z, w in zip(m.atom_locations, m.atom_weights):
        if abs(w) != 1.0 and d.locate(float(z)) is None:
            evidence.append(f"atom {w:g} at {z:g} lies outside G")
    return ConditionVerdict(holds="false" if evidence else "true",
                            evidence=evidence)


def _condition_integrable(analysis: StructureAnalysis) -> ConditionVerdict:
    assert analysis.stats is not None
    d = analysis.decomposition
    stats = analysis.stats
    evidence = []
    verdicts: list[TriStateT] = []
    for column, ends in ((stats.A_left, d.lower), (stats.A_right, d.upper)):
        mask = np.isfinite(ends)
        values = column[mask]
        for end in ends[mask][np.isinf(values)][:5]:
            evidence.append(f"∫ϱ diverges toward {end:g}")
        verdicts.append("false" if np.any(np.isinf(values)) else "true")
        if np.any(np.isnan(values)):
            verdicts.append("unknown")
    return ConditionVerdict(holds=all_of(verdicts),
                            confidence=_table_confidence(stats),
                            evidence=evidence)


def _condition_bounded_variation(
        analysis: StructureAnalysis) -> ConditionVerdict:
    assert analysis.stats is not None
    d = analysis.decomposition
    stats = analysis.stats
    evidence = []
    verdicts: list[TriStateT] = []
    confidence: ConfidenceT = "certified"
    for index in np.flatnonzero(d.level == 0).tolist():
        for half, end, inverse in (("left", d.lower[index],
                                    stats.B_left[index]),
                                   ("right", d.upper[index],
                                    stats.B_right[index])):
            if not math.isfinite(end) or math.isinf(inverse):
                continue
            if math.isnan(inverse):
                verdicts.append("unknown")
                continue
            certificate = analysis.profile(index).bv(half)
            confidence = weakest(confidence, certificate.confidence)
            match certificate.kind:
                case "bv":
                    verdicts.append("true")
                case "not_bv":
                    verdicts.append("false")
                    evidence.append(f"ϱ is not of bounded variation toward "
                                    f"{end:g}")
                case _:
                    verdicts.append("unknown")
    return ConditionVerdict(holds=all_of(verdicts),
                            confidence=confidence,
                            evidence=evidence)


def _condition_non_explosion(analysis: StructureAnalysis) -> ConditionVerdict:
    d = analysis.decomposition
    evidence = []
    verdicts: list[TriStateT] = []
    confidence: ConfidenceT = "certified"
    for index, side, direction in ((0, "a", -1), (len(d) - 1, "b", 1)):
        end = d.lower[index] if side == "a" else d.upper[index]
        if math.isfinite(end):
            continue
        profile = analysis.profile(index)
        explodes, how, study = explodes_at(profile.log_value,
                                           profile.tail(side).feller_finite(),
                                           float(d.reference[index]),
                                           direction)
        confidence = weakest(confidence, how)
        verdicts.append(tri_state(None if explodes is None else not explodes))
        if explodes:
            evidence.append(f"the Feller integral converges toward {end}: "
                            f"{study.values[-1]:.6g}")
    return ConditionVerdict(holds=all_of(verdicts),
                            confidence=confidence,
                            evidence=evidence)


def _table_confidence(stats: StatsTable) -> ConfidenceT:
    return "certified" if bool(np.all(stats.certified)) else "numeric"


def check_uniqueness_irreducibility(
        analysis: StructureAnalysis,
        report: ExistenceReport) -> tuple[TriStateT, TriStateT]:
    """Whether the diffusion is unique and whether an irreducible one exists.

    The diffusion is unique iff no choice of constants makes two intervals
    scale-connected, and an irreducible one exists iff every pair of
    intervals can be connected and G^c is Lebesgue-null. Both are "false"
    when no diffusion exists.
    """
    if report.exists == "false":
        return "false", "false"
    d = analysis.decomposition
    stats = analysis.stats
    if stats is None:
        return "unknown", "unknown"
    if len(d) == 1:
        return "true", "true"
    if d.limit_set is not None:
        tail = d.limit_set.tail
        connection = decide_scale_connectable(stats.row(0),
                                              stats.row(len(d) - 1),
                                              _rows(stats, 1, len(d) - 1),
                                              tail.complement_null(), tail)
        connections = [connection]
        null_complement = tail.complement_null()
    else:
        connections = [
            decide_scale_connectable(stats.row(i), stats.row(i + 1), [],
                                     d.gap_lebesgue_null(i, i + 1))
            for i in range(len(d) - 1)
        ]
        null_complement = all(r == l for l, r in d.complement)
    if "connectable" in connections:
        unique: TriStateT = "false"
    elif "unknown" in connections:
        unique = "unknown"
    else:
        unique = "true"
    if not null_complement or "not_connectable" in connections:
        irreducible: TriStateT = "false"
    elif "unknown" in connections:
        irreducible = "unknown"
    else:
        irreducible = "true"
    return unique, irreducible


def _rows(stats: StatsTable, start: int, stop: int) -> StatsTable:
    return StatsTable(**{
        field.name: getattr(stats, field.name)[start:stop]
        for field in dataclasses.fields(stats)
    })


def check_existence_conditions(
        m: CheckedMeasure,
        options: ProfileOptions | None = None,
        analysis: StructureAnalysis | None = None) -> ExistenceReport:
    """Evaluate the five existence conditions and the derived verdicts.

    Args:

      m (CheckedMeasure): The measure.

      options (ProfileOptions | None): Numeric knobs of the profiles.

      analysis (StructureAnalysis | None): A previous `analyze_structure`
      result for `m`, to avoid recomputing profiles.

    Unknown verdicts never raise, they lower the confidence instead.
    """
    analysis = analysis or analyze_structure(m, options)
    conditions = {
        1: _condition_barrier_sets(analysis),
        2: _condition_complement(analysis),
    }
    if analysis.stats is None:
        missing = ConditionVerdict(holds="unknown",
                                   confidence="numeric",
                                   evidence=[analysis.problem])
        conditions.update({3: missing, 4: missing, 5: missing})
    else:
        conditions[3] = _condition_integrable(analysis)
        conditions[4] = _condition_bounded_variation(analysis)
        conditions[5] = _condition_non_explosion(analysis)
    exists = all_of([c.holds for c in conditions.values()])
    report = ExistenceReport(conditions=conditions, exists=exists)
    unique, irreducible = check_uniqueness_irreducibility(analysis, report)
    _logger.info("Existence %s, unique %s, irreducible %s", exists, unique,
                 irreducible)
    return report.model_copy(update={
        "unique": unique,
        "irreducible_exists": irreducible
    })
