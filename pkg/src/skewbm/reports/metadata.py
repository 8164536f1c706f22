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
"""Persistent reports of analyses and Cantor studies."""

import math
from pathlib import Path
from typing import Annotated, Literal, TypeVar

from pydantic import BaseModel, BeforeValidator, Field, PlainSerializer
import semver

import skewbm
from skewbm.analysis.types import ConfidenceT, TriStateT
from skewbm.cantor.models import CantorReport
from skewbm.reports.utils import safe_write
from skewbm.structure.barriers import BarrierEntry
from skewbm.structure.existence import ConditionVerdict
from skewbm.structure.semimartingale import SemimartingaleReport

# Longer tables are truncated, the counts stay exact.
MAX_REPORT_ROWS: int = 4096


def _dump_float(value: float) -> float | str:
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return value


def _load_float(value: object) -> object:
    if isinstance(value, str):
        return float(value)
    return value


# JSON has no infinities, they are written as the strings "inf" and "-inf".
ReportFloat = Annotated[float,
                        BeforeValidator(_load_float),
                        PlainSerializer(_dump_float, when_used="json")]


class IntervalRow(BaseModel):
    """One interval Iₙ = (lower, upper) of G."""
    lower: ReportFloat
    upper: ReportFloat
    reference: ReportFloat
    level: int = 0


class EffectiveRow(BaseModel):
    """One effective interval and which of its ends belong to it."""
    lower: ReportFloat
    upper: ReportFloat
    closed_left: bool
    closed_right: bool


class EndRow(BaseModel):
    """Explosion verdict at an unbounded end of an effective interval."""
    interval: int
    end: Literal["-inf", "+inf"]
    explodes: bool | None
    confidence: ConfidenceT
    stable_digits: ReportFloat | None = None


class ConservativeSummary(BaseModel):
    verdict: Literal["conservative", "explodes", "unknown"]
    confidence: ConfidenceT = "certified"
    ends: list[EndRow] = Field(default_factory=list)


class AnalysisReport(BaseModel):
    """Everything `skewbm analyze` knows about a measure.

    Attributes:

      skewbm_version (str): Version of the library which wrote the report.
      Auto-filled.

      spec_hash (str): SHA-256 of the normalized spec.

      interval_count (int): Number of intervals of G, `intervals` holds at
      most `MAX_REPORT_ROWS` of them.

      barriers (list[BarrierEntry]): Ξ with labels and evidence.

      conditions (dict[str, ConditionVerdict]): The five existence
      conditions keyed "1" to "5".

      exists (TriStateT): Whether a general skew Brownian motion exists.

      effective_intervals (list[EffectiveRow]): Empty unless it exists.

      conservative (ConservativeSummary | None): Explosion verdicts, `None`
      unless it exists.

      semimartingale (SemimartingaleReport | None): Whether the motion is a
      semimartingale, `None` unless it exists.

      constants_target (str | None): Strategy used to choose the cₙ.

      scale (float): Factor applied to every cₙ.
    """
    skewbm_version: str = skewbm.__version__
    spec_hash: str
    interval_count: int
    intervals: list[IntervalRow] = Field(default_factory=list)
    barriers: list[BarrierEntry] = Field(default_factory=list)
    barrier_notes: list[str] = Field(default_factory=list)
    conditions: dict[str, ConditionVerdict] = Field(default_factory=dict)
    exists: TriStateT
    unique: TriStateT = "unknown"
    irreducible_exists: TriStateT = "unknown"
    confidence: ConfidenceT = "certified"
    effective_interval_count: int = 0
    effective_intervals: list[EffectiveRow] = Field(default_factory=list)
    conservative: ConservativeSummary | None = None
    semimartingale: SemimartingaleReport | None = None
    constants_target: str | None = None
    scale: float = 1.0
    notes: list[str] = Field(default_factory=list)


class LevelRow(BaseModel):
    """Gaps of one level of a Cantor construction."""
    level: int
    gaps: int
    length: float
    constant: float | None = None


class CantorStudy(BaseModel):
    """Everything `skewbm cantor` reports.

    Attributes:

      census (list[LevelRow]): Gap count and length per materialized level,
      with the witness constant β^(ℓ−1) when a β was chosen.
    """
    skewbm_version: str = skewbm.__version__
    spec_hash: str
    report: CantorReport
    census: list[LevelRow] = Field(default_factory=list)
    beta: float | None = None
    series_terms: list[float] = Field(default_factory=list)


ReportT = TypeVar("ReportT", AnalysisReport, CantorStudy)


def save_report(report: AnalysisReport | CantorStudy, path: Path) -> Path:
    """Write `report` as indented JSON, replacing `path` atomically."""
    return safe_write(Path(path), report.model_dump_json(indent=2) + "\n")


def load_report(path: Path, model: type[ReportT]) -> ReportT:
    """Read a report written by `save_report`.

    Raises: `ValueError` when the report was written by a newer version of
    skewbm.
    """
    report = model.model_validate_json(
        Path(path).read_text(encoding="utf-8"))
    if semver.Version.parse(report.skewbm_version).compare(
            skewbm.__version__) > 0:
        raise ValueError(f"skewbm is outdated, version {skewbm.__version__}, "
                         f"but the report was written by "
                         f"{report.skewbm_version}")
    return report
