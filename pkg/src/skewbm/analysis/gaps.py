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
"""Level arithmetic of generalized Cantor sets.

Level ℓ ≥ 1 of the construction holds 2^(ℓ−1) gaps of equal length. The
middle-proportion model removes the open middle α_ℓ-th part of every interval
left after level ℓ − 1, the power-law model gives level ℓ gaps the length
α_1·…·α_ℓ (α^ℓ for constant α).
"""

from __future__ import annotations

import dataclasses
import math
from typing import Literal

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, ConfigDict, Field, model_validator
from typing_extensions import Self

from skewbm.analysis.expressions import Real
from skewbm.analysis.quadrature import ratio_verdict
from skewbm.analysis.types import ConfidenceT, FloatArrayT, GapModelT

# Levels used by numeric series tests when lengths are not geometric.
SERIES_LEVELS: int = 200


class AlphaRule(BaseModel):
    """The proportions α_j, j ≥ 1.

    Attributes:

      kind (Literal["constant", "geometric", "power"]): α_j = alpha,
      alpha·r^(j−1) or alpha·j^(−p).

      alpha (float): α_1, in (0, 1).

      r (float): Ratio of the geometric rule, in (0, 1].

      p (float): Exponent of the power rule, positive.
    """
    model_config = ConfigDict(frozen=True)

    kind: Literal["constant", "geometric", "power"] = "constant"
    alpha: Real = Field(gt=0, lt=1)
    r: Real = Field(default=1.0, gt=0, le=1)
    p: Real = Field(default=1.0, gt=0)

    def __call__(self, j: FloatArrayT) -> FloatArrayT:
        j = np.asarray(j, dtype=np.float64)
        match self.kind:
            case "constant":
                return np.full_like(j, self.alpha)
            case "geometric":
                return self.alpha * self.r**(j - 1)
            case _:
                return self.alpha * j**(-self.p)

    @property
    def constant(self) -> bool:
        return self.kind == "constant" or (self.kind == "geometric" and
                                            self.r == 1)

    @property
    def summable(self) -> bool:
        """Whether Σ α_j < ∞."""
        match self.kind:
            case "constant":
                return False
            case "geometric":
                return self.r < 1
            case _:
                return self.p > 1


class CantorSpec(BaseModel):
    """A generalized Cantor set inside [0, 1] and its truncation depth."""
    model_config = ConfigDict(frozen=True)

    alphas: AlphaRule
    depth: int = Field(default=20, ge=1)
    gap_model: GapModelT = "middle_proportion"

    @model_validator(mode="after")
    def power_law_fits(self) -> Self:
        # The power-law lengths must leave room for the gaps of level 2.
        if self.gap_model == "power_law" and self.alphas.alpha >= 0.5:
            raise ValueError(
                f"Power-law gaps of α = {self.alphas.alpha} overlap, "
                f"α must be below 1/2")
        return self


def level_lengths(spec: CantorSpec, levels: int) -> FloatArrayT:
    """Gap length of every level 1..levels."""
    j = np.arange(1, levels + 1, dtype=np.float64)
    alphas = spec.alphas(j)
    match spec.gap_model:
        case "power_law":
            return np.exp(np.cumsum(np.log(alphas)))
        case _:
            kept = np.concatenate([[0.0], np.cumsum(np.log((1 - alphas) / 2))])
            return alphas * np.exp(kept[:-1])


def level_counts(levels: int) -> FloatArrayT:
    """Number of gaps of every level 1..levels."""
    return 2.0**np.arange(levels, dtype=np.float64)


def length_ratio(spec: CantorSpec) -> float | None:
    """Ratio of consecutive level lengths when it is constant."""
    if not spec.alphas.constant:
        return None
    alpha = spec.alphas.alpha
    if spec.gap_model == "power_law":
        return alpha
    return (1 - alpha) / 2


def complement_measure(spec: CantorSpec) -> float:
    """Lebesgue measure of the limit set K as the model treats it.

    The power-law model is taken with K Lebesgue-null; its geometric
    residue is reported separately by `power_law_residue`.
    """
    if spec.gap_model == "power_law" or not spec.alphas.summable:
        return 0.0
    j = np.arange(1, 100_000, dtype=np.float64)
    return float(np.exp(np.sum(np.log1p(-spec.alphas(j)))))


def power_law_residue(spec: CantorSpec) -> float:
    """1 − total power-law gap length, the part of [0, 1] the gap lengths
    α^ℓ leave uncovered."""
    lengths = level_lengths(spec.model_copy(update={"gap_model": "power_law"}),
                            SERIES_LEVELS)
    return float(1 - np.sum(level_counts(SERIES_LEVELS) * lengths))


def geometric_verdict(ratio: float) -> bool:
    """Convergence of Σ ratio^ℓ."""
    return ratio < 1


class GapTail(BaseModel):
    """The gaps of all levels deeper than the materialized depth.

    Every such gap carries ϱ ≡ 1, so A = B = length and V = 2.
    """
    model_config = ConfigDict(frozen=True)

    spec: CantorSpec

    @property
    def first_level(self) -> int:
        return self.spec.depth + 1

    def complement_null(self) -> bool:
        return complement_measure(self.spec) == 0.0

    def series_verdict(self, exponent: float,
                       constant_ratio: float = 1.0) -> tuple[bool | None,
                                                             ConfidenceT]:
        """Convergence of Σ_ℓ 2^(ℓ−1)·(length_ℓ)^exponent / β^(ℓ−1).

        Args:

          exponent (float): Power applied to the gap length (1/2 for the
          connection test, 1 for Σ B/c).

          constant_ratio (float): β when the constants decay like β^(ℓ−1),
          1 for constant weights.

        Returns the verdict (`None` when undecided) and its confidence.
        """
        ratio = length_ratio(self.spec)
        if ratio is not None:
            return geometric_verdict(2 * ratio**exponent /
                                     constant_ratio), "certified"
        lengths = level_lengths(self.spec, SERIES_LEVELS)
        ell = np.arange(SERIES_LEVELS, dtype=np.float64)
        with np.errstate(over="ignore", under="ignore"):
            log_terms = ell * math.log(2) + exponent * np.log(
                lengths) - ell * math.log(constant_ratio)
            terms = np.exp(np.clip(log_terms, -700, 700))
        return ratio_verdict(terms), "numeric"


@dataclasses.dataclass(frozen=True)
class MaterializedGaps:
    """Gaps of levels 1..depth inside [0, 1], sorted by their left end.

    Attributes:

      lower (FloatArrayT): Left ends a_n.

      upper (FloatArrayT): Right ends b_n.

      level (npt.NDArray[np.int64]): Level ℓ ≥ 1 of every gap.

      tail (GapTail): The gaps of deeper levels.
    """
    lower: FloatArrayT
    upper: FloatArrayT
    level: npt.NDArray[np.int64]
    tail: GapTail

    def __len__(self) -> int:
        return len(self.lower)

    def endpoints(self) -> FloatArrayT:
        """All gap ends together with 0 and 1, sorted. All lie in K."""
        return np.unique(np.concatenate([[0.0, 1.0], self.lower,
                                         self.upper]))

    def meets_limit_set(self, lo: float, hi: float) -> bool | None:
        """Whether the open interval (lo, hi) contains a point of K.

        Returns `None` when (lo, hi) is too short to be resolved by the
        materialized levels.
        """
        if hi <= 0 or lo >= 1:
            return False
        ends = self.endpoints()
        first = np.searchsorted(ends, lo, side="right")
        if first < len(ends) and ends[first] < hi:
            return True
        index = np.searchsorted(self.lower, lo, side="right") - 1
        if index >= 0 and hi <= self.upper[index]:
            return False
        return None
