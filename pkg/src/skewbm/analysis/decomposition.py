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
"""The open set G on which |μ| is locally finite and its interval
decomposition G = ∪ₙ (aₙ, bₙ)."""

from __future__ import annotations

import dataclasses
import math

import numpy as np
import numpy.typing as npt

from skewbm.analysis.errors import UndecidableLocalFiniteness
from skewbm.analysis.expressions import PowerExpr
from skewbm.analysis.gaps import GapTail, MaterializedGaps
from skewbm.analysis.measure import CheckedMeasure
from skewbm.analysis.types import FloatArrayT


def reference_point(lower: float, upper: float) -> float:
    """eₙ: the midpoint of a bounded interval, one unit inside the finite end
    of a half-line and 0 for the whole line."""
    if math.isfinite(lower) and math.isfinite(upper):
        return (lower + upper) / 2
    if math.isfinite(lower):
        return lower + 1.0
    if math.isfinite(upper):
        return upper - 1.0
    return 0.0


@dataclasses.dataclass(frozen=True)
class IntervalDecomposition:
    """Disjoint open intervals Iₙ = (aₙ, bₙ) with reference points eₙ, sorted
    from left to right.

    Attributes:

      lower (FloatArrayT): aₙ, possibly `-inf`.

      upper (FloatArrayT): bₙ, possibly `inf`.

      reference (FloatArrayT): eₙ with aₙ < eₙ < bₙ.

      level (npt.NDArray[np.int64]): Cantor level of a gap, 0 otherwise.

      complement (tuple[tuple[float, float], ...]): Closed components
      [l, r] of G^c (points have l = r). Empty for Cantor structures, where
      G^c is the limit set K.

      limit_set (MaterializedGaps | None): The Cantor structure.
    """
    lower: FloatArrayT
    upper: FloatArrayT
    reference: FloatArrayT
    level: npt.NDArray[np.int64]
    complement: tuple[tuple[float, float], ...] = ()
    limit_set: MaterializedGaps | None = None

    def __len__(self) -> int:
        return len(self.lower)

    def interval(self, index: int) -> tuple[float, float, float]:
        """(aₙ, bₙ, eₙ) of the interval with the given index."""
        return (float(self.lower[index]), float(self.upper[index]),
                float(self.reference[index]))

    def locate(self, z: float) -> int | None:
        """Index of the interval containing z, `None` when z ∈ G^c."""
        index = int(np.searchsorted(self.lower, z, side="left")) - 1
        if index >= 0 and self.lower[index] < z < self.upper[index]:
            return index
        return None

    def starting_at(self, z: float) -> int | None:
        """Index of the interval with aₙ = z."""
        index = int(np.searchsorted(self.lower, z, side="left"))
        if index < len(self) and self.lower[index] == z:
            return index
        return None

    def ending_at(self, z: float) -> int | None:
        """Index of the interval with bₙ = z."""
        index = int(np.searchsorted(self.upper, z, side="left"))
        if index < len(self) and self.upper[index] == z:
            return index
        return None

    def uniform(self, index: int) -> bool:
        """Whether ϱ ≡ 1 on the interval (bounded Cantor gaps)."""
        return bool(self.level[index] > 0)

    @property
    def gap_tail(self) -> GapTail | None:
        return None if self.limit_set is None else self.limit_set.tail

    def gap_lebesgue_null(self, first: int, second: int) -> bool:
        """Whether G^c ∩ [b_first, a_second] has zero Lebesgue measure."""
        lo = float(self.upper[first])
        hi = float(self.lower[second])
        if self.limit_set is not None:
            if lo >= 1 or hi <= 0:
                return True
            if self.limit_set.meets_limit_set(lo, hi) is False and hi > lo:
                return True
            return self.limit_set.tail.complement_null()
        for left, right in self.complement:
            if right > left and left < hi and right > lo:
                return False
        return True


def _singular_points(m: CheckedMeasure) -> list[tuple[float, float]]:
    components: list[tuple[float, float]] = []
    for piece in m.density_pieces:
        expression = piece.expression
        if isinstance(expression, PowerExpr) and not (
                expression.locally_integrable):
            if piece.lo <= expression.x0 <= piece.hi:
                components.append((expression.x0, expression.x0))
    for rule in m.infinite_rules:
        if rule.accumulation is None:
            raise UndecidableLocalFiniteness(
                rule.name, "infinite rules must declare their accumulation "
                "point")
        if not rule.summable and math.isfinite(rule.accumulation):
            components.append((rule.accumulation, rule.accumulation))
    for region in m.infinite_regions:
        components.append((region.lo, region.hi))
    return components


def _merge(components: list[tuple[float, float]]) -> list[tuple[float, float]]:
    merged: list[tuple[float, float]] = []
    for left, right in sorted(components):
        if merged and left <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], right))
        else:
            merged.append((left, right))
    return merged


def decomposition_from_bounds(
        bounds: list[tuple[float, float]],
        complement: tuple[tuple[float, float], ...] = ()
) -> IntervalDecomposition:
    """Build a decomposition from (aₙ, bₙ) pairs sorted left to right."""
    lower = np.array([a for a, _ in bounds], dtype=np.float64)
    upper = np.array([b for _, b in bounds], dtype=np.float64)
    reference = np.array([reference_point(a, b) for a, b in bounds],
                         dtype=np.float64)
    return IntervalDecomposition(lower=lower,
                                 upper=upper,
                                 reference=reference,
                                 level=np.zeros(len(bounds), dtype=np.int64),
                                 complement=complement)


def cantor_decomposition(gaps: MaterializedGaps) -> IntervalDecomposition:
    """(−∞, 0), the gaps in increasing order, (1, ∞)."""
    lower = np.concatenate([[-math.inf], gaps.lower, [1.0]])
    upper = np.concatenate([[0.0], gaps.upper, [math.inf]])
    reference = (lower + upper) / 2
    reference[0] = -1.0
    reference[-1] = 2.0
    level = np.concatenate([[0], gaps.level, [0]]).astype(np.int64)
    return IntervalDecomposition(lower=lower,
                                 upper=upper,
                                 reference=reference,
                                 level=level,
                                 limit_set=gaps)


def locally_finite_decomposition(m: CheckedMeasure) -> IntervalDecomposition:
    """G = {z : |μ|((z − ε, z + ε)) < ∞ for some ε > 0} as intervals.

    G^c is read off the measure description: points where a power density
    is not integrable, accumulation points of rules with divergent tails,
    declared infinite regions, or the limit set of a Cantor structure.

    Raises: `UndecidableLocalFiniteness` when an infinite rule does not
    declare its accumulation point.
    """
    if m.gaps is not None:
        return cantor_decomposition(m.gaps)
    complement = _merge(_singular_points(m))
    bounds = []
    left = -math.inf
    for lo, hi in complement:
        if lo > left:
            bounds.append((left, lo))
        left = hi
    if left < math.inf:
        bounds.append((left, math.inf))
    return decomposition_from_bounds(bounds, tuple(complement))
