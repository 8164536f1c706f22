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
"""Scale connection between intervals of G and the choice of the constants
cₙ in ρ = cₙ·ϱₙ.

Intervals Iᵢ and Iⱼ (eᵢ < eⱼ) can be made scale-connected by some admissible
constants iff the part of G^c between them is Lebesgue-null, Bᵢʳ and Bⱼˡ are
finite and Σ √((Aₙ + Vₙ)·Bₙ) over the intervals in between converges. The
constants cₙ = √(Bₙ/(Aₙ + Vₙ)) then witness the connection, and no other
choice can do better since cₙ(Aₙ + Vₙ) + Bₙ/cₙ ≥ 2√((Aₙ + Vₙ)·Bₙ).
"""

from __future__ import annotations

import dataclasses
import logging
import math

import numpy as np

from skewbm.analysis.decomposition import IntervalDecomposition
from skewbm.analysis.errors import ConditionsNotMet
from skewbm.analysis.gaps import GapTail, length_ratio
from skewbm.analysis.profile import IntervalStats, StatsTable
from skewbm.analysis.types import ConnectionT, ConstantsTargetT, FloatArrayT

_logger = logging.getLogger("skewbm.structure.connection")


@dataclasses.dataclass(frozen=True)
class ConstantChoice:
    """Constants cₙ for every interval of a decomposition.

    Attributes:

      values (FloatArrayT): cₙ > 0 in decomposition order.

      ratio (float | None): β when the constants of a Cantor structure follow
      cₙ = β^(ℓ−1) on level ℓ gaps, also for the unmaterialized levels.

      target (ConstantsTargetT): The strategy used.
    """
    values: FloatArrayT
    ratio: float | None = None
    target: ConstantsTargetT = "any_valid"


def _as_table(between: StatsTable | list[IntervalStats]) -> StatsTable:
    if isinstance(between, StatsTable):
        return between
    return StatsTable.from_stats(list(between))


def witness_terms(between: StatsTable | list[IntervalStats]) -> FloatArrayT:
    """√((Aₙ + Vₙ)·Bₙ) for the intervals between two candidates."""
    table = _as_table(between)
    with np.errstate(invalid="ignore"):
        return np.sqrt((table.A + table.V) * table.B)


def decide_scale_connectable(stats_i: IntervalStats,
                             stats_j: IntervalStats,
                             between: StatsTable | list[IntervalStats],
                             gap_measure_zero: bool,
                             tail: GapTail | None = None) -> ConnectionT:
    """Whether some admissible constants make Iᵢ and Iⱼ scale-connected.

    Args:

      stats_i (IntervalStats): Statistics of the left interval.

      stats_j (IntervalStats): Statistics of the right interval.

      between (StatsTable | list[IntervalStats]): Statistics of every
      materialized interval lying between them.

      gap_measure_zero (bool): Whether G^c between eᵢ and eⱼ is
      Lebesgue-null.

      tail (GapTail | None): Unmaterialized Cantor gaps lying between them,
      if any.
    """
    if not gap_measure_zero:
        return "not_connectable"
    ends = (stats_i.B_right.finiteness(), stats_j.B_left.finiteness())
    if False in ends:
        return "not_connectable"
    terms = witness_terms(between)
    if np.any(np.isinf(terms)):
        return "not_connectable"
    undecided = None in ends or bool(np.any(np.isnan(terms)))
    if tail is not None:
        verdict, confidence = tail.series_verdict(0.5)
        if verdict is False:
            return "not_connectable"
        if verdict is None:
            undecided = True
        elif confidence == "numeric":
            _logger.warning("Connection through the gap tail decided "
                            "numerically")
    return "unknown" if undecided else "connectable"


def level_constants(decomposition: IntervalDecomposition,
                    beta: float) -> FloatArrayT:
    """cₙ = β^(ℓ−1) on level ℓ Cantor gaps and 1 on the unbounded
    intervals."""
    level = decomposition.level
    return np.where(level > 0, beta**(np.maximum(level, 1) - 1),
                    1.0).astype(np.float64)


def _outward_cap(values: FloatArrayT, stats: StatsTable,
                 run: list[int]) -> None:
    """Cap cₙ by Bₙ·Σ cₘAₘ over the members of `run` before n, in place."""
    total = 0.0
    for n in run:
        cap = stats.B[n] * total
        if math.isfinite(cap) and cap > 0:
            values[n] = min(values[n], cap)
        total += values[n] * stats.A[n]


def _any_valid(decomposition: IntervalDecomposition,
               stats: StatsTable) -> FloatArrayT:
    """cₙ = φₙ ∧ ϕₙ with φₙ = 1/(n²Aₙ) and ϕₙ = 1/(n²Vₙ), each replaced by 1
    where the statistic is infinite or unknown.

    When the outermost interval on a side is bounded, the intervals beyond
    zero on that side are visited outward and each cₙ is further capped by
    Bₙ times Σ cₘAₘ over the intervals visited before it. A side ending in
    one unbounded interval is left uncapped.
    """
    n = np.arange(1, len(stats) + 1, dtype=np.float64)
    with np.errstate(divide="ignore"):
        phi = np.where(np.isfinite(stats.A), 1.0 / (n**2 * stats.A), 1.0)
        varphi = np.where(np.isfinite(stats.V), 1.0 / (n**2 * stats.V), 1.0)
    values = np.minimum(phi, varphi).astype(np.float64)
    values = np.where(np.isfinite(values), values, 1.0)
    indices = range(len(decomposition))
    if math.isfinite(decomposition.upper[-1]):
        _outward_cap(values, stats,
                     [k for k in indices if decomposition.lower[k] >= 0])
    if math.isfinite(decomposition.lower[0]):
        _outward_cap(values, stats, [
            k for k in reversed(indices) if decomposition.upper[k] <= 0
        ])
    return values


def _feasible_beta(decomposition: IntervalDecomposition) -> float | None:
    """Midpoint of the β range (2r, 1/2) when it is not empty."""
    tail = decomposition.gap_tail
    if tail is None or not tail.complement_null():
        return None
    ratio = length_ratio(tail.spec)
    if ratio is None or 2 * ratio >= 0.5:
        return None
    return (2 * ratio + 0.5) / 2


def construct_constants(decomposition: IntervalDecomposition,
                        stats: StatsTable,
                        target: ConstantsTargetT = "any_valid",
                        failed: list[str] | None = None,
                        beta: float | None = None) -> ConstantChoice:
    """Choose positive constants cₙ.

    Every choice keeps Σ cₙAₙ locally finite and Σ cₙVₙ finite on compacts.
    "any_valid" scales every interval down by n² and its own size;
    "maximally_glued" uses the witness √(Bₙ/(Aₙ + Vₙ)) wherever it is
    defined, and the level rule β^(ℓ−1) on Cantor structures whose
    intervals can be connected.

    Args:

      decomposition (IntervalDecomposition): Intervals of G.

      stats (StatsTable): Their statistics.

      target (ConstantsTargetT): The strategy.

      failed (list[str] | None): Failed existence conditions, if known.

      beta (float | None): β for Cantor structures, the middle of the
      feasible range by default.

    Raises: `ConditionsNotMet` when `failed` is not empty.
    """
    if failed:
        raise ConditionsNotMet(failed)
    values = _any_valid(decomposition, stats)
    if target == "any_valid":
        return ConstantChoice(values=values, target=target)
    if decomposition.limit_set is not None:
        beta = beta if beta is not None else _feasible_beta(decomposition)
        if beta is None:
            _logger.info("Cantor intervals cannot be connected, falling back "
                         "to any_valid constants")
            return ConstantChoice(values=values, target=target)
        return ConstantChoice(values=level_constants(decomposition, beta),
                              ratio=beta,
                              target=target)
    with np.errstate(divide="ignore", invalid="ignore"):
        witness = np.sqrt(stats.B / (stats.A + stats.V))
    usable = np.isfinite(witness) & (witness > 0)
    return ConstantChoice(values=np.where(usable, witness, values),
                          target=target)
