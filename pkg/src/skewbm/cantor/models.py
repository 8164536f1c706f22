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
"""Generalized Cantor sets and the skew Brownian motions they carry.

The measure puts +1 on the left end and −1 on the right end of every bounded
gap, −1 at 0 and +1 at 1, so that every interval of G = (−∞, 0) ∪ gaps ∪
(1, ∞) is ended by barriers pointing outward.
"""

from __future__ import annotations

import logging
import math

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from tqdm.auto import tqdm

from skewbm.analysis.decomposition import IntervalDecomposition
from skewbm.analysis.decomposition import cantor_decomposition
from skewbm.analysis.errors import BetaOutOfRange, DepthOverflow
from skewbm.analysis.gaps import CantorSpec, GapTail, MaterializedGaps
from skewbm.analysis.gaps import SERIES_LEVELS, complement_measure
from skewbm.analysis.gaps import geometric_verdict, length_ratio
from skewbm.analysis.gaps import level_counts, level_lengths
from skewbm.analysis.gaps import power_law_residue
from skewbm.analysis.measure import CheckedMeasure, measure_from_arrays
from skewbm.analysis.quadrature import ratio_verdict
from skewbm.analysis.types import CantorVerdictT, ConfidenceT, FloatArrayT
from skewbm.structure.connection import ConstantChoice, level_constants

# Deepest level generated, 2^(MAX_DEPTH − 1) gaps.
MAX_DEPTH: int = 22

_logger = logging.getLogger("skewbm.cantor.models")


def _split(left: FloatArrayT, right: FloatArrayT,
           gap: FloatArrayT) -> tuple[FloatArrayT, FloatArrayT]:
    """Centered gaps of the given lengths inside [left, right]."""
    middle = (left + right) / 2
    return middle - gap / 2, middle + gap / 2


def generate_cantor(
        spec: CantorSpec,
        show_progressbar: bool = False
) -> tuple[IntervalDecomposition, CheckedMeasure]:
    """Materialize the gaps of levels 1..spec.depth and the barrier measure.

    Args:

      spec (CantorSpec): Proportions, depth and gap model.

      show_progressbar (bool): Show a tqdm bar over the levels.

    Raises: `DepthOverflow` when the depth exceeds `MAX_DEPTH` or gaps of
    some level do not fit into what is left of [0, 1] in double precision.
    """
    if spec.depth > MAX_DEPTH:
        raise DepthOverflow(spec.depth, f"at most {MAX_DEPTH} levels")
    power_law = spec.gap_model == "power_law"
    lengths = level_lengths(spec, spec.depth)
    alphas = spec.alphas(np.arange(1, spec.depth + 1, dtype=np.float64))
    left = np.array([0.0])
    right = np.array([1.0])
    lower: list[FloatArrayT] = []
    upper: list[FloatArrayT] = []
    levels: list[np.ndarray] = []
    for level in tqdm(range(1, spec.depth + 1),
                      desc="Cantor levels",
                      disable=not show_progressbar):
        remaining = right - left
        if power_law:
            gap = np.full_like(left, lengths[level - 1])
        else:
            gap = alphas[level - 1] * remaining
        if np.any(gap >= remaining):
            raise DepthOverflow(
                spec.depth, f"level {level} gaps of length {gap[0]:g} do not "
                f"fit into intervals of length {remaining[0]:g}")
        lo, hi = _split(left, right, gap)
        if np.any(lo <= left) or np.any(hi >= right) or np.any(hi <= lo):
            raise DepthOverflow(spec.depth,
                                f"level {level} is below double precision")
        lower.append(lo)
        upper.append(hi)
        levels.append(np.full(len(lo), level, dtype=np.int64))
        left, right = (np.ravel(np.column_stack([left, hi])),
                       np.ravel(np.column_stack([lo, right])))
        _logger.debug("Level %d: %d gaps of length %g", level, len(lo),
                      float(gap[0]))
    all_lower = np.concatenate(lower)
    order = np.argsort(all_lower, kind="stable")
    gaps = MaterializedGaps(lower=all_lower[order],
                            upper=np.concatenate(upper)[order],
                            level=np.concatenate(levels)[order],
                            tail=GapTail(spec=spec))
    locations = np.concatenate([[0.0, 1.0], gaps.lower, gaps.upper])
    weights = np.concatenate([[-1.0, 1.0],
                              np.ones(len(gaps)), -np.ones(len(gaps))])
    m = measure_from_arrays(locations, weights, gaps)
    return cantor_decomposition(gaps), m


class CantorReport(BaseModel):
    """Regime of the Cantor construction.

    Attributes:

      verdict (CantorVerdictT): "unique" when no two intervals of G can be
      scale-connected, "infinitely_many_irreducible" when all of them can
      and K is Lebesgue-null.

      beta_range (tuple[float, float] | None): The open interval (2r, 1/2)
      of witness ratios, `None` when empty or when the level lengths are not
      geometric.

      beta (float | None): A witness ratio, the midpoint of `beta_range`.

      complement_measure (float): Lebesgue measure of K.

      residue (float | None): 1 − total gap length of the power-law model.
    """
    model_config = ConfigDict(frozen=True)

    verdict: CantorVerdictT
    confidence: ConfidenceT = "certified"
    beta_range: tuple[float, float] | None = None
    beta: float | None = None
    complement_measure: float = 0.0
    residue: float | None = None
    notes: list[str] = Field(default_factory=list)


def _sqrt_series(spec: CantorSpec,
                 levels: int) -> tuple[bool | None, ConfidenceT]:
    """Convergence of Σ_ℓ 2^ℓ·(length_ℓ)^(1/2)."""
    ratio = length_ratio(spec)
    if ratio is not None:
        return geometric_verdict(2 * math.sqrt(ratio)), "certified"
    with np.errstate(under="ignore"):
        terms = level_counts(levels) * np.sqrt(level_lengths(spec, levels))
    return ratio_verdict(terms), "numeric"


def beta_range(spec: CantorSpec) -> tuple[float, float] | None:
    """(2r, 1/2) for geometric level lengths of ratio r, `None` if empty."""
    ratio = length_ratio(spec)
    if ratio is None or 2 * ratio >= 0.5:
        return None
    return 2 * ratio, 0.5


def cantor_verdict(spec: CantorSpec,
                   series_levels: int = SERIES_LEVELS) -> CantorReport:
    """Decide between uniqueness and infinitely many irreducible motions.

    Args:

      spec (CantorSpec): The construction.

      series_levels (int): Levels summed when the lengths are not geometric.
    """
    notes = []
    residue = None
    if spec.gap_model == "power_law":
        residue = power_law_residue(spec)
        notes.append(f"power-law gap lengths leave {residue:.6g} of [0, 1] "
                     "uncovered, K is treated as Lebesgue-null")
    k_measure = complement_measure(spec)
    converges, confidence = _sqrt_series(spec, series_levels)
    if confidence == "numeric":
        _logger.warning("Σ 2^ℓ·√length decided numerically from %d levels: "
                        "%s", series_levels, converges)
    feasible = beta_range(spec)
    beta = None if feasible is None else sum(feasible) / 2
    match converges:
        case False:
            verdict: CantorVerdictT = "unique"
            notes.append("Σ 2^ℓ·√length diverges, no two intervals can be "
                         "scale-connected")
        case True if k_measure == 0.0:
            verdict = "infinitely_many_irreducible"
            notes.append(f"Σ 2^ℓ·√length converges, witness β = {beta}")
        case True:
            verdict = "unknown"
            notes.append(f"intervals are connectable but K has Lebesgue "
                         f"measure {k_measure:.6g}, no motion is irreducible")
        case _:
            verdict = "unknown"
    return CantorReport(verdict=verdict,
                        confidence=confidence,
                        beta_range=feasible,
                        beta=beta,
                        complement_measure=k_measure,
                        residue=residue,
                        notes=notes)


def cantor_constants(spec: CantorSpec,
                     beta: float,
                     decomposition: IntervalDecomposition | None = None
                     ) -> ConstantChoice:
    """cₙ = 1 on (−∞, 0), (1, ∞) and cₙ = β^(ℓ−1) on level ℓ gaps.

    Both Σ cₙ·length and Σ length/cₙ are geometric with ratios 2βr and
    2r/β, so 2r < β < 1/2 makes them converge and lets every pair of
    intervals be scale-connected.

    Raises: `BetaOutOfRange` unless 2r < β < 1/2, `ValueError` when the
    level lengths are not geometric.
    """
    ratio = length_ratio(spec)
    if ratio is None:
        raise ValueError("Witness constants need geometric level lengths")
    if not 2 * ratio < beta < 0.5:
        raise BetaOutOfRange(beta, 2 * ratio, 0.5)
    if decomposition is None:
        decomposition, _ = generate_cantor(spec)
    mass_ratio = 2 * beta * ratio
    inverse_ratio = 2 * ratio / beta
    if not (geometric_verdict(mass_ratio) and
            geometric_verdict(inverse_ratio)):
        raise BetaOutOfRange(beta, 2 * ratio, 0.5)
    _logger.debug("Σ c·length ratio %g, Σ length/c ratio %g", mass_ratio,
                  inverse_ratio)
    return ConstantChoice(values=level_constants(decomposition, beta),
                          ratio=beta,
                          target="maximally_glued")
